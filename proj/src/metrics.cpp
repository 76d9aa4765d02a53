#include "smux/metrics.hpp"

#include "smux/errors.hpp"

#include <cmath>

namespace smux {

namespace {

double substituted(double count) { return count > 0.0 ? count : kZeroCountSubstitute; }

}  // namespace

Measured g2_from_counts(double heralds, double coinc_a, double coinc_b, double coinc_ab) {
  if (!(heralds > 0.0 && coinc_a > 0.0 && coinc_b > 0.0)) {
    throw UndefinedMetric("g2 needs nonzero H, C_a and C_b");
  }
  Measured out;
  out.value = coinc_ab * heralds / (coinc_a * coinc_b);
  const double ab = substituted(coinc_ab);
  const double rel2 = 1.0 / ab + 1.0 / heralds + 1.0 / coinc_a + 1.0 / coinc_b;
  out.sigma = ab * heralds / (coinc_a * coinc_b) * std::sqrt(rel2);
  out.bound = coinc_ab <= 0.0;
  return out;
}

Measured g2_heralded(const Tally& tally) {
  return g2_from_counts(static_cast<double>(tally.heralds), static_cast<double>(tally.coinc_a),
                        static_cast<double>(tally.coinc_b), static_cast<double>(tally.coinc_ab));
}

Measured g2_heralded_widened(const Tally& tally) {
  Measured out = g2_heralded(tally);
  const double h = static_cast<double>(tally.heralds);
  const double ca = static_cast<double>(tally.coinc_a);
  const double cb = static_cast<double>(tally.coinc_b);
  const double ab = static_cast<double>(tally.coinc_ab);
  const double ab_sigma = 1.0 + std::sqrt(ab + 0.75);
  const double scale = h / (ca * cb);
  const double value = ab * scale;
  const double rest2 = value * value * (1.0 / h + 1.0 / ca + 1.0 / cb);
  out.sigma = std::sqrt(ab_sigma * ab_sigma * scale * scale + rest2);
  return out;
}

Measured counter_rate(std::uint64_t count, std::uint64_t n_pulses, double scale) {
  if (n_pulses == 0) throw UndefinedMetric("rate over zero pulses");
  const double n = static_cast<double>(n_pulses);
  const double c = static_cast<double>(count);
  return {c / n * scale, std::sqrt(substituted(c)) / n * scale, count == 0};
}

Measured hsp_rate(const Tally& tally, double rep_rate_mhz) {
  return counter_rate(tally.coincidences, tally.n_pulses, rep_rate_mhz * 1e6);
}

Measured heralding_rate(const Tally& tally, double rep_rate_mhz) {
  return counter_rate(tally.heralds, tally.n_pulses, rep_rate_mhz * 1e6);
}

Measured car(const Tally& tally) {
  const double c = static_cast<double>(tally.coincidences);
  const double acc = static_cast<double>(tally.accidentals);
  if (c == 0.0 && acc == 0.0) throw UndefinedMetric("CAR undefined without coincidences");
  Measured out;
  const double c_eff = substituted(c);
  const double acc_eff = substituted(acc);
  out.value = c / acc_eff;
  out.sigma = c_eff / acc_eff * std::sqrt(1.0 / c_eff + 1.0 / acc_eff);
  out.bound = acc == 0.0;
  return out;
}

BreakEven breakeven(double one_minus_eta, unsigned m) {
  if (!(one_minus_eta >= 0.0 && one_minus_eta <= 1.0)) {
    throw InvalidParameter("extra transmission must lie in [0, 1]");
  }
  if (m < 1) throw InvalidParameter("mode count must be at least 1");
  const double gain = static_cast<double>(m) * one_minus_eta;
  return {gain, gain > 1.0};
}

double db_to_transmission(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }

double rate_ratio_for_loss(double new_db, double old_db) {
  return db_to_transmission(new_db) / db_to_transmission(old_db);
}

MetricsReport make_report(const Tally& tally, double rep_rate_mhz) {
  MetricsReport report;
  report.hsp_rate_hz = hsp_rate(tally, rep_rate_mhz);
  report.heralding_rate_hz = heralding_rate(tally, rep_rate_mhz);
  if (tally.heralds > 0 && tally.coinc_a > 0 && tally.coinc_b > 0) report.g2 = g2_heralded(tally);
  if (tally.coincidences > 0 || tally.accidentals > 0) report.car = car(tally);
  for (std::uint64_t c : tally.coincidences_per_mode) {
    report.per_mode_hsp_rate_hz.push_back(counter_rate(c, tally.n_pulses, rep_rate_mhz * 1e6));
  }
  return report;
}

}  // namespace smux

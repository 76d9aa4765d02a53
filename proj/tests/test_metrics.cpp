#include "smux/analytic.hpp"
#include "smux/config_io.hpp"
#include "smux/fit.hpp"
#include "smux/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace smux;

namespace {

Tally counts(std::uint64_t n, std::uint64_t h, std::uint64_t c, std::uint64_t acc) {
  Tally t = Tally::zero(1);
  t.n_pulses = n;
  t.heralds = h;
  t.coincidences = c;
  t.accidentals = acc;
  t.heralds_per_mode = {h};
  t.coincidences_per_mode = {c};
  return t;
}

SimulationConfig i0_with_splitter(double mu) {
  SimulationConfig c = load_config(SMUX_DEFAULTS_PATH).simulation;
  for (std::size_t k = 0; k < c.modes.size(); ++k) c.mu_per_mode[k] = c.modes[k].label == "i0" ? mu : 0.0;
  c.splitter_inserted = true;
  c.shifting_enabled = false;
  c.losses.modulator_present = false;
  return c;
}

}  // namespace

TEST_CASE("heralded g2 from counts") {
  const Measured g = g2_from_counts(1e6, 5000, 5000, 2);
  CHECK(g.value == doctest::Approx(0.08));
  CHECK_FALSE(g.bound);
  CHECK(g.sigma == doctest::Approx(0.08 * std::sqrt(0.5 + 1e-6 + 2e-4 + 2e-4)));

  const Measured zero = g2_from_counts(1e6, 5000, 5000, 0);
  CHECK(zero.value == 0.0);
  CHECK(zero.bound);
  CHECK(zero.sigma == doctest::Approx(0.04 * std::sqrt(1.0 + 1e-6 + 4e-4)));

  CHECK_THROWS_AS(g2_from_counts(0, 5000, 5000, 2), UndefinedMetric);
  CHECK_THROWS_AS(g2_from_counts(1e6, 0, 5000, 0), UndefinedMetric);
  CHECK_THROWS_AS(g2_from_counts(1e6, 5000, 0, 0), UndefinedMetric);

  Tally t = counts(1'000'000'000, 1'000'000, 0, 0);
  t.coinc_a = 5000;
  t.coinc_b = 5000;
  t.coinc_ab = 2;
  CHECK(g2_heralded(t).value == doctest::Approx(0.08));
  const Measured wide = g2_heralded_widened(t);
  CHECK(wide.value == doctest::Approx(0.08));
  CHECK(wide.sigma > g2_heralded(t).sigma);
  // Gehrels upper deviation for two counts
  CHECK(wide.sigma == doctest::Approx(std::hypot((1 + std::sqrt(2.75)) * 0.04,
                                                 0.08 * std::sqrt(1e-6 + 4e-4))));
}

TEST_CASE("heralded single-photon rate") {
  const Measured r = hsp_rate(counts(100'000'000, 50'000, 10'000, 0), 80.0);
  CHECK(r.value == doctest::Approx(8000.0));
  CHECK(r.sigma == doctest::Approx(80.0));
  CHECK_FALSE(r.bound);
  CHECK(heralding_rate(counts(100'000'000, 50'000, 10'000, 0), 80.0).value == doctest::Approx(40000.0));

  const Measured none = hsp_rate(counts(100'000'000, 50'000, 0, 0), 80.0);
  CHECK(none.value == 0.0);
  CHECK(none.bound);
  CHECK(none.sigma == doctest::Approx(0.8));
  CHECK_THROWS_AS(counter_rate(1, 0), UndefinedMetric);
}

TEST_CASE("coincidence-to-accidental ratio") {
  const Measured c = car(counts(1'000'000, 20'000, 1000, 10));
  CHECK(c.value == doctest::Approx(100.0));
  CHECK(c.sigma == doctest::Approx(100.0 * std::sqrt(0.001 + 0.1)));
  CHECK(c.sigma == doctest::Approx(31.78).epsilon(1e-3));
  CHECK_FALSE(c.bound);

  const Measured lower = car(counts(1'000'000, 20'000, 1000, 0));
  CHECK(lower.value == doctest::Approx(1000.0));
  CHECK(lower.bound);
  CHECK_THROWS_AS(car(counts(1'000'000, 20'000, 0, 0)), UndefinedMetric);
  CHECK(car(counts(1'000'000, 20'000, 0, 5)).value == 0.0);
}

TEST_CASE("break-even condition") {
  const BreakEven a = breakeven(0.32, 3);
  CHECK(a.gain == doctest::Approx(0.96));
  CHECK_FALSE(a.outperforms);
  const BreakEven b = breakeven(1.0, 2);
  CHECK(b.gain == 2.0);
  CHECK(b.outperforms);
  CHECK_FALSE(breakeven(1.0, 1).outperforms);
  CHECK(breakeven(0.0, 60).gain == 0.0);
  CHECK_THROWS_AS(breakeven(1.1, 2), InvalidParameter);
  CHECK_THROWS_AS(breakeven(-0.1, 2), InvalidParameter);
  CHECK_THROWS_AS(breakeven(0.5, 0), InvalidParameter);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    const unsigned m = 1 + static_cast<unsigned>(rng() % 100);
    const BreakEven r = breakeven(x, m);
    CHECK(r.outperforms == (static_cast<double>(m) * x > 1.0));
    CHECK_FALSE(breakeven(x, 1).outperforms);
  }
}

TEST_CASE("decibel conversions") {
  CHECK(db_to_transmission(0.0) == 1.0);
  CHECK(db_to_transmission(10.0) == doctest::Approx(0.1));
  CHECK(db_to_transmission(3.0) == doctest::Approx(0.501187).epsilon(1e-6));
  CHECK(rate_ratio_for_loss(1.5, 5.0) == doctest::Approx(std::pow(10.0, 0.35)));
  CHECK(rate_ratio_for_loss(1.5, 5.0) == doctest::Approx(2.24).epsilon(2e-3));
  CHECK(rate_ratio_for_loss(2.0, 2.0) == 1.0);
}

TEST_CASE("g2 of exact expected counts equals the enumeration oracle") {
  for (double mu : {0.005, 0.014, 0.05, 0.2}) {
    const SimulationConfig c = i0_with_splitter(mu);
    const ExpectedRates e = expected_rates(c);
    const double n = 1e9;
    const Measured g = g2_from_counts(n * e.herald, n * e.coinc_a, n * e.coinc_b, n * e.coinc_ab);
    const SpectralModeConfig& m = c.modes[c.mode_index("i0")];
    const double path = c.losses.delay_transmission *
                        filter_transmission(conditional_signal_spectrum(m, c.pump_fwhm_ghz),
                                            Lineshape::lorentzian(0.0, c.fp.fwhm_ghz), c.fp.peak_transmission);
    const double oracle = g2_heralded_oracle(c.statistics, mu, m.grating_transmission * m.heralding_detector_efficiency,
                                             path, c.detectors.eta_a, c.detectors.eta_b);
    CHECK(g.value == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("g2 uncertainty scales as the inverse square root of the pulse count") {
  SimulationConfig c = i0_with_splitter(1.0);
  Eigen::VectorXd log_n(4);
  Eigen::VectorXd log_sigma(4);
  const double pulses[] = {1e6, 3e6, 1e7, 3e7};
  for (int i = 0; i < 4; ++i) {
    c.n_pulses = static_cast<std::uint64_t>(pulses[i]);
    c.seed = 100 + static_cast<std::uint64_t>(i);
    const Measured g = g2_heralded(run(c));
    log_n(i) = std::log(pulses[i]);
    log_sigma(i) = std::log(g.sigma);
  }
  const LinearFit fit = fit_line(log_n, log_sigma, Eigen::VectorXd::Ones(4));
  INFO("exponent " << fit.slope);
  CHECK(std::abs(fit.slope + 0.5) <= 0.05);
}

TEST_CASE("CAR falls with the mean pair number") {
  double previous = std::numeric_limits<double>::infinity();
  for (double mu : {0.001, 0.005, 0.01, 0.05, 0.1, 0.3}) {
    const ExpectedRates e = expected_rates(i0_with_splitter(mu));
    const double ratio = e.coincidence / e.accidental();
    CHECK(ratio < previous);
    previous = ratio;
  }
  SimulationConfig low = i0_with_splitter(0.01);
  SimulationConfig high = i0_with_splitter(0.1);
  low.n_pulses = high.n_pulses = 20'000'000;
  const Measured a = car(run(low));
  const Measured b = car(run(high));
  CHECK(a.value - b.value > 3.0 * std::hypot(a.sigma, b.sigma));
}

TEST_CASE("metrics report") {
  SimulationConfig c = load_config(SMUX_DEFAULTS_PATH).simulation;
  c.splitter_inserted = true;
  c.mu_per_mode.assign(3, 0.1);
  c.n_pulses = 1'000'000;
  const Tally t = run(c);
  const MetricsReport r = make_report(t, c.rep_rate_mhz);
  CHECK(r.hsp_rate_hz.value == doctest::Approx(hsp_rate(t, c.rep_rate_mhz).value));
  REQUIRE(r.per_mode_hsp_rate_hz.size() == 3);
  double sum = 0.0;
  for (const Measured& m : r.per_mode_hsp_rate_hz) sum += m.value;
  CHECK(sum == doctest::Approx(r.hsp_rate_hz.value));
  CHECK(r.car.has_value());
  CHECK(r.g2.has_value());

  const MetricsReport empty = make_report(counts(10, 0, 0, 0), 80.0);
  CHECK_FALSE(empty.g2.has_value());
  CHECK_FALSE(empty.car.has_value());
}

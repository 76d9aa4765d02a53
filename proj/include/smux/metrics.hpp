#ifndef SMUX_METRICS_HPP
#define SMUX_METRICS_HPP

#include "smux/simengine.hpp"

#include <optional>
#include <string>
#include <vector>

namespace smux {

/// Estimate with a one-standard-deviation uncertainty. `bound` marks a value
/// obtained with the one-count substitution for a zero counter.
struct Measured {
  double value = 0.0;
  double sigma = 0.0;
  bool bound = false;
};

// Zero counters are replaced by this many counts when propagating errors.
inline constexpr double kZeroCountSubstitute = 1.0;

/// Heralded autocorrelation C_ab H / (C_a C_b) with first-order Poisson
/// propagation. Inputs are counts or expected counts.
Measured g2_from_counts(double heralds, double coinc_a, double coinc_b, double coinc_ab);
Measured g2_heralded(const Tally& tally);

/// Conservative variant for sparse C_ab: the C_ab term uses the Gehrels
/// upper deviation 1 + sqrt(C_ab + 3/4) instead of sqrt(C_ab).
Measured g2_heralded_widened(const Tally& tally);

/// Heralded single-photon rate in Hz for a repetition rate in MHz.
Measured hsp_rate(const Tally& tally, double rep_rate_mhz);
Measured heralding_rate(const Tally& tally, double rep_rate_mhz);
/// Rate per pulse for a raw counter over n pulses.
Measured counter_rate(std::uint64_t count, std::uint64_t n_pulses, double scale = 1.0);

/// Coincidence-to-accidental ratio C / C_acc; C_acc = 0 yields a flagged
/// lower bound C / 1.
Measured car(const Tally& tally);

struct BreakEven {
  double gain = 0.0;
  bool outperforms = false;
};

/// Rate gain m (1 - eta) of an m-mode multiplexed source whose extra
/// elements transmit (1 - eta), relative to the single-mode source without them.
BreakEven breakeven(double one_minus_eta, unsigned m);

double db_to_transmission(double loss_db);
/// Rate ratio when an element's loss changes from `old_db` to `new_db`.
double rate_ratio_for_loss(double new_db, double old_db);

struct MetricsReport {
  Measured hsp_rate_hz;
  std::optional<Measured> g2;
  std::optional<Measured> car;
  Measured heralding_rate_hz;
  std::vector<Measured> per_mode_hsp_rate_hz;
};

MetricsReport make_report(const Tally& tally, double rep_rate_mhz);

}  // namespace smux

#endif  // SMUX_METRICS_HPP

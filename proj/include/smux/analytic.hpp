#ifndef SMUX_ANALYTIC_HPP
#define SMUX_ANALYTIC_HPP

#include "smux/simengine.hpp"

#include <vector>

namespace smux {

/// Exact per-pulse probabilities of every tally event for a configuration.
///
/// Given the chosen herald, the pulse factorises over spectral modes: each
/// mode's pair number drives its own idler click and its own signal photons
/// independently, so every event probability is a product of per-mode sums
/// over the pair-number distribution.
struct ExpectedRates {
  double herald = 0.0;
  double coincidence = 0.0;
  double coinc_a = 0.0;
  double coinc_b = 0.0;
  double coinc_ab = 0.0;
  double singles_a = 0.0;
  double singles_b = 0.0;
  double signal_detection = 0.0;  // a or b, heralded or not
  std::vector<double> herald_per_mode;
  std::vector<double> coincidence_per_mode;

  /// Probability of a herald followed by a detection in the next pulse.
  double accidental() const { return herald * signal_detection; }
  double g2() const;
};

ExpectedRates expected_rates(const SimulationConfig& config);

/// Herald click probability of one mode on its own: the pair distribution
/// thinned by the grating, detected by the herald detector.
double herald_click_probability(const SimulationConfig& config, std::size_t mode);

/// Mean of the counter over n pulses, accounting for the partition
/// boundaries that break the previous-pulse link of accidentals.
double expected_accidentals(const SimulationConfig& config, const ExpectedRates& rates);

}  // namespace smux

#endif  // SMUX_ANALYTIC_HPP

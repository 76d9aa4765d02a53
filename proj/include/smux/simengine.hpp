#ifndef SMUX_SIMENGINE_HPP
#define SMUX_SIMENGINE_HPP

#include "smux/feedforward.hpp"
#include "smux/photonstat.hpp"
#include "smux/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace smux {

struct FabryPerotConfig {
  double fwhm_ghz = 6.0;
  double peak_transmission = 0.45;
  double detuning_ghz = 0.0;
};

struct LossBudget {
  double delay_transmission = 0.81;
  double modulator_transmission = 0.32;
  bool modulator_present = true;
};

struct SignalDetectors {
  double eta_a = 0.60;
  double eta_b = 0.60;
  double dark_a = 0.0;
  double dark_b = 0.0;
};

struct RoutingConfig {
  double v_pi = 70.0 / 44.0;
  double edge_ns = 0.7;
  std::vector<std::string> priority{"i0", "i+", "i-"};
  double delay_ns = 512.0;
};

/// Full description of one simulated experiment. Default members are the
/// reference apparatus values; modes and means are supplied by the caller.
struct SimulationConfig {
  StatisticsKind statistics = StatisticsKind::thermal;
  std::vector<SpectralModeConfig> modes;
  std::vector<double> mu_per_mode;
  double pump_fwhm_ghz = 24.0;
  FabryPerotConfig fp;
  LossBudget losses;
  SignalDetectors detectors;
  bool splitter_inserted = false;
  bool shifting_enabled = true;
  RoutingConfig routing;
  double rep_rate_mhz = 80.0;
  std::uint64_t n_pulses = 1'000'000;
  std::uint64_t seed = 1;
  std::uint32_t n_partitions = 1;

  RoutingPolicy routing_policy() const { return {routing.priority, routing.delay_ns}; }
  FeedForwardTable routing_table() const;
  std::size_t mode_index(const std::string& label) const;
};

/// Throws ConfigError when the configuration is inconsistent.
void validate(const SimulationConfig& config);

/// The three idler channels of the demonstrated source, in (i+, i0, i-) order.
std::vector<SpectralModeConfig> paper_modes();

/// Raw event counters. All coincidence counters are conditioned on the herald
/// of the same pulse; `accidentals` pairs a herald with the next pulse's
/// signal detection.
struct Tally {
  std::uint64_t n_pulses = 0;
  std::uint64_t heralds = 0;
  std::uint64_t coincidences = 0;
  std::uint64_t accidentals = 0;
  std::uint64_t coinc_a = 0;
  std::uint64_t coinc_b = 0;
  std::uint64_t coinc_ab = 0;
  std::uint64_t singles_a = 0;
  std::uint64_t singles_b = 0;
  std::vector<std::uint64_t> heralds_per_mode;
  std::vector<std::uint64_t> coincidences_per_mode;

  static Tally zero(std::size_t n_modes);
  bool operator==(const Tally&) const = default;
};

/// Field-wise sum; throws std::overflow_error on counter overflow.
Tally merge(const Tally& a, const Tally& b);

/// Uniform deviates from one deterministic substream.
class PulseRng {
 public:
  PulseRng(std::uint64_t seed, std::uint64_t stream);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Per-partition state carried between consecutive pulses.
struct PulseState {
  bool previous_herald = false;
};

enum class SamplingMode {
  per_pulse,  // draw every pulse explicitly
  skip_idle,  // jump over pulses with no pair and no dark count geometrically
};

struct RunOptions {
  SamplingMode sampling = SamplingMode::skip_idle;
  unsigned threads = 0;  // 0: one per hardware thread, capped at n_partitions
};

class Simulator {
 public:
  explicit Simulator(SimulationConfig config);

  const SimulationConfig& config() const { return config_; }
  const FeedForwardTable& table() const { return table_; }

  /// Signal-photon survival up to the detectors (delay, modulator, FP) for a
  /// photon of `mode` when `chosen` selected the ramp; nullopt means no ramp.
  double signal_transmission(std::optional<std::size_t> chosen, std::size_t mode) const;

  /// Simulates one pulse with unconditioned draws and updates the tally.
  void simulate_pulse(PulseRng& rng, PulseState& state, Tally& tally) const;

  /// Pulses handled by partition `index`.
  std::uint64_t partition_pulses(std::uint32_t index) const;
  Tally run_partition(std::uint32_t index, SamplingMode sampling = SamplingMode::skip_idle) const;
  Tally run(const RunOptions& options = {}) const;

 private:
  struct PulseDraw {
    std::vector<std::uint32_t> pairs;
    std::vector<bool> herald_dark;
    bool dark_a = false;
    bool dark_b = false;
    std::vector<bool> clicked;  // scratch
  };

  PulseDraw make_draw() const;
  std::uint32_t sample_pairs(std::size_t mode, double u) const;
  std::uint32_t sample_pairs_nonzero(std::size_t mode, double u) const;
  void draw_unconditioned(PulseRng& rng, PulseDraw& draw) const;
  void draw_active(PulseRng& rng, PulseDraw& draw) const;
  void process(PulseDraw& draw, PulseRng& rng, PulseState& state, Tally& tally) const;

  SimulationConfig config_;
  FeedForwardTable table_;
  std::size_t n_modes_;
  // Per-mode cumulative pair-number distributions.
  std::vector<Eigen::ArrayXd> pair_cdf_;
  std::vector<double> idler_detect_;
  // Row r < n_modes: ramp of mode r applied; row n_modes: no ramp.
  Eigen::ArrayXXd transmission_;
  // Idle-pulse skipping: one zero-probability per independent component
  // (pair counts, herald darks, signal darks) and its suffix products.
  std::vector<double> component_zero_;
  std::vector<double> component_zero_suffix_;
  double log_idle_ = 0.0;
};

/// Convenience wrapper: validate, build a Simulator and run it.
Tally run(const SimulationConfig& config, const RunOptions& options = {});

}  // namespace smux

#endif  // SMUX_SIMENGINE_HPP

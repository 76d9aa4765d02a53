#ifndef SMUX_CONFIG_IO_HPP
#define SMUX_CONFIG_IO_HPP

#include "smux/simengine.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace smux {

/// Operating point standing in for the unstated "maximum pump power".
struct Calibration {
  double max_power_mu = 0.0;
  double target_g2 = 0.05;
  std::string reference_mode = "i0";
};

/// A measured (slope, shift) pair and the V_pi that reproduces it.
struct RampCalibration {
  std::string label;
  double slope_v_per_ns = 0.0;
  double shift_ghz = 0.0;
  double v_pi = 0.0;
};

struct FomRow {
  std::string source;
  double window_ns = 0.0;
  double max_shift_ghz = 0.0;
};

/// Per-experiment sweep definitions read from the `experiments` section.
struct ExperimentSettings {
  std::vector<double> detunings_ghz;
  std::uint64_t scan_pulses = 10'000'000;

  std::vector<double> power_mu;
  std::uint64_t power_pulses = 10'000'000;

  std::vector<unsigned> mode_counts;
  std::optional<double> herald_probability;
  double mode_target = 0.99;
  std::uint64_t mode_pulses = 100'000;

  std::vector<double> breakeven_loss_db;
  std::vector<unsigned> breakeven_modes;

  std::vector<FomRow> fom_rows;

  std::optional<double> g2_mu;
  std::uint64_t g2_pulses = 100'000'000;
};

struct ConfigDocument {
  SimulationConfig simulation;
  Calibration calibration;
  std::vector<RampCalibration> ramp_calibration;
  ExperimentSettings experiments;
};

/// Parses a JSON configuration. Unknown keys, wrong types and invalid
/// simulation parameters raise ConfigError.
ConfigDocument parse_config(const std::string& text);
ConfigDocument load_config(const std::filesystem::path& path);

/// Serialises a simulation configuration as a document parse_config accepts.
std::string dump_simulation(const SimulationConfig& config);

}  // namespace smux

#endif  // SMUX_CONFIG_IO_HPP

#ifndef SMUX_HARNESS_HPP
#define SMUX_HARNESS_HPP

#include "smux/config_io.hpp"
#include "smux/fit.hpp"
#include "smux/metrics.hpp"
#include "smux/simengine.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace smux {

inline constexpr std::array<std::string_view, 6> kExperimentNames{
    "detuning-scan", "power-sweep", "mode-sweep", "breakeven", "fom-table", "g2-bench"};

inline constexpr std::string_view kDetuningScanHeader =
    "detuning_ghz,mode,shifting,rate_per_pulse,sigma";
inline constexpr std::string_view kPowerSweepHeader = "mu,config,hsp_rate_hz,sigma";
inline constexpr std::string_view kG2Header = "config,mu,g2,sigma,H,Ca,Cb,Cab";
inline constexpr std::string_view kModeSweepHeader =
    "m,p_herald,p_at_least_one,mc_p_at_least_one,mc_sigma";
inline constexpr std::string_view kBreakevenHeader =
    "modulator_loss_db,m,one_minus_eta,gain,outperforms,parity_m";
inline constexpr std::string_view kFomHeader = "source,window_ns,max_shift_ghz,fom,first_row_ratio";
inline constexpr std::string_view kSimulateHeader =
    "n_pulses,H,C,C_acc,Ca,Cb,Cab,Sa,Sb,hsp_rate_hz,hsp_sigma";

// Peak counts below this make a peak fit unreliable.
inline constexpr std::uint64_t kMinPeakCounts = 100;
// Fewer C_ab events than this widen the reported g2 interval.
inline constexpr std::uint64_t kMinG2Events = 25;

struct SweepAxis {
  std::string variable;
  std::vector<double> values;
};

struct ExperimentSpec {
  std::string name;
  SimulationConfig base;
  SweepAxis axis;
  std::string output_path;
  std::uint64_t pulses_per_point = 0;  // 0 keeps base.n_pulses
  unsigned threads = 0;
  std::string reference_mode = "i0";
  std::vector<unsigned> mode_counts;           // breakeven
  std::optional<double> herald_probability;    // mode-sweep
  double target = 0.99;                        // mode-sweep
  std::vector<FomRow> fom_rows;                // fom-table
};

/// Throws ConfigError for an unknown name or an empty / non-finite axis.
void validate(const ExperimentSpec& spec);

/// Builds the named experiment from a configuration document, with default
/// sweeps where the document has none.
ExperimentSpec make_experiment(const ConfigDocument& doc, const std::string& name);

/// Seed of sweep point `index`, derived from the base seed.
std::uint64_t point_seed(std::uint64_t seed, std::uint64_t index);

/// Decimal, 9 significant digits.
std::string csv_number(double value);

// ---------------------------------------------------------------------------

struct DetuningPoint {
  double detuning_ghz = 0.0;
  std::string mode;
  bool shifting = false;
  std::uint64_t count = 0;
  std::uint64_t n_pulses = 0;
  Measured rate;      // coincidences heralded by `mode`, per pulse
  double expected = 0.0;  // exact expectation of the same quantity
};

struct PeakSummary {
  std::string mode;
  bool shifting = false;
  double expected_center = 0.0;
  double fitted_center = 0.0;
  double amplitude = 0.0;
  double data_fwhm = 0.0;
  double model_fwhm = 0.0;
  std::uint64_t peak_count = 0;
  Measured rate_at_expected_center;
  bool insufficient = false;
};

struct DetuningScanResult {
  std::vector<DetuningPoint> points;
  std::vector<PeakSummary> peaks;
  bool insufficient_statistics = false;

  const PeakSummary& peak(const std::string& mode, bool shifting) const;
};

DetuningScanResult detuning_scan(const ExperimentSpec& spec);

struct PowerPoint {
  double mu = 0.0;
  std::string config;
  Tally tally;
  Measured rate_hz;
};

struct PowerFit {
  std::string config;
  LinearFit fit;
};

struct PowerSweepResult {
  std::vector<PowerPoint> points;
  std::vector<PowerFit> fits;

  const LinearFit& fit(const std::string& config) const;
};

/// Configurations compared in the power sweep at mean pair number `mu`:
/// every mode alone with the cavity parked on its peak, the multiplexed
/// source, and the reference mode with the modulator removed.
std::vector<std::pair<std::string, SimulationConfig>> power_sweep_configs(
    const SimulationConfig& base, double mu, const std::string& reference_mode);

PowerSweepResult power_sweep(const ExperimentSpec& spec);

struct ModeSweepPoint {
  unsigned m = 0;
  double p_herald = 0.0;
  double p_at_least_one = 0.0;
  Measured mc;
};

struct ModeSweepResult {
  std::vector<ModeSweepPoint> points;
  double p_herald = 0.0;
  double target = 0.0;
  unsigned smallest_m = 0;
};

/// 1 - (1 - p_h)^m.
double prob_at_least_one_herald(double p_herald, unsigned m);
/// Smallest m with prob_at_least_one_herald(p_herald, m) >= target.
unsigned smallest_mode_count(double p_herald, double target);

ModeSweepResult mode_sweep(const ExperimentSpec& spec);

struct BreakevenRow {
  double loss_db = 0.0;
  unsigned m = 0;
  double one_minus_eta = 0.0;
  BreakEven result;
  double parity_m = 0.0;  // mode count at which the gain reaches 1
};

std::vector<BreakevenRow> breakeven_report(const ExperimentSpec& spec);

struct FomEntry {
  FomRow row;
  double fom = 0.0;
  double first_row_ratio = 0.0;
};

std::vector<FomEntry> fom_table(const ExperimentSpec& spec);
std::vector<FomRow> default_fom_rows();

struct G2Entry {
  std::string config;
  double mu = 0.0;
  Tally tally;
  std::optional<Measured> g2;
  double expected_g2 = 0.0;
  bool widened = false;
};

struct G2BenchResult {
  std::vector<G2Entry> entries;  // (single, multiplexed) per mean
  std::vector<double> z_scores;  // |g2_single - g2_mux| / combined sigma per mean
  bool insufficient_statistics = false;

  bool consistent(double n_sigma = 3.0) const;
};

/// The two g2 configurations at mean `mu`: the reference mode alone with the
/// modulator removed, and the multiplexed source, both with the splitter in.
std::pair<SimulationConfig, SimulationConfig> g2_bench_configs(const SimulationConfig& base,
                                                               double mu,
                                                               const std::string& reference_mode);

G2BenchResult g2_bench(const ExperimentSpec& spec);

struct SimulateResult {
  Tally tally;
  MetricsReport report;
};

SimulateResult simulate(const ExperimentSpec& spec);

/// Signal transmission of `mode` alone with the cavity on its peak: delay,
/// modulator if requested, cavity overlap.
double single_mode_signal_transmission(const SimulationConfig& base, std::size_t mode,
                                       bool modulator_present);

/// Analytic heralded g2 of the reference mode alone, modulator removed.
double reference_g2(const SimulationConfig& base, const std::string& reference_mode, double mu);

/// Mean pair number at which reference_g2 equals `target_g2`.
double calibrate_max_power_mu(const SimulationConfig& base, const std::string& reference_mode,
                              double target_g2);

void write_csv(std::ostream& out, const DetuningScanResult& result);
void write_csv(std::ostream& out, const PowerSweepResult& result);
void write_csv(std::ostream& out, const ModeSweepResult& result);
void write_csv(std::ostream& out, const std::vector<BreakevenRow>& rows);
void write_csv(std::ostream& out, const std::vector<FomEntry>& rows);
void write_csv(std::ostream& out, const G2BenchResult& result);
void write_csv(std::ostream& out, const SimulateResult& result);

}  // namespace smux

#endif  // SMUX_HARNESS_HPP

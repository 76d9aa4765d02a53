#include "smux/harness.hpp"

#include "smux/analytic.hpp"
#include "smux/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace smux {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Tally run_point(SimulationConfig config, const ExperimentSpec& spec, std::uint64_t index) {
  if (spec.pulses_per_point > 0) config.n_pulses = spec.pulses_per_point;
  config.seed = point_seed(spec.base.seed, index);
  RunOptions options;
  options.threads = spec.threads;
  return run(config, options);
}

// Only mode k generates pairs; the other channels stay configured but dark,
// so the routing table is the multiplexed one.
SimulationConfig single_mode(const SimulationConfig& base, std::size_t k, double mu) {
  SimulationConfig c = base;
  c.mu_per_mode.assign(base.modes.size(), 0.0);
  c.mu_per_mode[k] = mu;
  return c;
}

std::string join_uint(std::uint64_t v) { return std::to_string(v); }

}  // namespace

void validate(const ExperimentSpec& spec) {
  if (std::find(kExperimentNames.begin(), kExperimentNames.end(), spec.name) ==
      kExperimentNames.end()) {
    throw ConfigError("unknown experiment '" + spec.name + "'");
  }
  if (spec.axis.values.empty()) throw ConfigError(spec.name + ": sweep axis is empty");
  for (double v : spec.axis.values) {
    if (!std::isfinite(v)) throw ConfigError(spec.name + ": sweep values must be finite");
  }
  validate(spec.base);
}

std::vector<FomRow> default_fom_rows() {
  return {{"this-work", 0.7, 22.0}, {"ref-a", 0.00625, 200.0}, {"ref-b", 0.004, 150.0}};
}

ExperimentSpec make_experiment(const ConfigDocument& doc, const std::string& name) {
  const ExperimentSettings& s = doc.experiments;
  ExperimentSpec spec;
  spec.name = name;
  spec.base = doc.simulation;
  spec.reference_mode = doc.calibration.reference_mode;

  if (name == "detuning-scan") {
    spec.axis.variable = "fp_detuning_ghz";
    spec.axis.values = s.detunings_ghz;
    if (spec.axis.values.empty()) {
      for (int d = -60; d <= 60; ++d) spec.axis.values.push_back(d);
    }
    spec.pulses_per_point = s.scan_pulses;
  } else if (name == "power-sweep") {
    spec.axis.variable = "mu";
    spec.axis.values = s.power_mu;
    if (spec.axis.values.empty()) spec.axis.values = {0.005, 0.01, 0.02, 0.03, 0.04, 0.05};
    spec.pulses_per_point = s.power_pulses;
  } else if (name == "mode-sweep") {
    spec.axis.variable = "m";
    for (unsigned m : s.mode_counts) spec.axis.values.push_back(m);
    if (spec.axis.values.empty()) spec.axis.values = {1, 3, 10, 60, 274, 275};
    spec.herald_probability = s.herald_probability;
    spec.target = s.mode_target;
    spec.pulses_per_point = s.mode_pulses;
  } else if (name == "breakeven") {
    spec.axis.variable = "modulator_loss_db";
    spec.axis.values = s.breakeven_loss_db;
    if (spec.axis.values.empty()) spec.axis.values = {0.0, 1.5, 3.0, 5.0};
    spec.mode_counts = s.breakeven_modes;
    if (spec.mode_counts.empty()) spec.mode_counts = {1, 2, 3, 4, 5, 10};
  } else if (name == "fom-table") {
    spec.fom_rows = s.fom_rows.empty() ? default_fom_rows() : s.fom_rows;
    spec.axis.variable = "row";
    for (std::size_t i = 0; i < spec.fom_rows.size(); ++i) spec.axis.values.push_back(double(i));
  } else if (name == "g2-bench") {
    spec.axis.variable = "mu";
    const double mu = s.g2_mu.value_or(doc.calibration.max_power_mu);
    if (!(mu > 0.0)) throw ConfigError("g2-bench needs a mean pair number or a calibration");
    spec.axis.values = {mu};
    spec.pulses_per_point = s.g2_pulses;
  } else {
    throw ConfigError("unknown experiment '" + name + "'");
  }
  validate(spec);
  return spec;
}

std::uint64_t point_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

std::string csv_number(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.9g", value);
  return buffer;
}

// --- detuning scan ----------------------------------------------------------

const PeakSummary& DetuningScanResult::peak(const std::string& mode, bool shifting) const {
  for (const PeakSummary& p : peaks) {
    if (p.mode == mode && p.shifting == shifting) return p;
  }
  throw ConfigError("no peak summary for mode " + mode);
}

DetuningScanResult detuning_scan(const ExperimentSpec& spec) {
  validate(spec);
  const SimulationConfig& base = spec.base;
  const std::vector<double>& detunings = spec.axis.values;
  const std::size_t n_modes = base.modes.size();

  DetuningScanResult result;
  std::uint64_t index = 0;
  for (bool shifting : {false, true}) {
    for (double d : detunings) {
      SimulationConfig c = base;
      c.shifting_enabled = shifting;
      c.fp.detuning_ghz = d;
      c.splitter_inserted = false;
      if (spec.pulses_per_point > 0) c.n_pulses = spec.pulses_per_point;
      const Tally tally = run_point(c, spec, index++);
      const ExpectedRates expected = expected_rates(c);
      for (std::size_t k = 0; k < n_modes; ++k) {
        DetuningPoint p;
        p.detuning_ghz = d;
        p.mode = base.modes[k].label;
        p.shifting = shifting;
        p.count = tally.coincidences_per_mode[k];
        p.n_pulses = tally.n_pulses;
        p.rate = counter_rate(p.count, tally.n_pulses);
        p.expected = expected.coincidence_per_mode[k];
        result.points.push_back(p);
      }
    }
  }

  const auto n = static_cast<Eigen::Index>(detunings.size());
  const Eigen::ArrayXd x = Eigen::Map<const Eigen::ArrayXd>(detunings.data(), n);
  for (bool shifting : {false, true}) {
    for (std::size_t k = 0; k < n_modes; ++k) {
      const SpectralModeConfig& mode = base.modes[k];
      Eigen::ArrayXd y(n);
      Eigen::ArrayXd sigma(n);
      std::vector<const DetuningPoint*> series;
      for (const DetuningPoint& p : result.points) {
        if (p.shifting == shifting && p.mode == mode.label) series.push_back(&p);
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = series[static_cast<std::size_t>(i)]->rate.value;
        sigma(i) = series[static_cast<std::size_t>(i)]->rate.sigma;
      }

      PeakSummary summary;
      summary.mode = mode.label;
      summary.shifting = shifting;
      summary.expected_center = shifting ? 0.0 : -mode.idler_center_offset_ghz;
      Eigen::Index top = 0;
      y.maxCoeff(&top);
      summary.peak_count = series[static_cast<std::size_t>(top)]->count;
      summary.insufficient = summary.peak_count < kMinPeakCounts;

      const Lineshape profile = coincidence_profile(mode, base.pump_fwhm_ghz, base.fp.fwhm_ghz);
      summary.model_fwhm = fwhm_of(profile);
      const PeakFit fit = fit_peak(
          x, y, sigma, [&profile](double u) { return profile.density(u); }, x(top) - 10.0,
          x(top) + 10.0);
      summary.fitted_center = fit.center;
      summary.amplitude = fit.amplitude;
      summary.data_fwhm = sampled_fwhm(x, y);

      Eigen::Index nearest = 0;
      (x - summary.expected_center).abs().minCoeff(&nearest);
      summary.rate_at_expected_center = series[static_cast<std::size_t>(nearest)]->rate;
      result.insufficient_statistics = result.insufficient_statistics || summary.insufficient;
      result.peaks.push_back(summary);
    }
  }
  return result;
}

// --- power sweep ------------------------------------------------------------

std::vector<std::pair<std::string, SimulationConfig>> power_sweep_configs(
    const SimulationConfig& base, double mu, const std::string& reference_mode) {
  std::vector<std::pair<std::string, SimulationConfig>> out;
  for (std::size_t k = 0; k < base.modes.size(); ++k) {
    SimulationConfig c = single_mode(base, k, mu);
    c.shifting_enabled = false;
    c.fp.detuning_ghz = -base.modes[k].idler_center_offset_ghz;
    c.splitter_inserted = false;
    out.emplace_back(base.modes[k].label, std::move(c));
  }
  SimulationConfig mux = base;
  mux.mu_per_mode.assign(base.modes.size(), mu);
  mux.shifting_enabled = true;
  mux.fp.detuning_ghz = 0.0;
  mux.splitter_inserted = false;
  out.emplace_back("smux", std::move(mux));

  const std::size_t ref = base.mode_index(reference_mode);
  SimulationConfig bare = single_mode(base, ref, mu);
  bare.losses.modulator_present = false;
  bare.shifting_enabled = false;
  bare.fp.detuning_ghz = -base.modes[ref].idler_center_offset_ghz;
  bare.splitter_inserted = false;
  out.emplace_back(reference_mode + "-nomod", std::move(bare));
  return out;
}

const LinearFit& PowerSweepResult::fit(const std::string& config) const {
  for (const PowerFit& f : fits) {
    if (f.config == config) return f.fit;
  }
  throw ConfigError("no power-sweep fit for configuration " + config);
}

PowerSweepResult power_sweep(const ExperimentSpec& spec) {
  validate(spec);
  PowerSweepResult result;
  std::uint64_t index = 0;
  std::vector<std::string> labels;
  for (double mu : spec.axis.values) {
    for (auto& [label, config] : power_sweep_configs(spec.base, mu, spec.reference_mode)) {
      PowerPoint p;
      p.mu = mu;
      p.config = label;
      p.tally = run_point(config, spec, index++);
      p.rate_hz = hsp_rate(p.tally, config.rep_rate_mhz);
      result.points.push_back(p);
      if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
    }
  }
  if (spec.axis.values.size() >= 2) {
    for (const std::string& label : labels) {
      std::vector<double> x, y, s;
      for (const PowerPoint& p : result.points) {
        if (p.config != label) continue;
        x.push_back(p.mu);
        y.push_back(p.rate_hz.value);
        s.push_back(p.rate_hz.sigma);
      }
      const auto n = static_cast<Eigen::Index>(x.size());
      result.fits.push_back({label, fit_line(Eigen::Map<Eigen::ArrayXd>(x.data(), n),
                                             Eigen::Map<Eigen::ArrayXd>(y.data(), n),
                                             Eigen::Map<Eigen::ArrayXd>(s.data(), n))});
    }
  }
  return result;
}

// --- mode sweep -------------------------------------------------------------

double prob_at_least_one_herald(double p_herald, unsigned m) {
  if (!(p_herald >= 0.0 && p_herald <= 1.0)) throw InvalidParameter("p_herald must lie in [0, 1]");
  if (p_herald == 1.0) return m > 0 ? 1.0 : 0.0;
  return -std::expm1(static_cast<double>(m) * std::log1p(-p_herald));
}

unsigned smallest_mode_count(double p_herald, double target) {
  if (!(p_herald > 0.0 && p_herald <= 1.0)) throw InvalidParameter("p_herald must lie in (0, 1]");
  if (!(target >= 0.0 && target < 1.0)) throw InvalidParameter("target must lie in [0, 1)");
  if (p_herald == 1.0 || target == 0.0) return target == 0.0 ? 0u : 1u;
  const double estimate = std::ceil(std::log1p(-target) / std::log1p(-p_herald));
  auto m = static_cast<unsigned>(std::max(0.0, estimate));
  while (m > 0 && prob_at_least_one_herald(p_herald, m - 1) >= target) --m;
  while (prob_at_least_one_herald(p_herald, m) < target) ++m;
  return m;
}

ModeSweepResult mode_sweep(const ExperimentSpec& spec) {
  validate(spec);
  ModeSweepResult result;
  result.target = spec.target;
  result.p_herald = spec.herald_probability
                        ? *spec.herald_probability
                        : herald_click_probability(spec.base, spec.base.mode_index(spec.reference_mode));
  result.smallest_m = smallest_mode_count(result.p_herald, spec.target);

  // Mean pair number whose herald probability is p_h for a lossless idler arm.
  const double p = result.p_herald;
  const double mu = spec.base.statistics == StatisticsKind::thermal ? p / (1.0 - p) : -std::log1p(-p);

  std::uint64_t index = 0;
  for (double value : spec.axis.values) {
    const auto m = static_cast<unsigned>(value);
    if (m < 1 || static_cast<double>(m) != value) throw ConfigError("mode counts must be positive integers");
    ModeSweepPoint point;
    point.m = m;
    point.p_herald = p;
    point.p_at_least_one = prob_at_least_one_herald(p, m);

    SimulationConfig c = spec.base;
    c.modes.clear();
    c.routing.priority.clear();
    for (unsigned k = 0; k < m; ++k) {
      // Distinct offsets only to keep labels and ramps unique; the signal arm is irrelevant here.
      c.modes.push_back({"c" + join_uint(k), 1e-3 * static_cast<double>(k), 12.0, 1.0, 1.0, 0.0});
    }
    c.mu_per_mode.assign(m, mu);
    c.shifting_enabled = false;
    c.splitter_inserted = false;
    const Tally tally = run_point(c, spec, index++);
    // At most one herald per pulse, so the fraction is binomial.
    const double n = static_cast<double>(tally.n_pulses);
    const double hit = static_cast<double>(tally.heralds);
    const double spread = std::max(hit * (n - hit) / n, kZeroCountSubstitute);
    point.mc = {hit / n, std::sqrt(spread) / n, tally.heralds == 0 || tally.heralds == tally.n_pulses};
    result.points.push_back(point);
  }
  return result;
}

// --- break-even and figure of merit ----------------------------------------

std::vector<BreakevenRow> breakeven_report(const ExperimentSpec& spec) {
  validate(spec);
  std::vector<BreakevenRow> rows;
  for (double db : spec.axis.values) {
    for (unsigned m : spec.mode_counts) {
      BreakevenRow row;
      row.loss_db = db;
      row.m = m;
      row.one_minus_eta = db_to_transmission(db);
      row.result = breakeven(row.one_minus_eta, m);
      row.parity_m = 1.0 / row.one_minus_eta;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<FomEntry> fom_table(const ExperimentSpec& spec) {
  validate(spec);
  std::vector<FomEntry> rows;
  for (const FomRow& r : spec.fom_rows) {
    rows.push_back({r, time_bandwidth_fom(r.window_ns, r.max_shift_ghz), 0.0});
  }
  for (FomEntry& e : rows) {
    e.first_row_ratio = e.fom > 0.0 ? rows.front().fom / e.fom : std::numeric_limits<double>::infinity();
  }
  return rows;
}

// --- g2 bench -----------------------------------------------------------------

std::pair<SimulationConfig, SimulationConfig> g2_bench_configs(const SimulationConfig& base,
                                                               double mu,
                                                               const std::string& reference_mode) {
  const std::size_t ref = base.mode_index(reference_mode);
  SimulationConfig single = single_mode(base, ref, mu);
  single.losses.modulator_present = false;
  single.shifting_enabled = false;
  single.fp.detuning_ghz = -base.modes[ref].idler_center_offset_ghz;
  single.splitter_inserted = true;

  SimulationConfig mux = base;
  mux.mu_per_mode.assign(base.modes.size(), mu);
  mux.shifting_enabled = true;
  mux.fp.detuning_ghz = 0.0;
  mux.splitter_inserted = true;
  return {single, mux};
}

bool G2BenchResult::consistent(double n_sigma) const {
  for (double z : z_scores) {
    if (!(z <= n_sigma)) return false;
  }
  return !z_scores.empty();
}

G2BenchResult g2_bench(const ExperimentSpec& spec) {
  validate(spec);
  G2BenchResult result;
  std::uint64_t index = 0;
  for (double mu : spec.axis.values) {
    const auto [single, mux] = g2_bench_configs(spec.base, mu, spec.reference_mode);
    std::array<G2Entry, 2> pair;
    const std::array<std::pair<std::string, const SimulationConfig*>, 2> configs{
        std::pair{spec.reference_mode + "-nomod", &single}, std::pair{std::string("smux"), &mux}};
    for (std::size_t i = 0; i < 2; ++i) {
      G2Entry& e = pair[i];
      e.config = configs[i].first;
      e.mu = mu;
      e.tally = run_point(*configs[i].second, spec, index++);
      e.expected_g2 = expected_rates(*configs[i].second).g2();
      if (e.tally.heralds > 0 && e.tally.coinc_a > 0 && e.tally.coinc_b > 0) {
        e.widened = e.tally.coinc_ab < kMinG2Events;
        e.g2 = e.widened ? g2_heralded_widened(e.tally) : g2_heralded(e.tally);
      }
      result.insufficient_statistics = result.insufficient_statistics || !e.g2 || e.widened;
    }
    if (pair[0].g2 && pair[1].g2) {
      const double s = std::hypot(pair[0].g2->sigma, pair[1].g2->sigma);
      result.z_scores.push_back(std::abs(pair[0].g2->value - pair[1].g2->value) / s);
    } else {
      result.z_scores.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    result.entries.push_back(pair[0]);
    result.entries.push_back(pair[1]);
  }
  return result;
}

// --- simulate and calibration ----------------------------------------------

SimulateResult simulate(const ExperimentSpec& spec) {
  validate(spec.base);
  SimulationConfig c = spec.base;
  if (spec.pulses_per_point > 0) c.n_pulses = spec.pulses_per_point;
  RunOptions options;
  options.threads = spec.threads;
  SimulateResult result;
  result.tally = run(c, options);
  result.report = make_report(result.tally, c.rep_rate_mhz);
  return result;
}

double single_mode_signal_transmission(const SimulationConfig& base, std::size_t mode,
                                       bool modulator_present) {
  const SpectralModeConfig& m = base.modes.at(mode);
  const Lineshape spectrum = conditional_signal_spectrum(m, base.pump_fwhm_ghz);
  const Lineshape cavity = Lineshape::lorentzian(-m.idler_center_offset_ghz, base.fp.fwhm_ghz);
  const double path = base.losses.delay_transmission *
                      (modulator_present ? base.losses.modulator_transmission : 1.0);
  return path * filter_transmission(spectrum, cavity, base.fp.peak_transmission);
}

double reference_g2(const SimulationConfig& base, const std::string& reference_mode, double mu) {
  const std::size_t k = base.mode_index(reference_mode);
  const SpectralModeConfig& m = base.modes[k];
  return g2_heralded_oracle(base.statistics, mu,
                            m.grating_transmission * m.heralding_detector_efficiency,
                            single_mode_signal_transmission(base, k, false), base.detectors.eta_a,
                            base.detectors.eta_b);
}

double calibrate_max_power_mu(const SimulationConfig& base, const std::string& reference_mode,
                              double target_g2) {
  if (!(target_g2 > 0.0)) throw InvalidParameter("target g2 must be positive");
  double lo = 1e-9;
  double hi = 1.0;
  while (reference_g2(base, reference_mode, hi) < target_g2) {
    hi *= 2.0;
    if (hi > 1e3) throw InvalidParameter("target g2 is not reachable");
  }
  if (reference_g2(base, reference_mode, lo) > target_g2) {
    throw InvalidParameter("target g2 is below the low-mean limit");
  }
  // The oracle is smooth and increasing in mu; bisect on a log scale.
  for (int i = 0; i < 200 && hi / lo - 1.0 > 1e-13; ++i) {
    const double mid = std::sqrt(lo * hi);
    (reference_g2(base, reference_mode, mid) < target_g2 ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

// --- CSV ---------------------------------------------------------------------

void write_csv(std::ostream& out, const DetuningScanResult& result) {
  out << kDetuningScanHeader << '\n';
  for (const DetuningPoint& p : result.points) {
    out << csv_number(p.detuning_ghz) << ',' << p.mode << ',' << (p.shifting ? 1 : 0) << ','
        << csv_number(p.rate.value) << ',' << csv_number(p.rate.sigma) << '\n';
  }
}

void write_csv(std::ostream& out, const PowerSweepResult& result) {
  out << kPowerSweepHeader << '\n';
  for (const PowerPoint& p : result.points) {
    out << csv_number(p.mu) << ',' << p.config << ',' << csv_number(p.rate_hz.value) << ','
        << csv_number(p.rate_hz.sigma) << '\n';
  }
}

void write_csv(std::ostream& out, const ModeSweepResult& result) {
  out << kModeSweepHeader << '\n';
  for (const ModeSweepPoint& p : result.points) {
    out << p.m << ',' << csv_number(p.p_herald) << ',' << csv_number(p.p_at_least_one) << ','
        << csv_number(p.mc.value) << ',' << csv_number(p.mc.sigma) << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<BreakevenRow>& rows) {
  out << kBreakevenHeader << '\n';
  for (const BreakevenRow& r : rows) {
    out << csv_number(r.loss_db) << ',' << r.m << ',' << csv_number(r.one_minus_eta) << ','
        << csv_number(r.result.gain) << ',' << (r.result.outperforms ? 1 : 0) << ','
        << csv_number(r.parity_m) << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<FomEntry>& rows) {
  out << kFomHeader << '\n';
  for (const FomEntry& e : rows) {
    out << e.row.source << ',' << csv_number(e.row.window_ns) << ','
        << csv_number(e.row.max_shift_ghz) << ',' << csv_number(e.fom) << ','
        << csv_number(e.first_row_ratio) << '\n';
  }
}

void write_csv(std::ostream& out, const G2BenchResult& result) {
  out << kG2Header << '\n';
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const G2Entry& e : result.entries) {
    out << e.config << ',' << csv_number(e.mu) << ',' << csv_number(e.g2 ? e.g2->value : nan)
        << ',' << csv_number(e.g2 ? e.g2->sigma : nan) << ',' << e.tally.heralds << ','
        << e.tally.coinc_a << ',' << e.tally.coinc_b << ',' << e.tally.coinc_ab << '\n';
  }
}

void write_csv(std::ostream& out, const SimulateResult& result) {
  const Tally& t = result.tally;
  out << kSimulateHeader << '\n';
  out << t.n_pulses << ',' << t.heralds << ',' << t.coincidences << ',' << t.accidentals << ','
      << t.coinc_a << ',' << t.coinc_b << ',' << t.coinc_ab << ',' << t.singles_a << ','
      << t.singles_b << ',' << csv_number(result.report.hsp_rate_hz.value) << ','
      << csv_number(result.report.hsp_rate_hz.sigma) << '\n';
}

}  // namespace smux

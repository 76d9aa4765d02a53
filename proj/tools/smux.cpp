#include "smux/config_io.hpp"
#include "smux/errors.hpp"
#include "smux/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInsufficient = 3;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> pulses;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> partitions;
  unsigned threads = 0;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "JSON configuration file")->required();
  cmd->add_option("--pulses", opts.pulses, "pulses per sweep point");
  cmd->add_option("--seed", opts.seed, "base random seed");
  cmd->add_option("--partitions", opts.partitions, "independent random substreams per run");
  cmd->add_option("--threads", opts.threads, "worker threads (0: hardware concurrency)");
  cmd->add_option("--out", opts.out, "CSV output path (default: stdout)");
}

smux::ExperimentSpec load_spec(const CommonOptions& opts, const std::string& experiment) {
  smux::ConfigDocument doc = smux::load_config(opts.config);
  if (opts.seed) doc.simulation.seed = *opts.seed;
  if (opts.partitions) doc.simulation.n_partitions = *opts.partitions;
  smux::ExperimentSpec spec = smux::make_experiment(doc, experiment);
  if (opts.pulses) spec.pulses_per_point = *opts.pulses;
  spec.threads = opts.threads;
  spec.output_path = opts.out;
  return spec;
}

template <typename Result>
void emit(const CommonOptions& opts, const Result& result) {
  if (opts.out.empty()) {
    smux::write_csv(std::cout, result);
    return;
  }
  std::ofstream file(opts.out);
  if (!file) throw smux::ConfigError("cannot write " + opts.out);
  smux::write_csv(file, result);
}

int cmd_simulate(const CommonOptions& opts) {
  smux::ConfigDocument doc = smux::load_config(opts.config);
  smux::ExperimentSpec spec;
  spec.base = doc.simulation;
  if (opts.seed) spec.base.seed = *opts.seed;
  if (opts.partitions) spec.base.n_partitions = *opts.partitions;
  if (opts.pulses) spec.pulses_per_point = *opts.pulses;
  spec.threads = opts.threads;
  const smux::SimulateResult result = smux::simulate(spec);
  emit(opts, result);
  const smux::MetricsReport& r = result.report;
  std::fprintf(stderr, "hsp rate %.6g +- %.3g Hz, herald rate %.6g Hz\n", r.hsp_rate_hz.value,
               r.hsp_rate_hz.sigma, r.heralding_rate_hz.value);
  if (r.g2) std::fprintf(stderr, "g2 %.4g +- %.3g\n", r.g2->value, r.g2->sigma);
  if (r.car) {
    std::fprintf(stderr, "CAR %.4g +- %.3g%s\n", r.car->value, r.car->sigma,
                 r.car->bound ? " (lower bound)" : "");
  }
  return 0;
}

int cmd_scan(const CommonOptions& opts) {
  const smux::DetuningScanResult result = smux::detuning_scan(load_spec(opts, "detuning-scan"));
  emit(opts, result);
  for (const smux::PeakSummary& p : result.peaks) {
    std::fprintf(stderr, "%-4s shifting=%d peak %+.2f GHz (expected %+.2f) width %.2f GHz (model %.2f) counts %llu%s\n",
                 p.mode.c_str(), p.shifting ? 1 : 0, p.fitted_center, p.expected_center,
                 p.data_fwhm, p.model_fwhm, static_cast<unsigned long long>(p.peak_count),
                 p.insufficient ? " INSUFFICIENT" : "");
  }
  if (result.insufficient_statistics) {
    std::fprintf(stderr, "warning: fewer than %llu counts at a peak\n",
                 static_cast<unsigned long long>(smux::kMinPeakCounts));
    return kExitInsufficient;
  }
  return 0;
}

int cmd_power(const CommonOptions& opts) {
  const smux::PowerSweepResult result = smux::power_sweep(load_spec(opts, "power-sweep"));
  emit(opts, result);
  for (const smux::PowerFit& f : result.fits) {
    std::fprintf(stderr, "%-8s slope %.6g +- %.3g Hz, R2 %.5f\n", f.config.c_str(), f.fit.slope,
                 f.fit.slope_sigma, f.fit.r_squared);
  }
  return 0;
}

int cmd_modes(const CommonOptions& opts) {
  const smux::ModeSweepResult result = smux::mode_sweep(load_spec(opts, "mode-sweep"));
  emit(opts, result);
  std::fprintf(stderr, "p_herald %.6g: smallest m with P >= %.4g is %u\n", result.p_herald,
               result.target, result.smallest_m);
  return 0;
}

int cmd_breakeven(const CommonOptions& opts) {
  emit(opts, smux::breakeven_report(load_spec(opts, "breakeven")));
  return 0;
}

int cmd_fom(const CommonOptions& opts) {
  emit(opts, smux::fom_table(load_spec(opts, "fom-table")));
  return 0;
}

int cmd_g2(const CommonOptions& opts) {
  const smux::G2BenchResult result = smux::g2_bench(load_spec(opts, "g2-bench"));
  emit(opts, result);
  for (const smux::G2Entry& e : result.entries) {
    std::fprintf(stderr, "%-8s mu %.5g g2 %.4g +- %.3g (analytic %.4g)%s\n", e.config.c_str(), e.mu,
                 e.g2 ? e.g2->value : 0.0, e.g2 ? e.g2->sigma : 0.0, e.expected_g2,
                 e.widened ? " widened" : "");
  }
  if (result.insufficient_statistics) {
    std::fprintf(stderr, "warning: fewer than %llu C_ab events\n",
                 static_cast<unsigned long long>(smux::kMinG2Events));
    return kExitInsufficient;
  }
  return 0;
}

int cmd_calibrate(const CommonOptions& opts) {
  const smux::ConfigDocument doc = smux::load_config(opts.config);
  const double mu = smux::calibrate_max_power_mu(doc.simulation, doc.calibration.reference_mode,
                                                 doc.calibration.target_g2);
  std::printf("%.12g\n", mu);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectrally multiplexed heralded single-photon source simulator"};
  app.require_subcommand(1);
  CommonOptions opts;

  struct Entry {
    const char* name;
    const char* help;
    int (*run)(const CommonOptions&);
  };
  const Entry entries[] = {
      {"simulate", "run the base configuration once", cmd_simulate},
      {"scan-detuning", "coincidence rate versus cavity detuning", cmd_scan},
      {"sweep-power", "heralded single-photon rate versus mean pair number", cmd_power},
      {"sweep-modes", "probability of at least one herald versus mode count", cmd_modes},
      {"breakeven", "multiplexing gain versus modulator loss", cmd_breakeven},
      {"fom", "time-bandwidth figures of merit", cmd_fom},
      {"g2", "heralded g2, single mode versus multiplexed", cmd_g2},
      {"calibrate", "print the calibrated maximum-power mean pair number", cmd_calibrate},
  };
  for (const Entry& e : entries) add_common(app.add_subcommand(e.name, e.help), opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    for (const Entry& e : entries) {
      if (app.got_subcommand(e.name)) return e.run(opts);
    }
  } catch (const smux::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}

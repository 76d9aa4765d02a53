#include "smux/simengine.hpp"

#include "smux/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace smux {

namespace {

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t sum = 0;
  if (__builtin_add_overflow(a, b, &sum)) throw std::overflow_error("tally counter overflow");
  return sum;
}

}  // namespace

FeedForwardTable SimulationConfig::routing_table() const {
  return build_routing_table(modes, routing.v_pi, routing.edge_ns, routing_policy());
}

std::size_t SimulationConfig::mode_index(const std::string& label) const {
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (modes[k].label == label) return k;
  }
  throw ConfigError("no spectral mode labelled '" + label + "'");
}

void validate(const SimulationConfig& config) {
  require(!config.modes.empty(), "at least one spectral mode is required");
  require(config.modes.size() == config.mu_per_mode.size(),
          "mu_per_mode must have one entry per spectral mode");
  for (const SpectralModeConfig& mode : config.modes) validate(mode);
  for (double mu : config.mu_per_mode) {
    require(std::isfinite(mu) && mu >= 0.0, "mean pair numbers must be finite and nonnegative");
  }
  require(std::isfinite(config.pump_fwhm_ghz) && config.pump_fwhm_ghz > 0.0,
          "pump FWHM must be positive");
  require(std::isfinite(config.fp.fwhm_ghz) && config.fp.fwhm_ghz > 0.0,
          "FP FWHM must be positive");
  require(std::isfinite(config.fp.detuning_ghz), "FP detuning must be finite");
  require(is_probability(config.fp.peak_transmission), "FP peak transmission must be in [0, 1]");
  require(is_probability(config.losses.delay_transmission) &&
              is_probability(config.losses.modulator_transmission),
          "loss-budget transmissions must be in [0, 1]");
  require(is_probability(config.detectors.eta_a) && is_probability(config.detectors.eta_b) &&
              is_probability(config.detectors.dark_a) && is_probability(config.detectors.dark_b),
          "signal detector efficiencies and dark counts must be in [0, 1]");
  require(std::isfinite(config.routing.v_pi) && config.routing.v_pi > 0.0, "V_pi must be positive");
  require(std::isfinite(config.routing.edge_ns) && config.routing.edge_ns > 0.0,
          "ramp edge duration must be positive");
  require(std::isfinite(config.rep_rate_mhz) && config.rep_rate_mhz > 0.0,
          "repetition rate must be positive");
  require(config.n_pulses >= 1, "n_pulses must be at least 1");
  require(config.n_partitions >= 1, "n_partitions must be at least 1");
  (void)config.routing_table();
}

std::vector<SpectralModeConfig> paper_modes() {
  return {
      {"i+", 19.0, 12.0, 0.30, 0.70, 0.0},
      {"i0", 0.0, 12.0, 0.22, 0.70, 0.0},
      {"i-", -22.0, 12.0, 0.25, 0.70, 0.0},
  };
}

Tally Tally::zero(std::size_t n_modes) {
  Tally t;
  t.heralds_per_mode.assign(n_modes, 0);
  t.coincidences_per_mode.assign(n_modes, 0);
  return t;
}

Tally merge(const Tally& a, const Tally& b) {
  if (a.heralds_per_mode.size() != b.heralds_per_mode.size() ||
      a.coincidences_per_mode.size() != b.coincidences_per_mode.size()) {
    throw std::invalid_argument("cannot merge tallies with different mode counts");
  }
  Tally out;
  out.n_pulses = checked_add(a.n_pulses, b.n_pulses);
  out.heralds = checked_add(a.heralds, b.heralds);
  out.coincidences = checked_add(a.coincidences, b.coincidences);
  out.accidentals = checked_add(a.accidentals, b.accidentals);
  out.coinc_a = checked_add(a.coinc_a, b.coinc_a);
  out.coinc_b = checked_add(a.coinc_b, b.coinc_b);
  out.coinc_ab = checked_add(a.coinc_ab, b.coinc_ab);
  out.singles_a = checked_add(a.singles_a, b.singles_a);
  out.singles_b = checked_add(a.singles_b, b.singles_b);
  out.heralds_per_mode.resize(a.heralds_per_mode.size());
  out.coincidences_per_mode.resize(a.coincidences_per_mode.size());
  for (std::size_t k = 0; k < a.heralds_per_mode.size(); ++k) {
    out.heralds_per_mode[k] = checked_add(a.heralds_per_mode[k], b.heralds_per_mode[k]);
    out.coincidences_per_mode[k] =
        checked_add(a.coincidences_per_mode[k], b.coincidences_per_mode[k]);
  }
  return out;
}

PulseRng::PulseRng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x534d5558u};
  engine_.seed(seq);
}

Simulator::Simulator(SimulationConfig config)
    : config_(std::move(config)),
      table_((validate(config_), config_.routing_table())),
      n_modes_(config_.modes.size()) {
  const SimulationConfig& c = config_;

  for (std::size_t k = 0; k < n_modes_; ++k) {
    const PhotonNumberPmf pmf = pair_number_pmf(c.statistics, c.mu_per_mode[k]);
    Eigen::ArrayXd cdf(pmf.probabilities.size());
    double acc = 0.0;
    for (Eigen::Index n = 0; n < cdf.size(); ++n) {
      acc += pmf.probabilities(n);
      cdf(n) = acc;
    }
    pair_cdf_.push_back(std::move(cdf));
    idler_detect_.push_back(c.modes[k].grating_transmission *
                            c.modes[k].heralding_detector_efficiency);
  }

  const double path = c.losses.delay_transmission *
                      (c.losses.modulator_present ? c.losses.modulator_transmission : 1.0);
  const Lineshape cavity = Lineshape::lorentzian(c.fp.detuning_ghz, c.fp.fwhm_ghz);
  transmission_.resize(static_cast<Eigen::Index>(n_modes_ + 1), static_cast<Eigen::Index>(n_modes_));
  for (std::size_t j = 0; j < n_modes_; ++j) {
    const Lineshape spectrum = conditional_signal_spectrum(c.modes[j], c.pump_fwhm_ghz);
    const double unshifted = path * filter_transmission(spectrum, cavity, c.fp.peak_transmission);
    for (std::size_t r = 0; r <= n_modes_; ++r) {
      double t = unshifted;
      if (c.shifting_enabled && r < n_modes_ && table_.actions()[r].shift_ghz != 0.0) {
        const Lineshape moved = shift_spectrum(spectrum, table_.actions()[r].shift_ghz);
        t = path * filter_transmission(moved, cavity, c.fp.peak_transmission);
      }
      transmission_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = t;
    }
  }

  for (std::size_t k = 0; k < n_modes_; ++k) component_zero_.push_back(pair_cdf_[k](0));
  for (std::size_t k = 0; k < n_modes_; ++k) {
    component_zero_.push_back(1.0 - c.modes[k].herald_dark_count_prob);
  }
  component_zero_.push_back(1.0 - c.detectors.dark_a);
  if (c.splitter_inserted) component_zero_.push_back(1.0 - c.detectors.dark_b);

  // Stored as logs so that 1 - prod is computed without cancellation.
  component_zero_suffix_.assign(component_zero_.size() + 1, 0.0);
  for (std::size_t i = component_zero_.size(); i-- > 0;) {
    component_zero_suffix_[i] = component_zero_suffix_[i + 1] + std::log(component_zero_[i]);
  }
  log_idle_ = component_zero_suffix_[0];
}

double Simulator::signal_transmission(std::optional<std::size_t> chosen, std::size_t mode) const {
  const auto row = static_cast<Eigen::Index>(chosen ? *chosen : n_modes_);
  return transmission_(row, static_cast<Eigen::Index>(mode));
}

std::uint32_t Simulator::sample_pairs(std::size_t mode, double u) const {
  const Eigen::ArrayXd& cdf = pair_cdf_[mode];
  if (u < cdf(0)) return 0;
  for (Eigen::Index n = 1; n < cdf.size(); ++n) {
    if (u < cdf(n)) return static_cast<std::uint32_t>(n);
  }
  // Beyond the truncation: at most the tail bound of probability.
  return static_cast<std::uint32_t>(cdf.size() - 1);
}

std::uint32_t Simulator::sample_pairs_nonzero(std::size_t mode, double u) const {
  const double p0 = pair_cdf_[mode](0);
  const std::uint32_t n = sample_pairs(mode, p0 + u * (1.0 - p0));
  return std::max<std::uint32_t>(n, 1);
}

void Simulator::draw_unconditioned(PulseRng& rng, PulseDraw& draw) const {
  for (std::size_t k = 0; k < n_modes_; ++k) draw.pairs[k] = sample_pairs(k, rng.uniform());
  for (std::size_t k = 0; k < n_modes_; ++k) {
    const double d = config_.modes[k].herald_dark_count_prob;
    draw.herald_dark[k] = d > 0.0 && rng.uniform() < d;
  }
  draw.dark_a = config_.detectors.dark_a > 0.0 && rng.uniform() < config_.detectors.dark_a;
  draw.dark_b = config_.splitter_inserted && config_.detectors.dark_b > 0.0 &&
                rng.uniform() < config_.detectors.dark_b;
}

void Simulator::draw_active(PulseRng& rng, PulseDraw& draw) const {
  // Components in order: pair counts, herald darks, dark_a, dark_b. The first
  // nonzero component is drawn from its conditional law; the ones before it
  // are zero and the ones after it are unconditioned.
  bool found = false;
  std::size_t i = 0;
  auto nonzero = [&](double zero_prob) {
    if (found) return rng.uniform() >= zero_prob;
    const double remaining_active = -std::expm1(component_zero_suffix_[i]);
    const double p_first = (1.0 - zero_prob) / remaining_active;
    const bool hit = rng.uniform() < p_first;
    found = hit;
    return hit;
  };

  for (std::size_t k = 0; k < n_modes_; ++k, ++i) {
    draw.pairs[k] = nonzero(component_zero_[i]) ? sample_pairs_nonzero(k, rng.uniform()) : 0;
  }
  for (std::size_t k = 0; k < n_modes_; ++k, ++i) draw.herald_dark[k] = nonzero(component_zero_[i]);
  draw.dark_a = nonzero(component_zero_[i]);
  ++i;
  draw.dark_b = false;
  if (config_.splitter_inserted) {
    draw.dark_b = nonzero(component_zero_[i]);
    ++i;
  }
}

void Simulator::process(PulseDraw& draw, PulseRng& rng, PulseState& state, Tally& tally) const {
  const SimulationConfig& c = config_;
  // Idler arm: grating, herald detector, dark count.
  std::vector<bool>& clicked = draw.clicked;
  for (std::size_t k = 0; k < n_modes_; ++k) {
    bool click = draw.herald_dark[k];
    for (std::uint32_t n = 0; n < draw.pairs[k] && !click; ++n) {
      click = rng.uniform() < idler_detect_[k];
    }
    clicked[k] = click;
  }
  const std::optional<std::size_t> chosen = resolve_herald_index(clicked, table_);
  const auto row = static_cast<Eigen::Index>(chosen ? *chosen : n_modes_);

  // Signal arm: delay, modulator, FP overlap, optional splitter, detectors.
  bool a = draw.dark_a;
  bool b = draw.dark_b;
  const double share = c.splitter_inserted ? 0.5 : 1.0;
  for (std::size_t j = 0; j < n_modes_; ++j) {
    if (draw.pairs[j] == 0) continue;
    const double t = transmission_(row, static_cast<Eigen::Index>(j));
    const double p_a = t * share * c.detectors.eta_a;
    const double p_b = c.splitter_inserted ? t * share * c.detectors.eta_b : 0.0;
    for (std::uint32_t n = 0; n < draw.pairs[j]; ++n) {
      const double u = rng.uniform();
      if (u < p_a) {
        a = true;
      } else if (u < p_a + p_b) {
        b = true;
      }
    }
  }

  const bool detected = a || b;
  if (chosen) {
    ++tally.heralds;
    ++tally.heralds_per_mode[*chosen];
    if (detected) {
      ++tally.coincidences;
      ++tally.coincidences_per_mode[*chosen];
    }
    if (a) ++tally.coinc_a;
    if (b) ++tally.coinc_b;
    if (a && b) ++tally.coinc_ab;
  }
  if (a) ++tally.singles_a;
  if (b) ++tally.singles_b;
  if (state.previous_herald && detected) ++tally.accidentals;
  state.previous_herald = chosen.has_value();
}

Simulator::PulseDraw Simulator::make_draw() const {
  PulseDraw draw;
  draw.pairs.assign(n_modes_, 0);
  draw.herald_dark.assign(n_modes_, false);
  draw.clicked.assign(n_modes_, false);
  return draw;
}

void Simulator::simulate_pulse(PulseRng& rng, PulseState& state, Tally& tally) const {
  PulseDraw draw = make_draw();
  draw_unconditioned(rng, draw);
  process(draw, rng, state, tally);
  ++tally.n_pulses;
}

std::uint64_t Simulator::partition_pulses(std::uint32_t index) const {
  const std::uint64_t parts = config_.n_partitions;
  const std::uint64_t base = config_.n_pulses / parts;
  return base + (index < config_.n_pulses % parts ? 1 : 0);
}

Tally Simulator::run_partition(std::uint32_t index, SamplingMode sampling) const {
  PulseRng rng(config_.seed, index);
  PulseState state;
  Tally tally = Tally::zero(n_modes_);
  const std::uint64_t n = partition_pulses(index);

  PulseDraw draw = make_draw();
  if (sampling == SamplingMode::per_pulse) {
    for (std::uint64_t p = 0; p < n; ++p) {
      draw_unconditioned(rng, draw);
      process(draw, rng, state, tally);
    }
    tally.n_pulses = n;
    return tally;
  }

  std::uint64_t pos = 0;
  while (pos < n) {
    // Number of idle pulses before the next active one: geometric in P(idle).
    std::uint64_t skip = n - pos;
    if (log_idle_ == -std::numeric_limits<double>::infinity()) {
      skip = 0;
    } else if (log_idle_ < 0.0) {
      const double g = std::floor(std::log1p(-rng.uniform()) / log_idle_);
      if (g < static_cast<double>(n - pos)) skip = static_cast<std::uint64_t>(g);
    }
    if (skip >= n - pos) break;
    if (skip > 0) state.previous_herald = false;
    pos += skip;
    draw_active(rng, draw);
    process(draw, rng, state, tally);
    ++pos;
  }
  tally.n_pulses = n;
  return tally;
}

Tally Simulator::run(const RunOptions& options) const {
  const std::uint32_t parts = config_.n_partitions;
  unsigned threads = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1u, parts);

  std::vector<Tally> results(parts);
  if (threads == 1) {
    for (std::uint32_t p = 0; p < parts; ++p) results[p] = run_partition(p, options.sampling);
  } else {
    std::atomic<std::uint32_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::uint32_t p = next++; p < parts; p = next++) {
          results[p] = run_partition(p, options.sampling);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  Tally total = Tally::zero(n_modes_);
  for (const Tally& t : results) total = merge(total, t);
  return total;
}

Tally run(const SimulationConfig& config, const RunOptions& options) {
  return Simulator(config).run(options);
}

}  // namespace smux

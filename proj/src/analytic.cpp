#include "smux/analytic.hpp"

#include "smux/errors.hpp"
#include "smux/photonstat.hpp"

#include <array>
#include <cmath>

namespace smux {

namespace {

// Pair-number truncation for exact expectations; far below any event
// probability of interest, including multi-photon terms.
constexpr double kExactTailTolerance = 1e-24;

// Signal events whose complement is accumulated per mode.
enum Event : std::size_t { kAny = 0, kNoA = 1, kNoB = 2, kNoAB = 3 };
constexpr std::size_t kEvents = 4;

struct ModeSums {
  // [event]: sum_n p(n) s_E^n, with and without the no-idler-click factor.
  std::array<double, kEvents> any{};
  std::array<double, kEvents> silent{};
};

ModeSums mode_sums(const PhotonNumberPmf& pmf, double idler_detect, double herald_dark,
                   double p_a, double p_b) {
  const std::array<double, kEvents> survive{1.0, 1.0 - p_a, 1.0 - p_b, 1.0 - p_a - p_b};
  ModeSums sums;
  for (std::size_t e = 0; e < kEvents; ++e) {
    double any = 0.0;
    double silent = 0.0;
    for (Eigen::Index n = 0; n < pmf.probabilities.size(); ++n) {
      const double weight = pmf.probabilities(n) * std::pow(survive[e], static_cast<double>(n));
      any += weight;
      silent += weight * std::pow(1.0 - idler_detect, static_cast<double>(n));
    }
    sums.any[e] = any;
    sums.silent[e] = (1.0 - herald_dark) * silent;
  }
  return sums;
}

}  // namespace

double ExpectedRates::g2() const {
  if (!(coinc_a > 0.0 && coinc_b > 0.0)) throw UndefinedMetric("expected single counts are zero");
  return coinc_ab * herald / (coinc_a * coinc_b);
}

double herald_click_probability(const SimulationConfig& config, std::size_t mode) {
  const SpectralModeConfig& m = config.modes.at(mode);
  const PhotonNumberPmf pairs =
      pair_number_pmf(config.statistics, config.mu_per_mode.at(mode), kExactTailTolerance);
  const PhotonNumberPmf idlers = thin(pairs, m.grating_transmission);
  return click_probability(idlers, m.heralding_detector_efficiency, m.herald_dark_count_prob);
}

ExpectedRates expected_rates(const SimulationConfig& config) {
  validate(config);
  const std::size_t m = config.modes.size();
  const FeedForwardTable table = config.routing_table();
  const bool split = config.splitter_inserted;
  const double share = split ? 0.5 : 1.0;
  const double path = config.losses.delay_transmission *
                      (config.losses.modulator_present ? config.losses.modulator_transmission : 1.0);
  const Lineshape cavity = Lineshape::lorentzian(config.fp.detuning_ghz, config.fp.fwhm_ghz);

  std::vector<PhotonNumberPmf> pmfs;
  std::vector<Lineshape> spectra;
  for (std::size_t k = 0; k < m; ++k) {
    pmfs.push_back(pair_number_pmf(config.statistics, config.mu_per_mode[k], kExactTailTolerance));
    spectra.push_back(conditional_signal_spectrum(config.modes[k], config.pump_fwhm_ghz));
  }

  // Signal-side darks enter as a factor on each "no click" event.
  const double quiet_a = 1.0 - config.detectors.dark_a;
  const double quiet_b = split ? 1.0 - config.detectors.dark_b : 1.0;
  const std::array<double, kEvents> dark_factor{1.0, quiet_a, quiet_b, quiet_a * quiet_b};

  ExpectedRates out;
  out.herald_per_mode.assign(m, 0.0);
  out.coincidence_per_mode.assign(m, 0.0);

  // Row r < m: mode r chosen (its ramp applied). Row m: no herald.
  for (std::size_t r = 0; r <= m; ++r) {
    const double shift = (config.shifting_enabled && r < m) ? table.actions()[r].shift_ghz : 0.0;
    std::vector<ModeSums> sums;
    for (std::size_t j = 0; j < m; ++j) {
      const double t = path * filter_transmission(shift_spectrum(spectra[j], shift), cavity,
                                                  config.fp.peak_transmission);
      const double p_a = t * share * config.detectors.eta_a;
      const double p_b = split ? t * share * config.detectors.eta_b : 0.0;
      const SpectralModeConfig& mode = config.modes[j];
      sums.push_back(mode_sums(pmfs[j], mode.grating_transmission * mode.heralding_detector_efficiency,
                               mode.herald_dark_count_prob, p_a, p_b));
    }

    std::array<double, kEvents> joint{};
    for (std::size_t e = 0; e < kEvents; ++e) {
      double product = dark_factor[e];
      if (r == m) {
        for (std::size_t j = 0; j < m; ++j) product *= sums[j].silent[e];
      } else {
        bool before_chosen = true;
        for (std::size_t j : table.priority_order()) {
          if (j == r) {
            product *= sums[j].any[e] - sums[j].silent[e];
            before_chosen = false;
          } else {
            product *= before_chosen ? sums[j].silent[e] : sums[j].any[e];
          }
        }
      }
      joint[e] = product;
    }

    const double p_row = joint[kAny];
    const double a = p_row - joint[kNoA];
    const double b = split ? p_row - joint[kNoB] : 0.0;
    const double ab = split ? p_row - joint[kNoA] - joint[kNoB] + joint[kNoAB] : 0.0;
    const double detected = p_row - joint[kNoAB];

    out.singles_a += a;
    out.singles_b += b;
    out.signal_detection += detected;
    if (r < m) {
      out.herald += p_row;
      out.herald_per_mode[r] = p_row;
      out.coincidence += detected;
      out.coincidence_per_mode[r] = detected;
      out.coinc_a += a;
      out.coinc_b += b;
      out.coinc_ab += ab;
    }
  }
  return out;
}

double expected_accidentals(const SimulationConfig& config, const ExpectedRates& rates) {
  // Each partition of n_p pulses has n_p - 1 consecutive pulse pairs.
  const double parts = static_cast<double>(config.n_partitions);
  const double links = std::max(0.0, static_cast<double>(config.n_pulses) - parts);
  return links * rates.accidental();
}

}  // namespace smux

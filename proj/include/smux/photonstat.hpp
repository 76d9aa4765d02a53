#ifndef SMUX_PHOTONSTAT_HPP
#define SMUX_PHOTONSTAT_HPP

#include "smux/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>

namespace smux {

enum class StatisticsKind { thermal, poissonian };

inline const char* to_string(StatisticsKind kind) {
  return kind == StatisticsKind::thermal ? "thermal" : "poissonian";
}

inline constexpr double kPmfTailTolerance = 1e-9;
// Largest cutoff we are willing to enumerate; means beyond this are rejected.
inline constexpr Eigen::Index kMaxPmfCutoff = 200000;

/// Photon (or pair) number distribution p_0..p_N with the mass beyond N.
template <typename Scalar>
struct BasicPhotonNumberPmf {
  using Vector = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Vector probabilities;
  Scalar tail_bound = 0;

  Eigen::Index cutoff() const { return probabilities.size() - 1; }
  Scalar operator[](Eigen::Index n) const {
    return n < probabilities.size() ? probabilities(n) : Scalar(0);
  }
  Scalar total() const { return probabilities.sum(); }
};

using PhotonNumberPmf = BasicPhotonNumberPmf<double>;

namespace detail {

template <typename Scalar>
void require_probability(Scalar p, const char* what) {
  if (!(p >= Scalar(0) && p <= Scalar(1))) {
    throw InvalidParameter(std::string(what) + " must lie in [0, 1]");
  }
}

/// Smallest N whose analytic tail P(n > N) is at most `tolerance`.
template <typename Scalar>
Eigen::Index cutoff_for(StatisticsKind kind, Scalar mu, Scalar tolerance) {
  using std::exp;
  using std::log;
  if (mu == Scalar(0)) return 0;
  if (kind == StatisticsKind::thermal) {
    // P(n > N) = x^(N+1), x = mu / (1 + mu)
    const Scalar log_x = log(mu) - std::log1p(mu);
    const Scalar needed = log(tolerance) / log_x;
    const auto n = static_cast<Eigen::Index>(std::ceil(static_cast<double>(needed))) - 1;
    return std::max<Eigen::Index>(n, 1);
  }
  // Chernoff: P(n >= k) <= e^-mu (e mu / k)^k for k > mu.
  Eigen::Index k = static_cast<Eigen::Index>(std::ceil(static_cast<double>(mu))) + 1;
  while (k <= kMaxPmfCutoff + 1) {
    const Scalar kk = static_cast<Scalar>(k);
    const Scalar log_bound = -mu + kk * (Scalar(1) + log(mu) - log(kk));
    if (log_bound <= log(tolerance)) return k - 1;
    ++k;
  }
  return kMaxPmfCutoff + 1;
}

}  // namespace detail

/// Pair-number distribution of a single spectral mode with mean `mu`,
/// truncated where the analytic tail drops below `tolerance`.
template <typename Scalar>
BasicPhotonNumberPmf<Scalar> pair_number_pmf(StatisticsKind kind, Scalar mu,
                                             Scalar tolerance = Scalar(kPmfTailTolerance)) {
  using std::exp;
  if (!(mu >= Scalar(0)) || !std::isfinite(static_cast<double>(mu))) {
    throw InvalidParameter("mean pair number must be finite and nonnegative");
  }
  const Eigen::Index cutoff = detail::cutoff_for(kind, mu, tolerance);
  if (cutoff > kMaxPmfCutoff) throw InvalidParameter("mean pair number too large to enumerate");

  BasicPhotonNumberPmf<Scalar> pmf;
  pmf.probabilities.resize(cutoff + 1);
  if (kind == StatisticsKind::thermal) {
    const Scalar ratio = mu / (Scalar(1) + mu);
    pmf.probabilities(0) = Scalar(1) / (Scalar(1) + mu);
    for (Eigen::Index n = 1; n <= cutoff; ++n) {
      pmf.probabilities(n) = pmf.probabilities(n - 1) * ratio;
    }
    pmf.tail_bound = pmf.probabilities(cutoff) * ratio * (Scalar(1) + mu);  // x^(N+1)
  } else {
    pmf.probabilities(0) = exp(-mu);
    for (Eigen::Index n = 1; n <= cutoff; ++n) {
      pmf.probabilities(n) = pmf.probabilities(n - 1) * mu / static_cast<Scalar>(n);
    }
    pmf.tail_bound = std::max(Scalar(0), Scalar(1) - pmf.probabilities.sum());
  }
  return pmf;
}

/// Binomial loss channel with transmission T applied to every photon.
template <typename Scalar>
BasicPhotonNumberPmf<Scalar> thin(const BasicPhotonNumberPmf<Scalar>& pmf, Scalar T) {
  detail::require_probability(T, "transmission");
  const Eigen::Index size = pmf.probabilities.size();
  BasicPhotonNumberPmf<Scalar> out;
  out.tail_bound = pmf.tail_bound;
  if (T == Scalar(1)) {
    out.probabilities = pmf.probabilities;
    return out;
  }
  out.probabilities = Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(size);
  if (T == Scalar(0)) {
    out.probabilities(0) = pmf.total();
    return out;
  }
  // Row n of Pascal's triangle weighted by T and 1 - T: binom(n, m) T^m (1-T)^(n-m).
  Eigen::Array<Scalar, Eigen::Dynamic, 1> row = Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(size);
  row(0) = Scalar(1);
  const Scalar keep = T;
  const Scalar lose = Scalar(1) - T;
  for (Eigen::Index n = 0; n < size; ++n) {
    if (n > 0) {
      for (Eigen::Index m = n; m >= 1; --m) row(m) = lose * row(m) + keep * row(m - 1);
      row(0) *= lose;
    }
    out.probabilities.head(n + 1) += pmf.probabilities(n) * row.head(n + 1);
  }
  return out;
}

/// Threshold-detector click probability: 1 - sum p_n (1 - eta)^n, OR-ed
/// with an independent dark count.
template <typename Scalar>
Scalar click_probability(const BasicPhotonNumberPmf<Scalar>& pmf, Scalar eta,
                         Scalar dark = Scalar(0)) {
  using std::log1p;
  using std::expm1;
  detail::require_probability(eta, "detector efficiency");
  detail::require_probability(dark, "dark count probability");
  Scalar photon_click = 0;
  if (eta == Scalar(1)) {
    photon_click = pmf.total() - pmf.probabilities(0);
  } else if (eta > Scalar(0)) {
    const Scalar log_miss = log1p(-eta);
    for (Eigen::Index n = 1; n < pmf.probabilities.size(); ++n) {
      photon_click += pmf.probabilities(n) * -expm1(static_cast<Scalar>(n) * log_miss);
    }
  }
  return photon_click + dark - photon_click * dark;
}

/// Signal pair-number distribution conditioned on at least one herald click.
template <typename Scalar>
BasicPhotonNumberPmf<Scalar> heralded_signal_pmf(StatisticsKind kind, Scalar mu, Scalar eta_herald) {
  using std::log1p;
  using std::expm1;
  if (!(eta_herald > Scalar(0) && eta_herald <= Scalar(1))) {
    if (eta_herald == Scalar(0)) throw ConditioningOnNull("herald efficiency is zero");
    throw InvalidParameter("herald efficiency must lie in (0, 1]");
  }
  if (mu == Scalar(0)) throw ConditioningOnNull("no pairs are generated at zero mean");

  // Pick the cutoff so the unconditioned tail is negligible relative to the herald probability.
  const Scalar herald_estimate = click_probability(pair_number_pmf(kind, mu), eta_herald);
  if (!(herald_estimate > Scalar(0))) throw ConditioningOnNull("herald click probability is zero");
  const Scalar tolerance =
      std::min(Scalar(kPmfTailTolerance), Scalar(1e-18) * herald_estimate);
  const BasicPhotonNumberPmf<Scalar> base = pair_number_pmf(kind, mu, tolerance);

  BasicPhotonNumberPmf<Scalar> out;
  out.probabilities.resize(base.probabilities.size());
  const Scalar log_miss = eta_herald == Scalar(1) ? Scalar(0) : log1p(-eta_herald);
  for (Eigen::Index n = 0; n < base.probabilities.size(); ++n) {
    const Scalar herald = eta_herald == Scalar(1)
                              ? (n > 0 ? Scalar(1) : Scalar(0))
                              : -expm1(static_cast<Scalar>(n) * log_miss);
    out.probabilities(n) = base.probabilities(n) * herald;
  }
  const Scalar norm = out.probabilities.sum();
  if (!(norm > Scalar(0))) throw ConditioningOnNull("herald click probability is zero");
  out.probabilities /= norm;
  out.tail_bound = base.tail_bound / norm;
  return out;
}

/// 2 p_2 / p_1^2, the photon-number approximation of the heralded g2.
template <typename Scalar>
Scalar g2_photon_number_form(const BasicPhotonNumberPmf<Scalar>& pmf) {
  const Scalar p1 = pmf[1];
  if (!(p1 > Scalar(0))) throw UndefinedMetric("single-photon probability is zero");
  return Scalar(2) * pmf[2] / (p1 * p1);
}

/// Exact heralded g2 for one spectral mode: herald conditioning, signal-path
/// loss, balanced splitter and two threshold detectors, enumerated photon by
/// photon over every way of splitting n photons between the outputs.
template <typename Scalar>
Scalar g2_heralded_oracle(StatisticsKind kind, Scalar mu, Scalar eta_herald, Scalar signal_path_T,
                          Scalar eta_a, Scalar eta_b) {
  using std::pow;
  detail::require_probability(signal_path_T, "signal path transmission");
  detail::require_probability(eta_a, "detector efficiency");
  detail::require_probability(eta_b, "detector efficiency");
  const BasicPhotonNumberPmf<Scalar> signal =
      thin(heralded_signal_pmf(kind, mu, eta_herald), signal_path_T);

  const Eigen::Index size = signal.probabilities.size();
  Scalar p_a = 0;
  Scalar p_b = 0;
  Scalar p_ab = 0;
  // split(k) = binom(n, k) / 2^n for the current n
  Eigen::Array<Scalar, Eigen::Dynamic, 1> split = Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(size);
  split(0) = Scalar(1);
  for (Eigen::Index n = 0; n < size; ++n) {
    if (n > 0) {
      for (Eigen::Index k = n; k >= 1; --k) split(k) = Scalar(0.5) * (split(k) + split(k - 1));
      split(0) *= Scalar(0.5);
    }
    const Scalar q = signal.probabilities(n);
    if (q == Scalar(0)) continue;
    for (Eigen::Index k = 0; k <= n; ++k) {
      const Scalar click_a = Scalar(1) - pow(Scalar(1) - eta_a, static_cast<Scalar>(k));
      const Scalar click_b = Scalar(1) - pow(Scalar(1) - eta_b, static_cast<Scalar>(n - k));
      const Scalar w = q * split(k);
      p_a += w * click_a;
      p_b += w * click_b;
      p_ab += w * click_a * click_b;
    }
  }
  if (!(p_a > Scalar(0) && p_b > Scalar(0))) {
    throw UndefinedMetric("signal detection probability is zero");
  }
  return p_ab / (p_a * p_b);
}

/// Thermal single-pair probability mu / (1 + mu)^2.
template <typename Scalar>
Scalar thermal_p1(Scalar mu) {
  return mu / ((Scalar(1) + mu) * (Scalar(1) + mu));
}

/// Maximiser of the thermal single-pair probability and its value. The
/// derivative (1 - mu) / (1 + mu)^3 vanishes only at mu = 1.
inline std::pair<double, double> optimal_thermal_p1() {
  constexpr double mu = 1.0;
  return {mu, thermal_p1(mu)};
}

}  // namespace smux

#endif  // SMUX_PHOTONSTAT_HPP

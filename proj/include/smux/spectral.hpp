#ifndef SMUX_SPECTRAL_HPP
#define SMUX_SPECTRAL_HPP

#include "smux/grid.hpp"

#include <Eigen/Dense>

#include <numbers>
#include <string>

namespace smux {

inline constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

// Mass allowed to fall off the grid in convolve/shift before it is treated
// as a span error (Lorentzian tails alone lose ~1e-3 on +-200 GHz).
inline constexpr double kSpanTolerance = 1e-2;

/// Unit-area Gaussian density in detuning, parametrised by FWHM.
template <typename Derived>
auto gaussian_density(const Eigen::ArrayBase<Derived>& nu, typename Derived::Scalar center,
                      typename Derived::Scalar fwhm) {
  using Scalar = typename Derived::Scalar;
  const Scalar sigma = fwhm / Scalar(kFwhmPerSigma);
  const Scalar norm = Scalar(1) / (sigma * std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>));
  const Scalar inv_two_var = Scalar(1) / (Scalar(2) * sigma * sigma);
  return norm * (-(nu - center).square() * inv_two_var).exp();
}

/// Unit-area Lorentzian (Cauchy) density in detuning, parametrised by FWHM.
template <typename Derived>
auto lorentzian_density(const Eigen::ArrayBase<Derived>& nu, typename Derived::Scalar center,
                        typename Derived::Scalar fwhm) {
  using Scalar = typename Derived::Scalar;
  const Scalar hwhm = fwhm / Scalar(2);
  const Scalar norm = hwhm / std::numbers::pi_v<Scalar>;
  return norm / ((nu - center).square() + hwhm * hwhm);
}

enum class LineshapeKind { gaussian, lorentzian, sampled };

/// A spectral density over detuning [GHz].
///
/// Parametric shapes have unit area on the real line. Sampled shapes live on
/// the shared detuning grid and have unit trapezoid area on it; their center
/// is the nominal center carried through convolve/shift.
class Lineshape {
 public:
  static Lineshape gaussian(double center, double fwhm);
  static Lineshape lorentzian(double center, double fwhm);
  /// Takes ownership of grid samples, validates them and renormalises to unit area.
  static Lineshape sampled(Eigen::ArrayXd density, double nominal_center = 0.0);

  LineshapeKind kind() const { return kind_; }
  double center() const { return center_; }
  /// Parametric FWHM; use fwhm_of() for sampled shapes.
  double parametric_fwhm() const { return fwhm_; }
  bool is_parametric() const { return kind_ != LineshapeKind::sampled; }

  double density(double nu) const;

  /// Density on the shared grid with unit trapezoid area.
  Eigen::ArrayXd on_grid() const;
  /// Density on the shared grid exactly as evaluated, without renormalisation.
  Eigen::ArrayXd raw_on_grid() const;

  const Eigen::ArrayXd& samples() const { return samples_; }

 private:
  Lineshape(LineshapeKind kind, double center, double fwhm, Eigen::ArrayXd samples)
      : kind_(kind), center_(center), fwhm_(fwhm), samples_(std::move(samples)) {}

  LineshapeKind kind_;
  double center_;
  double fwhm_;
  Eigen::ArrayXd samples_;
};

/// Parametric line shape; sampled kind is rejected here.
Lineshape make_lineshape(LineshapeKind kind, double center, double fwhm);

/// Numerical convolution on the grid. Result center is the sum of the centers.
Lineshape convolve(const Lineshape& a, const Lineshape& b);

/// Full width at half of the global maximum, from interpolated outermost
/// half-max crossings.
double fwhm_of(const Lineshape& s);

/// Translate a line shape by dv GHz. Parametric shapes stay parametric.
Lineshape shift_spectrum(const Lineshape& s, double dv);

/// peak_T times the overlap of the photon density with the filter rescaled
/// to unit maximum.
double filter_transmission(const Lineshape& photon, const Lineshape& filter, double peak_T);

struct SpectralModeConfig {
  std::string label;
  double idler_center_offset_ghz = 0.0;
  double idler_filter_fwhm_ghz = 12.0;
  double grating_transmission = 1.0;
  double heralding_detector_efficiency = 1.0;
  double herald_dark_count_prob = 0.0;

  /// Signal-side shift that recenters this mode's signal photon at zero detuning.
  double required_shift_ghz() const { return idler_center_offset_ghz; }
};

void validate(const SpectralModeConfig& mode);

/// Signal spectrum conditioned on a herald in `mode`: pump energy band
/// convolved with the idler filter, mirrored about the reference.
Lineshape conditional_signal_spectrum(const SpectralModeConfig& mode, double pump_fwhm);

/// Pump (x) idler filter (x) FP response, centered at zero, as a sampled shape.
Lineshape coincidence_profile(const SpectralModeConfig& mode, double pump_fwhm, double fp_fwhm);

/// Relative coincidence rate versus FP detuning for one herald mode, scaled
/// so that it equals grating transmission times the FP overlap of the
/// conditional signal spectrum with the peak-normalised FP.
double coincidence_curve(double detuning, const SpectralModeConfig& mode, bool shifting_enabled,
                         double pump_fwhm, double fp_fwhm);

/// Same as coincidence_curve but reuses a precomputed coincidence_profile.
double coincidence_curve(double detuning, const Lineshape& profile, double fp_fwhm,
                         const SpectralModeConfig& mode, bool shifting_enabled);

}  // namespace smux

#endif  // SMUX_SPECTRAL_HPP

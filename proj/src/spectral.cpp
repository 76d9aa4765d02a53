#include "smux/spectral.hpp"

#include "smux/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace smux {

namespace {

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

double grid_mass(const Eigen::ArrayXd& y) { return trapezoid(y, kGridStep); }

void check_parametric(double center, double fwhm) {
  if (!std::isfinite(fwhm) || fwhm <= 0.0) {
    throw InvalidParameter("line shape FWHM must be positive, got " + std::to_string(fwhm));
  }
  if (!std::isfinite(center)) throw InvalidParameter("line shape center must be finite");
}

}  // namespace

Lineshape Lineshape::gaussian(double center, double fwhm) {
  check_parametric(center, fwhm);
  return Lineshape(LineshapeKind::gaussian, center, fwhm, {});
}

Lineshape Lineshape::lorentzian(double center, double fwhm) {
  check_parametric(center, fwhm);
  return Lineshape(LineshapeKind::lorentzian, center, fwhm, {});
}

Lineshape Lineshape::sampled(Eigen::ArrayXd density, double nominal_center) {
  if (density.size() != kGridSize) {
    throw InvalidParameter("sampled line shape must have " + std::to_string(kGridSize) +
                           " grid samples");
  }
  if (!density.allFinite() || (density < 0.0).any()) {
    throw InvalidParameter("sampled density must be finite and nonnegative");
  }
  const double area = grid_mass(density);
  if (!(area > 0.0)) throw InvalidParameter("sampled density has zero area on the grid");
  density /= area;
  return Lineshape(LineshapeKind::sampled, nominal_center, 0.0, std::move(density));
}

double Lineshape::density(double nu) const {
  switch (kind_) {
    case LineshapeKind::gaussian: {
      const double sigma = fwhm_ / kFwhmPerSigma;
      const double z = (nu - center_) / sigma;
      return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
    }
    case LineshapeKind::lorentzian: {
      const double g = 0.5 * fwhm_;
      const double d = nu - center_;
      return g / (std::numbers::pi * (d * d + g * g));
    }
    case LineshapeKind::sampled:
      return interpolate_on_grid(samples_, nu);
  }
  return 0.0;
}

Eigen::ArrayXd Lineshape::raw_on_grid() const {
  switch (kind_) {
    case LineshapeKind::gaussian:
      return gaussian_density(grid_nodes(), center_, fwhm_);
    case LineshapeKind::lorentzian:
      return lorentzian_density(grid_nodes(), center_, fwhm_);
    case LineshapeKind::sampled:
      return samples_;
  }
  return {};
}

Eigen::ArrayXd Lineshape::on_grid() const {
  Eigen::ArrayXd y = raw_on_grid();
  if (kind_ == LineshapeKind::sampled) return y;
  const double area = grid_mass(y);
  if (!(area > 0.0)) throw SpanError("line shape has no support on the detuning grid");
  return y / area;
}

Lineshape make_lineshape(LineshapeKind kind, double center, double fwhm) {
  switch (kind) {
    case LineshapeKind::gaussian:
      return Lineshape::gaussian(center, fwhm);
    case LineshapeKind::lorentzian:
      return Lineshape::lorentzian(center, fwhm);
    case LineshapeKind::sampled:
      break;
  }
  throw InvalidParameter("make_lineshape builds parametric shapes only");
}

Lineshape convolve(const Lineshape& a, const Lineshape& b) {
  const Eigen::ArrayXd ya = a.on_grid();
  const Eigen::ArrayXd yb = b.on_grid();
  const Eigen::Index n = kGridSize;
  const Eigen::Index c = kGridCenterIndex;

  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(n);
  // Entries this far below the peak contribute below double resolution.
  const double floor = ya.maxCoeff() * 1e-18;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double w = ya(j);
    if (w <= floor) continue;
    // out(i) += w * yb(i - j + c) for every i keeping the b index on the grid
    const Eigen::Index lo = std::max<Eigen::Index>(0, j - c);
    const Eigen::Index hi = std::min<Eigen::Index>(n, j - c + n);
    if (hi <= lo) continue;
    out.segment(lo, hi - lo) += (w * kGridStep) * yb.segment(lo - j + c, hi - lo);
  }

  const double expected = ya.sum() * kGridStep * yb.sum() * kGridStep;
  const double lost = 1.0 - grid_mass(out) / expected;
  if (lost > kSpanTolerance) {
    throw SpanError("convolution support exceeds the detuning grid (lost mass " +
                    std::to_string(lost) + ")");
  }
  return Lineshape::sampled(std::move(out), a.center() + b.center());
}

double fwhm_of(const Lineshape& s) {
  const Eigen::ArrayXd y = s.raw_on_grid();
  const double peak = y.maxCoeff();
  if (!(peak > 0.0)) throw IllDefinedWidth("line shape is identically zero on the grid");
  const double half = 0.5 * peak;

  Eigen::Index left = 0;
  while (left < kGridSize && y(left) < half) ++left;
  Eigen::Index right = kGridSize - 1;
  while (right > left && y(right) < half) --right;
  if (left == 0 || right == kGridSize - 1) {
    throw IllDefinedWidth("half-maximum crossing not found on the grid (flat or too wide)");
  }
  if (((y.segment(left, right - left + 1)) < half).any()) {
    throw IllDefinedWidth("line shape is multimodal at half maximum");
  }

  const double x_left = grid_node(left - 1) +
                        (half - y(left - 1)) / (y(left) - y(left - 1)) * kGridStep;
  const double x_right =
      grid_node(right) + (y(right) - half) / (y(right) - y(right + 1)) * kGridStep;
  return x_right - x_left;
}

Lineshape shift_spectrum(const Lineshape& s, double dv) {
  if (!std::isfinite(dv)) throw InvalidParameter("spectral shift must be finite");
  if (dv == 0.0) return s;

  const double mass_before = grid_mass(s.raw_on_grid());
  if (s.is_parametric()) {
    Lineshape out = make_lineshape(s.kind(), s.center() + dv, s.parametric_fwhm());
    const double lost = (mass_before - grid_mass(out.raw_on_grid())) / mass_before;
    if (lost > kSpanTolerance) throw SpanError("shifted line shape leaves the detuning grid");
    return out;
  }

  const Eigen::ArrayXd& y = s.samples();
  Eigen::ArrayXd shifted(kGridSize);
  for (Eigen::Index i = 0; i < kGridSize; ++i) {
    shifted(i) = interpolate_on_grid(y, grid_node(i) - dv);
  }
  const double lost = (mass_before - grid_mass(shifted)) / mass_before;
  if (lost > kSpanTolerance) throw SpanError("shifted line shape leaves the detuning grid");
  return Lineshape::sampled(std::move(shifted), s.center() + dv);
}

double filter_transmission(const Lineshape& photon, const Lineshape& filter, double peak_T) {
  if (!is_probability(peak_T)) {
    throw InvalidParameter("filter peak transmission must lie in [0, 1]");
  }
  if (peak_T == 0.0) return 0.0;
  const Eigen::ArrayXd p = photon.on_grid();
  const Eigen::ArrayXd f = filter.raw_on_grid();
  const double fmax = f.maxCoeff();
  if (!(fmax > 0.0)) return 0.0;
  const double overlap = trapezoid((p * f / fmax).eval(), kGridStep);
  return std::clamp(peak_T * overlap, 0.0, peak_T);
}

void validate(const SpectralModeConfig& mode) {
  if (mode.label.empty()) throw ConfigError("spectral mode needs a label");
  if (!std::isfinite(mode.idler_center_offset_ghz)) {
    throw ConfigError("mode " + mode.label + ": idler offset must be finite");
  }
  if (!std::isfinite(mode.idler_filter_fwhm_ghz) || mode.idler_filter_fwhm_ghz <= 0.0) {
    throw ConfigError("mode " + mode.label + ": idler filter FWHM must be positive");
  }
  if (!is_probability(mode.grating_transmission) ||
      !is_probability(mode.heralding_detector_efficiency) ||
      !is_probability(mode.herald_dark_count_prob)) {
    throw ConfigError("mode " + mode.label + ": transmissions and efficiencies must be in [0, 1]");
  }
}

Lineshape conditional_signal_spectrum(const SpectralModeConfig& mode, double pump_fwhm) {
  const double width = std::hypot(pump_fwhm, mode.idler_filter_fwhm_ghz);
  return Lineshape::gaussian(-mode.idler_center_offset_ghz, width);
}

Lineshape coincidence_profile(const SpectralModeConfig& mode, double pump_fwhm, double fp_fwhm) {
  const Lineshape pump = Lineshape::gaussian(0.0, pump_fwhm);
  const Lineshape idler = Lineshape::gaussian(0.0, mode.idler_filter_fwhm_ghz);
  const Lineshape cavity = Lineshape::lorentzian(0.0, fp_fwhm);
  return convolve(convolve(pump, idler), cavity);
}

double coincidence_curve(double detuning, const Lineshape& profile, double fp_fwhm,
                         const SpectralModeConfig& mode, bool shifting_enabled) {
  const double peak = shifting_enabled ? 0.0 : -mode.idler_center_offset_ghz;
  // Express the FP response relative to its own maximum, as filter_transmission does.
  const double cavity_peak = Lineshape::lorentzian(0.0, fp_fwhm).on_grid().maxCoeff();
  return mode.grating_transmission * profile.density(detuning - peak) / cavity_peak;
}

double coincidence_curve(double detuning, const SpectralModeConfig& mode, bool shifting_enabled,
                         double pump_fwhm, double fp_fwhm) {
  return coincidence_curve(detuning, coincidence_profile(mode, pump_fwhm, fp_fwhm), fp_fwhm, mode,
                           shifting_enabled);
}

}  // namespace smux

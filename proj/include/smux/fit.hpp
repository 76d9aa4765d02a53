#ifndef SMUX_FIT_HPP
#define SMUX_FIT_HPP

#include <Eigen/Dense>

#include <functional>

namespace smux {

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_sigma = 0.0;
  double r_squared = 0.0;
};

/// Weighted least squares y = intercept + slope x with weights 1 / sigma^2.
/// Zero sigmas are treated as unit weights for every point.
LinearFit fit_line(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y, const Eigen::ArrayXd& sigma);

struct PeakFit {
  double center = 0.0;
  double amplitude = 0.0;
  double chi2 = 0.0;
};

/// Fits y ~ amplitude * shape(x - center) by a grid search over the center
/// with the least-squares amplitude for each trial center. The search runs
/// over [lo, hi] with step `resolution`.
PeakFit fit_peak(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y, const Eigen::ArrayXd& sigma,
                 const std::function<double(double)>& shape, double lo, double hi,
                 double resolution = 0.01);

/// Width of the sampled curve at half its largest value, from linearly
/// interpolated outermost crossings. Returns 0 when a crossing is missing.
double sampled_fwhm(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y);

}  // namespace smux

#endif  // SMUX_FIT_HPP

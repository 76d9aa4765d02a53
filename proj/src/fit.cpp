#include "smux/fit.hpp"

#include "smux/errors.hpp"

#include <cmath>
#include <limits>

namespace smux {

namespace {

Eigen::ArrayXd weights_from(const Eigen::ArrayXd& sigma) {
  if ((sigma <= 0.0).any()) return Eigen::ArrayXd::Ones(sigma.size());
  return sigma.square().inverse();
}

}  // namespace

LinearFit fit_line(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y, const Eigen::ArrayXd& sigma) {
  if (x.size() != y.size() || x.size() != sigma.size()) {
    throw InvalidParameter("fit inputs must have equal lengths");
  }
  if (x.size() < 2) throw InvalidParameter("a line fit needs at least two points");
  const Eigen::ArrayXd w = weights_from(sigma);
  const Eigen::ArrayXd sw = w.sqrt();

  Eigen::MatrixXd design(x.size(), 2);
  design.col(0) = sw.matrix();
  design.col(1) = (sw * x).matrix();
  const Eigen::VectorXd rhs = (sw * y).matrix();
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 2) throw InvalidParameter("line fit is degenerate (all x equal)");
  const Eigen::Vector2d beta = qr.solve(rhs);

  LinearFit fit;
  fit.intercept = beta(0);
  fit.slope = beta(1);
  const Eigen::Matrix2d cov = (design.transpose() * design).inverse();
  fit.slope_sigma = std::sqrt(cov(1, 1));

  const Eigen::ArrayXd residual = y - (fit.intercept + fit.slope * x);
  const double mean = (w * y).sum() / w.sum();
  const double ss_res = (w * residual.square()).sum();
  const double ss_tot = (w * (y - mean).square()).sum();
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

PeakFit fit_peak(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y, const Eigen::ArrayXd& sigma,
                 const std::function<double(double)>& shape, double lo, double hi,
                 double resolution) {
  if (x.size() != y.size() || x.size() != sigma.size() || x.size() == 0) {
    throw InvalidParameter("fit inputs must be nonempty and of equal length");
  }
  if (!(hi >= lo) || !(resolution > 0.0)) throw InvalidParameter("bad center search range");
  const Eigen::ArrayXd w = weights_from(sigma);

  PeakFit best;
  best.chi2 = std::numeric_limits<double>::infinity();
  const auto steps = static_cast<long>(std::floor((hi - lo) / resolution + 0.5));
  Eigen::ArrayXd model(x.size());
  for (long s = 0; s <= steps; ++s) {
    const double center = lo + static_cast<double>(s) * resolution;
    for (Eigen::Index i = 0; i < x.size(); ++i) model(i) = shape(x(i) - center);
    const double norm = (w * model.square()).sum();
    if (!(norm > 0.0)) continue;
    const double amplitude = (w * model * y).sum() / norm;
    const double chi2 = (w * (y - amplitude * model).square()).sum();
    if (chi2 < best.chi2) best = {center, amplitude, chi2};
  }
  return best;
}

double sampled_fwhm(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y) {
  const Eigen::Index n = y.size();
  if (n < 3) return 0.0;
  Eigen::Index peak = 0;
  const double top = y.maxCoeff(&peak);
  if (!(top > 0.0)) return 0.0;
  const double half = 0.5 * top;
  Eigen::Index left = 0;
  while (left < n && y(left) < half) ++left;
  Eigen::Index right = n - 1;
  while (right > left && y(right) < half) --right;
  if (left == 0 || right == n - 1) return 0.0;
  const double x_left = x(left - 1) + (half - y(left - 1)) / (y(left) - y(left - 1)) * (x(left) - x(left - 1));
  const double x_right =
      x(right) + (y(right) - half) / (y(right) - y(right + 1)) * (x(right + 1) - x(right));
  return x_right - x_left;
}

}  // namespace smux

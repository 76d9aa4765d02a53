#ifndef SMUX_GRID_HPP
#define SMUX_GRID_HPP

#include <Eigen/Dense>

#include <cmath>

namespace smux {

// Uniform detuning grid shared by every sampled line shape [GHz].
inline constexpr double kGridStep = 0.05;
inline constexpr double kGridHalfSpan = 200.0;
inline constexpr Eigen::Index kGridSize = 8001;  // 2 * 200 / 0.05 + 1
inline constexpr Eigen::Index kGridCenterIndex = kGridSize / 2;

inline double grid_node(Eigen::Index i) {
  return static_cast<double>(i - kGridCenterIndex) * kGridStep;
}

inline const Eigen::ArrayXd& grid_nodes() {
  static const Eigen::ArrayXd nodes =
      Eigen::ArrayXd::LinSpaced(kGridSize, -kGridHalfSpan, kGridHalfSpan);
  return nodes;
}

/// Trapezoid integral of uniformly sampled values.
template <typename Derived>
typename Derived::Scalar trapezoid(const Eigen::ArrayBase<Derived>& y,
                                   typename Derived::Scalar step) {
  const Eigen::Index n = y.size();
  if (n < 2) return typename Derived::Scalar(0);
  return step * (y.sum() - typename Derived::Scalar(0.5) * (y(0) + y(n - 1)));
}

/// Linear interpolation of grid samples at an arbitrary detuning; zero off-grid.
template <typename Derived>
typename Derived::Scalar interpolate_on_grid(const Eigen::ArrayBase<Derived>& y, double nu) {
  const double pos = (nu + kGridHalfSpan) / kGridStep;
  if (pos < 0.0 || pos > static_cast<double>(kGridSize - 1)) return 0;
  const auto i = static_cast<Eigen::Index>(std::floor(pos));
  if (i >= kGridSize - 1) return y(kGridSize - 1);
  const double frac = pos - static_cast<double>(i);
  return (1.0 - frac) * y(i) + frac * y(i + 1);
}

}  // namespace smux

#endif  // SMUX_GRID_HPP

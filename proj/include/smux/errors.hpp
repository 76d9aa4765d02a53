#ifndef SMUX_ERRORS_HPP
#define SMUX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace smux {

/// A parameter is outside its domain (negative mean, non-positive width, ...).
struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A spectral result would not fit on the detuning grid.
struct SpanError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// FWHM requested for a flat, empty or multimodal line shape.
struct IllDefinedWidth : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Conditioning on an event of probability zero (no herald can ever occur).
struct ConditioningOnNull : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Inconsistent or malformed simulation / experiment configuration.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Estimator with a zero denominator.
struct UndefinedMetric : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace smux

#endif  // SMUX_ERRORS_HPP

#ifndef SMUX_FEEDFORWARD_HPP
#define SMUX_FEEDFORWARD_HPP

#include "smux/spectral.hpp"

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace smux {

/// One ramp applied to the phase modulator. A zero slope means the herald
/// never reaches the ramp generator.
struct RampAction {
  double slope_v_per_ns = 0.0;
  double edge_duration_ns = 0.0;
  double v_pi = 1.0;
  double shift_ghz = 0.0;
};

double slope_from_pulse(double amplitude_v, double edge_duration_ns);

/// Serrodyne frequency shift: slope / (2 V_pi), GHz for V/ns and V.
double shift_from_slope(double slope_v_per_ns, double v_pi);

double required_slope(double target_shift_ghz, double v_pi);

RampAction make_ramp_action(double target_shift_ghz, double v_pi, double edge_duration_ns);

struct RoutingPolicy {
  // Labels earlier in the list win when several herald detectors fire in
  // one pulse. Modes missing from the list follow in configuration order.
  std::vector<std::string> priority;
  double delay_ns = 512.0;
};

class FeedForwardTable {
 public:
  FeedForwardTable(std::vector<std::string> labels, std::vector<RampAction> actions,
                   std::vector<std::size_t> priority_order, double delay_ns);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<RampAction>& actions() const { return actions_; }
  /// Mode indices from highest to lowest priority.
  const std::vector<std::size_t>& priority_order() const { return priority_order_; }
  double delay_ns() const { return delay_ns_; }

  std::size_t index_of(const std::string& label) const;
  const RampAction& action(const std::string& label) const { return actions_[index_of(label)]; }

 private:
  std::vector<std::string> labels_;
  std::vector<RampAction> actions_;
  std::vector<std::size_t> priority_order_;
  double delay_ns_;
};

FeedForwardTable build_routing_table(std::span<const SpectralModeConfig> modes, double v_pi,
                                     double edge_duration_ns, const RoutingPolicy& policy);

std::optional<std::string> resolve_heralds(const std::set<std::string>& clicked,
                                           const FeedForwardTable& table);

/// Index-based resolution used on the hot path; `clicked[k]` is mode k's herald.
template <typename Flags>
std::optional<std::size_t> resolve_herald_index(const Flags& clicked, const FeedForwardTable& table) {
  for (std::size_t k : table.priority_order()) {
    if (clicked[k]) return k;
  }
  return std::nullopt;
}

/// Duration of the constant-shift window times the largest shift magnitude.
double time_bandwidth_fom(double linear_window_ns, double max_shift_ghz);

}  // namespace smux

#endif  // SMUX_FEEDFORWARD_HPP

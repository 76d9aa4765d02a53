#include "smux/feedforward.hpp"

#include "smux/errors.hpp"

#include <algorithm>
#include <cmath>

namespace smux {

double slope_from_pulse(double amplitude_v, double edge_duration_ns) {
  if (!(edge_duration_ns > 0.0) || !std::isfinite(edge_duration_ns)) {
    throw InvalidParameter("ramp edge duration must be positive");
  }
  return amplitude_v / edge_duration_ns;
}

double shift_from_slope(double slope_v_per_ns, double v_pi) {
  if (!(v_pi > 0.0) || !std::isfinite(v_pi)) throw InvalidParameter("V_pi must be positive");
  return slope_v_per_ns / (2.0 * v_pi);
}

double required_slope(double target_shift_ghz, double v_pi) {
  if (!(v_pi > 0.0) || !std::isfinite(v_pi)) throw InvalidParameter("V_pi must be positive");
  return 2.0 * v_pi * target_shift_ghz;
}

RampAction make_ramp_action(double target_shift_ghz, double v_pi, double edge_duration_ns) {
  RampAction action;
  action.v_pi = v_pi;
  action.slope_v_per_ns = required_slope(target_shift_ghz, v_pi);
  action.shift_ghz = shift_from_slope(action.slope_v_per_ns, v_pi);
  if (action.slope_v_per_ns != 0.0) {
    if (!(edge_duration_ns > 0.0)) throw InvalidParameter("ramp edge duration must be positive");
    action.edge_duration_ns = edge_duration_ns;
  }
  return action;
}

FeedForwardTable::FeedForwardTable(std::vector<std::string> labels, std::vector<RampAction> actions,
                                   std::vector<std::size_t> priority_order, double delay_ns)
    : labels_(std::move(labels)),
      actions_(std::move(actions)),
      priority_order_(std::move(priority_order)),
      delay_ns_(delay_ns) {}

std::size_t FeedForwardTable::index_of(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw ConfigError("unknown herald mode label '" + label + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

FeedForwardTable build_routing_table(std::span<const SpectralModeConfig> modes, double v_pi,
                                     double edge_duration_ns, const RoutingPolicy& policy) {
  if (modes.empty()) throw ConfigError("routing table needs at least one spectral mode");
  std::vector<std::string> labels;
  std::vector<RampAction> actions;
  bool has_zero = false;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const SpectralModeConfig& mode = modes[k];
    for (std::size_t j = 0; j < k; ++j) {
      if (modes[j].idler_center_offset_ghz == mode.idler_center_offset_ghz) {
        throw ConfigError("duplicate idler offset for modes " + modes[j].label + " and " +
                          mode.label);
      }
      if (modes[j].label == mode.label) throw ConfigError("duplicate mode label " + mode.label);
    }
    has_zero = has_zero || mode.idler_center_offset_ghz == 0.0;
    labels.push_back(mode.label);
    actions.push_back(make_ramp_action(mode.required_shift_ghz(), v_pi, edge_duration_ns));
  }
  if (!has_zero) throw ConfigError("routing table needs a mode with zero idler offset");

  std::vector<std::size_t> order;
  std::vector<bool> placed(modes.size(), false);
  for (const std::string& label : policy.priority) {
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) continue;  // priority lists may name modes absent from this config
    const auto k = static_cast<std::size_t>(it - labels.begin());
    if (placed[k]) throw ConfigError("mode " + label + " listed twice in herald priority");
    placed[k] = true;
    order.push_back(k);
  }
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (!placed[k]) order.push_back(k);
  }
  return FeedForwardTable(std::move(labels), std::move(actions), std::move(order), policy.delay_ns);
}

std::optional<std::string> resolve_heralds(const std::set<std::string>& clicked,
                                           const FeedForwardTable& table) {
  std::vector<bool> flags(table.size(), false);
  for (const std::string& label : clicked) flags[table.index_of(label)] = true;
  const auto k = resolve_herald_index(flags, table);
  if (!k) return std::nullopt;
  return table.labels()[*k];
}

double time_bandwidth_fom(double linear_window_ns, double max_shift_ghz) {
  if (!(linear_window_ns >= 0.0) || !(max_shift_ghz >= 0.0)) {
    throw InvalidParameter("time-bandwidth inputs must be nonnegative");
  }
  return linear_window_ns * max_shift_ghz;
}

}  // namespace smux

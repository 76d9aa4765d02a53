#include "smux/config_io.hpp"

#include "smux/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace smux {

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) throw ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
  }
}

std::vector<double> read_axis(const json& value, const std::string& where) {
  if (value.is_array()) {
    std::vector<double> out;
    for (const json& v : value) {
      if (!v.is_number()) throw ConfigError(where + " entries must be numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }
  check_keys(value, {"from", "to", "step"}, where);
  if (!value.contains("from") || !value.contains("to") || !value.contains("step")) {
    throw ConfigError(where + " range needs from, to and step");
  }
  const double from = value["from"].get<double>();
  const double to = value["to"].get<double>();
  const double step = value["step"].get<double>();
  if (!(step > 0.0) || !(to >= from)) throw ConfigError(where + " range is empty");
  const auto count = static_cast<long>(std::floor((to - from) / step + 1e-9)) + 1;
  std::vector<double> out;
  for (long i = 0; i < count; ++i) out.push_back(from + static_cast<double>(i) * step);
  return out;
}

StatisticsKind parse_statistics(const std::string& name) {
  if (name == "thermal") return StatisticsKind::thermal;
  if (name == "poissonian") return StatisticsKind::poissonian;
  throw ConfigError("statistics must be 'thermal' or 'poissonian', got '" + name + "'");
}

SpectralModeConfig parse_mode(const json& obj) {
  const std::string where = "mode";
  check_keys(obj,
             {"label", "idler_center_offset_ghz", "idler_filter_fwhm_ghz", "grating_transmission",
              "heralding_detector_efficiency", "herald_dark_count_prob"},
             where);
  SpectralModeConfig mode;
  read(obj, "label", mode.label, where);
  read(obj, "idler_center_offset_ghz", mode.idler_center_offset_ghz, where);
  read(obj, "idler_filter_fwhm_ghz", mode.idler_filter_fwhm_ghz, where);
  read(obj, "grating_transmission", mode.grating_transmission, where);
  read(obj, "heralding_detector_efficiency", mode.heralding_detector_efficiency, where);
  read(obj, "herald_dark_count_prob", mode.herald_dark_count_prob, where);
  return mode;
}

SimulationConfig parse_simulation(const json& obj) {
  const std::string where = "simulation";
  check_keys(obj,
             {"statistics", "modes", "mu_per_mode", "pump_fwhm_ghz", "fabry_perot", "losses",
              "detectors", "splitter_inserted", "shifting_enabled", "routing", "rep_rate_mhz",
              "n_pulses", "seed", "n_partitions"},
             where);
  SimulationConfig c;
  if (obj.contains("statistics")) c.statistics = parse_statistics(obj["statistics"].get<std::string>());
  if (!obj.contains("modes") || !obj["modes"].is_array()) {
    throw ConfigError("simulation.modes must be a list of spectral modes");
  }
  for (const json& m : obj["modes"]) c.modes.push_back(parse_mode(m));
  read(obj, "mu_per_mode", c.mu_per_mode, where);
  read(obj, "pump_fwhm_ghz", c.pump_fwhm_ghz, where);
  if (obj.contains("fabry_perot")) {
    const json& fp = obj["fabry_perot"];
    check_keys(fp, {"fwhm_ghz", "peak_transmission", "detuning_ghz"}, "fabry_perot");
    read(fp, "fwhm_ghz", c.fp.fwhm_ghz, "fabry_perot");
    read(fp, "peak_transmission", c.fp.peak_transmission, "fabry_perot");
    read(fp, "detuning_ghz", c.fp.detuning_ghz, "fabry_perot");
  }
  if (obj.contains("losses")) {
    const json& l = obj["losses"];
    check_keys(l, {"delay_transmission", "modulator_transmission", "modulator_present"}, "losses");
    read(l, "delay_transmission", c.losses.delay_transmission, "losses");
    read(l, "modulator_transmission", c.losses.modulator_transmission, "losses");
    read(l, "modulator_present", c.losses.modulator_present, "losses");
  }
  if (obj.contains("detectors")) {
    const json& d = obj["detectors"];
    check_keys(d, {"eta_a", "eta_b", "dark_a", "dark_b"}, "detectors");
    read(d, "eta_a", c.detectors.eta_a, "detectors");
    read(d, "eta_b", c.detectors.eta_b, "detectors");
    read(d, "dark_a", c.detectors.dark_a, "detectors");
    read(d, "dark_b", c.detectors.dark_b, "detectors");
  }
  read(obj, "splitter_inserted", c.splitter_inserted, where);
  read(obj, "shifting_enabled", c.shifting_enabled, where);
  if (obj.contains("routing")) {
    const json& r = obj["routing"];
    check_keys(r, {"v_pi", "edge_ns", "priority", "delay_ns"}, "routing");
    read(r, "v_pi", c.routing.v_pi, "routing");
    read(r, "edge_ns", c.routing.edge_ns, "routing");
    read(r, "priority", c.routing.priority, "routing");
    read(r, "delay_ns", c.routing.delay_ns, "routing");
  }
  read(obj, "rep_rate_mhz", c.rep_rate_mhz, where);
  read(obj, "n_pulses", c.n_pulses, where);
  read(obj, "seed", c.seed, where);
  read(obj, "n_partitions", c.n_partitions, where);
  return c;
}

Calibration parse_calibration(const json& obj) {
  check_keys(obj, {"max_power_mu", "target_g2", "reference_mode", "note"}, "calibration");
  Calibration cal;
  read(obj, "max_power_mu", cal.max_power_mu, "calibration");
  read(obj, "target_g2", cal.target_g2, "calibration");
  read(obj, "reference_mode", cal.reference_mode, "calibration");
  return cal;
}

std::vector<RampCalibration> parse_ramps(const json& arr) {
  if (!arr.is_array()) throw ConfigError("ramp_calibration must be a list");
  std::vector<RampCalibration> out;
  for (const json& obj : arr) {
    check_keys(obj, {"label", "slope_v_per_ns", "shift_ghz", "v_pi"}, "ramp_calibration");
    RampCalibration r;
    read(obj, "label", r.label, "ramp_calibration");
    read(obj, "slope_v_per_ns", r.slope_v_per_ns, "ramp_calibration");
    read(obj, "shift_ghz", r.shift_ghz, "ramp_calibration");
    read(obj, "v_pi", r.v_pi, "ramp_calibration");
    if (!(r.v_pi > 0.0)) throw ConfigError("ramp_calibration v_pi must be positive");
    out.push_back(r);
  }
  return out;
}

ExperimentSettings parse_experiments(const json& obj) {
  check_keys(obj, {"detuning-scan", "power-sweep", "mode-sweep", "breakeven", "fom-table", "g2-bench"},
             "experiments");
  ExperimentSettings s;
  if (obj.contains("detuning-scan")) {
    const json& e = obj["detuning-scan"];
    check_keys(e, {"detuning_ghz", "pulses_per_point"}, "detuning-scan");
    if (e.contains("detuning_ghz")) s.detunings_ghz = read_axis(e["detuning_ghz"], "detuning-scan");
    read(e, "pulses_per_point", s.scan_pulses, "detuning-scan");
  }
  if (obj.contains("power-sweep")) {
    const json& e = obj["power-sweep"];
    check_keys(e, {"mu", "pulses_per_point"}, "power-sweep");
    if (e.contains("mu")) s.power_mu = read_axis(e["mu"], "power-sweep");
    read(e, "pulses_per_point", s.power_pulses, "power-sweep");
  }
  if (obj.contains("mode-sweep")) {
    const json& e = obj["mode-sweep"];
    check_keys(e, {"m", "herald_probability", "target", "pulses_per_point"}, "mode-sweep");
    read(e, "m", s.mode_counts, "mode-sweep");
    if (e.contains("herald_probability")) s.herald_probability = e["herald_probability"].get<double>();
    read(e, "target", s.mode_target, "mode-sweep");
    read(e, "pulses_per_point", s.mode_pulses, "mode-sweep");
  }
  if (obj.contains("breakeven")) {
    const json& e = obj["breakeven"];
    check_keys(e, {"modulator_loss_db", "m"}, "breakeven");
    if (e.contains("modulator_loss_db")) {
      s.breakeven_loss_db = read_axis(e["modulator_loss_db"], "breakeven");
    }
    read(e, "m", s.breakeven_modes, "breakeven");
  }
  if (obj.contains("fom-table")) {
    const json& e = obj["fom-table"];
    check_keys(e, {"rows"}, "fom-table");
    if (e.contains("rows")) {
      for (const json& row : e["rows"]) {
        check_keys(row, {"source", "window_ns", "max_shift_ghz"}, "fom-table row");
        FomRow r;
        read(row, "source", r.source, "fom-table row");
        read(row, "window_ns", r.window_ns, "fom-table row");
        read(row, "max_shift_ghz", r.max_shift_ghz, "fom-table row");
        s.fom_rows.push_back(r);
      }
    }
  }
  if (obj.contains("g2-bench")) {
    const json& e = obj["g2-bench"];
    check_keys(e, {"mu", "pulses"}, "g2-bench");
    if (e.contains("mu")) s.g2_mu = e["mu"].get<double>();
    read(e, "pulses", s.g2_pulses, "g2-bench");
  }
  return s;
}

}  // namespace

ConfigDocument parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  check_keys(root, {"simulation", "calibration", "ramp_calibration", "experiments", "note"}, "configuration");
  if (!root.contains("simulation")) throw ConfigError("configuration needs a simulation section");

  ConfigDocument doc;
  try {
    doc.simulation = parse_simulation(root["simulation"]);
    if (root.contains("calibration")) doc.calibration = parse_calibration(root["calibration"]);
    if (root.contains("ramp_calibration")) doc.ramp_calibration = parse_ramps(root["ramp_calibration"]);
    if (root.contains("experiments")) doc.experiments = parse_experiments(root["experiments"]);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad configuration value: ") + e.what());
  }
  if (doc.simulation.mu_per_mode.empty() && doc.calibration.max_power_mu > 0.0) {
    doc.simulation.mu_per_mode.assign(doc.simulation.modes.size(), doc.calibration.max_power_mu);
  }
  validate(doc.simulation);
  return doc;
}

ConfigDocument load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string dump_simulation(const SimulationConfig& c) {
  json modes = json::array();
  for (const SpectralModeConfig& m : c.modes) {
    modes.push_back({{"label", m.label},
                     {"idler_center_offset_ghz", m.idler_center_offset_ghz},
                     {"idler_filter_fwhm_ghz", m.idler_filter_fwhm_ghz},
                     {"grating_transmission", m.grating_transmission},
                     {"heralding_detector_efficiency", m.heralding_detector_efficiency},
                     {"herald_dark_count_prob", m.herald_dark_count_prob}});
  }
  const json sim = {
      {"statistics", to_string(c.statistics)},
      {"modes", modes},
      {"mu_per_mode", c.mu_per_mode},
      {"pump_fwhm_ghz", c.pump_fwhm_ghz},
      {"fabry_perot",
       {{"fwhm_ghz", c.fp.fwhm_ghz},
        {"peak_transmission", c.fp.peak_transmission},
        {"detuning_ghz", c.fp.detuning_ghz}}},
      {"losses",
       {{"delay_transmission", c.losses.delay_transmission},
        {"modulator_transmission", c.losses.modulator_transmission},
        {"modulator_present", c.losses.modulator_present}}},
      {"detectors",
       {{"eta_a", c.detectors.eta_a},
        {"eta_b", c.detectors.eta_b},
        {"dark_a", c.detectors.dark_a},
        {"dark_b", c.detectors.dark_b}}},
      {"splitter_inserted", c.splitter_inserted},
      {"shifting_enabled", c.shifting_enabled},
      {"routing",
       {{"v_pi", c.routing.v_pi},
        {"edge_ns", c.routing.edge_ns},
        {"priority", c.routing.priority},
        {"delay_ns", c.routing.delay_ns}}},
      {"rep_rate_mhz", c.rep_rate_mhz},
      {"n_pulses", c.n_pulses},
      {"seed", c.seed},
      {"n_partitions", c.n_partitions},
  };
  return json{{"simulation", sim}}.dump(2);
}

}  // namespace smux

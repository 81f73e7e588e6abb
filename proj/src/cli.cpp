#include "levisim/cli.hpp"

#include "levisim/experiment.hpp"
#include "levisim/merit.hpp"
#include "levisim/solvers.hpp"
#include "levisim/sweep.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

namespace levisim::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': cannot parse number from '" + text + "'");
  }
}

}  // namespace

bool RunConfig::has(const std::string& key) const { return values.count(key) != 0; }

std::string RunConfig::get(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

std::string RunConfig::get_or(const std::string& key,
                              const std::string& fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key) const {
  return parse_double(key, get(key));
}

double RunConfig::get_double_or(const std::string& key, double fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : parse_double(key, it->second);
}

std::int64_t RunConfig::get_int_or(const std::string& key,
                                   std::int64_t fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  const double v = parse_double(key, it->second);
  const auto n = static_cast<std::int64_t>(std::llround(v));
  if (static_cast<double>(n) != v)
    throw ConfigError("key '" + key + "': expected an integer");
  return n;
}

bool RunConfig::get_bool_or(const std::string& key, bool fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  const std::string v = trim(it->second);
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError("key '" + key + "': expected on/off");
}

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::ostringstream os;
      os << "line " << line_no << ": expected key=value, got '" << t << "'";
      throw ConfigError(os.str());
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (config.values.count(key))
      throw ConfigError("duplicate key '" + key + "'");
    config.values[key] = value;
  }
  return config;
}

namespace {

const std::set<std::string> kGlobalKeys = {
    "schema", "command", "seed", "precision", "format", "out",
};

const std::set<std::string> kSystemKeys = {
    "system.omega_m", "system.delta", "system.g", "system.kappa",
    "system.gamma",
};

const std::set<std::string> kMeasureKeys = {
    "measure.eta1", "measure.eta2", "measure.phi",
};

const std::set<std::string> kSweepKeys = {
    "sweep.scenario",     "sweep.objective",    "sweep.delta_min",
    "sweep.delta_max",    "sweep.delta_points", "sweep.efficiencies",
};

const std::set<std::string> kMapKeys = {
    "map.delta_min", "map.delta_max", "map.delta_points",
    "map.g_min",     "map.g_max",     "map.g_points",
};

const std::set<std::string> kDecoupledKeys = {
    "decoupled.gamma_min", "decoupled.gamma_max", "decoupled.gamma_points",
    "decoupled.eta2_list",
};

const std::set<std::string> kExperimentKeys = {
    "experiment.radius",        "experiment.mass",
    "experiment.wavelength",    "experiment.cavity_length",
    "experiment.finesse",       "experiment.waist",
    "experiment.epsilon_r",     "experiment.gamma_ratio",
    "experiment.kappa_total",   "experiment.target_omega_m0",
};

const std::set<std::string> kTrajectoryKeys = {
    "trajectory.t_final", "trajectory.dt", "trajectory.feedback",
    "trajectory.ensemble",
};

std::set<std::string> allowed_keys_for(const std::string& command) {
  std::set<std::string> keys = kGlobalKeys;
  auto add = [&keys](const std::set<std::string>& more) {
    keys.insert(more.begin(), more.end());
  };
  if (command == "stability-map") {
    add(kMapKeys);
    add(kSystemKeys);
  } else if (command == "steady-state") {
    add(kSystemKeys);
    add(kMeasureKeys);
  } else if (command == "sweep") {
    add(kSweepKeys);
    add(kSystemKeys);
  } else if (command == "decoupled") {
    add(kDecoupledKeys);
  } else if (command == "trajectory") {
    add(kTrajectoryKeys);
    add(kSystemKeys);
    add(kMeasureKeys);
  } else if (command == "experiment-sweep") {
    add(kSweepKeys);
    add(kExperimentKeys);
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
  return keys;
}

}  // namespace

void validate_config(const RunConfig& config) {
  if (config.get_or("schema", "") != "1")
    throw ConfigError("config must declare schema=1");
  const std::string command = config.get("command");
  const auto allowed = allowed_keys_for(command);
  for (const auto& [key, value] : config.values)
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' for command '" + command + "'");
  const int precision =
      static_cast<int>(config.get_int_or("precision", 10));
  if (precision < 1 || precision > 17)
    throw ConfigError("precision must lie in [1, 17]");
  const std::string format = config.get_or("format", "csv");
  if (format != "csv" && format != "json")
    throw ConfigError("format must be csv or json");
}

namespace {

void set_default(RunConfig& config, const std::string& key,
                 const std::string& value) {
  config.values.emplace(key, value);
}

void system_defaults(RunConfig& c) {
  set_default(c, "system.omega_m", "1");
  set_default(c, "system.delta", "-2");
  set_default(c, "system.g", "1");
  set_default(c, "system.kappa", "2");
  set_default(c, "system.gamma", "0.1");
}

void sweep_defaults(RunConfig& c) {
  set_default(c, "sweep.scenario", "unconditional");
  set_default(c, "sweep.objective", "squeezing");
  set_default(c, "sweep.delta_min", "-6");
  set_default(c, "sweep.delta_max", "6");
  set_default(c, "sweep.delta_points", "241");
  set_default(c, "sweep.efficiencies", "0:0");
}

void experiment_defaults(RunConfig& c) {
  set_default(c, "experiment.radius", "200e-9");
  set_default(c, "experiment.mass", "7.35e-17");
  set_default(c, "experiment.wavelength", "1064e-9");
  set_default(c, "experiment.cavity_length", "13e-3");
  set_default(c, "experiment.finesse", "400000");
  set_default(c, "experiment.waist", "60e-6");
  set_default(c, "experiment.epsilon_r", "3.9");
  set_default(c, "experiment.gamma_ratio", "0.15");
  set_default(c, "experiment.target_omega_m0", "207345.11513692634");
}

}  // namespace

RunConfig resolve_defaults(RunConfig c) {
  validate_config(c);
  const std::string command = c.get("command");
  set_default(c, "seed", "0");
  set_default(c, "precision", "10");
  set_default(c, "format", "csv");
  if (command == "stability-map") {
    set_default(c, "map.delta_min", "-6");
    set_default(c, "map.delta_max", "6");
    set_default(c, "map.delta_points", "241");
    set_default(c, "map.g_min", "0");
    set_default(c, "map.g_max", "3");
    set_default(c, "map.g_points", "61");
    system_defaults(c);
  } else if (command == "steady-state") {
    system_defaults(c);
    set_default(c, "measure.eta1", "0");
    set_default(c, "measure.eta2", "0");
    set_default(c, "measure.phi", "0");
  } else if (command == "sweep") {
    sweep_defaults(c);
    system_defaults(c);
  } else if (command == "decoupled") {
    set_default(c, "decoupled.gamma_min", "0.02");
    set_default(c, "decoupled.gamma_max", "0.5");
    set_default(c, "decoupled.gamma_points", "49");
    set_default(c, "decoupled.eta2_list", "0.2,0.5,0.8,1");
  } else if (command == "trajectory") {
    system_defaults(c);
    set_default(c, "measure.eta1", "0");
    set_default(c, "measure.eta2", "0");
    set_default(c, "measure.phi", "0");
    set_default(c, "trajectory.t_final", "50");
    set_default(c, "trajectory.dt", "0.006283185307179587");
    set_default(c, "trajectory.feedback", "off");
    set_default(c, "trajectory.ensemble", "1");
  } else if (command == "experiment-sweep") {
    sweep_defaults(c);
    experiment_defaults(c);
  }
  validate_config(c);  // defaults must themselves be legal
  return c;
}

// ---------------------------------------------------------------------------
// built-in presets
// ---------------------------------------------------------------------------

namespace {

std::vector<Preset> build_presets() {
  std::vector<Preset> p;
  p.push_back({"fig1",
               "stability map over (detuning, coupling), kappa=2, gamma=0.1",
               "schema=1\n"
               "command=stability-map\n"
               "system.kappa=2\n"
               "system.gamma=0.1\n"});
  p.push_back({"fig2",
               "unconditional steady-state merits vs detuning, g=1, kappa=2, gamma=0.1",
               "schema=1\n"
               "command=sweep\n"
               "sweep.scenario=unconditional\n"
               "sweep.efficiencies=0:0\n"
               "system.g=1\nsystem.kappa=2\nsystem.gamma=0.1\n"});
  p.push_back({"fig3",
               "cavity homodyne at eta1 in {0, 0.4, 1}, optimized phase",
               "schema=1\n"
               "command=sweep\n"
               "sweep.scenario=cavity-homodyne\n"
               "sweep.efficiencies=0:0,0.4:0,1:0\n"
               "sweep.objective=squeezing\n"
               "system.g=1\nsystem.kappa=2\nsystem.gamma=0.1\n"});
  p.push_back({"fig4",
               "position monitoring only, eta2 in {0.2, 0.5, 0.8, 1}",
               "schema=1\n"
               "command=sweep\n"
               "sweep.scenario=position-only\n"
               "sweep.efficiencies=0:0.2,0:0.5,0:0.8,0:1\n"
               "system.g=1\nsystem.kappa=2\nsystem.gamma=0.1\n"});
  p.push_back({"fig5",
               "decoupled oscillator curves vs gamma/omega_m",
               "schema=1\n"
               "command=decoupled\n"});
  p.push_back({"fig6",
               "simultaneous monitoring, eta1=1, eta2 in {0, 0.5, 0.8, 1}",
               "schema=1\n"
               "command=sweep\n"
               "sweep.scenario=both\n"
               "sweep.efficiencies=1:0,1:0.5,1:0.8,1:1\n"
               "sweep.objective=squeezing\n"
               "system.g=1\nsystem.kappa=2\nsystem.gamma=0.1\n"});
  p.push_back({"fig7",
               "trapped-sphere cavity setup, eta1=1, eta2 in {0, 0.2, 0.5, 1}",
               "schema=1\n"
               "command=experiment-sweep\n"
               "sweep.scenario=both\n"
               "sweep.efficiencies=1:0,1:0.2,1:0.5,1:1\n"
               "sweep.objective=n_ph\n"});
  p.push_back({"fig8",
               "trapped-sphere cavity setup at realistic efficiencies "
               "eta1=0.5, eta2=0.2",
               "schema=1\n"
               "command=experiment-sweep\n"
               "sweep.scenario=both\n"
               "sweep.efficiencies=0.5:0.2\n"
               "sweep.objective=n_ph\n"});
  return p;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> list = build_presets();
  return list;
}

std::optional<std::string> preset_text(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p.text;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// output writers
// ---------------------------------------------------------------------------

std::string format_double(double value, int precision) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::general, precision);
  return std::string(buf.data(), res.ptr);
}

void write_csv(std::ostream& os, const RunConfig& resolved, const Table& table,
               int precision) {
  for (const auto& [key, value] : resolved.values)
    os << "# " << key << "=" << value << "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    os << table.columns[c] << (c + 1 < table.columns.size() ? "," : "\n");
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c]) os << format_double(*row[c], precision);
      os << (c + 1 < row.size() ? "," : "\n");
    }
  }
}

void write_json(std::ostream& os, const RunConfig& resolved, const Table& table,
                int precision) {
  nlohmann::json doc;
  doc["config"] = resolved.values;  // std::map: keys stay sorted
  doc["columns"] = table.columns;
  auto& rows = doc["rows"] = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& cell : row) {
      if (cell)
        jr.push_back(nlohmann::json::parse(format_double(*cell, precision)));
      else
        jr.push_back(nullptr);
    }
    rows.push_back(std::move(jr));
  }
  os << doc.dump(2) << "\n";
}

std::string extract_embedded_config(const std::string& output_text) {
  // CSV header block, or the "config" object of a JSON document.
  if (!output_text.empty() && output_text[0] == '{') {
    const auto doc = nlohmann::json::parse(output_text);
    std::string text;
    for (const auto& [key, value] : doc.at("config").items())
      text += key + "=" + value.get<std::string>() + "\n";
    return text;
  }
  std::string text;
  std::istringstream is(output_text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("# ", 0) != 0) break;
    text += line.substr(2) + "\n";
  }
  return text;
}

// ---------------------------------------------------------------------------
// command execution
// ---------------------------------------------------------------------------

namespace {

std::vector<double> linspace(double lo, double hi, std::int64_t n) {
  if (n < 1) throw ConfigError("grids need at least one point");
  if (n == 1) return {lo};
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::int64_t i = 0; i < n; ++i)
    out.push_back(lo + step * static_cast<double>(i));
  return out;
}

SystemParams system_from(const RunConfig& c) {
  SystemParams p;
  p.omega_m = c.get_double("system.omega_m");
  p.delta = c.get_double("system.delta");
  p.g = c.get_double("system.g");
  p.kappa = c.get_double("system.kappa");
  p.gamma = c.get_double("system.gamma");
  p.units = Units::dimensionless;
  return p;
}

MeasurementParams measure_from(const RunConfig& c) {
  MeasurementParams m;
  m.eta1 = c.get_double("measure.eta1");
  m.eta2 = c.get_double("measure.eta2");
  m.phi = c.get_double("measure.phi");
  return m;
}

std::vector<sweep::EfficiencyPair> efficiencies_from(const RunConfig& c) {
  std::vector<sweep::EfficiencyPair> pairs;
  for (const auto& item : split(c.get("sweep.efficiencies"), ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2)
      throw ConfigError("sweep.efficiencies: expected eta1:eta2 pairs");
    pairs.push_back({parse_double("sweep.efficiencies", parts[0]),
                     parse_double("sweep.efficiencies", parts[1])});
  }
  return pairs;
}

sweep::Scenario scenario_from(const RunConfig& c) {
  const std::string s = c.get("sweep.scenario");
  if (s == "unconditional") return sweep::Scenario::unconditional;
  if (s == "cavity-homodyne") return sweep::Scenario::cavity_homodyne;
  if (s == "position-only") return sweep::Scenario::position_only;
  if (s == "both") return sweep::Scenario::both;
  throw ConfigError("unknown sweep.scenario '" + s + "'");
}

sweep::Objective objective_from(const RunConfig& c) {
  const std::string s = c.get("sweep.objective");
  if (s == "n_ph") return sweep::Objective::n_ph;
  if (s == "purity") return sweep::Objective::purity;
  if (s == "squeezing") return sweep::Objective::squeezing;
  if (s == "delta_x") return sweep::Objective::delta_x;
  throw ConfigError("unknown sweep.objective '" + s + "'");
}

experiment::ExperimentConfig experiment_from(const RunConfig& c) {
  experiment::ExperimentConfig cfg;
  cfg.radius = c.get_double("experiment.radius");
  cfg.mass = c.get_double("experiment.mass");
  cfg.wavelength = c.get_double("experiment.wavelength");
  cfg.cavity_length = c.get_double("experiment.cavity_length");
  cfg.finesse = c.get_double("experiment.finesse");
  cfg.waist = c.get_double("experiment.waist");
  cfg.epsilon_r = c.get_double("experiment.epsilon_r");
  cfg.gamma_ratio = c.get_double("experiment.gamma_ratio");
  if (c.has("experiment.kappa_total"))
    cfg.kappa_total = c.get_double("experiment.kappa_total");
  return experiment::calibrate(cfg, c.get_double("experiment.target_omega_m0"));
}

Cell cell(double v) { return Cell(v); }
Cell cell(const std::optional<double>& v) { return v; }
Cell cell(bool v) { return Cell(v ? 1.0 : 0.0); }

Table sweep_table(const std::vector<sweep::SweepRow>& rows, bool experiment_mode) {
  Table t;
  t.columns = {"delta", "eta1", "eta2",   "phi_opt", "n_ph",
               "purity", "xi",  "xi_db", "stable",  "detectable"};
  if (experiment_mode) {
    t.columns.insert(t.columns.end(),
                     {"delta_x", "delta_x_vacuum", "omega_m", "n_c"});
  }
  for (const auto& r : rows) {
    std::vector<Cell> row = {cell(r.delta), cell(r.eta1),  cell(r.eta2),
                             cell(r.phi_opt), cell(r.n_ph), cell(r.purity),
                             cell(r.xi),    cell(r.xi_db), cell(r.stable),
                             cell(r.detectable)};
    if (experiment_mode) {
      row.push_back(cell(r.delta_x));
      row.push_back(cell(r.delta_x_vacuum));
      row.push_back(cell(r.omega_m_local));
      row.push_back(cell(r.n_c));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table run_stability_map(const RunConfig& c) {
  const auto map = sweep::stability_scan(
      linspace(c.get_double("map.delta_min"), c.get_double("map.delta_max"),
               c.get_int_or("map.delta_points", 241)),
      linspace(c.get_double("map.g_min"), c.get_double("map.g_max"),
               c.get_int_or("map.g_points", 61)),
      c.get_double("system.kappa"), c.get_double("system.gamma"),
      c.get_double("system.omega_m"));
  Table t;
  t.columns.push_back("g");
  for (double d : map.delta_grid)
    t.columns.push_back("delta=" + format_double(d, 6));
  for (std::size_t gi = 0; gi < map.g_grid.size(); ++gi) {
    std::vector<Cell> row;
    row.push_back(cell(map.g_grid[gi]));
    for (std::size_t di = 0; di < map.delta_grid.size(); ++di)
      row.push_back(cell(map.at(gi, di)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table run_steady_state(const RunConfig& c) {
  auto [params, meas] = validate(system_from(c), measure_from(c));
  const bool monitored = meas.eta1 > 0.0 || meas.eta2 > 0.0;
  Matrix4d sigma;
  if (monitored) {
    const auto cm = matrices::build_conditional(params, meas);
    sigma = solvers::solve_riccati(cm).sigma;
  } else {
    const auto un = matrices::build_unconditional(params);
    sigma = solvers::solve_lyapunov(un.a, un.d).sigma;
  }
  const auto summary = merit::summarize(sigma);
  Table t;
  t.columns = {"n_ph", "purity", "xi", "xi_db"};
  std::vector<Cell> row = {cell(summary.n_ph), cell(summary.purity),
                           cell(summary.xi), cell(summary.xi_db)};
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      t.columns.push_back("sigma_" + std::to_string(i + 1) +
                          std::to_string(j + 1));
      row.push_back(cell(sigma(i, j)));
    }
  t.rows.push_back(std::move(row));
  return t;
}

Table run_sweep(const RunConfig& c, bool experiment_mode) {
  sweep::SweepSpec spec;
  spec.delta_grid =
      linspace(c.get_double("sweep.delta_min"), c.get_double("sweep.delta_max"),
               c.get_int_or("sweep.delta_points", 241));
  spec.scenario = scenario_from(c);
  spec.objective = objective_from(c);
  spec.efficiencies = efficiencies_from(c);
  if (experiment_mode)
    spec.experiment_config = experiment_from(c);
  else
    spec.system = system_from(c);
  return sweep_table(sweep::detuning_sweep(spec), experiment_mode);
}

Table run_decoupled(const RunConfig& c) {
  std::vector<double> eta2;
  for (const auto& item : split(c.get("decoupled.eta2_list"), ','))
    eta2.push_back(parse_double("decoupled.eta2_list", item));
  const auto rows = sweep::decoupled_curves(
      linspace(c.get_double("decoupled.gamma_min"),
               c.get_double("decoupled.gamma_max"),
               c.get_int_or("decoupled.gamma_points", 49)),
      eta2);
  Table t;
  t.columns = {"gamma_over_omega", "eta2", "n_ph", "purity", "xi", "xi_db"};
  for (const auto& r : rows)
    t.rows.push_back({cell(r.gamma_over_omega), cell(r.eta2), cell(r.n_ph),
                      cell(r.purity), cell(r.xi), cell(r.xi_db)});
  return t;
}

std::uint64_t seed_from(const RunConfig& c) {
  const std::string text = c.get_or("seed", "0");
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key 'seed': expected an unsigned integer, got '" +
                      text + "'");
  }
}

Table run_trajectory(const RunConfig& c) {
  auto [params, meas] = validate(system_from(c), measure_from(c));
  const double t_final = c.get_double("trajectory.t_final");
  const double dt = c.get_double("trajectory.dt");
  const bool feedback = c.get_bool_or("trajectory.feedback", false);
  const std::uint64_t seed = seed_from(c);
  const auto ensemble = c.get_int_or("trajectory.ensemble", 1);
  Table t;
  if (ensemble <= 1) {
    const auto rec = solvers::simulate_trajectory(vacuum_state(), params, meas,
                                                  t_final, dt, seed, feedback);
    t.columns = {"t", "x_c", "p_c", "x_m", "p_m"};
    for (std::size_t k = 0; k < rec.times.size(); ++k)
      t.rows.push_back({cell(rec.times[k]), cell(rec.means[k](0)),
                        cell(rec.means[k](1)), cell(rec.means[k](2)),
                        cell(rec.means[k](3))});
  } else {
    const auto finals = solvers::ensemble_final_means(
        vacuum_state(), params, meas, t_final, dt, seed,
        static_cast<std::size_t>(ensemble), feedback);
    t.columns = {"trajectory", "x_c", "p_c", "x_m", "p_m"};
    for (std::size_t i = 0; i < finals.size(); ++i)
      t.rows.push_back({cell(static_cast<double>(i)), cell(finals[i](0)),
                        cell(finals[i](1)), cell(finals[i](2)),
                        cell(finals[i](3))});
  }
  return t;
}

}  // namespace

Table run_table(const RunConfig& resolved) {
  const std::string command = resolved.get("command");
  if (command == "stability-map") return run_stability_map(resolved);
  if (command == "steady-state") return run_steady_state(resolved);
  if (command == "sweep") return run_sweep(resolved, false);
  if (command == "decoupled") return run_decoupled(resolved);
  if (command == "trajectory") return run_trajectory(resolved);
  if (command == "experiment-sweep") return run_sweep(resolved, true);
  throw ConfigError("unknown command '" + command + "'");
}

namespace {

struct CliArgs {
  std::optional<std::string> preset;
  std::optional<std::string> config_path;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::string> seed;
  std::vector<std::pair<std::string, std::string>> overrides;
  bool list_presets = false;
  bool help = false;
};

const char* kUsage =
    "usage: levisim (--preset NAME | --config PATH) [options]\n"
    "\n"
    "options:\n"
    "  --preset NAME       built-in configuration (see --list-presets)\n"
    "  --config PATH       configuration file (key=value lines, schema=1)\n"
    "  --out PATH          output file (default: stdout)\n"
    "  --format csv|json   output format (default: csv)\n"
    "  --seed N            noise seed for trajectory runs\n"
    "  --set KEY=VALUE     override a config key (repeatable)\n"
    "  --list-presets      list built-in configurations\n"
    "  --help              this text\n"
    "\n"
    "exit codes: 0 success, 2 configuration error, 3 numerical failure\n"
    "worker count: set OMP_NUM_THREADS (the only environment dependency)\n";

CliArgs parse_args(int argc, const char* const* argv) {
  CliArgs args;
  auto need_value = [&](int& i, const std::string& flag) -> std::string {
    if (i + 1 >= argc) throw ConfigError("flag " + flag + " needs a value");
    return argv[++i];
  };
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--preset") args.preset = need_value(i, a);
    else if (a == "--config") args.config_path = need_value(i, a);
    else if (a == "--out") args.out = need_value(i, a);
    else if (a == "--format") args.format = need_value(i, a);
    else if (a == "--seed") args.seed = need_value(i, a);
    else if (a == "--set") {
      const std::string kv = need_value(i, a);
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0)
        throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
      args.overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    } else if (a == "--list-presets") args.list_presets = true;
    else if (a == "--help" || a == "-h") args.help = true;
    else throw ConfigError("unknown flag '" + a + "'");
  }
  return args;
}

}  // namespace

int run_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  try {
    const CliArgs args = parse_args(argc, argv);
    if (args.help) {
      out << kUsage;
      return 0;
    }
    if (args.list_presets) {
      for (const auto& p : presets())
        out << p.name << "  " << p.description << "\n";
      return 0;
    }
    if (args.preset && args.config_path)
      throw ConfigError("--preset and --config are mutually exclusive");

    std::string text;
    if (args.preset) {
      const auto t = preset_text(*args.preset);
      if (!t) throw ConfigError("unknown preset '" + *args.preset + "'");
      text = *t;
    } else if (args.config_path) {
      std::ifstream in(*args.config_path);
      if (!in) throw ConfigError("cannot read config file " + *args.config_path);
      std::ostringstream buf;
      buf << in.rdbuf();
      text = buf.str();
    } else {
      throw ConfigError("need --preset or --config (see --help)");
    }

    RunConfig config = parse_config(text);
    for (const auto& [key, value] : args.overrides) config.values[key] = value;
    if (args.format) config.values["format"] = *args.format;
    if (args.seed) config.values["seed"] = *args.seed;
    if (args.out) config.values["out"] = *args.out;
    config = resolve_defaults(config);

    const Table table = run_table(config);

    const int precision = static_cast<int>(config.get_int_or("precision", 10));
    const std::string format = config.get_or("format", "csv");
    std::ostringstream rendered;
    if (format == "json")
      write_json(rendered, config, table, precision);
    else
      write_csv(rendered, config, table, precision);

    const std::string out_path = config.get_or("out", "");
    if (out_path.empty()) {
      out << rendered.str();
    } else {
      std::ofstream f(out_path, std::ios::binary);
      if (!f) throw ConfigError("cannot open output file " + out_path);
      f << rendered.str();
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "levisim: error: [config] " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "levisim: error: [config] " << e.what() << "\n";
    return 2;
  } catch (const UnitError& e) {
    err << "levisim: error: [config] " << e.what() << "\n";
    return 2;
  } catch (const StabilityError& e) {
    err << "levisim: error: [numeric] " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    err << "levisim: error: [numeric] " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "levisim: error: [internal] " << e.what() << "\n";
    return 3;
  }
}

}  // namespace levisim::cli

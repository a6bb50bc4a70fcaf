#include "wide/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include "json.hpp"
#include <set>
#include <sstream>

#include "wide/io.hpp"
#include "wide/reference.hpp"

namespace wide {

namespace {

using Flat = std::map<std::string, std::string>;

Flat flatten_ini(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream is(text);
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config parse error at line " + std::to_string(e.line()) + ": " + e.message());
  }
  Flat out;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config key '" + section + "' must live in a section");
    for (const auto& [key, value] : body) out[section + "." + key] = value.data();
  }
  return out;
}

std::string scalar_text(const nlohmann::json& v, const std::string& name) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  if (v.is_null()) return "none";
  throw ConfigError("config key '" + name + "' must be a scalar or a list of numbers");
}

Flat flatten_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  Flat out;
  for (const auto& [section, body] : doc.items()) {
    if (!body.is_object()) throw ConfigError("config section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      const std::string name = section + "." + key;
      if (value.is_array()) {
        std::string joined;
        for (const auto& item : value) joined += (joined.empty() ? "" : ",") + scalar_text(item, name);
        out[name] = joined;
      } else {
        out[name] = scalar_text(value, name);
      }
    }
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

class Keys {
 public:
  explicit Keys(Flat flat) : flat_(std::move(flat)) {}

  const std::string* raw(const std::string& key) {
    used_.insert(key);
    const auto it = flat_.find(key);
    return it == flat_.end() ? nullptr : &it->second;
  }

  void number(const std::string& key, double& out) {
    if (const auto* v = raw(key)) out = parse_double(key, *v);
  }

  void integer(const std::string& key, int& out) {
    if (const auto* v = raw(key)) {
      const double d = parse_double(key, *v);
      if (d != std::floor(d) || std::abs(d) > 1e9) fail(key, *v, "an integer");
      out = static_cast<int>(d);
    }
  }

  void unsigned64(const std::string& key, std::uint64_t& out) {
    if (const auto* v = raw(key)) {
      const std::string t = trim(*v);
      std::size_t used = 0;
      try {
        if (t.empty() || t[0] == '-') throw std::invalid_argument("sign");
        out = std::stoull(t, &used);
      } catch (const std::exception&) {
        fail(key, *v, "a non-negative integer");
      }
      if (used != t.size()) fail(key, *v, "a non-negative integer");
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const auto* v = raw(key)) {
      const std::string t = trim(*v);
      if (t == "true" || t == "1" || t == "yes" || t == "on") out = true;
      else if (t == "false" || t == "0" || t == "no" || t == "off") out = false;
      else fail(key, *v, "a boolean");
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const auto* v = raw(key)) out = trim(*v);
  }

  void list(const std::string& key, std::vector<double>& out) {
    if (const auto* v = raw(key)) {
      out.clear();
      std::stringstream ss(*v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (trim(item).empty()) continue;
        out.push_back(parse_double(key, item));
      }
    }
  }

  void reject_unknown() const {
    for (const auto& [k, v] : flat_)
      if (!used_.count(k)) throw ConfigError("unknown config key '" + k + "'");
  }

  [[noreturn]] static void fail(const std::string& key, const std::string& v, const char* what) {
    throw ConfigError(key + ": expected " + what + ", got '" + trim(v) + "'");
  }

 private:
  static double parse_double(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    std::size_t used = 0;
    double d = 0.0;
    try {
      d = std::stod(t, &used);
    } catch (const std::exception&) {
      fail(key, v, "a number");
    }
    if (used != t.size() || !std::isfinite(d)) fail(key, v, "a finite number");
    return d;
  }

  Flat flat_;
  std::set<std::string> used_;
};

DatumKind parse_datum_kind(const std::string& s) {
  if (s == "taylor_green") return DatumKind::taylor_green;
  if (s == "random_modes") return DatumKind::random_modes;
  if (s == "file") return DatumKind::file;
  throw ConfigError("datum.kind must be taylor_green, random_modes or file, got '" + s + "'");
}

RunConfig from_flat(Flat flat) {
  Keys k(std::move(flat));
  RunConfig c;
  k.integer("grid.dim", c.grid.dim);
  k.integer("grid.n", c.grid.n);
  k.number("grid.dealias", c.grid.dealias);
  k.number("grid.length", c.grid.domain_length);

  k.number("params.epsilon", c.params.epsilon);
  k.number("params.sigma", c.params.sigma);
  k.number("params.nu", c.params.nu);
  k.number("params.T", c.params.horizon);
  k.number("params.tau", c.tau);
  std::string name;
  k.text("params.quadrature", name);
  if (!name.empty()) c.params.quadrature = parse_quadrature(name);
  k.boolean("params.convection", c.params.convection);

  name.clear();
  k.text("datum.kind", name);
  if (!name.empty()) c.datum.kind = parse_datum_kind(name);
  k.number("datum.amplitude", c.datum.amplitude);
  k.unsigned64("datum.seed", c.datum.seed);
  k.number("datum.k_cut", c.datum.k_cut);
  k.number("datum.slope", c.datum.slope);
  k.text("datum.path", c.datum.path);

  k.integer("optimizer.max_iters", c.optimizer.max_iters);
  k.number("optimizer.grad_tol", c.optimizer.grad_tol);
  k.integer("optimizer.memory", c.optimizer.memory);
  k.number("optimizer.c1", c.optimizer.c1);
  k.number("optimizer.c2", c.optimizer.c2);
  k.boolean("optimizer.precondition", c.optimizer.precondition);
  name.clear();
  k.text("optimizer.preconditioner", name);
  if (!name.empty()) c.optimizer.preconditioner = parse_preconditioner(name);

  k.number("diagnostics.s", c.diagnostics.s);
  k.number("diagnostics.buffer", c.diagnostics.buffer);
  k.number("diagnostics.tol_energy", c.diagnostics.tol_energy);
  k.number("diagnostics.obs_fraction", c.diagnostics.obs_fraction);
  k.number("diagnostics.kernel_gap_max", c.diagnostics.kernel_gap_max);
  k.number("diagnostics.strong_residual_max", c.diagnostics.strong_residual_max);

  k.list("sweep.eps_list", c.sweep.eps_list);
  if (const auto* v = k.raw("sweep.sigma_alt")) {
    const std::string t = trim(*v);
    if (t == "none" || t.empty()) {
      c.sweep.sigma_alt.reset();
    } else {
      double s = 0.0;
      k.number("sweep.sigma_alt", s);
      c.sweep.sigma_alt = s;
    }
  }
  k.number("sweep.trend_slack", c.sweep.trend_slack);

  k.text("output.dir", c.output_dir);
  k.boolean("output.wall_time", c.wall_time);
  k.reject_unknown();
  return c;
}

}  // namespace

int RunConfig::steps() const {
  const double r = params.horizon / tau;
  return static_cast<int>(std::lround(r));
}

void RunConfig::validate() {
  warnings.clear();
  grid.validate();
  params.validate();
  if (!(tau > 0.0)) throw ConfigError("params.tau must be positive");
  const double r = params.horizon / tau;
  if (std::lround(r) < 1 || std::abs(r - std::lround(r)) > 1e-9 * r)
    throw ConfigError("params.tau must divide params.T (T/tau = " + std::to_string(r) + ")");
  check_epsilon_floor(params);
  if (!params.energy_certificate_valid())
    warnings.push_back("sigma = " + std::to_string(params.sigma) + " <= 1/8: energy certificate invalid");
  optimizer.validate();

  if (!(diagnostics.buffer >= 0.0 && diagnostics.buffer < 1.0))
    throw ConfigError("diagnostics.buffer must lie in [0, 1)");
  if (!(diagnostics.tol_energy >= 0.0)) throw ConfigError("diagnostics.tol_energy must be nonnegative");
  if (!(diagnostics.obs_fraction > 0.0 && diagnostics.obs_fraction <= 1.0))
    throw ConfigError("diagnostics.obs_fraction must lie in (0, 1]");
  if (!(diagnostics.kernel_gap_max > 0.0) || !(diagnostics.strong_residual_max > 0.0))
    throw ConfigError("diagnostics thresholds must be positive");

  if (!std::isfinite(datum.amplitude)) throw ConfigError("datum.amplitude must be finite");
  switch (datum.kind) {
    case DatumKind::taylor_green:
      if (grid.dim != 2) throw ConfigError("datum.kind = taylor_green needs grid.dim = 2");
      break;
    case DatumKind::random_modes:
      if (!(datum.k_cut >= 1.0)) throw ConfigError("datum.k_cut must be at least 1");
      break;
    case DatumKind::file:
      if (datum.path.empty()) throw ConfigError("datum.kind = file needs datum.path");
      break;
  }

  for (std::size_t i = 0; i < sweep.eps_list.size(); ++i) {
    WideParams p = params;
    p.epsilon = sweep.eps_list[i];
    p.validate();
    check_epsilon_floor(p);
    if (i > 0 && !(sweep.eps_list[i] < sweep.eps_list[i - 1]))
      throw ConfigError("sweep.eps_list must be strictly decreasing");
  }
  if (sweep.sigma_alt && !(*sweep.sigma_alt >= 0.0)) throw ConfigError("sweep.sigma_alt must be nonnegative");
  if (!(sweep.trend_slack >= 0.0)) throw ConfigError("sweep.trend_slack must be nonnegative");
  if (output_dir.empty()) throw ConfigError("output.dir must not be empty");
}

RunConfig parse_config_string(const std::string& text, bool json) {
  return from_flat(json ? flatten_json(text) : flatten_ini(text));
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  const bool json = std::filesystem::path(path).extension() == ".json";
  RunConfig c = parse_config_string(ss.str(), json);
  if (!c.datum.path.empty() && std::filesystem::path(c.datum.path).is_relative())
    c.datum.path = (std::filesystem::path(path).parent_path() / c.datum.path).string();
  return c;
}

VelocityField make_datum(const RunConfig& config) {
  switch (config.datum.kind) {
    case DatumKind::taylor_green:
      return taylor_green(0.0, config.grid, config.params.nu, config.datum.amplitude);
    case DatumKind::random_modes:
      return random_field(config.grid, config.datum.seed, config.datum.k_cut, config.datum.slope,
                          config.datum.amplitude);
    case DatumKind::file: {
      VelocityField u = read_snapshot(config.datum.path);
      if (u.dim() != config.grid.dim || u.grid().n != config.grid.n ||
          u.grid().domain_length != config.grid.domain_length)
        throw ConfigError("datum file " + config.datum.path + " does not match the configured grid");
      return u;
    }
  }
  throw ConfigError("unsupported datum kind");
}

}  // namespace wide

#include "lifespan/config.hpp"

#include "lifespan/functionals.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace lifespan {

namespace {

double to_real(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
  }
}

int to_int(const std::string& key, const std::string& text) {
  const double v = to_real(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("key '" + key + "': expected an integer");
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("key '" + key + "': expected true or false");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

using Setter = std::function<void(LabConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> s = {
      {"problem",
       {
           {"p", [](LabConfig& c, auto& k, auto& v) { c.problem.p = to_real(k, v); }},
           {"a", [](LabConfig& c, auto& k, auto& v) { c.problem.a = to_real(k, v); }},
           {"eps", [](LabConfig& c, auto& k, auto& v) { c.problem.eps = to_real(k, v); }},
           {"R", [](LabConfig& c, auto& k, auto& v) { c.problem.R = to_real(k, v); }},
           {"R0", [](LabConfig& c, auto& k, auto& v) { c.R0 = to_real(k, v); }},
           {"preset",
            [](LabConfig& c, auto&, auto& v) {
              try {
                c.problem.preset = parse_preset(v);
              } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
              }
            }},
           {"preset_params", [](LabConfig& c, auto&, auto& v) { c.problem.preset_params = parse_real_list(v); }},
           {"lemma_c1", [](LabConfig& c, auto& k, auto& v) { c.lemma_c1 = to_real(k, v); }},
           {"lemma_c2", [](LabConfig& c, auto& k, auto& v) { c.lemma_c2 = to_real(k, v); }},
       }},
      {"solver",
       {
           {"delta", [](LabConfig& c, auto& k, auto& v) { c.delta = to_real(k, v); }},
           {"t_max", [](LabConfig& c, auto& k, auto& v) { c.t_max = to_real(k, v); }},
           {"thresholds", [](LabConfig& c, auto&, auto& v) { c.thresholds = parse_real_list(v); }},
           {"refinement_levels", [](LabConfig& c, auto& k, auto& v) { c.refinement_levels = to_int(k, v); }},
           {"snapshot_stride", [](LabConfig& c, auto& k, auto& v) { c.snapshot_stride = to_int(k, v); }},
           {"nonlinear", [](LabConfig& c, auto& k, auto& v) { c.nonlinear = to_bool(k, v); }},
           {"parallel", [](LabConfig& c, auto& k, auto& v) { c.parallel = to_bool(k, v); }},
           {"verify_points", [](LabConfig& c, auto& k, auto& v) { c.verify_points = to_int(k, v); }},
           {"picard_T", [](LabConfig& c, auto& k, auto& v) { c.picard_T = to_real(k, v); }},
           {"picard_jmax", [](LabConfig& c, auto& k, auto& v) { c.picard_jmax = to_int(k, v); }},
           {"picard_tol", [](LabConfig& c, auto& k, auto& v) { c.picard_tol = to_real(k, v); }},
           {"ode_step", [](LabConfig& c, auto& k, auto& v) { c.ode_step = to_real(k, v); }},
           {"ode_E", [](LabConfig& c, auto& k, auto& v) { c.ode_E = to_real(k, v); }},
       }},
      {"scan",
       {
           {"eps_grid", [](LabConfig& c, auto&, auto& v) { c.eps_grid = parse_real_list(v); }},
           {"regime", [](LabConfig& c, auto&, auto& v) { c.regime = v; }},
           {"fit_tolerance", [](LabConfig& c, auto& k, auto& v) { c.fit_tolerance = to_real(k, v); }},
           {"workers", [](LabConfig& c, auto& k, auto& v) { c.workers = to_int(k, v); }},
       }},
      {"output",
       {
           {"dir", [](LabConfig& c, auto&, auto& v) { c.out_dir = v; }},
           {"formats",
            [](LabConfig& c, auto&, auto& v) {
              c.csv = c.svg = false;
              std::stringstream ss(v);
              std::string item;
              while (std::getline(ss, item, ',')) {
                item = trim(item);
                if (item == "csv") c.csv = true;
                else if (item == "svg") c.svg = true;
                else throw ConfigError("unknown output format '" + item + "'");
              }
            }},
       }},
  };
  return s;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_real("list", trim(item)));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

LabConfig parse_config(std::istream& is) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  LabConfig cfg;
  const auto& sch = schema();
  for (const auto& [section, body] : tree) {
    const auto sec = sch.find(section);
    if (sec == sch.end()) {
      if (body.empty()) throw ConfigError("key '" + section + "' outside any section");
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      const auto it = sec->second.find(key);
      if (it == sec->second.end()) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      it->second(cfg, key, trim(node.data()));
    }
  }
  try {
    cfg.problem.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(cfg.delta > 0.0) || !(cfg.t_max > 0.0)) throw ConfigError("delta and t_max must be positive");
  if (cfg.regime != "power" && cfg.regime != "exp" && cfg.regime != "global")
    throw ConfigError("regime must be power, exp or global");
  if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
  return cfg;
}

LabConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in);
}

LifespanOptions LabConfig::lifespan_options() const {
  LifespanOptions o;
  o.t_max = t_max;
  o.thresholds = thresholds;
  o.refinement_levels = refinement_levels;
  o.parallel = parallel;
  return o;
}

EvolveOptions LabConfig::evolve_options() const {
  EvolveOptions o;
  o.delta = delta;
  o.t_max = t_max;
  o.thresholds = thresholds;
  o.nonlinear = nonlinear;
  o.snapshot_stride = snapshot_stride;
  o.parallel = parallel;
  return o;
}

double LabConfig::effective_R0() const { return std::isnan(R0) ? default_R0(problem.R) : R0; }

int effective_workers(const LabConfig& cfg) {
  if (const char* env = std::getenv("LIFESPAN_LAB_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("LIFESPAN_LAB_WORKERS must be a positive integer");
    return static_cast<int>(v);
  }
  return cfg.workers;
}

}  // namespace lifespan

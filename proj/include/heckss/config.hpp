#pragma once

// Flat `section.key = value` configuration files. Blank lines and lines
// starting with '#' are ignored. Values map onto PriorSpec, GibbsConfig and
// ScenarioConfig; every key has a default.

#include <charconv>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "heckss/errors.hpp"
#include "heckss/gibbs.hpp"
#include "heckss/priors.hpp"
#include "heckss/simulation.hpp"

namespace heckss {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::istream& is) {
    KeyValueConfig cfg;
    std::string line;
    std::size_t no = 0;
    while (std::getline(is, line)) {
      ++no;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw ParseError("config: expected key = value", no);
      const std::string key = trim(t.substr(0, eq));
      if (key.empty()) throw ParseError("config: empty key", no);
      if (cfg.values_.count(key)) throw ParseError("config: duplicate key '" + key + "'", no);
      cfg.values_[key] = trim(t.substr(eq + 1));
    }
    return cfg;
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return to_double(key, it->second);
  }

  long get_long(const std::string& key, long fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    long v = 0;
    const auto& s = it->second;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ParameterError(key + ": expected an integer, got '" + s + "'");
    return v;
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::vector<double> out;
    const auto it = values_.find(key);
    if (it == values_.end()) return out;
    for (const auto& item : split_list(it->second)) out.push_back(to_double(key, item));
    return out;
  }

  /// Throws ParameterError naming the first key outside `known`.
  void require_known(const std::set<std::string>& known) const {
    for (const auto& [k, v] : values_) {
      if (!known.count(k)) throw ParameterError("config: unknown key '" + k + "'");
    }
  }

 private:
  static double to_double(const std::string& key, const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ParameterError(key + ": expected a number, got '" + s + "'");
    }
  }

  std::map<std::string, std::string> values_;
};

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys{
      "prior.class", "prior.family", "prior.context", "prior.tau0_beta", "prior.tau1_beta", "prior.tau0_alpha",
      "prior.tau1_alpha", "prior.a0", "prior.b0", "prior.c", "prior.d", "prior.tau", "prior.eta_O", "prior.eta_S",
      "gibbs.iterations", "gibbs.burn_in", "gibbs.thin", "gibbs.seed", "gibbs.init", "data.outcome",
      "data.selection", "data.standardize", "scenario.n", "scenario.p", "scenario.rho", "scenario.sigma",
      "scenario.alpha", "scenario.beta", "scenario.target_missing", "scenario.beta0", "scenario.replicates",
      "scenario.methods", "scenario.iterations", "scenario.burn_in", "scenario.tau", "scenario.threads",
      "scenario.seed"};
  return keys;
}

inline Family parse_family(const std::string& s) {
  if (s == "normal") return Family::Normal;
  if (s == "laplace") return Family::Laplace;
  if (s == "student-t") return Family::StudentT;
  throw ParameterError("prior.family: expected normal, laplace or student-t, got '" + s + "'");
}

inline PriorClass parse_prior_class(const std::string& s) {
  if (s == "1" || s == "I") return PriorClass::I;
  if (s == "2" || s == "II") return PriorClass::II;
  throw ParameterError("prior.class: expected 1 or 2, got '" + s + "'");
}

/// default_calibration(n, p, q, prior.family, prior.context), then any
/// explicit prior.* overrides.
inline PriorSpec prior_from_config(const KeyValueConfig& cfg, long n, long p, long q) {
  const std::string ctx = cfg.get_string("prior.context", "application");
  if (ctx != "application" && ctx != "simulation") {
    throw ParameterError("prior.context: expected application or simulation, got '" + ctx + "'");
  }
  PriorSpec spec = default_calibration(n, p, q, parse_family(cfg.get_string("prior.family", "normal")),
                                       ctx == "simulation" ? CalibrationContext::Simulation
                                                           : CalibrationContext::Application);
  spec.prior_class = parse_prior_class(cfg.get_string("prior.class", "1"));
  spec.tau0_beta = cfg.get_double("prior.tau0_beta", spec.tau0_beta);
  spec.tau1_beta = cfg.get_double("prior.tau1_beta", spec.tau1_beta);
  spec.tau0_alpha = cfg.get_double("prior.tau0_alpha", spec.tau0_alpha);
  spec.tau1_alpha = cfg.get_double("prior.tau1_alpha", spec.tau1_alpha);
  spec.a0 = cfg.get_double("prior.a0", spec.a0);
  spec.b0 = cfg.get_double("prior.b0", spec.b0);
  spec.c = cfg.get_double("prior.c", spec.c);
  spec.d = cfg.get_double("prior.d", spec.d);
  spec.tau = cfg.get_double("prior.tau", spec.tau);
  spec.eta_O = cfg.get_double("prior.eta_O", spec.eta_O);
  spec.eta_S = cfg.get_double("prior.eta_S", spec.eta_S);
  spec.validate();
  return spec;
}

inline GibbsConfig gibbs_from_config(const KeyValueConfig& cfg) {
  GibbsConfig g;
  g.iterations = cfg.get_long("gibbs.iterations", g.iterations);
  g.burn_in = cfg.get_long("gibbs.burn_in", g.burn_in);
  g.thin = cfg.get_long("gibbs.thin", g.thin);
  g.seed = static_cast<std::uint64_t>(cfg.get_long("gibbs.seed", 0));
  const std::string init = cfg.get_string("gibbs.init", "mle");
  if (init == "mle") {
    g.init = InitStrategy::MleBased;
  } else if (init == "null") {
    g.init = InitStrategy::Null;
  } else {
    throw ParameterError("gibbs.init: expected mle or null, got '" + init + "'");
  }
  g.validate();
  return g;
}

/// Standard scenario for (n, p, rho) with scenario.* overrides.
inline ScenarioConfig scenario_from_config(const KeyValueConfig& cfg) {
  const long p = cfg.get_long("scenario.p", 10);
  ScenarioConfig s = ScenarioConfig::standard(cfg.get_long("scenario.n", 500), p, cfg.get_double("scenario.rho", 0.5));
  s.sigma = cfg.get_double("scenario.sigma", s.sigma);
  auto effects = [&](const std::string& key, Eigen::VectorXd& target) {
    if (!cfg.has(key)) return;
    const auto v = cfg.get_doubles(key);
    if (static_cast<long>(v.size()) != p) throw ParameterError(key + ": expected " + std::to_string(p) + " values");
    target = Eigen::Map<const Eigen::VectorXd>(v.data(), p);
  };
  effects("scenario.alpha", s.alpha_effects);
  effects("scenario.beta", s.beta_effects);
  s.target_missing = cfg.get_double("scenario.target_missing", s.target_missing);
  s.beta0 = cfg.get_double("scenario.beta0", s.beta0);
  s.replicates = cfg.get_long("scenario.replicates", s.replicates);
  s.iterations = cfg.get_long("scenario.iterations", s.iterations);
  s.burn_in = cfg.get_long("scenario.burn_in", s.burn_in);
  if (cfg.has("scenario.tau")) s.tau = cfg.get_double("scenario.tau", 5.0);
  s.threads = static_cast<unsigned>(cfg.get_long("scenario.threads", 0));
  if (cfg.has("scenario.methods")) {
    s.methods.clear();
    for (const auto& m : split_list(cfg.get_string("scenario.methods", ""))) s.methods.insert(parse_method(m));
  }
  s.validate();
  return s;
}

}  // namespace heckss

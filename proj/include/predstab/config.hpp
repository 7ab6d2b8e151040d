#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "predstab/errors.hpp"
#include "predstab/model.hpp"
#include "predstab/simstudy.hpp"

namespace predstab {

// Flat `key = value` config files: one pair per line, '#' comments, blank
// lines ignored. Values are plain tokens or comma-separated lists.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("config: cannot open '" + path + "'");
    KeyValueConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string{};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
      };
      if (trim(line).empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw InvalidInput("config: line " + std::to_string(lineno) +
                           " of '" + path + "' has no '='");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw InvalidInput("config: empty key at line " + std::to_string(lineno));
      cfg.values_[key] = value;
    }
    return cfg;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw InvalidInput("config: key '" + key + "' has non-numeric value '" +
                         it->second + "'");
    }
  }

  long long get_int(const std::string& key, long long fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    long long v = 0;
    const auto* b = it->second.data();
    const auto* e = b + it->second.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e)
      throw InvalidInput("config: key '" + key + "' has non-integer value '" +
                         it->second + "'");
    return v;
  }

  std::vector<long long> get_int_list(const std::string& key,
                                      std::vector<long long> fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<long long> out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      long long v = 0;
      const auto b = tok.find_first_not_of(" \t");
      const auto e = tok.find_last_not_of(" \t");
      if (b == std::string::npos)
        throw InvalidInput("config: empty list element in key '" + key + "'");
      const std::string t = tok.substr(b, e - b + 1);
      auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc{} || p != t.data() + t.size())
        throw InvalidInput("config: key '" + key + "' has non-integer element '" + t + "'");
      out.push_back(v);
    }
    if (out.empty()) throw InvalidInput("config: key '" + key + "' has an empty list");
    return out;
  }

  const std::map<std::string, std::string>& raw() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Documented keys: engine, constant_risk, lasso.n_folds, lasso.n_lambda,
// lasso.lambda_min_ratio, forest.n_trees, forest.mtry, forest.min_node,
// platt.dev_size, platt.recal_size.
inline ModelSpec model_spec_from_config(const KeyValueConfig& cfg,
                                        const ModelSpec& base = {}) {
  ModelSpec spec = base;
  if (cfg.has("engine")) spec.engine = engine_from_name(cfg.get_string("engine", ""));
  spec.constant_risk = cfg.get_double("constant_risk", spec.constant_risk);
  spec.lasso.n_folds = static_cast<int>(cfg.get_int("lasso.n_folds", spec.lasso.n_folds));
  spec.lasso.n_lambda =
      static_cast<int>(cfg.get_int("lasso.n_lambda", spec.lasso.n_lambda));
  spec.lasso.lambda_min_ratio =
      cfg.get_double("lasso.lambda_min_ratio", spec.lasso.lambda_min_ratio);
  spec.forest.n_trees =
      static_cast<int>(cfg.get_int("forest.n_trees", spec.forest.n_trees));
  spec.forest.mtry = static_cast<int>(cfg.get_int("forest.mtry", spec.forest.mtry));
  spec.forest.min_node =
      static_cast<int>(cfg.get_int("forest.min_node", spec.forest.min_node));
  spec.platt.dev_size = static_cast<std::size_t>(
      cfg.get_int("platt.dev_size", static_cast<long long>(spec.platt.dev_size)));
  spec.platt.recal_size = static_cast<std::size_t>(
      cfg.get_int("platt.recal_size", static_cast<long long>(spec.platt.recal_size)));
  spec.validate();
  return spec;
}

// Documented keys: x_sd, n_noise, intercept, slope, n_eval, n_models,
// sample_sizes, subgroup_x_below, span, keep_calibration_curves, plus the
// model spec keys above.
inline SimExperiment sim_experiment_from_config(const KeyValueConfig& cfg,
                                                const SimExperiment& base = {}) {
  SimExperiment exp = base;
  exp.cfg.x_sd = cfg.get_double("x_sd", exp.cfg.x_sd);
  exp.cfg.n_noise =
      static_cast<std::size_t>(cfg.get_int("n_noise", static_cast<long long>(exp.cfg.n_noise)));
  exp.cfg.intercept = cfg.get_double("intercept", exp.cfg.intercept);
  exp.cfg.slope = cfg.get_double("slope", exp.cfg.slope);
  exp.n_eval = static_cast<std::size_t>(
      cfg.get_int("n_eval", static_cast<long long>(exp.n_eval)));
  exp.n_models = static_cast<std::size_t>(
      cfg.get_int("n_models", static_cast<long long>(exp.n_models)));
  std::vector<long long> sizes_base(exp.sample_sizes.begin(), exp.sample_sizes.end());
  const auto sizes = cfg.get_int_list("sample_sizes", sizes_base);
  exp.sample_sizes.assign(sizes.begin(), sizes.end());
  exp.subgroup_x_below = cfg.get_double("subgroup_x_below", exp.subgroup_x_below);
  exp.calibration_span = cfg.get_double("span", exp.calibration_span);
  exp.keep_calibration_curves =
      cfg.get_int("keep_calibration_curves", exp.keep_calibration_curves ? 1 : 0) != 0;
  exp.spec = model_spec_from_config(cfg, exp.spec);
  exp.validate();
  return exp;
}

}  // namespace predstab

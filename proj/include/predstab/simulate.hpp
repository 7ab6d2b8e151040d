#pragma once

#include <cmath>
#include <string>

#include "predstab/dataset.hpp"
#include "predstab/rng.hpp"

namespace predstab {

inline double expit(double lp) { return 1.0 / (1.0 + std::exp(-lp)); }

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// Data-generating process: one genuine predictor X ~ N(0, x_sd^2) driving
// logit(p) = intercept + slope * X, plus n_noise independent N(0,1) columns
// with no outcome association. Defaults give an overall event risk of 0.5.
struct SimConfig {
  std::size_t n_dev = 100;
  std::size_t n_eval = 100000;
  double x_sd = 2.0;
  std::size_t n_noise = 10;
  double intercept = 0.0;
  double slope = 1.0;

  void validate() const {
    if (n_dev == 0) throw InvalidInput("sim config: n_dev must be positive");
    if (n_eval == 0) throw InvalidInput("sim config: n_eval must be positive");
    if (!(x_sd > 0.0)) throw InvalidInput("sim config: x_sd must be positive");
  }
};

// Draw n rows from the DGP. Per row the stream is consumed in a fixed
// order (X, Z1..Zk, then the Bernoulli uniform), so output depends only
// on (cfg, n, seed).
inline Dataset simulate_population(const SimConfig& cfg, std::size_t n, Rng& rng) {
  cfg.validate();
  if (n == 0) throw InvalidInput("simulate_population: n must be positive");

  Dataset ds;
  ds.n_rows = n;
  ds.n_cols = 1 + cfg.n_noise;
  ds.predictor_names.reserve(ds.n_cols);
  ds.predictor_names.push_back("X");
  for (std::size_t k = 1; k <= cfg.n_noise; ++k)
    ds.predictor_names.push_back("Z" + std::to_string(k));
  ds.predictors.resize(n * ds.n_cols);
  ds.outcome.resize(n);
  ds.true_risk.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.normal(0.0, cfg.x_sd);
    ds.predictors[i * ds.n_cols] = x;
    for (std::size_t k = 1; k <= cfg.n_noise; ++k)
      ds.predictors[i * ds.n_cols + k] = rng.normal();
    double p = expit(cfg.intercept + cfg.slope * x);
    // keep truth strictly inside (0,1) even for extreme linear predictors
    if (p >= 1.0) p = 1.0 - 1e-16;
    if (p <= 0.0) p = 1e-300;
    ds.true_risk[i] = p;
    ds.outcome[i] = rng.uniform01() < p ? 1 : 0;
  }
  return ds;
}

}  // namespace predstab

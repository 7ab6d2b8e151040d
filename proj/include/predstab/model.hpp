#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "predstab/dataset.hpp"
#include "predstab/errors.hpp"
#include "predstab/forest.hpp"
#include "predstab/lasso.hpp"
#include "predstab/logistic.hpp"
#include "predstab/rng.hpp"
#include "predstab/shrinkage.hpp"

namespace predstab {

enum class Engine {
  logistic_full,
  lasso_cv,
  uniform_shrinkage,
  random_forest,
  rf_platt,
  constant,  // fixed-risk model, used for protocol checks
};

inline const char* engine_name(Engine e) {
  switch (e) {
    case Engine::logistic_full: return "logistic_full";
    case Engine::lasso_cv: return "lasso_cv";
    case Engine::uniform_shrinkage: return "uniform_shrinkage";
    case Engine::random_forest: return "random_forest";
    case Engine::rf_platt: return "rf_platt";
    case Engine::constant: return "constant";
  }
  return "?";
}

inline Engine engine_from_name(const std::string& s) {
  if (s == "logistic_full") return Engine::logistic_full;
  if (s == "lasso_cv") return Engine::lasso_cv;
  if (s == "uniform_shrinkage") return Engine::uniform_shrinkage;
  if (s == "random_forest") return Engine::random_forest;
  if (s == "rf_platt") return Engine::rf_platt;
  if (s == "constant") return Engine::constant;
  throw InvalidInput("unknown engine '" + s + "'");
}

struct PlattOptions {
  // 0 means automatic: dev = round(0.6*N), recal = N - dev.
  std::size_t dev_size = 0;
  std::size_t recal_size = 0;
  int max_split_attempts = 100;
};

// Declarative description of one model-building strategy. Randomness is not
// stored here: every fit receives its own stream derived from the caller's
// master seed.
struct ModelSpec {
  Engine engine = Engine::lasso_cv;
  LassoOptions lasso;
  ForestOptions forest;
  PlattOptions platt;
  double constant_risk = 0.5;

  void validate() const {
    if (lasso.n_folds < 2) throw InvalidInput("spec: lasso.n_folds must be >= 2");
    if (forest.n_trees < 1) throw InvalidInput("spec: forest.n_trees must be >= 1");
  }
};

struct PlattFit {
  ForestFit forest;
  double a = 0.0, b = 1.0;  // recalibration intercept / slope on the logit scale
  std::size_t dev_size = 0, recal_size = 0;
};

struct ConstantFit {
  double risk = 0.5;
};

struct FittedModel {
  Engine engine = Engine::constant;
  std::vector<std::string> schema;  // training predictor names, in order
  std::variant<LogisticFit, LassoFit, ShrinkageFit, ForestFit, PlattFit, ConstantFit>
      impl{ConstantFit{}};
};

namespace detail {

inline void check_schema(const FittedModel& m, const Dataset& ds) {
  if (ds.predictor_names.size() != m.schema.size())
    throw InvalidInput("predict: dataset has " +
                       std::to_string(ds.predictor_names.size()) +
                       " predictors, model was trained on " +
                       std::to_string(m.schema.size()));
  for (std::size_t j = 0; j < m.schema.size(); ++j) {
    if (ds.predictor_names[j] != m.schema[j])
      throw InvalidInput("predict: schema mismatch at column " +
                         std::to_string(j + 1) + ": expected '" + m.schema[j] +
                         "', got '" + ds.predictor_names[j] + "'");
  }
}

inline double linear_risk(const Dataset& ds, std::size_t i, double intercept,
                          const std::vector<double>& coef) {
  double eta = intercept;
  for (std::size_t j = 0; j < ds.n_cols; ++j) eta += coef[j] * ds.x(i, j);
  return expit(eta);
}

}  // namespace detail

// Uniform risk-prediction contract: a length-N vector strictly inside (0,1).
inline std::vector<double> predict(const FittedModel& m, const Dataset& ds) {
  detail::check_schema(m, ds);
  std::vector<double> out(ds.n_rows);
  for (std::size_t i = 0; i < ds.n_rows; ++i) {
    double p = 0.0;
    if (const auto* lf = std::get_if<LogisticFit>(&m.impl)) {
      p = detail::linear_risk(ds, i, lf->intercept, lf->coef);
    } else if (const auto* la = std::get_if<LassoFit>(&m.impl)) {
      p = detail::linear_risk(ds, i, la->intercept, la->coef);
    } else if (const auto* sh = std::get_if<ShrinkageFit>(&m.impl)) {
      p = detail::linear_risk(ds, i, sh->intercept, sh->coef);
    } else if (const auto* fo = std::get_if<ForestFit>(&m.impl)) {
      p = fo->predict_row(ds, i);
    } else if (const auto* pl = std::get_if<PlattFit>(&m.impl)) {
      const double raw = clamp_risk(pl->forest.predict_row(ds, i));
      p = expit(pl->a + pl->b * logit(raw));
    } else if (const auto* c = std::get_if<ConstantFit>(&m.impl)) {
      p = c->risk;
    }
    out[i] = clamp_risk(p);
  }
  return out;
}

// Random split into development and recalibration parts, forest on the
// first, univariate logistic recalibration of logit-risks on the second.
// The split is part of the strategy, so it re-randomizes on every fit.
inline PlattFit fit_rf_platt(const Dataset& ds, const ForestOptions& forest_opts,
                             const PlattOptions& platt_opts, Rng& rng) {
  PlattFit fit;
  fit.dev_size = platt_opts.dev_size;
  fit.recal_size = platt_opts.recal_size;
  if (fit.dev_size == 0 && fit.recal_size == 0) {
    fit.dev_size = static_cast<std::size_t>(
        std::llround(0.6 * static_cast<double>(ds.n_rows)));
    fit.dev_size = std::min(std::max<std::size_t>(fit.dev_size, 1), ds.n_rows - 1);
    fit.recal_size = ds.n_rows - fit.dev_size;
  }
  if (fit.dev_size + fit.recal_size > ds.n_rows)
    throw InvalidInput("rf_platt: dev_size + recal_size exceeds the dataset size");
  if (fit.dev_size == 0 || fit.recal_size == 0)
    throw InvalidInput("rf_platt: both split parts must be non-empty");

  std::vector<std::size_t> perm(ds.n_rows);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  std::vector<std::size_t> dev_idx, recal_idx;
  bool ok = false;
  for (int attempt = 0; attempt < platt_opts.max_split_attempts; ++attempt) {
    rng.shuffle(perm);
    dev_idx.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(fit.dev_size));
    recal_idx.assign(perm.begin() + static_cast<std::ptrdiff_t>(fit.dev_size),
                     perm.begin() + static_cast<std::ptrdiff_t>(fit.dev_size + fit.recal_size));
    auto both_classes = [&](const std::vector<std::size_t>& idx) {
      std::size_t e = 0;
      for (const std::size_t i : idx) e += static_cast<std::size_t>(ds.outcome[i]);
      return e > 0 && e < idx.size();
    };
    if (both_classes(dev_idx) && both_classes(recal_idx)) {
      ok = true;
      break;
    }
  }
  if (!ok)
    throw Error("rf_platt: could not split with both outcome classes in both parts after " +
                std::to_string(platt_opts.max_split_attempts) + " attempts");

  const Dataset dev = ds.take(dev_idx);
  const Dataset recal = ds.take(recal_idx);
  fit.forest = fit_random_forest(dev, forest_opts, rng);

  std::vector<double> lgt(recal.n_rows);
  for (std::size_t i = 0; i < recal.n_rows; ++i)
    lgt[i] = logit(clamp_risk(fit.forest.predict_row(recal, i)));
  const LogisticFit recal_fit = fit_logistic_univariate(lgt, recal.outcome);
  fit.a = recal_fit.intercept;
  fit.b = recal_fit.coef[0];
  return fit;
}

// Fit the spec'd strategy. All randomness (CV folds, tree resamples, split)
// comes from rng, so a fixed stream reproduces the model bit for bit.
inline FittedModel fit_model(const ModelSpec& spec, const Dataset& ds, Rng& rng) {
  spec.validate();
  ds.validate();
  FittedModel m;
  m.engine = spec.engine;
  m.schema = ds.predictor_names;
  switch (spec.engine) {
    case Engine::logistic_full:
      m.impl = fit_logistic(ds);
      break;
    case Engine::lasso_cv:
      m.impl = fit_lasso_cv(ds, spec.lasso, rng);
      break;
    case Engine::uniform_shrinkage:
      m.impl = fit_uniform_shrinkage(ds);
      break;
    case Engine::random_forest:
      m.impl = fit_random_forest(ds, spec.forest, rng);
      break;
    case Engine::rf_platt:
      m.impl = fit_rf_platt(ds, spec.forest, spec.platt, rng);
      break;
    case Engine::constant:
      m.impl = ConstantFit{spec.constant_risk};
      break;
  }
  return m;
}

}  // namespace predstab

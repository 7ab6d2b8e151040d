#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "predstab/dataset.hpp"
#include "predstab/errors.hpp"
#include "predstab/simulate.hpp"

namespace predstab {

// Probabilities are clamped to [kRiskClamp, 1 - kRiskClamp] before any use
// as a risk or a logit argument.
inline constexpr double kRiskClamp = 1e-10;

inline double clamp_risk(double p) {
  return std::min(1.0 - kRiskClamp, std::max(kRiskClamp, p));
}

// log(1 + exp(eta)) without overflow.
inline double log1pexp(double eta) {
  if (eta > 0.0) return eta + std::log1p(std::exp(-eta));
  return std::log1p(std::exp(eta));
}

struct LogisticOptions {
  int max_iterations = 100;
  double coef_tolerance = 1e-8;   // max |step| on the standardized scale
  double loglik_tolerance = 1e-10;
  double separation_bound = 30.0;  // |beta| on the standardized scale
};

struct LogisticFit {
  double intercept = 0.0;
  std::vector<double> coef;  // original predictor scale; 0 for constant columns
  double loglik = 0.0;
  double loglik_null = 0.0;  // intercept-only
  int iterations = 0;
  std::vector<std::size_t> dropped_columns;  // near-constant, excluded from fit
};

inline double logistic_loglik(const Dataset& ds, double intercept,
                              const std::vector<double>& coef) {
  double ll = 0.0;
  for (std::size_t i = 0; i < ds.n_rows; ++i) {
    double eta = intercept;
    for (std::size_t j = 0; j < ds.n_cols; ++j) eta += coef[j] * ds.x(i, j);
    ll += ds.outcome[i] * eta - log1pexp(eta);
  }
  return ll;
}

// Score vector d loglik / d(intercept, coef...) on the original scale.
inline std::vector<double> logistic_score(const Dataset& ds, double intercept,
                                          const std::vector<double>& coef) {
  std::vector<double> g(ds.n_cols + 1, 0.0);
  for (std::size_t i = 0; i < ds.n_rows; ++i) {
    double eta = intercept;
    for (std::size_t j = 0; j < ds.n_cols; ++j) eta += coef[j] * ds.x(i, j);
    const double r = ds.outcome[i] - expit(eta);
    g[0] += r;
    for (std::size_t j = 0; j < ds.n_cols; ++j) g[j + 1] += r * ds.x(i, j);
  }
  return g;
}

namespace detail {

struct ColumnScale {
  std::vector<double> mean, sd;
  std::vector<std::size_t> kept;     // columns with non-degenerate spread
  std::vector<std::size_t> dropped;  // near-constant columns
};

inline ColumnScale column_scale(const Dataset& ds) {
  ColumnScale cs;
  cs.mean.assign(ds.n_cols, 0.0);
  cs.sd.assign(ds.n_cols, 0.0);
  const double n = static_cast<double>(ds.n_rows);
  for (std::size_t i = 0; i < ds.n_rows; ++i)
    for (std::size_t j = 0; j < ds.n_cols; ++j) cs.mean[j] += ds.x(i, j);
  for (auto& m : cs.mean) m /= n;
  for (std::size_t i = 0; i < ds.n_rows; ++i)
    for (std::size_t j = 0; j < ds.n_cols; ++j) {
      const double d = ds.x(i, j) - cs.mean[j];
      cs.sd[j] += d * d;
    }
  for (std::size_t j = 0; j < ds.n_cols; ++j) {
    cs.sd[j] = std::sqrt(cs.sd[j] / n);
    if (cs.sd[j] > 1e-12)
      cs.kept.push_back(j);
    else
      cs.dropped.push_back(j);
  }
  return cs;
}

}  // namespace detail

// Intercept-only maximum likelihood: closed form.
inline LogisticFit fit_logistic_intercept_only(const std::vector<int>& y) {
  std::size_t n1 = 0;
  for (int v : y) n1 += static_cast<std::size_t>(v);
  if (n1 == 0 || n1 == y.size())
    throw InvalidInput("logistic: both outcome classes must be present");
  const double ybar = static_cast<double>(n1) / static_cast<double>(y.size());
  LogisticFit fit;
  fit.intercept = logit(ybar);
  fit.loglik = static_cast<double>(y.size()) *
               (ybar * std::log(ybar) + (1.0 - ybar) * std::log(1.0 - ybar));
  fit.loglik_null = fit.loglik;
  fit.iterations = 0;
  return fit;
}

// Unpenalised maximum-likelihood logistic regression via iteratively
// reweighted least squares. Predictors are standardized internally for
// conditioning and the coefficients mapped back to the original scale.
inline LogisticFit fit_logistic(const Dataset& ds,
                                const LogisticOptions& opts = {}) {
  const std::size_t n = ds.n_rows;
  const std::size_t events = ds.events();
  if (events == 0 || events == n)
    throw InvalidInput("logistic: both outcome classes must be present");

  const auto cs = detail::column_scale(ds);
  const std::size_t m = cs.kept.size();
  const double ybar = static_cast<double>(events) / static_cast<double>(n);

  if (m == 0) {
    // All predictors constant: intercept-only model through the same API.
    auto fit = fit_logistic_intercept_only(ds.outcome);
    fit.coef.assign(ds.n_cols, 0.0);
    fit.dropped_columns = cs.dropped;
    return fit;
  }

  Eigen::MatrixXd X(n, m + 1);
  Eigen::VectorXd yv(n);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t j = cs.kept[k];
      X(i, k + 1) = (ds.x(i, j) - cs.mean[j]) / cs.sd[j];
    }
    yv(i) = ds.outcome[i];
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(m + 1);
  beta(0) = logit(ybar);

  std::vector<double> trace;
  double ll_prev = -std::numeric_limits<double>::infinity();
  double ll = ll_prev;
  bool converged = false;
  int iter = 0;
  Eigen::VectorXd eta(n), p(n), w(n);
  for (iter = 1; iter <= opts.max_iterations; ++iter) {
    eta.noalias() = X * beta;
    ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p(i) = expit(eta(i));
      w(i) = std::max(p(i) * (1.0 - p(i)), 1e-10);
      ll += yv(i) * eta(i) - log1pexp(eta(i));
    }
    Eigen::VectorXd g = X.transpose() * (yv - p);
    Eigen::MatrixXd A = X.transpose() * w.asDiagonal() * X;
    Eigen::VectorXd step = A.ldlt().solve(g);
    if (!step.allFinite())
      throw ConvergenceError("logistic: IRLS produced a non-finite step", trace);
    beta += step;

    const double max_step = step.cwiseAbs().maxCoeff();
    trace.push_back(max_step);

    if (beta.cwiseAbs().maxCoeff() > opts.separation_bound)
      throw SeparationError(
          "logistic: separation detected (standardized coefficient exceeded " +
          std::to_string(opts.separation_bound) + ")");

    if (max_step < opts.coef_tolerance ||
        (std::isfinite(ll_prev) && std::fabs(ll - ll_prev) < opts.loglik_tolerance)) {
      converged = true;
      break;
    }
    ll_prev = ll;
  }
  if (!converged)
    throw ConvergenceError("logistic: IRLS did not converge within " +
                               std::to_string(opts.max_iterations) + " iterations",
                           trace);

  LogisticFit fit;
  fit.coef.assign(ds.n_cols, 0.0);
  double intercept = beta(0);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t j = cs.kept[k];
    fit.coef[j] = beta(k + 1) / cs.sd[j];
    intercept -= beta(k + 1) * cs.mean[j] / cs.sd[j];
  }
  fit.intercept = intercept;
  fit.loglik = logistic_loglik(ds, fit.intercept, fit.coef);
  fit.loglik_null = static_cast<double>(n) * (ybar * std::log(ybar) +
                                              (1.0 - ybar) * std::log(1.0 - ybar));
  fit.iterations = iter;
  fit.dropped_columns = cs.dropped;
  return fit;
}

// Single-covariate logistic fit on a raw vector (used for recalibration).
inline LogisticFit fit_logistic_univariate(const std::vector<double>& x,
                                           const std::vector<int>& y,
                                           const LogisticOptions& opts = {}) {
  Dataset tmp;
  tmp.n_rows = x.size();
  tmp.n_cols = 1;
  tmp.predictors = x;
  tmp.predictor_names = {"x"};
  tmp.outcome = y;
  return fit_logistic(tmp, opts);
}

// Maximum-likelihood intercept given a fixed per-row offset. Newton in one
// dimension; solves sum(y - expit(b0 + offset)) = 0, i.e. enforces
// calibration-in-the-large.
inline double refit_intercept_with_offset(const std::vector<double>& offset,
                                          const std::vector<int>& y,
                                          int max_iterations = 100) {
  std::size_t n1 = 0;
  for (int v : y) n1 += static_cast<std::size_t>(v);
  if (n1 == 0 || n1 == y.size())
    throw InvalidInput("logistic: both outcome classes must be present");
  double b0 = logit(static_cast<double>(n1) / static_cast<double>(y.size()));
  for (int it = 0; it < max_iterations; ++it) {
    double g = 0.0, h = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double p = expit(b0 + offset[i]);
      g += y[i] - p;
      h += std::max(p * (1.0 - p), 1e-10);
    }
    const double step = g / h;
    b0 += step;
    if (std::fabs(step) < 1e-12) return b0;
  }
  throw ConvergenceError("logistic: offset intercept refit did not converge", {});
}

}  // namespace predstab

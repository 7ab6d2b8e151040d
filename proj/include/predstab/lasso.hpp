#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "predstab/dataset.hpp"
#include "predstab/errors.hpp"
#include "predstab/logistic.hpp"
#include "predstab/rng.hpp"

namespace predstab {

struct LassoOptions {
  int n_folds = 10;
  int n_lambda = 100;
  // 0 means automatic: 1e-4 when N > P, 1e-2 otherwise.
  double lambda_min_ratio = 0.0;
};

struct LassoPathPoint {
  double lambda = 0.0;
  double intercept = 0.0;
  std::vector<double> coef;  // original predictor scale
  double deviance = 0.0;     // training binomial deviance
};

struct LassoFit {
  double intercept = 0.0;
  std::vector<double> coef;
  double lambda = 0.0;
  std::size_t lambda_index = 0;
  std::vector<double> lambda_path;
  std::vector<double> cv_deviance;  // mean held-out binomial deviance per lambda
  int n_folds = 0;
};

namespace detail {

inline double soft_threshold(double z, double g) {
  if (z > g) return z - g;
  if (z < -g) return z + g;
  return 0.0;
}

struct StdMatrix {
  Eigen::MatrixXd X;  // n x m, standardized kept columns
  ColumnScale cs;
  std::size_t n = 0, m = 0;
};

inline StdMatrix standardize(const Dataset& ds) {
  StdMatrix s;
  s.cs = column_scale(ds);
  s.n = ds.n_rows;
  s.m = s.cs.kept.size();
  s.X.resize(s.n, s.m);
  for (std::size_t i = 0; i < s.n; ++i)
    for (std::size_t k = 0; k < s.m; ++k) {
      const std::size_t j = s.cs.kept[k];
      s.X(i, k) = (ds.x(i, j) - s.cs.mean[j]) / s.cs.sd[j];
    }
  return s;
}

// Penalized weighted logistic fit at a single lambda: IRLS outer loop with
// cyclic coordinate descent on the working least-squares problem. beta0 and
// beta (standardized scale) act as warm starts and are updated in place.
inline void lasso_irls_cd(const Eigen::MatrixXd& X, const std::vector<int>& y,
                          double lambda, double& beta0, Eigen::VectorXd& beta,
                          std::size_t lambda_index) {
  const std::size_t n = static_cast<std::size_t>(X.rows());
  const std::size_t m = static_cast<std::size_t>(X.cols());
  const double inv_n = 1.0 / static_cast<double>(n);
  constexpr int kMaxOuter = 100;
  constexpr int kMaxSweeps = 10000;
  constexpr double kOuterTol = 1e-9;
  constexpr double kInnerTol = 1e-10;

  Eigen::VectorXd eta(n), w(n), r(n), xwx(m);
  for (int outer = 0; outer < kMaxOuter; ++outer) {
    eta = Eigen::VectorXd::Constant(n, beta0);
    if (m > 0) eta.noalias() += X * beta;

    double sw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = expit(eta(i));
      const double wi = std::max(p * (1.0 - p), 1e-10);
      w(i) = wi;
      // working residual z - eta, with z = eta + (y - p) / w
      r(i) = (y[i] - p) / wi;
      sw += wi;
    }
    sw *= inv_n;
    for (std::size_t k = 0; k < m; ++k)
      xwx(k) = (X.col(k).array().square() * w.array()).sum() * inv_n;

    const double b0_before = beta0;
    Eigen::VectorXd beta_before = beta;

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      double max_delta = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double rho =
            (X.col(k).array() * w.array() * r.array()).sum() * inv_n +
            xwx(k) * beta(k);
        const double bk = soft_threshold(rho, lambda) / xwx(k);
        const double delta = bk - beta(k);
        if (delta != 0.0) {
          r.array() -= delta * X.col(k).array();
          beta(k) = bk;
          max_delta = std::max(max_delta, std::fabs(delta));
        }
      }
      const double d0 = (w.array() * r.array()).sum() * inv_n / sw;
      if (d0 != 0.0) {
        beta0 += d0;
        r.array() -= d0;
        max_delta = std::max(max_delta, std::fabs(d0));
      }
      if (max_delta < kInnerTol) break;
      if (sweep + 1 == kMaxSweeps)
        throw ConvergenceError(
            "lasso: coordinate descent did not converge at lambda index " +
                std::to_string(lambda_index),
            {});
    }

    double change = std::fabs(beta0 - b0_before);
    for (std::size_t k = 0; k < m; ++k)
      change = std::max(change, std::fabs(beta(k) - beta_before(k)));
    if (!std::isfinite(change))
      throw ConvergenceError(
          "lasso: solver produced non-finite coefficients at lambda index " +
              std::to_string(lambda_index),
          {});
    if (change < kOuterTol) return;
  }
  throw ConvergenceError(
      "lasso: IRLS did not converge at lambda index " + std::to_string(lambda_index),
      {});
}

inline double binomial_deviance(const Eigen::VectorXd& eta,
                                const std::vector<int>& y) {
  double dev = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    dev += 2.0 * (log1pexp(eta(i)) - y[i] * eta(i));
  return dev;
}

}  // namespace detail

// Largest penalty with all slopes zero: max_j |<x_j, y - ybar>| / N on the
// standardized scale.
inline double lasso_lambda_max(const Dataset& ds) {
  const auto s = detail::standardize(ds);
  const double n = static_cast<double>(s.n);
  double ybar = 0.0;
  for (int v : ds.outcome) ybar += v;
  ybar /= n;
  double lmax = 0.0;
  for (std::size_t k = 0; k < s.m; ++k) {
    double dot = 0.0;
    for (std::size_t i = 0; i < s.n; ++i) dot += s.X(i, k) * (ds.outcome[i] - ybar);
    lmax = std::max(lmax, std::fabs(dot) / n);
  }
  return lmax;
}

inline std::vector<double> lasso_lambda_sequence(const Dataset& ds, int n_lambda,
                                                 double lambda_min_ratio) {
  if (n_lambda < 1) throw InvalidInput("lasso: n_lambda must be at least 1");
  double ratio = lambda_min_ratio;
  if (ratio <= 0.0) ratio = ds.n_rows > ds.n_cols ? 1e-4 : 1e-2;
  const double lmax = lasso_lambda_max(ds);
  std::vector<double> lambdas(static_cast<std::size_t>(n_lambda));
  if (n_lambda == 1) {
    lambdas[0] = lmax;
    return lambdas;
  }
  const double step = std::log(ratio) / static_cast<double>(n_lambda - 1);
  for (int k = 0; k < n_lambda; ++k)
    lambdas[static_cast<std::size_t>(k)] = lmax * std::exp(step * k);
  return lambdas;
}

// Fit the penalized model at each lambda in the given (descending) sequence,
// warm-starting each solve from the previous one.
inline std::vector<LassoPathPoint> lasso_path_fixed(
    const Dataset& ds, const std::vector<double>& lambdas) {
  const std::size_t events = ds.events();
  if (events == 0 || events == ds.n_rows)
    throw InvalidInput("lasso: both outcome classes must be present");

  const auto s = detail::standardize(ds);
  double beta0 = logit(static_cast<double>(events) / static_cast<double>(ds.n_rows));
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.m));

  std::vector<LassoPathPoint> path;
  path.reserve(lambdas.size());
  Eigen::VectorXd eta(s.n);
  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    detail::lasso_irls_cd(s.X, ds.outcome, lambdas[li], beta0, beta, li);

    LassoPathPoint pt;
    pt.lambda = lambdas[li];
    pt.coef.assign(ds.n_cols, 0.0);
    double intercept = beta0;
    for (std::size_t k = 0; k < s.m; ++k) {
      const std::size_t j = s.cs.kept[k];
      pt.coef[j] = beta(k) / s.cs.sd[j];
      intercept -= beta(k) * s.cs.mean[j] / s.cs.sd[j];
    }
    pt.intercept = intercept;
    eta = Eigen::VectorXd::Constant(s.n, beta0);
    if (s.m > 0) eta.noalias() += s.X * beta;
    pt.deviance = detail::binomial_deviance(eta, ds.outcome);
    path.push_back(std::move(pt));
  }
  return path;
}

inline std::vector<LassoPathPoint> lasso_path(const Dataset& ds,
                                              const LassoOptions& opts = {}) {
  return lasso_path_fixed(
      ds, lasso_lambda_sequence(ds, opts.n_lambda, opts.lambda_min_ratio));
}

// Outcome-stratified fold labels in [0, k). Events and non-events are
// shuffled separately and dealt round-robin so every fold sees both classes
// whenever that is possible at all.
inline std::vector<int> stratified_folds(const std::vector<int>& y, int k, Rng& rng) {
  if (k < 2) throw InvalidInput("cv: n_folds must be at least 2");
  if (y.size() < static_cast<std::size_t>(k))
    throw InvalidInput("cv: fewer rows than folds");
  std::vector<std::size_t> ev, nev;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] == 1 ? ev : nev).push_back(i);

  for (int attempt = 0; attempt < 20; ++attempt) {
    rng.shuffle(ev);
    rng.shuffle(nev);
    std::vector<int> fold(y.size(), 0);
    for (std::size_t i = 0; i < ev.size(); ++i)
      fold[ev[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < nev.size(); ++i)
      fold[nev[i]] = static_cast<int>(i % static_cast<std::size_t>(k));

    // every training part (complement of one fold) must contain both classes
    std::vector<std::size_t> ev_per(static_cast<std::size_t>(k), 0),
        nev_per(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < y.size(); ++i)
      (y[i] == 1 ? ev_per : nev_per)[static_cast<std::size_t>(fold[i])]++;
    bool ok = true;
    for (int f = 0; f < k; ++f) {
      if (ev.size() == ev_per[static_cast<std::size_t>(f)] ||
          nev.size() == nev_per[static_cast<std::size_t>(f)])
        ok = false;
    }
    if (ok) return fold;
    if (ev.size() < 2 || nev.size() < 2) break;  // no shuffle can fix this
  }
  throw InvalidInput(
      "cv: cannot stratify folds so every training part has both outcome classes");
}

// 10-fold (by default) cross-validated LASSO logistic regression. The lambda
// sequence comes from the full data; each fold refits the whole path on its
// training part; the deviance-minimizing lambda is selected and the full-data
// fit at that lambda returned.
inline LassoFit fit_lasso_cv(const Dataset& ds, const LassoOptions& opts, Rng& rng) {
  if (ds.n_rows < static_cast<std::size_t>(opts.n_folds))
    throw InvalidInput("lasso: need at least n_folds rows");
  const auto lambdas = lasso_lambda_sequence(ds, opts.n_lambda, opts.lambda_min_ratio);
  const auto folds = stratified_folds(ds.outcome, opts.n_folds, rng);
  const auto full_path = lasso_path_fixed(ds, lambdas);

  std::vector<double> cv_dev(lambdas.size(), 0.0);
  for (int f = 0; f < opts.n_folds; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < ds.n_rows; ++i)
      (folds[i] == f ? test_idx : train_idx).push_back(i);
    if (test_idx.empty()) continue;
    const Dataset train = ds.take(train_idx);
    const auto fold_path = lasso_path_fixed(train, lambdas);
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
      const auto& pt = fold_path[li];
      for (const std::size_t i : test_idx) {
        double eta = pt.intercept;
        for (std::size_t j = 0; j < ds.n_cols; ++j) eta += pt.coef[j] * ds.x(i, j);
        cv_dev[li] += 2.0 * (log1pexp(eta) - ds.outcome[i] * eta);
      }
    }
  }
  for (auto& d : cv_dev) d /= static_cast<double>(ds.n_rows);

  std::size_t best = 0;
  for (std::size_t li = 1; li < cv_dev.size(); ++li)
    if (cv_dev[li] < cv_dev[best]) best = li;

  LassoFit fit;
  fit.intercept = full_path[best].intercept;
  fit.coef = full_path[best].coef;
  fit.lambda = lambdas[best];
  fit.lambda_index = best;
  fit.lambda_path = lambdas;
  fit.cv_deviance = cv_dev;
  fit.n_folds = opts.n_folds;
  return fit;
}

// Standardized-scale gradient of the unpenalized log-likelihood at a fitted
// point, |g_j| = lambda on the active set at an exact LASSO solution.
struct LassoKkt {
  std::vector<double> gradient_abs;  // per kept column
  std::vector<bool> active;
  double lambda = 0.0;
};

inline LassoKkt lasso_kkt(const Dataset& ds, const LassoFit& fit) {
  const auto s = detail::standardize(ds);
  LassoKkt out;
  out.lambda = fit.lambda;
  const double inv_n = 1.0 / static_cast<double>(s.n);
  std::vector<double> resid(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    double eta = fit.intercept;
    for (std::size_t j = 0; j < ds.n_cols; ++j) eta += fit.coef[j] * ds.x(i, j);
    resid[i] = ds.outcome[i] - expit(eta);
  }
  for (std::size_t k = 0; k < s.m; ++k) {
    double dot = 0.0;
    for (std::size_t i = 0; i < s.n; ++i) dot += s.X(i, k) * resid[i];
    out.gradient_abs.push_back(std::fabs(dot) * inv_n);
    out.active.push_back(fit.coef[s.cs.kept[k]] != 0.0);
  }
  return out;
}

}  // namespace predstab

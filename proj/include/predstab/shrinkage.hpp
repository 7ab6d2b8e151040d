#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "predstab/errors.hpp"
#include "predstab/logistic.hpp"

namespace predstab {

// Heuristic shrinkage factor s = (chi2_LR - df) / chi2_LR, where chi2_LR is
// the likelihood-ratio statistic of the fitted model against intercept-only
// and df the number of predictor parameters.
inline double heuristic_shrinkage(double chi2_lr, double df) {
  return (chi2_lr - df) / chi2_lr;
}

struct ShrinkageFit {
  double shrinkage = 0.0;
  double intercept = 0.0;          // re-estimated
  std::vector<double> coef;        // s * full-model slopes
  double chi2_lr = 0.0;
  std::size_t df = 0;
  LogisticFit full;                // underlying unpenalised fit
};

// Unpenalised logistic fit, slopes multiplied by the heuristic shrinkage
// factor, intercept re-estimated by maximum likelihood with the shrunken
// linear predictor as offset. The refit makes mean(predicted) equal the
// event rate.
inline ShrinkageFit fit_uniform_shrinkage(const Dataset& ds,
                                          const LogisticOptions& opts = {}) {
  ShrinkageFit out;
  out.full = fit_logistic(ds, opts);

  out.df = ds.n_cols - out.full.dropped_columns.size();
  out.chi2_lr = 2.0 * (out.full.loglik - out.full.loglik_null);
  if (out.chi2_lr <= static_cast<double>(out.df))
    throw Error(
        "uniform shrinkage: likelihood-ratio chi-square (" +
        std::to_string(out.chi2_lr) + ") does not exceed the parameter count (" +
        std::to_string(out.df) +
        "); shrinkage factor would be non-positive, model has no in-sample signal");

  out.shrinkage = heuristic_shrinkage(out.chi2_lr, static_cast<double>(out.df));
  out.coef.resize(ds.n_cols);
  for (std::size_t j = 0; j < ds.n_cols; ++j)
    out.coef[j] = out.shrinkage * out.full.coef[j];

  std::vector<double> offset(ds.n_rows, 0.0);
  for (std::size_t i = 0; i < ds.n_rows; ++i) {
    double lp = 0.0;
    for (std::size_t j = 0; j < ds.n_cols; ++j) lp += out.coef[j] * ds.x(i, j);
    offset[i] = lp;
  }
  out.intercept = refit_intercept_with_offset(offset, ds.outcome);
  return out;
}

}  // namespace predstab

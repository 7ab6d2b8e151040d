#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "predstab/errors.hpp"
#include "predstab/rng.hpp"

namespace predstab {

// Development or evaluation data: an N x P predictor matrix with a binary
// outcome and, optionally, simulation truth and subgroup labels. Immutable
// by convention once built; safe to share across threads.
struct Dataset {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<double> predictors;  // row-major, n_rows * n_cols
  std::vector<std::string> predictor_names;
  std::vector<int> outcome;         // 0/1, length n_rows
  std::vector<double> true_risk;    // empty, or length n_rows with values in (0,1)
  std::vector<std::string> subgroup;  // empty, or length n_rows

  double x(std::size_t i, std::size_t j) const {
    return predictors[i * n_cols + j];
  }
  std::span<const double> row(std::size_t i) const {
    return {predictors.data() + i * n_cols, n_cols};
  }
  std::vector<double> column(std::size_t j) const {
    std::vector<double> out(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) out[i] = x(i, j);
    return out;
  }
  bool has_true_risk() const { return !true_risk.empty(); }
  bool has_subgroup() const { return !subgroup.empty(); }

  std::size_t events() const {
    std::size_t e = 0;
    for (int y : outcome) e += static_cast<std::size_t>(y);
    return e;
  }

  void validate() const {
    if (n_rows == 0) throw InvalidInput("dataset: no rows");
    if (n_cols == 0) throw InvalidInput("dataset: no predictor columns");
    if (predictors.size() != n_rows * n_cols)
      throw InvalidInput("dataset: predictor storage does not match n_rows * n_cols");
    if (predictor_names.size() != n_cols)
      throw InvalidInput("dataset: predictor_names length does not match n_cols");
    if (outcome.size() != n_rows)
      throw InvalidInput("dataset: outcome length does not match n_rows");
    for (std::size_t i = 0; i < n_rows; ++i) {
      if (outcome[i] != 0 && outcome[i] != 1)
        throw InvalidInput("dataset: outcome at row " + std::to_string(i + 1) +
                           " is not 0 or 1");
    }
    for (double v : predictors) {
      if (!std::isfinite(v))
        throw InvalidInput("dataset: non-finite predictor value");
    }
    if (!true_risk.empty()) {
      if (true_risk.size() != n_rows)
        throw InvalidInput("dataset: true_risk length does not match n_rows");
      for (double p : true_risk) {
        if (!(p > 0.0 && p < 1.0))
          throw InvalidInput("dataset: true_risk values must lie strictly in (0,1)");
      }
    }
    if (!subgroup.empty() && subgroup.size() != n_rows)
      throw InvalidInput("dataset: subgroup length does not match n_rows");
  }

  // Row subset, parallel fields carried along. Indices may repeat.
  Dataset take(const std::vector<std::size_t>& idx) const {
    Dataset out;
    out.n_rows = idx.size();
    out.n_cols = n_cols;
    out.predictor_names = predictor_names;
    out.predictors.resize(out.n_rows * n_cols);
    out.outcome.resize(out.n_rows);
    if (has_true_risk()) out.true_risk.resize(out.n_rows);
    if (has_subgroup()) out.subgroup.resize(out.n_rows);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const std::size_t i = idx[k];
      for (std::size_t j = 0; j < n_cols; ++j)
        out.predictors[k * n_cols + j] = x(i, j);
      out.outcome[k] = outcome[i];
      if (has_true_risk()) out.true_risk[k] = true_risk[i];
      if (has_subgroup()) out.subgroup[k] = subgroup[i];
    }
    return out;
  }
};

// With-replacement resample of the same size N. Every parallel field
// travels with its row.
inline Dataset bootstrap_sample(const Dataset& ds, Rng& rng) {
  if (ds.n_rows == 0) throw InvalidInput("bootstrap_sample: empty dataset");
  std::vector<std::size_t> idx(ds.n_rows);
  for (auto& i : idx) i = static_cast<std::size_t>(rng.below(ds.n_rows));
  return ds.take(idx);
}

}  // namespace predstab

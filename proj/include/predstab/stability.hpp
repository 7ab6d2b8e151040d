#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "predstab/curves.hpp"
#include "predstab/dataset.hpp"
#include "predstab/errors.hpp"
#include "predstab/loess.hpp"
#include "predstab/model.hpp"
#include "predstab/parallel.hpp"
#include "predstab/rng.hpp"

namespace predstab {

// Original-model predictions alongside the predictions of every bootstrap
// model applied to the original dataset. Column b of `bootstrap` holds the
// risks from the model refit on bootstrap sample b.
struct BootstrapPredictions {
  std::size_t n = 0;
  std::size_t B = 0;                  // successful replicates
  std::size_t attempted = 0;          // B + failures
  std::vector<double> original;       // length n
  std::vector<double> bootstrap;      // column-major, n * B
  std::vector<int> replicate_ids;     // attempt index (1-based) per column
  std::vector<std::pair<int, std::string>> failures;  // (attempt index, reason)
  std::vector<int> outcome;           // carried from the dataset
  std::vector<std::string> subgroup;  // carried, possibly empty

  double at(std::size_t i, std::size_t b) const { return bootstrap[b * n + i]; }
  std::vector<double> column(std::size_t b) const {
    return {bootstrap.begin() + static_cast<std::ptrdiff_t>(b * n),
            bootstrap.begin() + static_cast<std::ptrdiff_t>((b + 1) * n)};
  }
};

// Any callable that builds a model from data and a private random stream.
using StrategyFn = std::function<FittedModel(const Dataset&, Rng&)>;

inline StrategyFn strategy_for(const ModelSpec& spec) {
  return [spec](const Dataset& ds, Rng& rng) { return fit_model(spec, ds, rng); };
}

// Bootstrap instability protocol: fit the strategy once on the development
// data, then B times on with-replacement resamples, predicting back into
// the original data each time. Replicate b draws everything (its resample,
// CV folds, tree seeds, split) from the stream derive_seed(master_seed, b);
// the original fit uses derive_seed(master_seed, 0). Failed refits are
// logged and skipped, never retried.
inline BootstrapPredictions run_bootstrap_stability(const Dataset& ds,
                                                    const StrategyFn& strategy,
                                                    std::size_t B,
                                                    std::uint64_t master_seed,
                                                    unsigned workers = 1,
                                                    double max_failure_fraction = 0.2) {
  ds.validate();
  if (B < 1) throw InvalidInput("bootstrap stability: B must be at least 1");

  BootstrapPredictions bp;
  bp.n = ds.n_rows;
  bp.attempted = B;
  bp.outcome = ds.outcome;
  bp.subgroup = ds.subgroup;

  {
    Rng rng0(derive_seed(master_seed, 0));
    FittedModel original;
    try {
      original = strategy(ds, rng0);
    } catch (const std::exception& e) {
      throw Error(std::string("bootstrap stability: original fit failed: ") + e.what());
    }
    bp.original = predict(original, ds);
  }

  struct Attempt {
    std::vector<double> risks;
    std::string failure;
    bool ok = false;
  };
  std::vector<Attempt> attempts(B);
  parallel_for(B, workers, [&](std::size_t k) {
    const int b = static_cast<int>(k) + 1;
    Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(b)));
    try {
      const Dataset sample = bootstrap_sample(ds, rng);
      const FittedModel model = strategy(sample, rng);
      attempts[k].risks = predict(model, ds);
      attempts[k].ok = true;
    } catch (const std::exception& e) {
      attempts[k].failure = e.what();
    }
  });

  for (std::size_t k = 0; k < B; ++k) {
    if (attempts[k].ok) {
      bp.bootstrap.insert(bp.bootstrap.end(), attempts[k].risks.begin(),
                          attempts[k].risks.end());
      bp.replicate_ids.push_back(static_cast<int>(k) + 1);
    } else {
      bp.failures.emplace_back(static_cast<int>(k) + 1, attempts[k].failure);
    }
  }
  bp.B = bp.replicate_ids.size();

  const double fail_frac =
      static_cast<double>(bp.failures.size()) / static_cast<double>(B);
  if (fail_frac > max_failure_fraction) {
    throw Error("bootstrap stability: " + std::to_string(bp.failures.size()) + " of " +
                std::to_string(B) +
                " replicate refits failed; the dataset is too small for this "
                "model-building strategy");
  }
  return bp;
}

inline BootstrapPredictions run_bootstrap_stability(const Dataset& ds,
                                                    const ModelSpec& spec,
                                                    std::size_t B,
                                                    std::uint64_t master_seed,
                                                    unsigned workers = 1) {
  return run_bootstrap_stability(ds, strategy_for(spec), B, master_seed, workers);
}

// Mean absolute difference between each bootstrap prediction and the
// original prediction, per individual.
inline std::vector<double> mape_per_individual(const BootstrapPredictions& bp) {
  if (bp.B < 1) throw InvalidInput("mape: no bootstrap replicates");
  std::vector<double> out(bp.n, 0.0);
  for (std::size_t b = 0; b < bp.B; ++b)
    for (std::size_t i = 0; i < bp.n; ++i)
      out[i] += std::fabs(bp.at(i, b) - bp.original[i]);
  for (auto& v : out) v /= static_cast<double>(bp.B);
  return out;
}

inline double average_mape(const BootstrapPredictions& bp) {
  const auto per = mape_per_individual(bp);
  double sum = 0.0;
  for (const double v : per) sum += v;
  return sum / static_cast<double>(per.size());
}

// Linear-interpolation quantile on sorted data (R type 7).
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw InvalidInput("quantile: empty sample");
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - std::floor(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, q);
}

// Per-individual percentile limits of the bootstrap predictions. Smoothing
// into band curves lives in the report layer (it needs the loess module).
struct PercentileBand {
  std::vector<double> lower, upper;  // per individual, original row order
  double lo_q = 0.025, hi_q = 0.975;
};

inline PercentileBand percentile_band_raw(const BootstrapPredictions& bp,
                                          double lo = 0.025, double hi = 0.975) {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0))
    throw InvalidInput("percentile band: need 0 <= lo < hi <= 1");
  if (bp.B < 2) throw InvalidInput("percentile band: need at least 2 replicates");
  PercentileBand band;
  band.lo_q = lo;
  band.hi_q = hi;
  band.lower.resize(bp.n);
  band.upper.resize(bp.n);
  std::vector<double> row(bp.B);
  for (std::size_t i = 0; i < bp.n; ++i) {
    for (std::size_t b = 0; b < bp.B; ++b) row[b] = bp.at(i, b);
    std::sort(row.begin(), row.end());
    band.lower[i] = quantile_sorted(row, lo);
    band.upper[i] = quantile_sorted(row, hi);
  }
  return band;
}

namespace detail {

// Collapse duplicate x's (averaging their y) so Curve's strictly-increasing
// x invariant holds.
inline Curve dedupe_curve(const std::vector<double>& x, const std::vector<double>& y,
                          CurveKind kind, double span) {
  Curve c;
  c.kind = kind;
  c.bandwidth = span;
  std::size_t i = 0;
  while (i < x.size()) {
    std::size_t j = i;
    double sum = y[i];
    while (j + 1 < x.size() && x[j + 1] == x[i]) {
      ++j;
      sum += y[j];
    }
    c.x.push_back(x[i]);
    c.y.push_back(sum / static_cast<double>(j - i + 1));
    i = j + 1;
  }
  return c;
}

}  // namespace detail

// Percentile limits plus loess-smoothed band curves over individuals
// ordered by their original prediction. The smoothed band is what the
// prediction instability plot overlays; values are clamped to [0,1].
struct InstabilityBand {
  std::vector<double> lower, upper;  // per individual, original row order
  Curve smooth_lower, smooth_upper;  // x = sorted distinct original risks
  double lo_q = 0.025, hi_q = 0.975;
  double span = 0.5;
};

inline InstabilityBand percentile_band(const BootstrapPredictions& bp,
                                       double lo = 0.025, double hi = 0.975,
                                       double span = 0.5) {
  const PercentileBand raw = percentile_band_raw(bp, lo, hi);
  InstabilityBand band;
  band.lower = raw.lower;
  band.upper = raw.upper;
  band.lo_q = lo;
  band.hi_q = hi;
  band.span = span;

  std::vector<std::size_t> order(bp.n);
  for (std::size_t i = 0; i < bp.n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return bp.original[a] < bp.original[b];
  });
  std::vector<double> xs(bp.n), lo_sorted(bp.n), hi_sorted(bp.n);
  for (std::size_t k = 0; k < bp.n; ++k) {
    xs[k] = bp.original[order[k]];
    lo_sorted[k] = raw.lower[order[k]];
    hi_sorted[k] = raw.upper[order[k]];
  }

  const bool degenerate_x = xs.back() - xs.front() < 1e-12;
  if (bp.n >= 5 && !degenerate_x) {
    const LoessFit flo(xs, lo_sorted, span);
    const LoessFit fhi(xs, hi_sorted, span);
    Curve clo = detail::dedupe_curve(xs, lo_sorted, CurveKind::band, span);
    Curve chi = detail::dedupe_curve(xs, hi_sorted, CurveKind::band, span);
    for (std::size_t k = 0; k < clo.x.size(); ++k)
      clo.y[k] = std::clamp(flo(clo.x[k]), 0.0, 1.0);
    for (std::size_t k = 0; k < chi.x.size(); ++k)
      chi.y[k] = std::clamp(fhi(chi.x[k]), 0.0, 1.0);
    band.smooth_lower = std::move(clo);
    band.smooth_upper = std::move(chi);
  } else {
    // too few points or no spread to smooth over: pass the raw limits through
    band.smooth_lower = detail::dedupe_curve(xs, lo_sorted, CurveKind::band, span);
    band.smooth_upper = detail::dedupe_curve(xs, hi_sorted, CurveKind::band, span);
  }
  return band;
}

// Fraction of bootstrap models whose classification at the threshold
// disagrees with the original model's. At-threshold counts as positive.
inline std::vector<double> classification_instability(const BootstrapPredictions& bp,
                                                      double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw InvalidInput("classification instability: threshold must be in (0,1)");
  if (bp.B < 1) throw InvalidInput("classification instability: no replicates");
  std::vector<double> out(bp.n, 0.0);
  for (std::size_t i = 0; i < bp.n; ++i) {
    const bool orig = bp.original[i] >= threshold;
    std::size_t flips = 0;
    for (std::size_t b = 0; b < bp.B; ++b)
      if ((bp.at(i, b) >= threshold) != orig) ++flips;
    out[i] = static_cast<double>(flips) / static_cast<double>(bp.B);
  }
  return out;
}

// Concordance probability (C-statistic / AUC). Midranks give tied pairs a
// credit of one half; exact pair counting via ranks, O(n log n).
inline double c_statistic(const std::vector<double>& risks,
                          const std::vector<int>& outcomes) {
  if (risks.size() != outcomes.size())
    throw InvalidInput("c-statistic: length mismatch");
  std::size_t n1 = 0;
  for (const int y : outcomes) n1 += static_cast<std::size_t>(y);
  const std::size_t n0 = outcomes.size() - n1;
  if (n1 == 0 || n0 == 0)
    throw InvalidInput("c-statistic: both outcome classes must be present");

  std::vector<std::size_t> order(risks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return risks[a] < risks[b]; });

  double rank_sum_events = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && risks[order[j + 1]] == risks[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      if (outcomes[order[k]] == 1) rank_sum_events += midrank;
    i = j + 1;
  }
  const double n1d = static_cast<double>(n1);
  return (rank_sum_events - n1d * (n1d + 1.0) / 2.0) / (n1d * static_cast<double>(n0));
}

inline double c_statistic_original(const BootstrapPredictions& bp) {
  return c_statistic(bp.original, bp.outcome);
}

inline std::vector<double> c_statistic_distribution(const BootstrapPredictions& bp) {
  std::vector<double> out(bp.B);
  for (std::size_t b = 0; b < bp.B; ++b) out[b] = c_statistic(bp.column(b), bp.outcome);
  return out;
}

// Row subsets per subgroup label, labels in sorted order. Labels with fewer
// than two members are reported in `excluded` and get no fragment.
struct SubgroupIndex {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
  std::vector<std::string> excluded;
};

inline SubgroupIndex subgroup_index(const BootstrapPredictions& bp) {
  if (bp.subgroup.empty())
    throw InvalidInput("subgroup stability: dataset has no subgroup labels");
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < bp.n; ++i) by_label[bp.subgroup[i]].push_back(i);
  SubgroupIndex out;
  for (auto& [label, rows] : by_label) {
    if (rows.size() < 2)
      out.excluded.push_back(label);
    else
      out.groups.emplace_back(label, std::move(rows));
  }
  return out;
}

// Restriction of the prediction matrix to a row subset; metric functions
// apply unchanged to the result.
inline BootstrapPredictions restrict_rows(const BootstrapPredictions& bp,
                                          const std::vector<std::size_t>& rows) {
  BootstrapPredictions out;
  out.n = rows.size();
  out.B = bp.B;
  out.attempted = bp.attempted;
  out.replicate_ids = bp.replicate_ids;
  out.failures = bp.failures;
  out.original.reserve(rows.size());
  out.outcome.reserve(rows.size());
  for (const std::size_t i : rows) {
    out.original.push_back(bp.original[i]);
    out.outcome.push_back(bp.outcome[i]);
  }
  if (!bp.subgroup.empty())
    for (const std::size_t i : rows) out.subgroup.push_back(bp.subgroup[i]);
  out.bootstrap.resize(rows.size() * bp.B);
  for (std::size_t b = 0; b < bp.B; ++b)
    for (std::size_t k = 0; k < rows.size(); ++k)
      out.bootstrap[b * out.n + k] = bp.at(rows[k], b);
  return out;
}

}  // namespace predstab

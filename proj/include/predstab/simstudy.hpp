#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "predstab/curves.hpp"
#include "predstab/dataset.hpp"
#include "predstab/errors.hpp"
#include "predstab/model.hpp"
#include "predstab/parallel.hpp"
#include "predstab/simulate.hpp"
#include "predstab/stability.hpp"

namespace predstab {

// Repeated model development under the simulated DGP: for every sample size
// and replicate, draw a fresh development sample, fit the strategy, and
// evaluate the fitted model's risks against one fixed evaluation population.
struct SimExperiment {
  SimConfig cfg;
  std::vector<std::size_t> sample_sizes = {50, 100, 385, 500, 1000, 5000};
  std::size_t n_models = 200;
  std::size_t n_eval = 20000;
  ModelSpec spec;  // lasso_cv by default; logistic_full also exercised
  std::vector<double> tracked_targets = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double subgroup_x_below = -1.0;
  double calibration_span = 0.5;
  bool keep_calibration_curves = true;

  void validate() const {
    cfg.validate();
    if (n_models < 2) throw InvalidInput("sim experiment: n_models must be >= 2");
    if (sample_sizes.empty()) throw InvalidInput("sim experiment: no sample sizes");
    for (const std::size_t s : sample_sizes)
      if (s < 20) throw InvalidInput("sim experiment: sample sizes must be >= 20");
    if (n_eval == 0) throw InvalidInput("sim experiment: n_eval must be positive");
  }
};

inline double mape_vs_truth(const std::vector<double>& estimated,
                            const std::vector<double>& true_risk) {
  if (true_risk.empty()) throw InvalidInput("mape vs truth: true risks missing");
  if (estimated.size() != true_risk.size())
    throw InvalidInput("mape vs truth: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < estimated.size(); ++i)
    sum += std::fabs(estimated[i] - true_risk[i]);
  return sum / static_cast<double>(estimated.size());
}

struct SimCell {
  std::size_t n_dev = 0;
  std::vector<double> mean_risk;             // per successful replicate
  std::vector<double> subgroup_mean_risk;    // per replicate
  std::vector<double> mape_truth;            // per replicate
  std::vector<Curve> calibration;            // per replicate (optional payload)
  std::vector<std::vector<double>> tracked;  // per replicate, one risk per target
  std::vector<int> replicate_ids;            // surviving replicate indices (0-based)
  std::vector<std::pair<int, std::string>> failures;
};

struct SimResult {
  SimExperiment exp;
  std::uint64_t master_seed = 0;
  std::vector<std::size_t> tracked_rows;  // evaluation rows nearest the targets
  std::vector<double> tracked_true_risk;
  std::size_t subgroup_size = 0;
  std::uint64_t eval_fingerprint = 0;
  std::vector<SimCell> cells;
};

namespace detail {

inline std::uint64_t fnv1a64(const void* data, std::size_t bytes,
                             std::uint64_t h = 1469598103934665603ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t dataset_fingerprint(const Dataset& ds) {
  std::uint64_t h = fnv1a64(ds.predictors.data(), ds.predictors.size() * sizeof(double));
  h = fnv1a64(ds.outcome.data(), ds.outcome.size() * sizeof(int), h);
  if (ds.has_true_risk())
    h = fnv1a64(ds.true_risk.data(), ds.true_risk.size() * sizeof(double), h);
  return h;
}

}  // namespace detail

// The evaluation population is generated once from derive_seed(master, 0)
// and shared read-only; replicate r at sample size s draws everything from
// derive_seed(master, s, r), so any cell can be reproduced in isolation.
inline SimResult run_sim_experiment(const SimExperiment& exp, std::uint64_t master_seed,
                                    unsigned workers = 1,
                                    double max_failure_fraction = 0.2) {
  exp.validate();
  SimResult result;
  result.exp = exp;
  result.master_seed = master_seed;

  Rng eval_rng(derive_seed(master_seed, 0));
  const Dataset eval = simulate_population(exp.cfg, exp.n_eval, eval_rng);
  result.eval_fingerprint = detail::dataset_fingerprint(eval);

  for (const double target : exp.tracked_targets) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < eval.n_rows; ++i)
      if (std::fabs(eval.true_risk[i] - target) <
          std::fabs(eval.true_risk[best] - target))
        best = i;
    result.tracked_rows.push_back(best);
    result.tracked_true_risk.push_back(eval.true_risk[best]);
  }

  std::vector<std::size_t> subgroup_rows;
  for (std::size_t i = 0; i < eval.n_rows; ++i)
    if (eval.x(i, 0) < exp.subgroup_x_below) subgroup_rows.push_back(i);
  result.subgroup_size = subgroup_rows.size();

  const StrategyFn strategy = strategy_for(exp.spec);

  for (const std::size_t n_dev : exp.sample_sizes) {
    SimCell cell;
    cell.n_dev = n_dev;

    struct Attempt {
      bool ok = false;
      std::string failure;
      double mean_risk = 0.0, subgroup_mean = 0.0, mape = 0.0;
      Curve calibration;
      std::vector<double> tracked;
    };
    std::vector<Attempt> attempts(exp.n_models);

    parallel_for(exp.n_models, workers, [&](std::size_t r) {
      Rng rng(derive_seed(master_seed, n_dev, r));
      Attempt& a = attempts[r];
      try {
        const Dataset dev = simulate_population(exp.cfg, n_dev, rng);
        const FittedModel model = strategy(dev, rng);
        const std::vector<double> risks = predict(model, eval);

        double sum = 0.0;
        for (const double p : risks) sum += p;
        a.mean_risk = sum / static_cast<double>(risks.size());

        double sg = 0.0;
        for (const std::size_t i : subgroup_rows) sg += risks[i];
        a.subgroup_mean =
            subgroup_rows.empty() ? 0.0 : sg / static_cast<double>(subgroup_rows.size());

        a.mape = mape_vs_truth(risks, eval.true_risk);
        if (exp.keep_calibration_curves)
          a.calibration =
              calibration_curve_or_point(risks, eval.outcome, exp.calibration_span);
        a.tracked.reserve(result.tracked_rows.size());
        for (const std::size_t i : result.tracked_rows) a.tracked.push_back(risks[i]);
        a.ok = true;
      } catch (const std::exception& e) {
        a.failure = e.what();
      }
    });

    for (std::size_t r = 0; r < exp.n_models; ++r) {
      auto& a = attempts[r];
      if (a.ok) {
        cell.replicate_ids.push_back(static_cast<int>(r));
        cell.mean_risk.push_back(a.mean_risk);
        cell.subgroup_mean_risk.push_back(a.subgroup_mean);
        cell.mape_truth.push_back(a.mape);
        if (exp.keep_calibration_curves)
          cell.calibration.push_back(std::move(a.calibration));
        cell.tracked.push_back(std::move(a.tracked));
      } else {
        cell.failures.emplace_back(static_cast<int>(r), a.failure);
      }
    }

    const double fail_frac = static_cast<double>(cell.failures.size()) /
                             static_cast<double>(exp.n_models);
    if (fail_frac > max_failure_fraction)
      throw Error("sim experiment: " + std::to_string(cell.failures.size()) + " of " +
                  std::to_string(exp.n_models) + " replicates failed at n_dev=" +
                  std::to_string(n_dev) + "; cell unusable");
    result.cells.push_back(std::move(cell));
  }
  return result;
}

struct TrackedSummary {
  double true_risk = 0.0;
  double min = 0.0, max = 0.0;
  double lo95 = 0.0, hi95 = 0.0;  // empirical 2.5 / 97.5 percentiles
  double median = 0.0;
};

struct CellSummary {
  std::size_t n_dev = 0;
  std::size_t replicates = 0;
  // level 1: spread of the mean estimated risk
  double mean_risk_lo = 0.0, mean_risk_hi = 0.0, mean_risk_median = 0.0;
  // level 2: distribution of MAPE against the true risks
  double mape_median = 0.0, mape_q1 = 0.0, mape_q3 = 0.0;
  // level 3: spread of the subgroup mean risk
  double subgroup_lo = 0.0, subgroup_hi = 0.0, subgroup_median = 0.0;
  // level 4: per tracked individual
  std::vector<TrackedSummary> tracked;
};

inline std::vector<CellSummary> level_summaries(const SimResult& result) {
  if (result.cells.empty()) throw InvalidInput("level summaries: empty result");
  std::vector<CellSummary> out;
  for (const auto& cell : result.cells) {
    if (cell.mean_risk.empty())
      throw InvalidInput("level summaries: cell with no successful replicates");
    CellSummary s;
    s.n_dev = cell.n_dev;
    s.replicates = cell.mean_risk.size();
    s.mean_risk_lo = quantile(cell.mean_risk, 0.025);
    s.mean_risk_hi = quantile(cell.mean_risk, 0.975);
    s.mean_risk_median = quantile(cell.mean_risk, 0.5);
    s.mape_median = quantile(cell.mape_truth, 0.5);
    s.mape_q1 = quantile(cell.mape_truth, 0.25);
    s.mape_q3 = quantile(cell.mape_truth, 0.75);
    s.subgroup_lo = quantile(cell.subgroup_mean_risk, 0.025);
    s.subgroup_hi = quantile(cell.subgroup_mean_risk, 0.975);
    s.subgroup_median = quantile(cell.subgroup_mean_risk, 0.5);
    for (std::size_t t = 0; t < result.tracked_rows.size(); ++t) {
      std::vector<double> risks;
      risks.reserve(cell.tracked.size());
      for (const auto& row : cell.tracked) risks.push_back(row[t]);
      TrackedSummary ts;
      ts.true_risk = result.tracked_true_risk[t];
      ts.min = *std::min_element(risks.begin(), risks.end());
      ts.max = *std::max_element(risks.begin(), risks.end());
      ts.lo95 = quantile(risks, 0.025);
      ts.hi95 = quantile(risks, 0.975);
      ts.median = quantile(risks, 0.5);
      s.tracked.push_back(ts);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace predstab

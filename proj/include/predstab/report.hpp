#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "predstab/curves.hpp"
#include "predstab/model.hpp"
#include "predstab/plots.hpp"
#include "predstab/simstudy.hpp"
#include "predstab/stability.hpp"
#include "predstab/version.hpp"

namespace predstab {

struct ReportOptions {
  double span = 0.5;
  double band_lo = 0.025;
  double band_hi = 0.975;
  std::optional<double> threshold;  // enables classification + decision payloads
  int max_curves = 200;
};

struct SubgroupReport {
  std::string label;
  std::size_t n = 0;
  std::vector<double> mape;
  double average_mape = 0.0;
  InstabilityBand band;
  Curve calibration_original;
  std::vector<Curve> calibration_bootstrap;
};

// Everything the output bundle needs, all derived from one
// BootstrapPredictions object. Pure data; serialization below.
struct StabilityReport {
  ModelSpec spec;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t attempted = 0;
  std::size_t B = 0;
  std::vector<std::pair<int, std::string>> failures;

  std::vector<double> mape;
  double average_mape = 0.0;
  InstabilityBand band;

  std::optional<double> threshold;
  std::vector<double> classification_index;

  std::optional<double> c_statistic_original;
  std::vector<double> c_statistic_bootstrap;

  Curve calibration_original;
  std::vector<Curve> calibration_bootstrap;

  std::optional<DecisionCurves> decision_original;
  std::vector<DecisionCurves> decision_bootstrap;

  std::vector<SubgroupReport> subgroups;
  std::vector<std::string> subgroups_excluded;

  ReportOptions options;
};

inline StabilityReport build_stability_report(const BootstrapPredictions& bp,
                                              const ModelSpec& spec,
                                              std::uint64_t seed,
                                              const ReportOptions& opts = {}) {
  StabilityReport rep;
  rep.spec = spec;
  rep.seed = seed;
  rep.n = bp.n;
  rep.attempted = bp.attempted;
  rep.B = bp.B;
  rep.failures = bp.failures;
  rep.options = opts;

  rep.mape = mape_per_individual(bp);
  rep.average_mape = average_mape(bp);
  if (bp.B >= 2)
    rep.band = percentile_band(bp, opts.band_lo, opts.band_hi, opts.span);

  const std::size_t events = [&] {
    std::size_t e = 0;
    for (const int y : bp.outcome) e += static_cast<std::size_t>(y);
    return e;
  }();
  const bool both_classes = events > 0 && events < bp.n;
  if (both_classes) {
    rep.c_statistic_original = c_statistic(bp.original, bp.outcome);
    rep.c_statistic_bootstrap = c_statistic_distribution(bp);
  }

  rep.calibration_original =
      calibration_curve_or_point(bp.original, bp.outcome, opts.span);
  rep.calibration_bootstrap.reserve(bp.B);
  for (std::size_t b = 0; b < bp.B; ++b)
    rep.calibration_bootstrap.push_back(
        calibration_curve_or_point(bp.column(b), bp.outcome, opts.span));

  if (opts.threshold) {
    rep.threshold = opts.threshold;
    rep.classification_index = classification_instability(bp, *opts.threshold);
    rep.decision_original = decision_curve(bp.original, bp.outcome);
    rep.decision_bootstrap.reserve(bp.B);
    for (std::size_t b = 0; b < bp.B; ++b)
      rep.decision_bootstrap.push_back(decision_curve(bp.column(b), bp.outcome));
  }

  if (!bp.subgroup.empty()) {
    const SubgroupIndex idx = subgroup_index(bp);
    rep.subgroups_excluded = idx.excluded;
    for (const auto& [label, rows] : idx.groups) {
      const BootstrapPredictions sub = restrict_rows(bp, rows);
      SubgroupReport sr;
      sr.label = label;
      sr.n = rows.size();
      sr.mape = mape_per_individual(sub);
      sr.average_mape = average_mape(sub);
      if (sub.B >= 2)
        sr.band = percentile_band(sub, opts.band_lo, opts.band_hi, opts.span);
      sr.calibration_original =
          calibration_curve_or_point(sub.original, sub.outcome, opts.span);
      for (std::size_t b = 0; b < sub.B; ++b)
        sr.calibration_bootstrap.push_back(
            calibration_curve_or_point(sub.column(b), sub.outcome, opts.span));
      rep.subgroups.push_back(std::move(sr));
    }
  }
  return rep;
}

// --- serialization ------------------------------------------------------

namespace detail {

inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << s;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline nlohmann::json quantile_summary(std::vector<double> v) {
  nlohmann::json j;
  if (v.empty()) return j;
  std::sort(v.begin(), v.end());
  j["min"] = v.front();
  j["p2_5"] = quantile_sorted(v, 0.025);
  j["median"] = quantile_sorted(v, 0.5);
  j["p97_5"] = quantile_sorted(v, 0.975);
  j["max"] = v.back();
  return j;
}

}  // namespace detail

inline nlohmann::json spec_to_json(const ModelSpec& spec) {
  nlohmann::json j;
  j["engine"] = engine_name(spec.engine);
  j["lasso"] = {{"n_folds", spec.lasso.n_folds},
                {"n_lambda", spec.lasso.n_lambda},
                {"lambda_min_ratio", spec.lasso.lambda_min_ratio},
                {"selection", "lambda_min"}};
  j["forest"] = {{"n_trees", spec.forest.n_trees},
                 {"mtry", spec.forest.mtry},
                 {"min_node", spec.forest.min_node}};
  j["platt"] = {{"dev_size", spec.platt.dev_size},
                {"recal_size", spec.platt.recal_size}};
  if (spec.engine == Engine::constant) j["constant_risk"] = spec.constant_risk;
  return j;
}

inline nlohmann::json model_to_json(const FittedModel& m) {
  nlohmann::json j;
  j["engine"] = engine_name(m.engine);
  j["predictors"] = m.schema;
  if (const auto* lf = std::get_if<LogisticFit>(&m.impl)) {
    j["intercept"] = lf->intercept;
    j["coefficients"] = lf->coef;
    j["loglik"] = lf->loglik;
    j["loglik_null"] = lf->loglik_null;
    j["iterations"] = lf->iterations;
  } else if (const auto* la = std::get_if<LassoFit>(&m.impl)) {
    j["intercept"] = la->intercept;
    j["coefficients"] = la->coef;
    j["lambda"] = la->lambda;
    j["lambda_index"] = la->lambda_index;
    j["lambda_path"] = la->lambda_path;
    j["cv_deviance"] = la->cv_deviance;
    j["n_folds"] = la->n_folds;
  } else if (const auto* sh = std::get_if<ShrinkageFit>(&m.impl)) {
    j["shrinkage_factor"] = sh->shrinkage;
    j["intercept"] = sh->intercept;
    j["coefficients"] = sh->coef;
    j["chi2_lr"] = sh->chi2_lr;
    j["df"] = sh->df;
    j["full_intercept"] = sh->full.intercept;
    j["full_coefficients"] = sh->full.coef;
  } else if (const auto* fo = std::get_if<ForestFit>(&m.impl)) {
    j["n_trees"] = fo->trees.size();
    j["mtry"] = fo->mtry;
    j["min_node"] = fo->min_node;
    j["total_nodes"] = fo->total_nodes();
  } else if (const auto* pl = std::get_if<PlattFit>(&m.impl)) {
    j["recalibration_intercept"] = pl->a;
    j["recalibration_slope"] = pl->b;
    j["dev_size"] = pl->dev_size;
    j["recal_size"] = pl->recal_size;
    j["n_trees"] = pl->forest.trees.size();
    j["mtry"] = pl->forest.mtry;
    j["total_nodes"] = pl->forest.total_nodes();
  } else if (const auto* c = std::get_if<ConstantFit>(&m.impl)) {
    j["risk"] = c->risk;
  }
  return j;
}

inline nlohmann::json report_to_json(const StabilityReport& rep) {
  nlohmann::json j;
  j["predstab_version"] = kVersion;
  j["kind"] = "stability_report";
  j["normal_method"] = kNormalMethod;
  j["spec"] = spec_to_json(rep.spec);
  j["seed"] = rep.seed;
  j["n"] = rep.n;
  j["replicates_attempted"] = rep.attempted;
  j["replicates_successful"] = rep.B;
  j["failures"] = nlohmann::json::array();
  for (const auto& [id, reason] : rep.failures)
    j["failures"].push_back({{"replicate", id}, {"reason", reason}});
  j["average_mape"] = rep.average_mape;
  j["mape"] = detail::quantile_summary(rep.mape);
  if (rep.c_statistic_original) {
    j["c_statistic_original"] = *rep.c_statistic_original;
    j["c_statistic_bootstrap"] = detail::quantile_summary(rep.c_statistic_bootstrap);
  }
  // these are instability ranges across bootstrap models, not confidence
  // intervals; keep the labels honest
  j["band"] = {{"lo", rep.band.lo_q},
               {"hi", rep.band.hi_q},
               {"span", rep.band.span},
               {"label", "instability range"}};
  if (rep.threshold) {
    double mean_idx = 0.0, max_idx = 0.0;
    for (const double v : rep.classification_index) {
      mean_idx += v;
      max_idx = std::max(max_idx, v);
    }
    if (!rep.classification_index.empty())
      mean_idx /= static_cast<double>(rep.classification_index.size());
    j["classification"] = {{"threshold", *rep.threshold},
                           {"mean_index", mean_idx},
                           {"max_index", max_idx}};
  }
  j["subgroups"] = nlohmann::json::array();
  for (const auto& sg : rep.subgroups)
    j["subgroups"].push_back(
        {{"label", sg.label}, {"n", sg.n}, {"average_mape", sg.average_mape}});
  j["subgroups_excluded"] = rep.subgroups_excluded;
  j["options"] = {{"span", rep.options.span},
                  {"band_lo", rep.options.band_lo},
                  {"band_hi", rep.options.band_hi},
                  {"max_curves", rep.options.max_curves}};
  return j;
}

// Fixed bundle layout: report.json, predictions.csv, mape.csv, curves/*.csv,
// plots/*.svg. Bytes depend only on the report contents, so a fixed seed
// reproduces the bundle exactly.
inline void write_report_bundle(const StabilityReport& rep,
                                const BootstrapPredictions& bp,
                                const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path root(out_dir);
  fs::create_directories(root / "curves");
  fs::create_directories(root / "plots");

  detail::write_text_file(root / "report.json", report_to_json(rep).dump(2) + "\n");

  {
    std::string csv = "individual,replicate,risk\n";
    for (std::size_t i = 0; i < bp.n; ++i)
      csv += std::to_string(i + 1) + ",0," + detail::csv_num(bp.original[i]) + "\n";
    for (std::size_t b = 0; b < bp.B; ++b) {
      const std::string rid = std::to_string(bp.replicate_ids[b]);
      for (std::size_t i = 0; i < bp.n; ++i)
        csv += std::to_string(i + 1) + "," + rid + "," +
               detail::csv_num(bp.at(i, b)) + "\n";
    }
    detail::write_text_file(root / "predictions.csv", csv);
  }

  {
    std::string csv = "individual,original_risk,mape\n";
    for (std::size_t i = 0; i < bp.n; ++i)
      csv += std::to_string(i + 1) + "," + detail::csv_num(bp.original[i]) + "," +
             detail::csv_num(rep.mape[i]) + "\n";
    detail::write_text_file(root / "mape.csv", csv);
  }

  {
    std::string csv = "series,x,y\n";
    auto emit = [&](const std::string& series, const Curve& c) {
      for (std::size_t k = 0; k < c.x.size(); ++k)
        csv += series + "," + detail::csv_num(c.x[k]) + "," +
               detail::csv_num(c.y[k]) + "\n";
    };
    emit("original", rep.calibration_original);
    for (std::size_t b = 0; b < rep.calibration_bootstrap.size(); ++b)
      emit("boot_" + std::to_string(bp.replicate_ids[b]), rep.calibration_bootstrap[b]);
    detail::write_text_file(root / "curves" / "calibration.csv", csv);
  }

  {
    std::string csv = "individual,original_risk,lower,upper\n";
    for (std::size_t i = 0; i < bp.n; ++i)
      csv += std::to_string(i + 1) + "," + detail::csv_num(bp.original[i]) + "," +
             detail::csv_num(rep.band.lower.empty() ? bp.original[i]
                                                    : rep.band.lower[i]) +
             "," +
             detail::csv_num(rep.band.upper.empty() ? bp.original[i]
                                                    : rep.band.upper[i]) +
             "\n";
    detail::write_text_file(root / "curves" / "band.csv", csv);

    std::string smooth = "series,x,y\n";
    auto emit = [&](const std::string& series, const Curve& c) {
      for (std::size_t k = 0; k < c.x.size(); ++k)
        smooth += series + "," + detail::csv_num(c.x[k]) + "," +
                  detail::csv_num(c.y[k]) + "\n";
    };
    emit("lower", rep.band.smooth_lower);
    emit("upper", rep.band.smooth_upper);
    detail::write_text_file(root / "curves" / "band_smooth.csv", smooth);
  }

  if (rep.decision_original) {
    std::string csv = "series,threshold,net_benefit\n";
    auto emit = [&](const std::string& series, const std::vector<double>& t,
                    const std::vector<double>& nb) {
      for (std::size_t k = 0; k < t.size(); ++k)
        csv += series + "," + detail::csv_num(t[k]) + "," + detail::csv_num(nb[k]) +
               "\n";
    };
    emit("original", rep.decision_original->thresholds, rep.decision_original->model);
    emit("treat_all", rep.decision_original->thresholds,
         rep.decision_original->treat_all);
    emit("treat_none", rep.decision_original->thresholds,
         rep.decision_original->treat_none);
    for (std::size_t b = 0; b < rep.decision_bootstrap.size(); ++b)
      emit("boot_" + std::to_string(bp.replicate_ids[b]),
           rep.decision_bootstrap[b].thresholds, rep.decision_bootstrap[b].model);
    detail::write_text_file(root / "curves" / "decision.csv", csv);
  }

  if (!rep.classification_index.empty()) {
    std::string csv = "individual,original_risk,classification_index\n";
    for (std::size_t i = 0; i < bp.n; ++i)
      csv += std::to_string(i + 1) + "," + detail::csv_num(bp.original[i]) + "," +
             detail::csv_num(rep.classification_index[i]) + "\n";
    detail::write_text_file(root / "curves" / "classification.csv", csv);
  }

  detail::write_text_file(
      root / "plots" / "prediction_instability.svg",
      plots::render_prediction_instability(bp, rep.band.smooth_lower,
                                           rep.band.smooth_upper, rep.seed));
  detail::write_text_file(
      root / "plots" / "calibration_instability.svg",
      plots::render_calibration_instability(rep.calibration_original,
                                            rep.calibration_bootstrap,
                                            rep.options.max_curves, rep.seed));
  detail::write_text_file(root / "plots" / "mape_instability.svg",
                          plots::render_mape_instability(bp.original, rep.mape));
  if (rep.c_statistic_original)
    detail::write_text_file(root / "plots" / "c_stat_histogram.svg",
                            plots::render_c_stat_histogram(
                                rep.c_statistic_bootstrap, *rep.c_statistic_original));
  if (rep.threshold)
    detail::write_text_file(
        root / "plots" / "classification_instability.svg",
        plots::render_classification_instability(bp.original, rep.classification_index,
                                                 *rep.threshold));
  if (rep.decision_original)
    detail::write_text_file(
        root / "plots" / "decision_instability.svg",
        plots::render_decision_instability(*rep.decision_original,
                                           rep.decision_bootstrap));
}

// Simulation bundle: level1.csv..level4.csv, level2_curves.csv, index.json,
// plots/sim_*.svg.
inline void write_sim_bundle(const SimResult& res,
                             const std::vector<CellSummary>& summaries,
                             const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path root(out_dir);
  fs::create_directories(root / "plots");

  {
    std::string csv = "sample_size,replicate,mean_risk\n";
    for (const auto& cell : res.cells)
      for (std::size_t r = 0; r < cell.mean_risk.size(); ++r)
        csv += std::to_string(cell.n_dev) + "," +
               std::to_string(cell.replicate_ids[r]) + "," +
               detail::csv_num(cell.mean_risk[r]) + "\n";
    detail::write_text_file(root / "level1.csv", csv);
  }
  {
    std::string csv = "sample_size,replicate,mape_vs_truth\n";
    for (const auto& cell : res.cells)
      for (std::size_t r = 0; r < cell.mape_truth.size(); ++r)
        csv += std::to_string(cell.n_dev) + "," +
               std::to_string(cell.replicate_ids[r]) + "," +
               detail::csv_num(cell.mape_truth[r]) + "\n";
    detail::write_text_file(root / "level2.csv", csv);
  }
  {
    std::string csv = "sample_size,replicate,x,y\n";
    for (const auto& cell : res.cells)
      for (std::size_t r = 0; r < cell.calibration.size(); ++r)
        for (std::size_t k = 0; k < cell.calibration[r].x.size(); ++k)
          csv += std::to_string(cell.n_dev) + "," +
                 std::to_string(cell.replicate_ids[r]) + "," +
                 detail::csv_num(cell.calibration[r].x[k]) + "," +
                 detail::csv_num(cell.calibration[r].y[k]) + "\n";
    detail::write_text_file(root / "level2_curves.csv", csv);
  }
  {
    std::string csv = "sample_size,replicate,subgroup_mean_risk\n";
    for (const auto& cell : res.cells)
      for (std::size_t r = 0; r < cell.subgroup_mean_risk.size(); ++r)
        csv += std::to_string(cell.n_dev) + "," +
               std::to_string(cell.replicate_ids[r]) + "," +
               detail::csv_num(cell.subgroup_mean_risk[r]) + "\n";
    detail::write_text_file(root / "level3.csv", csv);
  }
  {
    std::string csv = "sample_size,replicate,tracked,true_risk,estimated_risk\n";
    for (const auto& cell : res.cells)
      for (std::size_t r = 0; r < cell.tracked.size(); ++r)
        for (std::size_t t = 0; t < cell.tracked[r].size(); ++t)
          csv += std::to_string(cell.n_dev) + "," +
                 std::to_string(cell.replicate_ids[r]) + "," +
                 std::to_string(t + 1) + "," +
                 detail::csv_num(res.tracked_true_risk[t]) + "," +
                 detail::csv_num(cell.tracked[r][t]) + "\n";
    detail::write_text_file(root / "level4.csv", csv);
  }

  nlohmann::json j;
  j["predstab_version"] = kVersion;
  j["kind"] = "sim_result";
  j["normal_method"] = kNormalMethod;
  j["seed"] = res.master_seed;
  j["spec"] = spec_to_json(res.exp.spec);
  j["dgp"] = {{"x_sd", res.exp.cfg.x_sd},
              {"n_noise", res.exp.cfg.n_noise},
              {"intercept", res.exp.cfg.intercept},
              {"slope", res.exp.cfg.slope}};
  j["n_eval"] = res.exp.n_eval;
  j["n_models"] = res.exp.n_models;
  j["sample_sizes"] = res.exp.sample_sizes;
  j["subgroup_x_below"] = res.exp.subgroup_x_below;
  j["subgroup_size"] = res.subgroup_size;
  j["eval_fingerprint"] = res.eval_fingerprint;
  j["tracked_true_risks"] = res.tracked_true_risk;
  j["cells"] = nlohmann::json::array();
  for (std::size_t c = 0; c < res.cells.size(); ++c) {
    const auto& cell = res.cells[c];
    const auto& s = summaries[c];
    nlohmann::json jc;
    jc["n_dev"] = cell.n_dev;
    jc["replicates"] = s.replicates;
    jc["failures"] = nlohmann::json::array();
    for (const auto& [id, reason] : cell.failures)
      jc["failures"].push_back({{"replicate", id}, {"reason", reason}});
    jc["level1"] = {{"p2_5", s.mean_risk_lo},
                    {"median", s.mean_risk_median},
                    {"p97_5", s.mean_risk_hi}};
    jc["level2_mape"] = {{"q1", s.mape_q1}, {"median", s.mape_median}, {"q3", s.mape_q3}};
    jc["level3"] = {{"p2_5", s.subgroup_lo},
                    {"median", s.subgroup_median},
                    {"p97_5", s.subgroup_hi}};
    jc["level4"] = nlohmann::json::array();
    for (const auto& t : s.tracked)
      jc["level4"].push_back({{"true_risk", t.true_risk},
                              {"min", t.min},
                              {"max", t.max},
                              {"p2_5", t.lo95},
                              {"p97_5", t.hi95},
                              {"median", t.median}});
    j["cells"].push_back(jc);
  }
  detail::write_text_file(root / "index.json", j.dump(2) + "\n");

  detail::write_text_file(root / "plots" / "sim_level1.svg",
                          plots::render_sim_level1(res, summaries));
  detail::write_text_file(root / "plots" / "sim_level2_mape.svg",
                          plots::render_sim_level2_mape(res, summaries));
  detail::write_text_file(root / "plots" / "sim_level3.svg",
                          plots::render_sim_level3(res, summaries));
  for (std::size_t c = 0; c < res.cells.size(); ++c) {
    const std::string n = std::to_string(res.cells[c].n_dev);
    if (!res.cells[c].calibration.empty())
      detail::write_text_file(
          root / "plots" / ("sim_level2_curves_n" + n + ".svg"),
          plots::render_sim_level2_curves(res, c, 200, res.master_seed));
    detail::write_text_file(root / "plots" / ("sim_level4_n" + n + ".svg"),
                            plots::render_sim_level4(res, summaries, c));
  }
}

}  // namespace predstab

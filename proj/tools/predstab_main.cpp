#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "predstab/config.hpp"
#include "predstab/csv.hpp"
#include "predstab/report.hpp"
#include "predstab/version.hpp"

namespace {

struct AssessArgs {
  std::string data;
  std::string outcome;
  std::string subgroup;
  std::string engine = "lasso_cv";
  std::size_t B = 200;
  std::uint64_t seed = 0;
  double span = 0.5;
  std::optional<double> threshold;
  std::string out_dir = "out";
  std::string config_file;
  unsigned workers = 0;
  int max_curves = 200;
};

struct FitArgs {
  std::string data;
  std::string outcome;
  std::string engine = "lasso_cv";
  std::uint64_t seed = 0;
  std::string config_file;
  std::string out = "model.json";
};

struct SimArgs {
  std::string config_file;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::string engine;
  unsigned workers = 0;
};

predstab::ModelSpec spec_from_args(const std::string& engine,
                                   const std::string& config_file) {
  predstab::ModelSpec spec;
  spec.engine = predstab::engine_from_name(engine);
  if (!config_file.empty()) {
    const auto cfg = predstab::KeyValueConfig::from_file(config_file);
    // the --engine flag wins over the config file's engine key
    spec = predstab::model_spec_from_config(cfg, spec);
    spec.engine = predstab::engine_from_name(engine);
  }
  spec.validate();
  return spec;
}

int run_assess(const AssessArgs& a) {
  if (a.B < 200)
    std::cerr << "warning: B=" << a.B
              << " is below the recommended minimum of 200 bootstrap models\n";
  const predstab::Dataset ds = predstab::load_csv(a.data, a.outcome, a.subgroup);
  const predstab::ModelSpec spec = spec_from_args(a.engine, a.config_file);

  const auto bp =
      predstab::run_bootstrap_stability(ds, spec, a.B, a.seed, a.workers);
  predstab::ReportOptions opts;
  opts.span = a.span;
  opts.threshold = a.threshold;
  opts.max_curves = a.max_curves;
  const auto report = predstab::build_stability_report(bp, spec, a.seed, opts);
  predstab::write_report_bundle(report, bp, a.out_dir);

  for (const auto& label : report.subgroups_excluded)
    std::cerr << "warning: subgroup '" << label
              << "' has fewer than 2 members and was excluded\n";
  std::cout << "assess: wrote report bundle to " << a.out_dir << " (B=" << bp.B
            << " successful of " << bp.attempted << ", average MAPE "
            << report.average_mape << ")\n";
  return 0;
}

int run_fit(const FitArgs& a) {
  const predstab::Dataset ds = predstab::load_csv(a.data, a.outcome);
  const predstab::ModelSpec spec = spec_from_args(a.engine, a.config_file);
  predstab::Rng rng(predstab::derive_seed(a.seed, 0));
  const auto model = predstab::fit_model(spec, ds, rng);

  nlohmann::json j = predstab::model_to_json(model);
  j["predstab_version"] = predstab::kVersion;
  j["seed"] = a.seed;
  j["spec"] = predstab::spec_to_json(spec);
  predstab::detail::write_text_file(a.out, j.dump(2) + "\n");
  std::cout << "fit: wrote " << a.out << "\n";
  return 0;
}

int run_simulate(const SimArgs& a) {
  predstab::SimExperiment exp;
  exp.n_models = 200;  // desk-scale defaults; config can raise them
  exp.n_eval = 20000;
  if (!a.config_file.empty()) {
    const auto cfg = predstab::KeyValueConfig::from_file(a.config_file);
    exp = predstab::sim_experiment_from_config(cfg, exp);
  }
  if (!a.engine.empty()) exp.spec.engine = predstab::engine_from_name(a.engine);
  exp.validate();

  const auto result = predstab::run_sim_experiment(exp, a.seed, a.workers);
  const auto summaries = predstab::level_summaries(result);
  predstab::write_sim_bundle(result, summaries, a.out_dir);
  std::cout << "simulate: wrote simulation bundle to " << a.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"predstab: bootstrap instability assessment for clinical prediction models"};
  app.require_subcommand(1);

  AssessArgs assess_args;
  auto* assess = app.add_subcommand(
      "assess", "Fit a model and quantify prediction instability by bootstrap");
  assess->add_option("--data", assess_args.data, "CSV file with predictors and outcome")
      ->required();
  assess->add_option("--outcome", assess_args.outcome, "Name of the 0/1 outcome column")
      ->required();
  assess->add_option("--subgroup", assess_args.subgroup,
                     "Optional column with subgroup labels");
  assess->add_option("--engine", assess_args.engine,
                     "logistic_full | lasso_cv | uniform_shrinkage | random_forest | rf_platt");
  assess->add_option("--B", assess_args.B, "Number of bootstrap models (default 200)");
  assess->add_option("--seed", assess_args.seed, "Master seed (required: runs must be reproducible)")
      ->required();
  assess->add_option("--span", assess_args.span, "Loess span for curves and bands");
  double thr = -1.0;
  auto* thr_opt = assess->add_option(
      "--threshold", thr, "Decision threshold; enables classification and decision outputs");
  assess->add_option("--out-dir", assess_args.out_dir, "Output directory (default out)");
  assess->add_option("--config", assess_args.config_file,
                     "Key-value config file overriding engine hyperparameters");
  assess->add_option("--workers", assess_args.workers,
                     "Worker threads (0 = all cores); output is identical for any value");
  assess->add_option("--max-curves", assess_args.max_curves,
                     "Calibration curves drawn in the plot (default 200)");

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit a single model and export it as JSON");
  fit->add_option("--data", fit_args.data, "CSV file")->required();
  fit->add_option("--outcome", fit_args.outcome, "Outcome column")->required();
  fit->add_option("--engine", fit_args.engine, "Model-building strategy");
  fit->add_option("--seed", fit_args.seed, "Master seed")->required();
  fit->add_option("--config", fit_args.config_file, "Key-value config file");
  fit->add_option("--out", fit_args.out, "Output JSON path (default model.json)");

  SimArgs sim_args;
  auto* sim = app.add_subcommand(
      "simulate", "Run the repeated-development simulation experiment");
  sim->add_option("--config", sim_args.config_file, "Key-value experiment config");
  sim->add_option("--seed", sim_args.seed, "Master seed")->required();
  sim->add_option("--out-dir", sim_args.out_dir, "Output directory (default out)");
  sim->add_option("--engine", sim_args.engine, "Override the experiment's engine");
  sim->add_option("--workers", sim_args.workers, "Worker threads (0 = all cores)");

  auto* version = app.add_subcommand("version", "Print the library version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*version) {
      std::cout << "predstab " << predstab::kVersion << "\n";
      return 0;
    }
    if (*assess) {
      if (thr_opt->count() > 0) {
        if (!(thr > 0.0 && thr < 1.0)) {
          std::cerr << "error: usage: --threshold must lie strictly in (0,1)\n";
          return 2;
        }
        assess_args.threshold = thr;
      }
      return run_assess(assess_args);
    }
    if (*fit) return run_fit(fit_args);
    if (*sim) return run_simulate(sim_args);
  } catch (const predstab::InvalidInput& e) {
    std::cerr << "error: invalid input: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

// latreg command line: simulation grid, two-method comparison, sequential
// removal, bound scan, CSV ingestion checks, and SVG rendering of result
// files. Configuration comes from an optional JSON file with flag overrides.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <CLI11.hpp>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "latreg/bound_scan.hpp"
#include "latreg/config.hpp"
#include "latreg/experiments.hpp"
#include "latreg/ingest.hpp"
#include "latreg/sequential.hpp"
#include "latreg/svg.hpp"

namespace {

using latreg::Index;
using latreg::PsiSpec;
using namespace latreg::harness;

struct CliState {
  ExperimentConfig cfg;
  std::string psi_name = "identity";
  std::string csv_path;
  std::string response;
  bool standardize = false;
  std::vector<Index> dump_psi_p;
  std::vector<Index> dump_path_p;
};

void add_common(CLI::App* sub, CliState& st) {
  sub->add_option("--seed", st.cfg.master_seed, "master seed");
  sub->add_option("--reps", st.cfg.reps, "replicates per cell");
  sub->add_option("--threads", st.cfg.threads, "worker threads (0 = all)");
  sub->add_option("--out", st.cfg.out_dir, "output directory");
  sub->add_option("--n", st.cfg.n, "sample size");
  sub->add_option("--tol", st.cfg.solver_tol, "solver tolerance");
  sub->add_flag("--timings", st.cfg.timings,
                "record wall-clock fit times (breaks byte determinism)");
}

int dispatch(const std::string& name, CliState& st) {
  st.cfg.validate();
  if (name == "illustrative") {
    const auto res = run_illustrative(st.cfg);
    std::cout << "wrote " << res.curves_path << "\nwrote " << res.summary_path
              << "\n";
    return 0;
  }
  if (name == "simulate") {
    for (Index p : st.dump_psi_p)
      for (PsiSpec::Kind k : st.cfg.psi_kinds)
        std::cout << "wrote " << dump_psi(st.cfg, k, p) << "\n";
    for (Index p : st.dump_path_p)
      for (PsiSpec::Kind k : st.cfg.psi_kinds)
        std::cout << "wrote " << dump_path_debug(st.cfg, k, p) << "\n";
    const auto res = run_main_simulation(st.cfg);
    std::cout << "wrote " << res.curves_path << "\nwrote " << res.summary_path
              << "\n";
    if (!res.skipped.empty()) {
      for (const auto& s : res.skipped)
        std::cerr << "skipped cell: " << s << "\n";
      return 2;
    }
    return 0;
  }
  if (name == "sequential") {
    if (!st.csv_path.empty()) {
      const auto ds =
          ingest_csv_dataset(st.csv_path, st.response, st.standardize);
      const auto res = run_sequential_ingested(st.cfg, ds);
      std::cout << "wrote " << res.csv_path << "\n";
    } else {
      const PsiSpec::Kind kind = latreg::psi_kind_from_name(st.psi_name);
      const Index p = st.cfg.effective_p_grid().back();
      const auto res = run_sequential_simulated(st.cfg, kind, p);
      std::cout << "wrote " << res.csv_path << "\n";
    }
    return 0;
  }
  if (name == "bound") {
    const PsiSpec::Kind kind = latreg::psi_kind_from_name(st.psi_name);
    const auto res = run_bound_scan(st.cfg, kind);
    std::cout << "wrote " << res.csv_path << "\n";
    return 0;
  }
  if (name == "ingest-check") {
    const auto ds =
        ingest_csv_dataset(st.csv_path, st.response, st.standardize);
    std::cout << "ok: " << ds.X.rows() << " rows, " << ds.X.cols()
              << " predictors, response "
              << (binary_response(ds) ? "binary" : "numeric") << "\n";
    return 0;
  }
  if (name == "plot") {
    for (const auto& path : latreg::svgplot::emit_plots(st.csv_path))
      std::cout << "wrote " << path << "\n";
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CliState st;

  // first pass: pick up --config so flags can override file values
  {
    std::string config_path;
    CLI::App pre;
    pre.allow_extras();
    pre.set_help_flag();
    for (auto* s : {"illustrative", "simulate", "sequential", "bound",
                    "ingest-check", "plot"})
      pre.add_subcommand(s)->allow_extras()->add_option("--config",
                                                        config_path);
    try {
      pre.parse(argc, argv);
    } catch (const CLI::ParseError&) {
      // full parser below reports the error
    }
    if (!config_path.empty()) {
      try {
        st.cfg = load_config(config_path);
      } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
      }
    }
  }

  CLI::App app{"latent-model regression experiments"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> psi_names;
  std::vector<Index> p_grid_override;

  auto* illustrative =
      app.add_subcommand("illustrative", "two-method comparison curves");
  add_common(illustrative, st);
  illustrative->add_option("--config", config_path, "JSON config file");
  illustrative->add_option("--test-points", st.cfg.illustrative_test_points,
                           "fresh test points per replicate");
  illustrative->add_option("--lambda2", st.cfg.elastic_net_lambda2,
                           "l2 weight of the second method");
  illustrative->add_option("--s-star", st.cfg.s_star, "summary point on [0,1]");

  auto* simulate = app.add_subcommand("simulate", "main simulation grid");
  add_common(simulate, st);
  simulate->add_option("--config", config_path, "JSON config file");
  simulate->add_option("--p-grid", p_grid_override, "p values (increasing)")
      ->delimiter(',');
  simulate->add_option("--psi", psi_names, "psi kinds to run")->delimiter(',');
  simulate->add_flag("--include-interpolation-point",
                     st.cfg.include_interpolation_point,
                     "keep the p == n cell");
  simulate->add_option("--dump-psi", st.dump_psi_p,
                       "write dense psi CSVs for these p values")
      ->delimiter(',');
  simulate->add_option("--dump-path", st.dump_path_p,
                       "write per-path debug CSVs for these p values")
      ->delimiter(',');

  auto* sequential =
      app.add_subcommand("sequential", "sequential removal procedure");
  add_common(sequential, st);
  sequential->add_option("--config", config_path, "JSON config file");
  sequential->add_option("--k", st.cfg.sequential_steps, "number of steps");
  sequential->add_option("--folds", st.cfg.cv_folds, "CV folds");
  sequential->add_option("--splits", st.cfg.test_splits,
                         "train/test splits (ingested data)");
  sequential->add_option("--psi", st.psi_name, "psi kind (simulated)");
  sequential->add_option("--psi-scale", st.cfg.psi_scale,
                         "identity psi scale (simulated)");
  sequential->add_option("--p-grid", p_grid_override,
                         "p values; the largest is used")
      ->delimiter(',');
  sequential->add_option("--csv", st.csv_path, "ingest this CSV instead");
  sequential->add_option("--response", st.response, "response column name");
  sequential->add_flag("--standardize", st.standardize,
                       "scale predictors to unit variance");

  auto* bound = app.add_subcommand("bound", "bound scan over the p grid");
  add_common(bound, st);
  bound->add_option("--config", config_path, "JSON config file");
  bound->add_option("--C", st.cfg.bound_C, "bound constant");
  bound->add_option("--t", st.cfg.bound_t, "deviation parameter");
  bound->add_option("--psi", st.psi_name, "psi kind");
  bound->add_option("--p-grid", p_grid_override, "p values (increasing)")
      ->delimiter(',');

  auto* ingest = app.add_subcommand("ingest-check", "validate a CSV dataset");
  ingest->add_option("--csv", st.csv_path, "dataset path")->required();
  ingest->add_option("--response", st.response, "response column name")
      ->required();
  ingest->add_flag("--standardize", st.standardize,
                   "scale predictors to unit variance");

  auto* plot = app.add_subcommand("plot", "render a result CSV to SVG");
  plot->add_option("--csv", st.csv_path, "result CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (!psi_names.empty()) {
    st.cfg.psi_kinds.clear();
    for (const auto& name : psi_names) {
      try {
        st.cfg.psi_kinds.push_back(latreg::psi_kind_from_name(name));
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
      }
    }
  }
  if (!p_grid_override.empty()) st.cfg.p_grid = p_grid_override;

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    return dispatch(sub, st);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

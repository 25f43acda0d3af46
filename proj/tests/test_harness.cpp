#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "latreg/bound_scan.hpp"
#include "latreg/experiments.hpp"
#include "latreg/metrics.hpp"
#include "latreg/sequential.hpp"
#include "latreg/svg.hpp"

using namespace latreg;
using namespace latreg::harness;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(const char* out_subdir) {
  ExperimentConfig cfg;
  cfg.reps = 4;
  cfg.n = 40;
  cfg.p_grid = {6, 15};
  cfg.psi_kinds = {PsiSpec::Kind::identity, PsiSpec::Kind::block_toeplitz};
  cfg.s_grid_size = 9;
  cfg.lambda_count = 20;
  cfg.threads = 2;
  cfg.out_dir =
      (std::filesystem::temp_directory_path() / out_subdir).string();
  return cfg;
}

}  // namespace

TEST_CASE("fast cell scorer agrees with the plain metric functions") {
  ExperimentConfig cfg;
  cfg.n = 50;
  for (auto kind : {PsiSpec::Kind::heteroscedastic_diag,
                    PsiSpec::Kind::random_dense}) {
    const Cell cell = make_cell(cfg, kind, 30);
    const auto ds = sample_dataset(cell.model, cfg.n, 5);
    RepScorer scorer(cell, ds.X);
    const auto path =
        lasso_path(ds.X, ds.y, default_lambda_grid(ds.X, ds.y, 15));
    for (const auto& e : path.entries) {
      const ErrorReport fast = scorer.score(e);
      const ErrorReport slow = error_report(e, cell.gamma0, ds.X, cell.model);
      CHECK(std::abs(fast.mse - slow.mse) <= 1e-9 * (1.0 + slow.mse));
      CHECK(std::abs(fast.pe - slow.pe) <= 1e-9 * (1.0 + slow.pe));
      CHECK(std::abs(fast.mse_rel - slow.mse_rel) <= 1e-9);
      CHECK(std::abs(fast.pe_rel - slow.pe_rel) <= 1e-9);
      CHECK(std::abs(fast.est_err_l2 - slow.est_err_l2) <=
            1e-9 * (1.0 + slow.est_err_l2));
      CHECK(std::abs(fast.est_err_std - slow.est_err_std) <= 1e-9);
    }
  }
}

TEST_CASE("simulation output is byte-identical across thread counts") {
  auto cfg1 = small_config("latreg_h1");
  cfg1.threads = 1;
  auto cfg4 = small_config("latreg_h2");
  cfg4.threads = 4;
  const auto r1 = run_main_simulation(cfg1, false);
  const auto r4 = run_main_simulation(cfg4, false);
  CHECK(slurp(r1.curves_path) == slurp(r4.curves_path));
  CHECK(slurp(r1.summary_path) == slurp(r4.summary_path));

  // row count: reps x s-grid x cells (no skips here)
  const auto table = io::read_csv(r1.curves_path);
  CHECK(table.rows.size() == 4u * 9u * 4u);
  CHECK(r1.skipped.empty());

  std::filesystem::remove_all(cfg1.out_dir);
  std::filesystem::remove_all(cfg4.out_dir);
}

TEST_CASE("failing cells are skipped with a note and the run continues") {
  auto cfg = small_config("latreg_h10");
  cfg.p_grid = {4, 15};  // density 0.2 degenerates at p = 4
  const auto res = run_main_simulation(cfg, false);
  CHECK(res.skipped.size() == 2);  // one per psi kind
  CHECK(res.cells.size() == 2);
  const auto table = io::read_csv(res.curves_path);
  CHECK(table.rows.size() == 4u * 9u * 2u);
  std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("interpolation point p = n is excluded from the grid by default") {
  auto cfg = small_config("latreg_h3");
  cfg.p_grid = {6, 40, 15};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);  // must be increasing
  cfg.p_grid = {6, 15, 40};
  const auto res = run_main_simulation(cfg, false, false);
  CHECK(res.cells.size() == 4);  // 2 kinds x {6, 15}, p = n = 40 dropped
}

TEST_CASE("illustrative run: both methods coincide at s = 0") {
  ExperimentConfig cfg;
  cfg.reps = 5;
  cfg.n = 60;
  cfg.s_grid_size = 5;
  cfg.lambda_count = 30;
  cfg.threads = 2;
  cfg.out_dir =
      (std::filesystem::temp_directory_path() / "latreg_h4").string();
  const auto res = run_illustrative(cfg);
  REQUIRE(res.s_grid.size() == 5);
  // s = 0 entries are the null model for both methods
  CHECK(res.lasso_pred[0] == res.enet_pred[0]);
  CHECK(res.lasso_est[0] == res.enet_est[0]);
  CHECK(res.lasso_est[0] > 0.0);

  const auto curves = io::read_csv(res.curves_path);
  CHECK(curves.rows.size() == 10);  // 2 methods x 5 grid points
  const auto summary = io::read_csv(res.summary_path);
  CHECK(summary.rows.size() == 2);
  std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("sequential removal: one step is a single CV fit, sets disjoint") {
  ExperimentConfig cfg;
  cfg.reps = 3;
  cfg.n = 50;
  cfg.sequential_steps = 3;
  cfg.cv_folds = 5;
  cfg.threads = 2;
  cfg.out_dir =
      (std::filesystem::temp_directory_path() / "latreg_h5").string();

  const auto res = run_sequential_simulated(cfg, PsiSpec::Kind::identity, 25);
  CHECK(res.all_disjoint);
  CHECK(res.steps.size() <= 3);
  CHECK(res.steps[0].step == 1);
  CHECK(res.steps[0].contributing == 3);
  CHECK(res.steps[0].active_size > 0.0);
  // removed_total accumulates the per-step active sizes
  if (res.steps.size() >= 2)
    CHECK(res.steps[1].removed_total >=
          res.steps[0].removed_total - 1e-12);

  cfg.sequential_steps = 1;
  const auto one = run_sequential_simulated(cfg, PsiSpec::Kind::identity, 25);
  CHECK(one.steps.size() == 1);
  CHECK_FALSE(one.truncated);
  std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("sequential removal truncates when columns run out") {
  ExperimentConfig cfg;
  cfg.reps = 2;
  cfg.n = 60;
  cfg.sequential_steps = 8;  // far more steps than 6 columns can serve
  cfg.cv_folds = 5;
  cfg.loading_density = 0.5;
  cfg.threads = 1;
  cfg.out_dir =
      (std::filesystem::temp_directory_path() / "latreg_h6").string();
  const auto res = run_sequential_simulated(cfg, PsiSpec::Kind::identity, 6);
  CHECK(res.truncated);
  CHECK(res.steps.size() < 8);
  CHECK(res.all_disjoint);
  std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("sequential removal on an ingested binary dataset reports AUC") {
  // synthetic binary problem: y depends on the first columns
  ExperimentConfig cfg;
  cfg.sequential_steps = 2;
  cfg.cv_folds = 4;
  cfg.test_splits = 6;
  cfg.threads = 2;
  cfg.out_dir =
      (std::filesystem::temp_directory_path() / "latreg_h7").string();

  Rng rng(9);
  const Index n = 90, p = 12;
  Dataset ds;
  ds.X.resize(n, p);
  ds.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) ds.X(i, j) = rng.normal();
    const double score = ds.X(i, 0) - ds.X(i, 1) + 0.5 * rng.normal();
    ds.y[i] = score > 0 ? 1.0 : 0.0;
  }
  const auto res = run_sequential_ingested(cfg, ds);
  CHECK(res.is_auc);
  REQUIRE(!res.steps.empty());
  CHECK(res.steps[0].contributing == 6);
  CHECK(res.steps[0].auc > 0.6);  // informative first step
  CHECK(res.all_disjoint);

  Dataset numeric = ds;
  numeric.y[0] = 0.5;
  CHECK_THROWS(run_sequential_ingested(cfg, numeric));
  std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("large-p cells never materialize a dense p x p matrix") {
  audit::reset();
  audit::set_cap(0);
  ExperimentConfig cfg;
  cfg.reps = 2;
  cfg.n = 30;
  cfg.s_grid_size = 5;
  cfg.lambda_count = 10;
  cfg.threads = 1;
  cfg.dense_limit = 64;  // tightened so the test runs fast
  // covers the structured path for both correlated kinds at p > dense_limit
  for (auto kind :
       {PsiSpec::Kind::block_toeplitz, PsiSpec::Kind::random_dense}) {
    audit::reset();
    const auto cell = run_cell(cfg, kind, 200, kScenarioSimulate, false);
    CHECK(cell.reps.size() == 2);
    CHECK(audit::largest_dense_dim().load() <= 64);
  }
  audit::set_cap(0);
}

TEST_CASE("bound scan emits one row per p >= n and the psi dump is square") {
  ExperimentConfig cfg;
  cfg.n = 30;
  cfg.p_grid = {10, 30, 60, 120};
  cfg.out_dir =
      (std::filesystem::temp_directory_path() / "latreg_h8").string();
  const auto res = run_bound_scan(cfg, PsiSpec::Kind::identity);
  REQUIRE(res.rows.size() == 2);  // p = 60, 120 (p = n excluded by default)
  CHECK(res.rows[0].p == 60);
  CHECK(res.rows[1].p == 120);
  CHECK(res.rows[0].bound > 0.0);
  CHECK(res.rows[0].confidence == doctest::Approx(1.0 - std::exp(-4.0)));

  const std::string dumped = dump_psi(cfg, PsiSpec::Kind::block_toeplitz, 9);
  const auto table = io::read_csv(dumped);
  CHECK(table.header.size() == 9);
  CHECK(table.rows.size() == 9);
  CHECK_THROWS(dump_psi(cfg, PsiSpec::Kind::identity, 5000));
  std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("plots render known schemas and reject unknown or empty input") {
  auto cfg = small_config("latreg_h9");
  const auto sim = run_main_simulation(cfg, false);
  const auto svgs = svgplot::emit_plots(sim.curves_path);
  REQUIRE(svgs.size() == 2);  // one per psi kind
  for (const auto& path : svgs) {
    const std::string text = slurp(path);
    CHECK(text.find("<svg") != std::string::npos);
    CHECK(text.find("polyline") != std::string::npos);
  }
  const auto summary_svgs = svgplot::emit_plots(sim.summary_path);
  CHECK(summary_svgs.size() == 1);

  const std::string bad =
      (std::filesystem::temp_directory_path() / "latreg_bad.csv").string();
  {
    std::ofstream out(bad);
    out << "alpha,beta\n1,2\n";
  }
  CHECK_THROWS_WITH(svgplot::emit_plots(bad), "plot: unknown csv schema");
  {
    std::ofstream out(bad);
    out << "psi_kind,p,mse_rel_sopt,pe_rel_sopt,est_err_std_s05,partial_"
           "effective_rank\n";
  }
  CHECK_THROWS_WITH(svgplot::emit_plots(bad), "plot: no data rows");
  std::remove(bad.c_str());
  std::filesystem::remove_all(cfg.out_dir);
}

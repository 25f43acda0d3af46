#pragma once

// Bound scan: for each p >= n in the grid, realize one design from the cell,
// estimate c0 as the partial effective rank of its empirical spectrum, and
// evaluate the tuned penalty and the prediction-error bound.

#include <string>
#include <vector>

#include "latreg/experiments.hpp"
#include "latreg/theory.hpp"

namespace latreg::harness {

struct BoundRow {
  Index p = 0;
  double lambda = 0.0;
  double bound = 0.0;
  double confidence = 0.0;
  double partial_effective_rank = 0.0;
};

struct BoundScanResult {
  std::vector<BoundRow> rows;
  std::string csv_path;
};

inline BoundScanResult run_bound_scan(const ExperimentConfig& cfg,
                                      PsiSpec::Kind kind,
                                      bool write_files = true) {
  cfg.validate();
  BoundScanResult res;
  for (Index p : cfg.effective_p_grid()) {
    if (p < cfg.n) continue;  // the bound needs p >= n
    const Cell cell = make_cell(cfg, kind, p);
    const auto ds = sample_dataset(
        cell.model, cfg.n,
        rep_seed(cfg, kScenarioBound, kind, p, 0, Stream::noise));
    const auto spectrum = empirical_spectrum(ds.X, cfg.m);

    BoundInputs b;
    b.C = cfg.bound_C;
    b.c0 = estimate_c0(spectrum);
    b.t = cfg.bound_t;
    b.sigma2 = cfg.sigma2;
    b.m = cfg.m;
    b.p = p;
    b.n = cfg.n;
    b.l1_gamma0 = cell.l1_gamma0;

    BoundRow row;
    row.p = p;
    row.lambda = theorem1_lambda(b);
    auto [bound, conf] = theorem1_bound(b);
    row.bound = bound;
    row.confidence = conf;
    row.partial_effective_rank = spectrum.partial_effective_rank;
    res.rows.push_back(row);
  }
  if (res.rows.empty())
    throw std::runtime_error("bound: no p >= n in the grid");

  if (write_files) {
    std::filesystem::create_directories(cfg.out_dir);
    res.csv_path = cfg.out_dir + "/bound.csv";
    io::CsvWriter w(res.csv_path, {"p", "lambda", "bound", "confidence",
                                   "partial_effective_rank"});
    for (const auto& r : res.rows)
      w.row({static_cast<std::int64_t>(r.p), r.lambda, r.bound, r.confidence,
             r.partial_effective_rank});
  }
  return res;
}

// Debug view of one penalty path: lambda, s, active-set size, objective.
inline std::string dump_path_debug(const ExperimentConfig& cfg,
                                   PsiSpec::Kind kind, Index p) {
  const Cell cell = make_cell(cfg, kind, p);
  const auto ds = sample_dataset(
      cell.model, cfg.n,
      rep_seed(cfg, kScenarioSimulate, kind, p, 0, Stream::noise));
  PathResult path;
  if (p >= cfg.n) {
    path = lasso_path_auto(ds.X, ds.y, 0.0, cfg.solver_tol,
                           cfg.solver_max_iter, cfg.lambda_count,
                           cfg.lambda_floor_ratio, true);
  } else {
    path = lasso_path(ds.X, ds.y,
                      default_lambda_grid(ds.X, ds.y, cfg.lambda_count,
                                          cfg.lambda_floor_ratio),
                      0.0, cfg.solver_tol, cfg.solver_max_iter);
    annotate_s(path, least_squares(ds.X, ds.y));
  }
  std::filesystem::create_directories(cfg.out_dir);
  const std::string out = cfg.out_dir + "/path_debug_" +
                          std::string(psi_kind_name(kind)) + "_p" +
                          std::to_string(p) + ".csv";
  io::CsvWriter w(out, {"lambda", "s", "n_active", "objective"});
  for (const auto& e : path.entries)
    w.row({e.lambda1, e.s, static_cast<std::int64_t>(e.fit.active_set.size()),
           lasso_objective(ds.X, ds.y, e.fit.gamma_hat, e.lambda1, 0.0)});
  return out;
}

// Dense dump of a realized noise covariance for inspection (small p only).
inline std::string dump_psi(const ExperimentConfig& cfg, PsiSpec::Kind kind,
                            Index p) {
  if (p > cfg.dense_limit)
    throw std::runtime_error("psi dump: p exceeds the dense limit");
  const CovMatrix psi = build_psi(make_psi_spec(cfg, kind, p));
  const MatrixXd dense = psi.to_dense();
  std::filesystem::create_directories(cfg.out_dir);
  const std::string path = cfg.out_dir + "/psi_" +
                           std::string(psi_kind_name(kind)) + "_p" +
                           std::to_string(p) + ".csv";
  std::vector<std::string> header;
  for (Index j = 0; j < p; ++j) header.push_back("c" + std::to_string(j + 1));
  io::CsvWriter w(path, header);
  for (Index i = 0; i < p; ++i) {
    std::vector<io::CsvField> row;
    for (Index j = 0; j < p; ++j) row.emplace_back(dense(i, j));
    w.row(row);
  }
  return path;
}

}  // namespace latreg::harness

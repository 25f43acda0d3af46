#pragma once

// Experiment orchestration for the simulation grid and the two-method
// comparison. A cell fixes (psi kind, p): loadings and noise covariance are
// generated once per cell, replicates redraw factors and noise. Replicates
// run in parallel with per-replicate seed streams and results are reduced in
// replicate order, so output bytes do not depend on the thread count.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "latreg/config.hpp"
#include "latreg/csv.hpp"
#include "latreg/datagen.hpp"
#include "latreg/metrics.hpp"
#include "latreg/model.hpp"
#include "latreg/rng.hpp"
#include "latreg/solver.hpp"
#include "latreg/theory.hpp"
#include "latreg/thread_pool.hpp"

namespace latreg::harness {

// scenario tags for seed-stream derivation
inline constexpr std::uint64_t kScenarioSimulate = 1;
inline constexpr std::uint64_t kScenarioIllustrative = 2;
inline constexpr std::uint64_t kScenarioSequential = 3;
inline constexpr std::uint64_t kScenarioBound = 4;
inline constexpr std::uint64_t kScenarioCalibration = 5;

inline std::uint64_t kind_tag(PsiSpec::Kind k) {
  return static_cast<std::uint64_t>(k) + 1;
}

// Loadings are shared across psi kinds at fixed p so kind comparisons see
// the same signal; psi draws depend on the kind. Explicit config seeds
// override the derived ones.
inline std::uint64_t loadings_seed(const ExperimentConfig& cfg, Index p) {
  if (cfg.loading_seed != 0) return cfg.loading_seed;
  return derive_seed(cfg.master_seed,
                     {static_cast<std::uint64_t>(Stream::loadings),
                      static_cast<std::uint64_t>(p)});
}

inline std::uint64_t psi_seed(const ExperimentConfig& cfg, PsiSpec::Kind kind,
                              Index p) {
  if (cfg.psi_seed != 0) return cfg.psi_seed;
  return derive_seed(cfg.master_seed,
                     {static_cast<std::uint64_t>(Stream::psi), kind_tag(kind),
                      static_cast<std::uint64_t>(p)});
}

inline std::uint64_t rep_seed(const ExperimentConfig& cfg,
                              std::uint64_t scenario, PsiSpec::Kind kind,
                              Index p, int rep, Stream purpose,
                              std::uint64_t extra = 0) {
  return derive_seed(cfg.master_seed,
                     {scenario, kind_tag(kind), static_cast<std::uint64_t>(p),
                      static_cast<std::uint64_t>(rep),
                      static_cast<std::uint64_t>(purpose), extra});
}

inline PsiSpec make_psi_spec(const ExperimentConfig& cfg, PsiSpec::Kind kind,
                             Index p) {
  PsiSpec spec;
  spec.kind = kind;
  spec.p = p;
  spec.seed = psi_seed(cfg, kind, p);
  spec.scale = cfg.psi_scale;
  spec.dense_limit = cfg.dense_limit;
  spec.super_block = std::min<Index>(1000, cfg.dense_limit);
  return spec;
}

// Fixed per-(kind, p) state shared by all replicates.
struct Cell {
  PsiSpec::Kind kind = PsiSpec::Kind::identity;
  LatentModelSpec model;
  VectorXd gamma0;
  double l1_gamma0 = 0.0;
  double gamma0_sq = 0.0;
  double pe0 = 0.0;             // gamma0' Sigma gamma0
  double gamma0_psi_gamma0 = 0.0;
  VectorXd psi_gamma0;          // Psi gamma0
  VectorXd a_gamma0;            // A gamma0
};

inline Cell make_cell(const ExperimentConfig& cfg, PsiSpec::Kind kind,
                      Index p) {
  Cell cell;
  cell.kind = kind;
  cell.model.m = cfg.m;
  cell.model.p = p;
  cell.model.beta = cfg.beta_vector();
  cell.model.sigma2 = cfg.sigma2;
  cell.model.A =
      generate_loadings(cfg.m, p, cfg.loading_density, loadings_seed(cfg, p));
  cell.model.psi = build_psi(make_psi_spec(cfg, kind, p));
  cell.model.validate();
  cell.gamma0 = oracle_gamma0(cell.model);
  cell.l1_gamma0 = cell.gamma0.lpNorm<1>();
  cell.gamma0_sq = cell.gamma0.squaredNorm();
  cell.psi_gamma0 = cell.model.psi.apply(cell.gamma0);
  cell.gamma0_psi_gamma0 = cell.psi_gamma0.dot(cell.gamma0);
  cell.a_gamma0 = cell.model.A * cell.gamma0;
  cell.pe0 = cell.a_gamma0.squaredNorm() + cell.gamma0_psi_gamma0;
  return cell;
}

// Scores path entries against the cell truth using the sparsity of the fit:
// O(n k + m k + k^2) per entry instead of O(n p + p^2).
class RepScorer {
 public:
  RepScorer(const Cell& cell, const MatrixXd& X)
      : cell_(cell), X_(X), x_gamma0_(X * cell.gamma0) {
    mse0_ = x_gamma0_.squaredNorm() / static_cast<double>(X.rows());
  }

  double mse0() const { return mse0_; }

  ErrorReport score(const PathEntry& entry) const {
    const auto& fit = entry.fit;
    const auto& act = fit.active_set;
    const Index n = X_.rows(), m = cell_.model.m;

    VectorXd x_gh = VectorXd::Zero(n);
    VectorXd a_gh = VectorXd::Zero(m);
    double dot_g0 = 0.0, sq = 0.0, psi_cross = 0.0;
    for (Index j : act) {
      const double c = fit.gamma_hat[j];
      x_gh.noalias() += c * X_.col(j);
      a_gh.noalias() += c * cell_.model.A.col(j);
      dot_g0 += c * cell_.gamma0[j];
      sq += c * c;
      psi_cross += c * cell_.psi_gamma0[j];
    }
    double gh_psi_gh = 0.0;
    const auto& psi = cell_.model.psi;
    if (psi.diagonal_form()) {
      for (Index j : act)
        gh_psi_gh += fit.gamma_hat[j] * fit.gamma_hat[j] * psi.diag_entries()[j];
    } else {
      for (std::size_t a = 0; a < act.size(); ++a) {
        const double ca = fit.gamma_hat[act[a]];
        gh_psi_gh += ca * ca * psi.entry(act[a], act[a]);
        for (std::size_t b = a + 1; b < act.size(); ++b)
          gh_psi_gh +=
              2.0 * ca * fit.gamma_hat[act[b]] * psi.entry(act[a], act[b]);
      }
    }

    ErrorReport r;
    r.s = entry.s;
    r.lambda1 = entry.lambda1;
    r.mse = (x_gamma0_ - x_gh).squaredNorm() / static_cast<double>(n);
    const double quad =
        cell_.gamma0_psi_gamma0 - 2.0 * psi_cross + gh_psi_gh;
    r.pe = (cell_.a_gamma0 - a_gh).squaredNorm() + std::max(0.0, quad);
    r.mse_rel = mse0_ > 0.0 ? r.mse / mse0_ : 0.0;
    r.pe_rel = cell_.pe0 > 0.0 ? r.pe / cell_.pe0 : 0.0;
    r.est_err_l2 = std::max(0.0, cell_.gamma0_sq - 2.0 * dot_g0 + sq);
    r.est_err_std =
        cell_.gamma0_sq > 0.0 ? r.est_err_l2 / cell_.gamma0_sq : 0.0;
    return r;
  }

 private:
  const Cell& cell_;
  const MatrixXd& X_;
  VectorXd x_gamma0_;
  double mse0_ = 0.0;
};

struct RepOutcome {
  std::vector<ErrorReport> at_s;   // one per s-grid point
  std::vector<int> n_active_at_s;  // active-set size at each grid point
  double s_opt = 0.0;
  ErrorReport at_sopt;
  ErrorReport at_s05;
  double partial_effective_rank = 0.0;
  double worst_kkt_recheck = 0.0;
  bool all_converged = true;
  bool support_ok = true;
  double fit_ms = 0.0;
};

struct CellResult {
  PsiSpec::Kind kind = PsiSpec::Kind::identity;
  Index p = 0;
  double l1_gamma0 = 0.0;
  std::vector<RepOutcome> reps;

  double mean_mse_rel_sopt = 0.0;
  double mean_pe_rel_sopt = 0.0;
  double mean_est_std_s05 = 0.0;
  double mean_per = 0.0;
  std::vector<double> mean_mse_rel_at_s;  // per s-grid point
};

// One replicate: sample, fit the path, score every s-grid point.
inline RepOutcome run_replicate(const ExperimentConfig& cfg, const Cell& cell,
                                std::uint64_t scenario, int rep,
                                const std::vector<double>& s_grid,
                                bool kkt_audit) {
  const Index p = cell.model.p;
  const auto ds = sample_dataset(
      cell.model, cfg.n, rep_seed(cfg, scenario, cell.kind, p, rep, Stream::noise));

  const auto t0 = std::chrono::steady_clock::now();
  PathResult path;
  if (p >= cfg.n) {
    path = lasso_path_auto(ds.X, ds.y, 0.0, cfg.solver_tol, cfg.solver_max_iter,
                           cfg.lambda_count, cfg.lambda_floor_ratio, true);
  } else {
    path = lasso_path(ds.X, ds.y,
                      default_lambda_grid(ds.X, ds.y, cfg.lambda_count,
                                          cfg.lambda_floor_ratio),
                      0.0, cfg.solver_tol, cfg.solver_max_iter);
    annotate_s(path, least_squares(ds.X, ds.y));
  }
  const auto t1 = std::chrono::steady_clock::now();

  RepOutcome out;
  out.fit_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  RepScorer scorer(cell, ds.X);
  out.at_s.reserve(s_grid.size());
  out.n_active_at_s.reserve(s_grid.size());
  for (double s : s_grid) {
    const PathEntry& e = solution_at_s(path, s);
    out.at_s.push_back(scorer.score(e));
    out.n_active_at_s.push_back(static_cast<int>(e.fit.active_set.size()));
  }
  out.at_s05 = scorer.score(solution_at_s(path, 0.5));

  const PathEntry* best = nullptr;
  ErrorReport best_report;
  for (const auto& e : path.entries) {
    ErrorReport r = scorer.score(e);
    if (!best || r.mse < best_report.mse) {
      best = &e;
      best_report = r;
    }
  }
  out.s_opt = best->s;
  out.at_sopt = best_report;

  out.partial_effective_rank =
      empirical_spectrum(ds.X, cell.model.m).partial_effective_rank;

  for (const auto& e : path.entries) {
    if (!e.fit.converged) out.all_converged = false;
    if (p > cfg.n && static_cast<Index>(e.fit.active_set.size()) > cfg.n)
      out.support_ok = false;
    if (kkt_audit && e.fit.converged) {
      const double v =
          kkt_violation(ds.X, ds.y, e.fit.gamma_hat, e.lambda1, 0.0);
      out.worst_kkt_recheck = std::max(out.worst_kkt_recheck, v);
    }
  }
  return out;
}

inline CellResult run_cell(const ExperimentConfig& cfg, PsiSpec::Kind kind,
                           Index p, std::uint64_t scenario = kScenarioSimulate,
                           bool kkt_audit = true) {
  const Cell cell = make_cell(cfg, kind, p);
  const auto s_grid = cfg.s_grid();

  CellResult res;
  res.kind = kind;
  res.p = p;
  res.l1_gamma0 = cell.l1_gamma0;
  res.reps.resize(static_cast<std::size_t>(cfg.reps));
  parallel_for(static_cast<std::size_t>(cfg.reps), cfg.threads,
               [&](std::size_t r) {
                 res.reps[r] = run_replicate(cfg, cell, scenario,
                                             static_cast<int>(r), s_grid,
                                             kkt_audit);
               });

  const double nr = static_cast<double>(cfg.reps);
  res.mean_mse_rel_at_s.assign(s_grid.size(), 0.0);
  for (const auto& rep : res.reps) {
    res.mean_mse_rel_sopt += rep.at_sopt.mse_rel / nr;
    res.mean_pe_rel_sopt += rep.at_sopt.pe_rel / nr;
    res.mean_est_std_s05 += rep.at_s05.est_err_std / nr;
    res.mean_per += rep.partial_effective_rank / nr;
    for (std::size_t i = 0; i < s_grid.size(); ++i)
      res.mean_mse_rel_at_s[i] += rep.at_s[i].mse_rel / nr;
  }
  return res;
}

struct SimulationResult {
  std::vector<CellResult> cells;
  std::vector<std::string> skipped;  // "kind/p: reason"
  std::string curves_path;
  std::string summary_path;
};

inline SimulationResult run_main_simulation(const ExperimentConfig& cfg,
                                            bool kkt_audit = true,
                                            bool write_files = true) {
  cfg.validate();
  const auto s_grid = cfg.s_grid();
  SimulationResult result;

  std::optional<io::CsvWriter> curves;
  std::optional<io::CsvWriter> summary;
  if (write_files) {
    std::filesystem::create_directories(cfg.out_dir);
    result.curves_path = cfg.out_dir + "/curves.csv";
    result.summary_path = cfg.out_dir + "/summary.csv";
    curves.emplace(result.curves_path,
                   std::vector<std::string>{
                       "scenario", "psi_kind", "p", "replicate", "s", "lambda1",
                       "mse_rel", "pe_rel", "est_err_std", "n_active",
                       "runtime_ms"});
    summary.emplace(result.summary_path,
                    std::vector<std::string>{
                        "psi_kind", "p", "mse_rel_sopt", "pe_rel_sopt",
                        "est_err_std_s05", "partial_effective_rank"});
  }

  for (PsiSpec::Kind kind : cfg.psi_kinds) {
    for (Index p : cfg.effective_p_grid()) {
      CellResult cell;
      try {
        cell = run_cell(cfg, kind, p, kScenarioSimulate, kkt_audit);
      } catch (const std::exception& e) {
        std::cerr << "warning: skipping cell " << psi_kind_name(kind) << "/p="
                  << p << ": " << e.what() << "\n";
        result.skipped.push_back(std::string(psi_kind_name(kind)) + "/p=" +
                                 std::to_string(p) + ": " + e.what());
        continue;
      }
      if (curves) {
        for (int r = 0; r < cfg.reps; ++r) {
          const auto& rep = cell.reps[static_cast<std::size_t>(r)];
          for (std::size_t i = 0; i < s_grid.size(); ++i) {
            const auto& er = rep.at_s[i];
            curves->row({std::string("simulate"),
                         std::string(psi_kind_name(kind)),
                         static_cast<std::int64_t>(p),
                         static_cast<std::int64_t>(r), s_grid[i], er.lambda1,
                         er.mse_rel, er.pe_rel, er.est_err_std,
                         static_cast<std::int64_t>(rep.n_active_at_s[i]),
                         cfg.timings ? rep.fit_ms : 0.0});
          }
        }
      }
      if (summary)
        summary->row({std::string(psi_kind_name(kind)),
                      static_cast<std::int64_t>(p), cell.mean_mse_rel_sopt,
                      cell.mean_pe_rel_sopt, cell.mean_est_std_s05,
                      cell.mean_per});
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

// Two-method comparison on the two-group generator: fit a pure-l1 path and
// an l1+l2 path on each replicate, record one fresh-draw squared prediction
// error and the squared estimation error against the carried gamma0. The l1
// path is indexed by s against the full least-squares solution (p < n); the
// l1+l2 path against its own least-penalized solution.
struct IllustrativeResult {
  std::vector<double> s_grid;
  std::vector<double> lasso_pred, lasso_est;  // means over replicates
  std::vector<double> enet_pred, enet_est;
  double s_star = 0.0;
  double lasso_pred_star = 0.0, lasso_est_star = 0.0;
  double enet_pred_star = 0.0, enet_est_star = 0.0;
  std::string curves_path, summary_path;
};

inline IllustrativeResult run_illustrative(const ExperimentConfig& cfg,
                                           bool write_files = true) {
  cfg.validate();
  const auto s_grid = cfg.s_grid();
  const std::size_t S = s_grid.size();
  const auto kind = PsiSpec::Kind::identity;  // tag for seed streams only

  struct RepRow {
    std::vector<double> lasso_pred, lasso_est, enet_pred, enet_est;
    double lasso_pred_star, lasso_est_star, enet_pred_star, enet_est_star;
  };
  std::vector<RepRow> rows(static_cast<std::size_t>(cfg.reps));

  parallel_for(static_cast<std::size_t>(cfg.reps), cfg.threads,
               [&](std::size_t r) {
    const int rep = static_cast<int>(r);
    const auto train = illustrative_dataset(
        cfg.n,
        rep_seed(cfg, kScenarioIllustrative, kind, 6, rep, Stream::noise));
    const auto test = illustrative_dataset(
        cfg.illustrative_test_points,
        rep_seed(cfg, kScenarioIllustrative, kind, 6, rep, Stream::test_draw));
    const VectorXd& gamma0 = *train.gamma0;

    const auto grid = default_lambda_grid(train.X, train.y, cfg.lambda_count,
                                          cfg.lambda_floor_ratio);
    PathResult lasso = lasso_path(train.X, train.y, grid, 0.0, cfg.solver_tol,
                                  cfg.solver_max_iter);
    annotate_s(lasso, least_squares(train.X, train.y));
    const PathResult enet =
        lasso_path(train.X, train.y, grid, cfg.elastic_net_lambda2,
                   cfg.solver_tol, cfg.solver_max_iter);

    auto pred_err = [&](const VectorXd& g) {
      return (test.y - test.X * g).squaredNorm() /
             static_cast<double>(test.y.size());
    };
    auto est_err = [&](const VectorXd& g) {
      return (gamma0 - g).squaredNorm();
    };

    RepRow& row = rows[r];
    row.lasso_pred.resize(S);
    row.lasso_est.resize(S);
    row.enet_pred.resize(S);
    row.enet_est.resize(S);
    for (std::size_t i = 0; i < S; ++i) {
      const VectorXd& gl = solution_at_s(lasso, s_grid[i]).fit.gamma_hat;
      const VectorXd& ge = solution_at_s(enet, s_grid[i]).fit.gamma_hat;
      row.lasso_pred[i] = pred_err(gl);
      row.lasso_est[i] = est_err(gl);
      row.enet_pred[i] = pred_err(ge);
      row.enet_est[i] = est_err(ge);
    }
    const VectorXd& gls = solution_at_s(lasso, cfg.s_star).fit.gamma_hat;
    const VectorXd& ges = solution_at_s(enet, cfg.s_star).fit.gamma_hat;
    row.lasso_pred_star = pred_err(gls);
    row.lasso_est_star = est_err(gls);
    row.enet_pred_star = pred_err(ges);
    row.enet_est_star = est_err(ges);
  });

  IllustrativeResult res;
  res.s_grid = s_grid;
  res.s_star = cfg.s_star;
  res.lasso_pred.assign(S, 0.0);
  res.lasso_est.assign(S, 0.0);
  res.enet_pred.assign(S, 0.0);
  res.enet_est.assign(S, 0.0);
  const double nr = static_cast<double>(cfg.reps);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < S; ++i) {
      res.lasso_pred[i] += row.lasso_pred[i] / nr;
      res.lasso_est[i] += row.lasso_est[i] / nr;
      res.enet_pred[i] += row.enet_pred[i] / nr;
      res.enet_est[i] += row.enet_est[i] / nr;
    }
    res.lasso_pred_star += row.lasso_pred_star / nr;
    res.lasso_est_star += row.lasso_est_star / nr;
    res.enet_pred_star += row.enet_pred_star / nr;
    res.enet_est_star += row.enet_est_star / nr;
  }

  if (write_files) {
    std::filesystem::create_directories(cfg.out_dir);
    res.curves_path = cfg.out_dir + "/illustrative_curves.csv";
    res.summary_path = cfg.out_dir + "/illustrative_summary.csv";
    io::CsvWriter curves(res.curves_path,
                         {"method", "s", "mean_pred_err", "mean_est_err"});
    for (std::size_t i = 0; i < S; ++i)
      curves.row({std::string("lasso"), s_grid[i], res.lasso_pred[i],
                  res.lasso_est[i]});
    for (std::size_t i = 0; i < S; ++i)
      curves.row({std::string("elastic_net"), s_grid[i], res.enet_pred[i],
                  res.enet_est[i]});
    io::CsvWriter summary(res.summary_path,
                          {"method", "s", "mean_pred_err", "mean_est_err"});
    summary.row({std::string("lasso"), res.s_star, res.lasso_pred_star,
                 res.lasso_est_star});
    summary.row({std::string("elastic_net"), res.s_star, res.enet_pred_star,
                 res.enet_est_star});
  }
  return res;
}

}  // namespace latreg::harness

#pragma once

// Sequential removal: fit a cross-validated l1 path, record the fit, delete
// the active columns, refit on what remains. Produces disjoint active sets
// by construction. Simulated sources score each step's zero-padded predictor
// against the cell truth; ingested binary sources report held-out AUC over
// seeded train/test splits.

#include <algorithm>
#include <cassert>
#include <string>
#include <vector>

#include "latreg/experiments.hpp"
#include "latreg/ingest.hpp"
#include "latreg/metrics.hpp"

namespace latreg::harness {

struct SequentialStep {
  int step = 0;  // 1-based
  double active_size = 0.0;
  double lambda_cv = 0.0;
  double mse = 0.0;
  double pe = 0.0;
  double auc = 0.0;
  double removed_total = 0.0;
  int contributing = 0;  // replicates or splits that reached this step
};

struct SequentialResult {
  std::vector<SequentialStep> steps;
  bool is_auc = false;
  bool truncated = false;  // a run exhausted its columns before K steps
  bool all_disjoint = true;
  std::string csv_path;
};

namespace detail {

struct StepFit {
  std::vector<Index> active;  // global column indices
  VectorXd gamma_full;        // zero-padded to the source dimension
  double lambda_cv = 0.0;
};

// One CV-tuned fit on the remaining columns. Returns false when no columns
// remain.
inline bool cv_step_fit(const MatrixXd& X, const VectorXd& y,
                        const std::vector<Index>& remaining,
                        const ExperimentConfig& cfg, std::uint64_t fold_seed,
                        StepFit& out) {
  if (remaining.empty()) return false;
  const Index n = X.rows();
  MatrixXd Xk(n, static_cast<Index>(remaining.size()));
  for (std::size_t j = 0; j < remaining.size(); ++j)
    Xk.col(static_cast<Index>(j)) = X.col(remaining[j]);

  std::vector<double> grid;
  try {
    grid = default_lambda_grid(Xk, y, cfg.lambda_count, cfg.lambda_floor_ratio);
  } catch (const std::invalid_argument&) {
    // X'y = 0: the null model is the only fit
    out.active.clear();
    out.gamma_full = VectorXd::Zero(X.cols());
    out.lambda_cv = 0.0;
    return true;
  }
  const auto cv =
      cross_validate(Xk, y, cfg.cv_folds, grid, 0.0, fold_seed, cfg.solver_tol,
                     cfg.solver_max_iter);

  // warm path down to the selected penalty, final entry is the fit
  std::vector<double> head;
  for (double l : grid) {
    head.push_back(l);
    if (l == cv.lambda_opt) break;
  }
  const auto path =
      lasso_path(Xk, y, head, 0.0, cfg.solver_tol, cfg.solver_max_iter);
  const FitResult& fit = path.entries.back().fit;

  out.active.clear();
  out.gamma_full = VectorXd::Zero(X.cols());
  for (Index j : fit.active_set) {
    const Index global = remaining[static_cast<std::size_t>(j)];
    out.active.push_back(global);
    out.gamma_full[global] = fit.gamma_hat[j];
  }
  out.lambda_cv = cv.lambda_opt;
  return true;
}

inline void remove_columns(std::vector<Index>& remaining,
                           const std::vector<Index>& removed) {
  if (removed.empty()) return;
  std::vector<Index> keep;
  keep.reserve(remaining.size());
  std::size_t r = 0;
  for (Index j : remaining) {
    if (r < removed.size() && removed[r] == j)
      ++r;
    else
      keep.push_back(j);
  }
  remaining.swap(keep);
}

}  // namespace detail

// Simulated sequential removal on one (psi kind, p) cell.
inline SequentialResult run_sequential_simulated(const ExperimentConfig& cfg,
                                                 PsiSpec::Kind kind, Index p,
                                                 bool write_files = true) {
  cfg.validate();
  const Cell cell = make_cell(cfg, kind, p);
  const int K = cfg.sequential_steps;

  struct RepTrace {
    std::vector<double> active_size, lambda_cv, mse, pe, removed_total;
    bool truncated = false;
    bool disjoint = true;
  };
  std::vector<RepTrace> traces(static_cast<std::size_t>(cfg.reps));

  parallel_for(static_cast<std::size_t>(cfg.reps), cfg.threads,
               [&](std::size_t r) {
    const int rep = static_cast<int>(r);
    const auto ds = sample_dataset(
        cell.model, cfg.n,
        rep_seed(cfg, kScenarioSequential, kind, p, rep, Stream::noise));
    RepScorer scorer(cell, ds.X);

    RepTrace& tr = traces[r];
    std::vector<Index> remaining(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) remaining[static_cast<std::size_t>(j)] = j;
    std::vector<bool> ever_active(static_cast<std::size_t>(p), false);
    double removed_total = 0.0;

    for (int k = 1; k <= K; ++k) {
      detail::StepFit fit;
      const std::uint64_t fold_seed =
          rep_seed(cfg, kScenarioSequential, kind, p, rep, Stream::cv_folds,
                   static_cast<std::uint64_t>(k));
      if (!detail::cv_step_fit(ds.X, ds.y, remaining, cfg, fold_seed, fit)) {
        tr.truncated = true;
        break;
      }
      for (Index j : fit.active) {
        if (ever_active[static_cast<std::size_t>(j)]) tr.disjoint = false;
        ever_active[static_cast<std::size_t>(j)] = true;
      }
      FitResult as_fit;
      as_fit.gamma_hat = fit.gamma_full;
      as_fit.active_set = fit.active;
      PathEntry entry;
      entry.fit = std::move(as_fit);
      entry.lambda1 = fit.lambda_cv;
      const ErrorReport er = scorer.score(entry);
      removed_total += static_cast<double>(fit.active.size());
      tr.active_size.push_back(static_cast<double>(fit.active.size()));
      tr.lambda_cv.push_back(fit.lambda_cv);
      tr.mse.push_back(er.mse);
      tr.pe.push_back(er.pe);
      tr.removed_total.push_back(removed_total);
      detail::remove_columns(remaining, fit.active);
      if (fit.active.empty()) break;  // nothing left to delete, stop early
    }
  });

  SequentialResult res;
  res.steps.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) res.steps[static_cast<std::size_t>(k)].step = k + 1;
  for (const auto& tr : traces) {
    if (tr.truncated) res.truncated = true;
    if (!tr.disjoint) res.all_disjoint = false;
    if (static_cast<int>(tr.mse.size()) < K) res.truncated = true;
    for (std::size_t k = 0; k < tr.mse.size(); ++k) {
      auto& st = res.steps[k];
      st.active_size += tr.active_size[k];
      st.lambda_cv += tr.lambda_cv[k];
      st.mse += tr.mse[k];
      st.pe += tr.pe[k];
      st.removed_total += tr.removed_total[k];
      st.contributing += 1;
    }
  }
  for (auto& st : res.steps) {
    if (st.contributing == 0) continue;
    const double c = static_cast<double>(st.contributing);
    st.active_size /= c;
    st.lambda_cv /= c;
    st.mse /= c;
    st.pe /= c;
    st.removed_total /= c;
  }
  while (!res.steps.empty() && res.steps.back().contributing == 0)
    res.steps.pop_back();

  if (write_files) {
    std::filesystem::create_directories(cfg.out_dir);
    res.csv_path = cfg.out_dir + "/sequential.csv";
    io::CsvWriter w(res.csv_path,
                    {"step", "active_set_size", "lambda_cv", "mse", "pe",
                     "removed_total", "reps"});
    for (const auto& st : res.steps)
      w.row({static_cast<std::int64_t>(st.step), st.active_size, st.lambda_cv,
             st.mse, st.pe, st.removed_total,
             static_cast<std::int64_t>(st.contributing)});
  }
  return res;
}

// Ingested binary-response variant: per split, run the removal sequence on
// the training part and score each step's linear predictor by AUC on the
// held-out part (2:1 train:test).
inline SequentialResult run_sequential_ingested(const ExperimentConfig& cfg,
                                                const Dataset& ds,
                                                bool write_files = true) {
  cfg.validate();
  if (!binary_response(ds))
    throw std::runtime_error("sequential: ingested response must be binary 0/1");
  const Index n = ds.X.rows(), p = ds.X.cols();
  const int K = cfg.sequential_steps;
  const Index n_train = (2 * n) / 3;
  if (n_train < cfg.cv_folds || n_train >= n)
    throw std::runtime_error("sequential: dataset too small to split");

  struct SplitTrace {
    std::vector<double> active_size, lambda_cv, auc_val, removed_total;
    bool disjoint = true;
    bool truncated = false;
  };
  std::vector<SplitTrace> traces(static_cast<std::size_t>(cfg.test_splits));

  parallel_for(static_cast<std::size_t>(cfg.test_splits), cfg.threads,
               [&](std::size_t s) {
    Rng rng(rep_seed(cfg, kScenarioSequential, PsiSpec::Kind::identity, p,
                     static_cast<int>(s), Stream::split));
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order);

    MatrixXd Xtr(n_train, p), Xte(n - n_train, p);
    VectorXd ytr(n_train);
    std::vector<int> labels(static_cast<std::size_t>(n - n_train));
    for (Index i = 0; i < n_train; ++i) {
      Xtr.row(i) = ds.X.row(order[static_cast<std::size_t>(i)]);
      ytr[i] = ds.y[order[static_cast<std::size_t>(i)]];
    }
    for (Index i = n_train; i < n; ++i) {
      Xte.row(i - n_train) = ds.X.row(order[static_cast<std::size_t>(i)]);
      labels[static_cast<std::size_t>(i - n_train)] =
          static_cast<int>(ds.y[order[static_cast<std::size_t>(i)]]);
    }

    SplitTrace& tr = traces[s];
    std::vector<Index> remaining(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) remaining[static_cast<std::size_t>(j)] = j;
    std::vector<bool> ever_active(static_cast<std::size_t>(p), false);
    double removed_total = 0.0;

    for (int k = 1; k <= K; ++k) {
      detail::StepFit fit;
      const std::uint64_t fold_seed =
          rep_seed(cfg, kScenarioSequential, PsiSpec::Kind::identity, p,
                   static_cast<int>(s), Stream::cv_folds,
                   static_cast<std::uint64_t>(k));
      if (!detail::cv_step_fit(Xtr, ytr, remaining, cfg, fold_seed, fit)) {
        tr.truncated = true;
        break;
      }
      for (Index j : fit.active) {
        if (ever_active[static_cast<std::size_t>(j)]) tr.disjoint = false;
        ever_active[static_cast<std::size_t>(j)] = true;
      }
      const VectorXd scores_v = Xte * fit.gamma_full;
      std::vector<double> scores(scores_v.data(),
                                 scores_v.data() + scores_v.size());
      removed_total += static_cast<double>(fit.active.size());
      tr.active_size.push_back(static_cast<double>(fit.active.size()));
      tr.lambda_cv.push_back(fit.lambda_cv);
      tr.auc_val.push_back(auc(scores, labels));
      tr.removed_total.push_back(removed_total);
      detail::remove_columns(remaining, fit.active);
      if (fit.active.empty()) break;
    }
  });

  SequentialResult res;
  res.is_auc = true;
  res.steps.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) res.steps[static_cast<std::size_t>(k)].step = k + 1;
  for (const auto& tr : traces) {
    if (tr.truncated) res.truncated = true;
    if (!tr.disjoint) res.all_disjoint = false;
    if (static_cast<int>(tr.auc_val.size()) < K) res.truncated = true;
    for (std::size_t k = 0; k < tr.auc_val.size(); ++k) {
      auto& st = res.steps[k];
      st.active_size += tr.active_size[k];
      st.lambda_cv += tr.lambda_cv[k];
      st.auc += tr.auc_val[k];
      st.removed_total += tr.removed_total[k];
      st.contributing += 1;
    }
  }
  for (auto& st : res.steps) {
    if (st.contributing == 0) continue;
    const double c = static_cast<double>(st.contributing);
    st.active_size /= c;
    st.lambda_cv /= c;
    st.auc /= c;
    st.removed_total /= c;
  }
  while (!res.steps.empty() && res.steps.back().contributing == 0)
    res.steps.pop_back();

  if (write_files) {
    std::filesystem::create_directories(cfg.out_dir);
    res.csv_path = cfg.out_dir + "/sequential_auc.csv";
    io::CsvWriter w(res.csv_path,
                    {"step", "active_set_size", "lambda_cv", "auc",
                     "removed_total", "splits"});
    for (const auto& st : res.steps)
      w.row({static_cast<std::int64_t>(st.step), st.active_size, st.lambda_cv,
             st.auc, st.removed_total,
             static_cast<std::int64_t>(st.contributing)});
  }
  return res;
}

}  // namespace latreg::harness

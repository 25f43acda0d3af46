#pragma once

// Cyclic coordinate descent for the penalized least-squares objective
//
//   (1/n) ||y - X g||_2^2 + lambda1 ||g||_1 + lambda2 ||g||_2^2
//
// with soft-threshold coordinate updates and a maintained residual vector.
// After the first full sweep at each penalty the solver iterates on the
// active set until stable, then verifies the KKT conditions with a full
// pass; convergence means the verified KKT residual is within tolerance.
// Paths run over a decreasing lambda grid with warm starts.

#include <Eigen/Core>
#include <Eigen/QR>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "latreg/rng.hpp"
#include "latreg/types.hpp"

namespace latreg {

struct PenaltySpec {
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  void validate() const {
    if (lambda1 < 0.0 || lambda2 < 0.0)
      throw std::invalid_argument("penalty weights must be nonnegative");
  }
};

struct FitResult {
  VectorXd gamma_hat;
  std::vector<Index> active_set;  // sorted indices of nonzero coefficients
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  long iterations = 0;  // coordinate sweeps (full and active-set)
  bool converged = false;
  double kkt_violation = 0.0;
};

struct PathEntry {
  double lambda1 = 0.0;
  FitResult fit;
  double s = 0.0;  // ||gamma||_1 / ||gamma_n||_1
};

struct PathResult {
  std::vector<PathEntry> entries;  // lambda1 strictly decreasing
  VectorXd gamma_n;                // reference solution defining s = 1
};

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

inline double lasso_objective(const MatrixXd& X, const VectorXd& y,
                              const VectorXd& gamma, double lambda1,
                              double lambda2) {
  const double n = static_cast<double>(X.rows());
  return (y - X * gamma).squaredNorm() / n + lambda1 * gamma.lpNorm<1>() +
         lambda2 * gamma.squaredNorm();
}

// Max KKT residual of the objective at gamma, recomputed from scratch:
// grad_j = (2/n) X_j'(y - X gamma) - 2 lambda2 gamma_j must lie in
// [-lambda1, lambda1], with equality at sign(gamma_j) on the active set.
inline double kkt_violation(const MatrixXd& X, const VectorXd& y,
                            const VectorXd& gamma, double lambda1,
                            double lambda2) {
  const double n = static_cast<double>(X.rows());
  const VectorXd r = y - X * gamma;
  double worst = 0.0;
  for (Index j = 0; j < X.cols(); ++j) {
    const double g = 2.0 / n * X.col(j).dot(r) - 2.0 * lambda2 * gamma[j];
    const double v = gamma[j] == 0.0
                         ? std::max(0.0, std::abs(g) - lambda1)
                         : std::abs(g - lambda1 * (gamma[j] > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

namespace detail {

struct CdWorkspace {
  VectorXd col_sq;  // (2/n) ||X_j||^2
  VectorXd resid;   // y - X gamma
};

// One sweep over the given coordinates; returns max |coefficient change|.
inline double cd_sweep(const MatrixXd& X, VectorXd& gamma, CdWorkspace& w,
                       double lambda1, double lambda2,
                       const std::vector<Index>* coords) {
  const double n = static_cast<double>(X.rows());
  const double two_over_n = 2.0 / n;
  double max_delta = 0.0;
  const Index count = coords ? static_cast<Index>(coords->size()) : X.cols();
  for (Index k = 0; k < count; ++k) {
    const Index j = coords ? (*coords)[static_cast<std::size_t>(k)] : k;
    const double aj = w.col_sq[j];
    const double denom = aj + 2.0 * lambda2;
    if (denom == 0.0) continue;  // zero column with no ridge term
    const double old = gamma[j];
    const double z = two_over_n * X.col(j).dot(w.resid) + aj * old;
    const double updated = soft_threshold(z, lambda1) / denom;
    if (updated != old) {
      w.resid.noalias() -= X.col(j) * (updated - old);
      gamma[j] = updated;
      max_delta = std::max(max_delta, std::abs(updated - old));
    }
  }
  return max_delta;
}

// KKT residual from the maintained residual vector (no updates).
inline double cd_kkt(const MatrixXd& X, const VectorXd& gamma,
                     const CdWorkspace& w, double lambda1, double lambda2) {
  const double n = static_cast<double>(X.rows());
  double worst = 0.0;
  for (Index j = 0; j < X.cols(); ++j) {
    const double g =
        2.0 / n * X.col(j).dot(w.resid) - 2.0 * lambda2 * gamma[j];
    const double v = gamma[j] == 0.0
                         ? std::max(0.0, std::abs(g) - lambda1)
                         : std::abs(g - lambda1 * (gamma[j] > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

inline std::vector<Index> nonzero_indices(const VectorXd& gamma) {
  std::vector<Index> idx;
  for (Index j = 0; j < gamma.size(); ++j)
    if (gamma[j] != 0.0) idx.push_back(j);
  return idx;
}

// Exact solve on the active face: the stationary point of the smooth
// restriction with the l1 term linearized at the current signs solves
//   (X_A'X_A/n + lambda2 I) g = X_A'y/n - (lambda1/2) sign(g_A).
// When the solution keeps every sign it is the face minimizer, reached in
// one step. When a sign would flip, step to the first zero crossing, drop
// that coordinate, and re-solve (the objective is nonincreasing along the
// segment by convexity). A pure accelerator: any accepted move lowers the
// objective, and convergence still rests on the verified KKT pass.
// Collinear active sets at small penalties converge orders of magnitude
// faster this way than by sweeps alone.
inline bool active_exact_jump(const MatrixXd& X, VectorXd& gamma,
                              CdWorkspace& w, double lambda1, double lambda2) {
  std::vector<Index> act = nonzero_indices(gamma);
  if (act.empty() || act.size() > 600) return false;
  const double n = static_cast<double>(X.rows());
  bool moved = false;

  for (int round = 0; round < 30 && !act.empty(); ++round) {
    const Index k = static_cast<Index>(act.size());
    MatrixXd Xa(X.rows(), k);
    VectorXd ga(k), sg(k);
    for (Index i = 0; i < k; ++i) {
      Xa.col(i) = X.col(act[static_cast<std::size_t>(i)]);
      ga[i] = gamma[act[static_cast<std::size_t>(i)]];
      sg[i] = ga[i] > 0.0 ? 1.0 : -1.0;
    }
    const MatrixXd gram = Xa.transpose() * Xa / n;
    // X_A'y/n recovered from the maintained residual: y = resid + X_A g_A
    const VectorXd rhs =
        Xa.transpose() * w.resid / n + gram * ga - 0.5 * lambda1 * sg;
    MatrixXd lhs = gram;
    // near-singular faces (saturated correlated designs) get a vanishing
    // Tikhonov floor; the objective gate below keeps the step honest
    const double floor =
        lambda2 > 0.0 ? lambda2
                      : 1e-10 * (gram.trace() / static_cast<double>(k));
    lhs.diagonal().array() += floor;
    Eigen::LDLT<MatrixXd> ldlt(lhs);
    if (ldlt.info() != Eigen::Success) return moved;
    const VectorXd gnew = ldlt.solve(rhs);
    if (!gnew.allFinite()) return moved;

    // step toward gnew, stopping at the first sign crossing
    double t_star = 1.0;
    for (Index i = 0; i < k; ++i) {
      if (gnew[i] * sg[i] <= 0.0) {
        const double t = ga[i] / (ga[i] - gnew[i]);
        if (t >= 0.0 && t < t_star) t_star = t;
      }
    }
    const VectorXd gstep = ga + t_star * (gnew - ga);
    const VectorXd resid_new = w.resid + Xa * (ga - gstep);
    const double obj_old = w.resid.squaredNorm() / n +
                           lambda1 * ga.lpNorm<1>() +
                           lambda2 * ga.squaredNorm();
    const double obj_new = resid_new.squaredNorm() / n +
                           lambda1 * gstep.lpNorm<1>() +
                           lambda2 * gstep.squaredNorm();
    if (!(obj_new <= obj_old + 1e-12 * std::max(1.0, std::abs(obj_old))))
      return moved;

    std::vector<Index> next;
    next.reserve(act.size());
    for (Index i = 0; i < k; ++i) {
      const Index j = act[static_cast<std::size_t>(i)];
      const double v =
          (t_star < 1.0 && std::abs(gstep[i]) < 1e-14) ? 0.0 : gstep[i];
      gamma[j] = v;
      if (v != 0.0) next.push_back(j);
    }
    w.resid = resid_new;
    moved = true;
    if (t_star >= 1.0) return true;  // reached the face minimizer
    act.swap(next);
  }
  return moved;
}

// Core loop. gamma holds the init on entry and the solution on exit;
// w.resid must match gamma on entry.
inline FitResult cd_solve(const MatrixXd& X, VectorXd& gamma, CdWorkspace& w,
                          double lambda1, double lambda2, double tol,
                          long max_iter) {
  FitResult res;
  res.lambda1 = lambda1;
  res.lambda2 = lambda2;
  long sweeps = 0;
  double viol = std::numeric_limits<double>::infinity();
#ifndef NDEBUG
  double prev_obj = std::numeric_limits<double>::infinity();
#endif
  while (sweeps < max_iter) {
    double delta = cd_sweep(X, gamma, w, lambda1, lambda2, nullptr);
    ++sweeps;
#ifndef NDEBUG
    {
      const double n = static_cast<double>(X.rows());
      const double obj = w.resid.squaredNorm() / n +
                         lambda1 * gamma.lpNorm<1>() +
                         lambda2 * gamma.squaredNorm();
      assert(obj <= prev_obj + 1e-10 * std::max(1.0, std::abs(prev_obj)));
      prev_obj = obj;
    }
#endif
    if (delta > tol && sweeps < max_iter) {
      std::vector<Index> active = nonzero_indices(gamma);
      int since_jump = 0, interval = 4;
      while (delta > tol && sweeps < max_iter && !active.empty()) {
        delta = cd_sweep(X, gamma, w, lambda1, lambda2, &active);
        ++sweeps;
        if (delta > tol && ++since_jump >= interval) {
          since_jump = 0;
          if (active_exact_jump(X, gamma, w, lambda1, lambda2))
            interval = 4;
          else
            interval = std::min(64, interval * 2);
        }
      }
    }
    viol = cd_kkt(X, gamma, w, lambda1, lambda2);
    if (viol <= tol) break;
  }
  res.iterations = sweeps;
  res.kkt_violation = viol;
  res.converged = viol <= tol;
  res.gamma_hat = gamma;
  res.active_set = nonzero_indices(gamma);
  return res;
}

inline void check_finite(const MatrixXd& X, const VectorXd& y) {
  if (X.rows() != y.size())
    throw std::invalid_argument("solver: X rows must match y length");
  if (X.rows() < 1 || X.cols() < 1)
    throw std::invalid_argument("solver: empty problem");
  if (!X.allFinite() || !y.allFinite())
    throw std::invalid_argument("solver: non-finite input");
}

}  // namespace detail

inline FitResult lasso_fit(const MatrixXd& X, const VectorXd& y,
                           const PenaltySpec& penalty,
                           const std::optional<VectorXd>& init = std::nullopt,
                           double tol = 1e-7, long max_iter = 100000) {
  detail::check_finite(X, y);
  penalty.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("solver: tol must be > 0");
  if (init && init->size() != X.cols())
    throw std::invalid_argument("solver: init length must be p");

  VectorXd gamma = init ? *init : VectorXd::Zero(X.cols());
  detail::CdWorkspace w;
  const double n = static_cast<double>(X.rows());
  w.col_sq = 2.0 / n * X.colwise().squaredNorm();
  w.resid = y - X * gamma;
  return detail::cd_solve(X, gamma, w, penalty.lambda1, penalty.lambda2, tol,
                          max_iter);
}

// lambda_max = (2/n) ||X'y||_inf kills every coordinate; the default grid is
// `count` log-spaced values from lambda_max down to floor_ratio * lambda_max.
inline double lambda_max(const MatrixXd& X, const VectorXd& y) {
  return 2.0 / static_cast<double>(X.rows()) *
         (X.transpose() * y).cwiseAbs().maxCoeff();
}

inline std::vector<double> default_lambda_grid(const MatrixXd& X,
                                               const VectorXd& y,
                                               int count = 100,
                                               double floor_ratio = 1e-3) {
  if (count < 1) throw std::invalid_argument("lambda grid: count must be >= 1");
  const double top = lambda_max(X, y);
  if (!(top > 0.0))
    throw std::invalid_argument("lambda grid: X'y is zero");
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = top;
    return grid;
  }
  const double step = std::log(floor_ratio) / static_cast<double>(count - 1);
  for (int i = 0; i < count; ++i)
    grid[static_cast<std::size_t>(i)] = top * std::exp(step * i);
  return grid;
}

// Recompute the s coordinate of every entry against a reference solution
// (the final path solution by default; OLS for underdetermined designs).
inline void annotate_s(PathResult& path, const VectorXd& gamma_n) {
  path.gamma_n = gamma_n;
  const double denom = gamma_n.lpNorm<1>();
  for (auto& e : path.entries) {
    const double s =
        denom > 0.0 ? e.fit.gamma_hat.lpNorm<1>() / denom : 0.0;
    e.s = std::clamp(s, 0.0, 1.0);
  }
}

inline PathResult lasso_path(const MatrixXd& X, const VectorXd& y,
                             const std::vector<double>& lambdas,
                             double lambda2 = 0.0, double tol = 1e-7,
                             long max_iter = 100000) {
  detail::check_finite(X, y);
  if (lambdas.empty()) throw std::invalid_argument("lasso_path: empty grid");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0))
      throw std::invalid_argument("lasso_path: lambdas must be positive");
    if (i > 0 && !(lambdas[i] < lambdas[i - 1]))
      throw std::invalid_argument("lasso_path: lambdas must be strictly decreasing");
  }
  if (lambda2 < 0.0)
    throw std::invalid_argument("lasso_path: lambda2 must be nonnegative");

  PathResult path;
  path.entries.reserve(lambdas.size());
  VectorXd gamma = VectorXd::Zero(X.cols());
  detail::CdWorkspace w;
  const double n = static_cast<double>(X.rows());
  w.col_sq = 2.0 / n * X.colwise().squaredNorm();
  w.resid = y;
  // For p > n pure-l1 paths the exact solution never selects more than n
  // variables; once the support saturates the path stops (smaller penalties
  // only chase numerical ghosts past that point).
  const bool cap_support = lambda2 == 0.0 && X.cols() > X.rows();
  for (double l1 : lambdas) {
    PathEntry e;
    e.lambda1 = l1;
    e.fit = detail::cd_solve(X, gamma, w, l1, lambda2, tol, max_iter);
    const auto support = static_cast<Index>(e.fit.active_set.size());
    if (cap_support && support > X.rows()) break;  // numerical overshoot
    path.entries.push_back(std::move(e));
    if (cap_support && support >= X.rows()) break;  // saturated
  }
  if (path.entries.empty())
    throw std::runtime_error("lasso_path: no usable grid point");
  annotate_s(path, path.entries.back().fit.gamma_hat);
  return path;
}

// Path over the default grid. When the active set has not plateaued at the
// grid floor (within 1 of min(n-1, p), or unchanged over the last 5 points)
// the floor is lowered once by another decade, continuing the warm starts.
inline PathResult lasso_path_auto(const MatrixXd& X, const VectorXd& y,
                                  double lambda2 = 0.0, double tol = 1e-7,
                                  long max_iter = 100000, int grid_count = 100,
                                  double floor_ratio = 1e-3,
                                  bool extend_for_plateau = true) {
  std::vector<double> grid = default_lambda_grid(X, y, grid_count, floor_ratio);
  PathResult path = lasso_path(X, y, grid, lambda2, tol, max_iter);
  if (!extend_for_plateau) return path;

  const auto saturation = static_cast<std::size_t>(
      std::min<Index>(X.rows() - 1, X.cols()));
  auto plateaued = [&](const PathResult& pr) {
    const std::size_t last = pr.entries.back().fit.active_set.size();
    if (last + 1 >= saturation) return true;
    if (pr.entries.size() < 5) return false;
    for (std::size_t i = pr.entries.size() - 5; i < pr.entries.size(); ++i)
      if (pr.entries[i].fit.active_set.size() != last) return false;
    return true;
  };
  if (plateaued(path)) return path;

  // one extra decade at the same log density
  const int extra = std::max(2, grid_count / 3);
  const double lo = grid.back();
  const double step = std::log(0.1) / static_cast<double>(extra);
  for (int i = 1; i <= extra; ++i) grid.push_back(lo * std::exp(step * i));
  return lasso_path(X, y, grid, lambda2, tol, max_iter);
}

// Nearest-s path entry; ties resolved toward smaller lambda.
inline const PathEntry& solution_at_s(const PathResult& path, double s_target) {
  if (path.entries.empty())
    throw std::invalid_argument("solution_at_s: empty path");
  const PathEntry* best = &path.entries.front();
  double best_dist = std::abs(best->s - s_target);
  for (const auto& e : path.entries) {
    const double d = std::abs(e.s - s_target);
    if (d <= best_dist) {  // later entries have smaller lambda
      best = &e;
      best_dist = d;
    }
  }
  return *best;
}

// Unique least-squares solution for p <= n designs (the s = 1 reference when
// the design is overdetermined).
inline VectorXd least_squares(const MatrixXd& X, const VectorXd& y) {
  detail::check_finite(X, y);
  return X.colPivHouseholderQr().solve(y);
}

struct CvPoint {
  double lambda = 0.0;
  double mean_mse = 0.0;
  double se = 0.0;
};

struct CvResult {
  double lambda_opt = 0.0;
  std::vector<CvPoint> curve;
};

// K-fold cross-validation over a decreasing lambda grid. Fold assignment is
// a seeded shuffle with near-equal fold sizes; lambda_opt minimizes the mean
// held-out squared error, ties resolved toward larger lambda.
inline CvResult cross_validate(const MatrixXd& X, const VectorXd& y, int folds,
                               const std::vector<double>& lambdas,
                               double lambda2, std::uint64_t seed,
                               double tol = 1e-7, long max_iter = 100000) {
  detail::check_finite(X, y);
  const Index n = X.rows();
  if (folds < 2) throw std::invalid_argument("cross_validate: folds must be >= 2");
  if (n < folds)
    throw std::invalid_argument("cross_validate: fewer than 2 nonempty folds");
  if (lambdas.empty()) throw std::invalid_argument("cross_validate: empty grid");

  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(perm);
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < perm.size(); ++k)
    fold_of[static_cast<std::size_t>(perm[k])] = static_cast<int>(k % folds);

  const std::size_t L = lambdas.size();
  MatrixXd fold_mse(folds, static_cast<Index>(L));
  for (int f = 0; f < folds; ++f) {
    std::vector<Index> train, test;
    for (Index i = 0; i < n; ++i)
      (fold_of[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    MatrixXd Xt(static_cast<Index>(train.size()), X.cols());
    VectorXd yt(static_cast<Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) {
      Xt.row(static_cast<Index>(i)) = X.row(train[i]);
      yt[static_cast<Index>(i)] = y[train[i]];
    }
    PathResult path = lasso_path(Xt, yt, lambdas, lambda2, tol, max_iter);
    for (std::size_t l = 0; l < L; ++l) {
      double sse = 0.0;
      // saturated paths stop early; the last fit stands in for smaller lambdas
      const VectorXd& g =
          path.entries[std::min(l, path.entries.size() - 1)].fit.gamma_hat;
      for (Index i : test) {
        const double err = y[i] - X.row(i).dot(g);
        sse += err * err;
      }
      fold_mse(f, static_cast<Index>(l)) =
          sse / static_cast<double>(test.size());
    }
  }

  CvResult out;
  out.curve.resize(L);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < L; ++l) {
    const auto col = fold_mse.col(static_cast<Index>(l));
    const double mean = col.mean();
    const double var =
        (col.array() - mean).square().sum() / static_cast<double>(folds - 1);
    out.curve[l] = {lambdas[l], mean,
                    std::sqrt(var / static_cast<double>(folds))};
    if (mean < best) {  // strict: ties keep the larger (earlier) lambda
      best = mean;
      out.lambda_opt = lambdas[l];
    }
  }
  return out;
}

}  // namespace latreg

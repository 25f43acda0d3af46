#pragma once

// Shared test-side oracles, written independently of the library solver:
// a plain-loop objective, a brute-force grid-search minimizer, and a
// from-scratch KKT check.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "latreg/types.hpp"

namespace latreg::testsupport {

inline double objective(const MatrixXd& X, const VectorXd& y,
                        const VectorXd& g, double l1, double l2) {
  double rss = 0.0;
  for (Index i = 0; i < X.rows(); ++i) {
    double pred = 0.0;
    for (Index j = 0; j < X.cols(); ++j) pred += X(i, j) * g[j];
    const double e = y[i] - pred;
    rss += e * e;
  }
  double pen = 0.0;
  for (Index j = 0; j < X.cols(); ++j)
    pen += l1 * std::abs(g[j]) + l2 * g[j] * g[j];
  return rss / static_cast<double>(X.rows()) + pen;
}

// Iteratively refined grid search; the center stays on the grid so exact
// zeros survive refinement.
inline VectorXd grid_search_minimizer(const MatrixXd& X, const VectorXd& y,
                                      double l1, double l2,
                                      double final_step = 1e-6) {
  const Index p = X.cols();
  VectorXd center = VectorXd::Zero(p);
  double width =
      1.0 + 2.0 * (X.colPivHouseholderQr().solve(y)).cwiseAbs().maxCoeff();
  const int half = 6;
  VectorXd best = center;
  double best_obj = objective(X, y, center, l1, l2);
  while (width / half > final_step) {
    const double step = width / half;
    std::vector<int> ticks(static_cast<std::size_t>(p), -half);
    VectorXd probe(p);
    bool carry = false;
    while (!carry) {
      for (Index j = 0; j < p; ++j)
        probe[j] = center[j] + step * ticks[static_cast<std::size_t>(j)];
      const double o = objective(X, y, probe, l1, l2);
      if (o < best_obj) {
        best_obj = o;
        best = probe;
      }
      Index j = 0;
      for (; j < p; ++j) {
        auto& t = ticks[static_cast<std::size_t>(j)];
        if (++t <= half) break;
        t = -half;
      }
      carry = j == p;
    }
    center = best;
    width = 2.0 * step;
  }
  return best;
}

inline double recheck_kkt(const MatrixXd& X, const VectorXd& y,
                          const VectorXd& g, double l1, double l2) {
  const double n = static_cast<double>(X.rows());
  VectorXd resid = y;
  for (Index j = 0; j < X.cols(); ++j) resid -= X.col(j) * g[j];
  double worst = 0.0;
  for (Index j = 0; j < X.cols(); ++j) {
    const double grad = 2.0 / n * X.col(j).dot(resid) - 2.0 * l2 * g[j];
    double v;
    if (g[j] > 0.0)
      v = std::abs(grad - l1);
    else if (g[j] < 0.0)
      v = std::abs(grad + l1);
    else
      v = std::max(0.0, std::abs(grad) - l1);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace latreg::testsupport

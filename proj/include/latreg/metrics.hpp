#pragma once

// Prediction and estimation error functionals. In-sample MSE is the
// fixed-design excess risk (1/n)||X(gamma0 - gamma)||^2; PE is its
// random-design counterpart (gamma0 - gamma)'(A'A + Psi)(gamma0 - gamma),
// evaluated in factored form. Relative errors use the null model gamma = 0
// as the denominator. AUC is the rank-based Mann-Whitney statistic with
// midrank tie handling.

#include <Eigen/Core>
#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "latreg/model.hpp"
#include "latreg/solver.hpp"
#include "latreg/types.hpp"

namespace latreg {

struct ErrorReport {
  double mse = 0.0;
  double pe = 0.0;
  double mse_rel = 0.0;
  double pe_rel = 0.0;
  double est_err_l2 = 0.0;
  double est_err_std = 0.0;
  double s = 0.0;
  double lambda1 = 0.0;
};

inline double mse_in_sample(const VectorXd& gamma_hat, const VectorXd& gamma0,
                            const MatrixXd& X) {
  if (gamma_hat.size() != X.cols() || gamma0.size() != X.cols())
    throw std::invalid_argument("mse_in_sample: dimension mismatch");
  return (X * (gamma0 - gamma_hat)).squaredNorm() /
         static_cast<double>(X.rows());
}

inline double pe_out_sample(const VectorXd& gamma_hat, const VectorXd& gamma0,
                            const LatentModelSpec& model) {
  if (gamma_hat.size() != model.p || gamma0.size() != model.p)
    throw std::invalid_argument("pe_out_sample: dimension mismatch");
  return sigma_quad_form(model, gamma0 - gamma_hat);
}

// (raw squared l2 error, ratio to ||gamma0||^2)
inline std::pair<double, double> estimation_errors(const VectorXd& gamma_hat,
                                                   const VectorXd& gamma0) {
  if (gamma_hat.size() != gamma0.size())
    throw std::invalid_argument("estimation_errors: dimension mismatch");
  const double denom = gamma0.squaredNorm();
  if (denom == 0.0)
    throw std::invalid_argument("estimation_errors: gamma0 is zero");
  const double l2 = (gamma_hat - gamma0).squaredNorm();
  return {l2, l2 / denom};
}

inline ErrorReport error_report(const PathEntry& entry, const VectorXd& gamma0,
                                const MatrixXd& X,
                                const LatentModelSpec& model) {
  ErrorReport r;
  r.s = entry.s;
  r.lambda1 = entry.lambda1;
  r.mse = mse_in_sample(entry.fit.gamma_hat, gamma0, X);
  r.pe = pe_out_sample(entry.fit.gamma_hat, gamma0, model);
  const double mse0 = (X * gamma0).squaredNorm() / static_cast<double>(X.rows());
  const double pe0 = sigma_quad_form(model, gamma0);
  r.mse_rel = mse0 > 0.0 ? r.mse / mse0 : 0.0;
  r.pe_rel = pe0 > 0.0 ? r.pe / pe0 : 0.0;
  auto [l2, std_err] = estimation_errors(entry.fit.gamma_hat, gamma0);
  r.est_err_l2 = l2;
  r.est_err_std = std_err;
  return r;
}

// Path entry minimizing relative in-sample MSE (ties toward smaller s).
inline std::pair<double, ErrorReport> optimal_s(const PathResult& path,
                                                const VectorXd& gamma0,
                                                const MatrixXd& X,
                                                const LatentModelSpec& model) {
  if (path.entries.empty())
    throw std::invalid_argument("optimal_s: empty path");
  const PathEntry* best = nullptr;
  double best_mse = 0.0;
  for (const auto& e : path.entries) {
    const double m = mse_in_sample(e.fit.gamma_hat, gamma0, X);
    if (!best || m < best_mse) {  // strict: earlier entries have smaller s
      best = &e;
      best_mse = m;
    }
  }
  return {best->s, error_report(*best, gamma0, X, model)};
}

// Mann-Whitney AUC with midrank tie handling; labels must contain both classes.
inline double auc(const std::vector<double>& scores,
                  const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1)
      throw std::invalid_argument("auc: labels must be 0 or 1");
    n_pos += static_cast<std::size_t>(l);
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("auc: both classes must be present");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // midranks over tie groups, summed for the positive class
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]] == 1) rank_sum_pos += midrank;
    i = j + 1;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

}  // namespace latreg

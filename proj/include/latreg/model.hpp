#pragma once

// Joint latent variable model: y = beta'f + eps, x = A'f + e, with
// Var(e) = Psi, Var(eps) = sigma2. Population quantities derived from it:
// the best linear predictor coefficient gamma0, the covariance A'A + Psi,
// and the conditional noise variance of y given x.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "latreg/alloc_guard.hpp"
#include "latreg/covariance.hpp"

namespace latreg {

struct LatentModelSpec {
  Index m = 0;         // latent factors
  Index p = 0;         // observed predictors
  VectorXd beta;       // length m
  MatrixXd A;          // m x p loadings
  double sigma2 = 0.0; // Var(eps)
  CovMatrix psi;       // p x p noise covariance

  // Numerical full-rank proxy for the pervasiveness assumption:
  // smallest singular value of A / sqrt(p) must exceed this.
  static constexpr double rank_tol = 1e-8;

  void validate() const {
    if (m < 1 || p < 1) throw std::invalid_argument("model: m, p must be >= 1");
    if (beta.size() != m) throw std::invalid_argument("model: beta length != m");
    if (A.rows() != m || A.cols() != p)
      throw std::invalid_argument("model: A must be m x p");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("model: sigma2 must be > 0");
    if (psi.dim() != p) throw std::invalid_argument("model: psi dim != p");
    // sigma_min(A) = sqrt(lambda_min(A A')), A A' is m x m
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(A * A.transpose(),
                                               Eigen::EigenvaluesOnly);
    const double smin = std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()));
    if (smin <= rank_tol * std::sqrt(static_cast<double>(p)))
      throw std::invalid_argument("model: loadings not numerically full rank");
  }
};

struct OracleQuantities {
  VectorXd gamma0;       // length p
  double l1_norm_gamma0 = 0.0;
  double sigma_cond2 = 0.0;  // Var(y | x)
};

namespace detail {

// Solves (A Psi^{-1} A' + I) u = beta; returns (u, Psi^{-1} A').
inline std::pair<VectorXd, MatrixXd> woodbury_core(const LatentModelSpec& mod) {
  const MatrixXd psi_inv_At = mod.psi.solve_cols(mod.A.transpose());  // p x m
  MatrixXd small = mod.A * psi_inv_At;                                // m x m
  small.diagonal().array() += 1.0;
  Eigen::LDLT<MatrixXd> ldlt(small);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("model: inner m x m system is singular");
  return {ldlt.solve(mod.beta), psi_inv_At};
}

}  // namespace detail

// gamma0 = (A'A + Psi)^{-1} A' beta, computed as Psi^{-1}A'(A Psi^{-1}A' + I)^{-1} beta
// so only an m x m system and Psi solves are needed.
inline VectorXd oracle_gamma0(const LatentModelSpec& mod) {
  auto [u, psi_inv_At] = detail::woodbury_core(mod);
  return psi_inv_At * u;
}

// Var(y | x) = beta'(A Psi^{-1} A' + I)^{-1} beta + sigma2
inline double conditional_noise_variance(const LatentModelSpec& mod) {
  auto [u, psi_inv_At] = detail::woodbury_core(mod);
  (void)psi_inv_At;
  return mod.beta.dot(u) + mod.sigma2;
}

inline double l1_norm_gamma0(const LatentModelSpec& mod) {
  return oracle_gamma0(mod).lpNorm<1>();
}

inline OracleQuantities oracle_quantities(const LatentModelSpec& mod) {
  auto [u, psi_inv_At] = detail::woodbury_core(mod);
  OracleQuantities q;
  q.gamma0 = psi_inv_At * u;
  q.l1_norm_gamma0 = q.gamma0.lpNorm<1>();
  q.sigma_cond2 = mod.beta.dot(u) + mod.sigma2;
  return q;
}

// Dense Sigma = A'A + Psi. Materializes a p x p matrix; audited, so callers
// must accept O(p^2) storage. Large-p metrics use the factored form instead.
inline MatrixXd population_covariance(const LatentModelSpec& mod) {
  audit::note_dense(mod.p, mod.p);
  MatrixXd sigma = mod.A.transpose() * mod.A;
  sigma += mod.psi.to_dense();
  return sigma;
}

// Sigma-quadratic form d'(A'A + Psi)d without forming Sigma.
inline double sigma_quad_form(const LatentModelSpec& mod, const VectorXd& d) {
  return (mod.A * d).squaredNorm() + mod.psi.quad_form(d);
}

}  // namespace latreg

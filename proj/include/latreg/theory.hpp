#pragma once

// Spectral diagnostics and prediction-error bounds. The empirical spectrum
// of X'X/n is computed through the n x n Gram matrix when p > n (identical
// nonzero eigenvalues). The partial effective rank summarizes the decay of
// the non-spiked part of the spectrum and doubles as the default c0 input
// for the bound formulas.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "latreg/types.hpp"

namespace latreg {

struct SpectrumReport {
  VectorXd eigenvalues;  // nonincreasing, clamped at 0
  Index m = 0;           // spike count used
  Index p = 0;           // ambient dimension
  double partial_effective_rank = 0.0;
  double spike_ratio_c0 = 0.0;  // p * w_{m+1} / w_1
};

inline SpectrumReport empirical_spectrum(const MatrixXd& X, Index m) {
  const Index n = X.rows(), p = X.cols();
  if (n < 1 || p < 1) throw std::invalid_argument("empirical_spectrum: empty X");
  if (m < 0) throw std::invalid_argument("empirical_spectrum: m must be >= 0");
  if (m >= n) throw std::invalid_argument("spike count exceeds sample rank");

  MatrixXd gram;
  if (p > n)
    gram = X * X.transpose() / static_cast<double>(n);
  else
    gram = X.transpose() * X / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  VectorXd lam = es.eigenvalues().reverse();
  for (Index i = 0; i < lam.size(); ++i)
    if (lam[i] < 1e-10) lam[i] = 0.0;

  SpectrumReport rep;
  rep.m = m;
  rep.p = p;
  rep.eigenvalues = lam;
  const Index upto = std::min(n, lam.size());
  if (lam[0] > 0.0) {
    double tail = 0.0;
    for (Index j = m; j < upto; ++j) tail += lam[j];  // w_{m+1}..w_n
    rep.partial_effective_rank = tail / lam[0];
    if (m < lam.size())
      rep.spike_ratio_c0 = static_cast<double>(p) * lam[m] / lam[0];
  }
  return rep;
}

struct BoundInputs {
  double C = 1.0;       // unspecified constant, calibrated or overridden
  double c0 = 1.0;
  double t = 1.0;
  double sigma2 = 1.0;
  Index m = 0;
  Index p = 0;
  Index n = 0;
  double l1_gamma0 = 0.0;

  void validate() const {
    if (!(C > 0.0) || !(c0 > 0.0) || !(t > 0.0) || !(sigma2 > 0.0))
      throw std::invalid_argument("bound inputs: C, c0, t, sigma2 must be > 0");
    if (m < 0 || n < 1) throw std::invalid_argument("bound inputs: bad m or n");
    if (p < n) throw std::invalid_argument("Theorem 1 requires p >= n");
    if (static_cast<double>(p) < c0)
      throw std::invalid_argument("bound inputs: requires p >= c0");
    if (l1_gamma0 < 0.0)
      throw std::invalid_argument("bound inputs: l1_gamma0 must be >= 0");
  }
};

// MSE <= (2/n) lambda ||gamma0||_1, valid for arbitrary designs.
inline double simple_bound(double lambda1, double l1_gamma0, Index n) {
  if (lambda1 < 0.0 || l1_gamma0 < 0.0 || n < 1)
    throw std::invalid_argument("simple_bound: inputs must be nonnegative, n >= 1");
  return 2.0 / static_cast<double>(n) * lambda1 * l1_gamma0;
}

namespace detail {
inline double bound_base(const BoundInputs& b) {
  const double root =
      std::sqrt(static_cast<double>(b.m) + b.c0 / static_cast<double>(b.p));
  return std::pow(b.C * b.sigma2 * (root / (std::sqrt(2.0) - 1.0) + b.t),
                  4.0 / 3.0);
}
}  // namespace detail

// lambda = [C sigma^2 ((m + c0/p)^{1/2} / (sqrt(2)-1) + t)]^{4/3} ||gamma0||_1^{-1/3}
inline double theorem1_lambda(const BoundInputs& b) {
  b.validate();
  if (!(b.l1_gamma0 > 0.0))
    throw std::invalid_argument("theorem1_lambda: l1_gamma0 must be > 0");
  return detail::bound_base(b) * std::pow(b.l1_gamma0, -1.0 / 3.0);
}

// bound = (21/(2n)) [C sigma^2 (...)]^{4/3} ||gamma0||_1^{2/3},
// holding with probability at least 1 - exp(-t^2).
inline std::pair<double, double> theorem1_bound(const BoundInputs& b) {
  b.validate();
  const double bound = 21.0 / (2.0 * static_cast<double>(b.n)) *
                       detail::bound_base(b) * std::pow(b.l1_gamma0, 2.0 / 3.0);
  return {bound, 1.0 - std::exp(-b.t * b.t)};
}

// Default c0 heuristic: the partial effective rank of the realized design.
inline double estimate_c0(const SpectrumReport& spectrum) {
  if (spectrum.eigenvalues.size() == 0 || spectrum.eigenvalues[0] <= 0.0)
    throw std::invalid_argument("estimate_c0: leading eigenvalue is zero");
  return spectrum.partial_effective_rank;
}

}  // namespace latreg

#pragma once

// Generators: sparse pervasive loading matrices, the four noise-covariance
// recipes, and i.i.d. sampling from the latent model. Everything is a pure
// function of (spec, seed).
//
// For the correlated covariance kinds the exact recipe (including the
// eigenvalue clip) is applied densely when p fits under the dense limit.
// Above the limit the recipe is applied per contiguous super-block so that
// no p x p matrix is ever materialized; entries across super-blocks are zero.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "latreg/covariance.hpp"
#include "latreg/model.hpp"
#include "latreg/rng.hpp"

namespace latreg {

struct PsiSpec {
  enum class Kind { identity, heteroscedastic_diag, block_toeplitz, random_dense };

  Kind kind = Kind::identity;
  Index p = 0;
  std::uint64_t seed = 0;

  double scale = 1.0;  // identity: Psi = scale * I

  double low_var_min = 0.01, low_var_max = 0.1;   // heteroscedastic halves
  double high_var_min = 0.5, high_var_max = 2.0;

  double within_rho = 0.8;   // Toeplitz base within blocks
  double between_rho = 0.1;  // constant between blocks
  double clip_min = 0.1, clip_max = 3.0;

  // Above this p the recipe switches to the block-structured form. The
  // working super-block size is capped lower to keep eigensolves cheap.
  Index dense_limit = 2000;
  Index super_block = 1000;
};

inline const char* psi_kind_name(PsiSpec::Kind k) {
  switch (k) {
    case PsiSpec::Kind::identity: return "identity";
    case PsiSpec::Kind::heteroscedastic_diag: return "heteroscedastic_diag";
    case PsiSpec::Kind::block_toeplitz: return "block_toeplitz";
    case PsiSpec::Kind::random_dense: return "random_dense";
  }
  return "?";
}

inline PsiSpec::Kind psi_kind_from_name(const std::string& s) {
  if (s == "identity") return PsiSpec::Kind::identity;
  if (s == "heteroscedastic_diag") return PsiSpec::Kind::heteroscedastic_diag;
  if (s == "block_toeplitz") return PsiSpec::Kind::block_toeplitz;
  if (s == "random_dense") return PsiSpec::Kind::random_dense;
  throw std::invalid_argument("unknown psi kind: " + s);
}

struct Dataset {
  MatrixXd X;  // n x p
  VectorXd y;  // n
  std::optional<MatrixXd> factors;  // n x m
  std::optional<VectorXd> gamma0;   // carried for scoring
};

// Each row gets exactly round(density * p) nonzero positions drawn uniformly
// without replacement, values i.i.d. Uniform(-1, 1).
inline MatrixXd generate_loadings(Index m, Index p, double density,
                                  std::uint64_t seed) {
  if (m < 1 || p < 1) throw std::invalid_argument("loadings: m, p must be >= 1");
  if (!(density > 0.0) || density > 1.0)
    throw std::invalid_argument("loadings: density must be in (0, 1]");
  if (density * static_cast<double>(p) < 1.0)
    throw std::invalid_argument("degenerate loading density");
  const auto k = static_cast<std::size_t>(
      std::llround(density * static_cast<double>(p)));
  Rng rng(seed);
  MatrixXd A = MatrixXd::Zero(m, p);
  for (Index r = 0; r < m; ++r) {
    const auto pos = rng.sample_without_replacement(static_cast<std::size_t>(p), k);
    for (std::size_t j : pos)
      A(r, static_cast<Index>(j)) = rng.uniform(-1.0, 1.0);
  }
  return A;
}

namespace detail {

// blocks of total size p, counts as equal as possible, sizes differing by <= 1
inline std::vector<Index> split_sizes(Index p, Index count) {
  const Index base = p / count, rem = p % count;
  std::vector<Index> sizes(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) sizes[static_cast<std::size_t>(i)] = base + (i < rem ? 1 : 0);
  return sizes;
}

// group Toeplitz blocks into contiguous super-blocks no larger than cap
// (single blocks larger than cap stand alone)
inline std::vector<Index> group_sizes(const std::vector<Index>& sizes, Index cap) {
  std::vector<Index> groups;
  Index cur = 0;
  for (Index s : sizes) {
    if (cur > 0 && cur + s > cap) {
      groups.push_back(cur);
      cur = 0;
    }
    cur += s;
  }
  if (cur > 0) groups.push_back(cur);
  return groups;
}

// Raw block-Toeplitz recipe on [lo, lo+len) of the global index set, given the
// global Toeplitz block boundaries.
inline MatrixXd toeplitz_section(const std::vector<Index>& bounds, Index lo,
                                 Index len, double rho_in, double rho_out) {
  auto block_id = [&](Index g) {
    std::size_t b = 0;
    while (bounds[b + 1] <= g) ++b;
    return b;
  };
  MatrixXd M(len, len);
  for (Index i = 0; i < len; ++i) {
    const Index gi = lo + i;
    const std::size_t bi = block_id(gi);
    for (Index j = 0; j <= i; ++j) {
      const Index gj = lo + j;
      const double v = (block_id(gj) == bi)
                           ? std::pow(rho_in, static_cast<double>(gi - gj))
                           : rho_out;
      M(i, j) = v;
      M(j, i) = v;
    }
  }
  return M;
}

// eigen-decompose, clip eigenvalues to [lo, hi], reconstruct
inline MatrixXd eigen_clip(const MatrixXd& M, double lo, double hi) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("psi: eigendecomposition failed");
  VectorXd lam = es.eigenvalues().cwiseMax(lo).cwiseMin(hi);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

inline MatrixXd haar_rotated_diagonal(Index s, double lo, double hi, Rng& rng) {
  MatrixXd G(s, s);
  for (Index i = 0; i < s; ++i)
    for (Index j = 0; j < s; ++j) G(i, j) = rng.normal();
  Eigen::HouseholderQR<MatrixXd> qr(G);
  MatrixXd Q = qr.householderQ();
  const MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < s; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  VectorXd lam(s);
  for (Index i = 0; i < s; ++i) lam[i] = rng.uniform(lo, hi);
  return Q * lam.asDiagonal() * Q.transpose();
}

}  // namespace detail

inline CovMatrix build_psi(const PsiSpec& spec) {
  if (spec.p < 1) throw std::invalid_argument("psi: p must be >= 1");
  Rng rng(spec.seed);
  switch (spec.kind) {
    case PsiSpec::Kind::identity: {
      if (!(spec.scale > 0.0))
        throw std::invalid_argument("psi: identity scale must be > 0");
      return CovMatrix::diagonal(VectorXd::Constant(spec.p, spec.scale));
    }

    case PsiSpec::Kind::heteroscedastic_diag: {
      // floor(p/2) low-variance indices, the rest high-variance
      const auto n_low = static_cast<std::size_t>(spec.p / 2);
      const auto low = rng.sample_without_replacement(
          static_cast<std::size_t>(spec.p), n_low);
      std::vector<bool> is_low(static_cast<std::size_t>(spec.p), false);
      for (std::size_t j : low) is_low[j] = true;
      VectorXd d(spec.p);
      for (Index j = 0; j < spec.p; ++j)
        d[j] = is_low[static_cast<std::size_t>(j)]
                   ? rng.uniform(spec.low_var_min, spec.low_var_max)
                   : rng.uniform(spec.high_var_min, spec.high_var_max);
      return CovMatrix::diagonal(d);
    }

    case PsiSpec::Kind::block_toeplitz: {
      const Index nb = static_cast<Index>(
          std::ceil(std::sqrt(static_cast<double>(spec.p))));
      const auto sizes = detail::split_sizes(spec.p, nb);
      std::vector<Index> bounds(1, 0);
      for (Index s : sizes) bounds.push_back(bounds.back() + s);

      const Index cap =
          spec.p <= spec.dense_limit ? spec.p : spec.super_block;
      const auto supers = detail::group_sizes(sizes, cap);
      std::vector<MatrixXd> out;
      out.reserve(supers.size());
      Index lo = 0;
      for (Index len : supers) {
        MatrixXd raw = detail::toeplitz_section(bounds, lo, len,
                                                spec.within_rho,
                                                spec.between_rho);
        out.push_back(detail::eigen_clip(raw, spec.clip_min, spec.clip_max));
        lo += len;
      }
      return CovMatrix::block_dense(std::move(out));
    }

    case PsiSpec::Kind::random_dense: {
      const Index cap =
          spec.p <= spec.dense_limit ? spec.p : spec.super_block;
      const Index count = (spec.p + cap - 1) / cap;
      const auto sizes = detail::split_sizes(spec.p, count);
      std::vector<MatrixXd> out;
      out.reserve(sizes.size());
      for (Index s : sizes)
        out.push_back(
            detail::haar_rotated_diagonal(s, spec.clip_min, spec.clip_max, rng));
      return CovMatrix::block_dense(std::move(out));
    }
  }
  throw std::invalid_argument("psi: unknown kind");
}

// Rows i.i.d. from the model: y = beta'f + eps, x = A'f + e with
// e = L z for the covariance factor L. Draw order is fixed (F row by row,
// then eps, then Z row by row) so results depend only on the seed.
inline Dataset sample_dataset(const LatentModelSpec& mod, Index n,
                              std::uint64_t seed, bool keep_factors = false) {
  if (n < 1) throw std::invalid_argument("sample_dataset: n must be >= 1");
  Rng rng(seed);
  MatrixXd F(n, mod.m);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < mod.m; ++k) F(i, k) = rng.normal();
  VectorXd eps(n);
  const double sig = std::sqrt(mod.sigma2);
  for (Index i = 0; i < n; ++i) eps[i] = sig * rng.normal();
  MatrixXd Z(n, mod.p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < mod.p; ++j) Z(i, j) = rng.normal();

  Dataset ds;
  ds.y = F * mod.beta + eps;
  ds.X = F * mod.A + mod.psi.factor_apply_rows(Z);
  if (keep_factors) ds.factors = std::move(F);
  return ds;
}

// Two-group illustrative generator: Z1, Z2 ~ U(0, 20), y ~ N(Z1 + 0.1 Z2, 1),
// x = A'z + e with e ~ N(0, I/16) and the fixed 2 x 6 loadings below.
// Carries gamma0 = (A'A + I/16)^{-1} A' beta.
inline MatrixXd illustrative_loadings() {
  MatrixXd A(2, 6);
  A << 1, -1, 1, 0, 0, 0,
       0, 0, 0, 1, -1, 1;
  return A;
}

inline Dataset illustrative_dataset(Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("illustrative_dataset: n must be >= 1");
  const MatrixXd A = illustrative_loadings();
  Eigen::Vector2d beta(1.0, 0.1);
  const double noise_var = 1.0 / 16.0;

  Rng rng(seed);
  Dataset ds;
  ds.X.resize(n, 6);
  ds.y.resize(n);
  const double sd_e = std::sqrt(noise_var);
  for (Index i = 0; i < n; ++i) {
    Eigen::Vector2d zf(rng.uniform(0.0, 20.0), rng.uniform(0.0, 20.0));
    ds.y[i] = beta.dot(zf) + rng.normal();
    for (Index j = 0; j < 6; ++j)
      ds.X(i, j) = A.col(j).dot(zf) + sd_e * rng.normal();
  }
  MatrixXd gram = A.transpose() * A;
  gram.diagonal().array() += noise_var;
  ds.gamma0 = gram.ldlt().solve(A.transpose() * beta);
  return ds;
}

}  // namespace latreg

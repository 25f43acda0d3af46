#pragma once

// Symmetric positive definite covariance matrices with O(1) entry access and
// cached factorizations. Three storage forms:
//   - diagonal: a vector of variances,
//   - dense: one p x p block,
//   - block-dense: contiguous diagonal blocks (entries outside blocks are 0).
// The block form keeps storage at O(sum of block sizes squared), which is how
// noise covariances with p in the thousands stay affordable.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "latreg/alloc_guard.hpp"
#include "latreg/types.hpp"

namespace latreg {

class CovMatrix {
 public:
  CovMatrix() = default;  // empty; fill via a factory before use

  static CovMatrix diagonal(VectorXd variances) {
    if (variances.size() == 0)
      throw std::invalid_argument("CovMatrix: empty diagonal");
    if ((variances.array() <= 0.0).any())
      throw std::invalid_argument("psi not positive definite");
    CovMatrix c;
    c.dim_ = variances.size();
    c.diag_ = std::move(variances);
    return c;
  }

  static CovMatrix dense(MatrixXd entries) {
    std::vector<MatrixXd> one;
    one.push_back(std::move(entries));
    return block_dense(std::move(one));
  }

  static CovMatrix block_dense(std::vector<MatrixXd> blocks) {
    if (blocks.empty()) throw std::invalid_argument("CovMatrix: no blocks");
    CovMatrix c;
    c.offsets_.reserve(blocks.size() + 1);
    c.offsets_.push_back(0);
    for (auto& b : blocks) {
      if (b.rows() != b.cols() || b.rows() == 0)
        throw std::invalid_argument("CovMatrix: block must be square");
      check_symmetric(b);
      b = ((b + b.transpose()) * 0.5).eval();  // scrub roundoff asymmetry
      audit::note_dense(b.rows(), b.cols());
      c.offsets_.push_back(c.offsets_.back() + b.rows());
    }
    c.dim_ = c.offsets_.back();
    c.blocks_ = std::move(blocks);
    c.factors_.reserve(c.blocks_.size());
    for (const auto& b : c.blocks_) {
      Eigen::LLT<MatrixXd> llt(b);
      if (llt.info() != Eigen::Success)
        throw std::invalid_argument("psi not positive definite");
      c.factors_.push_back(std::move(llt));
    }
    return c;
  }

  Index dim() const { return dim_; }
  bool diagonal_form() const { return diag_.size() > 0; }
  std::size_t block_count() const {
    return diagonal_form() ? static_cast<std::size_t>(dim_) : blocks_.size();
  }
  const VectorXd& diag_entries() const { return diag_; }

  double entry(Index i, Index j) const {
    if (diagonal_form()) return i == j ? diag_[i] : 0.0;
    const std::size_t bi = block_of(i);
    if (bi != block_of(j)) return 0.0;
    return blocks_[bi](i - offsets_[bi], j - offsets_[bi]);
  }

  // Psi * x
  VectorXd apply(const VectorXd& x) const {
    require_dim(x.size());
    if (diagonal_form()) return diag_.cwiseProduct(x);
    VectorXd out(dim_);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const Index o = offsets_[b], s = blocks_[b].rows();
      out.segment(o, s).noalias() = blocks_[b] * x.segment(o, s);
    }
    return out;
  }

  // d' * Psi * d
  double quad_form(const VectorXd& d) const {
    require_dim(d.size());
    if (diagonal_form()) return diag_.cwiseProduct(d).dot(d);
    double q = 0.0;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const Index o = offsets_[b], s = blocks_[b].rows();
      q += d.segment(o, s).dot(blocks_[b] * d.segment(o, s));
    }
    return q;
  }

  // Psi^{-1} b
  VectorXd solve(const VectorXd& rhs) const {
    require_dim(rhs.size());
    if (diagonal_form()) return rhs.cwiseQuotient(diag_);
    VectorXd out(dim_);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const Index o = offsets_[b], s = blocks_[b].rows();
      out.segment(o, s) = factors_[b].solve(rhs.segment(o, s));
    }
    return out;
  }

  MatrixXd solve_cols(const MatrixXd& rhs) const {
    require_dim(rhs.rows());
    MatrixXd out(rhs.rows(), rhs.cols());
    for (Index c = 0; c < rhs.cols(); ++c) out.col(c) = solve(rhs.col(c));
    return out;
  }

  // L z with L L' = Psi (Cholesky factor per block)
  VectorXd factor_apply(const VectorXd& z) const {
    require_dim(z.size());
    if (diagonal_form()) return diag_.cwiseSqrt().cwiseProduct(z);
    VectorXd out(dim_);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const Index o = offsets_[b], s = blocks_[b].rows();
      out.segment(o, s).noalias() =
          factors_[b].matrixL() * z.segment(o, s);
    }
    return out;
  }

  // Z L' for an n x p matrix of rows (each row transformed by the factor)
  MatrixXd factor_apply_rows(const MatrixXd& Z) const {
    require_dim(Z.cols());
    if (diagonal_form())
      return Z * diag_.cwiseSqrt().asDiagonal();
    MatrixXd out(Z.rows(), Z.cols());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const Index o = offsets_[b], s = blocks_[b].rows();
      out.middleCols(o, s).noalias() =
          Z.middleCols(o, s) * MatrixXd(factors_[b].matrixL()).transpose();
    }
    return out;
  }

  double trace() const {
    if (diagonal_form()) return diag_.sum();
    double t = 0.0;
    for (const auto& b : blocks_) t += b.trace();
    return t;
  }

  // all eigenvalues, ascending (union over blocks)
  VectorXd eigenvalues() const {
    if (diagonal_form()) {
      VectorXd v = diag_;
      std::sort(v.data(), v.data() + v.size());
      return v;
    }
    VectorXd v(dim_);
    Index at = 0;
    for (const auto& b : blocks_) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(b, Eigen::EigenvaluesOnly);
      v.segment(at, b.rows()) = es.eigenvalues();
      at += b.rows();
    }
    std::sort(v.data(), v.data() + v.size());
    return v;
  }

  // Full dense materialization; audited so large-p paths cannot reach it.
  MatrixXd to_dense() const {
    audit::note_dense(dim_, dim_);
    MatrixXd out = MatrixXd::Zero(dim_, dim_);
    if (diagonal_form()) {
      out.diagonal() = diag_;
      return out;
    }
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const Index o = offsets_[b], s = blocks_[b].rows();
      out.block(o, o, s, s) = blocks_[b];
    }
    return out;
  }

 private:
  static void check_symmetric(const MatrixXd& m) {
    const double scale = m.cwiseAbs().maxCoeff();
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(scale, 1.0))
      throw std::invalid_argument("CovMatrix: matrix is not symmetric");
  }

  std::size_t block_of(Index i) const {
    // offsets_ is small (block count), linear scan is fine
    std::size_t b = 0;
    while (offsets_[b + 1] <= i) ++b;
    return b;
  }

  void require_dim(Index n) const {
    if (n != dim_) throw std::invalid_argument("CovMatrix: dimension mismatch");
  }

  Index dim_ = 0;
  VectorXd diag_;
  std::vector<Index> offsets_;
  std::vector<MatrixXd> blocks_;
  std::vector<Eigen::LLT<MatrixXd>> factors_;
};

}  // namespace latreg

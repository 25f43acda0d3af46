#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "latreg/covariance.hpp"

using namespace latreg;

namespace {

MatrixXd random_spd(Index n, unsigned seed) {
  std::srand(seed);
  MatrixXd G = MatrixXd::Random(n, n);
  MatrixXd M = G * G.transpose();
  M.diagonal().array() += 0.5;
  return M;
}

}  // namespace

TEST_CASE("diagonal covariance basics") {
  VectorXd d(3);
  d << 1.0, 4.0, 0.25;
  auto c = CovMatrix::diagonal(d);
  CHECK(c.dim() == 3);
  CHECK(c.diagonal_form());
  CHECK(c.entry(1, 1) == 4.0);
  CHECK(c.entry(0, 1) == 0.0);
  CHECK(c.trace() == doctest::Approx(5.25));

  VectorXd x(3);
  x << 1, 1, 2;
  CHECK((c.apply(x) - (d.cwiseProduct(x))).norm() == 0.0);
  CHECK(c.quad_form(x) == doctest::Approx(1 + 4 + 0.25 * 4));
  CHECK((c.solve(c.apply(x)) - x).norm() < 1e-14);
  // L z with L = sqrt(diag)
  CHECK((c.factor_apply(x) - d.cwiseSqrt().cwiseProduct(x)).norm() == 0.0);

  VectorXd bad(2);
  bad << 1.0, -1.0;
  CHECK_THROWS_WITH(CovMatrix::diagonal(bad), "psi not positive definite");
}

TEST_CASE("dense covariance matches direct linear algebra") {
  const MatrixXd M = random_spd(6, 42);
  auto c = CovMatrix::dense(M);
  VectorXd x = VectorXd::Random(6);
  CHECK((c.apply(x) - M * x).norm() < 1e-12);
  CHECK(c.quad_form(x) == doctest::Approx(x.dot(M * x)));
  CHECK((M * c.solve(x) - x).norm() < 1e-10);
  CHECK(c.trace() == doctest::Approx(M.trace()));
  // factor reproduces the matrix
  MatrixXd L(6, 6);
  for (Index j = 0; j < 6; ++j) L.col(j) = c.factor_apply(VectorXd::Unit(6, j));
  CHECK((L * L.transpose() - M).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((c.to_dense() - M).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("non-symmetric or indefinite dense input is rejected") {
  MatrixXd bad = MatrixXd::Zero(2, 2);
  bad << 1.0, 0.5, 0.1, 1.0;
  CHECK_THROWS(CovMatrix::dense(bad));

  MatrixXd indef(2, 2);
  indef << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, -1
  CHECK_THROWS_WITH(CovMatrix::dense(indef), "psi not positive definite");
}

TEST_CASE("block covariance equals the dense block-diagonal matrix") {
  std::vector<MatrixXd> blocks{random_spd(3, 1), random_spd(4, 2),
                               random_spd(2, 3)};
  auto c = CovMatrix::block_dense(blocks);
  CHECK(c.dim() == 9);
  CHECK(c.block_count() == 3);

  MatrixXd full = MatrixXd::Zero(9, 9);
  full.block(0, 0, 3, 3) = blocks[0];
  full.block(3, 3, 4, 4) = blocks[1];
  full.block(7, 7, 2, 2) = blocks[2];

  VectorXd x = VectorXd::Random(9);
  CHECK((c.apply(x) - full * x).norm() < 1e-12);
  CHECK(c.quad_form(x) == doctest::Approx(x.dot(full * x)));
  CHECK((full * c.solve(x) - x).norm() < 1e-10);
  CHECK(c.entry(4, 5) == doctest::Approx(full(4, 5)));
  CHECK(c.entry(1, 8) == 0.0);
  CHECK((c.to_dense() - full).cwiseAbs().maxCoeff() < 1e-12);

  // eigenvalues = union of block eigenvalues
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(full, Eigen::EigenvaluesOnly);
  VectorXd got = c.eigenvalues();
  CHECK((got - es.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);

  // factor_apply_rows(I) = L', and L L' must reproduce Psi
  MatrixXd Lt = c.factor_apply_rows(MatrixXd::Identity(9, 9));
  CHECK((Lt.transpose() * Lt - full).cwiseAbs().maxCoeff() < 1e-12);
  // consistent with the vector form
  CHECK((Lt.row(3).transpose() - c.factor_apply(VectorXd::Unit(9, 3)))
            .cwiseAbs()
            .maxCoeff() < 1e-14);
}

TEST_CASE("allocation audit records and caps dense sizes") {
  audit::reset();
  audit::set_cap(0);
  (void)CovMatrix::dense(random_spd(8, 9));
  CHECK(audit::largest_dense_dim().load() >= 8);

  audit::set_cap(5);
  CHECK_THROWS(CovMatrix::dense(random_spd(8, 9)));
  audit::set_cap(0);
  audit::reset();
}

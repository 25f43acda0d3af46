#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "latreg/datagen.hpp"
#include "latreg/metrics.hpp"
#include "latreg/rng.hpp"
#include "latreg/solver.hpp"

using namespace latreg;

namespace {

LatentModelSpec small_model(unsigned seed) {
  LatentModelSpec mod;
  mod.m = 2;
  mod.p = 8;
  mod.A = generate_loadings(2, 8, 1.0, seed);
  mod.beta = Eigen::Vector2d(1.0, -0.5);
  mod.sigma2 = 1.0;
  PsiSpec pspec;
  pspec.kind = PsiSpec::Kind::random_dense;
  pspec.p = 8;
  pspec.seed = seed + 1;
  mod.psi = build_psi(pspec);
  return mod;
}

}  // namespace

TEST_CASE("in-sample MSE basics and the dense identity") {
  Rng rng(1);
  MatrixXd X(4, 2);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 2; ++j) X(i, j) = rng.normal();
  VectorXd g0(2), gh(2);
  g0 << 1.0, -0.5;
  gh << 0.2, 0.3;

  CHECK(mse_in_sample(g0, g0, X) == 0.0);
  CHECK(mse_in_sample(VectorXd::Zero(2), g0, X) ==
        doctest::Approx((X * g0).squaredNorm() / 4.0));

  const VectorXd d = g0 - gh;
  const MatrixXd gram = X.transpose() * X / 4.0;
  CHECK(std::abs(mse_in_sample(gh, g0, X) - d.dot(gram * d)) < 1e-12);

  CHECK_THROWS(mse_in_sample(VectorXd::Zero(3), g0, X));
}

TEST_CASE("out-of-sample PE reduces to squared distance for white noise") {
  LatentModelSpec mod;
  mod.m = 1;
  mod.p = 4;
  mod.A = MatrixXd::Zero(1, 4);
  mod.beta = VectorXd::Ones(1);
  mod.sigma2 = 1.0;
  mod.psi = CovMatrix::diagonal(VectorXd::Ones(4));
  VectorXd g0(4), gh(4);
  g0 << 1, 2, 3, 4;
  gh << 0, 2, 3, 5;
  CHECK(pe_out_sample(g0, g0, mod) == 0.0);
  CHECK(pe_out_sample(gh, g0, mod) == doctest::Approx(2.0));
}

TEST_CASE("PE matches a Monte Carlo estimate of E[(x'd)^2]") {
  const auto mod = small_model(21);
  const VectorXd g0 = oracle_gamma0(mod);
  VectorXd gh = 0.5 * g0;
  gh[3] += 0.2;
  const double pe = pe_out_sample(gh, g0, mod);

  const auto ds = sample_dataset(mod, 1000000, 777);
  const VectorXd proj = ds.X * (g0 - gh);
  const double mc = proj.squaredNorm() / static_cast<double>(proj.size());
  CHECK(std::abs(mc - pe) / pe < 0.01);
}

TEST_CASE("estimation errors") {
  VectorXd g0(3);
  g0 << 1.0, -2.0, 0.5;
  auto [l2a, sa] = estimation_errors(g0, g0);
  CHECK(l2a == 0.0);
  CHECK(sa == 0.0);
  auto [l2b, sb] = estimation_errors(VectorXd::Zero(3), g0);
  CHECK(l2b == doctest::Approx(g0.squaredNorm()));
  CHECK(sb == doctest::Approx(1.0));
  auto [l2c, sc] = estimation_errors((2.0 * g0).eval(), g0);
  CHECK(l2c == doctest::Approx(g0.squaredNorm()));
  CHECK(sc == doctest::Approx(1.0));
  CHECK_THROWS(estimation_errors(g0, VectorXd::Zero(3)));
}

TEST_CASE("optimal s hugs the least-shrunk end for noiseless data") {
  const auto mod = small_model(5);
  const VectorXd g0 = oracle_gamma0(mod);
  auto ds = sample_dataset(mod, 100, 99);
  const VectorXd y = ds.X * g0;  // replace response: exact linear truth
  const auto path = lasso_path(ds.X, y, default_lambda_grid(ds.X, y, 60));
  auto [s_opt, report] = optimal_s(path, g0, ds.X, mod);
  CHECK(report.mse_rel < 0.01);
  CHECK(s_opt > 0.8);
  // optimal choice can never lose to the null model
  CHECK(report.mse <= mse_in_sample(VectorXd::Zero(mod.p), g0, ds.X));
}

TEST_CASE("optimal s on a single-entry path returns that entry") {
  const auto mod = small_model(9);
  const VectorXd g0 = oracle_gamma0(mod);
  auto ds = sample_dataset(mod, 40, 3);
  const double lmax = lambda_max(ds.X, ds.y);
  const auto path = lasso_path(ds.X, ds.y, {0.5 * lmax});
  auto [s_opt, report] = optimal_s(path, g0, ds.X, mod);
  CHECK(report.lambda1 == doctest::Approx(0.5 * lmax));
  CHECK(s_opt == path.entries[0].s);
}

TEST_CASE("PE approaches in-sample MSE for large n") {
  const auto mod = small_model(13);
  const VectorXd g0 = oracle_gamma0(mod);
  VectorXd gh = 0.7 * g0;
  gh[1] -= 0.1;
  const auto ds = sample_dataset(mod, 10000, 2024);
  const double pe = pe_out_sample(gh, g0, mod);
  const double mse = mse_in_sample(gh, g0, ds.X);
  CHECK(std::abs(pe - mse) / pe <= 0.05);
}

TEST_CASE("AUC on separated, tied, and random scores") {
  CHECK(auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == 1.0);
  CHECK(auc({0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1}) == 0.0);
  CHECK(auc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == 0.5);

  Rng rng(31);
  const std::size_t n = 10000;
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = rng.normal();
    labels[i] = rng.uniform01() < 0.5 ? 0 : 1;
  }
  CHECK(std::abs(auc(scores, labels) - 0.5) < 0.02);

  CHECK_THROWS(auc({0.1, 0.2}, {1, 1}));
  CHECK_THROWS(auc({0.1, 0.2}, {0, 2}));
  CHECK_THROWS(auc({0.1}, {0, 1}));
}

TEST_CASE("AUC is invariant under strictly increasing transformations") {
  Rng rng(32);
  std::vector<double> scores(500);
  std::vector<int> labels(500);
  for (std::size_t i = 0; i < 500; ++i) {
    scores[i] = rng.normal();
    labels[i] = rng.uniform01() < 0.4 ? 1 : 0;
  }
  const double base = auc(scores, labels);
  std::vector<double> exp_scores(500), affine_scores(500);
  for (std::size_t i = 0; i < 500; ++i) {
    exp_scores[i] = std::exp(scores[i]);
    affine_scores[i] = 2.0 * scores[i] + 3.0;
  }
  CHECK(auc(exp_scores, labels) == base);
  CHECK(auc(affine_scores, labels) == base);
}

TEST_CASE("relative errors are invariant to joint rescaling") {
  const auto mod = small_model(17);
  const VectorXd g0 = oracle_gamma0(mod);
  auto ds = sample_dataset(mod, 60, 8);
  const double c = 2.5;

  const auto grid = default_lambda_grid(ds.X, ds.y, 25);
  const auto path = lasso_path(ds.X, ds.y, grid, 0.0, 1e-10);
  std::vector<double> scaled_grid;
  for (double l : grid) scaled_grid.push_back(c * l);
  const auto path_c =
      lasso_path(ds.X, (c * ds.y).eval(), scaled_grid, 0.0, 1e-10);

  // scaled problem has truth c * gamma0 under the rescaled model
  LatentModelSpec mod_c = mod;
  mod_c.beta = c * mod.beta;
  for (std::size_t k = 0; k < path.entries.size(); k += 6) {
    const auto r = error_report(path.entries[k], g0, ds.X, mod);
    const auto rc = error_report(path_c.entries[k], (c * g0).eval(), ds.X, mod_c);
    CHECK(std::abs(r.mse_rel - rc.mse_rel) < 1e-9);
    CHECK(std::abs(r.pe_rel - rc.pe_rel) < 1e-9);
    CHECK(std::abs(r.est_err_std - rc.est_err_std) < 1e-9);
  }
}

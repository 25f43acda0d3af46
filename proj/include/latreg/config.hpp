#pragma once

// Experiment configuration, loadable from a JSON file with CLI overrides on
// top. Invalid configurations raise ConfigError (CLI exit code 1).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "latreg/datagen.hpp"
#include "latreg/types.hpp"

namespace latreg::harness {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::uint64_t master_seed = 20240901;
  std::uint64_t loading_seed = 0;  // 0 = derive from master_seed and p
  std::uint64_t psi_seed = 0;      // 0 = derive from master_seed, kind, p
  int reps = 100;
  Index n = 100;
  Index m = 3;
  std::vector<double> beta = {1.0, 1.0, 1.0};
  double sigma2 = 1.0;
  double loading_density = 0.2;
  std::vector<Index> p_grid = {5,    10,   20,   50,   100,  200,
                               500,  1000, 2000, 5000, 10000};
  bool include_interpolation_point = false;  // keep p == n cells
  std::vector<PsiSpec::Kind> psi_kinds = {
      PsiSpec::Kind::identity, PsiSpec::Kind::heteroscedastic_diag,
      PsiSpec::Kind::block_toeplitz, PsiSpec::Kind::random_dense};
  double psi_scale = 1.0;  // identity kind only

  int s_grid_size = 51;
  int lambda_count = 100;
  double lambda_floor_ratio = 1e-3;
  double solver_tol = 1e-7;
  long solver_max_iter = 100000;
  double elastic_net_lambda2 = 1.0;
  double s_star = 0.75;            // comparison point for the two-method run
  int illustrative_test_points = 1;

  int sequential_steps = 5;  // K
  int cv_folds = 10;
  int test_splits = 100;

  double bound_C = 1.0;
  double bound_t = 2.0;

  Index dense_limit = 2000;
  int threads = 0;  // 0 = hardware concurrency
  std::string out_dir = "out";
  bool timings = false;  // fill runtime_ms (breaks byte-determinism)

  std::vector<double> s_grid() const {
    std::vector<double> s(static_cast<std::size_t>(s_grid_size));
    for (int i = 0; i < s_grid_size; ++i)
      s[static_cast<std::size_t>(i)] =
          s_grid_size == 1
              ? 0.0
              : static_cast<double>(i) / static_cast<double>(s_grid_size - 1);
    return s;
  }

  // p values actually run: the interpolation point p == n is dropped unless
  // explicitly requested
  std::vector<Index> effective_p_grid() const {
    std::vector<Index> out;
    for (Index p : p_grid)
      if (p != n || include_interpolation_point) out.push_back(p);
    return out;
  }

  VectorXd beta_vector() const {
    VectorXd b(static_cast<Index>(beta.size()));
    for (std::size_t i = 0; i < beta.size(); ++i)
      b[static_cast<Index>(i)] = beta[i];
    return b;
  }

  void validate() const {
    if (reps < 1) throw ConfigError("config: reps must be >= 1");
    if (n < 1) throw ConfigError("config: n must be >= 1");
    if (m < 1) throw ConfigError("config: m must be >= 1");
    if (static_cast<Index>(beta.size()) != m)
      throw ConfigError("config: beta length must equal m");
    if (!(sigma2 > 0.0)) throw ConfigError("config: sigma2 must be > 0");
    if (!(loading_density > 0.0) || loading_density > 1.0)
      throw ConfigError("config: loading_density must be in (0, 1]");
    if (p_grid.empty()) throw ConfigError("config: p_grid must be nonempty");
    for (std::size_t i = 0; i < p_grid.size(); ++i) {
      if (p_grid[i] < 1) throw ConfigError("config: p values must be >= 1");
      if (i > 0 && p_grid[i] <= p_grid[i - 1])
        throw ConfigError("config: p_grid must be strictly increasing");
    }
    if (psi_kinds.empty())
      throw ConfigError("config: psi_kinds must be nonempty");
    // near-zero noise floors break the bounded-spectrum assumption
    if (!(psi_scale >= 1e-6))
      throw ConfigError("config: psi_scale must be >= 1e-6");
    if (s_grid_size < 1) throw ConfigError("config: s_grid_size must be >= 1");
    if (lambda_count < 2) throw ConfigError("config: lambda_count must be >= 2");
    if (!(lambda_floor_ratio > 0.0) || lambda_floor_ratio >= 1.0)
      throw ConfigError("config: lambda_floor_ratio must be in (0, 1)");
    if (!(solver_tol > 0.0)) throw ConfigError("config: solver_tol must be > 0");
    if (solver_max_iter < 1)
      throw ConfigError("config: solver_max_iter must be >= 1");
    if (elastic_net_lambda2 < 0.0)
      throw ConfigError("config: elastic_net_lambda2 must be >= 0");
    if (s_star < 0.0 || s_star > 1.0)
      throw ConfigError("config: s_star must be in [0, 1]");
    if (illustrative_test_points < 1)
      throw ConfigError("config: illustrative_test_points must be >= 1");
    if (sequential_steps < 1)
      throw ConfigError("config: sequential_steps must be >= 1");
    if (cv_folds < 2) throw ConfigError("config: cv_folds must be >= 2");
    if (test_splits < 1) throw ConfigError("config: test_splits must be >= 1");
    if (!(bound_C > 0.0) || !(bound_t > 0.0))
      throw ConfigError("config: bound_C and bound_t must be > 0");
    if (dense_limit < 1) throw ConfigError("config: dense_limit must be >= 1");
    if (threads < 0) throw ConfigError("config: threads must be >= 0");
  }
};

inline void apply_json(ExperimentConfig& cfg, const nlohmann::json& j) {
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("master_seed", cfg.master_seed);
  get("loading_seed", cfg.loading_seed);
  get("psi_seed", cfg.psi_seed);
  get("reps", cfg.reps);
  get("n", cfg.n);
  get("m", cfg.m);
  get("beta", cfg.beta);
  get("sigma2", cfg.sigma2);
  get("loading_density", cfg.loading_density);
  get("p_grid", cfg.p_grid);
  get("include_interpolation_point", cfg.include_interpolation_point);
  if (j.contains("psi_kinds")) {
    cfg.psi_kinds.clear();
    for (const auto& name : j.at("psi_kinds"))
      cfg.psi_kinds.push_back(psi_kind_from_name(name.get<std::string>()));
  }
  get("psi_scale", cfg.psi_scale);
  get("s_grid_size", cfg.s_grid_size);
  get("lambda_count", cfg.lambda_count);
  get("lambda_floor_ratio", cfg.lambda_floor_ratio);
  get("solver_tol", cfg.solver_tol);
  get("solver_max_iter", cfg.solver_max_iter);
  get("elastic_net_lambda2", cfg.elastic_net_lambda2);
  get("s_star", cfg.s_star);
  get("illustrative_test_points", cfg.illustrative_test_points);
  get("sequential_steps", cfg.sequential_steps);
  get("cv_folds", cfg.cv_folds);
  get("test_splits", cfg.test_splits);
  get("bound_C", cfg.bound_C);
  get("bound_t", cfg.bound_t);
  get("dense_limit", cfg.dense_limit);
  get("threads", cfg.threads);
  get("out_dir", cfg.out_dir);
  get("timings", cfg.timings);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    apply_json(cfg, j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: bad field: ") + e.what());
  }
  return cfg;
}

}  // namespace latreg::harness

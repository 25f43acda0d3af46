#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "latreg/config.hpp"
#include "latreg/csv.hpp"
#include "latreg/ingest.hpp"

using namespace latreg;
using namespace latreg::harness;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("doubles round-trip through shortest formatting") {
  for (double v : {0.1, 1.0 / 3.0, 2.718281828459045, 1e-300, -42.5, 0.0}) {
    const std::string s = io::format_double(v);
    CHECK(io::parse_double(s, "test") == v);
  }
}

TEST_CASE("csv writer quotes and escapes per RFC 4180") {
  const std::string path = temp_path("latreg_csv_test.csv");
  {
    io::CsvWriter w(path, {"name", "value"});
    w.row({std::string("plain"), 1.5});
    w.row({std::string("comma, inside"), std::int64_t{2}});
    w.row({std::string("quote \" inside"), std::int64_t{3}});
    w.row({std::string("line\nbreak"), std::int64_t{4}});
  }
  const auto table = io::read_csv(path);
  REQUIRE(table.header == std::vector<std::string>{"name", "value"});
  REQUIRE(table.rows.size() == 4);
  CHECK(table.rows[1][0] == "comma, inside");
  CHECK(table.rows[2][0] == "quote \" inside");
  CHECK(table.rows[3][0] == "line\nbreak");
  CHECK(io::parse_double(table.rows[0][1], "v") == 1.5);
  std::remove(path.c_str());
}

TEST_CASE("csv reader flags structural problems") {
  const std::string path = temp_path("latreg_csv_bad.csv");
  write_file(path, "a,b\n1,2,3\n");
  CHECK_THROWS(io::read_csv(path));
  write_file(path, "a,b\n\"unterminated\n");
  CHECK_THROWS(io::read_csv(path));
  write_file(path, "a,b\r\n1,2\r\n");
  const auto t = io::read_csv(path);
  CHECK(t.rows.size() == 1);
  CHECK(t.rows[0][1] == "2");
  std::remove(path.c_str());
}

TEST_CASE("config defaults pass validation and json overrides apply") {
  ExperimentConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.s_grid().size() == 51);
  CHECK(cfg.s_grid().front() == 0.0);
  CHECK(cfg.s_grid().back() == 1.0);

  // p == n excluded by default, kept with the override
  bool has_n = false;
  for (Index p : cfg.effective_p_grid()) has_n |= p == cfg.n;
  CHECK_FALSE(has_n);
  cfg.include_interpolation_point = true;
  has_n = false;
  for (Index p : cfg.effective_p_grid()) has_n |= p == cfg.n;
  CHECK(has_n);

  const std::string path = temp_path("latreg_cfg.json");
  write_file(path,
             "{\"reps\": 7, \"n\": 60, \"m\": 2, \"beta\": [1.0, 0.5],\n"
             " \"psi_kinds\": [\"identity\", \"random_dense\"],\n"
             " \"p_grid\": [10, 20], \"s_grid_size\": 5}");
  const auto loaded = load_config(path);
  CHECK(loaded.reps == 7);
  CHECK(loaded.n == 60);
  CHECK(loaded.m == 2);
  CHECK(loaded.beta.size() == 2);
  CHECK(loaded.psi_kinds.size() == 2);
  CHECK(loaded.psi_kinds[1] == PsiSpec::Kind::random_dense);
  CHECK_NOTHROW(loaded.validate());
  std::remove(path.c_str());
}

TEST_CASE("config validation rejects bad values") {
  ExperimentConfig cfg;
  cfg.reps = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.beta = {1.0};  // length != m
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.p_grid = {10, 10};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.lambda_floor_ratio = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  const std::string path = temp_path("latreg_cfg_bad.json");
  write_file(path, "{not json");
  CHECK_THROWS_AS(load_config(path), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/latreg.json"), ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("csv ingestion builds datasets and reports defects") {
  const std::string path = temp_path("latreg_ingest.csv");
  write_file(path, "x1,x2,y\n1.0,2.0,3.5\n2.0,1.0,1.5\n0.5,2.5,2.0\n");
  const auto ds = ingest_csv_dataset(path, "y");
  REQUIRE(ds.X.rows() == 3);
  REQUIRE(ds.X.cols() == 2);
  CHECK(ds.y[0] == 3.5);
  CHECK(ds.X(2, 1) == 2.5);
  CHECK_FALSE(binary_response(ds));

  // response column anywhere in the header
  write_file(path, "y,x1,x2\n1,4.0,5.0\n0,6.0,7.0\n");
  const auto ds2 = ingest_csv_dataset(path, "y");
  CHECK(ds2.X(0, 0) == 4.0);
  CHECK(binary_response(ds2));

  write_file(path, "x1,x2,y\n1.0,,3.5\n");
  CHECK_THROWS_WITH(ingest_csv_dataset(path, "y"),
                    "ingest: missing value at row 1, column 'x2'");
  write_file(path, "x1,x2,y\n1.0,abc,3.5\n");
  CHECK_THROWS(ingest_csv_dataset(path, "y"));
  write_file(path, "x1,x1,y\n1.0,2.0,3.5\n");
  CHECK_THROWS_WITH(ingest_csv_dataset(path, "y"),
                    "ingest: duplicate header name 'x1'");
  write_file(path, "x1,x2,y\n");
  CHECK_THROWS_WITH(ingest_csv_dataset(path, "y"), "ingest: no data rows");
  write_file(path, "x1,x2,z\n1,2,3\n");
  CHECK_THROWS(ingest_csv_dataset(path, "y"));
  std::remove(path.c_str());
}

TEST_CASE("standardization yields unit sample variance") {
  const std::string path = temp_path("latreg_ingest_std.csv");
  std::string text = "x1,x2,y\n";
  for (int i = 0; i < 20; ++i)
    text += std::to_string(0.5 * i) + "," + std::to_string(3.0 - 0.2 * i * i) +
            "," + std::to_string(i % 2) + "\n";
  write_file(path, text);
  const auto ds = ingest_csv_dataset(path, "y", true);
  for (Index j = 0; j < 2; ++j) {
    const double mean = ds.X.col(j).mean();
    const double var = (ds.X.col(j).array() - mean).square().sum() /
                       static_cast<double>(ds.X.rows() - 1);
    CHECK(std::abs(var - 1.0) <= 1e-9);
  }

  // zero-variance column cannot be standardized
  write_file(path, "x1,x2,y\n1,2,0\n1,3,1\n1,4,0\n");
  CHECK_THROWS(ingest_csv_dataset(path, "y", true));
  CHECK_NOTHROW(ingest_csv_dataset(path, "y", false));
  std::remove(path.c_str());
}

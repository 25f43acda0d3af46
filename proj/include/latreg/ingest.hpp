#pragma once

// CSV dataset ingestion: numeric predictor columns plus a named response
// column. Missing or non-numeric cells are reported by row and column name.

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "latreg/csv.hpp"
#include "latreg/datagen.hpp"
#include "latreg/types.hpp"

namespace latreg::harness {

inline Dataset ingest_csv_dataset(const std::string& path,
                                  const std::string& response_column,
                                  bool standardize = false) {
  const io::CsvTable table = io::read_csv(path);

  std::set<std::string> seen;
  for (const auto& name : table.header)
    if (!seen.insert(name).second)
      throw std::runtime_error("ingest: duplicate header name '" + name + "'");

  const std::size_t y_col = table.column(response_column);
  if (table.rows.empty()) throw std::runtime_error("ingest: no data rows");

  const Index n = static_cast<Index>(table.rows.size());
  const Index p = static_cast<Index>(table.header.size()) - 1;
  if (p < 1) throw std::runtime_error("ingest: no predictor columns");

  Dataset ds;
  ds.X.resize(n, p);
  ds.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    Index xj = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string where = "row " + std::to_string(i + 1) + ", column '" +
                                table.header[c] + "'";
      if (row[c].empty())
        throw std::runtime_error("ingest: missing value at " + where);
      const double v = io::parse_double(row[c], where);
      if (!std::isfinite(v))
        throw std::runtime_error("ingest: non-finite value at " + where);
      if (c == y_col)
        ds.y[i] = v;
      else
        ds.X(i, xj++) = v;
    }
  }

  if (standardize) {
    for (Index j = 0; j < p; ++j) {
      const double mean = ds.X.col(j).mean();
      const double var = (ds.X.col(j).array() - mean).square().sum() /
                         static_cast<double>(n - 1);
      if (!(var > 0.0))
        throw std::runtime_error("ingest: zero-variance column " +
                                 std::to_string(j + 1));
      ds.X.col(j) /= std::sqrt(var);
    }
  }
  return ds;
}

// true when every response value is 0 or 1 (AUC pathway)
inline bool binary_response(const Dataset& ds) {
  for (Index i = 0; i < ds.y.size(); ++i)
    if (ds.y[i] != 0.0 && ds.y[i] != 1.0) return false;
  return true;
}

}  // namespace latreg::harness

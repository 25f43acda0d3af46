#pragma once

// RFC-4180 CSV reading and writing. Numbers are written with shortest
// round-trip formatting so regression comparisons can be byte-exact.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace latreg::io {

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string csv_escape(const std::string& field) {
  const bool needs_quote = field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quote) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

using CsvField = std::variant<std::int64_t, double, std::string>;

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary), columns_(header.size()) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    write_strings(header);
  }

  void row(const std::vector<CsvField>& fields) {
    if (fields.size() != columns_)
      throw std::runtime_error("csv row width mismatch");
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) line += ',';
      if (const auto* s = std::get_if<std::string>(&fields[i]))
        line += csv_escape(*s);
      else if (const auto* d = std::get_if<double>(&fields[i]))
        line += format_double(*d);
      else
        line += std::to_string(std::get<std::int64_t>(fields[i]));
    }
    line += '\n';
    out_ << line;
  }

  void close() { out_.close(); }

 private:
  void write_strings(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) line += ',';
      line += csv_escape(fields[i]);
    }
    line += '\n';
    out_ << line;
  }

  std::ofstream out_;
  std::size_t columns_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::runtime_error("csv: no column named '" + name + "'");
  }

  bool has_column(const std::string& name) const {
    for (const auto& h : header)
      if (h == name) return true;
    return false;
  }
};

// Quote-aware parser; tolerates CRLF line endings.
inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool any_field = false;
  auto end_field = [&] {
    record.push_back(field);
    field.clear();
    any_field = false;
  };
  auto end_record = [&] {
    end_field();
    if (table.header.empty())
      table.header = record;
    else
      table.rows.push_back(record);
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        any_field = true;
        break;
      case ',':
        end_field();
        any_field = true;  // a comma implies another field follows
        break;
      case '\r':
        break;
      case '\n':
        if (!field.empty() || !record.empty() || any_field) end_record();
        break;
      default:
        field += c;
    }
  }
  if (!field.empty() || !record.empty() || any_field) end_record();
  if (in_quotes) throw std::runtime_error("csv: unterminated quoted field");
  if (table.header.empty()) throw std::runtime_error("csv: missing header row");
  for (const auto& r : table.rows)
    if (r.size() != table.header.size())
      throw std::runtime_error("csv: ragged row");
  return table;
}

inline double parse_double(const std::string& s, const std::string& where) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  double v = 0.0;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw std::runtime_error("csv: non-numeric value '" + s + "' at " + where);
  return v;
}

}  // namespace latreg::io

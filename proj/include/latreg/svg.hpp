#pragma once

// Minimal SVG line charts rendered from the harness CSVs. The CSVs remain
// the source of truth; these files are a convenience view with no stability
// guarantee. Schemas are recognized by their header row.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "latreg/csv.hpp"

namespace latreg::svgplot {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

namespace detail {

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#17becf", "#8c564b", "#7f7f7f"};
  return colors[i % 8];
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

inline std::string line_chart(const std::string& title,
                              const std::string& xlabel,
                              const std::string& ylabel,
                              std::vector<Series> series, bool logx) {
  const double W = 680, H = 440;
  const double L = 70, R = 160, T = 40, B = 55;
  const double plot_w = W - L - R, plot_h = H - T - B;

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (auto& s : series) {
    for (auto& [x, y] : s.points) {
      const double xv = logx ? std::log10(x) : x;
      xmin = std::min(xmin, xv);
      xmax = std::max(xmax, xv);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmin > xmax) throw std::runtime_error("plot: no points");
  if (xmax - xmin < 1e-12) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin < 1e-12) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) {
    const double xv = logx ? std::log10(x) : x;
    return L + (xv - xmin) / (xmax - xmin) * plot_w;
  };
  auto py = [&](double y) { return T + (ymax - y) / (ymax - ymin) * plot_h; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         tick_label(W) + "\" height=\"" + tick_label(H) + "\" viewBox=\"0 0 " +
         tick_label(W) + " " + tick_label(H) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + tick_label(L) + "\" y=\"22\" font-size=\"15\" "
         "font-family=\"sans-serif\">" + title + "</text>\n";

  // axes
  svg += "<line x1=\"" + tick_label(L) + "\" y1=\"" + tick_label(T) +
         "\" x2=\"" + tick_label(L) + "\" y2=\"" + tick_label(T + plot_h) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + tick_label(L) + "\" y1=\"" + tick_label(T + plot_h) +
         "\" x2=\"" + tick_label(L + plot_w) + "\" y2=\"" +
         tick_label(T + plot_h) + "\" stroke=\"black\"/>\n";

  for (int k = 0; k <= 4; ++k) {
    const double fx = xmin + (xmax - xmin) * k / 4.0;
    const double gx = L + plot_w * k / 4.0;
    const double xv = logx ? std::pow(10.0, fx) : fx;
    svg += "<line x1=\"" + tick_label(gx) + "\" y1=\"" + tick_label(T + plot_h) +
           "\" x2=\"" + tick_label(gx) + "\" y2=\"" +
           tick_label(T + plot_h + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + tick_label(gx) + "\" y=\"" +
           tick_label(T + plot_h + 20) +
           "\" font-size=\"11\" font-family=\"sans-serif\" "
           "text-anchor=\"middle\">" + tick_label(xv) + "</text>\n";
    const double fy = ymin + (ymax - ymin) * k / 4.0;
    const double gy = py(fy);
    svg += "<line x1=\"" + tick_label(L - 5) + "\" y1=\"" + tick_label(gy) +
           "\" x2=\"" + tick_label(L) + "\" y2=\"" + tick_label(gy) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + tick_label(L - 8) + "\" y=\"" + tick_label(gy + 4) +
           "\" font-size=\"11\" font-family=\"sans-serif\" "
           "text-anchor=\"end\">" + tick_label(fy) + "</text>\n";
  }
  svg += "<text x=\"" + tick_label(L + plot_w / 2) + "\" y=\"" +
         tick_label(H - 12) +
         "\" font-size=\"13\" font-family=\"sans-serif\" "
         "text-anchor=\"middle\">" + xlabel + (logx ? " (log scale)" : "") +
         "</text>\n";
  svg += "<text x=\"18\" y=\"" + tick_label(T + plot_h / 2) +
         "\" font-size=\"13\" font-family=\"sans-serif\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         tick_label(T + plot_h / 2) + ")\">" + ylabel + "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    auto& s = series[i];
    std::sort(s.points.begin(), s.points.end());
    std::string pts;
    for (const auto& [x, y] : s.points) {
      pts += tick_label(px(x)) + "," + tick_label(py(y)) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"" +
           std::string(detail::palette(i)) + "\" stroke-width=\"1.6\" points=\"" +
           pts + "\"/>\n";
    const double ly = T + 14 + 18.0 * static_cast<double>(i);
    svg += "<line x1=\"" + tick_label(L + plot_w + 12) + "\" y1=\"" +
           tick_label(ly) + "\" x2=\"" + tick_label(L + plot_w + 34) +
           "\" y2=\"" + tick_label(ly) + "\" stroke=\"" +
           std::string(detail::palette(i)) + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + tick_label(L + plot_w + 40) + "\" y=\"" +
           tick_label(ly + 4) +
           "\" font-size=\"11\" font-family=\"sans-serif\">" + s.name +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

inline std::string stem_of(const std::string& csv_path) {
  std::string p = csv_path;
  const auto dot = p.rfind(".csv");
  if (dot != std::string::npos) p.resize(dot);
  return p;
}

inline bool header_is(const io::CsvTable& t,
                      const std::vector<std::string>& names) {
  return t.header == names;
}

}  // namespace detail

// Renders the known CSV schemas to SVG files next to the input; returns the
// written paths. Unknown headers and empty bodies are errors.
inline std::vector<std::string> emit_plots(const std::string& csv_path) {
  const io::CsvTable table = io::read_csv(csv_path);
  if (table.rows.empty()) throw std::runtime_error("plot: no data rows");
  const std::string stem = detail::stem_of(csv_path);
  std::vector<std::string> written;

  auto col = [&](const std::vector<std::string>& row, const char* name) {
    return io::parse_double(row[table.column(name)], name);
  };

  if (detail::header_is(table, {"scenario", "psi_kind", "p", "replicate", "s",
                                "lambda1", "mse_rel", "pe_rel", "est_err_std",
                                "n_active", "runtime_ms"})) {
    // mean mse_rel vs s, one chart per psi kind, one line per p
    std::set<std::string> kinds;
    for (const auto& r : table.rows) kinds.insert(r[table.column("psi_kind")]);
    for (const auto& kind : kinds) {
      std::map<double, std::map<double, std::pair<double, int>>> agg;  // p -> s -> (sum, count)
      for (const auto& r : table.rows) {
        if (r[table.column("psi_kind")] != kind) continue;
        auto& slot = agg[col(r, "p")][col(r, "s")];
        slot.first += col(r, "mse_rel");
        slot.second += 1;
      }
      std::vector<Series> series;
      for (const auto& [p, by_s] : agg) {
        Series s;
        s.name = "p=" + detail::tick_label(p);
        for (const auto& [sv, sum_count] : by_s)
          s.points.emplace_back(sv, sum_count.first / sum_count.second);
        series.push_back(std::move(s));
      }
      const std::string path = stem + "_" + kind + ".svg";
      detail::write_file(path,
                         detail::line_chart("relative MSE, psi = " + kind, "s",
                                            "mean relative MSE",
                                            std::move(series), false));
      written.push_back(path);
    }
    return written;
  }

  if (detail::header_is(table, {"psi_kind", "p", "mse_rel_sopt", "pe_rel_sopt",
                                "est_err_std_s05", "partial_effective_rank"})) {
    std::map<std::string, Series> by_kind;
    for (const auto& r : table.rows) {
      const std::string kind = r[table.column("psi_kind")];
      by_kind[kind].name = kind;
      by_kind[kind].points.emplace_back(col(r, "p"), col(r, "mse_rel_sopt"));
    }
    std::vector<Series> series;
    for (auto& [_, s] : by_kind) series.push_back(std::move(s));
    const std::string path = stem + ".svg";
    detail::write_file(
        path, detail::line_chart("relative MSE at optimal s", "p",
                                 "mean relative MSE", std::move(series), true));
    written.push_back(path);
    return written;
  }

  if (detail::header_is(table, {"method", "s", "mean_pred_err",
                                "mean_est_err"})) {
    for (const char* metric : {"mean_pred_err", "mean_est_err"}) {
      std::map<std::string, Series> by_method;
      for (const auto& r : table.rows) {
        const std::string method = r[table.column("method")];
        by_method[method].name = method;
        by_method[method].points.emplace_back(col(r, "s"), col(r, metric));
      }
      std::vector<Series> series;
      for (auto& [_, s] : by_method) series.push_back(std::move(s));
      const std::string suffix =
          std::string(metric) == "mean_pred_err" ? "_pred" : "_est";
      const std::string title = std::string(metric) == "mean_pred_err"
                                    ? "out-of-sample prediction error"
                                    : "estimation error";
      const std::string path = stem + suffix + ".svg";
      detail::write_file(path, detail::line_chart(title, "s", metric,
                                                  std::move(series), false));
      written.push_back(path);
    }
    return written;
  }

  if (detail::header_is(table, {"step", "active_set_size", "lambda_cv", "mse",
                                "pe", "removed_total", "reps"}) ||
      detail::header_is(table, {"step", "active_set_size", "lambda_cv", "auc",
                                "removed_total", "splits"})) {
    std::vector<Series> series;
    const bool is_auc = table.has_column("auc");
    for (const char* metric :
         (is_auc ? std::vector<const char*>{"auc"}
                 : std::vector<const char*>{"mse", "pe"})) {
      Series s;
      s.name = metric;
      for (const auto& r : table.rows)
        s.points.emplace_back(col(r, "step"), col(r, metric));
      series.push_back(std::move(s));
    }
    const std::string path = stem + ".svg";
    detail::write_file(path, detail::line_chart("sequential removal",
                                                "active set no.", "error",
                                                std::move(series), false));
    written.push_back(path);
    return written;
  }

  if (detail::header_is(table, {"p", "lambda", "bound", "confidence",
                                "partial_effective_rank"})) {
    std::vector<Series> series;
    for (const char* metric : {"bound", "lambda"}) {
      Series s;
      s.name = metric;
      for (const auto& r : table.rows)
        s.points.emplace_back(col(r, "p"), col(r, metric));
      series.push_back(std::move(s));
    }
    const std::string path = stem + ".svg";
    detail::write_file(path,
                       detail::line_chart("prediction bound", "p", "value",
                                          std::move(series), true));
    written.push_back(path);
    return written;
  }

  throw std::runtime_error("plot: unknown csv schema");
}

}  // namespace latreg::svgplot

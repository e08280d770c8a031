#ifndef SAIF_SVG_PLOT_HPP
#define SAIF_SVG_PLOT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "saif/bench_io.hpp"

namespace saif::bench {

namespace svg {

constexpr int kWidth = 880;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 30;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 60;

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline const char* palette(size_t k) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return colors[k % 8];
}

struct Canvas {
  std::ofstream out;

  explicit Canvas(const std::string& path) : out(path) {
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
        << kHeight << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"white\"/>\n";
  }

  void comment(const std::string& text) { out << "<!-- " << text << " -->\n"; }

  void title(const std::string& text) {
    out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"monospace\" font-size=\"15\">" << text << "</text>\n";
  }

  void axes(const std::string& xlabel, const std::string& ylabel) {
    const int x0 = kMarginLeft, y0 = kHeight - kMarginBottom;
    const int x1 = kWidth - kMarginRight, y1 = kMarginTop;
    out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1
        << "\" y2=\"" << y0 << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0
        << "\" y2=\"" << y1 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 14
        << "\" text-anchor=\"middle\" font-family=\"monospace\" "
           "font-size=\"13\">"
        << xlabel << "</text>\n";
    out << "<text x=\"18\" y=\"" << (y0 + y1) / 2
        << "\" text-anchor=\"middle\" font-family=\"monospace\" "
           "font-size=\"13\" transform=\"rotate(-90 18 "
        << (y0 + y1) / 2 << ")\">" << ylabel << "</text>\n";
  }

  void tick_x(double frac, const std::string& label) {
    const double x = kMarginLeft + frac * (kWidth - kMarginLeft - kMarginRight);
    const int y0 = kHeight - kMarginBottom;
    out << "<line x1=\"" << num(x) << "\" y1=\"" << y0 << "\" x2=\"" << num(x)
        << "\" y2=\"" << y0 + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(x) << "\" y=\"" << y0 + 20
        << "\" text-anchor=\"middle\" font-family=\"monospace\" "
           "font-size=\"11\">"
        << label << "</text>\n";
  }

  void tick_y(double frac, const std::string& label) {
    const double y =
        kHeight - kMarginBottom - frac * (kHeight - kMarginTop - kMarginBottom);
    out << "<line x1=\"" << kMarginLeft - 5 << "\" y1=\"" << num(y)
        << "\" x2=\"" << kMarginLeft << "\" y2=\"" << num(y)
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kMarginLeft - 9 << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\" font-family=\"monospace\" "
           "font-size=\"11\">"
        << label << "</text>\n";
  }

  double map_x(double frac) const {
    return kMarginLeft + frac * (kWidth - kMarginLeft - kMarginRight);
  }
  double map_y(double frac) const {
    return kHeight - kMarginBottom -
           frac * (kHeight - kMarginTop - kMarginBottom);
  }

  void close() { out << "</svg>\n"; }
};

struct Range {
  double lo = 0.0, hi = 1.0;
  double frac(double v) const {
    return hi > lo ? (v - lo) / (hi - lo) : 0.5;
  }
};

inline Range nice_range(double lo, double hi) {
  if (!(hi > lo)) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace svg

/// Per-method running-time bars on a log time scale; the raw value rides
/// along as a data-value attribute.
inline void plot_runtime_bars(const std::vector<CsvTable>& tables,
                              const std::string& out_path) {
  struct Bar {
    std::string label;
    double time_s;
  };
  std::vector<Bar> bars;
  for (const auto& t : tables) {
    require_columns(t, {"method", "lambda", "time_s"});
    for (size_t r = 0; r < t.rows.size(); ++r)
      bars.push_back({t.text(r, "method") + "@" + t.text(r, "lambda"),
                      t.number(r, "time_s")});
  }

  svg::Canvas canvas(out_path);
  canvas.comment("kind=runtime_bars bars=" + std::to_string(bars.size()));
  canvas.title("running time by method");
  canvas.axes("method @ lambda", "log10 time (s)");
  if (!bars.empty()) {
    double lo = bars[0].time_s, hi = bars[0].time_s;
    for (const auto& b : bars) {
      lo = std::min(lo, b.time_s);
      hi = std::max(hi, b.time_s);
    }
    const double log_lo = std::log10(std::max(1e-9, lo)) - 0.5;
    const double log_hi = std::log10(std::max(1e-9, hi)) + 0.2;
    for (int k = 0; k <= 4; ++k) {
      const double v = log_lo + (log_hi - log_lo) * k / 4.0;
      canvas.tick_y(k / 4.0, svg::num(v));
    }
    const double span = svg::kWidth - svg::kMarginLeft - svg::kMarginRight;
    const double slot = span / double(bars.size());
    for (size_t k = 0; k < bars.size(); ++k) {
      const double frac =
          (std::log10(std::max(1e-9, bars[k].time_s)) - log_lo) /
          (log_hi - log_lo);
      const double x = svg::kMarginLeft + slot * double(k) + 0.15 * slot;
      const double y = canvas.map_y(std::max(0.0, frac));
      const double base = canvas.map_y(0.0);
      canvas.out << "<rect x=\"" << svg::num(x) << "\" y=\"" << svg::num(y)
                 << "\" width=\"" << svg::num(0.7 * slot) << "\" height=\""
                 << svg::num(base - y) << "\" fill=\"" << svg::palette(k)
                 << "\" data-value=\"" << svg::num(bars[k].time_s)
                 << "\" data-label=\"" << bars[k].label << "\"/>\n";
      canvas.out << "<text x=\"" << svg::num(x + 0.35 * slot) << "\" y=\""
                 << svg::num(base + 16)
                 << "\" text-anchor=\"middle\" font-family=\"monospace\" "
                    "font-size=\"10\">"
                 << bars[k].label << "</text>\n";
    }
  }
  canvas.close();
}

enum class TraceLineKind { active_size, dual_value };

/// Active-set size or dual objective as a function of wall-clock time,
/// one polyline per trace file.
inline void plot_trace_lines(
    const std::vector<std::pair<std::string, CsvTable>>& traces,
    TraceLineKind kind, const std::string& out_path) {
  const std::string ycol =
      kind == TraceLineKind::active_size ? "p_t" : "dual_value";
  svg::Canvas canvas(out_path);
  canvas.comment("kind=" + ycol + "_vs_time traces=" +
                 std::to_string(traces.size()));
  canvas.title(ycol + " over time");
  canvas.axes("time (s)", ycol);

  double tx_hi = 0.0, y_lo = 0.0, y_hi = 1.0;
  bool any = false;
  for (const auto& [label, t] : traces) {
    require_columns(t, {"t_s", ycol});
    for (size_t r = 0; r < t.rows.size(); ++r) {
      const double ts = t.number(r, "t_s");
      const double v = t.number(r, ycol);
      if (!any) {
        y_lo = y_hi = v;
        any = true;
      }
      tx_hi = std::max(tx_hi, ts);
      y_lo = std::min(y_lo, v);
      y_hi = std::max(y_hi, v);
    }
  }
  svg::Range xr{0.0, tx_hi > 0 ? tx_hi * 1.05 : 1.0};
  svg::Range yr = svg::nice_range(y_lo, y_hi);
  for (int k = 0; k <= 4; ++k) {
    canvas.tick_x(k / 4.0, svg::num(xr.lo + (xr.hi - xr.lo) * k / 4.0));
    canvas.tick_y(k / 4.0, svg::num(yr.lo + (yr.hi - yr.lo) * k / 4.0));
  }
  size_t color = 0;
  for (const auto& [label, t] : traces) {
    std::string pts;
    for (size_t r = 0; r < t.rows.size(); ++r) {
      pts += svg::num(canvas.map_x(xr.frac(t.number(r, "t_s"))));
      pts += ',';
      pts += svg::num(canvas.map_y(yr.frac(t.number(r, ycol))));
      pts += ' ';
    }
    if (!pts.empty())
      canvas.out << "<polyline fill=\"none\" stroke=\"" << svg::palette(color)
                 << "\" stroke-width=\"1.5\" data-label=\"" << label
                 << "\" points=\"" << pts << "\"/>\n";
    canvas.out << "<text x=\"" << svg::kWidth - svg::kMarginRight - 8
               << "\" y=\"" << svg::kMarginTop + 16 * int(color + 1)
               << "\" text-anchor=\"end\" font-family=\"monospace\" "
                  "font-size=\"11\" fill=\""
               << svg::palette(color) << "\">" << label << "</text>\n";
    ++color;
  }
  canvas.close();
}

/// Heat map of the active fraction p_t/p over a penalty grid: one column
/// per trace (its lambda), log10(lambda/lambda_max) on x, log(100*t)
/// on y, cell shade = p_t/p.
inline void plot_heatmap_pt(const std::vector<CsvTable>& traces,
                            const std::string& out_path, int time_bins = 40) {
  struct Column {
    double log_ratio;
    std::vector<double> value;  // per time bin
  };
  std::vector<Column> cols;

  // shared y-range over log(100 t)
  double ylo = 0.0, yhi = 1.0;
  bool any = false;
  for (const auto& t : traces) {
    require_columns(t, {"t_s", "p_t"});
    for (size_t r = 0; r < t.rows.size(); ++r) {
      const double lt = std::log(100.0 * std::max(1e-9, t.number(r, "t_s")));
      if (!any) {
        ylo = yhi = lt;
        any = true;
      }
      ylo = std::min(ylo, lt);
      yhi = std::max(yhi, lt);
    }
  }
  if (!(yhi > ylo)) yhi = ylo + 1.0;

  for (const auto& t : traces) {
    const auto lam_it = t.metadata.find("lambda");
    const auto lmax_it = t.metadata.find("lambda_max");
    const auto p_it = t.metadata.find("p");
    if (lam_it == t.metadata.end() || lmax_it == t.metadata.end() ||
        p_it == t.metadata.end())
      throw schema_error("lambda/lambda_max/p metadata");
    const double ratio =
        std::stod(lam_it->second) / std::stod(lmax_it->second);
    const double p_total = std::stod(p_it->second);
    Column col;
    col.log_ratio = std::log10(std::max(1e-12, ratio));
    col.value.assign(size_t(time_bins), 0.0);
    double last = t.rows.empty() ? 0.0 : t.number(0, "p_t") / p_total;
    for (int b = 0; b < time_bins; ++b) {
      const double bin_hi = ylo + (yhi - ylo) * (b + 1) / double(time_bins);
      for (size_t r = 0; r < t.rows.size(); ++r) {
        const double lt = std::log(100.0 * std::max(1e-9, t.number(r, "t_s")));
        if (lt <= bin_hi) last = t.number(r, "p_t") / p_total;
      }
      col.value[size_t(b)] = last;
    }
    cols.push_back(std::move(col));
  }
  std::sort(cols.begin(), cols.end(),
            [](const Column& a, const Column& b) { return a.log_ratio < b.log_ratio; });

  svg::Canvas canvas(out_path);
  canvas.comment("kind=heatmap_pt grid=" + std::to_string(cols.size()) + "x" +
                 std::to_string(time_bins));
  canvas.title("active fraction p_t/p");
  canvas.axes("log10(lambda/lambda_max)", "log(100*t(sec.))");
  if (!cols.empty()) {
    for (int k = 0; k <= 4; ++k) {
      const double fx = k / 4.0;
      const double lr =
          cols.front().log_ratio +
          (cols.back().log_ratio - cols.front().log_ratio) * fx;
      canvas.tick_x(fx, svg::num(lr));
      canvas.tick_y(fx, svg::num(ylo + (yhi - ylo) * fx));
    }
    const double span_x = svg::kWidth - svg::kMarginLeft - svg::kMarginRight;
    const double span_y = svg::kHeight - svg::kMarginTop - svg::kMarginBottom;
    const double cw = span_x / double(cols.size());
    const double ch = span_y / double(time_bins);
    for (size_t c = 0; c < cols.size(); ++c) {
      for (int b = 0; b < time_bins; ++b) {
        const double v = std::clamp(cols[c].value[size_t(b)], 0.0, 1.0);
        // white (0) to dark blue (1)
        const int r255 = int(255 - 225 * v);
        const int g255 = int(255 - 180 * v);
        const int b255 = int(255 - 75 * v);
        const double x = svg::kMarginLeft + cw * double(c);
        const double y = svg::kHeight - svg::kMarginBottom - ch * (b + 1);
        canvas.out << "<rect x=\"" << svg::num(x) << "\" y=\"" << svg::num(y)
                   << "\" width=\"" << svg::num(cw) << "\" height=\""
                   << svg::num(ch) << "\" fill=\"rgb(" << r255 << ',' << g255
                   << ',' << b255 << ")\" data-value=\"" << svg::num(v)
                   << "\"/>\n";
      }
    }
  }
  canvas.close();
}

}  // namespace saif::bench

#endif  // SAIF_SVG_PLOT_HPP

#include "gbdmpc/plotting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "gbdmpc/common.hpp"

namespace gbdmpc {

namespace {

constexpr double kWidth = 640.0, kHeight = 360.0;
constexpr double kLeft = 60.0, kRight = 15.0, kTop = 30.0, kBottom = 45.0;
constexpr const char* kPalette[6] = {"#1f6fb2", "#d1495b", "#3a7d44",
                                     "#e0a100", "#6a4c93", "#3b3b3b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

struct Range {
  double lo = 0.0, hi = 1.0;

  void include(double v) {
    if (!std::isfinite(v)) return;
    if (empty) {
      lo = hi = v;
      empty = false;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void finish() {
    if (empty) {
      lo = 0.0;
      hi = 1.0;
    } else if (hi - lo < 1e-12 * (1.0 + std::abs(lo))) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  double frac(double v) const { return (v - lo) / (hi - lo); }

 private:
  bool empty = true;
};

void open_svg(std::ofstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth)
      << "\" height=\"" << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth) << ' '
      << num(kHeight) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"18\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"13\">"
      << escape(title) << "</text>\n";
  out << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\""
      << num(kWidth - kLeft - kRight) << "\" height=\"" << num(kHeight - kTop - kBottom)
      << "\" fill=\"none\" stroke=\"#888\"/>\n";
}

void axis_labels(std::ofstream& out, const std::string& xlabel, const std::string& ylabel,
                 const Range& rx, const Range& ry) {
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  for (int i = 0; i <= 4; ++i) {
    const double f = i / 4.0;
    const double xv = rx.lo + f * (rx.hi - rx.lo);
    const double yv = ry.lo + f * (ry.hi - ry.lo);
    out << "<text x=\"" << num(kLeft + f * pw) << "\" y=\"" << num(kHeight - kBottom + 15)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
        << num(xv) << "</text>\n";
    out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(kHeight - kBottom - f * ph + 3)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << num(yv)
        << "</text>\n";
  }
  out << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 8)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
      << escape(xlabel) << "</text>\n";
  out << "<text x=\"14\" y=\"" << num(kTop + ph / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
         "transform=\"rotate(-90 14 "
      << num(kTop + ph / 2) << ")\">" << escape(ylabel) << "</text>\n";
}

}  // namespace

void write_svg_lines(const std::vector<Series>& series, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "write_svg_lines: cannot open '" + path + "'");

  Range rx, ry;
  for (const auto& s : series) {
    require(s.x.size() == s.y.size(), "write_svg_lines: series length mismatch");
    for (double v : s.x) rx.include(v);
    for (double v : s.y) ry.include(v);
  }
  rx.finish();
  ry.finish();

  open_svg(out, title);
  axis_labels(out, xlabel, ylabel, rx, ry);

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % 6];
    if (!series[i].x.empty()) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t k = 0; k < series[i].x.size(); ++k) {
        const double px = kLeft + rx.frac(series[i].x[k]) * pw;
        const double py = kHeight - kBottom - ry.frac(series[i].y[k]) * ph;
        out << num(px) << ',' << num(py) << ' ';
      }
      out << "\"/>\n";
    }
    const double ly = kTop + 14.0 + 14.0 * static_cast<double>(i);
    out << "<line x1=\"" << num(kLeft + pw - 130) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(kLeft + pw - 110) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(kLeft + pw - 105) << "\" y=\"" << num(ly + 3)
        << "\" font-family=\"sans-serif\" font-size=\"10\">" << escape(series[i].label)
        << "</text>\n";
  }
  out << "</svg>\n";
}

void write_svg_hist(const std::vector<double>& values, int bins, const std::string& title,
                    const std::string& xlabel, const std::string& path) {
  require(bins >= 1, "write_svg_hist: need at least one bin");
  std::ofstream out(path);
  require(out.good(), "write_svg_hist: cannot open '" + path + "'");

  Range rx;
  for (double v : values) rx.include(v);
  rx.finish();

  std::vector<int> count(bins, 0);
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    int b = static_cast<int>(rx.frac(v) * bins);
    count[std::clamp(b, 0, bins - 1)]++;
  }
  Range ry;
  ry.include(0.0);
  for (int c : count) ry.include(static_cast<double>(c));
  ry.finish();

  open_svg(out, title);
  axis_labels(out, xlabel, "count", rx, ry);

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const double bw = pw / bins;
  for (int b = 0; b < bins; ++b) {
    const double h = ry.frac(static_cast<double>(count[b])) * ph;
    out << "<rect x=\"" << num(kLeft + b * bw + 1) << "\" y=\""
        << num(kHeight - kBottom - h) << "\" width=\"" << num(bw - 2) << "\" height=\""
        << num(h) << "\" fill=\"" << kPalette[0] << "\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace gbdmpc

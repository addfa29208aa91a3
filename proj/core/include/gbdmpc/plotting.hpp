#pragma once

#include <string>
#include <vector>

// Dependency-free SVG plots on a fixed 640x360 canvas. Output is
// deterministic: numbers are formatted with %.6g, series are drawn in the
// order given, and nothing depends on locale or clock.
namespace gbdmpc {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

// Polyline chart with axes, tick labels, and a legend. Empty series and
// all-empty inputs produce a valid plot with just the frame.
void write_svg_lines(const std::vector<Series>& series, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::string& path);

// Histogram of values over equal-width bins.
void write_svg_hist(const std::vector<double>& values, int bins,
                    const std::string& title, const std::string& xlabel,
                    const std::string& path);

}  // namespace gbdmpc

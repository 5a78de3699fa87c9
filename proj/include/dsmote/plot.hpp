#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dsmote {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  std::vector<double> band;  // half-width of the shaded +/- region; may be empty
  uint8_t r = 0, g = 0, b = 0;
};

// Minimal built-in rasterizer: axes, tick labels, polylines and shaded
// +/- bands onto a PNG. y range is [0,1] (metric scale).
void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::vector<PlotSeries>& series);

}  // namespace dsmote

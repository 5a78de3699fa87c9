#include "dsmote/plot.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "dsmote/error.hpp"
#include "dsmote/png.hpp"

namespace dsmote {

namespace {

constexpr int kW = 640, kH = 440;
constexpr int kLeft = 56, kRight = 150, kTop = 34, kBottom = 40;

struct Canvas {
  std::vector<uint8_t> px;
  Canvas() : px(static_cast<size_t>(kW) * kH * 3, 255) {}
  void set(int x, int y, uint8_t r, uint8_t g, uint8_t b) {
    if (x < 0 || x >= kW || y < 0 || y >= kH) return;
    uint8_t* p = px.data() + (static_cast<size_t>(y) * kW + x) * 3;
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }
  void blend(int x, int y, uint8_t r, uint8_t g, uint8_t b, double a) {
    if (x < 0 || x >= kW || y < 0 || y >= kH) return;
    uint8_t* p = px.data() + (static_cast<size_t>(y) * kW + x) * 3;
    p[0] = static_cast<uint8_t>(p[0] * (1 - a) + r * a);
    p[1] = static_cast<uint8_t>(p[1] * (1 - a) + g * a);
    p[2] = static_cast<uint8_t>(p[2] * (1 - a) + b * a);
  }
};

// 3x5 caps-only bitmap font.
struct Glyph {
  char c;
  const char* rows[5];
};

const Glyph kFont[] = {
    {'0', {"###", "#.#", "#.#", "#.#", "###"}},
    {'1', {".#.", "##.", ".#.", ".#.", "###"}},
    {'2', {"###", "..#", "###", "#..", "###"}},
    {'3', {"###", "..#", "###", "..#", "###"}},
    {'4', {"#.#", "#.#", "###", "..#", "..#"}},
    {'5', {"###", "#..", "###", "..#", "###"}},
    {'6', {"###", "#..", "###", "#.#", "###"}},
    {'7', {"###", "..#", "..#", "..#", "..#"}},
    {'8', {"###", "#.#", "###", "#.#", "###"}},
    {'9', {"###", "#.#", "###", "..#", "###"}},
    {'A', {"###", "#.#", "###", "#.#", "#.#"}},
    {'B', {"##.", "#.#", "##.", "#.#", "##."}},
    {'C', {"###", "#..", "#..", "#..", "###"}},
    {'D', {"##.", "#.#", "#.#", "#.#", "##."}},
    {'E', {"###", "#..", "###", "#..", "###"}},
    {'F', {"###", "#..", "###", "#..", "#.."}},
    {'G', {"###", "#..", "#.#", "#.#", "###"}},
    {'H', {"#.#", "#.#", "###", "#.#", "#.#"}},
    {'I', {"###", ".#.", ".#.", ".#.", "###"}},
    {'J', {"..#", "..#", "..#", "#.#", "###"}},
    {'K', {"#.#", "#.#", "##.", "#.#", "#.#"}},
    {'L', {"#..", "#..", "#..", "#..", "###"}},
    {'M', {"#.#", "###", "###", "#.#", "#.#"}},
    {'N', {"#.#", "###", "###", "###", "#.#"}},
    {'O', {"###", "#.#", "#.#", "#.#", "###"}},
    {'P', {"###", "#.#", "###", "#..", "#.."}},
    {'Q', {"###", "#.#", "#.#", "###", "..#"}},
    {'R', {"###", "#.#", "##.", "#.#", "#.#"}},
    {'S', {"###", "#..", "###", "..#", "###"}},
    {'T', {"###", ".#.", ".#.", ".#.", ".#."}},
    {'U', {"#.#", "#.#", "#.#", "#.#", "###"}},
    {'V', {"#.#", "#.#", "#.#", "#.#", ".#."}},
    {'W', {"#.#", "#.#", "###", "###", "#.#"}},
    {'X', {"#.#", "#.#", ".#.", "#.#", "#.#"}},
    {'Y', {"#.#", "#.#", ".#.", ".#.", ".#."}},
    {'Z', {"###", "..#", ".#.", "#..", "###"}},
    {'.', {"...", "...", "...", "...", ".#."}},
    {'-', {"...", "...", "###", "...", "..."}},
    {'_', {"...", "...", "...", "...", "###"}},
    {':', {"...", ".#.", "...", ".#.", "..."}},
    {'+', {"...", ".#.", "###", ".#.", "..."}},
    {'/', {"..#", "..#", ".#.", "#..", "#.."}},
    {'(', {".#.", "#..", "#..", "#..", ".#."}},
    {')', {".#.", "..#", "..#", "..#", ".#."}},
    {' ', {"...", "...", "...", "...", "..."}},
};

const Glyph* find_glyph(char c) {
  const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (const auto& g : kFont)
    if (g.c == u) return &g;
  return nullptr;
}

void draw_text(Canvas& cv, int x, int y, const std::string& text, int scale, uint8_t r,
               uint8_t g, uint8_t b) {
  int cx = x;
  for (char c : text) {
    const Glyph* gl = find_glyph(c);
    if (gl) {
      for (int ry = 0; ry < 5; ++ry)
        for (int rx = 0; rx < 3; ++rx)
          if (gl->rows[ry][rx] == '#')
            for (int sy = 0; sy < scale; ++sy)
              for (int sx = 0; sx < scale; ++sx)
                cv.set(cx + rx * scale + sx, y + ry * scale + sy, r, g, b);
    }
    cx += 4 * scale;
  }
}

void draw_line(Canvas& cv, double x0, double y0, double x1, double y1, uint8_t r,
               uint8_t g, uint8_t b) {
  const double dx = x1 - x0, dy = y1 - y0;
  const int steps = std::max(2, static_cast<int>(std::ceil(std::max(std::abs(dx), std::abs(dy)))) * 2);
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    const int px = static_cast<int>(std::lround(x0 + t * dx));
    const int py = static_cast<int>(std::lround(y0 + t * dy));
    cv.set(px, py, r, g, b);
    cv.set(px + 1, py, r, g, b);
    cv.set(px, py + 1, r, g, b);
  }
}

}  // namespace

void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::vector<PlotSeries>& series) {
  if (series.empty()) throw DataError("write_line_plot: no series");
  double xmin = series[0].x.front(), xmax = series[0].x.front();
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty())
      throw DataError("write_line_plot: malformed series '" + s.label + "'");
    for (double v : s.x) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
  }
  if (xmax == xmin) xmax = xmin + 1.0;

  Canvas cv;
  const int plot_w = kW - kLeft - kRight;
  const int plot_h = kH - kTop - kBottom;
  auto to_px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  auto to_py = [&](double y) {
    const double clamped = std::clamp(y, 0.0, 1.0);
    return kTop + (1.0 - clamped) * plot_h;
  };

  // Bands first so the curves draw on top.
  for (const auto& s : series) {
    if (s.band.empty()) continue;
    for (size_t i = 0; i + 1 < s.x.size(); ++i) {
      const int px0 = static_cast<int>(std::lround(to_px(s.x[i])));
      const int px1 = static_cast<int>(std::lround(to_px(s.x[i + 1])));
      for (int px = px0; px <= px1; ++px) {
        const double t = px1 == px0 ? 0.0 : static_cast<double>(px - px0) / (px1 - px0);
        const double mid = s.y[i] + t * (s.y[i + 1] - s.y[i]);
        const double half = s.band[i] + t * (s.band[i + 1] - s.band[i]);
        const int top = static_cast<int>(std::lround(to_py(mid + half)));
        const int bot = static_cast<int>(std::lround(to_py(mid - half)));
        for (int py = top; py <= bot; ++py) cv.blend(px, py, s.r, s.g, s.b, 0.25);
      }
    }
    // Zero-width bands still get a hairline so R=1 sweeps show the region.
    if (s.x.size() == 1) {
      const int px = static_cast<int>(std::lround(to_px(s.x[0])));
      const int top = static_cast<int>(std::lround(to_py(s.y[0] + s.band[0])));
      const int bot = static_cast<int>(std::lround(to_py(s.y[0] - s.band[0])));
      for (int py = top; py <= bot; ++py) cv.blend(px, py, s.r, s.g, s.b, 0.25);
    }
  }

  // Axes
  for (int y = kTop; y <= kH - kBottom; ++y) cv.set(kLeft, y, 0, 0, 0);
  for (int x = kLeft; x <= kW - kRight; ++x) cv.set(x, kH - kBottom, 0, 0, 0);
  char buf[64];
  for (int i = 0; i <= 5; ++i) {
    const double yv = i / 5.0;
    const int py = static_cast<int>(std::lround(to_py(yv)));
    for (int x = kLeft - 3; x <= kLeft; ++x) cv.set(x, py, 0, 0, 0);
    std::snprintf(buf, sizeof buf, "%.1f", yv);
    draw_text(cv, kLeft - 30, py - 5, buf, 2, 0, 0, 0);
  }
  for (double xv : series[0].x) {
    const int px = static_cast<int>(std::lround(to_px(xv)));
    for (int y = kH - kBottom; y <= kH - kBottom + 3; ++y) cv.set(px, y, 0, 0, 0);
    std::snprintf(buf, sizeof buf, "%g", xv);
    draw_text(cv, px - 8, kH - kBottom + 6, buf, 2, 0, 0, 0);
  }

  for (const auto& s : series) {
    for (size_t i = 0; i + 1 < s.x.size(); ++i)
      draw_line(cv, to_px(s.x[i]), to_py(s.y[i]), to_px(s.x[i + 1]), to_py(s.y[i + 1]),
                s.r, s.g, s.b);
    for (size_t i = 0; i < s.x.size(); ++i) {
      const int px = static_cast<int>(std::lround(to_px(s.x[i])));
      const int py = static_cast<int>(std::lround(to_py(s.y[i])));
      for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) cv.set(px + dx, py + dy, s.r, s.g, s.b);
    }
  }

  draw_text(cv, kLeft, 10, title, 2, 0, 0, 0);
  draw_text(cv, kLeft + plot_w / 2 - static_cast<int>(x_label.size()) * 4,
            kH - 14, x_label, 2, 0, 0, 0);
  int ly = kTop + 4;
  for (const auto& s : series) {
    const int lx = kW - kRight + 12;
    for (int dy = 0; dy < 8; ++dy)
      for (int dx = 0; dx < 8; ++dx) cv.set(lx + dx, ly + dy, s.r, s.g, s.b);
    draw_text(cv, lx + 12, ly - 1, s.label, 2, 0, 0, 0);
    ly += 16;
  }

  write_png(path, kW, kH, 3, cv.px);
}

}  // namespace dsmote

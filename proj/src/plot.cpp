// SPDX-License-Identifier: Apache-2.0
#include "shadowpose/plot.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace shadowpose {

namespace {

// 5x7 glyphs, one byte per row, low 5 bits used (MSB = leftmost column).
const std::map<char, std::array<unsigned char, 7>>& font() {
  static const std::map<char, std::array<unsigned char, 7>> glyphs = {
      {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
      {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
      {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
      {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
      {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
      {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
      {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
      {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
      {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
      {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
      {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
      {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
      {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
      {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
      {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
      {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
      {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
      {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
      {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
      {'N', {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11}},
      {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
      {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
      {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
      {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
      {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
      {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
      {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
      {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
      {'Y', {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}},
      {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
      {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
      {',', {0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08}},
      {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
      {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
      {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
      {'%', {0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03}},
      {'/', {0x01, 0x02, 0x02, 0x04, 0x08, 0x08, 0x10}},
      {'=', {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00}},
      {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
  };
  return glyphs;
}

void put_pixel(ImageTensor& img, int y, int x, const std::array<double, 3>& c) {
  if (y < 0 || y >= img.height || x < 0 || x >= img.width) return;
  for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = c[static_cast<std::size_t>(ch)];
}

void fill_rect(ImageTensor& img, int y0, int x0, int y1, int x1,
               const std::array<double, 3>& c) {
  for (int y = std::max(0, y0); y < std::min(img.height, y1); ++y)
    for (int x = std::max(0, x0); x < std::min(img.width, x1); ++x)
      put_pixel(img, y, x, c);
}

}  // namespace

void draw_text(ImageTensor& img, int y, int x, const std::string& text,
               const std::array<double, 3>& color, int scale) {
  int cx = x;
  for (char raw : text) {
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
    const auto it = font().find(c);
    if (it != font().end()) {
      for (int ry = 0; ry < 7; ++ry)
        for (int rx = 0; rx < 5; ++rx)
          if (it->second[static_cast<std::size_t>(ry)] & (0x10 >> rx))
            fill_rect(img, y + ry * scale, cx + rx * scale, y + (ry + 1) * scale,
                      cx + (rx + 1) * scale, color);
    }
    cx += 6 * scale;
  }
}

std::vector<std::string> render_grouped_bars(ImageTensor& canvas,
                                             const std::string& title,
                                             const std::vector<std::string>& groups,
                                             const std::vector<BarSeries>& series) {
  const int bar_w = 26, gap = 18;
  const int left = 56, right = 24, top = 34, bottom = 46;
  const int plot_w =
      static_cast<int>(groups.size()) *
          (static_cast<int>(series.size()) * bar_w + gap) + gap;
  const int width = std::max(360, left + right + plot_w);
  const int height = 320;
  canvas = ImageTensor::constant(height, width, 3, 1.0);

  const std::array<double, 3> axis = {0.25, 0.25, 0.25};
  const std::array<double, 3> grid = {0.85, 0.85, 0.85};
  const int py0 = top, py1 = height - bottom;

  double vmax = 1.0;
  for (const auto& s : series)
    for (double v : s.values)
      if (std::isfinite(v)) vmax = std::max(vmax, v);
  vmax *= 1.05;

  // horizontal grid + y labels at quarters
  for (int q = 0; q <= 4; ++q) {
    const double frac = q / 4.0;
    const int y = py1 - static_cast<int>(frac * (py1 - py0));
    fill_rect(canvas, y, left, y + 1, width - right, q == 0 ? axis : grid);
    char label[16];
    std::snprintf(label, sizeof label, "%.2f", frac * vmax);
    draw_text(canvas, y - 3, 8, label, axis);
  }
  fill_rect(canvas, py0, left, py1 + 1, left + 1, axis);  // y axis

  draw_text(canvas, 10, left, title, axis, 2);

  std::vector<std::string> absent;
  int x = left + gap;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double v = g < series[s].values.size()
                           ? series[s].values[g]
                           : std::numeric_limits<double>::quiet_NaN();
      if (std::isfinite(v)) {
        const int bh = static_cast<int>((v / vmax) * (py1 - py0));
        fill_rect(canvas, py1 - bh, x, py1, x + bar_w - 2, series[s].color);
      } else {
        absent.push_back(groups[g] + "/" + series[s].name);
      }
      x += bar_w;
    }
    const int group_center = x - static_cast<int>(series.size()) * bar_w / 2;
    draw_text(canvas, py1 + 8,
              group_center - 3 * static_cast<int>(groups[g].size()), groups[g], axis);
    x += gap;
  }

  // legend
  int lx = width - right - 150, ly = py0 + 6;
  for (const auto& s : series) {
    fill_rect(canvas, ly, lx, ly + 8, lx + 8, s.color);
    draw_text(canvas, ly, lx + 12, s.name, axis);
    ly += 14;
  }
  return absent;
}

}  // namespace shadowpose

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <vector>

#include "shadowpose/image.hpp"

namespace shadowpose {

// One bar per group; NaN marks an absent value (bar is skipped, not zero).
struct BarSeries {
  std::string name;
  std::vector<double> values;
  std::array<double, 3> color = {0.3, 0.5, 0.8};
};

// Self-contained grouped-bar renderer (5x7 bitmap font, no external plotting
// dependency); returns the list of absent (group, series) labels.
std::vector<std::string> render_grouped_bars(ImageTensor& canvas,
                                             const std::string& title,
                                             const std::vector<std::string>& groups,
                                             const std::vector<BarSeries>& series);

void draw_text(ImageTensor& img, int y, int x, const std::string& text,
               const std::array<double, 3>& color, int scale = 1);

}  // namespace shadowpose

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "daql/io.hpp"

namespace daql::render {

/// Values on a full rectangular grid, x fastest, y increasing.
struct Grid {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> values;  // ys.size() * xs.size()

  double at(std::size_t ix, std::size_t iy) const { return values[iy * xs.size() + ix]; }
};

/// Collects the x, y and `column` cells of a CSV. Throws FormatError on a
/// missing column, a non-numeric cell, or a grid that is not full (ragged or
/// duplicated nodes).
Grid grid_from_csv(const io::CsvTable& table, std::string_view column = "value");

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

/// Linear blue-to-red map of u in [0, 1]. NaN maps to black.
Rgb color(double u);

struct Heatmap {
  std::string ppm;  // binary P6
  int width = 0;
  int height = 0;
  double min = 0.0;
  double max = 0.0;
};

/// Each node becomes a `block` x `block` square; the top image row holds the
/// largest y. A constant grid renders in the low color.
Heatmap heatmap(const Grid& grid, int block = 2);

}  // namespace daql::render

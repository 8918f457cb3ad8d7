#include "daql/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "daql/errors.hpp"

namespace daql::render {

Grid grid_from_csv(const io::CsvTable& table, std::string_view column) {
  const std::size_t cx = table.column("x");
  const std::size_t cy = table.column("y");
  const std::size_t cv = table.column(column);
  if (table.rows.empty()) throw FormatError("CSV has no data rows");
  std::map<std::pair<double, double>, double> cells;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const double x = table.number(i, cx);
    const double y = table.number(i, cy);
    if (!cells.emplace(std::pair{y, x}, table.number(i, cv)).second) {
      throw FormatError("CSV row " + std::to_string(i + 1) + " repeats node (" + table.rows[i][cx] + ", " +
                        table.rows[i][cy] + ")");
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  for (auto* v : {&xs, &ys}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  if (cells.size() != xs.size() * ys.size()) {
    throw FormatError("ragged grid: " + std::to_string(cells.size()) + " nodes for " + std::to_string(xs.size()) +
                      " x " + std::to_string(ys.size()) + " distinct coordinates");
  }
  Grid g{std::move(xs), std::move(ys), {}};
  g.values.reserve(cells.size());
  for (const auto& [key, v] : cells) g.values.push_back(v);
  return g;
}

Rgb color(double u) {
  if (std::isnan(u)) return {};
  u = std::clamp(u, 0.0, 1.0);
  const auto r = static_cast<std::uint8_t>(std::lround(255.0 * u));
  return {r, 0, static_cast<std::uint8_t>(255 - r)};
}

Heatmap heatmap(const Grid& grid, int block) {
  if (block < 1) throw ValidationError("block size must be >= 1");
  const std::size_t nx = grid.xs.size();
  const std::size_t ny = grid.ys.size();
  if (nx == 0 || ny == 0 || grid.values.size() != nx * ny) throw ValidationError("heatmap needs a full grid");
  Heatmap h;
  h.width = static_cast<int>(nx) * block;
  h.height = static_cast<int>(ny) * block;
  h.min = std::numeric_limits<double>::infinity();
  h.max = -h.min;
  for (double v : grid.values) {
    if (std::isnan(v)) continue;
    h.min = std::min(h.min, v);
    h.max = std::max(h.max, v);
  }
  if (h.min > h.max) h.min = h.max = std::numeric_limits<double>::quiet_NaN();
  const double span = h.max - h.min;
  h.ppm = "P6\n" + std::to_string(h.width) + ' ' + std::to_string(h.height) + "\n255\n";
  for (int row = 0; row < h.height; ++row) {
    const std::size_t iy = ny - 1 - static_cast<std::size_t>(row / block);
    for (int col = 0; col < h.width; ++col) {
      const double v = grid.at(static_cast<std::size_t>(col / block), iy);
      const Rgb c = color(span > 0.0 ? (v - h.min) / span : (std::isnan(v) ? v : 0.0));
      h.ppm.push_back(static_cast<char>(c.r));
      h.ppm.push_back(static_cast<char>(c.g));
      h.ppm.push_back(static_cast<char>(c.b));
    }
  }
  return h;
}

}  // namespace daql::render

#include "roadseg/postprocess.hpp"

#include <algorithm>
#include <cmath>

#include "roadseg/errors.hpp"

namespace roadseg {

std::vector<std::optional<FurthestCell>> furthest_road_cell_per_column(
    const LabelMap& labels, const FeatureTensor& features) {
  if (labels.rows != features.rows || labels.cols != features.cols)
    throw ShapeError("furthest_road_cell_per_column: label and feature grids differ");

  std::vector<std::optional<FurthestCell>> out(labels.cols);
  for (std::size_t j = 0; j < labels.cols; ++j) {
    for (std::size_t i = 0; i < labels.rows; ++i) {
      if (!labels.at(i, j)) continue;
      if (!features.occupied(i, j)) continue;
      const float r = features.at(kLowRange, i, j);
      if (!out[j] || r > out[j]->range_m) {
        FurthestCell cell;
        cell.row = i;
        cell.col = j;
        cell.range_m = r;
        cell.x = features.at(kLowX, i, j);
        cell.y = features.at(kLowY, i, j);
        out[j] = cell;
      }
    }
  }
  return out;
}

Polygon contour_polygon(const std::vector<std::optional<FurthestCell>>& furthest,
                        const BevSpec& bev) {
  bev.validate();
  Polygon poly;
  for (const auto& cell : furthest) {  // already in column order
    if (!cell) continue;
    const double x = cell->x;
    const double y = cell->y;
    if (x < bev.x_min_m || x > bev.x_max_m || y < bev.y_min_m || y > bev.y_max_m) continue;
    poly.vertices.push_back(Vertex{(x - bev.x_min_m) / bev.resolution_m,
                                   (y - bev.y_min_m) / bev.resolution_m});
  }
  if (poly.vertices.empty())
    throw GeometryError("contour_polygon: no furthest point falls inside the BEV window");

  // Close through the near edge: straight drops from both contour ends onto
  // u = 0, connected along that edge.
  const Vertex first = poly.vertices.front();
  const Vertex last = poly.vertices.back();
  poly.vertices.push_back(Vertex{0.0, last.v});
  poly.vertices.push_back(Vertex{0.0, first.v});
  return poly;
}

namespace {

// Is the cell center exactly on segment a-b? Exact IEEE comparisons: the
// collinearity cross product and the bounding box.
bool center_on_segment(double cx, double cy, const Vertex& a, const Vertex& b) {
  const double cross = (b.u - a.u) * (cy - a.v) - (b.v - a.v) * (cx - a.u);
  if (cross != 0.0) return false;
  return std::min(a.u, b.u) <= cx && cx <= std::max(a.u, b.u) && std::min(a.v, b.v) <= cy &&
         cy <= std::max(a.v, b.v);
}

}  // namespace

RoadMask fill_polygon(const Polygon& poly, const BevSpec& bev) {
  bev.validate();
  RoadMask mask(bev);
  const auto& verts = poly.vertices;
  const std::size_t n = verts.size();
  if (n < 3) return mask;

  const std::size_t nx = mask.x_cells, ny = mask.y_cells;
  std::vector<double> crossings;
  crossings.reserve(n);

  // Scanlines run along v (the y axis); one per cell-center row u = ix + 0.5.
  for (std::size_t ix = 0; ix < nx; ++ix) {
    const double cu = static_cast<double>(ix) + 0.5;

    crossings.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Vertex& a = verts[i];
      const Vertex& b = verts[(i + n - 1) % n];
      if ((a.u > cu) != (b.u > cu))
        crossings.push_back((b.v - a.v) * (cu - a.u) / (b.u - a.u) + a.v);
    }
    std::sort(crossings.begin(), crossings.end());

    // Even-odd parity swept in cell order: a center is inside when an odd
    // number of crossings lie strictly beyond it.
    std::size_t k = 0;  // crossings <= center v
    for (std::size_t iy = 0; iy < ny; ++iy) {
      const double cv = static_cast<double>(iy) + 0.5;
      while (k < crossings.size() && crossings[k] <= cv) ++k;
      const bool inside = ((crossings.size() - k) % 2) == 1;
      if (inside) mask.set(ix, iy, true);
    }

    // Centers exactly on an edge count as road even when parity says no.
    for (std::size_t i = 0; i < n; ++i) {
      const Vertex& a = verts[i];
      const Vertex& b = verts[(i + n - 1) % n];
      const bool spans_row = std::min(a.u, b.u) <= cu && cu <= std::max(a.u, b.u);
      if (!spans_row) continue;
      if (a.u == b.u) {
        // Edge parallel to the scanline: every covered half-integer center.
        if (a.u != cu) continue;
        const double lo = std::min(a.v, b.v), hi = std::max(a.v, b.v);
        const auto first = static_cast<std::int64_t>(std::ceil(lo - 0.5));
        for (std::int64_t iy = std::max<std::int64_t>(first, 0);
             static_cast<double>(iy) + 0.5 <= hi && iy < static_cast<std::int64_t>(ny); ++iy)
          if (center_on_segment(cu, static_cast<double>(iy) + 0.5, a, b))
            mask.set(ix, static_cast<std::size_t>(iy), true);
      } else {
        const double vc = (b.v - a.v) * (cu - a.u) / (b.u - a.u) + a.v;
        // Check the centers bracketing the computed intersection.
        const auto base = static_cast<std::int64_t>(std::floor(vc - 0.5));
        for (std::int64_t iy = base - 1; iy <= base + 1; ++iy) {
          if (iy < 0 || iy >= static_cast<std::int64_t>(ny)) continue;
          if (center_on_segment(cu, static_cast<double>(iy) + 0.5, a, b))
            mask.set(ix, static_cast<std::size_t>(iy), true);
        }
      }
    }
  }
  return mask;
}

RoadMask drivable_area_mask(const LabelMap& labels, const FeatureTensor& features,
                            const BevSpec& bev) {
  const auto furthest = furthest_road_cell_per_column(labels, features);
  try {
    return fill_polygon(contour_polygon(furthest, bev), bev);
  } catch (const GeometryError&) {
    return RoadMask(bev);  // nothing labeled road in the window
  }
}

}  // namespace roadseg

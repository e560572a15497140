#ifndef ROADSEG_POSTPROCESS_HPP
#define ROADSEG_POSTPROCESS_HPP

#include <optional>
#include <vector>

#include "roadseg/bev.hpp"
#include "roadseg/projection.hpp"
#include "roadseg/refnet.hpp"

namespace roadseg {

/// The per-column pick: the occupied road cell with the largest measured
/// range, together with the winning point's ground position.
struct FurthestCell {
  std::size_t row = 0;
  std::size_t col = 0;
  float range_m = 0.0f;
  float x = 0.0f;  // low point of the cell
  float y = 0.0f;
};

/// For each spherical-grid column, the furthest occupied road cell (by range
/// of the cell's low point), or nullopt when the column has none.
std::vector<std::optional<FurthestCell>> furthest_road_cell_per_column(
    const LabelMap& labels, const FeatureTensor& features);

/// Vertex in continuous BEV cell coordinates: u along x (forward, 0 at the
/// near edge), v along y. Cell (ix, iy) covers [ix, ix+1) x [iy, iy+1).
struct Vertex {
  double u = 0.0;
  double v = 0.0;
};

struct Polygon {
  std::vector<Vertex> vertices;
};

/// Project the furthest cells onto the BEV in column order, dropping
/// out-of-window points, then close the contour through the near edge:
/// perpendiculars from the last and first vertices down to u = 0, joined
/// along that edge. Throws GeometryError when no vertex lands in the window.
Polygon contour_polygon(const std::vector<std::optional<FurthestCell>>& furthest,
                        const BevSpec& bev);

/// Even-odd scanline fill over cell centers; a center exactly on the polygon
/// boundary counts as inside. Polygons with fewer than 3 vertices fill
/// nothing.
RoadMask fill_polygon(const Polygon& poly, const BevSpec& bev);

/// labels -> filled drivable-area mask; an all-empty contour yields an empty
/// mask rather than an error.
RoadMask drivable_area_mask(const LabelMap& labels, const FeatureTensor& features,
                            const BevSpec& bev);

}  // namespace roadseg

#endif  // ROADSEG_POSTPROCESS_HPP

#include "roadseg/projection.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "roadseg/errors.hpp"

namespace roadseg {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

void GridSpec::validate() const {
  if (rows < 1 || cols < 1) throw ConfigError("grid: rows and cols must be positive");
  if (!(elevation_min_deg < elevation_max_deg))
    throw ConfigError("grid: elevation_min must be below elevation_max");
  const double fov = static_cast<double>(cols) * azimuth_res_deg;
  if (std::abs(fov - 2.0 * azimuth_max_deg) > 1e-9 * std::max(1.0, std::abs(fov)))
    throw ConfigError("grid: cols * azimuth_res must equal 2 * azimuth_max");
}

bool FeatureTensor::occupied(std::size_t row, std::size_t col) const {
  for (std::size_t c = 0; c <= kHighIntensity; ++c)
    if (at(c, row, col) != 0.0f) return true;
  return false;
}

SphericalCoord spherical_coords(const Point& p) {
  const double x = p.x, y = p.y, z = p.z;
  const double r = std::sqrt(x * x + y * y + z * z);
  if (r == 0.0) throw GeometryError("spherical_coords: direction of the origin is undefined");
  SphericalCoord s;
  s.range_m = r;
  s.theta_deg = std::atan2(y, x) * kRadToDeg;
  s.phi_deg = std::asin(z / r) * kRadToDeg;
  return s;
}

std::optional<CellIndex> cell_index(double theta_deg, double phi_deg, const GridSpec& g) {
  if (!(theta_deg > -g.azimuth_max_deg && theta_deg <= g.azimuth_max_deg)) return std::nullopt;
  if (!(phi_deg >= g.elevation_min_deg && phi_deg <= g.elevation_max_deg)) return std::nullopt;

  auto clamp_to = [](double v, std::size_t n) {
    if (v < 0.0) return std::size_t{0};
    const auto i = static_cast<std::size_t>(v);
    return i >= n ? n - 1 : i;
  };
  CellIndex idx;
  idx.col = clamp_to(std::floor((g.azimuth_max_deg - theta_deg) / g.azimuth_res_deg), g.cols);
  idx.row = clamp_to(std::floor((g.elevation_max_deg - phi_deg) / g.elevation_res_deg()), g.rows);
  return idx;
}

FeatureTensor build_feature_tensor(const PointCloud& cloud, const GridSpec& g) {
  g.validate();
  FeatureTensor t(g.rows, g.cols);

  struct CellExtremes {
    std::int64_t low = -1;   // point index of the lowest-z hit
    std::int64_t high = -1;  // point index of the highest-z hit
    float low_z = 0.0f;
    float high_z = 0.0f;
  };
  std::vector<CellExtremes> cells(g.rows * g.cols);
  std::vector<SphericalCoord> winner_coords(g.rows * g.cols * 2);

  for (std::size_t pi = 0; pi < cloud.points.size(); ++pi) {
    const Point& p = cloud.points[pi];
    if (p.x == 0.0f && p.y == 0.0f && p.z == 0.0f) continue;  // no direction
    const SphericalCoord sph = spherical_coords(p);
    const auto idx = cell_index(sph.theta_deg, sph.phi_deg, g);
    if (!idx) continue;
    auto& cell = cells[idx->row * g.cols + idx->col];
    // Strict comparisons keep the earliest point on exact z ties.
    if (cell.low < 0 || p.z < cell.low_z) {
      cell.low = static_cast<std::int64_t>(pi);
      cell.low_z = p.z;
      winner_coords[(idx->row * g.cols + idx->col) * 2] = sph;
    }
    if (cell.high < 0 || p.z > cell.high_z) {
      cell.high = static_cast<std::int64_t>(pi);
      cell.high_z = p.z;
      winner_coords[(idx->row * g.cols + idx->col) * 2 + 1] = sph;
    }
  }

  for (std::size_t i = 0; i < g.rows; ++i) {
    for (std::size_t j = 0; j < g.cols; ++j) {
      const auto& cell = cells[i * g.cols + j];
      if (cell.low >= 0) {
        const Point& lo = cloud.points[static_cast<std::size_t>(cell.low)];
        const SphericalCoord& slo = winner_coords[(i * g.cols + j) * 2];
        t.at(kLowX, i, j) = lo.x;
        t.at(kLowY, i, j) = lo.y;
        t.at(kLowZ, i, j) = lo.z;
        t.at(kLowTheta, i, j) = static_cast<float>(slo.theta_deg);
        t.at(kLowPhi, i, j) = static_cast<float>(slo.phi_deg);
        t.at(kLowRange, i, j) = static_cast<float>(slo.range_m);
        t.at(kLowIntensity, i, j) = lo.intensity;

        const Point& hi = cloud.points[static_cast<std::size_t>(cell.high)];
        const SphericalCoord& shi = winner_coords[(i * g.cols + j) * 2 + 1];
        t.at(kHighX, i, j) = hi.x;
        t.at(kHighY, i, j) = hi.y;
        t.at(kHighZ, i, j) = hi.z;
        t.at(kHighTheta, i, j) = static_cast<float>(shi.theta_deg);
        t.at(kHighPhi, i, j) = static_cast<float>(shi.phi_deg);
        t.at(kHighRange, i, j) = static_cast<float>(shi.range_m);
        t.at(kHighIntensity, i, j) = hi.intensity;
      }
      t.at(kRowIndex, i, j) = static_cast<float>(i);
      t.at(kColIndex, i, j) = static_cast<float>(j);
    }
  }
  return t;
}

namespace {

// P2 * [R0 * (Tr * X_velo); 1] -> pixel, valid only for positive rectified z.
std::optional<std::pair<std::size_t, std::size_t>> project_to_image(const Point& p,
                                                                    const CameraCalib& c,
                                                                    ImageDims dims) {
  const double xv = p.x, yv = p.y, zv = p.z;
  double cam[3];
  for (int r = 0; r < 3; ++r)
    cam[r] = c.tr_velo_to_cam[static_cast<std::size_t>(r) * 4] * xv +
             c.tr_velo_to_cam[static_cast<std::size_t>(r) * 4 + 1] * yv +
             c.tr_velo_to_cam[static_cast<std::size_t>(r) * 4 + 2] * zv +
             c.tr_velo_to_cam[static_cast<std::size_t>(r) * 4 + 3];
  double rect[3];
  for (int r = 0; r < 3; ++r)
    rect[r] = c.r0[static_cast<std::size_t>(r) * 3] * cam[0] +
              c.r0[static_cast<std::size_t>(r) * 3 + 1] * cam[1] +
              c.r0[static_cast<std::size_t>(r) * 3 + 2] * cam[2];
  if (!(rect[2] > 0.0)) return std::nullopt;
  double img[3];
  for (int r = 0; r < 3; ++r)
    img[r] = c.p2[static_cast<std::size_t>(r) * 4] * rect[0] +
             c.p2[static_cast<std::size_t>(r) * 4 + 1] * rect[1] +
             c.p2[static_cast<std::size_t>(r) * 4 + 2] * rect[2] +
             c.p2[static_cast<std::size_t>(r) * 4 + 3];
  if (!(img[2] > 0.0)) return std::nullopt;
  const double u = img[0] / img[2];
  const double v = img[1] / img[2];
  if (u < 0.0 || v < 0.0) return std::nullopt;
  const auto px = static_cast<std::size_t>(u);
  const auto py = static_cast<std::size_t>(v);
  if (px >= dims.width || py >= dims.height) return std::nullopt;
  return std::make_pair(px, py);
}

}  // namespace

CoverageReport coverage_stats(const PointCloud& cloud, const GridSpec& g,
                              const std::optional<CameraCalib>& calib, const BevSpec& bev,
                              ImageDims image_dims, bool include_image_view) {
  g.validate();
  bev.validate();
  if (include_image_view && !calib)
    throw ConfigError("coverage_stats: image-view fraction requires a camera calib");

  std::vector<std::uint8_t> sph_hit(g.rows * g.cols, 0);
  std::vector<std::uint8_t> bev_hit(bev.x_cells() * bev.y_cells(), 0);
  std::vector<std::uint8_t> img_hit;
  if (include_image_view) img_hit.assign(image_dims.width * image_dims.height, 0);

  for (const Point& p : cloud.points) {
    if (!(p.x == 0.0f && p.y == 0.0f && p.z == 0.0f)) {
      const SphericalCoord sph = spherical_coords(p);
      if (const auto idx = cell_index(sph.theta_deg, sph.phi_deg, g))
        sph_hit[idx->row * g.cols + idx->col] = 1;
    }
    if (const auto cell = bev.cell_of(p.x, p.y))
      bev_hit[cell->first * bev.y_cells() + cell->second] = 1;
    if (include_image_view) {
      if (const auto px = project_to_image(p, *calib, image_dims))
        img_hit[px->second * image_dims.width + px->first] = 1;
    }
  }

  auto fraction = [](const std::vector<std::uint8_t>& hits) {
    if (hits.empty()) return 0.0;
    std::size_t n = 0;
    for (auto h : hits) n += h;
    return static_cast<double>(n) / static_cast<double>(hits.size());
  };

  CoverageReport report;
  report.spherical_fraction = fraction(sph_hit);
  report.topview_fraction = fraction(bev_hit);
  if (include_image_view) report.imageview_fraction = fraction(img_hit);
  return report;
}

}  // namespace roadseg

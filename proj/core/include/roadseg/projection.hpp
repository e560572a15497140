#ifndef ROADSEG_PROJECTION_HPP
#define ROADSEG_PROJECTION_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "roadseg/bev.hpp"
#include "roadseg/kitti_io.hpp"

namespace roadseg {

/// Spherical-view grid geometry. Columns bin azimuth at azimuth_res degrees
/// across a symmetric forward FOV; rows bin elevation across
/// [elevation_min, elevation_max].
struct GridSpec {
  std::size_t rows = 64;
  std::size_t cols = 256;
  double azimuth_res_deg = 0.4;
  double azimuth_max_deg = 51.2;
  double elevation_min_deg = -24.9;
  double elevation_max_deg = 2.0;

  /// Throws ConfigError unless cols * azimuth_res == 2 * azimuth_max and the
  /// elevation range is non-degenerate.
  void validate() const;

  double elevation_res_deg() const {
    return (elevation_max_deg - elevation_min_deg) / static_cast<double>(rows);
  }
};

struct SphericalCoord {
  double theta_deg = 0.0;  // azimuth, 0 forward, positive left
  double phi_deg = 0.0;    // elevation above the horizontal plane
  double range_m = 0.0;
};

struct CellIndex {
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const CellIndex&) const = default;
};

// Feature tensor channel layout. 0-6 describe the lowest-altitude point of
// the cell, 7-13 the highest, 14-15 the cell's own grid location.
enum FeatureChannel : std::size_t {
  kLowX = 0,
  kLowY = 1,
  kLowZ = 2,
  kLowTheta = 3,
  kLowPhi = 4,
  kLowRange = 5,
  kLowIntensity = 6,
  kHighX = 7,
  kHighY = 8,
  kHighZ = 9,
  kHighTheta = 10,
  kHighPhi = 11,
  kHighRange = 12,
  kHighIntensity = 13,
  kRowIndex = 14,
  kColIndex = 15,
};

inline constexpr std::size_t kFeatureChannels = 16;

/// rows x cols grid of 16 real channels. Cells nobody hit keep channels 0-13
/// at zero; channels 14-15 are always the cell indices.
struct FeatureTensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;  // [channel][row][col]

  FeatureTensor() = default;
  FeatureTensor(std::size_t r, std::size_t c)
      : rows(r), cols(c), data(kFeatureChannels * r * c, 0.0f) {}

  float at(std::size_t channel, std::size_t row, std::size_t col) const {
    return data[(channel * rows + row) * cols + col];
  }
  float& at(std::size_t channel, std::size_t row, std::size_t col) {
    return data[(channel * rows + row) * cols + col];
  }
  /// A cell is occupied when any of its point-derived channels is non-zero.
  bool occupied(std::size_t row, std::size_t col) const;
};

struct CoverageReport {
  double spherical_fraction = 0.0;
  double topview_fraction = 0.0;
  std::optional<double> imageview_fraction;
};

struct ImageDims {
  std::size_t width = 1242;
  std::size_t height = 375;
};

/// Cartesian -> spherical (degrees). Throws GeometryError for the origin,
/// whose direction is undefined.
SphericalCoord spherical_coords(const Point& p);

/// Grid cell for a direction, or nullopt outside the FOV. Azimuth maps to
/// columns left-to-right from +azimuth_max (half-open on the right edge);
/// elevation maps to rows top-to-bottom from elevation_max (both ends
/// included, boundary rows clamped).
std::optional<CellIndex> cell_index(double theta_deg, double phi_deg, const GridSpec& g);

/// Bin every in-FOV point; per cell the lowest-z point fills channels 0-6 and
/// the highest-z point channels 7-13 (z ties keep the earliest point).
/// Points at the origin are not binned.
FeatureTensor build_feature_tensor(const PointCloud& cloud, const GridSpec& g);

/// Fraction of spherical cells, BEV cells and (optionally) image pixels that
/// receive at least one point. The image fraction projects points with
/// positive rectified-camera depth through the calib; requesting it without a
/// calib is a ConfigError.
CoverageReport coverage_stats(const PointCloud& cloud, const GridSpec& g,
                              const std::optional<CameraCalib>& calib, const BevSpec& bev,
                              ImageDims image_dims, bool include_image_view);

}  // namespace roadseg

#endif  // ROADSEG_PROJECTION_HPP

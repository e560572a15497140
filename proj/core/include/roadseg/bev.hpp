#ifndef ROADSEG_BEV_HPP
#define ROADSEG_BEV_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace roadseg {

/// Metric bird's-eye-view window around the vehicle, x forward, y left.
/// Defaults give an 800x400 grid at 5 cm per cell.
struct BevSpec {
  double x_min_m = 6.0;
  double x_max_m = 46.0;
  double y_min_m = -10.0;
  double y_max_m = 10.0;
  double resolution_m = 0.05;

  std::size_t x_cells() const;
  std::size_t y_cells() const;
  void validate() const;

  /// Cell containing metric point (x, y); nullopt outside the window.
  std::optional<std::pair<std::size_t, std::size_t>> cell_of(double x, double y) const;
};

/// Binary occupancy grid over a BevSpec. Indexed (ix, iy) with ix = 0 at
/// x_min (nearest to the vehicle) and iy = 0 at y_min (right edge).
struct RoadMask {
  std::size_t x_cells = 0;
  std::size_t y_cells = 0;
  std::vector<std::uint8_t> cells;

  RoadMask() = default;
  explicit RoadMask(const BevSpec& bev);
  RoadMask(std::size_t nx, std::size_t ny);

  bool at(std::size_t ix, std::size_t iy) const { return cells[ix * y_cells + iy] != 0; }
  void set(std::size_t ix, std::size_t iy, bool road) { cells[ix * y_cells + iy] = road ? 1 : 0; }
  std::size_t road_count() const;
  std::size_t total_cells() const { return x_cells * y_cells; }
};

/// PGM raster convention: the image is a top view with forward (x_max) at the
/// top row and the vehicle's left (y_max) at the left column, i.e.
/// pixel(row r, col c) = cell(ix = x_cells-1-r, iy = y_cells-1-c).
/// Road cells are written as 255, everything else as 0.
void save_mask_pgm(const RoadMask& mask, const std::filesystem::path& path);

/// Load a binary PGM ("P5", maxval 255) of exactly the BevSpec dimensions.
/// Pixels >= 128 are road. Throws FormatError on bad magic or size mismatch.
RoadMask load_mask(const std::filesystem::path& path, const BevSpec& bev);

}  // namespace roadseg

#endif  // ROADSEG_BEV_HPP

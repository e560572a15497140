#include "roadseg/bev.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "roadseg/errors.hpp"

namespace roadseg {

std::size_t BevSpec::x_cells() const {
  return static_cast<std::size_t>(std::llround((x_max_m - x_min_m) / resolution_m));
}

std::size_t BevSpec::y_cells() const {
  return static_cast<std::size_t>(std::llround((y_max_m - y_min_m) / resolution_m));
}

void BevSpec::validate() const {
  if (!(resolution_m > 0.0)) throw ConfigError("bev: resolution must be positive");
  if (!(x_max_m > x_min_m) || !(y_max_m > y_min_m))
    throw ConfigError("bev: degenerate metric ranges");
}

std::optional<std::pair<std::size_t, std::size_t>> BevSpec::cell_of(double x, double y) const {
  const double u = (x - x_min_m) / resolution_m;
  const double v = (y - y_min_m) / resolution_m;
  if (u < 0.0 || v < 0.0) return std::nullopt;
  const auto ix = static_cast<std::size_t>(u);
  const auto iy = static_cast<std::size_t>(v);
  if (ix >= x_cells() || iy >= y_cells()) return std::nullopt;
  return std::make_pair(ix, iy);
}

RoadMask::RoadMask(const BevSpec& bev) : RoadMask(bev.x_cells(), bev.y_cells()) {}

RoadMask::RoadMask(std::size_t nx, std::size_t ny)
    : x_cells(nx), y_cells(ny), cells(nx * ny, 0) {}

std::size_t RoadMask::road_count() const {
  return static_cast<std::size_t>(
      std::accumulate(cells.begin(), cells.end(), std::size_t{0}));
}

void save_mask_pgm(const RoadMask& mask, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open for writing: " + path.string());
  out << "P5\n" << mask.y_cells << " " << mask.x_cells << "\n255\n";
  std::vector<std::uint8_t> row(mask.y_cells);
  for (std::size_t r = 0; r < mask.x_cells; ++r) {
    const std::size_t ix = mask.x_cells - 1 - r;
    for (std::size_t c = 0; c < mask.y_cells; ++c) {
      const std::size_t iy = mask.y_cells - 1 - c;
      row[c] = mask.at(ix, iy) ? 255 : 0;
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw FormatError("short write: " + path.string());
}

namespace {

// Next whitespace-delimited PGM header token, skipping '#' comments.
std::string next_pgm_token(std::istream& in) {
  std::string tok;
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (std::isspace(ch)) {
      ch = in.get();
    } else {
      break;
    }
  }
  while (ch != EOF && !std::isspace(ch)) {
    tok.push_back(static_cast<char>(ch));
    ch = in.get();
  }
  return tok;
}

}  // namespace

RoadMask load_mask(const std::filesystem::path& path, const BevSpec& bev) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open mask: " + path.string());

  if (next_pgm_token(in) != "P5") throw FormatError("mask is not a binary PGM (P5): " + path.string());
  std::size_t width = 0, height = 0, maxval = 0;
  try {
    width = std::stoul(next_pgm_token(in));
    height = std::stoul(next_pgm_token(in));
    maxval = std::stoul(next_pgm_token(in));
  } catch (const std::exception&) {
    throw FormatError("malformed PGM header: " + path.string());
  }
  if (maxval != 255) throw FormatError("mask PGM maxval must be 255: " + path.string());
  if (width != bev.y_cells() || height != bev.x_cells()) {
    std::ostringstream msg;
    msg << "mask dimensions " << width << "x" << height << " do not match BEV grid "
        << bev.y_cells() << "x" << bev.x_cells() << ": " << path.string();
    throw FormatError(msg.str());
  }

  RoadMask mask(bev);
  std::vector<std::uint8_t> row(width);
  for (std::size_t r = 0; r < height; ++r) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (in.gcount() != static_cast<std::streamsize>(row.size()))
      throw FormatError("truncated PGM payload: " + path.string());
    const std::size_t ix = height - 1 - r;
    for (std::size_t c = 0; c < width; ++c) {
      const std::size_t iy = width - 1 - c;
      mask.set(ix, iy, row[c] >= 128);
    }
  }
  return mask;
}

}  // namespace roadseg

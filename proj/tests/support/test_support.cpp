#include "test_support.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>

namespace roadseg::test {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::filesystem::path unique_temp_path() {
  static std::mt19937_64 rng(std::random_device{}());
  const auto base = std::filesystem::temp_directory_path();
  for (;;) {
    auto candidate = base / ("roadseg-test-" + std::to_string(rng()));
    if (!std::filesystem::exists(candidate)) return candidate;
  }
}

}  // namespace

TempDir::TempDir() : path_(unique_temp_path()) { std::filesystem::create_directories(path_); }

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_point_cloud(const std::filesystem::path& path, const std::vector<Point>& points) {
  std::ofstream out(path, std::ios::binary);
  auto put_f32 = [&](float f) {
    const auto u = std::bit_cast<std::uint32_t>(f);
    const unsigned char b[4] = {static_cast<unsigned char>(u & 0xff),
                                static_cast<unsigned char>((u >> 8) & 0xff),
                                static_cast<unsigned char>((u >> 16) & 0xff),
                                static_cast<unsigned char>((u >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  for (const Point& p : points) {
    put_f32(p.x);
    put_f32(p.y);
    put_f32(p.z);
    put_f32(p.intensity);
  }
}

void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

CameraCalib typical_calib() {
  CameraCalib c;
  c.p2 = {721.5377, 0.0, 609.5593, 44.85728,
          0.0, 721.5377, 172.854, 0.2163791,
          0.0, 0.0, 1.0, 0.002745884};
  c.r0 = {0.9999239, 0.00983776, -0.007445048,
          -0.0098698, 0.9999421, -0.004278459,
          0.007402527, 0.004351614, 0.9999631};
  c.tr_velo_to_cam = {0.007533745, -0.9999714, -0.000616602, -0.004069766,
                      0.01480249, 0.0007280733, -0.9998902, -0.07631618,
                      0.9998621, 0.00752379, 0.0148075, -0.2717806};
  return c;
}

void write_typical_calib(const std::filesystem::path& path) {
  const CameraCalib c = typical_calib();
  std::ofstream out(path);
  out.precision(12);
  out << "P0: 1 0 0 0 0 1 0 0 0 0 1 0\n";
  out << "P2:";
  for (double v : c.p2) out << " " << v;
  out << "\nR0_rect:";
  for (double v : c.r0) out << " " << v;
  out << "\nTr_velo_to_cam:";
  for (double v : c.tr_velo_to_cam) out << " " << v;
  out << "\n";
}

PointCloud cloud_covering_every_cell(const GridSpec& g, double range_m) {
  PointCloud cloud;
  cloud.points.reserve(g.rows * g.cols);
  for (std::size_t i = 0; i < g.rows; ++i) {
    for (std::size_t j = 0; j < g.cols; ++j) {
      const double theta =
          (g.azimuth_max_deg - (static_cast<double>(j) + 0.5) * g.azimuth_res_deg) * kDegToRad;
      const double phi =
          (g.elevation_max_deg - (static_cast<double>(i) + 0.5) * g.elevation_res_deg()) *
          kDegToRad;
      Point p;
      p.x = static_cast<float>(range_m * std::cos(phi) * std::cos(theta));
      p.y = static_cast<float>(range_m * std::cos(phi) * std::sin(theta));
      p.z = static_cast<float>(range_m * std::sin(phi));
      p.intensity = 0.5f;
      cloud.points.push_back(p);
    }
  }
  return cloud;
}

PointCloud random_cloud(std::mt19937_64& rng, std::size_t count, const GridSpec& g) {
  std::uniform_real_distribution<double> theta_deg(-g.azimuth_max_deg + 0.01,
                                                   g.azimuth_max_deg - 0.01);
  std::uniform_real_distribution<double> phi_deg(g.elevation_min_deg + 0.01,
                                                 g.elevation_max_deg - 0.01);
  std::uniform_real_distribution<double> range(2.0, 60.0);
  std::uniform_real_distribution<float> intensity(0.0f, 1.0f);

  PointCloud cloud;
  cloud.points.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const double t = theta_deg(rng) * kDegToRad;
    const double f = phi_deg(rng) * kDegToRad;
    const double r = range(rng);
    Point p;
    p.x = static_cast<float>(r * std::cos(f) * std::cos(t));
    p.y = static_cast<float>(r * std::cos(f) * std::sin(t));
    p.z = static_cast<float>(r * std::sin(f));
    p.intensity = intensity(rng);
    cloud.points.push_back(p);
  }
  return cloud;
}

namespace {

struct Cylinder {
  double cx, cy, radius, top_z;
};

struct Wall {  // segment in the xy plane with a height
  double x0, y0, x1, y1, top_z;
};

// First positive ray parameter hitting the cylinder side, if any.
std::optional<double> ray_cylinder(double dx, double dy, const Cylinder& cyl) {
  const double a = dx * dx + dy * dy;
  if (a < 1e-12) return std::nullopt;
  const double b = -2.0 * (dx * cyl.cx + dy * cyl.cy);
  const double c = cyl.cx * cyl.cx + cyl.cy * cyl.cy - cyl.radius * cyl.radius;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double t = (-b - std::sqrt(disc)) / (2.0 * a);
  if (t <= 0.5) return std::nullopt;
  return t;
}

std::optional<double> ray_wall(double dx, double dy, const Wall& w) {
  // Ray from origin vs segment (x0,y0)-(x1,y1).
  const double ex = w.x1 - w.x0, ey = w.y1 - w.y0;
  const double denom = dx * ey - dy * ex;
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = (w.x0 * ey - w.y0 * ex) / denom;
  const double s = (w.x0 * dy - w.y0 * dx) / denom;
  if (t <= 0.5 || s < 0.0 || s > 1.0) return std::nullopt;
  return t;
}

// Fully pinned randomness: SplitMix64 plus an Irwin-Hall approximate normal,
// so a seed reproduces the identical scene on every platform and standard
// library.
class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed) : state_(seed) {}
  double unit() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }
  double gauss(double sigma) {
    double s = 0.0;
    for (int k = 0; k < 12; ++k) s += unit();
    return (s - 6.0) * sigma;
  }

 private:
  std::uint64_t state_;
};

}  // namespace

PointCloud simulate_velodyne_scene(std::uint64_t seed) {
  SceneRng rng(seed);
  auto unit = [&rng]() { return rng.unit(); };
  auto range_noise = [&rng]() { return rng.gauss(0.015); };

  constexpr double kSensorHeight = 1.73;  // nominal ground at z = -1.73
  constexpr double kMaxRange = 80.0;
  constexpr int kBeams = 64;
  constexpr double kAzimuthStep = 0.16;  // degrees, ~2250 firings per turn

  // Gently undulating terrain. Grade changes of a few tenths of a meter over
  // tens of meters swing the shallow rings radially by whole meters, the way
  // they do on a real street.
  const double ph1 = unit() * 6.28, ph2 = unit() * 6.28, ph3 = unit() * 6.28;
  const double ph4 = unit() * 6.28, ph5 = unit() * 6.28;
  auto ground_z = [&](double x, double y) {
    // Long grade changes plus centimeter-scale surface roughness; at grazing
    // incidence the roughness alone wanders the ring radius by ~0.5 m.
    return -kSensorHeight + 0.2 * std::sin(x / 31.0 + ph1) + 0.15 * std::sin(y / 23.0 + ph2) +
           0.12 * std::sin((x + y) / 47.0 + ph3) +
           0.025 * std::sin(x / 2.1 + ph4) * std::cos(y / 2.7 + ph5);
  };

  // Parked vehicles and hedges line both road edges; the driving corridor
  // stays clear. Side clutter is what fills the lateral bands of a street's
  // top view.
  std::vector<Cylinder> cylinders;
  for (int k = 0; k < 14; ++k) {
    const double cx = 7.0 + unit() * 37.0;
    const double cy = (6.0 + unit() * 3.2) * (k % 2 == 0 ? 1.0 : -1.0);
    cylinders.push_back(Cylinder{cx, cy, 1.0 + unit() * 0.4,
                                 -kSensorHeight + 1.45 + unit() * 0.3});
  }
  for (int k = 0; k < 8; ++k) {
    const double cx = 6.0 + unit() * 38.0;
    const double cy = (7.0 + unit() * 2.5) * (k % 2 == 0 ? 1.0 : -1.0);
    cylinders.push_back(Cylinder{cx, cy, 1.2 + unit() * 1.0,
                                 -kSensorHeight + 0.8 + unit() * 0.4});
  }
  // Poles and clutter off to the sides and behind.
  for (int k = 0; k < 6; ++k) {
    const double bearing = (45.0 + unit() * 270.0) * kDegToRad;
    const double dist = 6.0 + unit() * 44.0;
    cylinders.push_back(Cylinder{dist * std::cos(bearing), dist * std::sin(bearing),
                                 0.3 + unit() * 1.5,
                                 -kSensorHeight + 1.5 + unit() * 2.0});
  }
  // Fence/hedge rows run along both verge lines, as they do on a fenced
  // street; beams that clear them continue to the buildings or the ground.
  std::vector<Wall> walls;
  for (int side : {-1, 1}) {
    const double y = (8.6 + unit() * 1.0) * side;
    const double x0 = 4.0 + unit() * 4.0;
    const double x1 = 42.0 + unit() * 6.0;
    walls.push_back(Wall{x0, y, x1, y, -kSensorHeight + 0.9 + unit() * 0.5});
  }
  // A few building fronts flank the street. The sky above the road ahead
  // stays open.
  for (int k = 0; k < 6; ++k) {
    const double bearing_deg = 40.0 + unit() * 280.0;
    const double bearing = bearing_deg * kDegToRad;
    const double dist = 25.0 + unit() * 40.0;
    const double cx = dist * std::cos(bearing), cy = dist * std::sin(bearing);
    const double half = 6.0 + unit() * 8.0;
    const double along = bearing + std::numbers::pi / 2.0;
    walls.push_back(Wall{cx - half * std::cos(along), cy - half * std::sin(along),
                         cx + half * std::cos(along), cy + half * std::sin(along),
                         -kSensorHeight + 3.5 + unit() * 2.5});
  }

  PointCloud cloud;
  cloud.points.reserve(140000);
  for (int beam = 0; beam < kBeams; ++beam) {
    // 64 beams spread evenly over the +2 .. -24.9 degree span.
    const double phi = (2.0 - 26.9 * (static_cast<double>(beam) + 0.5) / kBeams) * kDegToRad;
    const double cphi = std::cos(phi), sphi = std::sin(phi);
    for (double az = -180.0; az < 180.0; az += kAzimuthStep) {
      if (unit() < 0.04) continue;  // random dropout
      const double theta = az * kDegToRad;
      const double dx = cphi * std::cos(theta);
      const double dy = cphi * std::sin(theta);
      const double dz = sphi;

      double t_hit = std::numeric_limits<double>::infinity();
      double intensity = 0.0;
      if (dz < -0.001) {
        // Fixed-point iteration of o + t*d onto the height field; grazing
        // rays that fail to settle give no return.
        double t = -kSensorHeight / dz;
        bool ok = false;
        for (int it = 0; it < 8 && t > 0.5 && t < 3.0 * kMaxRange; ++it) {
          const double tn = ground_z(t * dx, t * dy) / dz;
          if (std::abs(tn - t) < 0.05) {
            ok = true;
            t = tn;
            break;
          }
          t = tn;
        }
        if (ok && t > 0.5 && t < t_hit) {
          // Vegetated verges flank the carriageway; grass blades return the
          // beam above the soil, scattering grazing hits over a radial band.
          const double hit_y = std::abs(t * dy);
          if (hit_y > 5.8 && hit_y < 9.8) {
            const double blade = std::min(0.15, std::abs(range_noise()) * 4.0);
            t -= blade / -dz;
            intensity = 0.35 + 0.25 * unit();  // vegetation
          } else {
            intensity = 0.25 + 0.15 * unit();  // asphalt
          }
          if (t > 0.5 && t < t_hit) t_hit = t;
        }
      }
      for (const auto& cyl : cylinders) {
        if (const auto t = ray_cylinder(dx, dy, cyl)) {
          if (*t < t_hit && dz * *t >= -kSensorHeight && dz * *t <= cyl.top_z) {
            t_hit = *t;
            intensity = 0.45 + 0.35 * unit();
          }
        }
      }
      for (const auto& w : walls) {
        if (const auto t = ray_wall(dx, dy, w)) {
          if (*t < t_hit && dz * *t >= -kSensorHeight && dz * *t <= w.top_z) {
            t_hit = *t;
            intensity = 0.3 + 0.4 * unit();
          }
        }
      }
      if (!std::isfinite(t_hit) || t_hit > kMaxRange) continue;  // no return

      const double t = std::max(0.5, t_hit + range_noise());
      Point p;
      p.x = static_cast<float>(t * dx);
      p.y = static_cast<float>(t * dy);
      p.z = static_cast<float>(t * dz);
      p.intensity = static_cast<float>(intensity);
      cloud.points.push_back(p);
    }
  }
  return cloud;
}

}  // namespace roadseg::test

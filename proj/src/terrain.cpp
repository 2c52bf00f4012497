#include "terra/terrain.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "terra/error.hpp"
#include "terra/text.hpp"

namespace terra {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// max(x, 0) averaged over a window of half-width h; C1 for h > 0.
double soft_ramp(double x, double h) {
  if (x <= -h) return 0.0;
  if (x >= h) return x;
  return (x + h) * (x + h) / (4.0 * h);
}

}  // namespace

ElevationMap::ElevationMap(double origin_x, double origin_y, double cell_size, int n_cols,
                           int n_rows, std::vector<double> heights)
    : origin_x_(origin_x),
      origin_y_(origin_y),
      cell_size_(cell_size),
      n_cols_(n_cols),
      n_rows_(n_rows),
      heights_(std::move(heights)) {
  if (!(cell_size_ > 0.0) || !std::isfinite(cell_size_)) {
    throw InvalidSpec("cell_size must be positive");
  }
  if (n_cols_ < 2 || n_rows_ < 2) {
    throw InvalidSpec("map needs at least 2x2 cells");
  }
  if (!std::isfinite(origin_x_) || !std::isfinite(origin_y_)) {
    throw InvalidSpec("map origin must be finite");
  }
  if (heights_.size() != static_cast<std::size_t>(n_cols_) * n_rows_) {
    throw InvalidSpec("height array size does not match grid dimensions");
  }
  for (double h : heights_) {
    if (std::isinf(h)) throw InvalidSpec("heights must be finite or NODATA");
  }
}

ElevationMap::Sample ElevationMap::sample(double x, double y) const noexcept {
  const double fx = (x - origin_x_) / cell_size_ - 0.5;
  const double fy = (y - origin_y_) / cell_size_ - 0.5;
  // Negated comparisons also reject NaN coordinates.
  if (!(fx >= 0.0 && fx <= n_cols_ - 1 && fy >= 0.0 && fy <= n_rows_ - 1)) {
    return {0.0, Status::out_of_bounds};
  }
  int i0 = static_cast<int>(fx);
  int j0 = static_cast<int>(fy);
  i0 = std::min(i0, n_cols_ - 2);
  j0 = std::min(j0, n_rows_ - 2);
  const double tx = fx - i0;
  const double ty = fy - j0;

  const double* row0 = heights_.data() + static_cast<std::size_t>(j0) * n_cols_ + i0;
  const double* row1 = row0 + n_cols_;
  const double h00 = row0[0];
  const double h10 = row0[1];
  const double h01 = row1[0];
  const double h11 = row1[1];
  if (std::isnan(h00) || std::isnan(h10) || std::isnan(h01) || std::isnan(h11)) {
    return {0.0, Status::unknown_cell};
  }
  const double lower = h00 + tx * (h10 - h00);
  const double upper = h01 + tx * (h11 - h01);
  return {lower + ty * (upper - lower), Status::ok};
}

double ElevationMap::height_at(double x, double y) const {
  const Sample s = sample(x, y);
  switch (s.status) {
    case Status::ok:
      return s.z;
    case Status::out_of_bounds:
      throw OutOfBounds("query (" + format_double(x) + ", " + format_double(y) +
                        ") outside elevation map");
    case Status::unknown_cell:
      throw UnknownCell("query (" + format_double(x) + ", " + format_double(y) +
                        ") touches a NODATA cell");
  }
  return s.z;
}

double ElevationMap::min_height() const noexcept {
  double m = std::numeric_limits<double>::infinity();
  for (double h : heights_) {
    if (!std::isnan(h)) m = std::min(m, h);
  }
  return m;
}

double ElevationMap::max_height() const noexcept {
  double m = -std::numeric_limits<double>::infinity();
  for (double h : heights_) {
    if (!std::isnan(h)) m = std::max(m, h);
  }
  return m;
}

bool operator==(const ElevationMap& a, const ElevationMap& b) {
  if (a.origin_x_ != b.origin_x_ || a.origin_y_ != b.origin_y_ || a.cell_size_ != b.cell_size_ ||
      a.n_cols_ != b.n_cols_ || a.n_rows_ != b.n_rows_) {
    return false;
  }
  for (std::size_t i = 0; i < a.heights_.size(); ++i) {
    const double ha = a.heights_[i];
    const double hb = b.heights_[i];
    if (std::isnan(ha) != std::isnan(hb)) return false;
    if (!std::isnan(ha) && ha != hb) return false;
  }
  return true;
}

std::string to_string(TerrainKind kind) {
  switch (kind) {
    case TerrainKind::flat:
      return "flat";
    case TerrainKind::incline:
      return "incline";
    case TerrainKind::v_ditch:
      return "v_ditch";
    case TerrainKind::crater:
      return "crater";
    case TerrainKind::sine_bumps:
      return "sine_bumps";
  }
  return "flat";
}

TerrainKind terrain_kind_from_string(const std::string& name) {
  std::string n = name;
  std::replace(n.begin(), n.end(), '-', '_');
  if (n == "flat") return TerrainKind::flat;
  if (n == "incline") return TerrainKind::incline;
  if (n == "v_ditch" || n == "ditch") return TerrainKind::v_ditch;
  if (n == "crater") return TerrainKind::crater;
  if (n == "sine_bumps") return TerrainKind::sine_bumps;
  throw InvalidSpec("unknown terrain kind '" + name + "'");
}

void TerrainSpec::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidSpec(std::string(what) + " must be > 0");
  };
  positive(size_x, "size_x");
  positive(size_y, "size_y");
  positive(resolution, "resolution");
  if (std::lround(size_x / resolution) < 2 || std::lround(size_y / resolution) < 2) {
    throw InvalidSpec("terrain extent must span at least 2 cells per axis");
  }
  switch (kind) {
    case TerrainKind::flat:
      break;
    case TerrainKind::incline:
      if (!(angle_deg >= 0.0 && angle_deg < 90.0)) {
        throw InvalidSpec("incline angle must be in [0, 90) degrees");
      }
      break;
    case TerrainKind::v_ditch:
      positive(depth, "depth");
      positive(half_width, "half_width");
      if (!(wall_angle_deg > 0.0 && wall_angle_deg < 90.0)) {
        throw InvalidSpec("ditch wall angle must be in (0, 90) degrees");
      }
      if (depth / std::tan(wall_angle_deg * kDeg) > half_width) {
        throw InvalidSpec("ditch walls do not fit inside half_width at this depth");
      }
      if (!(edge_blend >= 0.0)) throw InvalidSpec("edge_blend must be >= 0");
      if (edge_blend > depth / std::tan(wall_angle_deg * kDeg) ||
          0.5 * edge_blend > half_width - depth / std::tan(wall_angle_deg * kDeg)) {
        throw InvalidSpec("edge_blend is wider than the ditch wall or floor");
      }
      break;
    case TerrainKind::crater:
      positive(depth, "depth");
      positive(radius, "radius");
      if (!(rim_width >= 0.0)) throw InvalidSpec("rim_width must be >= 0");
      break;
    case TerrainKind::sine_bumps:
      positive(amplitude, "amplitude");
      positive(wavelength, "wavelength");
      break;
  }
}

ElevationMap generate_terrain(const TerrainSpec& spec) {
  spec.validate();
  const int n_cols = static_cast<int>(std::lround(spec.size_x / spec.resolution));
  const int n_rows = static_cast<int>(std::lround(spec.size_y / spec.resolution));
  const double ox = spec.center_x - 0.5 * n_cols * spec.resolution;
  const double oy = spec.center_y - 0.5 * n_rows * spec.resolution;

  const double slope = std::tan(spec.angle_deg * kDeg);
  const double ux = std::cos(spec.azimuth_deg * kDeg);
  const double uy = std::sin(spec.azimuth_deg * kDeg);
  // Ditch normal (perpendicular to the axis).
  const double nx = -std::sin(spec.axis_azimuth_deg * kDeg);
  const double ny = std::cos(spec.axis_azimuth_deg * kDeg);
  const double wall_slope = std::tan(spec.wall_angle_deg * kDeg);
  const double floor_half = spec.half_width - spec.depth / wall_slope;
  const double rim_height = 0.2 * spec.depth;
  const double k = 2.0 * std::numbers::pi / spec.wavelength;

  std::vector<double> heights(static_cast<std::size_t>(n_cols) * n_rows, 0.0);
  for (int row = 0; row < n_rows; ++row) {
    const double dy = oy + (row + 0.5) * spec.resolution - spec.center_y;
    for (int col = 0; col < n_cols; ++col) {
      const double dx = ox + (col + 0.5) * spec.resolution - spec.center_x;
      double z = 0.0;
      switch (spec.kind) {
        case TerrainKind::flat:
          break;
        case TerrainKind::incline:
          z = slope * (dx * ux + dy * uy);
          break;
        case TerrainKind::v_ditch: {
          const double d = std::abs(dx * nx + dy * ny);
          z = -spec.depth + wall_slope * (soft_ramp(d - floor_half, 0.5 * spec.edge_blend) -
                                          soft_ramp(d - spec.half_width, 0.5 * spec.edge_blend));
          break;
        }
        case TerrainKind::crater: {
          const double r = std::hypot(dx, dy);
          if (r <= spec.radius) {
            const double q = r / spec.radius;
            z = -spec.depth * (1.0 - q * q);
          } else if (r < spec.radius + spec.rim_width) {
            z = rim_height * std::sin(std::numbers::pi * (r - spec.radius) / spec.rim_width);
          }
          break;
        }
        case TerrainKind::sine_bumps:
          z = spec.amplitude * std::sin(k * dx) * std::sin(k * dy);
          break;
      }
      heights[static_cast<std::size_t>(row) * n_cols + col] = z;
    }
  }
  return ElevationMap(ox, oy, spec.resolution, n_cols, n_rows, std::move(heights));
}

void WheelFootprint::validate() const {
  if (!(wheelbase > 0.0) || !(track_width > 0.0)) {
    throw InvalidSpec("wheelbase and track_width must be > 0");
  }
}

Plane fit_plane(const double (&xs)[4], const double (&ys)[4], const double (&zs)[4]) noexcept {
  double xm = 0.0, ym = 0.0, zm = 0.0;
  for (int i = 0; i < 4; ++i) {
    xm += xs[i];
    ym += ys[i];
    zm += zs[i];
  }
  xm *= 0.25;
  ym *= 0.25;
  zm *= 0.25;
  double sxx = 0.0, sxy = 0.0, syy = 0.0, sxz = 0.0, syz = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double dx = xs[i] - xm;
    const double dy = ys[i] - ym;
    const double dz = zs[i] - zm;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
    sxz += dx * dz;
    syz += dy * dz;
  }
  const double det = sxx * syy - sxy * sxy;
  Plane p;
  p.a = (sxz * syy - syz * sxy) / det;
  p.b = (syz * sxx - sxz * sxy) / det;
  p.c = zm - p.a * xm - p.b * ym;
  return p;
}

Attitude attitude_from_plane(double a, double b, double psi) noexcept {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  // Slopes of the plane along the heading and toward the left side.
  const double forward_rise = a * c + b * s;
  const double left_rise = -a * s + b * c;
  Attitude att;
  att.pitch = -std::atan(forward_rise);
  att.roll = -std::atan(left_rise * std::cos(att.pitch));
  return att;
}

AttitudeSample sample_attitude(const ElevationMap& map, double x, double y, double psi,
                               const WheelFootprint& footprint) noexcept {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  const double hl = 0.5 * footprint.wheelbase;
  const double hw = 0.5 * footprint.track_width;
  static constexpr double kLong[4] = {1.0, 1.0, -1.0, -1.0};
  static constexpr double kLat[4] = {1.0, -1.0, 1.0, -1.0};

  double xs[4], ys[4], zs[4];
  for (int i = 0; i < 4; ++i) {
    const double fwd = kLong[i] * hl;
    const double left = kLat[i] * hw;
    xs[i] = x + fwd * c - left * s;
    ys[i] = y + fwd * s + left * c;
    const ElevationMap::Sample h = map.sample(xs[i], ys[i]);
    if (h.status == ElevationMap::Status::out_of_bounds) {
      return {{}, AttitudeSample::Status::out_of_bounds};
    }
    if (h.status == ElevationMap::Status::unknown_cell) {
      return {{}, AttitudeSample::Status::unknown_cell};
    }
    zs[i] = h.z;
  }
  const Plane plane = fit_plane(xs, ys, zs);
  const Attitude att = attitude_from_plane(plane.a, plane.b, psi);
  constexpr double kHalfPi = 0.5 * std::numbers::pi;
  if (!(std::abs(att.roll) < kHalfPi && std::abs(att.pitch) < kHalfPi)) {
    return {att, AttitudeSample::Status::too_steep};
  }
  return {att, AttitudeSample::Status::ok};
}

Attitude attitude(const ElevationMap& map, double x, double y, double psi,
                  const WheelFootprint& footprint) {
  const AttitudeSample s = sample_attitude(map, x, y, psi, footprint);
  switch (s.status) {
    case AttitudeSample::Status::ok:
      return s.attitude;
    case AttitudeSample::Status::out_of_bounds:
      throw OutOfBounds("wheel footprint at (" + format_double(x) + ", " + format_double(y) +
                        ") leaves the elevation map");
    case AttitudeSample::Status::unknown_cell:
      throw UnknownCell("wheel footprint at (" + format_double(x) + ", " + format_double(y) +
                        ") touches a NODATA cell");
    case AttitudeSample::Status::too_steep:
      throw TooSteep("terrain too steep at (" + format_double(x) + ", " + format_double(y) + ")");
  }
  return s.attitude;
}

void write_grid(std::ostream& out, const ElevationMap& map) {
  out << "ncols " << map.n_cols() << '\n';
  out << "nrows " << map.n_rows() << '\n';
  out << "xllcorner " << format_double(map.origin_x()) << '\n';
  out << "yllcorner " << format_double(map.origin_y()) << '\n';
  out << "cellsize " << format_double(map.cell_size()) << '\n';
  out << "NODATA_value -9999\n";
  std::string line;
  for (int row = map.n_rows() - 1; row >= 0; --row) {
    line.clear();
    for (int col = 0; col < map.n_cols(); ++col) {
      if (col) line.push_back(' ');
      const double h = map.cell(col, row);
      line += std::isnan(h) ? std::string("-9999") : format_double(h);
    }
    line.push_back('\n');
    out << line;
  }
}

void write_grid_file(const std::string& path, const ElevationMap& map) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_grid(out, map);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

ElevationMap read_grid(std::istream& in) {
  int n_cols = -1, n_rows = -1;
  double xll = std::numeric_limits<double>::quiet_NaN();
  double yll = xll, cell = xll;
  double nodata = kNoDataValue;

  std::string line;
  std::size_t line_no = 0;
  // Header: keyword/value pairs until the first numeric line.
  std::streampos data_start = in.tellg();
  while (true) {
    data_start = in.tellg();
    if (!std::getline(in, line)) break;
    ++line_no;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::string lower = key;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    const bool is_key = std::isalpha(static_cast<unsigned char>(lower[0]));
    if (!is_key) {
      --line_no;
      in.clear();
      in.seekg(data_start);
      break;
    }
    double value = 0.0;
    if (!(ls >> value)) throw ParseError("header '" + key + "' has no numeric value", line_no);
    if (lower == "ncols") {
      n_cols = static_cast<int>(value);
    } else if (lower == "nrows") {
      n_rows = static_cast<int>(value);
    } else if (lower == "xllcorner") {
      xll = value;
    } else if (lower == "yllcorner") {
      yll = value;
    } else if (lower == "cellsize") {
      cell = value;
    } else if (lower == "nodata_value") {
      nodata = value;
    } else {
      throw ParseError("unknown header key '" + key + "'", line_no);
    }
  }
  if (n_cols < 2 || n_rows < 2 || std::isnan(xll) || std::isnan(yll) || std::isnan(cell)) {
    throw ParseError("incomplete grid header", line_no);
  }

  std::vector<double> heights(static_cast<std::size_t>(n_cols) * n_rows);
  for (int r = 0; r < n_rows; ++r) {
    if (!std::getline(in, line)) {
      throw ParseError("expected " + std::to_string(n_rows) + " data rows, got " +
                           std::to_string(r),
                       line_no + 1);
    }
    ++line_no;
    const int row = n_rows - 1 - r;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int col = 0; col < n_cols; ++col) {
      while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
      double v = 0.0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) {
        throw ParseError("expected " + std::to_string(n_cols) + " values", line_no);
      }
      p = res.ptr;
      heights[static_cast<std::size_t>(row) * n_cols + col] =
          (v == nodata) ? std::numeric_limits<double>::quiet_NaN() : v;
    }
    while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
    if (p != end) throw ParseError("too many values in row", line_no);
  }
  try {
    return ElevationMap(xll, yll, cell, n_cols, n_rows, std::move(heights));
  } catch (const InvalidSpec& e) {
    throw ParseError(e.what(), line_no);
  }
}

ElevationMap read_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_grid(in);
}

}  // namespace terra

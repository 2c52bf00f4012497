#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace terra {

/// Sentinel written to heightmap files for unknown cells.
inline constexpr double kNoDataValue = -9999.0;

/// Uniform grid of terrain heights.
///
/// Heights are stored at cell centers, row-major with row 0 at the lowest y.
/// The origin is the lower-left corner of the lower-left cell (ESRI
/// `xllcorner`/`yllcorner`), so the center of cell (col, row) sits at
/// `origin + (index + 0.5) * cell_size`. Unknown cells hold NaN.
///
/// Immutable after construction; every query is const and thread-safe.
class ElevationMap {
 public:
  enum class Status : std::uint8_t { ok, out_of_bounds, unknown_cell };

  struct Sample {
    double z;
    Status status;
  };

  ElevationMap(double origin_x, double origin_y, double cell_size, int n_cols, int n_rows,
               std::vector<double> heights);

  double origin_x() const noexcept { return origin_x_; }
  double origin_y() const noexcept { return origin_y_; }
  double cell_size() const noexcept { return cell_size_; }
  int n_cols() const noexcept { return n_cols_; }
  int n_rows() const noexcept { return n_rows_; }
  const std::vector<double>& heights() const noexcept { return heights_; }

  double cell(int col, int row) const noexcept {
    return heights_[static_cast<std::size_t>(row) * n_cols_ + col];
  }
  double center_x(int col) const noexcept { return origin_x_ + (col + 0.5) * cell_size_; }
  double center_y(int row) const noexcept { return origin_y_ + (row + 0.5) * cell_size_; }

  /// Bilinear interpolation between the four surrounding cell centers.
  /// Throws OutOfBounds outside the hull of cell centers, UnknownCell when
  /// any of the four cells is NODATA.
  double height_at(double x, double y) const;

  /// Non-throwing variant used on hot paths.
  Sample sample(double x, double y) const noexcept;

  double min_height() const noexcept;
  double max_height() const noexcept;

  friend bool operator==(const ElevationMap& a, const ElevationMap& b);

 private:
  double origin_x_;
  double origin_y_;
  double cell_size_;
  int n_cols_;
  int n_rows_;
  std::vector<double> heights_;
};

enum class TerrainKind : std::uint8_t { flat, incline, v_ditch, crater, sine_bumps };

std::string to_string(TerrainKind kind);
TerrainKind terrain_kind_from_string(const std::string& name);

/// Parameters for synthetic terrain. Angles are in degrees.
///
/// Incline: plane rising at `angle_deg` toward `azimuth_deg`
/// (z = tan(angle) * (x cos az + y sin az)).
/// V-ditch: prism depression centred on a line through (center_x, center_y)
/// running along `axis_azimuth_deg`; flat floor, planar walls at
/// `wall_angle_deg`, total half-width measured at ground level. Each of the
/// four corners can be rounded over a horizontal width of `edge_blend`.
struct TerrainSpec {
  TerrainKind kind = TerrainKind::flat;
  double size_x = 200.0;
  double size_y = 200.0;
  double resolution = 0.5;
  double center_x = 0.0;
  double center_y = 0.0;

  double angle_deg = 10.0;
  double azimuth_deg = 0.0;

  double depth = 1.0;
  double half_width = 4.0;
  double wall_angle_deg = 20.0;
  double axis_azimuth_deg = 90.0;
  double edge_blend = 0.0;

  double radius = 6.0;
  double rim_width = 2.0;

  double amplitude = 0.3;
  double wavelength = 8.0;

  void validate() const;
};

ElevationMap generate_terrain(const TerrainSpec& spec);

struct WheelFootprint {
  double wheelbase = 2.5;
  double track_width = 1.6;

  void validate() const;
};

/// Roll and pitch in radians.
///
/// Gravity in the body frame is g * (sin(pitch) b1 + cos(pitch) sin(roll) b2
/// - cos(pitch) cos(roll) b3): positive roll means gravity pulls toward the
/// left side, positive pitch means gravity pulls forward (nose down).
struct Attitude {
  double roll = 0.0;
  double pitch = 0.0;
};

/// Least-squares plane z = a x + b y + c.
struct Plane {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

Plane fit_plane(const double (&xs)[4], const double (&ys)[4], const double (&zs)[4]) noexcept;

/// Attitude of a plane z = a x + b y + c seen by a vehicle heading psi.
Attitude attitude_from_plane(double a, double b, double psi) noexcept;

struct AttitudeSample {
  Attitude attitude;
  enum class Status : std::uint8_t { ok, out_of_bounds, unknown_cell, too_steep } status;
};

/// Attitude of a rigid footprint whose four wheels rest on the map.
/// Throws OutOfBounds, UnknownCell or TooSteep.
Attitude attitude(const ElevationMap& map, double x, double y, double psi,
                  const WheelFootprint& footprint);

AttitudeSample sample_attitude(const ElevationMap& map, double x, double y, double psi,
                               const WheelFootprint& footprint) noexcept;

/// ESRI ASCII grid, top row first, NODATA_value -9999.
void write_grid(std::ostream& out, const ElevationMap& map);
void write_grid_file(const std::string& path, const ElevationMap& map);
ElevationMap read_grid(std::istream& in);
ElevationMap read_grid_file(const std::string& path);

}  // namespace terra

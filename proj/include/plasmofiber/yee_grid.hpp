#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace plasmofiber {

// Speed of light in nm/fs. Internally the solver works in nm with c = 1, so a
// time t_nm corresponds to t_nm / kSpeedOfLight femtoseconds.
inline constexpr double kSpeedOfLight = 299.792458;
inline constexpr double kPi = 3.14159265358979323846;

inline double nm_time_to_fs(double t_nm) { return t_nm / kSpeedOfLight; }
inline double fs_to_nm_time(double t_fs) { return t_fs * kSpeedOfLight; }

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  double &operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Vec3 &, const Vec3 &) = default;

  double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
};

// Field component identifiers. E components live on cell edges, H components
// on cell faces; the half-index offsets below follow the standard Yee layout.
enum class Component { Ex = 0, Ey = 1, Ez = 2, Hx = 3, Hy = 4, Hz = 5 };

inline int axis_of(Component c) { return static_cast<int>(c) % 3; }
inline bool is_electric(Component c) { return static_cast<int>(c) < 3; }

// Offset (in cells) of a component's sample point from node (i, j, k).
std::array<double, 3> component_offset(Component c);

struct YeeGrid {
  std::array<int, 3> extent{20, 20, 20}; // cells per axis
  double resolution = 10.0;              // nm per cell
  Vec3 origin;                           // nm, position of node (0, 0, 0)

  // Throws InvalidArgument when extent < 20 or resolution <= 0.
  void validate() const;

  int nodes(int axis) const { return extent[axis] + 1; }
  std::size_t node_count() const {
    return static_cast<std::size_t>(nodes(0)) * nodes(1) * nodes(2);
  }
  std::size_t stride(int axis) const {
    if (axis == 2) return 1;
    if (axis == 1) return static_cast<std::size_t>(nodes(2));
    return static_cast<std::size_t>(nodes(1)) * nodes(2);
  }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * nodes(1) + j) * nodes(2) + k;
  }
  Vec3 node_position(double i, double j, double k) const {
    return {origin.x + i * resolution, origin.y + j * resolution, origin.z + k * resolution};
  }
  Vec3 sample_position(Component c, int i, int j, int k) const;
  Vec3 upper_corner() const { return node_position(extent[0], extent[1], extent[2]); }

  friend bool operator==(const YeeGrid &, const YeeGrid &) = default;
};

// Time step bound in femtoseconds: safety * resolution / (c * sqrt(3)).
double courant_dt(const YeeGrid &grid, double safety);

// The same bound in the solver's internal nm (c = 1) time unit.
double courant_dt_nm(const YeeGrid &grid, double safety);

} // namespace plasmofiber

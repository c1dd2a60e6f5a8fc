#pragma once

#include "plasmofiber/dipole_source.hpp"
#include "plasmofiber/materials.hpp"
#include "plasmofiber/yee_grid.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace plasmofiber {

inline constexpr double kInfiniteLength = std::numeric_limits<double>::infinity();

struct Cylinder {
  int axis = 2;
  Vec3 center;                     // a point on the axis
  double radius = 0.0;
  double length = kInfiniteLength; // along the axis, centered on `center`
};

// A rod with hemispherical caps. `length` is tip to tip, caps included.
struct Capsule {
  int axis = 2;
  Vec3 center;
  double length = 0.0;
  double diameter = 0.0;
};

struct Block {
  Vec3 corner;
  Vec3 size;
};

using Shape = std::variant<Cylinder, Capsule, Block>;

// Negative inside, positive outside, magnitude is the Euclidean distance to
// the surface (exact for all three shapes).
double signed_distance(const Shape &shape, Vec3 p);
inline bool contains(const Shape &shape, Vec3 p) { return signed_distance(shape, p) < 0.0; }
double analytic_volume(const Shape &shape);
void validate_shape(const Shape &shape);

struct PlacedShape {
  Shape shape;
  int material = 0; // index into SceneConfig::materials
};

struct CpmlParams {
  int thickness = 10;            // cells
  double order = 3.0;            // polynomial grading exponent m
  double sigma_max_factor = 1.0; // multiple of 0.8 (m + 1) / resolution
  double kappa_max = 3.0;
  double alpha_max = 0.05;       // multiple of the pulse center angular frequency

  void validate() const;
  friend bool operator==(const CpmlParams &, const CpmlParams &) = default;
};

// Closed flux box; corners are snapped to the nearest grid nodes.
struct BoxMonitorSpec {
  std::string name;
  Vec3 lo, hi;
};

// Flux / mode-projection plane. The transverse extent covers the grid minus
// the CPML unless bounds are given.
struct PlaneMonitorSpec {
  std::string name;
  int normal_axis = 2;
  double position_nm = 0.0;
};

// Point probe of the E field projected on `orientation`.
struct ProbeMonitorSpec {
  std::string name;
  Vec3 position;
  Vec3 orientation{0.0, 0.0, 1.0};
};

std::vector<double> default_wavelengths(); // 600..900 nm step 5

struct SceneConfig {
  YeeGrid grid;
  std::vector<Material> materials{Material::vacuum()};
  std::vector<PlacedShape> shapes; // later entries override earlier ones
  DipoleSource dipole;
  std::vector<BoxMonitorSpec> boxes;
  std::vector<PlaneMonitorSpec> planes;
  std::vector<ProbeMonitorSpec> probes;
  std::vector<double> wavelengths_nm = default_wavelengths();
  CpmlParams cpml;
  double courant_safety = 0.5;
  long max_steps = 200000;
  double decay_threshold = 1e-6;
  int dft_stride = 0; // 0 selects a stride from the shortest wavelength

  // Fiber and rod layout bookkeeping (zero when not applicable).
  double d_nm = 0.0;
  std::optional<double> rod_length_nm;
  double fiber_diameter_nm = 0.0;

  void validate() const;
};

inline constexpr double kRodDiameter = 25.0;

struct SceneOptions {
  double resolution_nm = 10.0;
  double transverse_margin_nm = 400.0; // beyond the fiber surface
  double plane_distance_nm = 1000.0;   // from the scatterer ends to the mode planes
  int plane_gap_cells = 4;             // between a mode plane and the CPML
  CpmlParams cpml;
  double courant_safety = 0.5;
  GaussianPulse pulse;
  std::vector<double> wavelengths_nm = default_wavelengths();
  bool radiation_box = false;          // closed box around rod and dipole
  double radiation_box_margin_nm = 60.0;
};

// Nanofiber along z with the rod tangent to its surface on the +y side and the
// dipole on the rod axis, `d` beyond the +z tip. Without a rod length the
// scene is the bare fiber with the dipole at the same height, at z = d.
SceneConfig fiber_rod_scene(double d_nm, std::optional<double> rod_length_nm, double fiber_diameter_nm,
                        Vec3 dipole_orientation, const SceneOptions &options = {});

// Vacuum box of `half_width_nm` around a dipole at the origin (plus the given
// sub-cell offset) with an optional closed flux box `box_half_nm` wide.
SceneConfig vacuum_scene(double resolution_nm, Vec3 dipole_orientation, double half_width_nm,
                         Vec3 subcell_offset_nm = {}, std::optional<double> box_half_nm = {},
                         const SceneOptions &options = {});

struct DispersiveEdge {
  int axis;
  std::size_t index;
  int model;
};

struct MaterialMap {
  YeeGrid grid;
  std::array<std::vector<float>, 3> inv_eps;            // 1/eps (1/eps_inf on metal)
  std::array<std::vector<std::uint8_t>, 3> metal_model; // 0 = none, else model + 1
  std::vector<DrudeLorentzModel> models;
  std::vector<DispersiveEdge> dispersive_edges;

  bool is_metal(int axis, std::size_t idx) const { return metal_model[axis][idx] != 0; }
  double permittivity(int axis, std::size_t idx) const { return 1.0 / inv_eps[axis][idx]; }
  // Metal volume in nm^3, counting each metal edge as a third of a cell.
  double metal_volume() const;
};

// Priority rasterization: metal edges are staircased (edge center inside the
// shape), dielectric edges get the volume-averaged permittivity of the cell
// centered on the edge.
MaterialMap rasterize(const SceneConfig &scene);

} // namespace plasmofiber

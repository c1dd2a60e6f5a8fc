#include "plasmofiber/scene.hpp"

#include "plasmofiber/errors.hpp"

#include <algorithm>
#include <cmath>

namespace plasmofiber {

namespace {

struct Bounds {
  Vec3 lo, hi;
  bool contains(Vec3 p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
  }
};

Bounds bounds_of(const Shape &shape) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      [&](const auto &s) -> Bounds {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Block>) {
          return {s.corner, s.corner + s.size};
        } else {
          double radius = 0.0, half = 0.0;
          if constexpr (std::is_same_v<T, Cylinder>) {
            radius = s.radius;
            half = std::isfinite(s.length) ? 0.5 * s.length : inf;
          } else {
            radius = 0.5 * s.diameter;
            half = 0.5 * s.length;
          }
          Bounds b{s.center - Vec3{radius, radius, radius}, s.center + Vec3{radius, radius, radius}};
          b.lo[s.axis] = s.center[s.axis] - half;
          b.hi[s.axis] = s.center[s.axis] + half;
          return b;
        }
      },
      shape);
}

Bounds expanded(Bounds b, double by) {
  return {b.lo - Vec3{by, by, by}, b.hi + Vec3{by, by, by}};
}

// Split p - center into axial coordinate and radial distance.
std::pair<double, double> axial_radial(int axis, Vec3 center, Vec3 p) {
  const Vec3 d = p - center;
  const double t = d[axis];
  const double u = d[(axis + 1) % 3];
  const double v = d[(axis + 2) % 3];
  return {t, std::sqrt(u * u + v * v)};
}

} // namespace

double signed_distance(const Shape &shape, Vec3 p) {
  return std::visit(
      [&](const auto &s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Cylinder>) {
          const auto [t, rho] = axial_radial(s.axis, s.center, p);
          const double dr = rho - s.radius;
          if (!std::isfinite(s.length)) return dr;
          const double da = std::abs(t) - 0.5 * s.length;
          const double outside = std::hypot(std::max(dr, 0.0), std::max(da, 0.0));
          return outside + std::min(std::max(dr, da), 0.0);
        } else if constexpr (std::is_same_v<T, Capsule>) {
          const double r = 0.5 * s.diameter;
          const double half = 0.5 * s.length - r;
          const auto [t, rho] = axial_radial(s.axis, s.center, p);
          const double tc = std::clamp(t, -half, half);
          return std::hypot(t - tc, rho) - r;
        } else {
          double qmax = -std::numeric_limits<double>::infinity();
          double out2 = 0.0;
          for (int a = 0; a < 3; ++a) {
            const double half = 0.5 * s.size[a];
            const double q = std::abs(p[a] - (s.corner[a] + half)) - half;
            qmax = std::max(qmax, q);
            if (q > 0.0) out2 += q * q;
          }
          return std::sqrt(out2) + std::min(qmax, 0.0);
        }
      },
      shape);
}

double analytic_volume(const Shape &shape) {
  return std::visit(
      [](const auto &s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Cylinder>) {
          return kPi * s.radius * s.radius * s.length;
        } else if constexpr (std::is_same_v<T, Capsule>) {
          const double r = 0.5 * s.diameter;
          return kPi * r * r * (s.length - 2.0 * r) + 4.0 / 3.0 * kPi * r * r * r;
        } else {
          return s.size.x * s.size.y * s.size.z;
        }
      },
      shape);
}

void validate_shape(const Shape &shape) {
  std::visit(
      [](const auto &s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Cylinder>) {
          if (!(s.radius > 0.0) || !(s.length > 0.0) || s.axis < 0 || s.axis > 2)
            throw Error(ErrorKind::InvalidGeometry, "cylinder needs a positive radius and length");
        } else if constexpr (std::is_same_v<T, Capsule>) {
          if (!(s.diameter > 0.0) || s.axis < 0 || s.axis > 2)
            throw Error(ErrorKind::InvalidGeometry, "capsule needs a positive diameter");
          if (s.length < s.diameter)
            throw Error(ErrorKind::InvalidGeometry, "capsule length must be at least its diameter");
        } else {
          if (!(s.size.x > 0.0 && s.size.y > 0.0 && s.size.z > 0.0))
            throw Error(ErrorKind::InvalidGeometry, "block needs positive size");
        }
      },
      shape);
}

void CpmlParams::validate() const {
  if (thickness < 8) throw Error(ErrorKind::InvalidArgument, "CPML thickness must be at least 8 cells");
  if (order < 2.0 || order > 4.0) throw Error(ErrorKind::InvalidArgument, "CPML grading order must lie in [2, 4]");
  if (sigma_max_factor < 0.0 || kappa_max < 1.0 || alpha_max < 0.0)
    throw Error(ErrorKind::InvalidArgument, "CPML sigma/alpha must be >= 0 and kappa_max >= 1");
}

std::vector<double> default_wavelengths() {
  std::vector<double> w;
  for (int i = 0; i <= 60; ++i) w.push_back(600.0 + 5.0 * i);
  return w;
}

void SceneConfig::validate() const {
  grid.validate();
  dipole.validate();
  cpml.validate();
  if (!(courant_safety > 0.0 && courant_safety <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "Courant safety must lie in (0, 1]");
  if (wavelengths_nm.empty()) throw Error(ErrorKind::InvalidArgument, "no monitor wavelengths");
  for (double w : wavelengths_nm)
    if (dipole.pulse.relative_spectral_amplitude(w) < 0.01)
      throw Error(ErrorKind::InvalidArgument, "monitor wavelength outside the source bandwidth");
  if (materials.empty()) throw Error(ErrorKind::InvalidArgument, "material table is empty");
  for (const auto &ps : shapes) {
    validate_shape(ps.shape);
    if (ps.material < 0 || ps.material >= static_cast<int>(materials.size()))
      throw Error(ErrorKind::InvalidArgument, "shape references an unknown material");
  }
  if (d_nm < 0.0) throw Error(ErrorKind::InvalidGeometry, "dipole separation must be non-negative");
  for (int a = 0; a < 3; ++a)
    if (grid.extent[a] <= 2 * cpml.thickness + 2)
      throw Error(ErrorKind::InvalidArgument, "grid too small for the CPML");
  for (const auto &ps : shapes)
    if (materials[ps.material].is_dispersive() && contains(ps.shape, dipole.position))
      throw Error(ErrorKind::InvalidGeometry, "dipole lies inside metal");
}

SceneConfig fiber_rod_scene(double d, std::optional<double> rod_length, double fiber_diameter,
                        Vec3 orientation, const SceneOptions &opt) {
  if (d < 0.0) throw Error(ErrorKind::InvalidGeometry, "separation d must be non-negative");
  if (!(fiber_diameter > 0.0)) throw Error(ErrorKind::InvalidGeometry, "fiber diameter must be positive");
  if (rod_length && *rod_length < kRodDiameter)
    throw Error(ErrorKind::InvalidGeometry, "rod length must be at least the rod diameter");
  if (opt.transverse_margin_nm < 2.0 * kRodDiameter)
    throw Error(ErrorKind::InvalidArgument, "transverse margin too small to hold the rod");

  const double res = opt.resolution_nm;
  const double fiber_r = 0.5 * fiber_diameter;
  const double axis_y = fiber_r + 0.5 * kRodDiameter;
  const double half_width = fiber_r + opt.transverse_margin_nm;
  const int pml = opt.cpml.thickness;
  const int gap = opt.plane_gap_cells;

  SceneConfig s;
  s.grid.resolution = res;
  s.cpml = opt.cpml;
  s.courant_safety = opt.courant_safety;
  s.wavelengths_nm = opt.wavelengths_nm;
  s.d_nm = d;
  s.rod_length_nm = rod_length;
  s.fiber_diameter_nm = fiber_diameter;

  // x: symmetric about 0 with a node on x = 0.
  const int nx_half = static_cast<int>(std::ceil(half_width / res)) + pml;
  s.grid.extent[0] = 2 * nx_half;
  s.grid.origin.x = -nx_half * res;

  // y: a node line on the rod axis.
  const int below = pml + static_cast<int>(std::ceil((axis_y + half_width) / res));
  const int above = pml + std::max(3, static_cast<int>(std::ceil((half_width - axis_y) / res)));
  s.grid.extent[1] = below + above;
  s.grid.origin.y = axis_y - below * res;

  // z: node at the rod center, mode planes plane_distance beyond the scatterer.
  const double half_rod = rod_length ? 0.5 * *rod_length : 0.0;
  const double dipole_z = half_rod + d;
  const double scatter_lo = rod_length ? -half_rod : dipole_z;
  const double scatter_hi = dipole_z;
  const int k_lo_plane = static_cast<int>(std::floor((scatter_lo - opt.plane_distance_nm) / res));
  const int k_hi_plane = static_cast<int>(std::ceil((scatter_hi + opt.plane_distance_nm) / res));
  const int k0 = -(k_lo_plane - gap - pml); // node index of z = 0
  s.grid.extent[2] = k0 + k_hi_plane + gap + pml;
  s.grid.origin.z = -k0 * res;

  s.materials = {Material::vacuum(), Material::silica(), Material::gold()};
  s.shapes.push_back({Cylinder{2, {0.0, 0.0, 0.0}, fiber_r, kInfiniteLength}, 1});
  if (rod_length)
    s.shapes.push_back({Capsule{2, {0.0, axis_y, 0.0}, *rod_length, kRodDiameter}, 2});

  s.dipole.position = {0.0, axis_y, dipole_z};
  s.dipole.orientation = orientation;
  s.dipole.pulse = opt.pulse;

  s.planes.push_back({"mode_minus", 2, k_lo_plane * res});
  s.planes.push_back({"mode_plus", 2, k_hi_plane * res});
  if (opt.radiation_box) {
    const double m = opt.radiation_box_margin_nm;
    const double r = 0.5 * kRodDiameter;
    s.boxes.push_back({"radiation", {-r - m, axis_y - r - m, scatter_lo - m},
                       {r + m, axis_y + r + m, scatter_hi + m}});
  }
  return s;
}

SceneConfig vacuum_scene(double res, Vec3 orientation, double half_width, Vec3 offset,
                         std::optional<double> box_half, const SceneOptions &opt) {
  SceneConfig s;
  s.grid.resolution = res;
  s.cpml = opt.cpml;
  s.courant_safety = opt.courant_safety;
  s.wavelengths_nm = opt.wavelengths_nm;
  const int n_half = static_cast<int>(std::ceil(half_width / res)) + opt.cpml.thickness;
  s.grid.extent = {2 * n_half, 2 * n_half, 2 * n_half};
  s.grid.origin = {-n_half * res, -n_half * res, -n_half * res};
  s.dipole.position = offset;
  s.dipole.orientation = orientation;
  s.dipole.pulse = opt.pulse;
  if (box_half) s.boxes.push_back({"radiation", {-*box_half, -*box_half, -*box_half}, {*box_half, *box_half, *box_half}});
  return s;
}

double MaterialMap::metal_volume() const {
  std::size_t count = 0;
  for (int a = 0; a < 3; ++a)
    count += static_cast<std::size_t>(std::count_if(metal_model[a].begin(), metal_model[a].end(),
                                                    [](std::uint8_t m) { return m != 0; }));
  const double cell = grid.resolution * grid.resolution * grid.resolution;
  return count * cell / 3.0;
}

MaterialMap rasterize(const SceneConfig &scene) {
  const YeeGrid &g = scene.grid;
  g.validate();

  const Vec3 lo = g.origin;
  const Vec3 hi = g.upper_corner();
  for (const auto &ps : scene.shapes) {
    validate_shape(ps.shape);
    const Bounds b = bounds_of(ps.shape);
    for (int a = 0; a < 3; ++a) {
      const bool finite = std::isfinite(b.lo[a]) && std::isfinite(b.hi[a]);
      if (finite && (b.lo[a] < lo[a] || b.hi[a] > hi[a]))
        throw Error(ErrorKind::OutOfBounds, "shape extends beyond the grid");
    }
  }

  MaterialMap map;
  map.grid = g;
  std::vector<int> model_of_material(scene.materials.size(), -1);
  for (std::size_t m = 0; m < scene.materials.size(); ++m) {
    if (scene.materials[m].is_dispersive()) {
      model_of_material[m] = static_cast<int>(map.models.size());
      map.models.push_back(*scene.materials[m].dispersion);
    }
  }
  if (map.models.size() > 254) throw Error(ErrorKind::InvalidArgument, "too many dispersive materials");

  const int n_shapes = static_cast<int>(scene.shapes.size());
  const double res = g.resolution;
  const double near = 0.5 * std::sqrt(3.0) * res;
  std::vector<Bounds> reach(n_shapes);
  for (int s = 0; s < n_shapes; ++s) reach[s] = expanded(bounds_of(scene.shapes[s].shape), near);

  auto dielectric_eps_at = [&](Vec3 q) {
    for (int s = n_shapes - 1; s >= 0; --s) {
      const auto &mat = scene.materials[scene.shapes[s].material];
      if (mat.is_dispersive()) continue;
      if (reach[s].contains(q) && contains(scene.shapes[s].shape, q)) return mat.permittivity;
    }
    return scene.materials[0].is_dispersive() ? 1.0 : scene.materials[0].permittivity;
  };

  constexpr int kSub = 5;
  const std::size_t n = g.node_count();
  for (int a = 0; a < 3; ++a) {
    map.inv_eps[a].assign(n, 1.0f);
    map.metal_model[a].assign(n, 0);
    const Component comp = static_cast<Component>(a);
#pragma omp parallel for schedule(static)
    for (int i = 0; i <= g.extent[0]; ++i) {
      for (int j = 0; j <= g.extent[1]; ++j) {
        for (int k = 0; k <= g.extent[2]; ++k) {
          const Vec3 p = g.sample_position(comp, i, j, k);
          const std::size_t idx = g.index(i, j, k);
          int top = -1;
          bool boundary = false;
          for (int s = n_shapes - 1; s >= 0; --s) {
            if (!reach[s].contains(p)) continue;
            const double sd = signed_distance(scene.shapes[s].shape, p);
            if (top < 0 && sd < 0.0) top = s;
            if (std::abs(sd) < near && !scene.materials[scene.shapes[s].material].is_dispersive())
              boundary = true;
          }
          if (top >= 0) {
            const int model = model_of_material[scene.shapes[top].material];
            if (model >= 0) {
              map.metal_model[a][idx] = static_cast<std::uint8_t>(model + 1);
              map.inv_eps[a][idx] = static_cast<float>(1.0 / map.models[model].eps_inf);
              continue;
            }
          }
          double eps;
          if (!boundary) {
            eps = dielectric_eps_at(p);
          } else {
            double sum = 0.0;
            for (int u = 0; u < kSub; ++u)
              for (int v = 0; v < kSub; ++v)
                for (int w = 0; w < kSub; ++w) {
                  const Vec3 q = p + res * Vec3{(u + 0.5) / kSub - 0.5, (v + 0.5) / kSub - 0.5,
                                               (w + 0.5) / kSub - 0.5};
                  sum += dielectric_eps_at(q);
                }
            eps = sum / (kSub * kSub * kSub);
          }
          map.inv_eps[a][idx] = static_cast<float>(1.0 / eps);
        }
      }
    }
    for (std::size_t idx = 0; idx < n; ++idx)
      if (map.metal_model[a][idx] != 0)
        map.dispersive_edges.push_back({a, idx, map.metal_model[a][idx] - 1});
  }
  return map;
}

} // namespace plasmofiber

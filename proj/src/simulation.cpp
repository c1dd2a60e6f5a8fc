#include "plasmofiber/simulation.hpp"

#include "plasmofiber/errors.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace plasmofiber {

namespace {

int node_of(const YeeGrid &g, int axis, double x) {
  return static_cast<int>(std::lround((x - g.origin[axis]) / g.resolution));
}

std::vector<DftPlane> box_faces(const YeeGrid &g, const BoxMonitorSpec &b, int margin,
                                const std::vector<double> &wl) {
  int lo[3], hi[3];
  for (int a = 0; a < 3; ++a) {
    lo[a] = node_of(g, a, b.lo[a]);
    hi[a] = node_of(g, a, b.hi[a]);
    if (hi[a] <= lo[a]) throw Error(ErrorKind::InvalidArgument, "box monitor '" + b.name + "' is empty");
    if (lo[a] < margin || hi[a] > g.extent[a] - margin)
      throw Error(ErrorKind::OutOfBounds, "box monitor '" + b.name + "' reaches into the CPML");
  }
  static const char *tags[3][2] = {{"xlo", "xhi"}, {"ylo", "yhi"}, {"zlo", "zhi"}};
  std::vector<DftPlane> faces;
  for (int a = 0; a < 3; ++a) {
    const int u = (a + 1) % 3, v = (a + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      DftPlane p = make_plane(g, b.name + "/" + tags[a][side], a, side ? hi[a] : lo[a], lo[u], hi[u],
                              lo[v], hi[v], wl);
      p.sign = side ? 1 : -1;
      faces.push_back(std::move(p));
    }
  }
  return faces;
}

// E values at a set of taps.
std::vector<double> sample_taps(const FieldState &s, const std::vector<SourceTap> &taps) {
  std::vector<double> v;
  v.reserve(taps.size());
  for (const auto &t : taps) v.push_back(s.E[t.axis][t.index]);
  return v;
}

double weighted_average(const std::vector<SourceTap> &taps, const std::vector<double> &before,
                        const std::vector<double> &after) {
  double sum = 0.0;
  for (std::size_t i = 0; i < taps.size(); ++i) sum += taps[i].weight * 0.5 * (before[i] + after[i]);
  return sum;
}

} // namespace

void configure_threads(int threads) {
  if (threads <= 0) {
    if (const char *env = std::getenv("PLASMOFIBER_THREADS")) threads = std::atoi(env);
  }
  if (threads > 0) omp_set_num_threads(threads);
}

int auto_dft_stride(double dt, double shortest_wavelength_nm) {
  return std::max(1, static_cast<int>(std::floor(shortest_wavelength_nm / 20.0 / dt)));
}

MonitorSet run(const SceneConfig &scene, const RunOptions &options) {
  scene.validate();
  return run(scene, rasterize(scene), options);
}

MonitorSet run(const SceneConfig &scene, const MaterialMap &materials, const RunOptions &options) {
  scene.validate();
  if (!(materials.grid == scene.grid))
    throw Error(ErrorKind::GridMismatch, "material map was rasterized on another grid");
  configure_threads(options.threads);

  const YeeGrid &g = scene.grid;
  const double dt = courant_dt_nm(g, scene.courant_safety);
  const auto &pulse = scene.dipole.pulse;
  const double omega_ref = 2.0 * kPi / pulse.center_wavelength_nm;
  FieldState state = make_field_state(materials, scene.cpml, dt, omega_ref);

  MonitorSet m;
  m.grid = g;
  m.dt = dt;
  m.wavelengths_nm = scene.wavelengths_nm;
  const std::size_t nw = m.wavelengths_nm.size();
  std::vector<double> omegas;
  for (double w : m.wavelengths_nm) omegas.push_back(2.0 * kPi / w);
  m.source_current.assign(nw, cplx{});
  m.source_field.assign(nw, cplx{});
  const double shortest = *std::min_element(m.wavelengths_nm.begin(), m.wavelengths_nm.end());
  m.dft_stride = scene.dft_stride > 0 ? scene.dft_stride : auto_dft_stride(dt, shortest);

  const int margin = scene.cpml.thickness;
  for (const auto &spec : scene.planes) {
    const int a = spec.normal_axis;
    const int idx = node_of(g, a, spec.position_nm);
    if (idx <= margin || idx >= g.extent[a] - margin)
      throw Error(ErrorKind::OutOfBounds, "plane monitor '" + spec.name + "' lies in the CPML");
    const int u = (a + 1) % 3, v = (a + 2) % 3;
    m.planes.push_back(make_plane(g, spec.name, a, idx, margin, g.extent[u] - margin, margin,
                                  g.extent[v] - margin, m.wavelengths_nm));
  }
  for (const auto &spec : scene.boxes) m.boxes.push_back({spec.name, box_faces(g, spec, margin, m.wavelengths_nm)});
  for (const auto &spec : scene.probes)
    m.probes.push_back({spec.name, spread_dipole(materials, spec.position, spec.orientation),
                        std::vector<cplx>(nw, cplx{})});

  const auto taps = spread_dipole(materials, scene.dipole.position, scene.dipole.orientation);
  const double end_time = pulse.end_time();
  const int check = std::max(1, options.energy_check);

  long n = 0;
  bool converged = false;
  for (; n < scene.max_steps; ++n) {
    const double t_half = (n + 0.5) * dt;
    const double value = t_half <= end_time ? pulse.value(t_half) : 0.0;
    const auto src_before = sample_taps(state, taps);
    std::vector<std::vector<double>> probe_before;
    for (const auto &p : m.probes) probe_before.push_back(sample_taps(state, p.taps));

    const InjectedCurrent current{taps, value, scene.dipole.hard};
    step(state, materials, std::span<const InjectedCurrent>(&current, 1));

    const double e_src = weighted_average(taps, src_before, sample_taps(state, taps));
    m.injected_energy -= value * e_src * dt;
    for (std::size_t w = 0; w < nw; ++w) {
      const cplx ph = std::polar(dt, omegas[w] * t_half);
      m.source_current[w] += value * ph;
      m.source_field[w] += e_src * ph;
    }
    for (std::size_t p = 0; p < m.probes.size(); ++p) {
      const double e = weighted_average(m.probes[p].taps, probe_before[p], sample_taps(state, m.probes[p].taps));
      for (std::size_t w = 0; w < nw; ++w) m.probes[p].field[w] += e * std::polar(dt, omegas[w] * t_half);
    }

    if ((n + 1) % m.dft_stride == 0) {
      const double t_e = (n + 1) * dt;
      const double weight = m.dft_stride * dt;
      for (auto &p : m.planes) accumulate(p, state, t_e, t_half, weight);
      for (auto &b : m.boxes)
        for (auto &f : b.faces) accumulate(f, state, t_e, t_half, weight);
    }

    if ((n + 1) % check == 0) {
      const double energy = state.energy(materials);
      if (!std::isfinite(energy))
        throw Error(ErrorKind::NonFinite, "field blow-up at step " + std::to_string(n + 1));
      m.peak_energy = std::max(m.peak_energy, energy);
      m.final_energy = energy;
      m.energy_trace.push_back({n + 1, energy});
      if (options.progress) options.progress(n + 1, energy, m.peak_energy);
      if ((n + 1) * dt > end_time && m.peak_energy > 0.0 &&
          energy < scene.decay_threshold * m.peak_energy) {
        converged = true;
        ++n;
        break;
      }
    }
  }
  if (!converged) {
    const double energy = state.energy(materials);
    if (!std::isfinite(energy)) throw Error(ErrorKind::NonFinite, "field blow-up before the step cap");
    m.final_energy = energy;
  }
  m.steps = n;
  m.converged = converged;
  return m;
}

} // namespace plasmofiber

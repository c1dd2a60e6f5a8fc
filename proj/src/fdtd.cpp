#include "plasmofiber/fdtd.hpp"

#include "plasmofiber/errors.hpp"

#include <algorithm>
#include <cmath>

namespace plasmofiber {

namespace {

struct PoleCoefficients {
  double c1, c2, c3;
};

// Central-difference update P^{n+1} = c1 P^n - c2 P^{n-1} + c3 E^n for one pole.
PoleCoefficients pole_coefficients(double omega0, double gamma, double strength, double dt) {
  const double den = 1.0 + 0.5 * gamma * dt;
  return {(2.0 - omega0 * omega0 * dt * dt) / den, (1.0 - 0.5 * gamma * dt) / den,
          dt * dt * strength / den};
}

// Coefficients per model, Drude term first (when present), then Lorentz poles.
std::vector<std::vector<PoleCoefficients>> model_coefficients(const MaterialMap &m, double dt) {
  std::vector<std::vector<PoleCoefficients>> out;
  for (const auto &model : m.models) {
    std::vector<PoleCoefficients> poles;
    if (model.plasma_frequency > 0.0) {
      const double wp = model.plasma_frequency / kSpeedOfLight;
      poles.push_back(pole_coefficients(0.0, model.collision_rate / kSpeedOfLight, wp * wp, dt));
    }
    for (const auto &p : model.lorentz_poles) {
      const double w0 = p.frequency / kSpeedOfLight;
      poles.push_back(pole_coefficients(w0, p.damping / kSpeedOfLight, p.strength * w0 * w0, dt));
    }
    out.push_back(std::move(poles));
  }
  return out;
}

int pole_count(const DrudeLorentzModel &m) {
  return (m.plasma_frequency > 0.0 ? 1 : 0) + static_cast<int>(m.lorentz_poles.size());
}

// Index range [lo, hi] along `axis` over which a component is updated.
std::pair<int, int> update_range(const YeeGrid &g, int component, int axis) {
  const int n = g.extent[axis];
  const bool electric = component < 3;
  const int own = component % 3;
  if (electric) return own == axis ? std::pair{0, n - 1} : std::pair{1, n - 1};
  return own == axis ? std::pair{0, n} : std::pair{0, n - 1};
}

void check_grid(const FieldState &s, const MaterialMap &m) {
  if (!(s.grid == m.grid))
    throw Error(ErrorKind::GridMismatch, "field state and material map use different grids");
}

void update_h(FieldState &s) {
  const YeeGrid &g = s.grid;
  const int nx = g.extent[0], ny = g.extent[1], nz = g.extent[2];
  const std::size_t sx = g.stride(0), sy = g.stride(1);
  const float c = static_cast<float>(s.dt / g.resolution);
  const float *__restrict ex = s.E[0].data(), *__restrict ey = s.E[1].data(), *__restrict ez = s.E[2].data();
  float *__restrict hx = s.H[0].data(), *__restrict hy = s.H[1].data(), *__restrict hz = s.H[2].data();
  const float *kx = s.cpml[0].kinv_h.data(), *ky = s.cpml[1].kinv_h.data(),
              *kz = s.cpml[2].kinv_h.data();

#pragma omp parallel for schedule(static)
  for (int i = 0; i <= nx; ++i) {
    for (int j = 0; j <= ny; ++j) {
      const std::size_t row = g.index(i, j, 0);
      if (j < ny) {
        const float cy = c * ky[j];
        for (int k = 0; k < nz; ++k) {
          const std::size_t q = row + k;
          hx[q] -= cy * (ez[q + sy] - ez[q]) - c * kz[k] * (ey[q + 1] - ey[q]);
        }
      }
      if (i < nx) {
        const float cx = c * kx[i];
        for (int k = 0; k < nz; ++k) {
          const std::size_t q = row + k;
          hy[q] -= c * kz[k] * (ex[q + 1] - ex[q]) - cx * (ez[q + sx] - ez[q]);
        }
        if (j < ny) {
          const float cy = c * ky[j];
          for (int k = 0; k <= nz; ++k) {
            const std::size_t q = row + k;
            hz[q] -= cx * (ey[q + sx] - ey[q]) - cy * (ex[q + sy] - ex[q]);
          }
        }
      }
    }
  }
}

void update_e(FieldState &s, const MaterialMap &m) {
  const YeeGrid &g = s.grid;
  const int nx = g.extent[0], ny = g.extent[1], nz = g.extent[2];
  const std::size_t sx = g.stride(0), sy = g.stride(1);
  const float c = static_cast<float>(s.dt / g.resolution);
  const float *__restrict hx = s.H[0].data(), *__restrict hy = s.H[1].data(), *__restrict hz = s.H[2].data();
  float *__restrict ex = s.E[0].data(), *__restrict ey = s.E[1].data(), *__restrict ez = s.E[2].data();
  const float *ix = m.inv_eps[0].data(), *iy = m.inv_eps[1].data(), *iz = m.inv_eps[2].data();
  const float *kx = s.cpml[0].kinv_e.data(), *ky = s.cpml[1].kinv_e.data(),
              *kz = s.cpml[2].kinv_e.data();

#pragma omp parallel for schedule(static)
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const std::size_t row = g.index(i, j, 0);
      if (j > 0) {
        const float cy = c * ky[j];
        for (int k = 1; k < nz; ++k) {
          const std::size_t q = row + k;
          ex[q] += ix[q] * (cy * (hz[q] - hz[q - sy]) - c * kz[k] * (hy[q] - hy[q - 1]));
        }
      }
      if (i > 0) {
        const float cx = c * kx[i];
        for (int k = 1; k < nz; ++k) {
          const std::size_t q = row + k;
          ey[q] += iy[q] * (c * kz[k] * (hx[q] - hx[q - 1]) - cx * (hz[q] - hz[q - sx]));
        }
        if (j > 0) {
          const float cy = c * ky[j];
          for (int k = 0; k < nz; ++k) {
            const std::size_t q = row + k;
            ez[q] += iz[q] * (cx * (hy[q] - hy[q - sx]) - cy * (hx[q] - hx[q - sy]));
          }
        }
      }
    }
  }
}

// Adds the CPML convolution terms of every slab belonging to E (electric =
// true) or H.
void apply_psi(FieldState &s, const MaterialMap &m, bool electric) {
  const YeeGrid &g = s.grid;
  const float c = static_cast<float>(s.dt / g.resolution);
  for (auto &slab : s.psi) {
    if ((slab.component < 3) != electric) continue;
    const int own = slab.component % 3;
    const int a = slab.axis;
    const int other = 3 - own - a;
    const float sign = (a == (own + 1) % 3) ? 1.0f : -1.0f;
    const std::size_t sa = g.stride(a);
    const auto &prof = s.cpml[a];
    const float *bb = electric ? prof.b_e.data() : prof.b_h.data();
    const float *cc = electric ? prof.c_e.data() : prof.c_h.data();
    float *target = electric ? s.E[own].data() : s.H[own].data();
    const float *src = electric ? s.H[other].data() : s.E[other].data();
    const float *inv = electric ? m.inv_eps[own].data() : nullptr;

    std::array<std::pair<int, int>, 3> r;
    for (int ax = 0; ax < 3; ++ax) r[ax] = update_range(g, slab.component, ax);
    r[a] = {slab.first, slab.first + slab.count - 1};
    std::array<int, 3> dims{g.nodes(0), g.nodes(1), g.nodes(2)};
    dims[a] = slab.count;
    float *psi = slab.data.data();

#pragma omp parallel for schedule(static)
    for (int i = r[0].first; i <= r[0].second; ++i) {
      for (int j = r[1].first; j <= r[1].second; ++j) {
        int loc[3] = {i, j, r[2].first};
        loc[a] -= slab.first;
        const std::size_t p0 = (static_cast<std::size_t>(loc[0]) * dims[1] + loc[1]) * dims[2] + loc[2];
        const std::size_t q0 = g.index(i, j, r[2].first);
        const int len = r[2].second - r[2].first + 1;
        float *ps = psi + p0;
        if (a == 2) {
          const float *b = bb + r[2].first, *cf = cc + r[2].first;
          if (electric) {
            for (int k = 0; k < len; ++k) {
              const std::size_t q = q0 + k;
              ps[k] = b[k] * ps[k] + cf[k] * (src[q] - src[q - sa]);
              target[q] += inv[q] * c * sign * ps[k];
            }
          } else {
            for (int k = 0; k < len; ++k) {
              const std::size_t q = q0 + k;
              ps[k] = b[k] * ps[k] + cf[k] * (src[q + sa] - src[q]);
              target[q] -= c * sign * ps[k];
            }
          }
        } else {
          const int x = a == 0 ? i : j;
          const float b = bb[x], cf = cc[x];
          if (electric) {
            for (int k = 0; k < len; ++k) {
              const std::size_t q = q0 + k;
              ps[k] = b * ps[k] + cf * (src[q] - src[q - sa]);
              target[q] += inv[q] * c * sign * ps[k];
            }
          } else {
            for (int k = 0; k < len; ++k) {
              const std::size_t q = q0 + k;
              ps[k] = b * ps[k] + cf * (src[q + sa] - src[q]);
              target[q] -= c * sign * ps[k];
            }
          }
        }
      }
    }
  }
}

} // namespace

std::array<CpmlAxisProfile, 3> make_cpml_profile(const YeeGrid &grid, const CpmlParams &params,
                                                 double dt, double omega_ref) {
  params.validate();
  std::array<CpmlAxisProfile, 3> out;
  const int n = params.thickness;
  const double m = params.order;
  const double sigma_max = params.sigma_max_factor * 0.8 * (m + 1.0) / grid.resolution;
  for (int a = 0; a < 3; ++a) {
    const int N = grid.extent[a];
    auto &p = out[a];
    auto fill = [&](double x, float &kinv, float &b, float &cc) {
      double rho = 0.0;
      if (x < n) rho = (n - x) / n;
      else if (x > N - n) rho = (x - (N - n)) / n;
      rho = std::min(rho, 1.0);
      if (rho <= 0.0) {
        kinv = 1.0f;
        b = 0.0f;
        cc = 0.0f;
        return;
      }
      const double g = std::pow(rho, m);
      const double sigma = sigma_max * g;
      const double kappa = 1.0 + (params.kappa_max - 1.0) * g;
      const double alpha = params.alpha_max * omega_ref * (1.0 - rho);
      const double bv = std::exp(-(sigma / kappa + alpha) * dt);
      const double den = sigma * kappa + kappa * kappa * alpha;
      kinv = static_cast<float>(1.0 / kappa);
      b = static_cast<float>(bv);
      cc = static_cast<float>(den > 0.0 ? sigma / den * (bv - 1.0) : 0.0);
    };
    const int nodes = N + 1;
    p.kinv_e.resize(nodes);
    p.b_e.resize(nodes);
    p.c_e.resize(nodes);
    p.kinv_h.resize(nodes);
    p.b_h.resize(nodes);
    p.c_h.resize(nodes);
    for (int x = 0; x < nodes; ++x) {
      fill(x, p.kinv_e[x], p.b_e[x], p.c_e[x]);
      fill(x + 0.5, p.kinv_h[x], p.b_h[x], p.c_h[x]);
    }
  }
  return out;
}

std::vector<SourceTap> spread_dipole(const MaterialMap &materials, Vec3 position, Vec3 orientation) {
  const YeeGrid &g = materials.grid;
  std::vector<SourceTap> taps;
  for (int c = 0; c < 3; ++c) {
    const double o = orientation[c];
    if (o == 0.0) continue;
    const auto off = component_offset(static_cast<Component>(c));
    int base[3];
    double t[3];
    for (int a = 0; a < 3; ++a) {
      const double f = (position[a] - g.origin[a]) / g.resolution - off[a];
      base[a] = static_cast<int>(std::floor(f));
      t[a] = f - base[a];
      if (base[a] < 1 || base[a] + 1 >= g.extent[a])
        throw Error(ErrorKind::OutOfBounds, "dipole lies outside the updated grid interior");
    }
    std::vector<SourceTap> comp;
    double kept = 0.0, total = 0.0;
    for (int corner = 0; corner < 8; ++corner) {
      int idx[3];
      double w = 1.0;
      for (int a = 0; a < 3; ++a) {
        const int bit = (corner >> (2 - a)) & 1;
        idx[a] = base[a] + bit;
        w *= bit ? t[a] : 1.0 - t[a];
      }
      if (w <= 1e-14) continue;
      total += w;
      const std::size_t q = g.index(idx[0], idx[1], idx[2]);
      if (materials.is_metal(c, q)) continue;
      kept += w;
      comp.push_back({c, q, w});
    }
    if (kept <= 1e-12 * total)
      throw Error(ErrorKind::InvalidGeometry, "dipole is surrounded by metal edges");
    for (auto &tap : comp) {
      tap.weight *= o * total / kept;
      taps.push_back(tap);
    }
  }
  return taps;
}

double FieldState::energy(const MaterialMap &m) const {
  const int ni = grid.nodes(0);
  const std::size_t plane = grid.stride(0);
  std::vector<double> partial(ni, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < ni; ++i) {
    double sum = 0.0;
    const std::size_t start = static_cast<std::size_t>(i) * plane;
    for (int a = 0; a < 3; ++a) {
      const float *e = E[a].data() + start;
      const float *h = H[a].data() + start;
      const float *ie = m.inv_eps[a].data() + start;
      for (std::size_t q = 0; q < plane; ++q) {
        sum += static_cast<double>(e[q]) * e[q] / ie[q];
        sum += static_cast<double>(h[q]) * h[q];
      }
    }
    partial[i] = sum;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  const double cell = grid.resolution * grid.resolution * grid.resolution;
  return 0.5 * total * cell;
}

FieldState make_field_state(const MaterialMap &materials, const CpmlParams &cpml, double dt,
                            double omega_ref) {
  const YeeGrid &g = materials.grid;
  g.validate();
  if (!(dt > 0.0) || dt > courant_dt_nm(g, 1.0) * (1.0 + 1e-12))
    throw Error(ErrorKind::InvalidArgument, "time step violates the Courant bound");
  cpml.validate();
  for (int a = 0; a < 3; ++a)
    if (g.extent[a] <= 2 * cpml.thickness + 2)
      throw Error(ErrorKind::InvalidArgument, "grid too small for the CPML");

  FieldState s;
  s.grid = g;
  s.dt = dt;
  const std::size_t n = g.node_count();
  for (int a = 0; a < 3; ++a) {
    s.E[a].assign(n, 0.0f);
    s.H[a].assign(n, 0.0f);
  }
  int slots = 0;
  for (const auto &edge : materials.dispersive_edges) {
    s.pol_offset.push_back(slots);
    slots += pole_count(materials.models[edge.model]);
  }
  s.pol.assign(slots, 0.0);
  s.pol_prev.assign(slots, 0.0);

  s.cpml = make_cpml_profile(g, cpml, dt, omega_ref);
  const int t = cpml.thickness;
  for (int comp = 0; comp < 6; ++comp) {
    for (int a = 0; a < 3; ++a) {
      if (a == comp % 3) continue;
      const int N = g.extent[a];
      const int lo_first = comp < 3 ? 1 : 0;
      for (int first : {lo_first, N - t}) {
        PsiSlab slab{comp, a, first, t, {}};
        std::size_t size = 1;
        for (int b = 0; b < 3; ++b) size *= b == a ? t : g.nodes(b);
        slab.data.assign(size, 0.0f);
        s.psi.push_back(std::move(slab));
      }
    }
  }
  return s;
}

void step(FieldState &s, const MaterialMap &m, std::span<const InjectedCurrent> currents) {
  check_grid(s, m);
  update_h(s);
  apply_psi(s, m, false);

  // Polarization at n + 1 from E^n; the change feeds the E update below.
  const auto coeffs = model_coefficients(m, s.dt);
  const std::size_t ne = m.dispersive_edges.size();
  std::vector<double> delta(ne, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t e = 0; e < ne; ++e) {
    const auto &edge = m.dispersive_edges[e];
    const double field = s.E[edge.axis][edge.index];
    const auto &pc = coeffs[edge.model];
    double d = 0.0;
    for (std::size_t p = 0; p < pc.size(); ++p) {
      const std::size_t slot = s.pol_offset[e] + p;
      const double now = s.pol[slot];
      const double next = pc[p].c1 * now - pc[p].c2 * s.pol_prev[slot] + pc[p].c3 * field;
      s.pol_prev[slot] = now;
      s.pol[slot] = next;
      d += next - now;
    }
    delta[e] = d;
  }

  update_e(s, m);
  apply_psi(s, m, true);

  for (std::size_t e = 0; e < ne; ++e) {
    const auto &edge = m.dispersive_edges[e];
    s.E[edge.axis][edge.index] -= static_cast<float>(m.inv_eps[edge.axis][edge.index] * delta[e]);
  }

  const double cell = s.grid.resolution * s.grid.resolution * s.grid.resolution;
  for (const auto &cur : currents) {
    for (const auto &tap : cur.taps) {
      float &e = s.E[tap.axis][tap.index];
      if (cur.hard)
        e = static_cast<float>(cur.value * tap.weight);
      else
        e -= static_cast<float>(m.inv_eps[tap.axis][tap.index] * s.dt * cur.value * tap.weight / cell);
    }
  }
  ++s.time_step_index;
}

void step(FieldState &s, const MaterialMap &m, std::span<const DipoleSource> sources) {
  check_grid(s, m);
  std::vector<std::vector<SourceTap>> taps;
  std::vector<InjectedCurrent> currents;
  const double t_half = (s.time_step_index + 0.5) * s.dt;
  for (const auto &src : sources) taps.push_back(spread_dipole(m, src.position, src.orientation));
  for (std::size_t i = 0; i < sources.size(); ++i)
    currents.push_back({taps[i], sources[i].pulse.value(t_half), sources[i].hard});
  step(s, m, std::span<const InjectedCurrent>(currents));
}

bool all_finite(const FieldState &s) {
  for (int a = 0; a < 3; ++a) {
    for (float v : s.E[a])
      if (!std::isfinite(v)) return false;
    for (float v : s.H[a])
      if (!std::isfinite(v)) return false;
  }
  return true;
}

} // namespace plasmofiber

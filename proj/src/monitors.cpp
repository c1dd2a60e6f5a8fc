#include "plasmofiber/monitors.hpp"

#include "plasmofiber/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace plasmofiber {

namespace {

std::size_t grid_index(const YeeGrid &g, int normal, int n, int u, int v) {
  int c[3];
  c[normal] = n;
  c[(normal + 1) % 3] = u;
  c[(normal + 2) % 3] = v;
  return g.index(c[0], c[1], c[2]);
}

double power_from(const cplx &field, const cplx &current) {
  return -0.5 * (field * std::conj(current)).real();
}

} // namespace

std::pair<double, double> DftPlane::a_position(const YeeGrid &g, std::size_t s) const {
  const int nv = v_hi - v_lo + 1;
  const int u = u_lo + static_cast<int>(s / nv);
  const int v = v_lo + static_cast<int>(s % nv);
  const int au = (normal_axis + 1) % 3, av = (normal_axis + 2) % 3;
  return {g.origin[au] + (u + 0.5) * g.resolution, g.origin[av] + v * g.resolution};
}

std::pair<double, double> DftPlane::b_position(const YeeGrid &g, std::size_t s) const {
  const int nv = v_hi - v_lo;
  const int u = u_lo + static_cast<int>(s / nv);
  const int v = v_lo + static_cast<int>(s % nv);
  const int au = (normal_axis + 1) % 3, av = (normal_axis + 2) % 3;
  return {g.origin[au] + u * g.resolution, g.origin[av] + (v + 0.5) * g.resolution};
}

double DftPlane::a_weight(std::size_t s) const {
  const int nv = v_hi - v_lo + 1;
  const int v = v_lo + static_cast<int>(s % nv);
  return (v == v_lo || v == v_hi) ? 0.5 : 1.0;
}

double DftPlane::b_weight(std::size_t s) const {
  const int nv = v_hi - v_lo;
  const int u = u_lo + static_cast<int>(s / nv);
  return (u == u_lo || u == u_hi) ? 0.5 : 1.0;
}

DftPlane make_plane(const YeeGrid &g, std::string name, int normal_axis, int index, int u_lo,
                    int u_hi, int v_lo, int v_hi, const std::vector<double> &wavelengths_nm) {
  const int au = (normal_axis + 1) % 3, av = (normal_axis + 2) % 3;
  if (normal_axis < 0 || normal_axis > 2)
    throw Error(ErrorKind::InvalidArgument, "plane normal axis must be 0, 1 or 2");
  if (index < 1 || index >= g.extent[normal_axis] || u_lo < 0 || v_lo < 0 || u_hi > g.extent[au] ||
      v_hi > g.extent[av] || u_hi <= u_lo || v_hi <= v_lo)
    throw Error(ErrorKind::OutOfBounds, "monitor plane '" + name + "' does not fit the grid");
  DftPlane p;
  p.name = std::move(name);
  p.normal_axis = normal_axis;
  p.index = index;
  p.u_lo = u_lo;
  p.u_hi = u_hi;
  p.v_lo = v_lo;
  p.v_hi = v_hi;
  for (double w : wavelengths_nm) p.omegas.push_back(2.0 * kPi / w);
  const std::size_t nw = wavelengths_nm.size();
  p.e_u.assign(nw * p.a_count(), cplx{});
  p.h_v.assign(nw * p.a_count(), cplx{});
  p.e_v.assign(nw * p.b_count(), cplx{});
  p.h_u.assign(nw * p.b_count(), cplx{});
  return p;
}

void accumulate(DftPlane &p, const FieldState &s, double t_e, double t_h, double weight) {
  const YeeGrid &g = s.grid;
  const int a = p.normal_axis, au = (a + 1) % 3, av = (a + 2) % 3;
  const std::size_t na = p.a_count(), nb = p.b_count();
  const std::size_t back = g.stride(a);

  std::vector<float> eu(na), hv(na), ev(nb), hu(nb);
  std::size_t s_idx = 0;
  for (int u = p.u_lo; u < p.u_hi; ++u)
    for (int v = p.v_lo; v <= p.v_hi; ++v, ++s_idx) {
      const std::size_t q = grid_index(g, a, p.index, u, v);
      eu[s_idx] = s.E[au][q];
      hv[s_idx] = 0.5f * (s.H[av][q] + s.H[av][q - back]);
    }
  s_idx = 0;
  for (int u = p.u_lo; u <= p.u_hi; ++u)
    for (int v = p.v_lo; v < p.v_hi; ++v, ++s_idx) {
      const std::size_t q = grid_index(g, a, p.index, u, v);
      ev[s_idx] = s.E[av][q];
      hu[s_idx] = 0.5f * (s.H[au][q] + s.H[au][q - back]);
    }

  const int nw = static_cast<int>(p.omegas.size());
#pragma omp parallel for schedule(static)
  for (int w = 0; w < nw; ++w) {
    const cplx pe = std::polar(weight, p.omegas[w] * t_e);
    const cplx ph = std::polar(weight, p.omegas[w] * t_h);
    cplx *eu_w = p.e_u.data() + w * na, *hv_w = p.h_v.data() + w * na;
    cplx *ev_w = p.e_v.data() + w * nb, *hu_w = p.h_u.data() + w * nb;
    for (std::size_t i = 0; i < na; ++i) {
      eu_w[i] += pe * static_cast<double>(eu[i]);
      hv_w[i] += ph * static_cast<double>(hv[i]);
    }
    for (std::size_t i = 0; i < nb; ++i) {
      ev_w[i] += pe * static_cast<double>(ev[i]);
      hu_w[i] += ph * static_cast<double>(hu[i]);
    }
  }
}

const DftPlane &MonitorSet::plane(const std::string &name) const {
  for (const auto &p : planes)
    if (p.name == name) return p;
  throw Error(ErrorKind::InvalidArgument, "no plane monitor named '" + name + "'");
}

const DftBox &MonitorSet::box(const std::string &name) const {
  for (const auto &b : boxes)
    if (b.name == name) return b;
  throw Error(ErrorKind::InvalidArgument, "no box monitor named '" + name + "'");
}

const PointRecord &MonitorSet::probe(const std::string &name) const {
  for (const auto &p : probes)
    if (p.name == name) return p;
  throw Error(ErrorKind::InvalidArgument, "no probe named '" + name + "'");
}

Spectrum source_power(const MonitorSet &m) {
  Spectrum s{m.wavelengths_nm, {}};
  for (std::size_t w = 0; w < m.wavelengths_nm.size(); ++w) {
    const double norm = std::norm(m.source_current[w]);
    if (norm <= 0.0) throw Error(ErrorKind::ZeroDenominator, "source spectrum vanishes");
    s.values.push_back(power_from(m.source_field[w], m.source_current[w]) / norm);
  }
  return s;
}

Spectrum flux_spectrum(const MonitorSet &m, const DftPlane &p) {
  Spectrum s{m.wavelengths_nm, {}};
  const std::size_t na = p.a_count(), nb = p.b_count();
  const double area = m.grid.resolution * m.grid.resolution;
  for (std::size_t w = 0; w < m.wavelengths_nm.size(); ++w) {
    double sum = 0.0;
    for (std::size_t i = 0; i < na; ++i)
      sum += p.a_weight(i) * (p.e_u[w * na + i] * std::conj(p.h_v[w * na + i])).real();
    for (std::size_t i = 0; i < nb; ++i)
      sum -= p.b_weight(i) * (p.e_v[w * nb + i] * std::conj(p.h_u[w * nb + i])).real();
    const double norm = std::norm(m.source_current[w]);
    if (norm <= 0.0) throw Error(ErrorKind::ZeroDenominator, "source spectrum vanishes");
    s.values.push_back(p.sign * 0.5 * sum * area / norm);
  }
  return s;
}

Spectrum flux_spectrum(const MonitorSet &m, const DftBox &box) {
  Spectrum total{m.wavelengths_nm, std::vector<double>(m.wavelengths_nm.size(), 0.0)};
  for (const auto &face : box.faces) {
    const Spectrum f = flux_spectrum(m, face);
    for (std::size_t w = 0; w < f.size(); ++w) total.values[w] += f.values[w];
  }
  return total;
}

std::vector<cplx> probe_response(const MonitorSet &m, const std::string &name) {
  const auto &p = m.probe(name);
  std::vector<cplx> out;
  for (std::size_t w = 0; w < p.field.size(); ++w) {
    if (std::norm(m.source_current[w]) <= 0.0)
      throw Error(ErrorKind::ZeroDenominator, "source spectrum vanishes");
    out.push_back(p.field[w] / m.source_current[w]);
  }
  return out;
}

Spectrum vacuum_dipole_power(const std::vector<double> &wavelengths_nm) {
  Spectrum s{wavelengths_nm, {}};
  for (double lam : wavelengths_nm) {
    const double k = 2.0 * kPi / lam;
    s.values.push_back(k * k / (12.0 * kPi));
  }
  return s;
}

Spectrum ratio(const Spectrum &a, const Spectrum &b) {
  if (a.wavelengths_nm.size() != b.wavelengths_nm.size())
    throw Error(ErrorKind::GridMismatch, "spectra have different lengths");
  Spectrum r{a.wavelengths_nm, {}};
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a.wavelengths_nm[i] - b.wavelengths_nm[i]) > 1e-9)
      throw Error(ErrorKind::GridMismatch, "spectra use different wavelengths");
    if (b.values[i] == 0.0) throw Error(ErrorKind::ZeroDenominator, "reference spectrum is zero");
    r.values.push_back(a.values[i] / b.values[i]);
  }
  return r;
}

double band_energy(const MonitorSet &m) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t w = 0; w < m.wavelengths_nm.size(); ++w)
    pts.emplace_back(2.0 * kPi / m.wavelengths_nm[w], power_from(m.source_field[w], m.source_current[w]));
  std::sort(pts.begin(), pts.end());
  double sum = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    sum += 0.5 * (pts[i].second + pts[i - 1].second) * (pts[i].first - pts[i - 1].first);
  return 2.0 / kPi * sum;
}

void write_spectrum_csv(const std::filesystem::path &path, const Spectrum &s) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << "wavelength_nm,value\n" << std::setprecision(12);
  for (std::size_t i = 0; i < s.size(); ++i) out << s.wavelengths_nm[i] << ',' << s.values[i] << '\n';
}

Spectrum read_spectrum_csv(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read " + path.string());
  std::string line;
  std::uint64_t offset = 0;
  if (!std::getline(in, line) || line.rfind("wavelength_nm,value", 0) != 0)
    throw ParseError(0, "missing spectrum CSV header");
  offset += line.size() + 1;
  Spectrum s;
  while (std::getline(in, line)) {
    const std::uint64_t raw = line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) {
      std::istringstream row(line);
      double w, v;
      char comma;
      if (!(row >> w >> comma >> v) || comma != ',') throw ParseError(offset, "malformed spectrum row");
      s.wavelengths_nm.push_back(w);
      s.values.push_back(v);
    }
    offset += raw;
  }
  return s;
}

} // namespace plasmofiber

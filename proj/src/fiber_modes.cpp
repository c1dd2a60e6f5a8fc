#include "plasmofiber/fiber_modes.hpp"

#include "plasmofiber/errors.hpp"
#include "plasmofiber/materials.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace plasmofiber {

namespace {

using cd = std::complex<double>;

double j0(double x) { return std::cyl_bessel_j(0.0, x); }
double j1(double x) { return std::cyl_bessel_j(1.0, x); }
double k0(double x) { return std::cyl_bessel_k(0.0, x); }
double k1(double x) { return std::cyl_bessel_k(1.0, x); }
double j1_prime(double x) { return x == 0.0 ? 0.5 : j0(x) - j1(x) / x; }
double k1_prime(double x) { return -k0(x) - k1(x) / x; }

// J1(x)/x, finite at the origin.
double j1_over_x(double x) {
  if (std::abs(x) < 1e-4) return 0.5 - x * x / 16.0;
  return j1(x) / x;
}

struct Params {
  double k, beta, h, q, n1, n2, a;
};

Params params_of(const GuidedMode &m) {
  Params p;
  p.k = 2.0 * kPi / m.wavelength_nm;
  p.beta = m.n_eff * p.k;
  p.a = m.radius_nm;
  p.h = m.u / p.a;
  p.q = m.w / p.a;
  p.n1 = m.core_index;
  p.n2 = m.cladding_index;
  return p;
}

// Ratio Hz / Ez for the nu = +1 circular mode divided by i.
double hz_ratio(const GuidedMode &m) {
  const double u = m.u, w = m.w;
  const double k = 2.0 * kPi / m.wavelength_nm;
  const double beta = m.n_eff * k;
  const double s = (1.0 / (u * u) + 1.0 / (w * w)) /
                   (j1_prime(u) / (u * j1(u)) + k1_prime(w) / (w * k1(w)));
  return beta / k * s;
}

double circular_power(const GuidedMode &m) {
  // 1/2 int 2 pi r Re(E_r H_phi* - E_phi H_r*) dr by composite Simpson.
  auto integrand = [&](double r) {
    const auto f = m.radial(r, 1);
    return kPi * r * (f[0] * std::conj(f[4]) - f[1] * std::conj(f[3])).real();
  };
  auto simpson = [&](double lo, double hi, int n) {
    const double h = (hi - lo) / n;
    double s = integrand(lo) + integrand(hi);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * integrand(lo + i * h);
    return s * h / 3.0;
  };
  const double a = m.radius_nm;
  const double q = m.w / a;
  return simpson(0.0, a, 4000) + simpson(a, a + 40.0 / q, 8000);
}

} // namespace

double FiberSpec::core_index_at(double wavelength_nm) const {
  return core_index ? *core_index : silica_index(wavelength_nm);
}

void FiberSpec::validate() const {
  if (!(diameter_nm > 0.0)) throw Error(ErrorKind::InvalidArgument, "fiber diameter must be positive");
  if (core_index && !(*core_index > cladding_index))
    throw Error(ErrorKind::InvalidArgument, "core index must exceed the cladding index");
  if (!(cladding_index >= 1.0)) throw Error(ErrorKind::InvalidArgument, "cladding index must be at least 1");
}

double v_number(const FiberSpec &fiber, double wavelength_nm) {
  const double n1 = fiber.core_index_at(wavelength_nm);
  const double n2 = fiber.cladding_index;
  return 2.0 * kPi / wavelength_nm * fiber.radius() * std::sqrt(n1 * n1 - n2 * n2);
}

double he11_characteristic(double n1, double n2, double a, double wavelength_nm, double n_eff) {
  const double k = 2.0 * kPi / wavelength_nm;
  const double beta = n_eff * k;
  const double u = a * std::sqrt(k * k * n1 * n1 - beta * beta);
  const double w = a * std::sqrt(beta * beta - k * k * n2 * n2);
  const double kp = k1_prime(w) / (w * k1(w));
  const double d = (n1 * n1 - n2 * n2) / (2.0 * n1 * n1);
  const double t = beta / (n1 * k) * (1.0 / (w * w) + 1.0 / (u * u));
  const double r = std::sqrt(d * d * kp * kp + t * t);
  return j0(u) / (u * j1(u)) + (n1 * n1 + n2 * n2) / (2.0 * n1 * n1) * kp - 1.0 / (u * u) + r;
}

GuidedMode solve_he11(const FiberSpec &fiber, double wavelength_nm) {
  fiber.validate();
  if (!(wavelength_nm > 0.0) || !std::isfinite(wavelength_nm))
    throw Error(ErrorKind::NoRoot, "wavelength must be positive and finite");
  const double n1 = fiber.core_index_at(wavelength_nm);
  const double n2 = fiber.cladding_index;
  if (!(n1 > n2)) throw Error(ErrorKind::NoRoot, "core index does not exceed the cladding index");
  const double a = fiber.radius();
  const double k = 2.0 * kPi / wavelength_nm;
  const double v = k * a * std::sqrt(n1 * n1 - n2 * n2);

  auto neff_of = [&](double u) { return std::sqrt(n1 * n1 - (u / (k * a)) * (u / (k * a))); };
  auto f = [&](double u) { return he11_characteristic(n1, n2, a, wavelength_nm, neff_of(u)); };

  const double u_max = std::min(kSingleModeCutoff, v) * (1.0 - 1e-12);
  const int samples = 2000;
  double lo = 0.0, hi = 0.0;
  bool found = false;
  double prev_u = u_max * 1e-6, prev_f = f(prev_u);
  for (int i = 1; i <= samples && !found; ++i) {
    const double x = u_max * (1e-6 + (1.0 - 1e-6) * i / samples);
    const double fx = f(x);
    if (std::isfinite(prev_f) && std::isfinite(fx) && (prev_f < 0.0) != (fx < 0.0)) {
      lo = prev_u;
      hi = x;
      found = true;
    }
    prev_u = x;
    prev_f = fx;
  }
  if (!found) throw Error(ErrorKind::NoRoot, "no HE11 root bracketed");

  double f_lo = f(lo);
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if ((fm < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
    }
  }
  const double u = std::abs(f(lo)) < std::abs(f(hi)) ? lo : hi;

  GuidedMode m;
  m.wavelength_nm = wavelength_nm;
  m.core_index = n1;
  m.cladding_index = n2;
  m.radius_nm = a;
  m.n_eff = neff_of(u);
  m.u = u;
  m.w = std::sqrt(v * v - u * u);
  m.residual = f(u);
  m.multimode = v > kSingleModeCutoff;
  m.hz_factor = hz_ratio(m);
  m.outer_scale = j1(m.u) / k1(m.w);
  m.amplitude = 1.0;
  m.amplitude = 1.0 / std::sqrt(circular_power(m));
  return m;
}

std::array<std::complex<double>, 6> GuidedMode::radial(double r, int nu) const {
  const Params p = params_of(*this);
  const cd i(0.0, 1.0);
  const cd A = amplitude;
  const cd B = i * static_cast<double>(nu) * hz_factor * amplitude;
  double z, dz, z_over_r, kappa2, eps;
  if (r < p.a) {
    z = j1(p.h * r);
    dz = p.h * j1_prime(p.h * r);
    z_over_r = p.h * j1_over_x(p.h * r);
    kappa2 = p.h * p.h;
    eps = p.n1 * p.n1;
  } else {
    const double c = outer_scale;
    z = c * k1(p.q * r);
    dz = c * p.q * k1_prime(p.q * r);
    z_over_r = z / r;
    kappa2 = -p.q * p.q;
    eps = p.n2 * p.n2;
  }
  const cd pre = i / kappa2;
  const cd inu(0.0, nu);
  const cd ez = A * z, hz = B * z;
  const cd er = pre * (p.beta * A * dz + p.k * inu * B * z_over_r);
  const cd ephi = pre * (p.beta * inu * A * z_over_r - p.k * B * dz);
  const cd hr = pre * (p.beta * B * dz - p.k * eps * inu * A * z_over_r);
  const cd hphi = pre * (p.beta * inu * B * z_over_r + p.k * eps * A * dz);
  return {er, ephi, ez, hr, hphi, hz};
}

namespace {

// Both quasi-linear polarizations at one point from a single radial evaluation.
// The nu = -1 components follow from nu = +1 by flipping e_phi, h_r and h_z.
std::array<ModeField, 2> linear_fields(const GuidedMode &m, double x, double y, int direction) {
  const double r = std::hypot(x, y);
  const double phi = std::atan2(y, x);
  const double c = std::cos(phi), s = std::sin(phi);
  const auto plus = m.radial(r, 1);
  const std::array<double, 6> flip{1.0, -1.0, 1.0, -1.0, 1.0, -1.0};
  const cd ep = std::polar(1.0, phi), em = std::conj(ep);
  const cd i(0.0, 1.0);
  std::array<ModeField, 2> out;
  for (int pol = 0; pol < 2; ++pol) {
    std::array<cd, 6> comb;
    for (int n = 0; n < 6; ++n) {
      const cd a = plus[n] * ep, b = flip[n] * plus[n] * em;
      comb[n] = pol == 0 ? (a + b) / std::sqrt(2.0) : (a - b) / (i * std::sqrt(2.0));
    }
    ModeField &f = out[pol];
    f.e = {comb[0] * c - comb[1] * s, comb[0] * s + comb[1] * c, comb[2]};
    f.h = {comb[3] * c - comb[4] * s, comb[3] * s + comb[4] * c, comb[5]};
    if (direction < 0) {
      f.e[2] = -f.e[2];
      f.h[0] = -f.h[0];
      f.h[1] = -f.h[1];
    }
  }
  return out;
}

} // namespace

ModeField GuidedMode::field(double x, double y, ModePolarization pol, int direction) const {
  return linear_fields(*this, x, y, direction)[pol == ModePolarization::X ? 0 : 1];
}

namespace {

struct Projection {
  cd field_x_mode;   // sum (E x h*) . z dA
  cd mode_x_field;   // sum (e* x H) . z dA
  double mode_power; // 1/2 Re sum (e x h*) . z dA
};

// Projections onto the X and Y polarizations at wavelength slot w. With
// with_fields = false only the sampled mode power is computed.
std::array<Projection, 2> project(const YeeGrid &g, const DftPlane &p, std::size_t w,
                                  const GuidedMode &mode, int direction, bool with_fields) {
  const std::size_t na = p.a_count(), nb = p.b_count();
  const double area = g.resolution * g.resolution;
  std::array<Projection, 2> out{};
  std::array<cd, 2> self{};
  for (std::size_t s = 0; s < na; ++s) {
    const auto [x, y] = p.a_position(g, s);
    const auto f = linear_fields(mode, x, y, direction);
    const double wt = p.a_weight(s) * area;
    for (int pol = 0; pol < 2; ++pol) {
      if (with_fields) {
        out[pol].field_x_mode += wt * p.e_u[w * na + s] * std::conj(f[pol].h[1]);
        out[pol].mode_x_field += wt * std::conj(f[pol].e[0]) * p.h_v[w * na + s];
      }
      self[pol] += wt * f[pol].e[0] * std::conj(f[pol].h[1]);
    }
  }
  for (std::size_t s = 0; s < nb; ++s) {
    const auto [x, y] = p.b_position(g, s);
    const auto f = linear_fields(mode, x, y, direction);
    const double wt = p.b_weight(s) * area;
    for (int pol = 0; pol < 2; ++pol) {
      if (with_fields) {
        out[pol].field_x_mode -= wt * p.e_v[w * nb + s] * std::conj(f[pol].h[0]);
        out[pol].mode_x_field -= wt * std::conj(f[pol].e[1]) * p.h_u[w * nb + s];
      }
      self[pol] -= wt * f[pol].e[1] * std::conj(f[pol].h[0]);
    }
  }
  for (int pol = 0; pol < 2; ++pol) out[pol].mode_power = 0.5 * self[pol].real();
  return out;
}

} // namespace

double sampled_mode_power(const YeeGrid &grid, const DftPlane &plane, const GuidedMode &mode,
                          ModePolarization pol, int direction) {
  return project(grid, plane, 0, mode, direction, false)[pol == ModePolarization::X ? 0 : 1].mode_power;
}

ModeAmplitudes mode_amplitudes(const MonitorSet &m, const DftPlane &plane, const FiberSpec &fiber, int direction) {
  if (plane.normal_axis != 2)
    throw Error(ErrorKind::InvalidArgument, "mode projection needs a plane normal to the fiber axis");
  if (direction != 1 && direction != -1)
    throw Error(ErrorKind::InvalidArgument, "direction must be +1 or -1");
  ModeAmplitudes out;
  out.wavelengths_nm = m.wavelengths_nm;
  for (std::size_t w = 0; w < m.wavelengths_nm.size(); ++w) {
    const GuidedMode mode = solve_he11(fiber, m.wavelengths_nm[w]);
    const cd current = m.source_current[w];
    if (std::norm(current) <= 0.0) throw Error(ErrorKind::ZeroDenominator, "source spectrum vanishes");
    // Projection onto forward-mode fields; the backward amplitude uses the
    // difference of the two cross products.
    const auto pr = project(m.grid, plane, w, mode, 1, true);
    for (int pol = 0; pol < 2; ++pol) {
      const cd amp = (pr[pol].field_x_mode + static_cast<double>(direction) * pr[pol].mode_x_field) /
                     (4.0 * pr[pol].mode_power);
      out.amplitude[pol].push_back(amp / current);
      out.mode_power[pol].push_back(pr[pol].mode_power);
    }
  }
  return out;
}

double ModeAmplitudes::guided_power(std::size_t w) const {
  return std::norm(amplitude[0][w]) * mode_power[0][w] + std::norm(amplitude[1][w]) * mode_power[1][w];
}

CouplingSpectrum overlap_coupling(const MonitorSet &m, const DftPlane &plane, const FiberSpec &fiber,
                                  int direction, const Spectrum &reference, double distance) {
  if (reference.size() != m.wavelengths_nm.size())
    throw Error(ErrorKind::GridMismatch, "reference spectrum and monitors use different wavelength grids");
  const ModeAmplitudes amps = mode_amplitudes(m, plane, fiber, direction);
  CouplingSpectrum out;
  out.plane_too_close = distance < kMinPlaneDistance;
  out.fraction.wavelengths_nm = m.wavelengths_nm;
  out.guided_power.wavelengths_nm = m.wavelengths_nm;
  for (std::size_t w = 0; w < m.wavelengths_nm.size(); ++w) {
    const double guided = amps.guided_power(w);
    if (reference.values[w] == 0.0) throw Error(ErrorKind::ZeroDenominator, "reference power is zero");
    out.guided_power.values.push_back(guided);
    out.fraction.values.push_back(guided / reference.values[w]);
  }
  return out;
}

void write_mode_csv(const std::filesystem::path &path, const GuidedMode &mode, double r_max, double step) {
  if (!(step > 0.0) || !(r_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "bad radial sampling");
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << "r_nm,e_r,e_phi,e_z,h_r,h_phi,h_z\n" << std::setprecision(10);
  for (double r = 0.0; r <= r_max + 1e-9; r += step) {
    const auto f = mode.radial(r, 1);
    out << r;
    for (const auto &c : f) out << ',' << std::abs(c);
    out << '\n';
  }
}

} // namespace plasmofiber

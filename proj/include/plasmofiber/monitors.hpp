#pragma once

#include "plasmofiber/fdtd.hpp"
#include "plasmofiber/yee_grid.hpp"

#include <complex>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace plasmofiber {

using cplx = std::complex<double>;

struct Spectrum {
  std::vector<double> wavelengths_nm;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

// Running DFT of the tangential fields on a grid plane normal to `normal_axis`
// at node index `index`. With u = (normal + 1) % 3 and v = (normal + 2) % 3,
// "A" samples sit at (u + 1/2, v) and hold E_u and H_v, "B" samples sit at
// (u, v + 1/2) and hold E_v and H_u. H is averaged across the plane so both
// factors of each Poynting product share a point. Arrays are [wavelength][sample].
struct DftPlane {
  std::string name;
  int normal_axis = 2;
  int index = 0;
  int u_lo = 0, u_hi = 0, v_lo = 0, v_hi = 0; // node ranges
  int sign = 1;                                // -1 for inward-facing box faces
  std::vector<double> omegas;                  // rad per nm of c*t
  std::vector<cplx> e_u, h_v, e_v, h_u;

  std::size_t a_count() const { return static_cast<std::size_t>(u_hi - u_lo) * (v_hi - v_lo + 1); }
  std::size_t b_count() const { return static_cast<std::size_t>(u_hi - u_lo + 1) * (v_hi - v_lo); }
  // Physical (u, v) coordinates of sample s of each family.
  std::pair<double, double> a_position(const YeeGrid &g, std::size_t s) const;
  std::pair<double, double> b_position(const YeeGrid &g, std::size_t s) const;
  double a_weight(std::size_t s) const; // trapezoid weight along v
  double b_weight(std::size_t s) const; // trapezoid weight along u
};

DftPlane make_plane(const YeeGrid &grid, std::string name, int normal_axis, int index, int u_lo,
                    int u_hi, int v_lo, int v_hi, const std::vector<double> &wavelengths_nm);

// Adds exp(i w t) weighted samples (E at t_e, H at t_h) scaled by `weight`.
void accumulate(DftPlane &plane, const FieldState &state, double t_e, double t_h, double weight);

struct DftBox {
  std::string name;
  std::vector<DftPlane> faces; // six faces with outward signs
};

// Projection of the time-averaged E field onto a set of taps.
struct PointRecord {
  std::string name;
  std::vector<SourceTap> taps;
  std::vector<cplx> field;
};

struct EnergySample {
  long step;
  double energy;
};

struct MonitorSet {
  YeeGrid grid;
  double dt = 0.0;
  long steps = 0;
  bool converged = false;
  int dft_stride = 1;
  std::vector<double> wavelengths_nm;

  std::vector<cplx> source_current; // DFT of the current moment
  std::vector<cplx> source_field;   // DFT of the tap-weighted E seen by the source
  std::vector<DftPlane> planes;
  std::vector<DftBox> boxes;
  std::vector<PointRecord> probes;

  double injected_energy = 0.0;
  double peak_energy = 0.0;
  double final_energy = 0.0;
  std::vector<EnergySample> energy_trace;

  const DftPlane &plane(const std::string &name) const;
  const DftBox &box(const std::string &name) const;
  const PointRecord &probe(const std::string &name) const;
};

// Power delivered by the dipole, -1/2 Re(E . I*), per |I|^2.
Spectrum source_power(const MonitorSet &m);

// Outward Poynting flux through a plane or closed box per |I|^2.
Spectrum flux_spectrum(const MonitorSet &m, const DftPlane &plane);
Spectrum flux_spectrum(const MonitorSet &m, const DftBox &box);

// Probe field per unit source current moment.
std::vector<cplx> probe_response(const MonitorSet &m, const std::string &name);

// Closed-form power of a unit current moment in vacuum, k^2 / (12 pi).
Spectrum vacuum_dipole_power(const std::vector<double> &wavelengths_nm);

// Element-wise a / b; throws GridMismatch for misaligned wavelength grids.
Spectrum ratio(const Spectrum &a, const Spectrum &b);

// Upper bound of the band-integrated delivered energy, (2/pi) int P dw, in the
// same units as MonitorSet::injected_energy.
double band_energy(const MonitorSet &m);

void write_spectrum_csv(const std::filesystem::path &path, const Spectrum &s);
Spectrum read_spectrum_csv(const std::filesystem::path &path);

} // namespace plasmofiber

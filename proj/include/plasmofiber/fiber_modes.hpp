#pragma once

#include "plasmofiber/monitors.hpp"

#include <array>
#include <complex>
#include <filesystem>
#include <optional>
#include <vector>

namespace plasmofiber {

// Step-index fiber along z centered on x = y = 0.
struct FiberSpec {
  double diameter_nm = 530.0;
  std::optional<double> core_index; // empty: Sellmeier silica at each wavelength
  double cladding_index = 1.0;

  double radius() const { return 0.5 * diameter_nm; }
  double core_index_at(double wavelength_nm) const;
  void validate() const;
};

double v_number(const FiberSpec &fiber, double wavelength_nm);
inline constexpr double kSingleModeCutoff = 2.404825557695773;

// Left-hand side of the HE11 eigenvalue equation in the form
// J0(u)/(u J1(u)) + (n1^2 + n2^2)/(2 n1^2) K1'(w)/(w K1(w)) - 1/u^2 + R,
// which vanishes on the HE (upper sign) branch of the nu = 1 hybrid modes.
double he11_characteristic(double n1, double n2, double radius_nm, double wavelength_nm, double n_eff);

struct ModeField {
  std::array<std::complex<double>, 3> e; // Cartesian x, y, z
  std::array<std::complex<double>, 3> h;
};

enum class ModePolarization { X, Y };

struct GuidedMode {
  double wavelength_nm = 0.0;
  double n_eff = 0.0;
  double core_index = 0.0;
  double cladding_index = 1.0;
  double radius_nm = 0.0;
  double u = 0.0, w = 0.0; // transverse parameters h a and q a
  double residual = 0.0;   // characteristic function at n_eff
  bool multimode = false;  // V above the single-mode cutoff
  double amplitude = 1.0;  // E_z scale giving unit guided power
  double hz_factor = 0.0;  // H_z / (i nu E_z)
  double outer_scale = 0.0; // J1(u) / K1(w)

  // Circularly polarized (nu = +/-1) radial components at radius r for unit
  // power: {e_r, e_phi, e_z, h_r, h_phi, h_z}, common factor exp(i nu phi).
  std::array<std::complex<double>, 6> radial(double r_nm, int nu) const;

  // Quasi-linearly polarized mode at a point, propagating along +z
  // (direction = +1) or -z (direction = -1), carrying unit power.
  ModeField field(double x_nm, double y_nm, ModePolarization pol, int direction = 1) const;
};

// Fundamental mode by bracketed root search of he11_characteristic on
// u in (0, min(2.405, V)). Throws NoRoot for unusable inputs.
GuidedMode solve_he11(const FiberSpec &fiber, double wavelength_nm);

// Power carried by a mode field sampled on a monitor plane's points.
double sampled_mode_power(const YeeGrid &grid, const DftPlane &plane, const GuidedMode &mode,
                          ModePolarization pol, int direction);

// Complex HE11 amplitudes per unit source current, indexed [pol][wavelength]
// with pol 0 = X and 1 = Y, plus the discrete power of each sampled mode.
struct ModeAmplitudes {
  std::vector<double> wavelengths_nm;
  std::array<std::vector<std::complex<double>>, 2> amplitude;
  std::array<std::vector<double>, 2> mode_power;

  // Guided power per |I|^2 at wavelength slot w, both polarizations.
  double guided_power(std::size_t w) const;
};

ModeAmplitudes mode_amplitudes(const MonitorSet &monitors, const DftPlane &plane, const FiberSpec &fiber,
                               int direction);

struct CouplingSpectrum {
  Spectrum fraction;            // guided power / reference power
  Spectrum guided_power;        // per |I|^2, both polarizations
  bool plane_too_close = false; // plane nearer than the recommended distance
};

inline constexpr double kMinPlaneDistance = 1000.0;

// Projects a z-normal plane monitor onto the HE11 pair travelling in
// `direction` (+1 or -1). The fraction divides by `reference_power`, usually
// the total power delivered by the source.
CouplingSpectrum overlap_coupling(const MonitorSet &monitors, const DftPlane &plane, const FiberSpec &fiber,
                                  int direction, const Spectrum &reference_power,
                                  double distance_to_scatterer_nm);

// Radial profile CSV: r_nm and magnitudes of the six circular-mode components.
void write_mode_csv(const std::filesystem::path &path, const GuidedMode &mode, double r_max_nm,
                    double step_nm);

} // namespace plasmofiber

#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace plasmofiber {

struct LorentzPole {
  double strength = 0.0;  // dimensionless permittivity increment
  double frequency = 0.0; // resonance, rad/fs
  double damping = 0.0;   // rad/fs
};

// eps(w) = eps_inf - wp^2 / (w^2 + i g w) + sum_l s_l w_l^2 / (w_l^2 - w^2 - i g_l w)
// with the exp(-i w t) convention, so passive media have Im(eps) > 0.
struct DrudeLorentzModel {
  double eps_inf = 1.0;
  double plasma_frequency = 0.0; // rad/fs
  double collision_rate = 0.0;   // rad/fs
  std::vector<LorentzPole> lorentz_poles;

  std::complex<double> permittivity(double omega_rad_per_fs) const;
  std::complex<double> permittivity_at_wavelength(double wavelength_nm) const;
};

// Gold: Drude term plus two Lorentz poles, least-squares fitted to the
// Johnson & Christy (1972) table between 0.55 and 1.09 um.
DrudeLorentzModel gold_drude_lorentz();

struct OpticalConstant {
  double energy_ev;
  double n;
  double k;

  double wavelength_nm() const;
  std::complex<double> permittivity() const { return std::complex<double>(n, k) * std::complex<double>(n, k); }
};

// Johnson & Christy gold, photon energies 1.14 - 2.26 eV.
std::span<const OpticalConstant> johnson_christy_gold();

// Largest |eps_model - eps_table| over tabulated points inside [lo, hi] nm.
double max_fit_residual(const DrudeLorentzModel &model, double lo_nm, double hi_nm);

// Malitson fused-silica Sellmeier index.
double silica_index(double wavelength_nm);

// Nondispersive silica index used inside the FDTD volume (Sellmeier at 775 nm).
inline constexpr double kSilicaIndexFdtd = 1.4537;

// One entry in a scene's material table.
struct Material {
  std::string name;
  double permittivity = 1.0;                    // used when dispersion is empty
  std::optional<DrudeLorentzModel> dispersion;  // metal

  bool is_dispersive() const { return dispersion.has_value(); }

  static Material vacuum() { return {"vacuum", 1.0, std::nullopt}; }
  static Material silica() { return {"silica", kSilicaIndexFdtd * kSilicaIndexFdtd, std::nullopt}; }
  static Material gold() { return {"gold", 1.0, gold_drude_lorentz()}; }
};

} // namespace plasmofiber

#pragma once

#include "plasmofiber/monitors.hpp"

#include <array>
#include <optional>
#include <vector>

namespace plasmofiber {

// Gaussian emitter spectrum sampled on a wavelength grid.
struct QdSpectrum {
  double center_nm = 760.0;
  double fwhm_nm = 50.0;

  void validate() const;
  // Normalized weights (sum 1) on the given grid.
  std::vector<double> weights(const std::vector<double> &wavelengths_nm) const;
};

// Per-orientation spectra indexed x, y, z.
struct CouplingTriple {
  std::vector<double> wavelengths_nm;
  std::array<std::vector<double>, 3> t;

  void validate() const;
};

struct PurcellSpectrum {
  std::vector<double> wavelengths_nm;
  std::array<std::vector<double>, 3> f;
};

struct MaxPurcell {
  double value;
  double wavelength_nm;
};

// Total emitted power of the coupled run over that of the vacuum run.
Spectrum purcell_spectrum(const MonitorSet &coupled, const MonitorSet &vacuum);
Spectrum purcell_spectrum(const Spectrum &coupled_power, const Spectrum &vacuum_power);

MaxPurcell max_purcell(const Spectrum &f);

// QD-averaged (F_y T_y + F_z T_z - F_x T_x) / (F_y T_y + F_z T_z + F_x T_x);
// passing no Purcell spectrum gives the unweighted form. Throws ZeroDenominator.
double dop_from_triple(const CouplingTriple &t, const QdSpectrum &qd,
                       const std::optional<PurcellSpectrum> &f = std::nullopt);

// Ratio of QD-averaged, orientation-averaged guided emission F_i T_i with and
// without the rod.
double intensity_enhancement(const CouplingTriple &coupled, const PurcellSpectrum &f_coupled,
                             const CouplingTriple &bare, const PurcellSpectrum &f_bare,
                             const QdSpectrum &qd);

// Ratio of detected count rates (enhanced over reference).
double enhancement_from_counts(double rate_enhanced_hz, double rate_reference_hz);

// QD-weighted average of a spectrum.
double weighted_average(const std::vector<double> &values, const std::vector<double> &weights);

struct ObservablesResult {
  double d_nm = 0.0;
  std::optional<double> rod_length_nm;
  double f_pz = 0.0;
  double lambda_at_max_nm = 0.0;
  double dop = 0.0;
  double dop_unweighted = 0.0;
  double enhancement = 0.0;
  double enhancement_unweighted = 0.0;
  double radiative_efficiency_z = 0.0; // radiated / emitted for z at the F_z peak (when available)
  double resolution_nm = 0.0;
};

} // namespace plasmofiber

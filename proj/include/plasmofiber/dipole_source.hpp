#pragma once

#include "plasmofiber/yee_grid.hpp"

#include <complex>

namespace plasmofiber {

// Sine carrier under a Gaussian envelope. Times are in the internal nm (c = 1)
// unit. The sine carrier makes the pulse odd about its peak, so the injected
// current has zero mean and leaves no static charge behind.
struct GaussianPulse {
  double center_wavelength_nm = 740.0;
  double relative_width = 0.2; // sigma_f / f_center
  double amplitude = 1.0;      // current moment scale (current x length)

  double center_frequency() const { return 1.0 / center_wavelength_nm; }
  double frequency_sigma() const { return relative_width * center_frequency(); }
  double time_sigma() const;
  double delay() const { return 5.0 * time_sigma(); }
  // Time after which the envelope is below exp(-12.5) of its peak.
  double end_time() const { return 2.0 * delay(); }

  double value(double t) const;

  // Continuous-time spectrum magnitude relative to its peak at wavelength_nm.
  double relative_spectral_amplitude(double wavelength_nm) const;
  // True when the spectrum stays above min_fraction of its peak over [lo, hi].
  bool covers(double lo_nm, double hi_nm, double min_fraction) const;

  friend bool operator==(const GaussianPulse &, const GaussianPulse &) = default;
};

struct DipoleSource {
  Vec3 position;                 // nm; trilinearly spread onto the nearest edges
  Vec3 orientation{0.0, 0.0, 1.0};
  GaussianPulse pulse;
  bool hard = false;             // hard sources overwrite E instead of adding current

  // Throws InvalidArgument when |orientation| != 1 or the pulse misses 600-900 nm.
  void validate() const;

  friend bool operator==(const DipoleSource &, const DipoleSource &) = default;
};

} // namespace plasmofiber

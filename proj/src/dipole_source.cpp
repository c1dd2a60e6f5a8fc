#include "plasmofiber/dipole_source.hpp"

#include "plasmofiber/errors.hpp"

#include <cmath>

namespace plasmofiber {

double GaussianPulse::time_sigma() const { return 1.0 / (2.0 * kPi * frequency_sigma()); }

double GaussianPulse::value(double t) const {
  const double s = time_sigma();
  const double tau = t - delay();
  return amplitude * std::exp(-0.5 * tau * tau / (s * s)) *
         std::sin(2.0 * kPi * center_frequency() * tau);
}

double GaussianPulse::relative_spectral_amplitude(double wavelength_nm) const {
  const double f = 1.0 / wavelength_nm;
  const double fc = center_frequency();
  const double sf = frequency_sigma();
  auto g = [&](double x) { return std::exp(-0.5 * x * x / (sf * sf)); };
  // The sine carrier gives two Gaussian lobes at +/- fc with opposite sign.
  return std::abs(g(f - fc) - g(f + fc)) / std::abs(1.0 - g(2.0 * fc));
}

bool GaussianPulse::covers(double lo_nm, double hi_nm, double min_fraction) const {
  const int n = 301;
  for (int i = 0; i < n; ++i) {
    const double lam = lo_nm + (hi_nm - lo_nm) * i / (n - 1);
    if (relative_spectral_amplitude(lam) < min_fraction) return false;
  }
  return true;
}

void DipoleSource::validate() const {
  if (std::abs(orientation.norm() - 1.0) > 1e-9)
    throw Error(ErrorKind::InvalidArgument, "dipole orientation must be a unit vector");
  if (!pulse.covers(600.0, 900.0, 0.01))
    throw Error(ErrorKind::InvalidArgument, "pulse spectrum falls below 1% of peak inside 600-900 nm");
}

} // namespace plasmofiber

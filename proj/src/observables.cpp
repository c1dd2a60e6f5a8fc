#include "plasmofiber/observables.hpp"

#include "plasmofiber/errors.hpp"

#include <cmath>

namespace plasmofiber {

namespace {

void check_aligned(const std::vector<double> &a, const std::vector<double> &b) {
  if (a.size() != b.size()) throw Error(ErrorKind::GridMismatch, "wavelength grids differ in length");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > 1e-9) throw Error(ErrorKind::GridMismatch, "wavelength grids differ");
}

double guided_average(const CouplingTriple &t, const PurcellSpectrum *f, const std::vector<double> &w) {
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double mean = 0.0;
    for (int o = 0; o < 3; ++o) mean += (f ? f->f[o][i] : 1.0) * t.t[o][i];
    sum += w[i] * mean / 3.0;
  }
  return sum;
}

} // namespace

void QdSpectrum::validate() const {
  if (!(fwhm_nm > 0.0)) throw Error(ErrorKind::InvalidArgument, "QD FWHM must be positive");
  if (!(center_nm > 0.0)) throw Error(ErrorKind::InvalidArgument, "QD center must be positive");
}

std::vector<double> QdSpectrum::weights(const std::vector<double> &wavelengths_nm) const {
  validate();
  const double sigma = fwhm_nm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  std::vector<double> w;
  double total = 0.0;
  for (double lam : wavelengths_nm) {
    const double x = (lam - center_nm) / sigma;
    w.push_back(std::exp(-0.5 * x * x));
    total += w.back();
  }
  if (!(total > 0.0)) throw Error(ErrorKind::ZeroDenominator, "QD spectrum misses the wavelength grid");
  for (double &v : w) v /= total;
  return w;
}

void CouplingTriple::validate() const {
  for (const auto &v : t)
    if (v.size() != wavelengths_nm.size())
      throw Error(ErrorKind::GridMismatch, "coupling spectra are not aligned with the wavelength grid");
}

Spectrum purcell_spectrum(const MonitorSet &coupled, const MonitorSet &vacuum) {
  if (coupled.grid.resolution != vacuum.grid.resolution)
    throw Error(ErrorKind::GridMismatch, "runs use different resolutions");
  check_aligned(coupled.wavelengths_nm, vacuum.wavelengths_nm);
  return purcell_spectrum(source_power(coupled), source_power(vacuum));
}

Spectrum purcell_spectrum(const Spectrum &coupled, const Spectrum &vacuum) {
  check_aligned(coupled.wavelengths_nm, vacuum.wavelengths_nm);
  return ratio(coupled, vacuum);
}

MaxPurcell max_purcell(const Spectrum &f) {
  if (f.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty Purcell spectrum");
  std::size_t best = 0;
  for (std::size_t i = 1; i < f.size(); ++i)
    if (f.values[i] > f.values[best]) best = i;
  return {f.values[best], f.wavelengths_nm[best]};
}

double dop_from_triple(const CouplingTriple &t, const QdSpectrum &qd, const std::optional<PurcellSpectrum> &f) {
  t.validate();
  if (f) check_aligned(f->wavelengths_nm, t.wavelengths_nm);
  const auto w = qd.weights(t.wavelengths_nm);
  std::array<double, 3> avg{};
  for (std::size_t i = 0; i < w.size(); ++i)
    for (int o = 0; o < 3; ++o) avg[o] += w[i] * (f ? f->f[o][i] : 1.0) * t.t[o][i];
  const double den = avg[0] + avg[1] + avg[2];
  if (!(std::abs(den) > 0.0)) throw Error(ErrorKind::ZeroDenominator, "all couplings vanish");
  return (avg[1] + avg[2] - avg[0]) / den;
}

double intensity_enhancement(const CouplingTriple &coupled, const PurcellSpectrum &f_coupled,
                             const CouplingTriple &bare, const PurcellSpectrum &f_bare, const QdSpectrum &qd) {
  coupled.validate();
  bare.validate();
  check_aligned(coupled.wavelengths_nm, bare.wavelengths_nm);
  check_aligned(coupled.wavelengths_nm, f_coupled.wavelengths_nm);
  check_aligned(bare.wavelengths_nm, f_bare.wavelengths_nm);
  const auto w = qd.weights(coupled.wavelengths_nm);
  const double num = guided_average(coupled, &f_coupled, w);
  const double den = guided_average(bare, &f_bare, w);
  if (!(den > 0.0)) throw Error(ErrorKind::ZeroDenominator, "bare-fiber guided emission vanishes");
  return num / den;
}

double enhancement_from_counts(double enhanced, double reference) {
  if (!(reference > 0.0)) throw Error(ErrorKind::ZeroDenominator, "reference count rate must be positive");
  return enhanced / reference;
}

double weighted_average(const std::vector<double> &values, const std::vector<double> &weights) {
  if (values.size() != weights.size()) throw Error(ErrorKind::GridMismatch, "weights and values differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * weights[i];
  return s;
}

} // namespace plasmofiber

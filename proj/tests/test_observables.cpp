#include "plasmofiber/errors.hpp"
#include "plasmofiber/observables.hpp"

#include <doctest.h>

#include <numeric>

using namespace plasmofiber;

namespace {

CouplingTriple flat_triple(const std::vector<double> &lam, double tx, double ty, double tz) {
  CouplingTriple t;
  t.wavelengths_nm = lam;
  t.t = {std::vector<double>(lam.size(), tx), std::vector<double>(lam.size(), ty),
         std::vector<double>(lam.size(), tz)};
  return t;
}

PurcellSpectrum flat_purcell(const std::vector<double> &lam, double fx, double fy, double fz) {
  PurcellSpectrum f;
  f.wavelengths_nm = lam;
  f.f = {std::vector<double>(lam.size(), fx), std::vector<double>(lam.size(), fy),
         std::vector<double>(lam.size(), fz)};
  return f;
}

std::vector<double> grid() {
  std::vector<double> lam;
  for (double l = 600.0; l <= 900.0; l += 5.0) lam.push_back(l);
  return lam;
}

} // namespace

TEST_CASE("QD weights are a normalized Gaussian") {
  const QdSpectrum qd;
  const auto lam = grid();
  const auto w = qd.weights(lam);
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0));
  const auto peak = std::max_element(w.begin(), w.end()) - w.begin();
  CHECK(lam[peak] == doctest::Approx(760.0));
  // Half maximum 25 nm either side.
  CHECK(w[(785 - 600) / 5] / w[peak] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK_THROWS_AS((QdSpectrum{760.0, 0.0}.weights(lam)), Error);
  CHECK_THROWS_AS((QdSpectrum{100.0, 1.0}.weights(lam)), Error);
}

TEST_CASE("degree of polarization reference cases") {
  const auto lam = grid();
  const QdSpectrum qd;
  CHECK(dop_from_triple(flat_triple(lam, 1.0, 1.0, 1.0), qd) == doctest::Approx(1.0 / 3.0));
  CHECK(dop_from_triple(flat_triple(lam, 0.0, 0.2, 0.5), qd) == doctest::Approx(1.0));
  CHECK(dop_from_triple(flat_triple(lam, 0.3, 0.0, 0.0), qd) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(dop_from_triple(flat_triple(lam, 0.0, 0.0, 0.0), qd), Error);
}

TEST_CASE("Purcell weighting enters the degree of polarization") {
  const auto lam = grid();
  const QdSpectrum qd;
  const auto t = flat_triple(lam, 0.1, 0.1, 0.1);
  // F_y T_y + F_z T_z = 0.1 (1 + 8), F_x T_x = 0.1: (9 - 1) / (9 + 1).
  CHECK(dop_from_triple(t, qd, flat_purcell(lam, 1.0, 1.0, 8.0)) == doctest::Approx(0.8));
  CHECK(dop_from_triple(t, qd, flat_purcell(lam, 2.0, 2.0, 2.0)) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("degree of polarization is scale invariant and bounded") {
  const auto lam = grid();
  const QdSpectrum qd;
  CouplingTriple t = flat_triple(lam, 0.0, 0.0, 0.0);
  for (std::size_t i = 0; i < lam.size(); ++i) {
    t.t[0][i] = 0.05 + 0.01 * std::sin(0.1 * i);
    t.t[1][i] = 0.2 + 0.05 * std::cos(0.07 * i);
    t.t[2][i] = 0.1 + 0.001 * i;
  }
  const double base = dop_from_triple(t, qd);
  CouplingTriple scaled = t;
  for (auto &v : scaled.t)
    for (double &x : v) x *= 7.5;
  CHECK(dop_from_triple(scaled, qd) == doctest::Approx(base));
  CHECK(base > -1.0);
  CHECK(base < 1.0);
  // Swapping y and z leaves the value unchanged.
  CouplingTriple swapped = t;
  std::swap(swapped.t[1], swapped.t[2]);
  CHECK(dop_from_triple(swapped, qd) == doctest::Approx(base));
}

TEST_CASE("misaligned spectra are rejected") {
  const auto lam = grid();
  CouplingTriple t = flat_triple(lam, 1.0, 1.0, 1.0);
  t.t[2].pop_back();
  CHECK_THROWS_AS(dop_from_triple(t, QdSpectrum{}), Error);
}

TEST_CASE("intensity enhancement") {
  const auto lam = grid();
  const QdSpectrum qd;
  const auto bare = flat_triple(lam, 0.2, 0.2, 0.1);
  const auto fb = flat_purcell(lam, 1.0, 1.0, 1.0);
  CHECK(intensity_enhancement(bare, fb, bare, fb, qd) == doctest::Approx(1.0));
  const auto rod = flat_triple(lam, 0.1, 0.2, 0.3);
  const auto fr = flat_purcell(lam, 1.0, 2.0, 10.0);
  // (0.1 + 0.4 + 3.0) / (0.2 + 0.2 + 0.1)
  CHECK(intensity_enhancement(rod, fr, bare, fb, qd) == doctest::Approx(7.0));
  CHECK_THROWS_AS(intensity_enhancement(rod, fr, flat_triple(lam, 0, 0, 0), fb, qd), Error);
}

TEST_CASE("Purcell spectrum and its maximum") {
  const Spectrum coupled{{600.0, 700.0, 800.0}, {2.0, 9.0, 4.0}};
  const Spectrum vac{{600.0, 700.0, 800.0}, {1.0, 1.5, 2.0}};
  const Spectrum f = purcell_spectrum(coupled, vac);
  const MaxPurcell m = max_purcell(f);
  CHECK(m.value == doctest::Approx(6.0));
  CHECK(m.wavelength_nm == doctest::Approx(700.0));
  CHECK_THROWS_AS(max_purcell(Spectrum{}), Error);
}

TEST_CASE("count-rate enhancement and weighted averages") {
  CHECK(enhancement_from_counts(3000.0, 1000.0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(enhancement_from_counts(1.0, 0.0), Error);
  CHECK(weighted_average({1.0, 3.0}, {0.25, 0.75}) == doctest::Approx(2.5));
  CHECK_THROWS_AS(weighted_average({1.0}, {0.5, 0.5}), Error);
}

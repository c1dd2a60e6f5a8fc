#include "plasmofiber/materials.hpp"

#include "plasmofiber/yee_grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace plasmofiber {

namespace {

constexpr double kHbarEvFs = 0.6582119569;
constexpr double kHcEvNm = 1239.84198;

constexpr std::array<OpticalConstant, 10> kJohnsonChristyGold{{
    {1.14, 0.27, 7.150},
    {1.26, 0.22, 6.350},
    {1.39, 0.17, 5.663},
    {1.51, 0.16, 5.083},
    {1.64, 0.14, 4.542},
    {1.76, 0.13, 4.103},
    {1.88, 0.14, 3.697},
    {2.01, 0.21, 3.272},
    {2.13, 0.29, 2.863},
    {2.26, 0.43, 2.455},
}};

} // namespace

std::complex<double> DrudeLorentzModel::permittivity(double w) const {
  using cd = std::complex<double>;
  const cd i(0.0, 1.0);
  cd eps = eps_inf;
  if (plasma_frequency > 0.0)
    eps -= plasma_frequency * plasma_frequency / (w * w + i * collision_rate * w);
  for (const auto &p : lorentz_poles)
    eps += p.strength * p.frequency * p.frequency / (p.frequency * p.frequency - w * w - i * p.damping * w);
  return eps;
}

std::complex<double> DrudeLorentzModel::permittivity_at_wavelength(double wavelength_nm) const {
  return permittivity(2.0 * kPi * kSpeedOfLight / wavelength_nm);
}

DrudeLorentzModel gold_drude_lorentz() {
  DrudeLorentzModel m;
  m.eps_inf = 6.23924;
  m.plasma_frequency = 13.22056;
  m.collision_rate = 0.109588;
  m.lorentz_poles = {
      {0.579165, 3.751308, 0.300000},
      {0.0612975, 3.286852, 0.376874},
  };
  return m;
}

double OpticalConstant::wavelength_nm() const { return kHcEvNm / energy_ev; }

std::span<const OpticalConstant> johnson_christy_gold() { return kJohnsonChristyGold; }

double max_fit_residual(const DrudeLorentzModel &model, double lo_nm, double hi_nm) {
  double worst = 0.0;
  for (const auto &pt : kJohnsonChristyGold) {
    const double lam = pt.wavelength_nm();
    if (lam < lo_nm || lam > hi_nm) continue;
    const double w = pt.energy_ev / kHbarEvFs;
    worst = std::max(worst, std::abs(model.permittivity(w) - pt.permittivity()));
  }
  return worst;
}

double silica_index(double wavelength_nm) {
  const double l2 = (wavelength_nm * 1e-3) * (wavelength_nm * 1e-3);
  const double n2 = 1.0 + 0.6961663 * l2 / (l2 - 0.0684043 * 0.0684043) +
                    0.4079426 * l2 / (l2 - 0.1162414 * 0.1162414) +
                    0.8974794 * l2 / (l2 - 9.896161 * 9.896161);
  return std::sqrt(n2);
}

} // namespace plasmofiber

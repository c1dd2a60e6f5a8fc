#include "plasmofiber/photon_stats.hpp"

#include "plasmofiber/errors.hpp"
#include "plasmofiber/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace plasmofiber {

std::size_t TimestampStream::count(Channel c) const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [c](const PhotonEvent &e) { return e.channel == c; }));
}

void TimestampStream::normalize() {
  std::stable_sort(events.begin(), events.end(),
                   [](const PhotonEvent &a, const PhotonEvent &b) { return a.time_ps < b.time_ps; });
  if (!events.empty() && events.back().time_ps > duration_ps)
    throw Error(ErrorKind::InvalidArgument, "event time exceeds the acquisition duration");
}

std::vector<double> CorrelationHistogram::g2() const {
  std::vector<double> out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) out[i] = expected[i] > 0.0 ? counts[i] / expected[i] : 0.0;
  return out;
}

namespace {

// Integral of (T - |tau|) over [a, b].
double triangle_integral(double a, double b, double t) {
  auto prim = [t](double x) { return x >= 0.0 ? t * x - 0.5 * x * x : t * x + 0.5 * x * x; };
  return prim(b) - prim(a);
}

} // namespace

CorrelationHistogram correlate(const TimestampStream &s, double bin_width_ps, double max_lag_ps) {
  if (!(bin_width_ps > 0.0)) throw Error(ErrorKind::InvalidArgument, "bin width must be positive");
  if (!(max_lag_ps >= bin_width_ps)) throw Error(ErrorKind::InvalidArgument, "max lag must cover one bin");
  if (s.duration_ps == 0) throw Error(ErrorKind::InvalidArgument, "stream duration is zero");
  if (!(max_lag_ps < static_cast<double>(s.duration_ps)))
    throw Error(ErrorKind::InvalidArgument, "max lag exceeds the acquisition duration");

  std::vector<double> plus, minus;
  for (const PhotonEvent &e : s.events) (e.channel == Channel::Plus ? plus : minus).push_back(static_cast<double>(e.time_ps));
  if (plus.empty() || minus.empty()) throw Error(ErrorKind::EmptyChannel, "a detector channel has no events");
  std::sort(plus.begin(), plus.end());
  std::sort(minus.begin(), minus.end());

  const long half = static_cast<long>(std::floor(max_lag_ps / bin_width_ps));
  const double reach = (static_cast<double>(half) + 0.5) * bin_width_ps;
  CorrelationHistogram h;
  h.bin_width_ps = bin_width_ps;
  h.n_plus = plus.size();
  h.n_minus = minus.size();
  h.counts.assign(static_cast<std::size_t>(2 * half + 1), 0.0);

  std::size_t lo = 0;
  for (double tp : plus) {
    while (lo < minus.size() && minus[lo] - tp < -reach) ++lo;
    for (std::size_t j = lo; j < minus.size(); ++j) {
      const double tau = minus[j] - tp;
      if (tau >= reach) break;
      const long m = std::lround(tau / bin_width_ps);
      if (m < -half || m > half) continue;
      h.counts[static_cast<std::size_t>(m + half)] += 1.0;
    }
  }

  const double total = static_cast<double>(s.duration_ps);
  const double scale = static_cast<double>(h.n_plus) * static_cast<double>(h.n_minus) / (total * total);
  for (long m = -half; m <= half; ++m) {
    const double c = static_cast<double>(m) * bin_width_ps;
    h.lag_ps.push_back(c);
    h.expected.push_back(scale * triangle_integral(c - 0.5 * bin_width_ps, c + 0.5 * bin_width_ps, total));
  }
  return h;
}

namespace {

// Integral of exp(-|tau| / T) over [a, b].
double dip_integral(double a, double b, double t) {
  if (a >= 0.0) return t * (std::exp(-a / t) - std::exp(-b / t));
  if (b <= 0.0) return t * (std::exp(b / t) - std::exp(a / t));
  return t * (2.0 - std::exp(a / t) - std::exp(-b / t));
}

} // namespace

double yield_ratio_from_g2(double g0) {
  if (g0 < 0.0) throw Error(ErrorKind::InvalidArgument, "g2(0) cannot be negative");
  if (g0 >= 1.0) return 1.0;
  return 1.0 - std::sqrt(1.0 - g0);
}

AntibunchingFit fit_antibunching(const CorrelationHistogram &h, const AntibunchingOptions &opt) {
  if (h.counts.size() != h.lag_ps.size() || h.expected.size() != h.lag_ps.size())
    throw Error(ErrorKind::InvalidArgument, "histogram arrays differ in length");
  const double w = h.bin_width_ps;
  std::vector<double> lag, y, sigma, accidentals;
  for (std::size_t i = 0; i < h.lag_ps.size(); ++i) {
    if (std::abs(h.lag_ps[i]) < 2.0 * opt.jitter_sigma_ps) continue;
    if (!(h.expected[i] > 0.0)) continue;
    lag.push_back(h.lag_ps[i]);
    y.push_back(h.counts[i] / h.expected[i]);
    sigma.push_back(std::sqrt(std::max(h.counts[i], 1.0)) / h.expected[i]);
    accidentals.push_back(h.expected[i]);
  }
  if (lag.size() < opt.min_bins)
    throw Error(ErrorKind::DegenerateHistogram, "too few usable histogram bins");
  const auto n = static_cast<Eigen::Index>(lag.size());

  // Flat reference: the best constant.
  auto flat_chi2 = [&] {
    double sw = 0.0, swy = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      sw += 1.0 / (sigma[i] * sigma[i]);
      swy += y[i] / (sigma[i] * sigma[i]);
    }
    const double flat = swy / sw;
    double chi2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) chi2 += std::pow((y[i] - flat) / sigma[i], 2);
    return chi2;
  };
  double chi2_flat = flat_chi2();

  auto model_at = [&](const Eigen::VectorXd &p, Eigen::Index i) {
    return 1.0 - (1.0 - p[1]) * dip_integral(lag[i] - 0.5 * w, lag[i] + 0.5 * w, std::exp(p[0])) / w;
  };
  auto residuals = [&](const Eigen::VectorXd &p) {
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) r[i] = (y[i] - model_at(p, i)) / sigma[i];
    return r;
  };

  // Start from the dip area, which equals 2 T (1 - g0).
  double g0_start = 1.0;
  double area = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(lag[i]) <= 2.0 * w + 2.0 * opt.jitter_sigma_ps) g0_start = std::min(g0_start, y[i]);
    area += (1.0 - y[i]) * w;
  }
  g0_start = std::clamp(g0_start, 0.0, 0.9);
  double t_start = area / (2.0 * (1.0 - g0_start));
  const double span = std::abs(lag.back() - lag.front());
  if (!(t_start > w)) t_start = 10.0 * w;
  t_start = std::min(t_start, 0.25 * span);

  Eigen::VectorXd start(2), lo(2), hi(2);
  start << std::log(t_start), g0_start;
  lo << std::log(0.05 * w), 0.0;
  hi << std::log(span), 10.0;
  LmResult fit = levenberg_marquardt(residuals, start, lo, hi);
  if (chi2_flat - fit.cost < opt.min_delta_chi2)
    throw Error(ErrorKind::DegenerateHistogram, "no significant dip in the correlation histogram");

  // Counts near the dip are small, and weighting by the observed counts pulls
  // the fit toward a wider dip. Refit with errors taken from the fitted model.
  for (int pass = 0; pass < 3 && fit.params.allFinite(); ++pass) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double predicted = std::max(model_at(fit.params, i), 0.0) * accidentals[i];
      sigma[i] = std::sqrt(std::max(predicted, 1.0)) / accidentals[i];
    }
    fit = levenberg_marquardt(residuals, fit.params, lo, hi);
  }
  chi2_flat = flat_chi2();
  if (!fit.converged || !fit.params.allFinite())
    throw Error(ErrorKind::NoConvergence, "antibunching fit did not converge");

  AntibunchingFit out;
  out.decay_ps = std::exp(fit.params[0]);
  out.decay_err_ps = out.decay_ps * std::sqrt(std::max(fit.covariance(0, 0), 0.0));
  out.g2_zero = fit.params[1];
  out.g2_zero_err = std::sqrt(std::max(fit.covariance(1, 1), 0.0));
  out.chi2 = fit.cost;
  out.chi2_flat = chi2_flat;
  out.bins_used = lag.size();
  out.yield_ratio = yield_ratio_from_g2(out.g2_zero);
  return out;
}

PowerFit fit_power_dependence(const std::vector<PowerPoint> &points) {
  std::vector<double> powers;
  for (const PowerPoint &p : points) {
    if (!(p.decay_ns > 0.0) || !(p.decay_err_ns > 0.0))
      throw Error(ErrorKind::InvalidArgument, "decay times and their errors must be positive");
    if (!(p.power_uw >= 0.0)) throw Error(ErrorKind::InvalidArgument, "excitation power must be non-negative");
    powers.push_back(p.power_uw);
  }
  std::sort(powers.begin(), powers.end());
  powers.erase(std::unique(powers.begin(), powers.end()), powers.end());
  if (powers.size() < 3) throw Error(ErrorKind::InvalidArgument, "need at least three distinct powers");

  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n), wts(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const PowerPoint &p = points[static_cast<std::size_t>(i)];
    a(i, 0) = 1.0;
    a(i, 1) = p.power_uw;
    b[i] = 1.0 / p.decay_ns;
    const double s = p.decay_err_ns / (p.decay_ns * p.decay_ns);
    wts[i] = 1.0 / (s * s);
  }
  const LinearFit fit = weighted_linear_fit(a, b, wts);
  PowerFit out;
  out.intercept = fit.params[0];
  out.intercept_err = std::sqrt(fit.covariance(0, 0));
  out.alpha = fit.params[1];
  out.alpha_err = std::sqrt(fit.covariance(1, 1));
  out.chi2 = fit.chi2;
  if (out.intercept <= 0.0) {
    out.negative_intercept = true;
    out.tau1_ns = std::numeric_limits<double>::infinity();
    out.tau1_err_ns = std::numeric_limits<double>::infinity();
  } else {
    out.tau1_ns = 1.0 / out.intercept;
    out.tau1_err_ns = out.intercept_err / (out.intercept * out.intercept);
  }
  return out;
}

PurcellEstimate purcell_from_lifetimes(double tau0, double tau1, double r0, std::optional<double> r1) {
  if (!(tau1 > 0.0)) throw Error(ErrorKind::ZeroDenominator, "tau1 must be positive");
  if (!(tau0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau0 must be positive");
  const double rel1 = r1.value_or(r0);
  if (r0 < 0.0 || rel1 < 0.0) throw Error(ErrorKind::InvalidArgument, "relative errors must be non-negative");
  PurcellEstimate out;
  out.value = tau0 / tau1;
  out.error = out.value * std::hypot(r0, rel1);
  return out;
}

HwpFit dop_from_hwp_scan(const std::vector<HwpSample> &samples) {
  std::map<long long, std::vector<double>> groups;
  for (const HwpSample &s : samples) {
    if (!std::isfinite(s.angle_deg) || !std::isfinite(s.i_frac))
      throw Error(ErrorKind::NonFinite, "HWP sample is not finite");
    groups[std::llround(s.angle_deg * 1e6)].push_back(s.i_frac);
  }
  if (groups.size() < 5) throw Error(ErrorKind::InsufficientCoverage, "need at least five distinct angles");
  const double span = static_cast<double>(groups.rbegin()->first - groups.begin()->first) * 1e-6;
  if (span < 90.0 - 1e-9) throw Error(ErrorKind::InsufficientCoverage, "angles span less than 90 degrees");

  const auto n = static_cast<Eigen::Index>(groups.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n), sem(n);
  bool have_errors = true;
  Eigen::Index row = 0;
  for (const auto &[key, vals] : groups) {
    const double theta = static_cast<double>(key) * 1e-6 * std::numbers::pi / 180.0;
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    if (vals.size() >= 2) {
      var /= static_cast<double>(vals.size() - 1);
      sem[row] = std::sqrt(var / static_cast<double>(vals.size()));
    } else {
      sem[row] = 0.0;
    }
    if (!(sem[row] > 0.0)) have_errors = false;
    a(row, 0) = 1.0;
    a(row, 1) = std::cos(4.0 * theta);
    a(row, 2) = std::sin(4.0 * theta);
    b[row] = mean;
    ++row;
  }

  Eigen::VectorXd wts = have_errors ? Eigen::VectorXd(sem.array().square().inverse()) : Eigen::VectorXd::Ones(n);
  LinearFit fit = weighted_linear_fit(a, b, wts);
  if (!have_errors) {
    // No per-angle scatter: scale by the residual variance instead.
    const double dof = static_cast<double>(std::max<Eigen::Index>(n - 3, 1));
    fit.covariance *= fit.chi2 / dof;
  }

  HwpFit out;
  out.offset = fit.params[0];
  out.cos_amp = fit.params[1];
  out.sin_amp = fit.params[2];
  if (!(out.offset > 0.0)) throw Error(ErrorKind::ZeroDenominator, "mean HWP signal is not positive");
  const double r = std::hypot(out.cos_amp, out.sin_amp);
  out.i_max = out.offset + r;
  out.i_min = out.offset - r;
  if (out.i_min < 0.0) {
    out.negative_min = true;
    out.i_min = 0.0;
  }
  out.dop = (out.i_max - out.i_min) / (out.i_max + out.i_min);
  out.phase_deg = -std::atan2(out.sin_amp, out.cos_amp) * 180.0 / std::numbers::pi;
  Eigen::Vector3d grad;
  if (r > 0.0)
    grad << -r / (out.offset * out.offset), out.cos_amp / (r * out.offset), out.sin_amp / (r * out.offset);
  else
    grad << 0.0, 1.0 / out.offset, 0.0;
  out.dop_err = std::sqrt(std::max(grad.dot(fit.covariance * grad), 0.0));
  return out;
}

} // namespace plasmofiber

#include "plasmofiber/errors.hpp"
#include "plasmofiber/photon_stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace plasmofiber;

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

// Mean of 1 - (1 - g0) exp(-|t| / T) over [lo, hi] by composite Simpson.
double bin_mean(double g0, double decay, double lo, double hi) {
  const int n = 2000;
  const double h = (hi - lo) / n;
  auto f = [&](double t) { return 1.0 - (1.0 - g0) * std::exp(-std::abs(t) / decay); };
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0 / (hi - lo);
}

CorrelationHistogram noiseless_histogram(double g0, double decay_ps, double bin_ps, double max_lag_ps) {
  CorrelationHistogram h;
  h.bin_width_ps = bin_ps;
  const int m = static_cast<int>(std::floor(max_lag_ps / bin_ps));
  for (int i = -m; i <= m; ++i) {
    const double c = i * bin_ps;
    h.lag_ps.push_back(c);
    h.expected.push_back(5.0e5);
    h.counts.push_back(5.0e5 * bin_mean(g0, decay_ps, c - 0.5 * bin_ps, c + 0.5 * bin_ps));
  }
  return h;
}

TimestampStream poisson_pair(double rate_per_ps, std::uint64_t duration, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> wait(rate_per_ps);
  TimestampStream s;
  s.duration_ps = duration;
  for (Channel c : {Channel::Plus, Channel::Minus}) {
    double t = wait(rng);
    while (t < static_cast<double>(duration)) {
      s.events.push_back({static_cast<std::uint64_t>(t), c});
      t += wait(rng);
    }
  }
  s.normalize();
  return s;
}

} // namespace

TEST_CASE("correlation histogram: bin placement and exact normalization") {
  TimestampStream s;
  s.duration_ps = 10000;
  s.events = {{100, Channel::Plus}, {430, Channel::Minus}};
  const CorrelationHistogram h = correlate(s, 100.0, 500.0);
  REQUIRE(h.lag_ps.size() == 11);
  CHECK(h.lag_ps.front() == doctest::Approx(-500.0));
  CHECK(h.lag_ps[5] == doctest::Approx(0.0));
  for (std::size_t i = 0; i < h.counts.size(); ++i) CHECK(h.counts[i] == (i == 8 ? 1.0 : 0.0));
  // Bin [250, 350): N+ N- / T^2 * int (T - |tau|) dtau.
  const double integral = 100.0 * 10000.0 - 0.5 * (350.0 * 350.0 - 250.0 * 250.0);
  CHECK(h.expected[8] == doctest::Approx(integral / 1e8));
  CHECK(h.expected[2] == doctest::Approx(integral / 1e8));
  // Swapping channels mirrors the lag.
  TimestampStream r = s;
  for (auto &e : r.events) e.channel = e.channel == Channel::Plus ? Channel::Minus : Channel::Plus;
  CHECK(correlate(r, 100.0, 500.0).counts[2] == 1.0);
}

TEST_CASE("independent Poisson channels give g2 = 1 with Poisson scatter") {
  const TimestampStream s = poisson_pair(1e-6, 10'000'000'000ull, 11);
  const CorrelationHistogram h = correlate(s, 1000.0, 1.0e6);
  double counts = 0.0, expected = 0.0, chi2 = 0.0;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    counts += h.counts[i];
    expected += h.expected[i];
    chi2 += (h.counts[i] - h.expected[i]) * (h.counts[i] - h.expected[i]) / h.expected[i];
  }
  const double dof = static_cast<double>(h.counts.size());
  CHECK(counts / expected == doctest::Approx(1.0).epsilon(0.03));
  CHECK(std::abs(chi2 / dof - 1.0) < 5.0 * std::sqrt(2.0 / dof));
}

TEST_CASE("correlate rejects bad inputs") {
  TimestampStream s;
  s.duration_ps = 1000;
  s.events = {{10, Channel::Plus}};
  try {
    correlate(s, 10.0, 100.0);
    FAIL("expected EmptyChannel");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::EmptyChannel);
  }
  s.events.push_back({20, Channel::Minus});
  CHECK_THROWS_AS(correlate(s, 0.0, 100.0), Error);
  CHECK_THROWS_AS(correlate(s, 10.0, 5000.0), Error);
  s.events.push_back({2000, Channel::Minus});
  CHECK_THROWS_AS(s.normalize(), Error);
}

TEST_CASE("noiseless antibunching curves are recovered to four digits") {
  struct Case {
    double decay_ns, g0;
  };
  for (const Case c : {Case{210.0, 0.02}, Case{4.4, 0.42}}) {
    const double decay_ps = c.decay_ns * 1000.0;
    const auto h = noiseless_histogram(c.g0, decay_ps, decay_ps / 40.0, 10.0 * decay_ps);
    const AntibunchingFit f = fit_antibunching(h);
    CHECK(f.decay_ps == doctest::Approx(decay_ps).epsilon(1e-4));
    CHECK(f.g2_zero == doctest::Approx(c.g0).epsilon(1e-4));
    CHECK(f.chi2 < 1e-3);
    CHECK(f.bins_used == h.counts.size());
    CHECK(f.yield_ratio == doctest::Approx(1.0 - std::sqrt(1.0 - c.g0)));
  }
}

TEST_CASE("jitter exclusion removes the central bins") {
  const auto h = noiseless_histogram(0.2, 50000.0, 1000.0, 400000.0);
  AntibunchingOptions opt;
  opt.jitter_sigma_ps = 1200.0;
  const AntibunchingFit f = fit_antibunching(h, opt);
  // |tau| < 2400 excludes the centres 0, +-1000, +-2000.
  CHECK(f.bins_used == h.counts.size() - 5);
  CHECK(f.g2_zero == doctest::Approx(0.2).epsilon(1e-3));
}

TEST_CASE("flat or tiny histograms are degenerate") {
  CorrelationHistogram flat;
  flat.bin_width_ps = 1000.0;
  for (int i = -50; i <= 50; ++i) {
    flat.lag_ps.push_back(i * 1000.0);
    flat.expected.push_back(100.0);
    flat.counts.push_back(100.0 + (i % 3));
  }
  try {
    fit_antibunching(flat);
    FAIL("expected DegenerateHistogram");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::DegenerateHistogram);
  }
  const auto small = noiseless_histogram(0.0, 5000.0, 1000.0, 8000.0);
  CHECK_THROWS_AS(fit_antibunching(small), Error);
}

TEST_CASE("yield ratio from g2(0)") {
  CHECK(yield_ratio_from_g2(0.0) == doctest::Approx(0.0));
  CHECK(yield_ratio_from_g2(0.75) == doctest::Approx(0.5));
  CHECK(yield_ratio_from_g2(1.3) == doctest::Approx(1.0));
  CHECK_THROWS_AS(yield_ratio_from_g2(-0.1), Error);
}

TEST_CASE("power dependence: exact data, ordering and degenerate cases") {
  std::vector<PowerPoint> pts;
  for (double p : {20.0, 50.0, 100.0, 200.0, 400.0}) {
    const double decay = 1.0 / (1.0 / 280.0 + 0.001 * p);
    pts.push_back({p, decay, 0.01 * decay});
  }
  const PowerFit f = fit_power_dependence(pts);
  CHECK(f.tau1_ns == doctest::Approx(280.0).epsilon(1e-9));
  CHECK(f.alpha == doctest::Approx(0.001).epsilon(1e-9));
  CHECK_FALSE(f.negative_intercept);
  CHECK(f.chi2 < 1e-12);
  CHECK(f.tau1_err_ns > 0.0);

  std::vector<PowerPoint> shuffled{pts[3], pts[0], pts[4], pts[2], pts[1]};
  const PowerFit g = fit_power_dependence(shuffled);
  CHECK(g.tau1_ns == doctest::Approx(f.tau1_ns).epsilon(1e-12));
  CHECK(g.alpha_err == doctest::Approx(f.alpha_err).epsilon(1e-12));

  std::vector<PowerPoint> neg;
  for (double p : {100.0, 200.0, 300.0}) neg.push_back({p, 1.0 / (-0.01 + 0.001 * p), 1.0});
  const PowerFit n = fit_power_dependence(neg);
  CHECK(n.negative_intercept);
  CHECK(std::isinf(n.tau1_ns));

  std::vector<PowerPoint> two{pts[0], pts[1], {pts[1].power_uw, pts[1].decay_ns, 1.0}};
  CHECK_THROWS_AS(fit_power_dependence(two), Error);
  CHECK_THROWS_AS(fit_power_dependence({{1.0, -1.0, 1.0}, {2.0, 1.0, 1.0}, {3.0, 1.0, 1.0}}), Error);
}

TEST_CASE("Purcell factor from lifetimes") {
  const PurcellEstimate p = purcell_from_lifetimes(20.0, 2.0, 0.05);
  CHECK(p.value == doctest::Approx(10.0));
  CHECK(p.error == doctest::Approx(10.0 * std::sqrt(2.0) * 0.05));
  const PurcellEstimate q = purcell_from_lifetimes(20.0, 2.0, 0.03, 0.04);
  CHECK(q.error == doctest::Approx(10.0 * 0.05));
  const PurcellEstimate ps = purcell_from_lifetimes(20000.0, 2000.0, 0.03, 0.04);
  CHECK(ps.value == doctest::Approx(q.value));
  CHECK(ps.error == doctest::Approx(q.error));
  CHECK(purcell_from_lifetimes(5.0, 5.0, 0.0).error == 0.0);
  CHECK_THROWS_AS(purcell_from_lifetimes(5.0, 0.0, 0.1), Error);
  CHECK_THROWS_AS(purcell_from_lifetimes(-5.0, 1.0, 0.1), Error);
}

namespace {


std::vector<HwpSample> ideal_scan(double p, double phase_deg, double shift_deg = 0.0, double scale = 1.0) {
  std::vector<HwpSample> s;
  for (int a = 0; a <= 180; a += 10) {
    const double th = (a + shift_deg) * kDegToRad;
    s.push_back({a + shift_deg, scale * 0.5 * (1.0 + p * std::cos(4.0 * th + phase_deg * kDegToRad))});
  }
  return s;
}

} // namespace

TEST_CASE("HWP scan: reference degrees of polarization") {
  for (double p : {0.0, 0.39, 0.86, 1.0}) {
    const HwpFit f = dop_from_hwp_scan(ideal_scan(p, 30.0));
    CHECK(f.dop == doctest::Approx(p).epsilon(1e-9));
    if (p > 0.0) CHECK(f.phase_deg == doctest::Approx(30.0).epsilon(1e-6));
    CHECK_FALSE(f.negative_min);
  }
}

TEST_CASE("HWP scan invariances") {
  const double base = dop_from_hwp_scan(ideal_scan(0.6, 10.0)).dop;
  CHECK(dop_from_hwp_scan(ideal_scan(0.6, 10.0, 90.0)).dop == doctest::Approx(base));
  CHECK(dop_from_hwp_scan(ideal_scan(0.6, 10.0, 0.0, 3.7)).dop == doctest::Approx(base));
  auto rev = ideal_scan(0.6, 10.0);
  std::reverse(rev.begin(), rev.end());
  CHECK(dop_from_hwp_scan(rev).dop == doctest::Approx(base));
}

TEST_CASE("HWP scan with repeated angles uses standard errors") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<HwpSample> s;
  for (int rep = 0; rep < 200; ++rep)
    for (const HwpSample &x : ideal_scan(0.5, 0.0)) s.push_back({x.angle_deg, x.i_frac + noise(rng)});
  const HwpFit f = dop_from_hwp_scan(s);
  CHECK(f.dop == doctest::Approx(0.5).epsilon(0.01));
  CHECK(f.dop_err > 0.0);
  CHECK(f.dop_err < 0.01);
}

TEST_CASE("HWP scan: clipped minimum and coverage checks") {
  std::vector<HwpSample> over;
  for (int a = 0; a <= 180; a += 10) over.push_back({double(a), 0.5 + 0.7 * std::cos(4.0 * a * kDegToRad)});
  const HwpFit f = dop_from_hwp_scan(over);
  CHECK(f.negative_min);
  CHECK(f.i_min == 0.0);
  CHECK(f.dop == doctest::Approx(1.0));

  std::vector<HwpSample> few{{0, 1}, {20, 0.5}, {40, 0.2}, {100, 0.6}};
  try {
    dop_from_hwp_scan(few);
    FAIL("expected InsufficientCoverage");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::InsufficientCoverage);
  }
  std::vector<HwpSample> narrow{{0, 1}, {20, 0.5}, {40, 0.2}, {60, 0.6}, {80, 0.9}};
  CHECK_THROWS_AS(dop_from_hwp_scan(narrow), Error);
}

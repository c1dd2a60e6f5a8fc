#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace plasmofiber {

enum class Channel : std::uint8_t { Plus = 0, Minus = 1 };

struct PhotonEvent {
  std::uint64_t time_ps = 0;
  Channel channel = Channel::Plus;
};

// Time-tagged detections from the two arms of a Hanbury Brown-Twiss setup.
struct TimestampStream {
  std::vector<PhotonEvent> events; // sorted by time
  std::uint64_t duration_ps = 0;
  std::optional<double> excitation_power_uw;
  std::optional<double> hwp_angle_deg;

  std::size_t count(Channel c) const;
  // Sorts events and checks every time lies inside [0, duration].
  void normalize();
};

struct CorrelationHistogram {
  double bin_width_ps = 0.0;
  std::vector<double> lag_ps;   // bin centers, tau = t_minus - t_plus
  std::vector<double> counts;   // raw coincidences
  std::vector<double> expected; // uncorrelated expectation per bin
  std::size_t n_plus = 0, n_minus = 0;

  std::vector<double> g2() const; // counts / expected
};

// Histogram of t_minus - t_plus over |tau| <= max_lag with bins centred on
// multiples of the bin width. Normalized by N+ N- w (T - |tau|) / T^2.
CorrelationHistogram correlate(const TimestampStream &stream, double bin_width_ps, double max_lag_ps);

struct AntibunchingOptions {
  double jitter_sigma_ps = 0.0; // bins with |tau| < 2 sigma are excluded
  std::size_t min_bins = 20;
  double min_delta_chi2 = 25.0; // required improvement over a flat line
};

struct AntibunchingFit {
  double g2_zero = 0.0, g2_zero_err = 0.0;
  double decay_ps = 0.0, decay_err_ps = 0.0;
  double chi2 = 0.0;
  double chi2_flat = 0.0;
  std::size_t bins_used = 0;
  // Biexciton-to-exciton quantum-yield ratio implied by g2(0); clamped at 1
  // when g2(0) exceeds 1.
  double yield_ratio = 0.0;
};

// Fits 1 - (1 - g0) exp(-|tau| / T), averaged over each bin, to a histogram.
// Throws DegenerateHistogram, NoConvergence, InvalidArgument.
AntibunchingFit fit_antibunching(const CorrelationHistogram &h, const AntibunchingOptions &options = {});

double yield_ratio_from_g2(double g2_zero);

struct PowerPoint {
  double power_uw = 0.0;
  double decay_ns = 0.0;
  double decay_err_ns = 0.0;
};

struct PowerFit {
  double tau1_ns = 0.0, tau1_err_ns = 0.0; // infinite when the intercept is not positive
  double alpha = 0.0, alpha_err = 0.0;     // 1/(ns uW)
  double intercept = 0.0, intercept_err = 0.0; // 1/tau1 in 1/ns
  bool negative_intercept = false;
  double chi2 = 0.0;
};

// Weighted linear fit of 1/T = 1/tau1 + alpha P. Needs three distinct powers.
PowerFit fit_power_dependence(const std::vector<PowerPoint> &points);

struct PurcellEstimate {
  double value = 0.0;
  double error = 0.0;
};

// tau0 / tau1 with relative errors combined in quadrature; tau1 relative
// error defaults to the tau0 one.
PurcellEstimate purcell_from_lifetimes(double tau0_ns, double tau1_ns, double tau0_rel_err,
                                       std::optional<double> tau1_rel_err = std::nullopt);

struct HwpSample {
  double angle_deg = 0.0;
  double i_frac = 0.0;
};

struct HwpFit {
  double dop = 0.0, dop_err = 0.0;
  double phase_deg = 0.0;
  double i_max = 0.0, i_min = 0.0;
  double offset = 0.0, cos_amp = 0.0, sin_amp = 0.0;
  bool negative_min = false; // fitted minimum below zero, clipped
};

// Fits A + B cos(4 theta) + C sin(4 theta) to the I-/I+ ratios (averaging
// repeated angles with standard-error weights) and reports
// (Imax - Imin) / (Imax + Imin). Throws InsufficientCoverage.
HwpFit dop_from_hwp_scan(const std::vector<HwpSample> &samples);

} // namespace plasmofiber

#pragma once

#include "plasmofiber/photon_stats.hpp"

#include <cstdint>
#include <vector>

namespace plasmofiber {

// Two-level emitter driven at rate alpha * P and decaying with tau1.
struct EmitterModel {
  double tau1_ns = 280.0;
  double alpha = 0.001;     // 1/(ns uW)
  double power_uw = 100.0;
  int emitters = 1;
  double dop_angle_deg = 0.0; // phase of the polarization curve in HWP synthesis

  double excitation_rate() const { return alpha * power_uw; } // 1/ns
  // (alpha P + 1/tau1)^-1 in ns.
  double antibunching_time_ns() const;
  void validate() const;
};

struct DetectorModel {
  double efficiency = 1.0;
  double dark_rate_hz = 0.0; // per channel
  double jitter_sigma_ps = 0.0;
  double split_plus = 0.5;

  void validate() const;
};

TimestampStream generate_stream(const EmitterModel &emitter, const DetectorModel &detector, double duration_s,
                                std::uint64_t seed);

struct HwpSynthOptions {
  double mean_counts = 1000.0; // reference-arm counts per sample
  int samples_per_angle = 10000;
};

// Ratio samples I-/I+ where I+ is the unfiltered arm and I- passes the
// HWP + PBS, so that <I-/I+> ~ (1 + P cos(4 theta + phi)) / 2 with Poisson
// noise on both arms.
std::vector<HwpSample> synthesize_hwp_scan(const EmitterModel &emitter, double p_true,
                                           const std::vector<double> &angles_deg, std::uint64_t seed,
                                           const HwpSynthOptions &options = {});

} // namespace plasmofiber

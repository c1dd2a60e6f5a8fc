#include "plasmofiber/emitter_synth.hpp"

#include "plasmofiber/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace plasmofiber {

double EmitterModel::antibunching_time_ns() const {
  validate();
  return 1.0 / (excitation_rate() + 1.0 / tau1_ns);
}

void EmitterModel::validate() const {
  if (!(tau1_ns > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau1 must be positive");
  if (!(alpha >= 0.0) || !(power_uw >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "alpha and excitation power must be non-negative");
  if (emitters < 1) throw Error(ErrorKind::InvalidArgument, "need at least one emitter");
}

void DetectorModel::validate() const {
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw Error(ErrorKind::InvalidArgument, "efficiency must be in (0, 1]");
  if (!(split_plus >= 0.0 && split_plus <= 1.0)) throw Error(ErrorKind::InvalidArgument, "split ratio must be in [0, 1]");
  if (!(dark_rate_hz >= 0.0)) throw Error(ErrorKind::InvalidArgument, "dark rate must be non-negative");
  if (!(jitter_sigma_ps >= 0.0)) throw Error(ErrorKind::InvalidArgument, "jitter must be non-negative");
}

TimestampStream generate_stream(const EmitterModel &em, const DetectorModel &det, double duration_s,
                                std::uint64_t seed) {
  em.validate();
  det.validate();
  if (!(duration_s > 0.0)) throw Error(ErrorKind::InvalidArgument, "duration must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, det.jitter_sigma_ps);

  const double total_ps = duration_s * 1e12;
  TimestampStream out;
  out.duration_ps = static_cast<std::uint64_t>(std::llround(total_ps));
  out.excitation_power_uw = em.power_uw;

  auto record = [&](double t_ps) {
    if (det.jitter_sigma_ps > 0.0) t_ps += jitter(rng);
    if (t_ps < 0.0 || t_ps > total_ps) return;
    const Channel ch = uniform(rng) < det.split_plus ? Channel::Plus : Channel::Minus;
    out.events.push_back({static_cast<std::uint64_t>(std::llround(t_ps)), ch});
  };

  const double excite = em.excitation_rate() * 1e-3; // 1/ps
  const double decay = 1e-3 / em.tau1_ns;
  if (excite > 0.0) {
    std::exponential_distribution<double> wait_excite(excite), wait_emit(decay);
    for (int e = 0; e < em.emitters; ++e) {
      // Start from the stationary state so no transient is visible.
      bool excited = uniform(rng) < excite / (excite + decay);
      double t = 0.0;
      while (true) {
        if (!excited) {
          t += wait_excite(rng);
          excited = true;
        }
        t += wait_emit(rng);
        excited = false;
        if (t > total_ps) break;
        if (uniform(rng) < det.efficiency) record(t);
      }
    }
  }

  if (det.dark_rate_hz > 0.0) {
    std::poisson_distribution<long long> dark(det.dark_rate_hz * duration_s);
    for (Channel ch : {Channel::Plus, Channel::Minus}) {
      const long long n = dark(rng);
      for (long long i = 0; i < n; ++i)
        out.events.push_back({static_cast<std::uint64_t>(std::llround(uniform(rng) * total_ps)), ch});
    }
  }
  out.normalize();
  return out;
}

std::vector<HwpSample> synthesize_hwp_scan(const EmitterModel &em, double p_true,
                                           const std::vector<double> &angles_deg, std::uint64_t seed,
                                           const HwpSynthOptions &opt) {
  em.validate();
  if (!(p_true >= 0.0 && p_true <= 1.0)) throw Error(ErrorKind::InvalidArgument, "P must lie in [0, 1]");
  if (!(opt.mean_counts > 0.0) || opt.samples_per_angle < 1)
    throw Error(ErrorKind::InvalidArgument, "need positive counts and samples");
  std::mt19937_64 rng(seed);
  const double phi = em.dop_angle_deg * std::numbers::pi / 180.0;
  std::vector<HwpSample> out;
  out.reserve(angles_deg.size() * static_cast<std::size_t>(opt.samples_per_angle));
  std::poisson_distribution<long long> reference(opt.mean_counts);
  for (double angle : angles_deg) {
    const double theta = angle * std::numbers::pi / 180.0;
    const double mean_minus = 0.5 * opt.mean_counts * (1.0 + p_true * std::cos(4.0 * theta + phi));
    std::poisson_distribution<long long> filtered(std::max(mean_minus, 1e-12));
    for (int s = 0; s < opt.samples_per_angle; ++s) {
      long long plus = 0;
      while (plus == 0) plus = reference(rng);
      const long long minus = mean_minus > 0.0 ? filtered(rng) : 0;
      out.push_back({angle, static_cast<double>(minus) / static_cast<double>(plus)});
    }
  }
  return out;
}

} // namespace plasmofiber

#pragma once

#include "plasmofiber/emitter_synth.hpp"
#include "plasmofiber/observables.hpp"
#include "plasmofiber/yee_grid.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace plasmofiber {

enum class RunMode { Simulate, Sweep, Analyze, Synthesize };

const char *to_string(RunMode mode);

struct SceneSettings {
  double d_nm = 25.0;
  std::optional<double> rod_length_nm = 160.0; // empty: bare fiber
  double fiber_diameter_nm = 530.0;
  double resolution_nm = 10.0;
  std::optional<Vec3> orientation; // set: a single run with this dipole instead of a full point
  double tilt_deg = 23.0;          // tilted-dipole coupling reported per point
  double transverse_margin_nm = 400.0;
  double plane_distance_nm = 1000.0;
  int cpml_thickness = 10;
  bool radiation_box = true;
  double vacuum_half_width_nm = 250.0;
  long max_steps = 200000;
  double decay_threshold = 1e-6;
};

struct WavelengthGrid {
  double start_nm = 600.0;
  double stop_nm = 900.0;
  double step_nm = 5.0;

  std::vector<double> values() const;
};

struct SweepSettings {
  std::vector<double> d_nm;
  std::vector<std::optional<double>> rod_length_nm; // null entries mean the bare fiber
  int parallelism = 1;
};

struct AnalyzeSettings {
  double bin_width_ps = 1000.0;
  double max_lag_ps = 100000.0;
  double jitter_sigma_ps = 0.0;
};

struct SynthSettings {
  EmitterModel emitter;
  DetectorModel detector;
  double duration_s = 0.01;
  std::vector<double> powers_uw; // power series; empty writes one stream
  double dop = 0.86;
  std::vector<double> angles_deg;
  int samples_per_angle = 10000;
  double mean_counts = 1000.0;
};

struct RunConfig {
  RunMode mode = RunMode::Simulate;
  SceneSettings scene;
  QdSpectrum qd;
  WavelengthGrid wavelengths;
  SweepSettings sweep;
  AnalyzeSettings analyze;
  SynthSettings synth;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  int threads = 0; // 0: PLASMOFIBER_THREADS or the OpenMP default

  void validate() const;
};

// JSON document; missing keys keep their defaults, unknown keys are rejected.
// Throws ParseError (with byte offset) for malformed text and InvalidArgument
// for bad values.
RunConfig parse_config(const std::string &text);
RunConfig load_config(const std::filesystem::path &path);
// Canonical form: every key present, fixed ordering, two-space indentation.
std::string dump_config(const RunConfig &config);

} // namespace plasmofiber

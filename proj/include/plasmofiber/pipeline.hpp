#pragma once

#include "plasmofiber/fiber_modes.hpp"
#include "plasmofiber/observables.hpp"
#include "plasmofiber/run_config.hpp"
#include "plasmofiber/scene.hpp"
#include "plasmofiber/simulation.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace plasmofiber {

// What one FDTD run leaves behind once the fields are gone. Everything is per
// unit source current, so runs with different dipole orientations can be
// superposed.
struct OrientationData {
  Vec3 orientation;
  double resolution_nm = 0.0;
  std::vector<double> wavelengths_nm;
  std::array<std::vector<cplx>, 3> probe;   // E seen by unit x/y/z dipoles at the source point
  std::optional<std::array<ModeAmplitudes, 2>> modes; // toward -z and +z
  std::optional<Spectrum> radiated;         // flux out of the "radiation" box
  long steps = 0;
  bool converged = false;
  bool plane_too_close = false;
};

// Power delivered by the dipole the run was driven with.
Spectrum emitted_power(const OrientationData &run);

// Unit x, y, z runs of one scene. Any dipole p is the superposition
// sum_a p_a run_a.
struct OrientationSet {
  std::array<OrientationData, 3> runs;

  Spectrum emitted(Vec3 p) const;
  Spectrum guided(Vec3 p) const; // both directions, both polarizations
  Spectrum coupling(Vec3 p) const { return ratio(guided(p), emitted(p)); }
  bool converged() const;
  bool plane_too_close() const;
};

// Unit vector tilted by angle_deg from z toward +y (or toward +x).
Vec3 tilted_dipole(double angle_deg, bool toward_x = false);

// Extracts the orientation products from a finished run. Mode projections use
// the "mode_minus" / "mode_plus" planes when present.
OrientationData summarize_run(const SceneConfig &scene, const MonitorSet &monitors, const FiberSpec &fiber);

// Content hash (FNV-1a over a canonical description) of everything that
// changes a run's output.
std::string scene_fingerprint(const SceneConfig &scene);

// Run memo with an optional on-disk store. Concurrent requests for the same
// scene share one computation.
class RunCache {
public:
  explicit RunCache(std::filesystem::path directory = {});

  OrientationData get(const SceneConfig &scene, const FiberSpec &fiber, const RunOptions &options);
  std::size_t computed() const { return computed_; }

private:
  std::filesystem::path dir_;
  std::mutex mutex_;
  std::map<std::string, std::shared_future<OrientationData>> pending_;
  std::size_t computed_ = 0;
};

void write_orientation_data(const std::filesystem::path &path, const OrientationData &data);
OrientationData read_orientation_data(const std::filesystem::path &path);

using LogFn = std::function<void(const std::string &)>;

struct PointSpectra {
  PurcellSpectrum purcell, bare_purcell;
  CouplingTriple coupling, bare_coupling;
  Spectrum tilt_coupling, bare_tilt_coupling;
};

struct PointResult {
  double d_nm = 0.0;
  std::optional<double> rod_length_nm;
  bool ok = false;
  std::string error_kind, message;
  ObservablesResult observables;
  double coupling_mean = 0.0;       // QD-weighted mean of T_x, T_y, T_z with the rod
  double bare_coupling_mean = 0.0;  // same on the bare fiber
  double tilt_coupling = 0.0;       // QD-weighted coupled fraction of the tilted dipole, rod present
  double bare_tilt_coupling = 0.0;
  double bare_tilt_coupling_xz = 0.0; // tilt toward x instead of y
  bool converged = false;
  bool plane_too_close = false;
  std::optional<PointSpectra> spectra;
};

// Scene for one of the point's runs, built from the config.
SceneConfig point_scene(const RunConfig &config, double d_nm, std::optional<double> rod_length_nm, Vec3 orientation);
SceneConfig reference_vacuum_scene(const RunConfig &config, const SceneConfig &point, Vec3 orientation);
SceneConfig reference_bare_scene(const RunConfig &config, const SceneConfig &point, Vec3 orientation);

// Runs (or loads from the cache) everything one (d, L) point needs and
// evaluates the observables. Failures are captured in the result.
PointResult simulate_point(const RunConfig &config, double d_nm, std::optional<double> rod_length_nm,
                           RunCache &cache, const RunOptions &options, const LogFn &log = {});

// Writes spectra CSVs and result.json into `directory`.
void write_point(const std::filesystem::path &directory, const PointResult &result);
PointResult read_point(const std::filesystem::path &directory);

std::string point_directory_name(double d_nm, std::optional<double> rod_length_nm);

struct SweepSummary {
  std::vector<PointResult> points;
  std::size_t failed = 0;
  std::size_t skipped = 0; // already complete on disk
  std::filesystem::path csv;
};

// Runs every (d, L) pair of the config's sweep, skipping points that already
// have a successful result.json, and rewrites the aggregated CSV.
SweepSummary run_sweep(const RunConfig &config, const LogFn &log = {});

void write_sweep_csv(const std::filesystem::path &path, const std::vector<PointResult> &points);

} // namespace plasmofiber

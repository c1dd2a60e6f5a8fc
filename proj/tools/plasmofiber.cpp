#include "plasmofiber/emitter_synth.hpp"
#include "plasmofiber/errors.hpp"
#include "plasmofiber/photon_stats.hpp"
#include "plasmofiber/pipeline.hpp"
#include "plasmofiber/run_config.hpp"
#include "plasmofiber/timestamp_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace plasmofiber;

namespace {

void log_line(const std::string &msg) { std::cerr << "[plasmofiber] " << msg << std::endl; }

std::optional<double> parse_length(const std::string &s) {
  if (s == "bare" || s == "none" || s == "null") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw Error(ErrorKind::InvalidArgument, "rod length must be a number or 'bare', got '" + s + "'");
  }
}

Vec3 parse_orientation(const std::string &s) {
  if (s == "x") return {1.0, 0.0, 0.0};
  if (s == "y") return {0.0, 1.0, 0.0};
  if (s == "z") return {0.0, 0.0, 1.0};
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  if (v.size() != 3) throw Error(ErrorKind::InvalidArgument, "orientation must be x, y, z or 'a,b,c'");
  const Vec3 p{v[0], v[1], v[2]};
  const double n = p.norm();
  if (!(n > 0.0)) throw Error(ErrorKind::InvalidArgument, "orientation must be nonzero");
  return (1.0 / n) * p;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void emit_report(const json &report, const std::string &out) {
  const std::string text = report.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + out);
    f << text;
  }
}

// Flags shared by the FDTD subcommands; unset flags leave the config alone.
struct SceneFlags {
  std::optional<double> d, fiber_diameter, resolution, margin, plane_distance;
  std::optional<std::string> rod_length, orientation, output_dir;
  std::optional<int> threads;

  void add(CLI::App *app) {
    app->add_option("--d", d, "Rod tip to dipole separation (nm)");
    app->add_option("--rod-length", rod_length, "Rod length in nm, or 'bare'");
    app->add_option("--fiber-diameter", fiber_diameter, "Fiber diameter (nm)");
    app->add_option("--resolution", resolution, "Grid spacing (nm)");
    app->add_option("--margin", margin, "Transverse margin beyond the fiber surface (nm)");
    app->add_option("--plane-distance", plane_distance, "Distance of the mode planes from the scatterer (nm)");
    app->add_option("--orientation", orientation, "Single run with this dipole: x, y, z or 'a,b,c'");
    app->add_option("--output-dir", output_dir, "Output directory");
    app->add_option("--threads", threads, "OpenMP threads (overrides PLASMOFIBER_THREADS)");
  }

  void apply(RunConfig &c) const {
    if (d) c.scene.d_nm = *d;
    if (rod_length) c.scene.rod_length_nm = parse_length(*rod_length);
    if (fiber_diameter) c.scene.fiber_diameter_nm = *fiber_diameter;
    if (resolution) c.scene.resolution_nm = *resolution;
    if (margin) c.scene.transverse_margin_nm = *margin;
    if (plane_distance) c.scene.plane_distance_nm = *plane_distance;
    if (orientation) c.scene.orientation = parse_orientation(*orientation);
    if (output_dir) c.output_dir = *output_dir;
    if (threads) c.threads = *threads;
  }
};

RunConfig base_config(const std::string &path, RunMode mode) {
  RunConfig c = path.empty() ? RunConfig{} : load_config(path);
  c.mode = mode;
  return c;
}

int simulate_single(const RunConfig &c) {
  const Vec3 o = *c.scene.orientation;
  RunCache cache(fs::path(c.output_dir) / "cache");
  RunOptions options;
  options.threads = c.threads;
  const SceneConfig scene = point_scene(c, c.scene.d_nm, c.scene.rod_length_nm, o);
  const FiberSpec fiber{c.scene.fiber_diameter_nm, std::sqrt(scene.materials[1].permittivity), 1.0};
  log_line("dipole run");
  const OrientationData run = cache.get(scene, fiber, options);
  log_line("vacuum reference");
  const OrientationData vac = cache.get(reference_vacuum_scene(c, scene, o), fiber, options);

  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  const Spectrum emitted = emitted_power(run);
  const Spectrum purcell = ratio(emitted, emitted_power(vac));
  write_spectrum_csv(dir / "emitted.csv", emitted);
  write_spectrum_csv(dir / "purcell.csv", purcell);
  json report;
  const MaxPurcell peak = max_purcell(purcell);
  report["orientation"] = {o.x, o.y, o.z};
  report["max_purcell"] = peak.value;
  report["lambda_at_max_nm"] = peak.wavelength_nm;
  if (run.modes) {
    Spectrum guided{run.wavelengths_nm, std::vector<double>(run.wavelengths_nm.size(), 0.0)};
    for (const auto &m : *run.modes)
      for (std::size_t w = 0; w < guided.size(); ++w) guided.values[w] += m.guided_power(w);
    const Spectrum coupling = ratio(guided, emitted);
    write_spectrum_csv(dir / "coupling.csv", coupling);
    report["coupling_qd_weighted"] = weighted_average(coupling.values, c.qd.weights(coupling.wavelengths_nm));
  }
  report["converged"] = run.converged && vac.converged;
  report["plane_too_close"] = run.plane_too_close;
  report["steps"] = run.steps;
  emit_report(report, (dir / "result.json").string());
  std::cout << report.dump(2) << "\n";
  return run.converged && vac.converged ? 0 : 1;
}

int cmd_simulate(const std::string &config_path, const SceneFlags &flags) {
  RunConfig c = base_config(config_path, RunMode::Simulate);
  flags.apply(c);
  c.validate();
  configure_threads(c.threads);
  if (c.scene.orientation) return simulate_single(c);

  RunCache cache(fs::path(c.output_dir) / "cache");
  RunOptions options;
  options.threads = c.threads;
  const PointResult r = simulate_point(c, c.scene.d_nm, c.scene.rod_length_nm, cache, options, log_line);
  const fs::path dir = fs::path(c.output_dir) / point_directory_name(r.d_nm, r.rod_length_nm);
  write_point(dir, r);
  std::ifstream in(dir / "result.json");
  std::cout << in.rdbuf();
  return r.ok ? 0 : 1;
}

int cmd_sweep(const std::string &config_path, const SceneFlags &flags, const std::vector<double> &ds,
              const std::vector<std::string> &lengths, std::optional<int> parallelism) {
  RunConfig c = base_config(config_path, RunMode::Sweep);
  flags.apply(c);
  if (!ds.empty()) c.sweep.d_nm = ds;
  if (!lengths.empty()) {
    c.sweep.rod_length_nm.clear();
    for (const auto &l : lengths) c.sweep.rod_length_nm.push_back(parse_length(l));
  }
  if (parallelism) c.sweep.parallelism = *parallelism;
  c.validate();
  fs::create_directories(c.output_dir);
  std::ofstream(fs::path(c.output_dir) / "config.json") << dump_config(c);
  const SweepSummary s = run_sweep(c, log_line);
  log_line(std::to_string(s.points.size()) + " points, " + std::to_string(s.skipped) + " reused, " +
           std::to_string(s.failed) + " failed; table in " + s.csv.string());
  return s.failed == 0 ? 0 : 1;
}

json fit_json(const AntibunchingFit &f) {
  return {{"T_ns", f.decay_ps * 1e-3},
          {"T_err_ns", f.decay_err_ps * 1e-3},
          {"g2_0", f.g2_zero},
          {"g2_0_err", f.g2_zero_err},
          {"yield_ratio", f.yield_ratio},
          {"chi2", f.chi2},
          {"chi2_flat", f.chi2_flat},
          {"bins_used", f.bins_used}};
}

AntibunchingFit fit_file(const fs::path &file, const AnalyzeSettings &a, TimestampStream *out = nullptr) {
  TimestampStream s = read_timestamps(file);
  const CorrelationHistogram h = correlate(s, a.bin_width_ps, a.max_lag_ps);
  AntibunchingOptions opt;
  opt.jitter_sigma_ps = a.jitter_sigma_ps;
  const AntibunchingFit f = fit_antibunching(h, opt);
  if (out) *out = std::move(s);
  return f;
}

int cmd_analyze_g2(const RunConfig &c, const std::vector<std::string> &files, const std::string &out) {
  json report = json::array();
  int failures = 0;
  for (const auto &file : files) {
    json entry{{"file", file}};
    try {
      const AntibunchingFit f = fit_file(file, c.analyze);
      entry.update(fit_json(f));
    } catch (const Error &e) {
      entry["error_kind"] = to_string(e.kind());
      entry["error"] = e.what();
      ++failures;
    }
    report.push_back(entry);
  }
  emit_report(files.size() == 1 ? report[0] : report, out);
  return failures == 0 ? 0 : 1;
}

int cmd_analyze_power(const RunConfig &c, const std::vector<std::string> &inputs, const std::string &out) {
  std::vector<fs::path> files;
  for (const auto &in : inputs) {
    if (fs::is_directory(in)) {
      for (const auto &e : fs::directory_iterator(in))
        if (e.path().extension() == ".pstm") files.push_back(e.path());
    } else {
      files.push_back(in);
    }
  }
  std::sort(files.begin(), files.end());
  json report;
  std::vector<PowerPoint> points;
  for (const auto &file : files) {
    TimestampStream s;
    const AntibunchingFit f = fit_file(file, c.analyze, &s);
    if (!s.excitation_power_uw)
      throw Error(ErrorKind::InvalidArgument, file.string() + " has no excitation_power_uW in its sidecar");
    points.push_back({*s.excitation_power_uw, f.decay_ps * 1e-3, f.decay_err_ps * 1e-3});
    json entry = fit_json(f);
    entry["file"] = file.string();
    entry["power_uW"] = *s.excitation_power_uw;
    report["streams"].push_back(entry);
  }
  const PowerFit p = fit_power_dependence(points);
  report["alpha_per_ns_uW"] = p.alpha;
  report["alpha_err"] = p.alpha_err;
  report["tau1_ns"] = number_or_null(p.tau1_ns);
  report["tau1_err_ns"] = number_or_null(p.tau1_err_ns);
  report["negative_intercept"] = p.negative_intercept;
  report["chi2"] = p.chi2;
  emit_report(report, out);
  return 0;
}

int cmd_analyze_hwp(const std::string &file, const std::string &out) {
  const HwpFit f = dop_from_hwp_scan(read_hwp_csv(file));
  if (f.negative_min) log_line("warning: fitted minimum below zero, clipped");
  emit_report({{"P", f.dop},
               {"P_err", f.dop_err},
               {"phase_deg", f.phase_deg},
               {"i_max", f.i_max},
               {"i_min", f.i_min},
               {"negative_min", f.negative_min}},
              out);
  return 0;
}

struct SynthFlags {
  std::optional<double> tau1, alpha, power, efficiency, dark, jitter, duration, dop;
  std::optional<int> emitters, samples;
  std::vector<double> powers, angles;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;

  void add(CLI::App *app) {
    app->add_option("--tau1-ns", tau1, "Emitter lifetime (ns)");
    app->add_option("--alpha", alpha, "Excitation coefficient (1/(ns uW))");
    app->add_option("--power-uw", power, "Excitation power (uW)");
    app->add_option("--emitters", emitters, "Independent emitters");
    app->add_option("--efficiency", efficiency, "Detection efficiency");
    app->add_option("--dark-rate-hz", dark, "Dark counts per channel (Hz)");
    app->add_option("--jitter-ps", jitter, "Timing jitter sigma (ps)");
    app->add_option("--duration-s", duration, "Acquisition time (s)");
    app->add_option("--powers-uw", powers, "Power series (one stream per power)");
    app->add_option("--dop", dop, "Degree of polarization for HWP scans");
    app->add_option("--angles-deg", angles, "HWP angles");
    app->add_option("--samples-per-angle", samples, "Ratio samples per HWP angle");
    app->add_option("--output-dir", output_dir, "Output directory");
    app->add_option("--seed", seed, "Random seed");
  }

  void apply(RunConfig &c) const {
    SynthSettings &s = c.synth;
    if (tau1) s.emitter.tau1_ns = *tau1;
    if (alpha) s.emitter.alpha = *alpha;
    if (power) s.emitter.power_uw = *power;
    if (emitters) s.emitter.emitters = *emitters;
    if (efficiency) s.detector.efficiency = *efficiency;
    if (dark) s.detector.dark_rate_hz = *dark;
    if (jitter) s.detector.jitter_sigma_ps = *jitter;
    if (duration) s.duration_s = *duration;
    if (!powers.empty()) s.powers_uw = powers;
    if (dop) s.dop = *dop;
    if (!angles.empty()) s.angles_deg = angles;
    if (samples) s.samples_per_angle = *samples;
    if (output_dir) c.output_dir = *output_dir;
    if (seed) c.seed = *seed;
  }
};

int cmd_synth(const std::string &config_path, const SynthFlags &flags, const std::string &kind) {
  RunConfig c = base_config(config_path, RunMode::Synthesize);
  flags.apply(c);
  c.validate();
  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  const SynthSettings &s = c.synth;
  if (kind == "hwp") {
    std::vector<double> angles = s.angles_deg;
    if (angles.empty())
      for (int a = 0; a <= 180; a += 10) angles.push_back(a);
    HwpSynthOptions opt;
    opt.samples_per_angle = s.samples_per_angle;
    opt.mean_counts = s.mean_counts;
    write_hwp_csv(dir / "hwp.csv", synthesize_hwp_scan(s.emitter, s.dop, angles, c.seed, opt));
    log_line("wrote " + (dir / "hwp.csv").string());
    return 0;
  }
  std::vector<double> powers = s.powers_uw;
  if (kind == "stream" || powers.empty()) powers = {s.emitter.power_uw};
  std::uint64_t seed = c.seed;
  for (double p : powers) {
    EmitterModel em = s.emitter;
    em.power_uw = p;
    const TimestampStream stream = generate_stream(em, s.detector, s.duration_s, seed++);
    std::ostringstream name;
    name << "stream_P" << p << "uW.pstm";
    write_timestamps(dir / name.str(), stream);
    log_line("wrote " + (dir / name.str()).string() + " (" + std::to_string(stream.events.size()) + " events)");
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Nanofiber / nanorod FDTD and photon-statistics toolkit"};
  app.require_subcommand(1);
  std::string config_path;

  auto *simulate = app.add_subcommand("simulate", "Simulate one (d, L) point or one dipole run");
  simulate->add_option("--config", config_path, "JSON run configuration");
  SceneFlags sim_flags;
  sim_flags.add(simulate);

  auto *sweep = app.add_subcommand("sweep", "Sweep d and rod length, resumable");
  sweep->add_option("--config", config_path, "JSON run configuration");
  SceneFlags sweep_flags;
  sweep_flags.add(sweep);
  std::vector<double> sweep_d;
  std::vector<std::string> sweep_lengths;
  std::optional<int> parallelism;
  sweep->add_option("--d-list", sweep_d, "Separations (nm)");
  sweep->add_option("--rod-length-list", sweep_lengths, "Rod lengths (nm or 'bare')");
  sweep->add_option("--parallelism", parallelism, "Points run concurrently");

  auto *analyze = app.add_subcommand("analyze", "Fit photon-statistics data");
  analyze->require_subcommand(1);
  std::string report_out;
  std::optional<double> bin_width, max_lag, jitter;
  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--out", report_out, "Report file (default: stdout)");
  };
  auto add_histogram = [&](CLI::App *sub) {
    sub->add_option("--bin-width-ps", bin_width, "Histogram bin width (ps)");
    sub->add_option("--max-lag-ps", max_lag, "Histogram half range (ps)");
    sub->add_option("--jitter-ps", jitter, "Detector jitter sigma (ps)");
  };
  std::vector<std::string> inputs;
  auto *g2 = analyze->add_subcommand("g2", "Antibunching fit of timestamp files");
  add_common(g2);
  add_histogram(g2);
  g2->add_option("files", inputs, "Timestamp files")->required();
  auto *power = analyze->add_subcommand("power", "Lifetime versus excitation power");
  add_common(power);
  add_histogram(power);
  power->add_option("inputs", inputs, "Timestamp files or directories")->required();
  std::string hwp_file;
  auto *hwp = analyze->add_subcommand("hwp", "Degree of polarization from a HWP scan CSV");
  add_common(hwp);
  hwp->add_option("file", hwp_file, "CSV with angle_deg,i_frac")->required();

  auto *synth = app.add_subcommand("synth", "Generate synthetic detector data");
  synth->add_option("--config", config_path, "JSON run configuration");
  SynthFlags synth_flags;
  synth_flags.add(synth);
  std::string kind = "stream";
  synth->add_option("--kind", kind, "stream, power-series or hwp")
      ->check(CLI::IsMember({"stream", "power-series", "hwp"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, sim_flags);
    if (sweep->parsed()) return cmd_sweep(config_path, sweep_flags, sweep_d, sweep_lengths, parallelism);
    if (synth->parsed()) return cmd_synth(config_path, synth_flags, kind);
    if (analyze->parsed()) {
      RunConfig c = base_config(config_path, RunMode::Analyze);
      if (bin_width) c.analyze.bin_width_ps = *bin_width;
      if (max_lag) c.analyze.max_lag_ps = *max_lag;
      if (jitter) c.analyze.jitter_sigma_ps = *jitter;
      c.validate();
      if (g2->parsed()) return cmd_analyze_g2(c, inputs, report_out);
      if (power->parsed()) return cmd_analyze_power(c, inputs, report_out);
      if (hwp->parsed()) return cmd_analyze_hwp(hwp_file, report_out);
    }
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::ParseError ? 3 : 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

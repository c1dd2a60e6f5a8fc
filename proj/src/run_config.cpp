#include "plasmofiber/run_config.hpp"

#include "plasmofiber/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace plasmofiber {

using nlohmann::json;

const char *to_string(RunMode mode) {
  switch (mode) {
  case RunMode::Simulate: return "simulate";
  case RunMode::Sweep: return "sweep";
  case RunMode::Analyze: return "analyze";
  case RunMode::Synthesize: return "synthesize";
  }
  return "?";
}

std::vector<double> WavelengthGrid::values() const {
  std::vector<double> out;
  const long n = std::lround((stop_nm - start_nm) / step_nm);
  for (long i = 0; i <= n; ++i) out.push_back(start_nm + static_cast<double>(i) * step_nm);
  return out;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string &what) {
    if (!ok) throw Error(ErrorKind::InvalidArgument, what);
  };
  const SceneSettings &s = scene;
  require(s.resolution_nm >= 1.0 && s.resolution_nm <= 20.0, "resolution must lie in [1, 20] nm");
  require(s.d_nm >= 0.0, "d must be non-negative");
  require(!s.rod_length_nm || *s.rod_length_nm > 0.0, "rod length must be positive");
  require(s.fiber_diameter_nm > 0.0, "fiber diameter must be positive");
  require(s.transverse_margin_nm > 0.0 && s.plane_distance_nm > 0.0, "margins must be positive");
  require(s.cpml_thickness >= 8, "CPML needs at least 8 cells");
  require(s.vacuum_half_width_nm > 0.0, "vacuum half width must be positive");
  require(s.max_steps > 0 && s.decay_threshold > 0.0 && s.decay_threshold < 1.0, "bad run limits");
  if (s.orientation) require(std::abs(s.orientation->norm() - 1.0) < 1e-9, "orientation must be a unit vector");
  require(wavelengths.step_nm > 0.0 && wavelengths.stop_nm >= wavelengths.start_nm && wavelengths.start_nm > 0.0,
          "bad wavelength grid");
  qd.validate();
  if (mode == RunMode::Sweep) {
    require(!sweep.d_nm.empty() && !sweep.rod_length_nm.empty(), "sweep lists must be nonempty");
    for (double d : sweep.d_nm) require(d >= 0.0, "sweep d values must be non-negative");
    for (const auto &l : sweep.rod_length_nm) require(!l || *l > 0.0, "sweep rod lengths must be positive");
  }
  require(sweep.parallelism >= 1, "parallelism must be at least 1");
  require(analyze.bin_width_ps > 0.0 && analyze.max_lag_ps >= analyze.bin_width_ps, "bad histogram settings");
  require(analyze.jitter_sigma_ps >= 0.0, "jitter must be non-negative");
  synth.emitter.validate();
  synth.detector.validate();
  require(synth.duration_s > 0.0, "synthesis duration must be positive");
  require(synth.dop >= 0.0 && synth.dop <= 1.0, "synthesized DOP must lie in [0, 1]");
  require(synth.samples_per_angle >= 1 && synth.mean_counts > 0.0, "bad HWP synthesis settings");
  require(threads >= 0, "threads must be non-negative");
}

namespace {

// Reads keys from an object and complains about anything left over.
class Reader {
public:
  Reader(const json &j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw Error(ErrorKind::InvalidArgument, where_ + " must be an object");
  }

  template <typename T> void get(const char *key, T &out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception &e) {
      throw Error(ErrorKind::InvalidArgument, where_ + "." + key + ": " + e.what());
    }
  }

  void get_optional(const char *key, std::optional<double> &out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (j_.at(key).is_null()) {
      out.reset();
      return;
    }
    double v = 0.0;
    get(key, v);
    out = v;
  }

  const json *child(const char *key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto &[key, value] : j_.items())
      if (!seen_.count(key)) throw Error(ErrorKind::InvalidArgument, "unknown key " + where_ + "." + key);
  }

private:
  const json &j_;
  std::string where_;
  std::set<std::string> seen_;
};

Vec3 vec_from(const json &j, const std::string &where) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::InvalidArgument, where + " must be [x, y, z]");
  try {
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  } catch (const json::exception &e) {
    throw Error(ErrorKind::InvalidArgument, where + ": " + e.what());
  }
}

json optional_json(const std::optional<double> &v) { return v ? json(*v) : json(nullptr); }

RunMode mode_from(const std::string &s) {
  for (RunMode m : {RunMode::Simulate, RunMode::Sweep, RunMode::Analyze, RunMode::Synthesize})
    if (s == to_string(m)) return m;
  throw Error(ErrorKind::InvalidArgument, "unknown mode '" + s + "'");
}

} // namespace

RunConfig parse_config(const std::string &text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(e.byte, std::string("config: ") + e.what());
  }
  RunConfig c;
  Reader r(root, "config");
  std::string mode = to_string(c.mode);
  r.get("mode", mode);
  c.mode = mode_from(mode);
  r.get("output_dir", c.output_dir);
  r.get("seed", c.seed);
  r.get("threads", c.threads);

  if (const json *j = r.child("scene")) {
    SceneSettings &s = c.scene;
    Reader q(*j, "scene");
    q.get("d_nm", s.d_nm);
    q.get_optional("rod_length_nm", s.rod_length_nm);
    q.get("fiber_diameter_nm", s.fiber_diameter_nm);
    q.get("resolution_nm", s.resolution_nm);
    if (const json *o = q.child("orientation")) {
      if (o->is_null())
        s.orientation.reset();
      else
        s.orientation = vec_from(*o, "scene.orientation");
    }
    q.get("tilt_deg", s.tilt_deg);
    q.get("transverse_margin_nm", s.transverse_margin_nm);
    q.get("plane_distance_nm", s.plane_distance_nm);
    q.get("cpml_thickness", s.cpml_thickness);
    q.get("radiation_box", s.radiation_box);
    q.get("vacuum_half_width_nm", s.vacuum_half_width_nm);
    q.get("max_steps", s.max_steps);
    q.get("decay_threshold", s.decay_threshold);
    q.finish();
  }
  if (const json *j = r.child("qd")) {
    Reader q(*j, "qd");
    q.get("center_nm", c.qd.center_nm);
    q.get("fwhm_nm", c.qd.fwhm_nm);
    q.finish();
  }
  if (const json *j = r.child("wavelengths")) {
    Reader q(*j, "wavelengths");
    q.get("start_nm", c.wavelengths.start_nm);
    q.get("stop_nm", c.wavelengths.stop_nm);
    q.get("step_nm", c.wavelengths.step_nm);
    q.finish();
  }
  if (const json *j = r.child("sweep")) {
    Reader q(*j, "sweep");
    q.get("d_nm", c.sweep.d_nm);
    if (const json *l = q.child("rod_length_nm")) {
      if (!l->is_array()) throw Error(ErrorKind::InvalidArgument, "sweep.rod_length_nm must be a list");
      c.sweep.rod_length_nm.clear();
      for (const json &v : *l) {
        if (v.is_null())
          c.sweep.rod_length_nm.emplace_back();
        else if (v.is_number())
          c.sweep.rod_length_nm.emplace_back(v.get<double>());
        else
          throw Error(ErrorKind::InvalidArgument, "sweep.rod_length_nm entries must be numbers or null");
      }
    }
    q.get("parallelism", c.sweep.parallelism);
    q.finish();
  }
  if (const json *j = r.child("analyze")) {
    Reader q(*j, "analyze");
    q.get("bin_width_ps", c.analyze.bin_width_ps);
    q.get("max_lag_ps", c.analyze.max_lag_ps);
    q.get("jitter_sigma_ps", c.analyze.jitter_sigma_ps);
    q.finish();
  }
  if (const json *j = r.child("synth")) {
    SynthSettings &s = c.synth;
    Reader q(*j, "synth");
    q.get("tau1_ns", s.emitter.tau1_ns);
    q.get("alpha", s.emitter.alpha);
    q.get("power_uw", s.emitter.power_uw);
    q.get("emitters", s.emitter.emitters);
    q.get("dop_angle_deg", s.emitter.dop_angle_deg);
    q.get("efficiency", s.detector.efficiency);
    q.get("dark_rate_hz", s.detector.dark_rate_hz);
    q.get("jitter_sigma_ps", s.detector.jitter_sigma_ps);
    q.get("split_plus", s.detector.split_plus);
    q.get("duration_s", s.duration_s);
    q.get("powers_uw", s.powers_uw);
    q.get("dop", s.dop);
    q.get("angles_deg", s.angles_deg);
    q.get("samples_per_angle", s.samples_per_angle);
    q.get("mean_counts", s.mean_counts);
    q.finish();
  }
  r.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig &c) {
  json root;
  root["mode"] = to_string(c.mode);
  root["output_dir"] = c.output_dir;
  root["seed"] = c.seed;
  root["threads"] = c.threads;

  const SceneSettings &s = c.scene;
  json &scene = root["scene"];
  scene["d_nm"] = s.d_nm;
  scene["rod_length_nm"] = optional_json(s.rod_length_nm);
  scene["fiber_diameter_nm"] = s.fiber_diameter_nm;
  scene["resolution_nm"] = s.resolution_nm;
  scene["orientation"] = s.orientation ? json::array({s.orientation->x, s.orientation->y, s.orientation->z})
                                       : json(nullptr);
  scene["tilt_deg"] = s.tilt_deg;
  scene["transverse_margin_nm"] = s.transverse_margin_nm;
  scene["plane_distance_nm"] = s.plane_distance_nm;
  scene["cpml_thickness"] = s.cpml_thickness;
  scene["radiation_box"] = s.radiation_box;
  scene["vacuum_half_width_nm"] = s.vacuum_half_width_nm;
  scene["max_steps"] = s.max_steps;
  scene["decay_threshold"] = s.decay_threshold;

  root["qd"] = {{"center_nm", c.qd.center_nm}, {"fwhm_nm", c.qd.fwhm_nm}};
  root["wavelengths"] = {
      {"start_nm", c.wavelengths.start_nm}, {"stop_nm", c.wavelengths.stop_nm}, {"step_nm", c.wavelengths.step_nm}};

  json lengths = json::array();
  for (const auto &l : c.sweep.rod_length_nm) lengths.push_back(optional_json(l));
  root["sweep"] = {{"d_nm", c.sweep.d_nm}, {"rod_length_nm", lengths}, {"parallelism", c.sweep.parallelism}};
  root["analyze"] = {{"bin_width_ps", c.analyze.bin_width_ps},
                     {"max_lag_ps", c.analyze.max_lag_ps},
                     {"jitter_sigma_ps", c.analyze.jitter_sigma_ps}};

  const SynthSettings &y = c.synth;
  root["synth"] = {{"tau1_ns", y.emitter.tau1_ns},
                   {"alpha", y.emitter.alpha},
                   {"power_uw", y.emitter.power_uw},
                   {"emitters", y.emitter.emitters},
                   {"dop_angle_deg", y.emitter.dop_angle_deg},
                   {"efficiency", y.detector.efficiency},
                   {"dark_rate_hz", y.detector.dark_rate_hz},
                   {"jitter_sigma_ps", y.detector.jitter_sigma_ps},
                   {"split_plus", y.detector.split_plus},
                   {"duration_s", y.duration_s},
                   {"powers_uw", y.powers_uw},
                   {"dop", y.dop},
                   {"angles_deg", y.angles_deg},
                   {"samples_per_angle", y.samples_per_angle},
                   {"mean_counts", y.mean_counts}};
  return root.dump(2) + "\n";
}

} // namespace plasmofiber

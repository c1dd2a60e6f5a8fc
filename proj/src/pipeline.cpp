#include "plasmofiber/pipeline.hpp"

#include "plasmofiber/errors.hpp"

#include <json.hpp>

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

namespace plasmofiber {

using nlohmann::json;

namespace {

constexpr const char *kProbeNames[3] = {"dipole_x", "dipole_y", "dipole_z"};
constexpr Vec3 kAxes[3] = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
constexpr const char *kAxisTags[3] = {"x", "y", "z"};

void add_dipole_probes(SceneConfig &s) {
  for (int a = 0; a < 3; ++a) s.probes.push_back({kProbeNames[a], s.dipole.position, kAxes[a]});
}

FiberSpec fiber_of(const SceneConfig &s) {
  FiberSpec f;
  f.diameter_nm = s.fiber_diameter_nm > 0.0 ? s.fiber_diameter_nm : 530.0;
  f.core_index = s.materials.size() > 1 ? std::sqrt(s.materials[1].permittivity) : kSilicaIndexFdtd;
  return f;
}

SceneOptions options_from(const RunConfig &c) {
  SceneOptions o;
  o.resolution_nm = c.scene.resolution_nm;
  o.transverse_margin_nm = c.scene.transverse_margin_nm;
  o.plane_distance_nm = c.scene.plane_distance_nm;
  o.cpml.thickness = c.scene.cpml_thickness;
  o.wavelengths_nm = c.wavelengths.values();
  return o;
}

void apply_limits(const RunConfig &c, SceneConfig &s) {
  s.max_steps = c.scene.max_steps;
  s.decay_threshold = c.scene.decay_threshold;
}

// Axial extent of everything that scatters: the dipole and any capsule.
std::pair<double, double> scatter_range(const SceneConfig &s) {
  double lo = s.dipole.position.z, hi = lo;
  for (const auto &ps : s.shapes)
    if (const auto *c = std::get_if<Capsule>(&ps.shape)) {
      lo = std::min(lo, c->center.z - 0.5 * c->length);
      hi = std::max(hi, c->center.z + 0.5 * c->length);
    }
  return {lo, hi};
}

json complex_list(const std::vector<cplx> &v) {
  json out = json::array();
  for (const cplx &c : v) out.push_back({c.real(), c.imag()});
  return out;
}

std::vector<cplx> complex_from(const json &j) {
  std::vector<cplx> out;
  for (const json &c : j) out.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
  return out;
}

json vec_json(Vec3 v) { return json::array({v.x, v.y, v.z}); }
Vec3 vec_from(const json &j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

json model_json(const DrudeLorentzModel &m) {
  json poles = json::array();
  for (const auto &p : m.lorentz_poles) poles.push_back({p.strength, p.frequency, p.damping});
  return {{"eps_inf", m.eps_inf}, {"wp", m.plasma_frequency}, {"gamma", m.collision_rate}, {"poles", poles}};
}

json scene_json(const SceneConfig &s) {
  json j;
  j["format"] = "orientation-data-1";
  j["grid"] = {{"extent", s.grid.extent}, {"resolution", s.grid.resolution}, {"origin", vec_json(s.grid.origin)}};
  json mats = json::array();
  for (const auto &m : s.materials)
    mats.push_back({{"name", m.name}, {"eps", m.permittivity},
                    {"model", m.dispersion ? model_json(*m.dispersion) : json(nullptr)}});
  j["materials"] = mats;
  json shapes = json::array();
  for (const auto &ps : s.shapes) {
    json sh = std::visit(
        [](const auto &v) -> json {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Cylinder>)
            return {{"cylinder", {v.axis, vec_json(v.center), v.radius, std::isfinite(v.length) ? v.length : -1.0}}};
          else if constexpr (std::is_same_v<T, Capsule>)
            return {{"capsule", {v.axis, vec_json(v.center), v.length, v.diameter}}};
          else
            return {{"block", {vec_json(v.corner), vec_json(v.size)}}};
        },
        ps.shape);
    sh["material"] = ps.material;
    shapes.push_back(sh);
  }
  j["shapes"] = shapes;
  const auto &p = s.dipole.pulse;
  j["dipole"] = {{"position", vec_json(s.dipole.position)},
                 {"orientation", vec_json(s.dipole.orientation)},
                 {"hard", s.dipole.hard},
                 {"pulse", {p.center_wavelength_nm, p.relative_width, p.amplitude}}};
  json boxes = json::array(), planes = json::array(), probes = json::array();
  for (const auto &b : s.boxes) boxes.push_back({b.name, vec_json(b.lo), vec_json(b.hi)});
  for (const auto &pl : s.planes) planes.push_back({pl.name, pl.normal_axis, pl.position_nm});
  for (const auto &pr : s.probes) probes.push_back({pr.name, vec_json(pr.position), vec_json(pr.orientation)});
  j["boxes"] = boxes;
  j["planes"] = planes;
  j["probes"] = probes;
  j["wavelengths"] = s.wavelengths_nm;
  j["cpml"] = {s.cpml.thickness, s.cpml.order, s.cpml.sigma_max_factor, s.cpml.kappa_max, s.cpml.alpha_max};
  j["courant"] = s.courant_safety;
  j["max_steps"] = s.max_steps;
  j["decay"] = s.decay_threshold;
  j["dft_stride"] = s.dft_stride;
  j["fiber_diameter"] = s.fiber_diameter_nm;
  return j;
}

void write_atomically(const std::filesystem::path &path, const std::string &text) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorKind::InvalidArgument, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

json read_json(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw ParseError(e.byte, path.string() + ": " + e.what());
  }
}

std::string format_number(double v) {
  std::ostringstream ss;
  ss << std::setprecision(12) << v;
  return ss.str();
}

} // namespace

Spectrum emitted_power(const OrientationData &run) {
  Spectrum s{run.wavelengths_nm, {}};
  for (std::size_t w = 0; w < run.wavelengths_nm.size(); ++w) {
    cplx field{};
    for (int a = 0; a < 3; ++a) field += run.orientation[a] * run.probe[a][w];
    s.values.push_back(-0.5 * field.real());
  }
  return s;
}

Spectrum OrientationSet::emitted(Vec3 p) const {
  const auto &wl = runs[0].wavelengths_nm;
  Spectrum s{wl, {}};
  for (std::size_t w = 0; w < wl.size(); ++w) {
    cplx field{};
    for (int o = 0; o < 3; ++o)
      for (int a = 0; a < 3; ++a) field += p[a] * p[o] * runs[o].probe[a][w];
    s.values.push_back(-0.5 * field.real());
  }
  return s;
}

Spectrum OrientationSet::guided(Vec3 p) const {
  const auto &wl = runs[0].wavelengths_nm;
  for (const auto &r : runs)
    if (!r.modes) throw Error(ErrorKind::InvalidArgument, "run has no mode projections");
  Spectrum s{wl, std::vector<double>(wl.size(), 0.0)};
  for (int dir = 0; dir < 2; ++dir)
    for (int pol = 0; pol < 2; ++pol)
      for (std::size_t w = 0; w < wl.size(); ++w) {
        cplx amp{};
        for (int o = 0; o < 3; ++o) amp += p[o] * (*runs[o].modes)[dir].amplitude[pol][w];
        s.values[w] += std::norm(amp) * (*runs[0].modes)[dir].mode_power[pol][w];
      }
  return s;
}

bool OrientationSet::converged() const {
  return std::all_of(runs.begin(), runs.end(), [](const OrientationData &r) { return r.converged; });
}

bool OrientationSet::plane_too_close() const {
  return std::any_of(runs.begin(), runs.end(), [](const OrientationData &r) { return r.plane_too_close; });
}

Vec3 tilted_dipole(double angle_deg, bool toward_x) {
  const double a = angle_deg * kPi / 180.0;
  return toward_x ? Vec3{std::sin(a), 0.0, std::cos(a)} : Vec3{0.0, std::sin(a), std::cos(a)};
}

OrientationData summarize_run(const SceneConfig &scene, const MonitorSet &m, const FiberSpec &fiber) {
  OrientationData d;
  d.orientation = scene.dipole.orientation;
  d.resolution_nm = scene.grid.resolution;
  d.wavelengths_nm = m.wavelengths_nm;
  d.steps = m.steps;
  d.converged = m.converged;
  for (int a = 0; a < 3; ++a) d.probe[a] = probe_response(m, kProbeNames[a]);
  const auto has_plane = [&](const char *name) {
    return std::any_of(m.planes.begin(), m.planes.end(), [&](const DftPlane &p) { return p.name == name; });
  };
  if (has_plane("mode_minus") && has_plane("mode_plus")) {
    const auto [lo, hi] = scatter_range(scene);
    const double z_minus = m.grid.origin.z + m.plane("mode_minus").index * m.grid.resolution;
    const double z_plus = m.grid.origin.z + m.plane("mode_plus").index * m.grid.resolution;
    d.plane_too_close = std::min(lo - z_minus, z_plus - hi) < kMinPlaneDistance;
    d.modes = std::array<ModeAmplitudes, 2>{mode_amplitudes(m, m.plane("mode_minus"), fiber, -1),
                                            mode_amplitudes(m, m.plane("mode_plus"), fiber, 1)};
  }
  if (std::any_of(m.boxes.begin(), m.boxes.end(), [](const DftBox &b) { return b.name == "radiation"; }))
    d.radiated = flux_spectrum(m, m.box("radiation"));
  return d;
}

std::string scene_fingerprint(const SceneConfig &scene) {
  const std::string text = scene_json(scene).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_orientation_data(const std::filesystem::path &path, const OrientationData &d) {
  json j;
  j["orientation"] = vec_json(d.orientation);
  j["resolution_nm"] = d.resolution_nm;
  j["wavelengths_nm"] = d.wavelengths_nm;
  j["probe"] = {complex_list(d.probe[0]), complex_list(d.probe[1]), complex_list(d.probe[2])};
  if (d.modes) {
    json modes = json::array();
    for (const auto &m : *d.modes)
      modes.push_back({{"amplitude", {complex_list(m.amplitude[0]), complex_list(m.amplitude[1])}},
                       {"mode_power", {m.mode_power[0], m.mode_power[1]}}});
    j["modes"] = modes;
  }
  if (d.radiated) j["radiated"] = d.radiated->values;
  j["steps"] = d.steps;
  j["converged"] = d.converged;
  j["plane_too_close"] = d.plane_too_close;
  write_atomically(path, j.dump() + "\n");
}

OrientationData read_orientation_data(const std::filesystem::path &path) {
  const json j = read_json(path);
  OrientationData d;
  try {
    d.orientation = vec_from(j.at("orientation"));
    d.resolution_nm = j.at("resolution_nm").get<double>();
    d.wavelengths_nm = j.at("wavelengths_nm").get<std::vector<double>>();
    for (int a = 0; a < 3; ++a) d.probe[a] = complex_from(j.at("probe").at(a));
    if (j.contains("modes")) {
      std::array<ModeAmplitudes, 2> modes;
      for (int dir = 0; dir < 2; ++dir) {
        const json &m = j.at("modes").at(dir);
        modes[dir].wavelengths_nm = d.wavelengths_nm;
        for (int pol = 0; pol < 2; ++pol) {
          modes[dir].amplitude[pol] = complex_from(m.at("amplitude").at(pol));
          modes[dir].mode_power[pol] = m.at("mode_power").at(pol).get<std::vector<double>>();
        }
      }
      d.modes = modes;
    }
    if (j.contains("radiated")) d.radiated = Spectrum{d.wavelengths_nm, j.at("radiated").get<std::vector<double>>()};
    d.steps = j.at("steps").get<long>();
    d.converged = j.at("converged").get<bool>();
    d.plane_too_close = j.at("plane_too_close").get<bool>();
  } catch (const json::exception &e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  return d;
}

RunCache::RunCache(std::filesystem::path directory) : dir_(std::move(directory)) {
  if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

OrientationData RunCache::get(const SceneConfig &scene, const FiberSpec &fiber, const RunOptions &options) {
  const std::string key = scene_fingerprint(scene);
  std::promise<OrientationData> promise;
  std::shared_future<OrientationData> future;
  bool owner = false;
  {
    std::lock_guard lock(mutex_);
    auto it = pending_.find(key);
    if (it != pending_.end()) {
      future = it->second;
    } else {
      future = promise.get_future().share();
      pending_.emplace(key, future);
      owner = true;
    }
  }
  if (!owner) return future.get();

  try {
    const auto file = dir_.empty() ? std::filesystem::path{} : dir_ / (key + ".json");
    OrientationData d;
    if (!file.empty() && std::filesystem::exists(file)) {
      d = read_orientation_data(file);
    } else {
      d = summarize_run(scene, run(scene, options), fiber);
      if (!file.empty()) write_orientation_data(file, d);
      std::lock_guard lock(mutex_);
      ++computed_;
    }
    promise.set_value(d);
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard lock(mutex_);
    pending_.erase(key); // let a later request retry
  }
  return future.get();
}

SceneConfig point_scene(const RunConfig &c, double d, std::optional<double> rod_length, Vec3 orientation) {
  SceneOptions opt = options_from(c);
  opt.radiation_box = c.scene.radiation_box && rod_length.has_value();
  SceneConfig s = fiber_rod_scene(d, rod_length, c.scene.fiber_diameter_nm, orientation, opt);
  apply_limits(c, s);
  add_dipole_probes(s);
  return s;
}

SceneConfig reference_vacuum_scene(const RunConfig &c, const SceneConfig &point, Vec3 orientation) {
  const double res = point.grid.resolution;
  Vec3 offset;
  for (int a = 0; a < 3; ++a) {
    const double rel = (point.dipole.position[a] - point.grid.origin[a]) / res;
    offset[a] = (rel - std::floor(rel + 1e-9)) * res;
    if (std::abs(offset[a]) < 1e-9 * res) offset[a] = 0.0;
  }
  SceneOptions opt = options_from(c);
  opt.resolution_nm = res;
  SceneConfig s = vacuum_scene(res, orientation, c.scene.vacuum_half_width_nm, offset, std::nullopt, opt);
  apply_limits(c, s);
  add_dipole_probes(s);
  return s;
}

SceneConfig reference_bare_scene(const RunConfig &c, const SceneConfig &point, Vec3 orientation) {
  const double res = point.grid.resolution;
  double dz = std::fmod(point.dipole.position.z, res);
  if (dz < 0.0) dz += res;
  if (std::abs(dz - res) < 1e-9 * res || std::abs(dz) < 1e-9 * res) dz = 0.0;
  SceneOptions opt = options_from(c);
  opt.radiation_box = false;
  SceneConfig s = fiber_rod_scene(dz, std::nullopt, c.scene.fiber_diameter_nm, orientation, opt);
  apply_limits(c, s);
  add_dipole_probes(s);
  return s;
}

std::string point_directory_name(double d, std::optional<double> rod_length) {
  return "L" + (rod_length ? format_number(*rod_length) : std::string("bare")) + "_d" + format_number(d);
}

PointResult simulate_point(const RunConfig &c, double d, std::optional<double> rod_length, RunCache &cache,
                           const RunOptions &options, const LogFn &log) {
  PointResult r;
  r.d_nm = d;
  r.rod_length_nm = rod_length;
  const std::string tag = point_directory_name(d, rod_length);
  try {
    OrientationSet rod, bare;
    std::array<Spectrum, 3> vac;
    for (int o = 0; o < 3; ++o) {
      const SceneConfig scene = point_scene(c, d, rod_length, kAxes[o]);
      const FiberSpec fiber = fiber_of(scene);
      if (log) log(tag + ": " + kAxisTags[o] + " dipole with scatterer");
      rod.runs[o] = cache.get(scene, fiber, options);
      if (log) log(tag + ": " + kAxisTags[o] + " dipole on the bare fiber");
      bare.runs[o] = cache.get(reference_bare_scene(c, scene, kAxes[o]), fiber, options);
      if (log) log(tag + ": " + kAxisTags[o] + " dipole in vacuum");
      const SceneConfig vac_scene = reference_vacuum_scene(c, scene, kAxes[o]);
      vac[o] = emitted_power(cache.get(vac_scene, fiber, options));
    }

    PointSpectra sp;
    const auto &wl = rod.runs[0].wavelengths_nm;
    sp.purcell.wavelengths_nm = sp.bare_purcell.wavelengths_nm = wl;
    sp.coupling.wavelengths_nm = sp.bare_coupling.wavelengths_nm = wl;
    for (int o = 0; o < 3; ++o) {
      sp.purcell.f[o] = purcell_spectrum(rod.emitted(kAxes[o]), vac[o]).values;
      sp.bare_purcell.f[o] = purcell_spectrum(bare.emitted(kAxes[o]), vac[o]).values;
      sp.coupling.t[o] = rod.coupling(kAxes[o]).values;
      sp.bare_coupling.t[o] = bare.coupling(kAxes[o]).values;
    }
    const Vec3 tilt = tilted_dipole(c.scene.tilt_deg);
    sp.tilt_coupling = rod.coupling(tilt);
    sp.bare_tilt_coupling = bare.coupling(tilt);

    const auto w = c.qd.weights(wl);
    ObservablesResult &ob = r.observables;
    ob.d_nm = d;
    ob.rod_length_nm = rod_length;
    ob.resolution_nm = c.scene.resolution_nm;
    const Spectrum fz{wl, sp.purcell.f[2]};
    const MaxPurcell peak = max_purcell(fz);
    ob.f_pz = peak.value;
    ob.lambda_at_max_nm = peak.wavelength_nm;
    ob.dop = dop_from_triple(sp.coupling, c.qd, sp.purcell);
    ob.dop_unweighted = dop_from_triple(sp.coupling, c.qd);
    ob.enhancement = intensity_enhancement(sp.coupling, sp.purcell, sp.bare_coupling, sp.bare_purcell, c.qd);
    PurcellSpectrum ones{wl, {}};
    for (auto &f : ones.f) f.assign(wl.size(), 1.0);
    ob.enhancement_unweighted = intensity_enhancement(sp.coupling, ones, sp.bare_coupling, ones, c.qd);
    if (rod.runs[2].radiated) {
      const auto it = std::find(wl.begin(), wl.end(), peak.wavelength_nm);
      const std::size_t i = static_cast<std::size_t>(it - wl.begin());
      ob.radiative_efficiency_z = rod.runs[2].radiated->values[i] / emitted_power(rod.runs[2]).values[i];
    }

    for (int o = 0; o < 3; ++o) {
      r.coupling_mean += weighted_average(sp.coupling.t[o], w) / 3.0;
      r.bare_coupling_mean += weighted_average(sp.bare_coupling.t[o], w) / 3.0;
    }
    r.tilt_coupling = weighted_average(sp.tilt_coupling.values, w);
    r.bare_tilt_coupling = weighted_average(sp.bare_tilt_coupling.values, w);
    r.bare_tilt_coupling_xz = weighted_average(bare.coupling(tilted_dipole(c.scene.tilt_deg, true)).values, w);
    r.converged = rod.converged() && bare.converged();
    r.plane_too_close = rod.plane_too_close() || bare.plane_too_close();
    r.spectra = std::move(sp);
    r.ok = true;
  } catch (const Error &e) {
    r.ok = false;
    r.error_kind = to_string(e.kind());
    r.message = e.what();
  } catch (const std::exception &e) {
    r.ok = false;
    r.error_kind = "Internal";
    r.message = e.what();
  }
  return r;
}

void write_point(const std::filesystem::path &dir, const PointResult &r) {
  std::filesystem::create_directories(dir);
  if (r.spectra) {
    const PointSpectra &sp = *r.spectra;
    for (int o = 0; o < 3; ++o) {
      const std::string t = kAxisTags[o];
      write_spectrum_csv(dir / ("purcell_" + t + ".csv"), {sp.purcell.wavelengths_nm, sp.purcell.f[o]});
      write_spectrum_csv(dir / ("coupling_" + t + ".csv"), {sp.coupling.wavelengths_nm, sp.coupling.t[o]});
      write_spectrum_csv(dir / ("bare_purcell_" + t + ".csv"), {sp.bare_purcell.wavelengths_nm, sp.bare_purcell.f[o]});
      write_spectrum_csv(dir / ("bare_coupling_" + t + ".csv"),
                         {sp.bare_coupling.wavelengths_nm, sp.bare_coupling.t[o]});
    }
    write_spectrum_csv(dir / "coupling_tilt.csv", sp.tilt_coupling);
    write_spectrum_csv(dir / "bare_coupling_tilt.csv", sp.bare_tilt_coupling);
  }
  json j;
  j["d_nm"] = r.d_nm;
  j["rod_length_nm"] = r.rod_length_nm ? json(*r.rod_length_nm) : json(nullptr);
  j["status"] = r.ok ? "ok" : "failed";
  if (!r.ok) {
    j["error_kind"] = r.error_kind;
    j["message"] = r.message;
  } else {
    const ObservablesResult &o = r.observables;
    j["resolution_nm"] = o.resolution_nm;
    j["f_pz"] = o.f_pz;
    j["lambda_at_max_nm"] = o.lambda_at_max_nm;
    j["dop"] = o.dop;
    j["dop_unweighted"] = o.dop_unweighted;
    j["enhancement"] = o.enhancement;
    j["enhancement_unweighted"] = o.enhancement_unweighted;
    j["radiative_efficiency_z"] = o.radiative_efficiency_z;
    j["coupling_mean"] = r.coupling_mean;
    j["bare_coupling_mean"] = r.bare_coupling_mean;
    j["tilt_coupling"] = r.tilt_coupling;
    j["bare_tilt_coupling"] = r.bare_tilt_coupling;
    j["bare_tilt_coupling_xz"] = r.bare_tilt_coupling_xz;
    j["converged"] = r.converged;
    j["plane_too_close"] = r.plane_too_close;
  }
  write_atomically(dir / "result.json", j.dump(2) + "\n");
}

PointResult read_point(const std::filesystem::path &dir) {
  const json j = read_json(dir / "result.json");
  PointResult r;
  try {
    r.d_nm = j.at("d_nm").get<double>();
    if (!j.at("rod_length_nm").is_null()) r.rod_length_nm = j.at("rod_length_nm").get<double>();
    r.ok = j.at("status").get<std::string>() == "ok";
    if (!r.ok) {
      r.error_kind = j.value("error_kind", "");
      r.message = j.value("message", "");
      return r;
    }
    ObservablesResult &o = r.observables;
    o.d_nm = r.d_nm;
    o.rod_length_nm = r.rod_length_nm;
    o.resolution_nm = j.at("resolution_nm").get<double>();
    o.f_pz = j.at("f_pz").get<double>();
    o.lambda_at_max_nm = j.at("lambda_at_max_nm").get<double>();
    o.dop = j.at("dop").get<double>();
    o.dop_unweighted = j.at("dop_unweighted").get<double>();
    o.enhancement = j.at("enhancement").get<double>();
    o.enhancement_unweighted = j.at("enhancement_unweighted").get<double>();
    o.radiative_efficiency_z = j.at("radiative_efficiency_z").get<double>();
    r.coupling_mean = j.at("coupling_mean").get<double>();
    r.bare_coupling_mean = j.at("bare_coupling_mean").get<double>();
    r.tilt_coupling = j.at("tilt_coupling").get<double>();
    r.bare_tilt_coupling = j.at("bare_tilt_coupling").get<double>();
    r.bare_tilt_coupling_xz = j.at("bare_tilt_coupling_xz").get<double>();
    r.converged = j.at("converged").get<bool>();
    r.plane_too_close = j.at("plane_too_close").get<bool>();
  } catch (const json::exception &e) {
    throw Error(ErrorKind::ParseError, (dir / "result.json").string() + ": " + e.what());
  }
  return r;
}

void write_sweep_csv(const std::filesystem::path &path, const std::vector<PointResult> &points) {
  std::ostringstream out;
  out << "d_nm,L_nm,F_Pz,lambda_at_max_nm,P,E,P_unweighted,E_unweighted,coupling_mean,bare_coupling_mean,"
         "tilt_coupling,bare_tilt_coupling,converged,plane_too_close,status\n";
  out << std::setprecision(10);
  for (const PointResult &r : points) {
    out << r.d_nm << ',' << (r.rod_length_nm ? format_number(*r.rod_length_nm) : std::string("bare")) << ',';
    if (r.ok) {
      const ObservablesResult &o = r.observables;
      out << o.f_pz << ',' << o.lambda_at_max_nm << ',' << o.dop << ',' << o.enhancement << ',' << o.dop_unweighted
          << ',' << o.enhancement_unweighted << ',' << r.coupling_mean << ',' << r.bare_coupling_mean << ','
          << r.tilt_coupling << ',' << r.bare_tilt_coupling << ',' << (r.converged ? 1 : 0) << ','
          << (r.plane_too_close ? 1 : 0) << ",ok\n";
    } else {
      out << ",,,,,,,,,,,," << r.error_kind << '\n';
    }
  }
  write_atomically(path, out.str());
}

SweepSummary run_sweep(const RunConfig &c, const LogFn &log) {
  c.validate();
  if (c.sweep.d_nm.empty() || c.sweep.rod_length_nm.empty())
    throw Error(ErrorKind::InvalidArgument, "sweep lists must be nonempty");
  const std::filesystem::path out = c.output_dir;
  std::filesystem::create_directories(out / "points");
  RunCache cache(out / "cache");

  struct Job {
    double d;
    std::optional<double> length;
  };
  std::vector<Job> jobs;
  for (const auto &l : c.sweep.rod_length_nm)
    for (double d : c.sweep.d_nm) jobs.push_back({d, l});

  SweepSummary summary;
  summary.points.resize(jobs.size());
  std::vector<bool> done(jobs.size(), false);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto dir = out / "points" / point_directory_name(jobs[i].d, jobs[i].length);
    if (std::filesystem::exists(dir / "result.json")) {
      PointResult r = read_point(dir);
      if (r.ok) {
        summary.points[i] = std::move(r);
        done[i] = true;
        ++summary.skipped;
      }
    }
  }

  const int workers = std::max(1, std::min<int>(c.sweep.parallelism, static_cast<int>(jobs.size())));
  int total_threads = c.threads;
  if (total_threads <= 0) {
    configure_threads(0);
    total_threads = omp_get_max_threads();
  }
  RunOptions options;
  options.threads = std::max(1, total_threads / workers);

  std::mutex log_mutex;
  const LogFn safe_log = [&](const std::string &msg) {
    if (!log) return;
    std::lock_guard lock(log_mutex);
    log(msg);
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      if (done[i]) continue;
      PointResult r = simulate_point(c, jobs[i].d, jobs[i].length, cache, options, safe_log);
      write_point(out / "points" / point_directory_name(jobs[i].d, jobs[i].length), r);
      safe_log(point_directory_name(jobs[i].d, jobs[i].length) + (r.ok ? ": done" : ": failed, " + r.message));
      r.spectra.reset();
      summary.points[i] = std::move(r);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto &t : pool) t.join();

  for (const auto &p : summary.points)
    if (!p.ok) ++summary.failed;
  summary.csv = out / "sweep.csv";
  write_sweep_csv(summary.csv, summary.points);
  return summary;
}

} // namespace plasmofiber

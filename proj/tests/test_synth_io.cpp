#include "plasmofiber/emitter_synth.hpp"
#include "plasmofiber/errors.hpp"
#include "plasmofiber/timestamp_io.hpp"

#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace plasmofiber;

namespace {

std::filesystem::path scratch_dir(const std::string &name) {
  auto p = std::filesystem::temp_directory_path() / ("plasmofiber_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

EmitterModel fast_emitter(int n = 1) {
  EmitterModel em;
  em.tau1_ns = 20.0;
  em.alpha = 0.001;
  em.power_uw = 50.0;
  em.emitters = n;
  return em;
}

AntibunchingFit fit_stream(const TimestampStream &s) {
  return fit_antibunching(correlate(s, 1000.0, 100000.0));
}

void write_bytes(const std::filesystem::path &p, const std::string &bytes, std::uint64_t duration) {
  std::ofstream(p, std::ios::binary) << bytes;
  std::ofstream(sidecar_path(p)) << nlohmann::json{{"duration_ps", duration}}.dump();
}

std::string header(std::uint32_t version = kTimestampVersion) {
  std::string h = "PSTM";
  for (int i = 0; i < 4; ++i) h.push_back(static_cast<char>((version >> (8 * i)) & 0xff));
  h.append(8, '\0');
  return h;
}

std::string record(std::uint64_t t, std::uint8_t ch) {
  std::string r;
  for (int i = 0; i < 8; ++i) r.push_back(static_cast<char>((t >> (8 * i)) & 0xff));
  r.push_back(static_cast<char>(ch));
  return r;
}

} // namespace

TEST_CASE("antibunching time of the emitter model") {
  const EmitterModel em = fast_emitter();
  CHECK(em.excitation_rate() == doctest::Approx(0.05));
  CHECK(em.antibunching_time_ns() == doctest::Approx(10.0));
  EmitterModel bad = em;
  bad.tau1_ns = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  DetectorModel det;
  det.efficiency = 1.5;
  CHECK_THROWS_AS(det.validate(), Error);
}

TEST_CASE("synthetic streams are reproducible from the seed") {
  const EmitterModel em = fast_emitter();
  DetectorModel det;
  det.jitter_sigma_ps = 50.0;
  det.dark_rate_hz = 100.0;
  const auto a = generate_stream(em, det, 0.001, 42);
  const auto b = generate_stream(em, det, 0.001, 42);
  const auto c = generate_stream(em, det, 0.001, 43);
  REQUIRE(a.events.size() == b.events.size());
  bool same = true;
  for (std::size_t i = 0; i < a.events.size(); ++i)
    same = same && a.events[i].time_ps == b.events[i].time_ps && a.events[i].channel == b.events[i].channel;
  CHECK(same);
  CHECK(a.events.size() != c.events.size());
  CHECK(std::is_sorted(a.events.begin(), a.events.end(),
                       [](const PhotonEvent &x, const PhotonEvent &y) { return x.time_ps < y.time_ps; }));
  CHECK(a.duration_ps == 1'000'000'000ull);
}

TEST_CASE("mean photon interval matches 1/r + tau1") {
  EmitterModel em;
  em.tau1_ns = 280.0;
  em.alpha = 0.001;
  em.power_uw = 100.0;
  const auto s = generate_stream(em, DetectorModel{}, 0.05, 9);
  const double mean_ns = s.duration_ps * 1e-3 / static_cast<double>(s.events.size());
  CHECK(mean_ns == doctest::Approx(290.0).epsilon(0.01));
  const double plus = static_cast<double>(s.count(Channel::Plus));
  CHECK(plus / s.events.size() == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("g2(0) does not depend on the detection efficiency") {
  DetectorModel full, lossy;
  lossy.efficiency = 0.3;
  for (int n : {1, 2}) {
    const EmitterModel em = fast_emitter(n);
    const double expected = n == 1 ? 0.0 : 0.5;
    const AntibunchingFit a = fit_stream(generate_stream(em, full, 0.01, 3));
    const AntibunchingFit b = fit_stream(generate_stream(em, lossy, 0.03, 4));
    CHECK(std::abs(a.g2_zero - expected) < 0.03);
    CHECK(std::abs(b.g2_zero - expected) < 0.05);
    CHECK(a.decay_ps == doctest::Approx(10000.0).epsilon(0.05));
  }
}

TEST_CASE("synthetic HWP scans at the extremes") {
  std::vector<double> angles;
  for (int a = 0; a <= 180; a += 10) angles.push_back(a);
  EmitterModel em;
  HwpSynthOptions opt;
  opt.samples_per_angle = 2000;
  const auto zero = synthesize_hwp_scan(em, 0.0, angles, 1, opt);
  CHECK(zero.size() == angles.size() * 2000);
  CHECK(dop_from_hwp_scan(zero).dop < 0.01);
  const HwpFit one = dop_from_hwp_scan(synthesize_hwp_scan(em, 1.0, angles, 2, opt));
  CHECK(one.dop == doctest::Approx(1.0).epsilon(0.01));
  CHECK_THROWS_AS(synthesize_hwp_scan(em, 1.2, angles, 1, opt), Error);
}

TEST_CASE("timestamp files round trip with their metadata") {
  const auto dir = scratch_dir("pstm");
  TimestampStream s;
  s.duration_ps = 1'000'000;
  s.excitation_power_uw = 75.0;
  s.hwp_angle_deg = 22.5;
  s.events = {{0, Channel::Plus}, {17, Channel::Minus}, {999'999, Channel::Plus}};
  write_timestamps(dir / "a.pstm", s);
  CHECK(std::filesystem::file_size(dir / "a.pstm") == 16 + 3 * 9);
  const TimestampStream b = read_timestamps(dir / "a.pstm");
  REQUIRE(b.events.size() == 3);
  CHECK(b.events[1].time_ps == 17);
  CHECK(b.events[1].channel == Channel::Minus);
  CHECK(b.duration_ps == s.duration_ps);
  CHECK(*b.excitation_power_uw == 75.0);
  CHECK(*b.hwp_angle_deg == 22.5);
}

TEST_CASE("timestamp parse errors point at the offending byte") {
  const auto dir = scratch_dir("pstm_bad");
  auto offset_of = [&](const std::string &bytes) -> std::uint64_t {
    write_bytes(dir / "x.pstm", bytes, 1000);
    try {
      read_timestamps(dir / "x.pstm");
    } catch (const ParseError &e) {
      return e.byte_offset();
    }
    return ~0ull;
  };
  CHECK(offset_of("") == 0);
  CHECK(offset_of("PSTM") == 4);
  CHECK(offset_of("XSTM" + header().substr(4)) == 0);
  CHECK(offset_of(header(2)) == 4);
  CHECK(offset_of(header() + record(5, 0) + "abc") == 25);
  CHECK(offset_of(header() + record(5, 0) + record(6, 7)) == 16 + 9 + 8);
  write_bytes(dir / "late.pstm", header() + record(5000, 0), 1000);
  CHECK_THROWS_AS(read_timestamps(dir / "late.pstm"), Error);
  std::ofstream(dir / "bad_side.pstm", std::ios::binary) << header();
  std::ofstream(sidecar_path(dir / "bad_side.pstm")) << "{\"duration_ps\": ";
  CHECK_THROWS_AS(read_timestamps(dir / "bad_side.pstm"), ParseError);
}

TEST_CASE("HWP CSV round trip and errors") {
  const auto dir = scratch_dir("hwp");
  const std::vector<HwpSample> s{{0.0, 0.93}, {10.0, 0.5}, {22.5, 0.07}};
  write_hwp_csv(dir / "h.csv", s);
  const auto b = read_hwp_csv(dir / "h.csv");
  REQUIRE(b.size() == 3);
  CHECK(b[2].angle_deg == 22.5);
  CHECK(b[2].i_frac == doctest::Approx(0.07));
  std::ofstream(dir / "bad.csv") << "angle_deg,i_frac\n0,1\nten,0.5\n";
  try {
    read_hwp_csv(dir / "bad.csv");
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(e.byte_offset() == 21);
  }
}

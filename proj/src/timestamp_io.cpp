#include "plasmofiber/timestamp_io.hpp"

#include "plasmofiber/errors.hpp"

#include <json.hpp>

#include <array>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace plasmofiber {

namespace {

constexpr std::array<char, 4> kMagic{'P', 'S', 'T', 'M'};
constexpr std::size_t kHeaderBytes = 16;
constexpr std::size_t kRecordBytes = 9;

template <typename T> void put_le(std::string &buf, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

template <typename T> T get_le(const std::string &buf, std::size_t at) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<T>(static_cast<unsigned char>(buf[at + i])) << (8 * i);
  return v;
}

} // namespace

std::filesystem::path sidecar_path(const std::filesystem::path &path) {
  return std::filesystem::path(path.string() + ".json");
}

void write_timestamps(const std::filesystem::path &path, const TimestampStream &stream) {
  std::string buf(kMagic.begin(), kMagic.end());
  put_le<std::uint32_t>(buf, kTimestampVersion);
  put_le<std::uint64_t>(buf, 0);
  buf.reserve(kHeaderBytes + kRecordBytes * stream.events.size());
  for (const PhotonEvent &e : stream.events) {
    put_le<std::uint64_t>(buf, e.time_ps);
    buf.push_back(static_cast<char>(e.channel));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));

  nlohmann::json meta;
  meta["duration_ps"] = stream.duration_ps;
  if (stream.excitation_power_uw) meta["excitation_power_uW"] = *stream.excitation_power_uw;
  if (stream.hwp_angle_deg) meta["hwp_angle_deg"] = *stream.hwp_angle_deg;
  std::ofstream side(sidecar_path(path), std::ios::trunc);
  if (!side) throw Error(ErrorKind::InvalidArgument, "cannot write " + sidecar_path(path).string());
  side << meta.dump(2) << '\n';
}

TimestampStream read_timestamps(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();
  if (buf.size() < kHeaderBytes) throw ParseError(buf.size(), "truncated timestamp header");
  if (std::memcmp(buf.data(), kMagic.data(), kMagic.size()) != 0) throw ParseError(0, "bad magic");
  if (get_le<std::uint32_t>(buf, 4) != kTimestampVersion) throw ParseError(4, "unsupported version");
  const std::size_t body = buf.size() - kHeaderBytes;
  if (body % kRecordBytes != 0)
    throw ParseError(kHeaderBytes + body / kRecordBytes * kRecordBytes, "truncated record");

  TimestampStream s;
  s.events.reserve(body / kRecordBytes);
  std::uint64_t previous = 0;
  bool sorted = true;
  for (std::size_t at = kHeaderBytes; at < buf.size(); at += kRecordBytes) {
    PhotonEvent e;
    e.time_ps = get_le<std::uint64_t>(buf, at);
    const auto ch = static_cast<unsigned char>(buf[at + 8]);
    if (ch > 1) throw ParseError(at + 8, "channel must be 0 or 1");
    e.channel = static_cast<Channel>(ch);
    if (e.time_ps < previous) sorted = false;
    previous = e.time_ps;
    s.events.push_back(e);
  }

  const auto side = sidecar_path(path);
  std::ifstream meta_in(side);
  if (!meta_in) throw Error(ErrorKind::InvalidArgument, "missing metadata sidecar " + side.string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_in);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(e.byte, std::string("sidecar: ") + e.what());
  }
  if (!meta.contains("duration_ps") || !meta["duration_ps"].is_number_unsigned())
    throw Error(ErrorKind::ParseError, "sidecar needs an unsigned duration_ps");
  s.duration_ps = meta["duration_ps"].get<std::uint64_t>();
  if (meta.contains("excitation_power_uW")) s.excitation_power_uw = meta["excitation_power_uW"].get<double>();
  if (meta.contains("hwp_angle_deg")) s.hwp_angle_deg = meta["hwp_angle_deg"].get<double>();

  if (!sorted) s.normalize();
  if (!s.events.empty() && s.events.back().time_ps > s.duration_ps)
    throw Error(ErrorKind::InvalidArgument, "event time exceeds the acquisition duration");
  return s;
}

void write_hwp_csv(const std::filesystem::path &path, const std::vector<HwpSample> &samples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << "angle_deg,i_frac\n" << std::setprecision(10);
  for (const HwpSample &s : samples) out << s.angle_deg << ',' << s.i_frac << '\n';
}

std::vector<HwpSample> read_hwp_csv(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("angle_deg,i_frac", 0) != 0)
    throw ParseError(0, "missing HWP CSV header");
  std::uint64_t offset = line.size() + 1;
  std::vector<HwpSample> out;
  while (std::getline(in, line)) {
    const std::uint64_t raw = line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) {
      std::istringstream row(line);
      HwpSample s;
      char comma;
      if (!(row >> s.angle_deg >> comma >> s.i_frac) || comma != ',') throw ParseError(offset, "malformed HWP row");
      out.push_back(s);
    }
    offset += raw;
  }
  return out;
}

} // namespace plasmofiber

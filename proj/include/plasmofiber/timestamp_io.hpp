#pragma once

#include "plasmofiber/photon_stats.hpp"

#include <filesystem>
#include <vector>

namespace plasmofiber {

// Binary layout (little endian): magic "PSTM", uint32 version (1), uint64
// reserved, then 9-byte records {uint64 time_ps, uint8 channel}. Metadata
// lives in a JSON sidecar "<file>.json" with duration_ps and the optional
// excitation_power_uW and hwp_angle_deg.
inline constexpr std::uint32_t kTimestampVersion = 1;

void write_timestamps(const std::filesystem::path &path, const TimestampStream &stream);
TimestampStream read_timestamps(const std::filesystem::path &path);

std::filesystem::path sidecar_path(const std::filesystem::path &path);

// Two-column CSV with header angle_deg,i_frac.
void write_hwp_csv(const std::filesystem::path &path, const std::vector<HwpSample> &samples);
std::vector<HwpSample> read_hwp_csv(const std::filesystem::path &path);

} // namespace plasmofiber

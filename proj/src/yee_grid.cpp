#include "plasmofiber/yee_grid.hpp"

#include "plasmofiber/errors.hpp"

namespace plasmofiber {

const char *to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::InvalidArgument: return "InvalidArgument";
  case ErrorKind::InvalidGeometry: return "InvalidGeometry";
  case ErrorKind::OutOfBounds: return "OutOfBounds";
  case ErrorKind::GridMismatch: return "GridMismatch";
  case ErrorKind::NonFinite: return "NonFinite";
  case ErrorKind::NoRoot: return "NoRoot";
  case ErrorKind::ZeroDenominator: return "ZeroDenominator";
  case ErrorKind::EmptyChannel: return "EmptyChannel";
  case ErrorKind::NoConvergence: return "NoConvergence";
  case ErrorKind::DegenerateHistogram: return "DegenerateHistogram";
  case ErrorKind::InsufficientCoverage: return "InsufficientCoverage";
  case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

std::array<double, 3> component_offset(Component c) {
  switch (c) {
  case Component::Ex: return {0.5, 0.0, 0.0};
  case Component::Ey: return {0.0, 0.5, 0.0};
  case Component::Ez: return {0.0, 0.0, 0.5};
  case Component::Hx: return {0.0, 0.5, 0.5};
  case Component::Hy: return {0.5, 0.0, 0.5};
  case Component::Hz: return {0.5, 0.5, 0.0};
  }
  return {0.0, 0.0, 0.0};
}

void YeeGrid::validate() const {
  for (int a = 0; a < 3; ++a)
    if (extent[a] < 20)
      throw Error(ErrorKind::InvalidArgument, "grid extent must be at least 20 cells per axis");
  if (!(resolution > 0.0))
    throw Error(ErrorKind::InvalidArgument, "grid resolution must be positive");
}

Vec3 YeeGrid::sample_position(Component c, int i, int j, int k) const {
  const auto off = component_offset(c);
  return node_position(i + off[0], j + off[1], k + off[2]);
}

double courant_dt(const YeeGrid &grid, double safety) {
  return nm_time_to_fs(courant_dt_nm(grid, safety));
}

double courant_dt_nm(const YeeGrid &grid, double safety) {
  if (!(safety > 0.0 && safety <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "Courant safety factor must lie in (0, 1]");
  return safety * grid.resolution / std::sqrt(3.0);
}

} // namespace plasmofiber

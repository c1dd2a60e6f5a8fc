#pragma once

#include "plasmofiber/dipole_source.hpp"
#include "plasmofiber/scene.hpp"
#include "plasmofiber/yee_grid.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace plasmofiber {

// Graded CPML coefficients along one axis, sampled at integer (E) and
// half-integer (H) positions. kinv is 1/kappa and equals 1 outside the layer.
struct CpmlAxisProfile {
  std::vector<float> kinv_e, b_e, c_e; // index = node
  std::vector<float> kinv_h, b_h, c_h; // index = node, sample at node + 1/2
};

std::array<CpmlAxisProfile, 3> make_cpml_profile(const YeeGrid &grid, const CpmlParams &params,
                                                 double dt_nm, double omega_ref);

// Convolution memory for one field component differentiated along one axis,
// stored for the two layer slabs only.
struct PsiSlab {
  int component;   // 0..2 for E, 3..5 for H
  int axis;        // derivative axis
  int first;       // first grid index along `axis` covered by the slab
  int count;       // number of indices along `axis`
  std::vector<float> data;
};

// One Yee edge receiving part of a point source (weight includes the
// orientation projection).
struct SourceTap {
  int axis;
  std::size_t index;
  double weight;
};

// Trilinear spreading of an oriented point onto the surrounding E edges.
// Edges inside metal are dropped and the remaining weights of that component
// are rescaled to keep their sum. Throws InvalidGeometry when a component has
// only metal edges around the point, OutOfBounds when the point leaves the grid.
std::vector<SourceTap> spread_dipole(const MaterialMap &materials, Vec3 position, Vec3 orientation);

struct FieldState {
  YeeGrid grid;
  double dt = 0.0; // nm (c = 1)
  long time_step_index = 0;
  std::array<std::vector<float>, 3> E, H;

  // Dispersive polarization per (dispersive edge, pole), at steps n and n - 1.
  std::vector<double> pol, pol_prev;
  std::vector<int> pol_offset; // first pole slot of each dispersive edge

  std::array<CpmlAxisProfile, 3> cpml;
  std::vector<PsiSlab> psi;

  double time_nm() const { return time_step_index * dt; }
  double energy(const MaterialMap &materials) const;
};

// Zero fields on the grid of `materials`. dt must satisfy the Courant bound.
FieldState make_field_state(const MaterialMap &materials, const CpmlParams &cpml, double dt_nm,
                            double omega_ref);

// A source already resolved to grid taps; value is the current moment at the
// half step being injected.
struct InjectedCurrent {
  std::span<const SourceTap> taps;
  double value;
  bool hard = false;
};

// Advances E from step n to n + 1 and H from n - 1/2 to n + 1/2. Throws
// GridMismatch when the material map was rasterized on another grid.
void step(FieldState &state, const MaterialMap &materials, std::span<const InjectedCurrent> currents);
void step(FieldState &state, const MaterialMap &materials, std::span<const DipoleSource> sources);

// True when every field sample is finite.
bool all_finite(const FieldState &state);

} // namespace plasmofiber

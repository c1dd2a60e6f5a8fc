#pragma once

#include "plasmofiber/monitors.hpp"
#include "plasmofiber/scene.hpp"

#include <functional>

namespace plasmofiber {

struct RunOptions {
  int threads = 0;       // 0 keeps the OpenMP default (or PLASMOFIBER_THREADS)
  int energy_check = 20; // steps between energy evaluations
  std::function<void(long step, double energy, double peak)> progress;
};

// Applies PLASMOFIBER_THREADS (if set) or an explicit count to OpenMP.
void configure_threads(int threads = 0);

// Steps the scene until the field energy falls below decay_threshold of its
// peak after the source has ended, or until max_steps. The returned set has
// converged = false when the step cap stopped the run. Throws NonFinite when
// the fields blow up.
MonitorSet run(const SceneConfig &scene, const RunOptions &options = {});
MonitorSet run(const SceneConfig &scene, const MaterialMap &materials, const RunOptions &options = {});

// DFT decimation stride used for planes and boxes.
int auto_dft_stride(double dt_nm, double shortest_wavelength_nm);

} // namespace plasmofiber

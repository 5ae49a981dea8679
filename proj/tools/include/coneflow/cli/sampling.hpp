#pragma once

// Reproducible random launches for sweeps. The generator is std::mt19937_64
// seeded with the config seed; uniforms take the top 53 bits of each draw
// and normals come from Box-Muller, so the stream does not depend on the
// standard library's distribution implementations.

#include <cstdint>
#include <random>

#include "coneflow/geodesic.hpp"

namespace coneflow::cli {

class SweepRng {
 public:
  explicit SweepRng(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // [0, 1)
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Chart point uniform over the chart box (periodic coordinates over one
/// period), t = 1, and a velocity uniform on the unit sphere of the cone
/// metric dt^2 + sigma. Radial draws are rejected.
ConeChartState draw_launch(const Manifold& m, SweepRng& rng,
                           double tol_radial = kDefaultTolRadial);

}  // namespace coneflow::cli

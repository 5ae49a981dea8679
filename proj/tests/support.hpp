#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "coneflow/geodesic.hpp"

namespace testing {

inline Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// ((1,0,1),(0,1,0)) on the cone over the unit circle: I = 2, s0 = 0.
inline coneflow::PhasePoint round_launch() {
  return {vec({1, 0, 1}), vec({0, 1, 0})};
}

// Random non-radial unit-speed state on the cone, |t| in [0.5, 2].
inline coneflow::PhasePoint random_state(const coneflow::Manifold& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss;
  const int n = m.n();
  for (;;) {
    coneflow::ChartCoords u(n);
    for (int i = 0; i < n; ++i) {
      const auto& period = m.chart().periods[static_cast<std::size_t>(i)];
      const double lo = period ? 0.0 : m.chart().lower[i] + 0.2;
      const double hi = period ? *period : m.chart().upper[i] - 0.2;
      u[i] = lo + (hi - lo) * unit(rng);
    }
    const double t = (unit(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + 1.5 * unit(rng));
    coneflow::ChartCoords du(n);
    for (int i = 0; i < n; ++i) du[i] = gauss(rng);
    coneflow::ConeChartState c{t, u, gauss(rng), du};
    coneflow::PhasePoint p = coneflow::to_ambient(m, c);
    p.v /= p.v.norm();
    if (coneflow::integral_I(p) > 1e-2) return p;
  }
}

}  // namespace testing

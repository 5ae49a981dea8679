#include "coneflow/cli/sampling.hpp"

#include <cmath>
#include <numbers>

namespace coneflow::cli {

double SweepRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SweepRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

ConeChartState draw_launch(const Manifold& m, SweepRng& rng, double tol_radial) {
  const ChartSpec& chart = m.chart();
  const int n = m.n();
  for (;;) {
    ChartCoords u(n);
    for (int i = 0; i < n; ++i) {
      const auto& period = chart.periods[static_cast<std::size_t>(i)];
      const double lo = period ? 0.0 : chart.lower[i];
      const double hi = period ? *period : chart.upper[i];
      u[i] = lo + (hi - lo) * rng.uniform();
    }
    Eigen::VectorXd z(n + 1);
    for (int i = 0; i <= n; ++i) z[i] = rng.normal();
    const double len = z.norm();
    if (!(len > 0.0)) continue;
    z /= len;

    SigmaMetric sigma;
    try {
      sigma = m.induced_metric(u);
    } catch (const Error&) {
      continue;  // degenerate chart point (sphere pole)
    }
    // sigma = L L^T; du = L^-T w has sigma-norm |w|.
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    const ChartCoords du = llt.matrixU().solve(z.tail(n));
    ConeChartState state{1.0, u, z[0], du};
    if (classify(to_ambient(m, state), tol_radial).kind == GeodesicKind::Radial) continue;
    return state;
  }
}

}  // namespace coneflow::cli

#pragma once

// Geodesic integration on Sigma (chart coordinates) and on the cone K,
// where the cone carries the warped metric dt^2 + t^2 sigma.

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "coneflow/ambient.hpp"
#include "coneflow/manifold.hpp"
#include "coneflow/ode.hpp"

namespace coneflow {

/// How non-radial states are propagated. Radial states never reach a
/// backend: they are straight lines through the vertex.
enum class Backend { Direct, Lift };

std::string_view to_string(Backend backend);

struct IntegratorSettings {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 0.0;
  double h_max = 0.0;
  long max_steps = 1'000'000;
  bool renormalize_speed = false;
  Stepper stepper = Stepper::DormandPrince54;
  double tol_radial = kDefaultTolRadial;

  OdeOptions ode() const {
    return {rtol, atol, h_init, h_max, max_steps, stepper};
  }
  void validate() const;
};

struct Span {
  double a;
  double b;
};

/// Position and velocity in cone chart form: x = t q(u),
/// v = dt q(u) + t dq/du du.
struct ConeChartState {
  double t;
  ChartCoords u;
  double dt;
  ChartCoords du;
};

ConeChartState to_chart_state(const Manifold& m, const PhasePoint& p);
PhasePoint to_ambient(const Manifold& m, const ConeChartState& c);

struct SigmaSample {
  double s;           // arc length on Sigma
  ChartCoords u;      // unwrapped along the path
  ChartCoords du;
  AmbientVector q;    // point of Sigma (sign selects the nappe)
  AmbientVector dq;
};

struct SigmaTrajectory {
  std::vector<SigmaSample> samples;  // solver nodes, s increasing
  std::function<SigmaSample(double)> dense;
  double s_lo = 0.0;
  double s_hi = 0.0;
  int nappe = 1;
  StepStats stats;

  SigmaSample at(double s) const { return dense(s); }
};

/// Geodesic of Sigma through (u0, du0) at arc length `s_start`, integrated
/// over the span and the start point. `nappe` = -1 follows -q(u).
SigmaTrajectory flow_sigma(const Manifold& m, const ChartCoords& u0,
                           const ChartCoords& du0, Span span,
                           const IntegratorSettings& settings,
                           double s_start = 0.0, int nappe = 1);

struct TrajectorySample {
  double s;
  AmbientVector x;
  AmbientVector v;
  double t;
  ChartCoords u;  // reduced into the chart's period box
  ChartCoords du;
};

struct TrajectoryMeta {
  std::string backend;
  IntegratorSettings settings;
  std::string config_hash;
  StepStats stats;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::function<TrajectorySample(double)> dense;
  double s_lo = 0.0;  // dense output domain
  double s_hi = 0.0;
  TrajectoryMeta meta;

  TrajectorySample at(double s) const { return dense(s); }
  PhasePoint state(double s) const {
    const TrajectorySample smp = dense(s);
    return {smp.x, smp.v};
  }
};

/// Integrates the warped-product geodesic equations
///   t'' = t sigma(u')(u'),   u''^k = -Gamma^k_ij u'^i u'^j - (2/t) t' u'^k
/// starting at parameter 0. Samples are the solver's accepted nodes inside
/// the span. Throws VertexApproach if |t| drops below sqrt(I)/2.
Trajectory flow_cone_direct(const Manifold& m, const ConeChartState& init, Span span,
                            const IntegratorSettings& settings);

/// State at parameter s of the geodesic through p.
PhasePoint flow(const Manifold& m, const PhasePoint& p, double s,
                Backend backend = Backend::Direct,
                const IntegratorSettings& settings = {});

/// Uniform grid of n_samples over the span with a dense interpolant.
Trajectory sample_trajectory(const Manifold& m, const PhasePoint& p, Span span,
                             int n_samples, Backend backend = Backend::Direct,
                             const IntegratorSettings& settings = {});

}  // namespace coneflow

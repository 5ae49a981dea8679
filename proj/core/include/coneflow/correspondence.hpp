#pragma once

// Dictionary between non-radial cone geodesics and length-pi arcs of
// Sigma geodesics: gamma~(s~) = gamma(tan s~) / |gamma(tan s~)| and back
// gamma(s) = gamma~(arctan s) sqrt(s^2 + 1), for the canonical normalization
// I = 1, unit speed, tangency at s = 0.

#include <functional>
#include <optional>

#include "coneflow/geodesic.hpp"

namespace coneflow {

struct SigmaState {
  AmbientVector q;
  AmbientVector dq;
};

/// Arc-length parametrized piece of a Sigma geodesic. Anchored so that
/// s~ = 0 is the tangency direction of the cone geodesic it came from.
struct SigmaGeodesic {
  double lo = 0.0;  // domain of eval in s~
  double hi = 0.0;
  std::function<SigmaState(double)> eval;

  SigmaState operator()(double s) const { return eval(s); }
};

/// Radial projection of a canonically normalized trajectory. Throws
/// NotNormalized when I, the speed or <gamma(0), gamma'(0)> is off by more
/// than `tol`.
SigmaGeodesic project_geodesic(const Trajectory& traj, double tol = 1e-6);

using ConeCurve = std::function<PhasePoint(double)>;

/// Lift of a Sigma arc to the cone, rescaled to caustic integral I_target
/// and the given speed. Tangency sits at s = 0.
ConeCurve lift_geodesic(SigmaGeodesic sg, double I_target, double speed);

/// Sigma geodesic associated with the cone geodesic through p, integrated
/// on Sigma over the closed interval [-pi/2, pi/2], together with the data
/// that maps it back onto p's own parametrization.
struct SigmaAnchor {
  SigmaGeodesic geodesic;
  SigmaTrajectory chart_path;  // same arc in chart coordinates
  double I;                    // caustic integral of p
  double speed;                // |v|
  double s0;                   // tangency parameter of p
  int nappe;                   // +1 on K+, -1 on K-
};

SigmaAnchor sigma_anchor(const Manifold& m, const PhasePoint& p,
                         const IntegratorSettings& settings);

/// Lift backend: evaluates the cone geodesic through p via its Sigma arc
/// without integrating the cone equations.
Trajectory flow_cone_lift(const Manifold& m, const PhasePoint& p, Span span,
                          const IntegratorSettings& settings);

struct AsymptoticDirections {
  AmbientVector plus;   // lim gamma'(s),  s -> +inf
  AmbientVector minus;  // lim gamma'(s),  s -> -inf
};

AsymptoticDirections asymptotic_directions(const Manifold& m, const PhasePoint& p,
                                           const IntegratorSettings& settings = {});

/// pi / L for links whose geodesics are closed with known length L (circle,
/// ellipse, centered sphere). A value above 1 means the length-pi arc
/// overcovers the closed geodesic. Empty otherwise.
std::optional<double> wrap_count(const Manifold& m, const SigmaGeodesic& sg);

/// Length of the closed link geodesic used by wrap_count, if known.
std::optional<double> closed_link_length(const Manifold& m);

}  // namespace coneflow

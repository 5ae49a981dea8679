#pragma once

// Ambient-space geometry of a cone K in R^{N+1}: phase points, the
// caustic integral I, radial/non-radial classification, the tangency
// parameter and the two-parameter scaling of geodesics.

#include <Eigen/Dense>

#include "coneflow/error.hpp"

namespace coneflow {

/// Euclidean coordinates in R^{N+1}.
using AmbientVector = Eigen::VectorXd;

inline constexpr double kDefaultTolRadial = 1e-10;
inline constexpr double kDefaultTolCone = 1e-9;

/// A point of the tangent bundle TK in ambient coordinates. Unit speed is
/// not required: every formula below uses the |v|-normalized form.
struct PhasePoint {
  AmbientVector x;
  AmbientVector v;

  Eigen::Index dim() const { return x.size(); }
};

enum class GeodesicKind { Radial, NonRadial };

struct Classification {
  GeodesicKind kind;
  double I_value;
};

/// |x|^2 - <x,v>^2/|v|^2, the squared distance from the vertex to the
/// tangent line through x. Round-off negatives are clamped to zero.
double integral_I(const PhasePoint& p);

Classification classify(const PhasePoint& p,
                        double tol_radial = kDefaultTolRadial);

/// The unique s with <gamma(s), gamma'(s)> = 0. Along any cone geodesic
/// d/ds <gamma, gamma'> = |v|^2, so s0 = -<x,v>/|v|^2.
double tangency_parameter(const PhasePoint& p,
                          double tol_radial = kDefaultTolRadial);

/// State at parameter 0 of the geodesic a1 * gamma(a2 * s).
PhasePoint scale_phase(const PhasePoint& p, double a1, double a2);

/// <gamma(s),gamma'(s)> predicted for the geodesic through p.
inline double phi_affine(const PhasePoint& p, double s) {
  return p.x.dot(p.v) + p.v.squaredNorm() * s;
}

}  // namespace coneflow

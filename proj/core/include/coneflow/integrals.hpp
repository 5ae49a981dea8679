#pragma once

// First integrals built from the tangency point: J collects the position
// and unit velocity where the geodesic touches the sphere of radius
// sqrt(I); I^k = I * J^k extends them continuously by zero to generatrices.

#include "coneflow/geodesic.hpp"

namespace coneflow {

struct JVector {
  AmbientVector position;  // gamma(s0), |position|^2 = I
  AmbientVector velocity;  // gamma'(s0) for the unit-speed geodesic

  /// (J^1, ..., J^{2N+2}).
  Eigen::VectorXd values() const;
};

struct IntegralVector {
  Eigen::VectorXd values;  // I^1 ... I^{2N+2}

  bool is_zero() const { return (values.array() == 0.0).all(); }
};

/// J for the geodesic through p. The velocity is normalized to unit speed
/// first, so J depends only on the orbit. The lift backend reads the
/// tangency point straight off the Sigma anchor, which keeps
/// |position|^2 = I to round-off.
JVector integrals_J(const Manifold& m, const PhasePoint& p,
                    const IntegratorSettings& settings = {},
                    Backend backend = Backend::Lift);

/// Zero vector exactly for radial states.
IntegralVector integrals_I_vec(const Manifold& m, const PhasePoint& p,
                               const IntegratorSettings& settings = {},
                               Backend backend = Backend::Lift);

struct RecoveredIntegrals {
  double I;
  JVector j;
};

/// I = cbrt(sum_{k <= N+1} (I^k)^2), J^k = I^k / I. Throws ZeroVector for
/// the origin (the whole family of generatrices).
RecoveredIntegrals recover(const IntegralVector& iv);

/// The state at the tangency parameter of the unique geodesic with these
/// integral values. Throws NotOnCone if the vector is not in the image of
/// the integral map for this cone.
PhasePoint reconstruct_geodesic(const Manifold& m, const IntegralVector& iv);

}  // namespace coneflow

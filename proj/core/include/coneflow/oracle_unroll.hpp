#pragma once

// Closed-form geodesics on round cones (cones over circles). Developing
// the cone onto the plane turns geodesics into straight lines; this is the
// ground truth the numerical backends are checked against.

#include "coneflow/ambient.hpp"

namespace coneflow {

struct RoundConeSpec {
  double rho;

  /// Sine of the half-opening angle, rho / sqrt(1 + rho^2). The development
  /// angle is psi = u * sin_alpha.
  double sin_alpha() const;
};

/// A cone geodesic in the development plane: the line through polar point
/// (r0, psi0) with Cartesian heading angle `heading`, traversed at unit
/// speed. `nappe` = -1 mirrors everything onto K-.
struct DevelopedLine {
  double r0;
  double psi0;
  double heading;
  double s0;           // parameter of closest approach to the vertex
  double d;            // impact parameter, sqrt(I)
  double orientation;  // +1 if psi increases along the line
  int nappe;
  double sin_alpha;
};

/// Launch state given in cone chart form (t, u, dt, du) with unit ambient
/// speed dt^2 + t^2 sin_alpha^2 du^2 = 1.
DevelopedLine unroll_state(const RoundConeSpec& spec, double t0, double u0, double dt0,
                           double du0);

struct OracleChartState {
  double t;
  double u;  // unwrapped; may exceed 2 pi when the geodesic overcovers
  double dt;
  double du;
};

OracleChartState oracle_position(const DevelopedLine& line, double s);

/// Ambient state x = t q(u), v = dt q + t q_u du on the round cone.
PhasePoint oracle_phase(const RoundConeSpec& spec, const DevelopedLine& line, double s);

/// d^2, the squared distance from the vertex to the developed line.
double oracle_I(const DevelopedLine& line);

}  // namespace coneflow

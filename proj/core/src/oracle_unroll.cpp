#include "coneflow/oracle_unroll.hpp"

#include <cmath>

namespace coneflow {

double RoundConeSpec::sin_alpha() const {
  if (!(rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "round cone needs rho > 0");
  return rho / std::sqrt(1.0 + rho * rho);
}

DevelopedLine unroll_state(const RoundConeSpec& spec, double t0, double u0, double dt0,
                           double du0) {
  const double sa = spec.sin_alpha();
  if (t0 == 0.0) throw Error(ErrorCode::RadialState, "launch from the vertex");
  const double speed_sq = dt0 * dt0 + t0 * t0 * sa * sa * du0 * du0;
  if (std::abs(speed_sq - 1.0) > 1e-9) {
    throw Error(ErrorCode::NotNormalized, "oracle launches must have unit speed");
  }
  // K- is the mirror image x -> -x of K+, which maps (t, dt) to (-t, -dt).
  const int nappe = t0 > 0.0 ? 1 : -1;
  const double r0 = std::abs(t0);
  const double dr0 = nappe * dt0;
  const double psi0 = u0 * sa;
  const double dpsi0 = sa * du0;  // angular rate, r0 * dpsi0 is the transverse speed

  // Cartesian position and velocity in the development plane.
  const double px = r0 * std::cos(psi0), py = r0 * std::sin(psi0);
  const double vx = dr0 * std::cos(psi0) - r0 * dpsi0 * std::sin(psi0);
  const double vy = dr0 * std::sin(psi0) + r0 * dpsi0 * std::cos(psi0);
  const double cross = px * vy - py * vx;
  if (std::abs(cross) <= 1e-14 * r0) {
    throw Error(ErrorCode::RadialState, "heading along the generatrix");
  }
  DevelopedLine line;
  line.r0 = r0;
  line.psi0 = psi0;
  line.heading = std::atan2(vy, vx);
  line.s0 = -(px * vx + py * vy);
  line.d = std::abs(cross);
  line.orientation = cross > 0.0 ? 1.0 : -1.0;
  line.nappe = nappe;
  line.sin_alpha = sa;
  return line;
}

OracleChartState oracle_position(const DevelopedLine& line, double s) {
  const double w = s - line.s0;
  const double r = std::sqrt(w * w + line.d * line.d);
  // The polar angle along a line sweeps atan((s - s0)/d) from the foot.
  const double psi = line.psi0 + line.orientation * (std::atan(w / line.d) -
                                                     std::atan(-line.s0 / line.d));
  const double dpsi = line.orientation * line.d / (r * r);
  return {line.nappe * r, psi / line.sin_alpha, line.nappe * w / r,
          dpsi / line.sin_alpha};
}

PhasePoint oracle_phase(const RoundConeSpec& spec, const DevelopedLine& line, double s) {
  const OracleChartState c = oracle_position(line, s);
  const double k = 1.0 / std::sqrt(1.0 + spec.rho * spec.rho);
  AmbientVector q(3), qu(3);
  q << spec.rho * std::cos(c.u) * k, spec.rho * std::sin(c.u) * k, k;
  qu << -spec.rho * std::sin(c.u) * k, spec.rho * std::cos(c.u) * k, 0.0;
  return {c.t * q, c.dt * q + c.t * c.du * qu};
}

double oracle_I(const DevelopedLine& line) { return line.d * line.d; }

}  // namespace coneflow

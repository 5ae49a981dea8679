#include "coneflow/integrals.hpp"

#include <cmath>

namespace coneflow {

Eigen::VectorXd JVector::values() const {
  Eigen::VectorXd out(position.size() + velocity.size());
  out << position, velocity;
  return out;
}

JVector integrals_J(const Manifold& m, const PhasePoint& p,
                    const IntegratorSettings& settings, Backend backend) {
  m.validate(p);
  const PhasePoint unit{p.x, p.v / p.v.norm()};
  const double s0 = tangency_parameter(unit, settings.tol_radial);
  const PhasePoint touch = flow(m, unit, s0, backend, settings);
  return {touch.x, touch.v};
}

IntegralVector integrals_I_vec(const Manifold& m, const PhasePoint& p,
                               const IntegratorSettings& settings, Backend backend) {
  m.validate(p);
  const Classification cls = classify(p, settings.tol_radial);
  if (cls.kind == GeodesicKind::Radial) {
    return {Eigen::VectorXd::Zero(2 * p.dim())};
  }
  return {cls.I_value * integrals_J(m, p, settings, backend).values()};
}

RecoveredIntegrals recover(const IntegralVector& iv) {
  const Eigen::Index size = iv.values.size();
  if (size < 2 || size % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument, "integral vector must have even length 2N+2");
  }
  if (iv.is_zero()) {
    throw Error(ErrorCode::ZeroVector, "the origin corresponds to every generatrix");
  }
  const Eigen::Index half = size / 2;
  const double I = std::cbrt(iv.values.head(half).squaredNorm());
  if (!(I > 0.0)) {
    throw Error(ErrorCode::NotOnCone, "position part vanishes while velocity part does not");
  }
  return {I, {iv.values.head(half) / I, iv.values.tail(half) / I}};
}

PhasePoint reconstruct_geodesic(const Manifold& m, const IntegralVector& iv) {
  if (iv.values.size() != 2 * m.ambient_dim()) {
    throw Error(ErrorCode::InvalidArgument, "integral vector has wrong length for this cone");
  }
  const RecoveredIntegrals rec = recover(iv);
  PhasePoint p{rec.j.position, rec.j.velocity};
  m.validate(p);
  // The state must sit at its own tangency point on the sphere of radius sqrt(I).
  const double scale = std::max(1.0, rec.I);
  if (std::abs(p.x.dot(p.v)) > m.tol_cone() * std::sqrt(scale) * p.v.norm() ||
      std::abs(p.x.squaredNorm() - rec.I) > m.tol_cone() * scale) {
    throw Error(ErrorCode::NotOnCone, "integral vector is not a tangency state");
  }
  return p;
}

}  // namespace coneflow

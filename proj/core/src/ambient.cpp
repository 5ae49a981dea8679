#include "coneflow/ambient.hpp"

#include <cmath>
#include <string>

namespace coneflow {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroVelocity: return "ZeroVelocity";
    case ErrorCode::ZeroScale: return "ZeroScale";
    case ErrorCode::RadialState: return "RadialState";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NotOnCone: return "NotOnCone";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::StepLimit: return "StepLimit";
    case ErrorCode::VertexApproach: return "VertexApproach";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

double integral_I(const PhasePoint& p) {
  if (p.x.size() != p.v.size()) {
    throw Error(ErrorCode::InvalidArgument, "x and v differ in dimension");
  }
  const double vv = p.v.squaredNorm();
  if (!(vv > 0.0)) throw Error(ErrorCode::ZeroVelocity, "|v| = 0");
  const double xv = p.x.dot(p.v);
  const double value = p.x.squaredNorm() - xv * xv / vv;
  // Cauchy-Schwarz makes I >= 0; anything below is cancellation noise.
  return value < 0.0 ? 0.0 : value;
}

Classification classify(const PhasePoint& p, double tol_radial) {
  const double I = integral_I(p);
  return {I <= tol_radial ? GeodesicKind::Radial : GeodesicKind::NonRadial, I};
}

double tangency_parameter(const PhasePoint& p, double tol_radial) {
  if (classify(p, tol_radial).kind == GeodesicKind::Radial) {
    throw Error(ErrorCode::RadialState,
                "tangency is undefined for a generatrix");
  }
  return -p.x.dot(p.v) / p.v.squaredNorm();
}

PhasePoint scale_phase(const PhasePoint& p, double a1, double a2) {
  if (a1 == 0.0 || a2 == 0.0) {
    throw Error(ErrorCode::ZeroScale, "scale factors must be nonzero");
  }
  return {a1 * p.x, (a1 * a2) * p.v};
}

}  // namespace coneflow

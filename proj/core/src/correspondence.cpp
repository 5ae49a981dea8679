#include "coneflow/correspondence.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

namespace coneflow {

namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;

// Cone state at parameter s of the geodesic anchored by `a`, in p's own
// parametrization: tau = speed (s - s0) / sqrt(I) is the canonical
// parameter and gamma(s) = sqrt(I) gamma~(arctan tau) sqrt(tau^2 + 1).
TrajectorySample lift_sample(const Manifold& m, const SigmaAnchor& a, double s) {
  const double root_I = std::sqrt(a.I);
  const double tau = a.speed * (s - a.s0) / root_I;
  const double root = std::sqrt(tau * tau + 1.0);
  const SigmaSample sg = a.chart_path.at(std::atan(tau));

  TrajectorySample out;
  out.s = s;
  out.x = (root_I * root) * sg.q;
  out.v = a.speed * (sg.dq / root + sg.q * (tau / root));
  out.t = a.nappe * root_I * root;
  out.u = m.reduce(sg.u);
  out.du = sg.du * (a.speed / (root_I * root * root));
  return out;
}

}  // namespace

SigmaAnchor sigma_anchor(const Manifold& m, const PhasePoint& p,
                         const IntegratorSettings& settings) {
  const Classification cls = classify(p, settings.tol_radial);
  if (cls.kind == GeodesicKind::Radial) {
    throw Error(ErrorCode::RadialState, "generatrices have no Sigma geodesic");
  }
  const double speed = p.v.norm();
  const double s0 = tangency_parameter(p, settings.tol_radial);
  const double root_I = std::sqrt(cls.I_value);
  const double tau = -speed * s0 / root_I;

  const ChartPoint cp = m.ambient_to_chart(p.x);
  const int nappe = cp.t > 0.0 ? 1 : -1;
  const AmbientVector dir = p.x / p.x.norm();
  // d gamma~/d s~ at s~ = arctan(tau); unit length by construction.
  const AmbientVector tangent = std::sqrt(tau * tau + 1.0) * p.v / speed - tau * dir;
  const SigmaFrame f = m.sigma_frame(cp.u);
  const Eigen::MatrixXd sigma = f.dq.transpose() * f.dq;
  const ChartCoords du = sigma.llt().solve(f.dq.transpose() * (nappe * tangent));

  SigmaAnchor anchor;
  anchor.chart_path =
      flow_sigma(m, cp.u, du, Span{-kHalfPi, kHalfPi}, settings, std::atan(tau), nappe);
  anchor.I = cls.I_value;
  anchor.speed = speed;
  anchor.s0 = s0;
  anchor.nappe = nappe;
  anchor.geodesic.lo = -kHalfPi;
  anchor.geodesic.hi = kHalfPi;
  anchor.geodesic.eval = [path = anchor.chart_path](double s) {
    SigmaSample smp = path.at(s);
    return SigmaState{std::move(smp.q), std::move(smp.dq)};
  };
  return anchor;
}

Trajectory flow_cone_lift(const Manifold& m, const PhasePoint& p, Span span,
                          const IntegratorSettings& settings) {
  if (!(span.a <= span.b)) throw Error(ErrorCode::InvalidArgument, "span must satisfy a <= b");
  auto anchor = std::make_shared<const SigmaAnchor>(sigma_anchor(m, p, settings));
  auto mp = std::make_shared<const Manifold>(m);

  Trajectory traj;
  traj.dense = [mp, anchor](double s) { return lift_sample(*mp, *anchor, s); };
  traj.s_lo = -std::numeric_limits<double>::infinity();
  traj.s_hi = std::numeric_limits<double>::infinity();

  // Sigma solver nodes mapped back to cone parameters.
  const double root_I = std::sqrt(anchor->I);
  traj.samples.push_back(traj.dense(span.a));
  for (const SigmaSample& node : anchor->chart_path.samples) {
    if (std::abs(node.s) >= kHalfPi) continue;
    const double s = anchor->s0 + root_I * std::tan(node.s) / anchor->speed;
    if (s > span.a && s < span.b) traj.samples.push_back(traj.dense(s));
  }
  if (span.b > span.a) traj.samples.push_back(traj.dense(span.b));
  traj.meta = {"lift", settings, m.config_hash(), anchor->chart_path.stats};
  return traj;
}

SigmaGeodesic project_geodesic(const Trajectory& traj, double tol) {
  if (!(traj.s_lo <= 0.0 && traj.s_hi >= 0.0)) {
    throw Error(ErrorCode::NotNormalized, "trajectory does not contain s = 0");
  }
  const TrajectorySample origin = traj.at(0.0);
  const PhasePoint p0{origin.x, origin.v};
  if (classify(p0).kind == GeodesicKind::Radial) {
    throw Error(ErrorCode::RadialState, "generatrices do not project to Sigma geodesics");
  }
  const double I = integral_I(p0);
  if (std::abs(I - 1.0) > tol || std::abs(origin.v.norm() - 1.0) > tol ||
      std::abs(origin.x.dot(origin.v)) > tol) {
    throw Error(ErrorCode::NotNormalized,
                "projection needs I = 1, unit speed and tangency at s = 0");
  }
  SigmaGeodesic sg;
  sg.lo = std::atan(traj.s_lo);
  sg.hi = std::atan(traj.s_hi);
  sg.eval = [traj](double st) {
    const TrajectorySample smp = traj.at(std::tan(st));
    return SigmaState{smp.x / smp.x.norm(),
                      -std::sin(st) * smp.x + smp.v / std::cos(st)};
  };
  return sg;
}

ConeCurve lift_geodesic(SigmaGeodesic sg, double I_target, double speed) {
  if (!(I_target > 0.0) || !(speed > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "lift needs I_target > 0 and speed > 0");
  }
  const double a1 = std::sqrt(I_target);
  const double a2 = speed / a1;
  return [sg = std::move(sg), a1, a2](double s) {
    const double sigma_s = a2 * s;
    const double st = std::atan(sigma_s);
    if (st < sg.lo || st > sg.hi) {
      throw Error(ErrorCode::DomainError, "Sigma arc does not reach this parameter");
    }
    const SigmaState g = sg(st);
    const double root = std::sqrt(sigma_s * sigma_s + 1.0);
    const AmbientVector pos = g.q * root;
    const AmbientVector vel = g.dq / root + g.q * (sigma_s / root);
    return PhasePoint{a1 * pos, (a1 * a2) * vel};
  };
}

AsymptoticDirections asymptotic_directions(const Manifold& m, const PhasePoint& p,
                                           const IntegratorSettings& settings) {
  m.validate(p);
  const SigmaAnchor anchor = sigma_anchor(m, p, settings);
  return {anchor.geodesic(kHalfPi).q, -anchor.geodesic(-kHalfPi).q};
}

std::optional<double> closed_link_length(const Manifold& m) {
  const ManifoldConfig& cfg = m.config();
  switch (cfg.kind) {
    case ManifoldKind::Circle:
      return 2.0 * std::numbers::pi * cfg.rho / std::sqrt(1.0 + cfg.rho * cfg.rho);
    case ManifoldKind::Sphere:
      if (cfg.center.norm() != 0.0) return std::nullopt;
      return 2.0 * std::numbers::pi * cfg.rho / std::sqrt(1.0 + cfg.rho * cfg.rho);
    case ManifoldKind::Ellipse: {
      // Periodic analytic integrand: the trapezoid rule converges
      // geometrically.
      constexpr int kNodes = 4096;
      const double h = 2.0 * std::numbers::pi / kNodes;
      double length = 0.0;
      for (int i = 0; i < kNodes; ++i) {
        ChartCoords u(1);
        u[0] = i * h;
        length += m.sigma_frame(u).dq.norm();
      }
      return length * h;
    }
    case ManifoldKind::Torus:
    case ManifoldKind::Custom:
      break;
  }
  return std::nullopt;
}

std::optional<double> wrap_count(const Manifold& m, const SigmaGeodesic& /*sg*/) {
  const auto length = closed_link_length(m);
  if (!length) return std::nullopt;
  return std::numbers::pi / *length;
}

}  // namespace coneflow

#include "coneflow/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "coneflow/correspondence.hpp"

namespace coneflow {

std::string_view to_string(Backend backend) {
  return backend == Backend::Direct ? "direct" : "lift";
}

void IntegratorSettings::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "rtol and atol must be positive");
  }
  if (max_steps <= 0) throw Error(ErrorCode::InvalidArgument, "max_steps must be positive");
  if (h_init < 0.0 || h_max < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "step sizes must be non-negative");
  }
}

ConeChartState to_chart_state(const Manifold& m, const PhasePoint& p) {
  const ChartPoint cp = m.ambient_to_chart(p.x);
  const SigmaFrame f = m.sigma_frame(cp.u);
  const double dt = p.v.dot(f.q);
  const Eigen::VectorXd tangential = p.v - dt * f.q;
  const Eigen::MatrixXd sigma = f.dq.transpose() * f.dq;
  ChartCoords du = sigma.llt().solve(f.dq.transpose() * tangential) / cp.t;
  return {cp.t, cp.u, dt, std::move(du)};
}

PhasePoint to_ambient(const Manifold& m, const ConeChartState& c) {
  const SigmaFrame f = m.sigma_frame(c.u);
  return {c.t * f.q, c.dt * f.q + c.t * (f.dq * c.du)};
}

namespace {

// Runs the legs s_start -> a and s_start -> b that are non-empty.
struct Legs {
  double start;
  std::unique_ptr<OdeResult> back;
  std::unique_ptr<OdeResult> fwd;
  StepStats stats;

  Eigen::VectorXd operator()(double s) const {
    if (s < start) {
      if (!back) throw Error(ErrorCode::DomainError, "query before the integrated span");
      return back->solution(s);
    }
    if (s == start && !fwd) {
      return back ? back->solution(s) : Eigen::VectorXd();
    }
    if (!fwd) throw Error(ErrorCode::DomainError, "query past the integrated span");
    return fwd->solution(s);
  }

  // Solver nodes in increasing order, start point once.
  std::vector<double> nodes() const {
    std::vector<double> out;
    if (back) {
      auto nb = back->solution.nodes();
      out.assign(nb.rbegin(), nb.rend());
    }
    if (fwd) {
      auto nf = fwd->solution.nodes();
      out.insert(out.end(), nf.begin() + (back ? 1 : 0), nf.end());
    }
    if (out.empty()) out.push_back(start);
    return out;
  }
};

std::shared_ptr<Legs> run_legs(const OdeRhs& rhs, double start, const Eigen::VectorXd& y0,
                               Span span, const OdeOptions& opt, const StepHook& hook) {
  auto legs = std::make_shared<Legs>();
  legs->start = start;
  if (span.a < start) {
    legs->back = std::make_unique<OdeResult>(integrate(rhs, start, y0, span.a, opt, hook));
    legs->stats += legs->back->stats;
  }
  if (span.b > start || !legs->back) {
    legs->fwd = std::make_unique<OdeResult>(
        integrate(rhs, start, y0, std::max(span.b, start), opt, hook));
    legs->stats += legs->fwd->stats;
  }
  return legs;
}

void check_span(Span span) {
  if (!std::isfinite(span.a) || !std::isfinite(span.b) || span.a > span.b) {
    throw Error(ErrorCode::InvalidArgument, "span must satisfy a <= b");
  }
}

TrajectorySample sample_from_chart(const Manifold& m, double s, double t,
                                   const ChartCoords& u, double dt, const ChartCoords& du) {
  const SigmaFrame f = m.sigma_frame(u);
  return {s, t * f.q, dt * f.q + t * (f.dq * du), t, m.reduce(u), du};
}

Trajectory radial_trajectory(const Manifold& m, const PhasePoint& p, Span span) {
  const ChartPoint dir = m.ambient_to_chart(p.v);
  const AmbientVector q = m.sigma_point(dir.u);
  const ChartCoords zero = ChartCoords::Zero(m.n());
  const double dt = p.v.dot(q);
  auto eval = [p, q, u = dir.u, zero, dt](double s) {
    AmbientVector x = p.x + s * p.v;
    const double t = x.dot(q);
    return TrajectorySample{s, std::move(x), p.v, t, u, zero};
  };
  Trajectory traj;
  traj.dense = eval;
  traj.s_lo = -std::numeric_limits<double>::infinity();
  traj.s_hi = std::numeric_limits<double>::infinity();
  traj.samples = {eval(span.a)};
  if (span.b > span.a) traj.samples.push_back(eval(span.b));
  traj.meta.backend = "radial";
  traj.meta.config_hash = m.config_hash();
  return traj;
}

}  // namespace

SigmaTrajectory flow_sigma(const Manifold& m, const ChartCoords& u0, const ChartCoords& du0,
                           Span span, const IntegratorSettings& settings, double s_start,
                           int nappe) {
  settings.validate();
  check_span(span);
  const int n = m.n();
  if (u0.size() != n || du0.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "chart state has wrong dimension");
  }
  if (!(du0.norm() > 0.0)) throw Error(ErrorCode::ZeroVelocity, "du0 = 0");
  if (nappe != 1 && nappe != -1) throw Error(ErrorCode::InvalidArgument, "nappe must be +-1");

  Eigen::VectorXd y0(2 * n);
  y0.head(n) = u0;
  y0.tail(n) = du0;
  if (settings.renormalize_speed) {
    const SigmaMetric sigma = m.induced_metric(u0);
    y0.tail(n) /= std::sqrt(du0.dot(sigma * du0));
  }

  OdeRhs rhs = [&m, n](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const ChristoffelSymbols gamma = m.christoffels(y.head(n));
    dy.head(n) = y.tail(n);
    dy.tail(n) = gamma.contract(y.tail(n));
  };
  StepHook hook;
  if (settings.renormalize_speed) {
    hook = [&m, n](double, Eigen::VectorXd& y) {
      const SigmaMetric sigma = m.induced_metric(y.head(n));
      const Eigen::VectorXd du = y.tail(n);
      y.tail(n) = du / std::sqrt(du.dot(sigma * du));
      return true;
    };
  }
  auto legs = run_legs(rhs, s_start, y0, span, settings.ode(), hook);

  auto mp = std::make_shared<const Manifold>(m);
  auto make_sample = [mp, n, nappe](double s, const Eigen::VectorXd& y) {
    const ChartCoords u = y.head(n), du = y.tail(n);
    const SigmaFrame f = mp->sigma_frame(u);
    return SigmaSample{s, u, du, nappe * f.q, nappe * (f.dq * du)};
  };

  SigmaTrajectory out;
  out.nappe = nappe;
  out.stats = legs->stats;
  out.s_lo = std::min(span.a, s_start);
  out.s_hi = std::max(span.b, s_start);
  for (double s : legs->nodes()) out.samples.push_back(make_sample(s, (*legs)(s)));
  out.dense = [legs, make_sample](double s) { return make_sample(s, (*legs)(s)); };
  return out;
}

Trajectory flow_cone_direct(const Manifold& m, const ConeChartState& init, Span span,
                            const IntegratorSettings& settings) {
  settings.validate();
  check_span(span);
  const int n = m.n();
  if (init.u.size() != n || init.du.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "chart state has wrong dimension");
  }
  if (init.t == 0.0) throw Error(ErrorCode::RadialState, "t0 = 0 is the vertex");
  if (init.dt == 0.0 && !(init.du.norm() > 0.0)) {
    throw Error(ErrorCode::ZeroVelocity, "dt0 and du0 are both zero");
  }
  const PhasePoint p0 = to_ambient(m, init);
  const Classification cls = classify(p0, settings.tol_radial);
  if (cls.kind == GeodesicKind::Radial) {
    throw Error(ErrorCode::RadialState, "radial states follow straight lines, not the integrator");
  }
  const double guard = 0.5 * std::sqrt(cls.I_value);

  Eigen::VectorXd y0(2 * n + 2);
  y0[0] = init.t;
  y0.segment(1, n) = init.u;
  y0[n + 1] = init.dt;
  y0.tail(n) = init.du;

  OdeRhs rhs = [&m, n](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const double t = y[0];
    const double dt = y[n + 1];
    const Eigen::VectorXd du = y.tail(n);
    const LinkGeometry g = m.link_geometry(y.segment(1, n));
    dy[0] = dt;
    dy.segment(1, n) = du;
    dy[n + 1] = t * du.dot(g.sigma * du);
    dy.tail(n) = g.gamma.contract(du) - (2.0 * dt / t) * du;
  };
  // A step may jump across the ball; a sign change of t means it did.
  StepHook hook = [guard, t0 = init.t](double, Eigen::VectorXd& y) {
    if (std::abs(y[0]) < guard || y[0] * t0 < 0.0) {
      throw Error(ErrorCode::VertexApproach, "trajectory entered the sqrt(I)/2 ball");
    }
    return false;
  };
  auto legs = run_legs(rhs, 0.0, y0, span, settings.ode(), hook);

  auto mp = std::make_shared<const Manifold>(m);
  auto make_sample = [mp, n](double s, const Eigen::VectorXd& y) {
    return sample_from_chart(*mp, s, y[0], y.segment(1, n), y[n + 1], y.tail(n));
  };

  Trajectory traj;
  traj.s_lo = std::min(span.a, 0.0);
  traj.s_hi = std::max(span.b, 0.0);
  traj.dense = [legs, make_sample](double s) { return make_sample(s, (*legs)(s)); };
  std::vector<double> grid{span.a};
  for (double s : legs->nodes()) {
    if (s > span.a && s < span.b) grid.push_back(s);
  }
  if (span.b > span.a) grid.push_back(span.b);
  for (double s : grid) traj.samples.push_back(traj.dense(s));
  traj.meta = {"direct", settings, m.config_hash(), legs->stats};
  return traj;
}

PhasePoint flow(const Manifold& m, const PhasePoint& p, double s, Backend backend,
                const IntegratorSettings& settings) {
  m.validate(p);
  if (s == 0.0) return p;
  if (classify(p, settings.tol_radial).kind == GeodesicKind::Radial) {
    return {p.x + s * p.v, p.v};
  }
  const Span span{std::min(0.0, s), std::max(0.0, s)};
  const Trajectory traj = backend == Backend::Direct
                              ? flow_cone_direct(m, to_chart_state(m, p), span, settings)
                              : flow_cone_lift(m, p, span, settings);
  return traj.state(s);
}

Trajectory sample_trajectory(const Manifold& m, const PhasePoint& p, Span span, int n_samples,
                             Backend backend, const IntegratorSettings& settings) {
  if (n_samples < 2) throw Error(ErrorCode::InvalidArgument, "need at least two samples");
  check_span(span);
  if (!(span.b > span.a)) throw Error(ErrorCode::InvalidArgument, "span is empty");
  m.validate(p);

  Trajectory traj;
  if (classify(p, settings.tol_radial).kind == GeodesicKind::Radial) {
    traj = radial_trajectory(m, p, span);
    traj.meta.settings = settings;
  } else if (backend == Backend::Direct) {
    traj = flow_cone_direct(m, to_chart_state(m, p), span, settings);
  } else {
    traj = flow_cone_lift(m, p, span, settings);
  }
  traj.samples.clear();
  traj.samples.reserve(static_cast<std::size_t>(n_samples));
  const double step = (span.b - span.a) / (n_samples - 1);
  for (int i = 0; i < n_samples; ++i) {
    const double s = i + 1 == n_samples ? span.b : span.a + i * step;
    traj.samples.push_back(traj.dense(s));
  }
  return traj;
}

}  // namespace coneflow

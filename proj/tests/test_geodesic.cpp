#include "doctest.h"

#include <numbers>
#include <random>

#include "coneflow/correspondence.hpp"
#include "coneflow/geodesic.hpp"
#include "coneflow/oracle_unroll.hpp"
#include "support.hpp"

using namespace coneflow;
using testing::vec;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

// Largest position error against the development-plane oracle.
double round_oracle_error(const Trajectory& traj, double rho, const PhasePoint& p) {
  const Manifold m(ManifoldConfig::circle(rho));
  const ConeChartState c = to_chart_state(m, p);
  const RoundConeSpec spec{rho};
  const DevelopedLine line = unroll_state(spec, c.t, c.u[0], c.dt, c.du[0]);
  double worst = 0.0;
  for (const auto& smp : traj.samples) {
    worst = std::max(worst, (oracle_phase(spec, line, smp.s).x - smp.x).norm());
  }
  return worst;
}

}  // namespace

TEST_CASE("unit-speed circle link geodesic is arc length") {
  const Manifold m(ManifoldConfig::circle(1));
  const SigmaTrajectory sg =
      flow_sigma(m, vec({0}), vec({std::sqrt(2.0)}), {0, kPi / 2}, IntegratorSettings{});
  CHECK(sg.at(kPi / 2).u[0] == doctest::Approx(2.22144147).epsilon(1e-8));
  CHECK(sg.samples.back().u[0] == doctest::Approx(std::sqrt(2.0) * kPi / 2).epsilon(1e-12));
  CHECK(code_of([&] { flow_sigma(m, vec({0}), vec({0}), {0, 1}, IntegratorSettings{}); }) ==
        ErrorCode::ZeroVelocity);
}

TEST_CASE("great circles on the round link close up") {
  const Manifold m(ManifoldConfig::sphere(1));
  // sigma = (1/2)(dtheta^2 + sin^2 theta dphi^2); unit speed at the equator.
  const ChartCoords u0 = vec({kPi / 2, 0.3});
  const ChartCoords du0 = vec({1.0, 1.0});
  const double length = 2 * kPi / std::sqrt(2.0);
  const SigmaTrajectory sg = flow_sigma(m, u0, du0, {0, length}, IntegratorSettings{});
  CHECK((sg.at(length).q - m.sigma_point(u0)).norm() < 1e-7);
  // Half way round is the antipode on the latitude sphere x^4 = const.
  const Eigen::VectorXd half = sg.at(length / 2).q;
  const Eigen::VectorXd start = m.sigma_point(u0);
  CHECK((half.head(3) + start.head(3)).norm() < 1e-7);
  CHECK(std::abs(half[3] - start[3]) < 1e-7);
}

TEST_CASE("Sigma speed drift stays within 10 rtol") {
  const Manifold m(ManifoldConfig::torus(2, 0.5));
  IntegratorSettings st;
  st.renormalize_speed = false;
  ChartCoords du = vec({0.7, -1.3});
  du /= std::sqrt(du.dot(m.induced_metric(vec({0.4, 2.0})) * du));
  const SigmaTrajectory sg = flow_sigma(m, vec({0.4, 2.0}), du, {-3, 3}, st);
  double worst = 0.0;
  for (const auto& smp : sg.samples) worst = std::max(worst, std::abs(smp.dq.norm() - 1.0));
  CHECK(worst <= 10 * st.rtol);

  st.renormalize_speed = true;
  const SigmaTrajectory ren = flow_sigma(m, vec({0.4, 2.0}), 3.0 * du, {-3, 3}, st);
  for (const auto& smp : ren.samples) CHECK(smp.dq.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("direct backend on the round cone") {
  const Manifold m(ManifoldConfig::circle(1));
  const PhasePoint p = testing::round_launch();
  const ConeChartState c = to_chart_state(m, p);
  CHECK(c.t == doctest::Approx(std::sqrt(2.0)));
  CHECK(c.dt == doctest::Approx(0.0));
  CHECK(c.du[0] == doctest::Approx(1.0 / std::sqrt(2.0) / std::sqrt(0.5)));

  const Trajectory traj = flow_cone_direct(m, c, {0, std::sqrt(2.0)}, IntegratorSettings{});
  const TrajectorySample end = traj.samples.back();
  CHECK(end.s == std::sqrt(2.0));
  CHECK(testing::max_abs_diff(end.x, vec({0.6280, 1.2672, 1.41421})) < 1e-4);
  CHECK(testing::max_abs_diff(end.x, vec({0.62793322, 1.26716213, 1.41421356})) < 1e-6);
  for (const auto& smp : traj.samples) CHECK(smp.x.squaredNorm() - (smp.s * smp.s + 2) <= 1e-8);
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    CHECK(traj.samples[i].s > traj.samples[i - 1].s);
  }
  CHECK(traj.meta.backend == "direct");
  CHECK(traj.meta.config_hash == m.config_hash());
  CHECK(traj.meta.stats.accepted > 0);
}

TEST_CASE("direct backend preconditions") {
  const Manifold m(ManifoldConfig::circle(1));
  const double r = std::sqrt(0.5);
  ConeChartState radial = to_chart_state(m, {vec({r, 0, r}), vec({r, 0, r})});
  CHECK(code_of([&] { flow_cone_direct(m, radial, {0, 1}, {}); }) == ErrorCode::RadialState);
  CHECK(code_of([&] { flow_cone_direct(m, {0.0, vec({0}), 0.0, vec({1})}, {0, 1}, {}); }) ==
        ErrorCode::RadialState);
  CHECK(code_of([&] { flow_cone_direct(m, {1.0, vec({0}), 0.0, vec({0})}, {0, 1}, {}); }) ==
        ErrorCode::ZeroVelocity);
  IntegratorSettings bad;
  bad.rtol = 0.0;
  CHECK(code_of([&] { flow_cone_direct(m, to_chart_state(m, testing::round_launch()), {0, 1},
                                       bad); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("coarse steps through the vertex region trip the guard") {
  const Manifold m(ManifoldConfig::circle(1));
  Eigen::VectorXd v = vec({-1, 1e-4, -1});
  v /= v.norm();
  IntegratorSettings st;
  st.stepper = Stepper::ClassicalRK4;
  st.h_init = 0.25;
  CHECK(code_of([&] { flow_cone_direct(m, to_chart_state(m, {vec({1, 0, 1}), v}), {0, 3},
                                       st); }) == ErrorCode::VertexApproach);
  // The adaptive stepper resolves the same pass.
  CHECK_NOTHROW(flow_cone_direct(m, to_chart_state(m, {vec({1, 0, 1}), v}), {0, 3}, {}));
}

TEST_CASE("flow examples") {
  const Manifold m(ManifoldConfig::circle(1));
  const double r = std::sqrt(0.5);
  const PhasePoint radial{vec({r, 0, r}), vec({r, 0, r})};
  const PhasePoint at_vertex = flow(m, radial, -1.0);
  CHECK(at_vertex.x.norm() < 1e-16);
  CHECK(at_vertex.v == radial.v);

  const PhasePoint p = testing::round_launch();
  const PhasePoint same = flow(m, p, 0.0);
  CHECK(same.x == p.x);
  CHECK(same.v == p.v);

  for (Backend b : {Backend::Direct, Backend::Lift}) {
    const PhasePoint q = flow(m, p, std::sqrt(2.0), b);
    CHECK(testing::max_abs_diff(q.x, vec({0.62793322, 1.26716213, 1.41421356})) < 1e-6);
  }
}

TEST_CASE("radial flow is the exact straight line") {
  const Manifold m(ManifoldConfig::torus(2, 0.5));
  const AmbientVector q = m.sigma_point(vec({1.0, 2.0}));
  const PhasePoint p{1.3 * q, -0.7 * q};
  for (double s : {-3.0, -1.0, 0.5, 1.857142857142857, 2.5, 10.0}) {
    const PhasePoint out = flow(m, p, s);
    CHECK(out.x == p.x + s * p.v);
    CHECK(out.v == p.v);
  }
}

TEST_CASE("sample_trajectory preconditions and grid") {
  const Manifold m(ManifoldConfig::circle(1));
  const PhasePoint p = testing::round_launch();
  CHECK(code_of([&] { sample_trajectory(m, p, {0, 0}, 2); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { sample_trajectory(m, p, {0, 1}, 1); }) == ErrorCode::InvalidArgument);
  const Trajectory traj = sample_trajectory(m, p, {-1, 1}, 5);
  REQUIRE(traj.samples.size() == 5);
  CHECK(traj.samples[0].s == -1.0);
  CHECK(traj.samples[2].s == 0.0);
  CHECK(traj.samples[4].s == 1.0);
  for (const auto& smp : traj.samples) CHECK((traj.at(smp.s).x - smp.x).norm() == 0.0);
}

TEST_CASE("round cone: conservation of I over a long span") {
  const Manifold m(ManifoldConfig::circle(1));
  const Trajectory traj = sample_trajectory(m, testing::round_launch(), {-50, 50}, 1001);
  double worst = 0.0;
  for (const auto& smp : traj.samples) {
    worst = std::max(worst, std::abs(integral_I({smp.x, smp.v}) - 2.0));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("torus cone: direct and lift backends agree") {
  const Manifold m(ManifoldConfig::torus(2, 0.5));
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 3; ++trial) {
    const PhasePoint p = testing::random_state(m, rng);
    const Trajectory d = sample_trajectory(m, p, {-20, 20}, 401, Backend::Direct);
    const Trajectory l = sample_trajectory(m, p, {-20, 20}, 401, Backend::Lift);
    double worst = 0.0;
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
      worst = std::max({worst, (d.samples[i].x - l.samples[i].x).norm(),
                        (d.samples[i].v - l.samples[i].v).norm()});
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("invariants along integrated trajectories") {
  const double C = 100;
  std::mt19937_64 rng(23);
  const std::vector<ManifoldConfig> cfgs = {
      ManifoldConfig::circle(0.8), ManifoldConfig::ellipse(2, 1), ManifoldConfig::torus(2, 0.5),
      ManifoldConfig::sphere(0.6, Eigen::Vector3d(0.1, 0.0, 0.2))};
  for (const ManifoldConfig& cfg : cfgs) {
    const Manifold m(cfg);
    for (int trial = 0; trial < 3; ++trial) {
      PhasePoint p = testing::random_state(m, rng);
      const double speed = trial == 2 ? 1.7 : 1.0;
      p.v *= speed;
      for (Backend b : {Backend::Direct, Backend::Lift}) {
        IntegratorSettings st;
        const Trajectory traj = sample_trajectory(m, p, {-10, 10}, 201, b, st);
        const double I0 = integral_I(p);
        const double s0 = tangency_parameter(p);
        double dv = 0, dI = 0, dq = 0, dphi = 0;
        for (const auto& smp : traj.samples) {
          const double s2 = 1 + smp.s * smp.s;
          dv = std::max(dv, std::abs(smp.v.norm() - speed));
          dI = std::max(dI, std::abs(integral_I({smp.x, smp.v}) - I0) / (1 + I0));
          const double law = speed * speed * (smp.s - s0) * (smp.s - s0) + I0;
          dq = std::max(dq, std::abs(smp.x.squaredNorm() - law) / s2);
          dphi = std::max(dphi, std::abs(smp.x.dot(smp.v) - phi_affine(p, smp.s)) / s2);
        }
        CHECK(dv <= C * st.rtol);
        CHECK(dI <= C * st.rtol);
        CHECK(dq <= C * st.rtol);
        CHECK(dphi <= C * st.rtol);
      }
    }
  }
}

TEST_CASE("lower nappe launches stay on the lower nappe") {
  const Manifold m(ManifoldConfig::torus(2, 0.5));
  const AmbientVector q = m.sigma_point(vec({0.5, 1.0}));
  const SigmaFrame f = m.sigma_frame(vec({0.5, 1.0}));
  PhasePoint p{-1.5 * q, 0.2 * q + f.dq * vec({0.4, 0.9})};
  p.v /= p.v.norm();
  const Trajectory d = sample_trajectory(m, p, {-8, 8}, 161, Backend::Direct);
  const Trajectory l = sample_trajectory(m, p, {-8, 8}, 161, Backend::Lift);
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    CHECK(d.samples[i].t < 0.0);
    CHECK(l.samples[i].t < 0.0);
    CHECK((d.samples[i].x - l.samples[i].x).norm() < 1e-6);
  }
}

TEST_CASE("halving rtol at least halves the oracle error") {
  const Manifold m(ManifoldConfig::circle(1));
  const PhasePoint p = testing::round_launch();
  double previous = 0.0;
  for (double rtol : {1e-7, 5e-8, 2.5e-8}) {
    IntegratorSettings st;
    st.rtol = rtol;
    st.atol = rtol;
    const double err =
        round_oracle_error(sample_trajectory(m, p, {-50, 50}, 1001, Backend::Direct, st), 1, p);
    if (previous > 0.0) CHECK(previous / err >= 2.0);
    previous = err;
  }
}

TEST_CASE("chart state round trip") {
  const Manifold m(ManifoldConfig::torus(2, 0.5));
  std::mt19937_64 rng(29);
  for (int i = 0; i < 50; ++i) {
    const PhasePoint p = testing::random_state(m, rng);
    const PhasePoint back = to_ambient(m, to_chart_state(m, p));
    CHECK((back.x - p.x).norm() < 1e-12);
    CHECK((back.v - p.v).norm() < 1e-10);
  }
}

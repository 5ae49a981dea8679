#include "doctest.h"

#include <numbers>
#include <random>

#include "coneflow/manifold.hpp"
#include "support.hpp"

using namespace coneflow;
using testing::vec;

namespace {

constexpr double kPi = std::numbers::pi;

// Induced metric from central differences of sigma_point alone.
Eigen::MatrixXd fd_metric(const Manifold& m, const ChartCoords& u, double h) {
  const int n = m.n();
  Eigen::MatrixXd dq(m.ambient_dim(), n);
  for (int i = 0; i < n; ++i) {
    ChartCoords up = u, dn = u;
    up[i] += h;
    dn[i] -= h;
    dq.col(i) = (m.sigma_point(up) - m.sigma_point(dn)) / (2 * h);
  }
  return dq.transpose() * dq;
}

// Christoffel symbols by brute-force differentiation of fd_metric.
std::vector<double> brute_christoffels(const Manifold& m, const ChartCoords& u) {
  const int n = m.n();
  const double h = 1e-3;
  std::vector<Eigen::MatrixXd> ds;
  for (int l = 0; l < n; ++l) {
    ChartCoords up = u, dn = u;
    up[l] += h;
    dn[l] -= h;
    ds.push_back((fd_metric(m, up, 1e-5) - fd_metric(m, dn, 1e-5)) / (2 * h));
  }
  const Eigen::MatrixXd inv = fd_metric(m, u, 1e-5).inverse();
  std::vector<double> out(static_cast<std::size_t>(n * n * n), 0.0);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l) {
          acc += 0.5 * inv(k, l) * (ds[i](j, l) + ds[j](i, l) - ds[l](i, j));
        }
        out[static_cast<std::size_t>((k * n + i) * n + j)] = acc;
      }
  return out;
}

std::shared_ptr<ChartSpec> custom_ellipse(bool with_hessian) {
  auto c = std::make_shared<ChartSpec>();
  c->n = 1;
  c->ambient_dim = 3;
  c->eval = [](const ChartCoords& u) { return vec({2 * std::cos(u[0]), std::sin(u[0]), 1}); };
  c->jacobian = [](const ChartCoords& u) {
    Eigen::MatrixXd j(3, 1);
    j << -2 * std::sin(u[0]), std::cos(u[0]), 0;
    return j;
  };
  if (with_hessian) {
    c->hessian = [](const ChartCoords& u) {
      Eigen::MatrixXd h(3, 1);
      h << -2 * std::cos(u[0]), -std::sin(u[0]), 0;
      return ChartHessian{h};
    };
  }
  c->periods = {2 * kPi};
  c->lower = vec({0});
  c->upper = vec({2 * kPi});
  return c;
}

}  // namespace

TEST_CASE("evaluate_chart examples") {
  CHECK(Manifold(ManifoldConfig::circle(1)).evaluate_chart(vec({0})) == vec({1, 0, 1}));
  CHECK(testing::max_abs_diff(Manifold(ManifoldConfig::ellipse(2, 1)).evaluate_chart(vec({kPi / 2})),
                              vec({0, 1, 1})) < 1e-15);
  CHECK(Manifold(ManifoldConfig::torus(2, 0.5)).evaluate_chart(vec({0, 0})) ==
        vec({2.5, 0, 0, 1}));
}

TEST_CASE("last chart coordinate is exactly one") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-10, 10);
  const Manifold torus(ManifoldConfig::torus(2, 0.5));
  const Manifold sphere(ManifoldConfig::sphere(0.7, Eigen::Vector3d(0.2, -0.1, 0.3)));
  for (int i = 0; i < 100; ++i) {
    CHECK(torus.evaluate_chart(vec({ang(rng), ang(rng)}))[3] == 1.0);
    CHECK(sphere.evaluate_chart(vec({std::abs(ang(rng)) / 10 * kPi / 1.0001, ang(rng)}))[3] == 1.0);
  }
}

TEST_CASE("non-periodic coordinates outside the box are rejected") {
  const Manifold sphere(ManifoldConfig::sphere(1));
  try {
    sphere.evaluate_chart(vec({-0.1, 0}));
    FAIL("expected DomainError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DomainError);
  }
  CHECK_NOTHROW(Manifold(ManifoldConfig::circle(1)).evaluate_chart(vec({100.0})));
}

TEST_CASE("sigma_point examples") {
  const Manifold c(ManifoldConfig::circle(1));
  const double r = std::sqrt(0.5);
  CHECK(testing::max_abs_diff(c.sigma_point(vec({0})), vec({r, 0, r})) < 1e-15);
  CHECK(testing::max_abs_diff(c.sigma_point(vec({kPi / 2})), vec({0, r, r})) < 1e-15);
  const Manifold t(ManifoldConfig::torus(2, 0.5));
  CHECK(testing::max_abs_diff(t.sigma_point(vec({0, 0})),
                              vec({0.92847669088525941, 0, 0, 0.37139067635410372})) < 1e-15);
}

TEST_CASE("q is unit and orthogonal to its derivatives") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(0, 2 * kPi), pol(0.1, kPi - 0.1);
  const Manifold torus(ManifoldConfig::torus(2, 0.5));
  const Manifold sphere(ManifoldConfig::sphere(0.5, Eigen::Vector3d(0.3, 0.0, -0.2)));
  const Manifold ellipse(ManifoldConfig::ellipse(3, 0.5));
  for (int i = 0; i < 200; ++i) {
    for (const auto& [m, u] : {std::pair{&torus, vec({ang(rng), ang(rng)})},
                              std::pair{&sphere, vec({pol(rng), ang(rng)})},
                              std::pair{&ellipse, vec({ang(rng)})}}) {
      const SigmaFrame f = m->sigma_frame(u);
      CHECK(std::abs(f.q.norm() - 1.0) < 1e-12);
      CHECK((f.dq.transpose() * f.q).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("round link metric is constant") {
  for (double rho : {0.5, 1.0, 3.0}) {
    const Manifold m(ManifoldConfig::circle(rho));
    for (double u : {0.0, 1.0, 4.0}) {
      CHECK(m.induced_metric(vec({u}))(0, 0) ==
            doctest::Approx(rho * rho / (1 + rho * rho)).epsilon(1e-14));
      CHECK(m.christoffels(vec({u}))(0, 0, 0) == doctest::Approx(0.0).epsilon(1e-14));
    }
  }
  CHECK(Manifold(ManifoldConfig::circle(1)).induced_metric(vec({2.0}))(0, 0) ==
        doctest::Approx(0.5));
}

TEST_CASE("induced metric matches finite differences of q") {
  const Manifold torus(ManifoldConfig::torus(2, 0.5));
  CHECK((torus.induced_metric(vec({0, 0})) - fd_metric(torus, vec({0, 0}), 1e-5))
            .cwiseAbs()
            .maxCoeff() < 1e-8);

  const Manifold sphere(ManifoldConfig::sphere(1));
  const ChartCoords u = vec({kPi / 2, 0.4});
  CHECK((sphere.induced_metric(u) - fd_metric(sphere, u, 1e-5)).cwiseAbs().maxCoeff() < 1e-8);
  // Centered sphere: the link is a round sphere of radius rho / sqrt(1 + rho^2).
  CHECK(sphere.induced_metric(u)(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(sphere.induced_metric(u)(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(sphere.induced_metric(u)(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("degenerate chart point is rank deficient") {
  const Manifold sphere(ManifoldConfig::sphere(1));
  try {
    sphere.induced_metric(vec({0.0, 0.3}));
    FAIL("expected RankDeficient");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RankDeficient);
  }
}

TEST_CASE("centered sphere link has round-sphere Christoffels") {
  const Manifold sphere(ManifoldConfig::sphere(1));
  for (double theta : {0.4, 1.0, 2.2}) {
    const ChartCoords u = vec({theta, 0.7});
    const ChristoffelSymbols g = sphere.christoffels(u);
    CHECK(g(0, 1, 1) == doctest::Approx(-std::sin(theta) * std::cos(theta)).epsilon(1e-12));
    CHECK(g(1, 0, 1) == doctest::Approx(std::cos(theta) / std::sin(theta)).epsilon(1e-12));
    CHECK(g(1, 1, 0) == doctest::Approx(std::cos(theta) / std::sin(theta)).epsilon(1e-12));
    CHECK(std::abs(g(0, 0, 0)) < 1e-12);
    CHECK(std::abs(g(1, 1, 1)) < 1e-12);
  }
}

TEST_CASE("Christoffels agree with a brute-force oracle") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ang(0, 2 * kPi), pol(0.3, kPi - 0.3);
  const Manifold offset(ManifoldConfig::sphere(0.6, Eigen::Vector3d(0.2, 0.1, -0.3)));
  const Manifold torus(ManifoldConfig::torus(2, 0.5));
  for (int trial = 0; trial < 10; ++trial) {
    for (const auto& [m, u] : {std::pair{&offset, vec({pol(rng), ang(rng)})},
                              std::pair{&torus, vec({ang(rng), ang(rng)})}}) {
      const ChristoffelSymbols g = m->christoffels(u);
      const std::vector<double> ref = brute_christoffels(*m, u);
      for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            CHECK(std::abs(g(k, i, j) - ref[static_cast<std::size_t>((k * 2 + i) * 2 + j)]) <
                  1e-5);
          }
    }
  }
}

TEST_CASE("finite-difference and analytic Christoffels agree") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ang(0, 2 * kPi);
  ManifoldConfig cfg = ManifoldConfig::torus(2, 0.5);
  const Manifold torus(cfg);
  cfg.richardson = true;
  const Manifold torus_rich(cfg);
  for (int trial = 0; trial < 20; ++trial) {
    const ChartCoords u = vec({ang(rng), ang(rng)});
    const ChristoffelSymbols a = torus.christoffels(u, DerivativeMethod::Analytic);
    const ChristoffelSymbols f = torus.christoffels(u, DerivativeMethod::FiniteDifference);
    const ChristoffelSymbols r = torus_rich.christoffels(u, DerivativeMethod::FiniteDifference);
    double worst = 0.0, worst_rich = 0.0;
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          worst = std::max(worst, std::abs(a(k, i, j) - f(k, i, j)));
          worst_rich = std::max(worst_rich, std::abs(a(k, i, j) - r(k, i, j)));
          CHECK(a(k, i, j) == a(k, j, i));
          CHECK(f(k, i, j) == f(k, j, i));
        }
    CHECK(worst < 1e-6);
    CHECK(worst_rich < 1e-6);
  }
}

TEST_CASE("ambient_to_chart examples") {
  const Manifold c(ManifoldConfig::circle(1));
  const ChartPoint a = c.ambient_to_chart(vec({1, 0, 1}));
  CHECK(a.t == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(a.u[0] == doctest::Approx(0.0));

  // Lower nappe: t carries the sign, q(u) keeps the upper-nappe chart.
  const ChartPoint b = c.ambient_to_chart(vec({-2, 0, -2}));
  CHECK(b.t == doctest::Approx(-2 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(testing::max_abs_diff(b.t * c.sigma_point(b.u), vec({-2, 0, -2})) < 1e-14);
  CHECK(std::abs(std::remainder(b.u[0], 2 * kPi)) < 1e-14);

  const Manifold t(ManifoldConfig::torus(2, 0.5));
  const ChartPoint d = t.ambient_to_chart(3.0 * t.sigma_point(vec({0.3, 1.1})));
  CHECK(d.t == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(testing::max_abs_diff(d.u, vec({0.3, 1.1})) < 1e-10);
}

TEST_CASE("points off the cone are rejected") {
  const Manifold c(ManifoldConfig::circle(1));
  for (const Eigen::VectorXd& x : {vec({1, 0, 2}), vec({3, 0, 1})}) {
    try {
      c.ambient_to_chart(x);
      FAIL("expected NotOnCone");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotOnCone);
    }
  }
  CHECK_THROWS_AS(c.ambient_to_chart(vec({0, 0, 0})), Error);
}

TEST_CASE("ambient_to_chart inverts t q(u) on random points") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ang(0, 2 * kPi), pol(0.05, kPi - 0.05), tt(0.1, 5);
  const Manifold torus(ManifoldConfig::torus(3, 1));
  const Manifold sphere(ManifoldConfig::sphere(0.8, Eigen::Vector3d(0.1, 0.2, 0.3)));
  const Manifold ellipse(ManifoldConfig::ellipse(0.5, 2));
  for (int trial = 0; trial < 200; ++trial) {
    const double t = tt(rng) * (trial % 2 ? -1 : 1);
    for (const auto& [m, u] : {std::pair{&torus, vec({ang(rng), ang(rng)})},
                              std::pair{&sphere, vec({pol(rng), ang(rng)})},
                              std::pair{&ellipse, vec({ang(rng)})}}) {
      const AmbientVector x = t * m->sigma_point(u);
      const ChartPoint cp = m->ambient_to_chart(x);
      CHECK(cp.t == doctest::Approx(t).epsilon(1e-13));
      CHECK(testing::max_abs_diff(m->reduce(cp.u), m->reduce(u)) < 1e-9);
      CHECK((cp.t * m->sigma_point(cp.u) - x).norm() < 1e-9 * std::abs(t));
    }
  }
}

TEST_CASE("custom charts: Newton inversion and finite-difference Christoffels") {
  const Manifold builtin(ManifoldConfig::ellipse(2, 1));
  const Manifold custom(ManifoldConfig::from_chart(custom_ellipse(false)));
  const Manifold custom_h(ManifoldConfig::from_chart(custom_ellipse(true)));
  CHECK_FALSE(custom.has_hessian());
  CHECK(custom_h.has_hessian());
  for (double u : {0.1, 1.3, 2.9, 4.4, 6.0}) {
    const AmbientVector x = 1.7 * builtin.sigma_point(vec({u}));
    CHECK(custom.ambient_to_chart(x).u[0] == doctest::Approx(u).epsilon(1e-10));
    CHECK(custom.christoffels(vec({u}))(0, 0, 0) ==
          doctest::Approx(builtin.christoffels(vec({u}))(0, 0, 0)).epsilon(1e-6));
    CHECK(custom_h.christoffels(vec({u}))(0, 0, 0) ==
          doctest::Approx(builtin.christoffels(vec({u}))(0, 0, 0)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(custom.christoffels(vec({0.5}), DerivativeMethod::Analytic), Error);
}

TEST_CASE("invalid parameters") {
  for (const ManifoldConfig& cfg :
       {ManifoldConfig::circle(0), ManifoldConfig::ellipse(1, -1), ManifoldConfig::torus(1, 2),
        ManifoldConfig::sphere(-1)}) {
    try {
      Manifold m(cfg);
      FAIL("expected InvalidArgument");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidArgument);
    }
  }
}

TEST_CASE("validate phase points") {
  const Manifold c(ManifoldConfig::circle(1));
  CHECK_NOTHROW(c.validate(testing::round_launch()));
  CHECK_NOTHROW(c.validate({vec({1, 0, 1}), vec({1, 0, 1})}));
  CHECK_THROWS_AS(c.validate({vec({1, 0, 1}), vec({0, 0, 1})}), Error);
  CHECK_THROWS_AS(c.validate({vec({1, 0, 2}), vec({0, 1, 0})}), Error);

  const double r = std::sqrt(0.5);
  CHECK_NOTHROW(c.validate({vec({0, 0, 0}), vec({r, 0, r})}));
  CHECK_NOTHROW(c.validate({vec({0, 0, 0}), vec({-r, 0, -r})}));
  CHECK_THROWS_AS(c.validate({vec({0, 0, 0}), vec({0, 0, 1})}), Error);
}

TEST_CASE("reduce and config hash") {
  const Manifold s(ManifoldConfig::sphere(1));
  const ChartCoords u = s.reduce(vec({1.0, -0.5}));
  CHECK(u[0] == 1.0);
  CHECK(u[1] == doctest::Approx(2 * kPi - 0.5));

  const Manifold a(ManifoldConfig::torus(2, 0.5)), b(ManifoldConfig::torus(2, 0.5)),
      c(ManifoldConfig::torus(2, 0.6));
  CHECK(a.config_hash() == b.config_hash());
  CHECK(a.config_hash() != c.config_hash());
}

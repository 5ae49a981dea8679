#include "doctest.h"

#include <random>

#include "coneflow/ambient.hpp"
#include "support.hpp"

using namespace coneflow;
using testing::vec;

TEST_CASE("integral_I examples") {
  CHECK(integral_I({vec({1, 0, 1}), vec({0, 1, 0})}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(integral_I({vec({1, 0, 1}), vec({0.5, std::sqrt(0.5), 0.5})}) ==
        doctest::Approx(1.0).epsilon(1e-15));
  const double r = std::sqrt(0.5);
  for (double k : {0.5, 1.0, 3.0}) {
    CHECK(integral_I({vec({k * r, 0, k * r}), vec({r, 0, r})}) == doctest::Approx(0.0));
  }
}

TEST_CASE("integral_I rejects zero velocity and mismatched sizes") {
  CHECK_THROWS_AS(integral_I({vec({1, 0, 1}), vec({0, 0, 0})}), Error);
  try {
    integral_I({vec({1, 0, 1}), vec({0, 0, 0})});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroVelocity);
  }
  CHECK_THROWS_AS(integral_I({vec({1, 0, 1}), vec({0, 1})}), Error);
}

TEST_CASE("classify examples") {
  const Classification a = classify({vec({1, 0, 1}), vec({0, 1, 0})});
  CHECK(a.kind == GeodesicKind::NonRadial);
  CHECK(a.I_value == doctest::Approx(2.0));

  const double r = std::sqrt(0.5);
  const Classification b = classify({vec({r, 0, r}), vec({r, 0, r})});
  CHECK(b.kind == GeodesicKind::Radial);
  CHECK(b.I_value == 0.0);

  const Classification vertex = classify({vec({0, 0, 0}), vec({r, 0, r})});
  CHECK(vertex.kind == GeodesicKind::Radial);
  CHECK(vertex.I_value == 0.0);
}

TEST_CASE("tangency parameter examples") {
  CHECK(tangency_parameter({vec({1, 0, 1}), vec({0, 1, 0})}) == 0.0);
  CHECK(tangency_parameter({vec({1, 0, 1}), vec({0.5, std::sqrt(0.5), 0.5})}) ==
        doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(tangency_parameter({vec({1, 0, 1}), vec({1, std::sqrt(2.0), 1})}) ==
        doctest::Approx(-0.5).epsilon(1e-15));

  const double r = std::sqrt(0.5);
  try {
    tangency_parameter({vec({r, 0, r}), vec({r, 0, r})});
    FAIL("expected RadialState");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RadialState);
  }
}

TEST_CASE("scale_phase examples") {
  const PhasePoint p{vec({1, 0, 1}), vec({0, 1, 0})};
  const PhasePoint a = scale_phase(p, 2.0, 1.0);
  CHECK(a.x == vec({2, 0, 2}));
  CHECK(a.v == vec({0, 2, 0}));
  CHECK(integral_I(a) == doctest::Approx(8.0));

  const PhasePoint id = scale_phase(p, 1.0, 1.0);
  CHECK(id.x == p.x);
  CHECK(id.v == p.v);

  const PhasePoint c = scale_phase(p, 1.0, 3.0);
  CHECK(c.v == vec({0, 3, 0}));
  CHECK(integral_I(c) == doctest::Approx(2.0));

  for (auto [a1, a2] : {std::pair{0.0, 1.0}, std::pair{1.0, 0.0}}) {
    try {
      scale_phase(p, a1, a2);
      FAIL("expected ZeroScale");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ZeroScale);
    }
  }
}

TEST_CASE("I is nonnegative, homogeneous, and zero exactly on parallel pairs") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::VectorXd x = vec({g(rng), g(rng), g(rng), g(rng)});
    const Eigen::VectorXd v = vec({g(rng), g(rng), g(rng), g(rng)});
    const double I = integral_I({x, v});
    CHECK(I >= 0.0);

    const double a = scale(rng) * (trial % 2 ? 1 : -1);
    const double b = scale(rng) * (trial % 3 ? 1 : -1);
    CHECK(integral_I({a * x, b * v}) == doctest::Approx(a * a * I).epsilon(1e-12));

    CHECK(integral_I({x, b * x}) <= 1e-12 * x.squaredNorm());
  }
}

TEST_CASE("tangency parameter scales inversely with speed") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> speed(0.1, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const PhasePoint p{vec({g(rng), g(rng), g(rng)}), vec({g(rng), g(rng), g(rng)})};
    const double c = speed(rng);
    CHECK(tangency_parameter({p.x, c * p.v}) ==
          doctest::Approx(tangency_parameter(p) / c).epsilon(1e-12));
  }
}

TEST_CASE("phi_affine is the straight-line identity") {
  const PhasePoint p{vec({1, 0, 1}), vec({0.5, std::sqrt(0.5), 0.5})};
  CHECK(phi_affine(p, 0.0) == doctest::Approx(1.0));
  CHECK(phi_affine(p, tangency_parameter(p)) == doctest::Approx(0.0).epsilon(1e-15));
}

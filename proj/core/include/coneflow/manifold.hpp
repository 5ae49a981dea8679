#pragma once

// A closed manifold Gamma given by one periodic chart p(u) into the
// hyperplane {x^{N+1} = 1}, together with the spherical link
// Sigma = K cap S^N obtained by radial projection q = p / |p|.

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coneflow/ambient.hpp"

namespace coneflow {

using ChartCoords = Eigen::VectorXd;

/// Second derivatives of a chart: entry i is the (N+1) x n matrix whose
/// column j is d^2 p / du^i du^j.
using ChartHessian = std::vector<Eigen::MatrixXd>;

/// Metric of Sigma in chart coordinates, sigma_ij = <dq/du^i, dq/du^j>.
using SigmaMetric = Eigen::MatrixXd;

struct ChartSpec {
  int n = 0;            // intrinsic dimension
  int ambient_dim = 0;  // N + 1
  std::function<AmbientVector(const ChartCoords&)> eval;
  std::function<Eigen::MatrixXd(const ChartCoords&)> jacobian;
  std::function<ChartHessian(const ChartCoords&)> hessian;  // may be empty
  /// Closed-form inverse of eval on the hyperplane, if one exists.
  std::function<std::optional<ChartCoords>(const AmbientVector&)> invert;
  std::vector<std::optional<double>> periods;
  /// Box used for domain checks (non-periodic coordinates) and for the
  /// Newton seed search of custom charts.
  ChartCoords lower;
  ChartCoords upper;
};

enum class ManifoldKind { Circle, Ellipse, Torus, Sphere, Custom };

std::string to_string(ManifoldKind kind);

struct ManifoldConfig {
  ManifoldKind kind = ManifoldKind::Circle;
  double rho = 1.0;                                 // circle, sphere
  double a = 1.0, b = 1.0;                          // ellipse semi-axes
  double R = 2.0, r = 0.5;                          // torus radii
  Eigen::Vector3d center = Eigen::Vector3d::Zero();  // sphere offset
  std::shared_ptr<const ChartSpec> custom;

  double tol_cone = kDefaultTolCone;
  double newton_tol = 1e-14;
  int newton_max_iter = 60;
  double fd_step = 1e-5;
  bool richardson = false;

  static ManifoldConfig circle(double rho);
  static ManifoldConfig ellipse(double a, double b);
  static ManifoldConfig torus(double R, double r);
  static ManifoldConfig sphere(double rho,
                               Eigen::Vector3d center = Eigen::Vector3d::Zero());
  static ManifoldConfig from_chart(std::shared_ptr<const ChartSpec> chart);
};

/// Radial projection of the chart and its first derivatives.
struct SigmaFrame {
  AmbientVector q;     // p / |p|
  Eigen::MatrixXd dq;  // (N+1) x n, (Id - q q^T) dp / |p|
};

/// Gamma^k_ij stored densely, symmetric in (i, j).
class ChristoffelSymbols {
 public:
  explicit ChristoffelSymbols(int n) : n_(n), data_(n * n * n, 0.0) {}

  int n() const { return n_; }
  double& operator()(int k, int i, int j) { return data_[(k * n_ + i) * n_ + j]; }
  double operator()(int k, int i, int j) const {
    return data_[(k * n_ + i) * n_ + j];
  }

  /// -Gamma^k_ij w^i w^j.
  Eigen::VectorXd contract(const Eigen::VectorXd& w) const;

 private:
  int n_;
  std::vector<double> data_;
};

enum class DerivativeMethod { Auto, Analytic, FiniteDifference };

/// Everything the geodesic right-hand sides need at one chart point.
struct LinkGeometry {
  SigmaMetric sigma;
  ChristoffelSymbols gamma;
};

/// Position on K in chart form, x = t q(u). t < 0 labels the lower nappe.
struct ChartPoint {
  double t;
  ChartCoords u;
};

class Manifold {
 public:
  explicit Manifold(ManifoldConfig config);

  const ManifoldConfig& config() const { return config_; }
  int n() const { return chart_->n; }
  int ambient_dim() const { return chart_->ambient_dim; }
  const std::vector<std::optional<double>>& periods() const {
    return chart_->periods;
  }
  const ChartSpec& chart() const { return *chart_; }
  bool has_hessian() const { return static_cast<bool>(chart_->hessian); }
  double tol_cone() const { return config_.tol_cone; }

  AmbientVector evaluate_chart(const ChartCoords& u) const;
  Eigen::MatrixXd chart_jacobian(const ChartCoords& u) const;
  AmbientVector sigma_point(const ChartCoords& u) const;
  SigmaFrame sigma_frame(const ChartCoords& u) const;
  SigmaMetric induced_metric(const ChartCoords& u) const;
  ChristoffelSymbols christoffels(
      const ChartCoords& u,
      DerivativeMethod method = DerivativeMethod::Auto) const;
  LinkGeometry link_geometry(
      const ChartCoords& u,
      DerivativeMethod method = DerivativeMethod::Auto) const;

  ChartPoint ambient_to_chart(const AmbientVector& x) const;

  /// Periodic coordinates reduced into [0, period).
  ChartCoords reduce(const ChartCoords& u) const;

  /// Throws NotOnCone unless p is a valid state on T K: x on K and v in
  /// T_x K (for x = 0, v in K).
  void validate(const PhasePoint& p) const;

  /// Stable identifier of the configuration, stored in trajectory metadata.
  std::string config_hash() const;

 private:
  void check_domain(const ChartCoords& u) const;
  ChartCoords newton_invert(const AmbientVector& target) const;
  std::vector<SigmaMetric> metric_derivatives_analytic(const ChartCoords& u) const;
  std::vector<SigmaMetric> metric_derivatives_fd(const ChartCoords& u) const;

  ManifoldConfig config_;
  std::shared_ptr<const ChartSpec> chart_;
};

/// Builds the chart for one of the built-in kinds. Exposed for tests that
/// need the raw parametrization.
std::shared_ptr<const ChartSpec> make_builtin_chart(const ManifoldConfig& cfg);

}  // namespace coneflow

#include "coneflow/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>

namespace coneflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) out[i++] = v;
  return out;
}

std::shared_ptr<ChartSpec> circle_like(double a, double b) {
  auto chart = std::make_shared<ChartSpec>();
  chart->n = 1;
  chart->ambient_dim = 3;
  chart->eval = [a, b](const ChartCoords& u) {
    return vec({a * std::cos(u[0]), b * std::sin(u[0]), 1.0});
  };
  chart->jacobian = [a, b](const ChartCoords& u) {
    Eigen::MatrixXd J(3, 1);
    J << -a * std::sin(u[0]), b * std::cos(u[0]), 0.0;
    return J;
  };
  chart->hessian = [a, b](const ChartCoords& u) {
    Eigen::MatrixXd H(3, 1);
    H << -a * std::cos(u[0]), -b * std::sin(u[0]), 0.0;
    return ChartHessian{H};
  };
  chart->invert = [a, b](const AmbientVector& p) -> std::optional<ChartCoords> {
    return vec({std::atan2(p[1] / b, p[0] / a)});
  };
  chart->periods = {kTwoPi};
  chart->lower = vec({0.0});
  chart->upper = vec({kTwoPi});
  return chart;
}

std::shared_ptr<ChartSpec> torus_chart(double R, double r) {
  auto chart = std::make_shared<ChartSpec>();
  chart->n = 2;
  chart->ambient_dim = 4;
  // u = (longitude phi, meridian angle w)
  chart->eval = [R, r](const ChartCoords& u) {
    const double rad = R + r * std::cos(u[1]);
    return vec({rad * std::cos(u[0]), rad * std::sin(u[0]), r * std::sin(u[1]), 1.0});
  };
  chart->jacobian = [R, r](const ChartCoords& u) {
    const double cp = std::cos(u[0]), sp = std::sin(u[0]);
    const double cw = std::cos(u[1]), sw = std::sin(u[1]);
    const double rad = R + r * cw;
    Eigen::MatrixXd J(4, 2);
    J << -rad * sp, -r * sw * cp,
          rad * cp, -r * sw * sp,
          0.0,       r * cw,
          0.0,       0.0;
    return J;
  };
  chart->hessian = [R, r](const ChartCoords& u) {
    const double cp = std::cos(u[0]), sp = std::sin(u[0]);
    const double cw = std::cos(u[1]), sw = std::sin(u[1]);
    const double rad = R + r * cw;
    Eigen::MatrixXd Hphi(4, 2), Hw(4, 2);
    Hphi << -rad * cp,  r * sw * sp,
            -rad * sp, -r * sw * cp,
             0.0,       0.0,
             0.0,       0.0;
    Hw <<  r * sw * sp, -r * cw * cp,
          -r * sw * cp, -r * cw * sp,
           0.0,         -r * sw,
           0.0,          0.0;
    return ChartHessian{Hphi, Hw};
  };
  chart->invert = [R](const AmbientVector& p) -> std::optional<ChartCoords> {
    return vec({std::atan2(p[1], p[0]), std::atan2(p[2], std::hypot(p[0], p[1]) - R)});
  };
  chart->periods = {kTwoPi, kTwoPi};
  chart->lower = vec({0.0, 0.0});
  chart->upper = vec({kTwoPi, kTwoPi});
  return chart;
}

std::shared_ptr<ChartSpec> sphere_chart(double rho, const Eigen::Vector3d& c) {
  auto chart = std::make_shared<ChartSpec>();
  chart->n = 2;
  chart->ambient_dim = 4;
  // u = (polar angle theta, azimuth phi); singular at theta in {0, pi}.
  chart->eval = [rho, c](const ChartCoords& u) {
    const double st = std::sin(u[0]), ct = std::cos(u[0]);
    return vec({c[0] + rho * st * std::cos(u[1]), c[1] + rho * st * std::sin(u[1]),
                c[2] + rho * ct, 1.0});
  };
  chart->jacobian = [rho](const ChartCoords& u) {
    const double st = std::sin(u[0]), ct = std::cos(u[0]);
    const double sp = std::sin(u[1]), cp = std::cos(u[1]);
    Eigen::MatrixXd J(4, 2);
    J << rho * ct * cp, -rho * st * sp,
         rho * ct * sp,  rho * st * cp,
        -rho * st,       0.0,
         0.0,            0.0;
    return J;
  };
  chart->hessian = [rho](const ChartCoords& u) {
    const double st = std::sin(u[0]), ct = std::cos(u[0]);
    const double sp = std::sin(u[1]), cp = std::cos(u[1]);
    Eigen::MatrixXd Htheta(4, 2), Hphi(4, 2);
    Htheta << -rho * st * cp, -rho * ct * sp,
              -rho * st * sp,  rho * ct * cp,
              -rho * ct,       0.0,
               0.0,            0.0;
    Hphi << -rho * ct * sp, -rho * st * cp,
             rho * ct * cp, -rho * st * sp,
             0.0,            0.0,
             0.0,            0.0;
    return ChartHessian{Htheta, Hphi};
  };
  chart->invert = [rho, c](const AmbientVector& p) -> std::optional<ChartCoords> {
    const double z = std::clamp((p[2] - c[2]) / rho, -1.0, 1.0);
    return vec({std::acos(z), std::atan2(p[1] - c[1], p[0] - c[0])});
  };
  chart->periods = {std::nullopt, kTwoPi};
  chart->lower = vec({0.0, 0.0});
  chart->upper = vec({std::numbers::pi, kTwoPi});
  return chart;
}

// d/du^i and d^2/du^i du^j of q = p/|p| from derivatives of p.
struct QDerivatives {
  SigmaFrame frame;
  std::vector<Eigen::MatrixXd> second;  // second[i].col(j) = d^2 q/du^i du^j
};

QDerivatives q_derivatives(const AmbientVector& p, const Eigen::MatrixXd& P,
                           const ChartHessian& H) {
  const Eigen::Index n = P.cols();
  const double r = p.norm();
  const double r3 = r * r * r;
  const double r5 = r3 * r * r;
  const Eigen::VectorXd a = P.transpose() * p;  // a_i = <p, P_i>

  QDerivatives out;
  out.frame.q = p / r;
  out.frame.dq.resize(p.size(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.frame.dq.col(i) = P.col(i) / r - p * (a[i] / r3);
  }
  out.second.assign(static_cast<std::size_t>(n), Eigen::MatrixXd(p.size(), n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::VectorXd Pij = H[static_cast<std::size_t>(i)].col(j);
      out.second[static_cast<std::size_t>(i)].col(j) =
          Pij / r - P.col(i) * (a[j] / r3) - P.col(j) * (a[i] / r3) -
          p * ((P.col(i).dot(P.col(j)) + p.dot(Pij)) / r3) +
          p * (3.0 * a[i] * a[j] / r5);
    }
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::Circle: return "circle";
    case ManifoldKind::Ellipse: return "ellipse";
    case ManifoldKind::Torus: return "torus";
    case ManifoldKind::Sphere: return "sphere";
    case ManifoldKind::Custom: return "custom";
  }
  return "unknown";
}

ManifoldConfig ManifoldConfig::circle(double rho) {
  ManifoldConfig cfg;
  cfg.kind = ManifoldKind::Circle;
  cfg.rho = rho;
  return cfg;
}

ManifoldConfig ManifoldConfig::ellipse(double a, double b) {
  ManifoldConfig cfg;
  cfg.kind = ManifoldKind::Ellipse;
  cfg.a = a;
  cfg.b = b;
  return cfg;
}

ManifoldConfig ManifoldConfig::torus(double R, double r) {
  ManifoldConfig cfg;
  cfg.kind = ManifoldKind::Torus;
  cfg.R = R;
  cfg.r = r;
  return cfg;
}

ManifoldConfig ManifoldConfig::sphere(double rho, Eigen::Vector3d center) {
  ManifoldConfig cfg;
  cfg.kind = ManifoldKind::Sphere;
  cfg.rho = rho;
  cfg.center = center;
  return cfg;
}

ManifoldConfig ManifoldConfig::from_chart(std::shared_ptr<const ChartSpec> chart) {
  ManifoldConfig cfg;
  cfg.kind = ManifoldKind::Custom;
  cfg.custom = std::move(chart);
  return cfg;
}

std::shared_ptr<const ChartSpec> make_builtin_chart(const ManifoldConfig& cfg) {
  switch (cfg.kind) {
    case ManifoldKind::Circle:
      if (!(cfg.rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "circle needs rho > 0");
      return circle_like(cfg.rho, cfg.rho);
    case ManifoldKind::Ellipse:
      if (!(cfg.a > 0.0 && cfg.b > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "ellipse needs a, b > 0");
      }
      return circle_like(cfg.a, cfg.b);
    case ManifoldKind::Torus:
      if (!(cfg.R > cfg.r && cfg.r > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "torus needs R > r > 0");
      }
      return torus_chart(cfg.R, cfg.r);
    case ManifoldKind::Sphere:
      if (!(cfg.rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "sphere needs rho > 0");
      return sphere_chart(cfg.rho, cfg.center);
    case ManifoldKind::Custom:
      break;
  }
  throw Error(ErrorCode::InvalidArgument, "custom manifolds carry their own chart");
}

Eigen::VectorXd ChristoffelSymbols::contract(const Eigen::VectorXd& w) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
  for (int k = 0; k < n_; ++k) {
    double acc = 0.0;
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) acc += (*this)(k, i, j) * w[i] * w[j];
    }
    out[k] = -acc;
  }
  return out;
}

Manifold::Manifold(ManifoldConfig config) : config_(std::move(config)) {
  if (config_.kind == ManifoldKind::Custom) {
    if (!config_.custom) throw Error(ErrorCode::InvalidArgument, "custom chart missing");
    const ChartSpec& c = *config_.custom;
    if (c.n < 1 || c.ambient_dim <= c.n || !c.eval || !c.jacobian ||
        static_cast<int>(c.periods.size()) != c.n || c.lower.size() != c.n ||
        c.upper.size() != c.n) {
      throw Error(ErrorCode::InvalidArgument,
                  "custom chart needs n, ambient_dim > n, eval, jacobian, periods "
                  "and a domain box");
    }
    chart_ = config_.custom;
  } else {
    chart_ = make_builtin_chart(config_);
  }
  if (!(config_.tol_cone > 0.0) || !(config_.fd_step > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
  }
}

void Manifold::check_domain(const ChartCoords& u) const {
  if (u.size() != n()) {
    throw Error(ErrorCode::InvalidArgument, "chart coordinates have wrong dimension");
  }
  for (int i = 0; i < n(); ++i) {
    if (!std::isfinite(u[i])) throw Error(ErrorCode::DomainError, "non-finite coordinate");
    if (!chart_->periods[static_cast<std::size_t>(i)] &&
        (u[i] < chart_->lower[i] || u[i] > chart_->upper[i])) {
      throw Error(ErrorCode::DomainError,
                  "coordinate " + std::to_string(i) + " outside the chart domain");
    }
  }
}

AmbientVector Manifold::evaluate_chart(const ChartCoords& u) const {
  check_domain(u);
  AmbientVector p = chart_->eval(u);
  p[ambient_dim() - 1] = 1.0;
  return p;
}

Eigen::MatrixXd Manifold::chart_jacobian(const ChartCoords& u) const {
  check_domain(u);
  return chart_->jacobian(u);
}

AmbientVector Manifold::sigma_point(const ChartCoords& u) const {
  const AmbientVector p = evaluate_chart(u);
  return p / p.norm();
}

SigmaFrame Manifold::sigma_frame(const ChartCoords& u) const {
  const AmbientVector p = evaluate_chart(u);
  const Eigen::MatrixXd P = chart_->jacobian(u);
  const double r = p.norm();
  SigmaFrame f;
  f.q = p / r;
  f.dq = (P - f.q * (f.q.transpose() * P)) / r;
  return f;
}

SigmaMetric Manifold::induced_metric(const ChartCoords& u) const {
  const SigmaFrame f = sigma_frame(u);
  SigmaMetric sigma = f.dq.transpose() * f.dq;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  if (!(eig.eigenvalues().minCoeff() > 1e-13 * std::max(lmax, 1.0))) {
    throw Error(ErrorCode::RankDeficient, "induced metric is not positive definite");
  }
  return sigma;
}

std::vector<SigmaMetric> Manifold::metric_derivatives_analytic(const ChartCoords& u) const {
  const AmbientVector p = evaluate_chart(u);
  const QDerivatives d = q_derivatives(p, chart_->jacobian(u), chart_->hessian(u));
  const int dim = n();
  std::vector<SigmaMetric> dsigma(static_cast<std::size_t>(dim), SigmaMetric(dim, dim));
  for (int k = 0; k < dim; ++k) {
    const Eigen::MatrixXd& qk = d.second[static_cast<std::size_t>(k)];
    // d_k sigma_ij = <q_ik, q_j> + <q_i, q_jk>
    const Eigen::MatrixXd m = qk.transpose() * d.frame.dq;
    dsigma[static_cast<std::size_t>(k)] = m + m.transpose();
  }
  return dsigma;
}

std::vector<SigmaMetric> Manifold::metric_derivatives_fd(const ChartCoords& u) const {
  const int dim = n();
  const double h = config_.fd_step;
  auto central = [&](int k, double step) {
    ChartCoords up = u, dn = u;
    up[k] += step;
    dn[k] -= step;
    const SigmaFrame fp = sigma_frame(up), fm = sigma_frame(dn);
    return SigmaMetric((fp.dq.transpose() * fp.dq - fm.dq.transpose() * fm.dq) / (2.0 * step));
  };
  std::vector<SigmaMetric> dsigma;
  dsigma.reserve(static_cast<std::size_t>(dim));
  for (int k = 0; k < dim; ++k) {
    if (config_.richardson) {
      dsigma.push_back((4.0 * central(k, 0.5 * h) - central(k, h)) / 3.0);
    } else {
      dsigma.push_back(central(k, h));
    }
  }
  return dsigma;
}

ChristoffelSymbols Manifold::christoffels(const ChartCoords& u,
                                          DerivativeMethod method) const {
  return link_geometry(u, method).gamma;
}

LinkGeometry Manifold::link_geometry(const ChartCoords& u, DerivativeMethod method) const {
  SigmaMetric sigma = induced_metric(u);
  bool analytic = method == DerivativeMethod::Analytic ||
                  (method == DerivativeMethod::Auto && has_hessian());
  if (analytic && !has_hessian()) {
    throw Error(ErrorCode::InvalidArgument, "chart has no analytic hessian");
  }
  const std::vector<SigmaMetric> ds =
      analytic ? metric_derivatives_analytic(u) : metric_derivatives_fd(u);

  const int dim = n();
  // first[l](i, j) = 1/2 (d_i sigma_jl + d_j sigma_il - d_l sigma_ij)
  Eigen::MatrixXd first(dim * dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      for (int l = 0; l < dim; ++l) {
        first(i * dim + j, l) =
            0.5 * (ds[static_cast<std::size_t>(i)](j, l) +
                   ds[static_cast<std::size_t>(j)](i, l) -
                   ds[static_cast<std::size_t>(l)](i, j));
      }
    }
  }
  const Eigen::MatrixXd second = sigma.llt().solve(first.transpose());  // dim x dim^2
  ChristoffelSymbols gamma(dim);
  for (int k = 0; k < dim; ++k) {
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) gamma(k, i, j) = second(k, i * dim + j);
    }
  }
  return {std::move(sigma), std::move(gamma)};
}

ChartCoords Manifold::newton_invert(const AmbientVector& target) const {
  const int dim = n();
  const ChartSpec& c = *chart_;
  // Coarse seed search over the domain box, then Gauss-Newton on p(u) = target.
  constexpr int kGrid = 16;
  ChartCoords best = c.lower;
  double best_res = std::numeric_limits<double>::infinity();
  const long total = static_cast<long>(std::pow(kGrid, dim));
  for (long idx = 0; idx < total; ++idx) {
    ChartCoords u(dim);
    long rem = idx;
    for (int i = 0; i < dim; ++i) {
      const double frac = (static_cast<double>(rem % kGrid) + 0.5) / kGrid;
      rem /= kGrid;
      u[i] = c.lower[i] + frac * (c.upper[i] - c.lower[i]);
    }
    const double res = (c.eval(u) - target).squaredNorm();
    if (res < best_res) {
      best_res = res;
      best = u;
    }
  }
  ChartCoords u = best;
  for (int it = 0; it < config_.newton_max_iter; ++it) {
    const Eigen::VectorXd residual = c.eval(u) - target;
    const Eigen::MatrixXd J = c.jacobian(u);
    const Eigen::VectorXd step = J.colPivHouseholderQr().solve(-residual);
    u += step;
    for (int i = 0; i < dim; ++i) {
      if (!c.periods[static_cast<std::size_t>(i)]) {
        u[i] = std::clamp(u[i], c.lower[i], c.upper[i]);
      }
    }
    if (step.norm() <= config_.newton_tol * (1.0 + u.norm())) return u;
  }
  throw Error(ErrorCode::NoConvergence, "chart inversion did not converge");
}

ChartPoint Manifold::ambient_to_chart(const AmbientVector& x) const {
  if (x.size() != ambient_dim()) {
    throw Error(ErrorCode::InvalidArgument, "ambient vector has wrong dimension");
  }
  const double norm = x.norm();
  if (!(norm > 0.0)) throw Error(ErrorCode::DomainError, "the vertex has no chart coordinates");
  const double last = x[ambient_dim() - 1];
  if (!(std::abs(last) > 1e-300) || !std::isfinite(norm)) {
    throw Error(ErrorCode::NotOnCone, "point does not project onto the hyperplane");
  }
  const AmbientVector p = x / last;
  const double t = std::copysign(norm, last);
  ChartCoords u;
  if (chart_->invert) {
    auto guess = chart_->invert(p);
    if (!guess) throw Error(ErrorCode::NotOnCone, "closed-form chart inversion failed");
    u = *guess;
  } else {
    u = newton_invert(p);
  }
  u = reduce(u);
  for (int i = 0; i < n(); ++i) {
    if (!chart_->periods[static_cast<std::size_t>(i)]) {
      u[i] = std::clamp(u[i], chart_->lower[i], chart_->upper[i]);
    }
  }
  const double residual = (sigma_point(u) - x / t).norm();
  if (!(residual <= config_.tol_cone)) {
    throw Error(ErrorCode::NotOnCone,
                "distance to the link is " + format_double(residual));
  }
  return {t, u};
}

ChartCoords Manifold::reduce(const ChartCoords& u) const {
  ChartCoords out = u;
  for (int i = 0; i < n(); ++i) {
    if (const auto& period = chart_->periods[static_cast<std::size_t>(i)]) {
      double v = std::fmod(u[i], *period);
      if (v < 0.0) v += *period;
      if (v >= *period) v = 0.0;
      out[i] = v;
    }
  }
  return out;
}

void Manifold::validate(const PhasePoint& p) const {
  if (p.x.size() != ambient_dim() || p.v.size() != ambient_dim()) {
    throw Error(ErrorCode::InvalidArgument, "phase point has wrong dimension");
  }
  if (!p.x.allFinite() || !p.v.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "phase point has non-finite entries");
  }
  const double speed = p.v.norm();
  if (!(speed > 0.0)) throw Error(ErrorCode::ZeroVelocity, "|v| = 0");
  if (p.x.norm() == 0.0) {
    // T_O K := K
    ambient_to_chart(p.v);
    return;
  }
  const ChartPoint cp = ambient_to_chart(p.x);
  const SigmaFrame f = sigma_frame(cp.u);
  Eigen::MatrixXd basis(ambient_dim(), n() + 1);
  basis.col(0) = f.q;
  basis.rightCols(n()) = f.dq;
  const Eigen::VectorXd coeff = basis.colPivHouseholderQr().solve(p.v);
  const double off = (p.v - basis * coeff).norm() / speed;
  if (!(off <= config_.tol_cone)) {
    throw Error(ErrorCode::NotOnCone, "velocity leaves the tangent space by " +
                                          format_double(off));
  }
}

std::string Manifold::config_hash() const {
  std::string key = to_string(config_.kind);
  for (double v : {config_.rho, config_.a, config_.b, config_.R, config_.r,
                   config_.center[0], config_.center[1], config_.center[2]}) {
    key += ':' + format_double(v);
  }
  if (config_.custom) key += ":custom";
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char ch : key) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace coneflow

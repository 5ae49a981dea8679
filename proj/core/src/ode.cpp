#include "coneflow/ode.hpp"

#include <algorithm>
#include <cmath>

#include "coneflow/error.hpp"

namespace coneflow {

namespace {

// Dormand-Prince 5(4) tableau with the FSAL stage k7 = f(x + h, y1).
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                 a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Continuous extension (Hairer, dopri5 contd5).
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;

double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0,
                  const Eigen::VectorXd& y1, const OdeOptions& opt) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sk = opt.atol + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    worst = std::max(worst, std::abs(err[i]) / sk);
  }
  return worst;
}

double initial_step(const OdeRhs& f, double x0, const Eigen::VectorXd& y0,
                    const Eigen::VectorXd& f0, double direction, double h_max,
                    const OdeOptions& opt, StepStats& stats) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(y0.size());
  const double dnf = error_norm(f0, y0, zero, opt);
  const double dny = error_norm(y0, y0, zero, opt);
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
  h = std::min(h, h_max);
  const Eigen::VectorXd y1 = y0 + direction * h * f0;
  Eigen::VectorXd f1(y0.size());
  f(x0 + direction * h, y1, f1);
  ++stats.rhs_evals;
  const double der2 = error_norm(f1 - f0, y0, zero, opt) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3)
                                   : std::pow(0.01 / der12, 1.0 / 5.0);
  return std::min({100.0 * h, h1, h_max});
}

OdeResult integrate_dopri(const OdeRhs& f, double x0, const Eigen::VectorXd& y0,
                          double x_end, const OdeOptions& opt, const StepHook& hook) {
  OdeResult out;
  out.solution = DenseSolution(x0, y0);
  const double direction = x_end > x0 ? 1.0 : -1.0;
  const double span = std::abs(x_end - x0);
  const double h_max = opt.h_max > 0.0 ? std::min(opt.h_max, span) : span;
  const Eigen::Index dim = y0.size();

  Eigen::VectorXd y = y0, k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim),
                  k7(dim), ystage(dim), y1(dim);
  f(x0, y, k1);
  ++out.stats.rhs_evals;
  double h = opt.h_init > 0.0 ? std::min(opt.h_init, h_max)
                              : initial_step(f, x0, y, k1, direction, h_max, opt, out.stats);
  double x = x0;
  bool last_rejected = false;

  while (direction * (x_end - x) > 0.0) {
    if (out.stats.accepted + out.stats.rejected >= opt.max_steps) {
      throw Error(ErrorCode::StepLimit, "exceeded max_steps before reaching the end of the span");
    }
    if (h < 1e-14 * std::max(1.0, std::abs(x))) {
      throw Error(ErrorCode::StepLimit, "step size underflow");
    }
    bool final_step = false;
    if (h >= direction * (x_end - x)) {
      h = direction * (x_end - x);
      final_step = true;
    }
    const double hs = direction * h;

    ystage = y + hs * a21 * k1;
    f(x + c2 * hs, ystage, k2);
    ystage = y + hs * (a31 * k1 + a32 * k2);
    f(x + c3 * hs, ystage, k3);
    ystage = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
    f(x + c4 * hs, ystage, k4);
    ystage = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(x + c5 * hs, ystage, k5);
    ystage = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(x + hs, ystage, k6);
    y1 = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    f(x + hs, y1, k7);
    out.stats.rhs_evals += 6;

    const Eigen::VectorXd err =
        hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = error_norm(err, y, y1, opt);

    if (!std::isfinite(en)) {
      ++out.stats.rejected;
      h *= 0.2;
      last_rejected = true;
      continue;
    }
    double factor = en == 0.0 ? 10.0 : 0.9 * std::pow(en, -0.2);
    if (en <= 1.0) {
      DenseSolution::Segment seg;
      seg.x0 = x;
      seg.h = hs;
      seg.r1 = y;
      seg.r2 = y1 - y;
      seg.r3 = hs * k1 - seg.r2;
      seg.r4 = seg.r2 - hs * k7 - seg.r3;
      seg.r5 = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      out.solution.append(std::move(seg));
      ++out.stats.accepted;

      x = final_step ? x_end : x + hs;
      y = y1;
      k1 = k7;
      if (hook && hook(x, y)) {
        f(x, y, k1);
        ++out.stats.rhs_evals;
      }
      if (last_rejected) factor = std::min(factor, 1.0);
      h = std::min(h * std::clamp(factor, 0.2, 10.0), h_max);
      last_rejected = false;
    } else {
      ++out.stats.rejected;
      h *= std::clamp(factor, 0.2, 1.0);
      last_rejected = true;
    }
  }
  out.y_end = y;
  return out;
}

OdeResult integrate_rk4(const OdeRhs& f, double x0, const Eigen::VectorXd& y0,
                        double x_end, const OdeOptions& opt, const StepHook& hook) {
  OdeResult out;
  out.solution = DenseSolution(x0, y0);
  const double span = x_end - x0;
  const double step = opt.h_init > 0.0 ? opt.h_init : std::abs(span) / 1000.0;
  const long n_steps = std::max(1L, static_cast<long>(std::ceil(std::abs(span) / step - 1e-9)));
  if (n_steps > opt.max_steps) {
    throw Error(ErrorCode::StepLimit, "fixed-step RK4 would exceed max_steps");
  }
  const double hs = span / static_cast<double>(n_steps);
  const Eigen::Index dim = y0.size();
  Eigen::VectorXd y = y0, k1(dim), k2(dim), k3(dim), k4(dim), f1(dim);
  f(x0, y, k1);
  ++out.stats.rhs_evals;
  for (long i = 0; i < n_steps; ++i) {
    const double x = x0 + static_cast<double>(i) * hs;
    f(x + 0.5 * hs, y + 0.5 * hs * k1, k2);
    f(x + 0.5 * hs, y + 0.5 * hs * k2, k3);
    f(x + hs, y + hs * k3, k4);
    Eigen::VectorXd y1 = y + hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double x1 = i + 1 == n_steps ? x_end : x + hs;
    f(x1, y1, f1);
    out.stats.rhs_evals += 4;

    DenseSolution::Segment seg;
    seg.x0 = x;
    seg.h = hs;
    seg.r1 = y;
    seg.r2 = y1 - y;
    seg.r3 = hs * k1 - seg.r2;
    seg.r4 = seg.r2 - hs * f1 - seg.r3;
    seg.r5 = Eigen::VectorXd::Zero(dim);
    out.solution.append(std::move(seg));
    ++out.stats.accepted;

    y = std::move(y1);
    k1 = f1;
    if (hook && hook(x1, y)) {
      f(x1, y, k1);
      ++out.stats.rhs_evals;
    }
  }
  out.y_end = y;
  return out;
}

}  // namespace

bool DenseSolution::covers(double x) const {
  const double lo = std::min(x0_, x_end_), hi = std::max(x0_, x_end_);
  return x >= lo && x <= hi;
}

void DenseSolution::append(Segment segment) {
  x_end_ = segment.x0 + segment.h;
  segments_.push_back(std::move(segment));
}

Eigen::VectorXd DenseSolution::operator()(double x) const {
  if (segments_.empty()) {
    if (x != x0_) throw Error(ErrorCode::DomainError, "dense output queried off its interval");
    return y0_;
  }
  if (!covers(x)) throw Error(ErrorCode::DomainError, "dense output queried off its interval");
  const bool forward = x_end_ >= x0_;
  // First segment whose end lies at or beyond x in the integration direction.
  auto it = std::lower_bound(segments_.begin(), segments_.end(), x,
                             [forward](const Segment& s, double value) {
                               const double end = s.x0 + s.h;
                               return forward ? end < value : end > value;
                             });
  if (it == segments_.end()) it = std::prev(segments_.end());
  const Segment& s = *it;
  const double theta = (x - s.x0) / s.h;
  const double theta1 = 1.0 - theta;
  return s.r1 + theta * (s.r2 + theta1 * (s.r3 + theta * (s.r4 + theta1 * s.r5)));
}

std::vector<double> DenseSolution::nodes() const {
  std::vector<double> out;
  out.reserve(segments_.size() + 1);
  out.push_back(x0_);
  for (const Segment& s : segments_) out.push_back(s.x0 + s.h);
  if (!segments_.empty()) out.back() = x_end_;
  return out;
}

Eigen::VectorXd DenseSolution::node_state(std::size_t i) const {
  if (i == 0) return y0_;
  const Segment& s = segments_.at(i - 1);
  return s.r1 + s.r2;
}

OdeResult integrate(const OdeRhs& rhs, double x0, const Eigen::VectorXd& y0,
                    double x_end, const OdeOptions& options, const StepHook& hook) {
  if (!(options.rtol > 0.0) || !(options.atol > 0.0) || options.max_steps <= 0) {
    throw Error(ErrorCode::InvalidArgument, "rtol, atol and max_steps must be positive");
  }
  if (!std::isfinite(x0) || !std::isfinite(x_end)) {
    throw Error(ErrorCode::InvalidArgument, "non-finite integration bounds");
  }
  if (x_end == x0) {
    OdeResult out;
    out.solution = DenseSolution(x0, y0);
    out.y_end = y0;
    return out;
  }
  return options.stepper == Stepper::DormandPrince54
             ? integrate_dopri(rhs, x0, y0, x_end, options, hook)
             : integrate_rk4(rhs, x0, y0, x_end, options, hook);
}

}  // namespace coneflow

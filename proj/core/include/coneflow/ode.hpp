#pragma once

// Explicit Runge-Kutta integration with dense output: an adaptive
// Dormand-Prince 5(4) pair and a fixed-step classical RK4 kept for drift
// studies.

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace coneflow {

enum class Stepper { DormandPrince54, ClassicalRK4 };

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 0.0;  // 0 selects the starting step automatically; RK4 uses it as its fixed step
  double h_max = 0.0;   // 0 means unbounded
  long max_steps = 1'000'000;
  Stepper stepper = Stepper::DormandPrince54;
};

using OdeRhs = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Called after every accepted step. May rewrite the state (projection)
/// and must then return true; may throw to abort the integration.
using StepHook = std::function<bool(double, Eigen::VectorXd&)>;

struct StepStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;

  StepStats& operator+=(const StepStats& other) {
    accepted += other.accepted;
    rejected += other.rejected;
    rhs_evals += other.rhs_evals;
    return *this;
  }
};

/// Piecewise polynomial interpolant over the accepted steps of one
/// integration leg. Valid between start() and end() in either direction.
class DenseSolution {
 public:
  DenseSolution() = default;
  DenseSolution(double x0, Eigen::VectorXd y0) : x0_(x0), x_end_(x0), y0_(std::move(y0)) {}

  double start() const { return x0_; }
  double end() const { return x_end_; }
  bool covers(double x) const;

  Eigen::VectorXd operator()(double x) const;

  /// Step endpoints in integration order, including the start point.
  std::vector<double> nodes() const;
  Eigen::VectorXd node_state(std::size_t i) const;
  std::size_t size() const { return segments_.size(); }

  // Hairer's continuous extension: y(theta) = r1 + theta (r2 + (1-theta)
  // (r3 + theta (r4 + (1-theta) r5))). With r5 = 0 this is cubic Hermite.
  struct Segment {
    double x0;
    double h;
    Eigen::VectorXd r1, r2, r3, r4, r5;
  };
  void append(Segment segment);

 private:
  double x0_ = 0.0;
  double x_end_ = 0.0;
  Eigen::VectorXd y0_;
  std::vector<Segment> segments_;
};

struct OdeResult {
  DenseSolution solution;
  Eigen::VectorXd y_end;
  StepStats stats;
};

/// Integrates y' = f(x, y) from x0 to x_end (x_end < x0 allowed).
/// Throws Error(StepLimit) when max_steps is exhausted or the step size
/// underflows.
OdeResult integrate(const OdeRhs& rhs, double x0, const Eigen::VectorXd& y0,
                    double x_end, const OdeOptions& options,
                    const StepHook& hook = {});

}  // namespace coneflow

#pragma once

// Post-processing of trace output: self-intersections of the traced curve.
// Works on (s, x, v) rows, so it applies both to in-memory trajectories and
// to trace CSV files.

#include <istream>
#include <vector>

#include "coneflow/geodesic.hpp"

namespace coneflow::cli {

struct TraceRow {
  double s;
  AmbientVector x;
  AmbientVector v;
};

std::vector<TraceRow> rows_from_trajectory(const Trajectory& traj);

/// Reads the s, x_*, v_* columns of a trace CSV. Throws std::runtime_error
/// on a malformed header or row.
std::vector<TraceRow> read_trace_csv(std::istream& in);

struct Crossing {
  double s1;
  double s2;   // s2 > s1
  double gap;  // |x(s1) - x(s2)| after refinement
};

/// Pairs of parameters, at least `min_separation` apart, where the curve
/// returns to the same ambient point. Candidates come from a segment scan
/// of the polyline and are refined by Gauss-Newton on the cubic Hermite
/// interpolant of the rows; those ending with gap <= tol are returned,
/// ordered by s1.
std::vector<Crossing> find_self_intersections(const std::vector<TraceRow>& rows,
                                              double tol = 1e-6,
                                              double min_separation = 1e-3);

}  // namespace coneflow::cli

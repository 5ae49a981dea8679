#include "coneflow/cli/crossing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace coneflow::cli {

namespace {

struct Hermite {
  const std::vector<TraceRow>& rows;

  std::size_t segment(double s) const {
    auto it = std::upper_bound(rows.begin(), rows.end(), s,
                               [](double value, const TraceRow& r) { return value < r.s; });
    std::size_t i = it == rows.begin() ? 0 : static_cast<std::size_t>(it - rows.begin()) - 1;
    return std::min(i, rows.size() - 2);
  }

  // Position and derivative at s.
  void eval(double s, AmbientVector& x, AmbientVector& dx) const {
    const std::size_t i = segment(s);
    const TraceRow& a = rows[i];
    const TraceRow& b = rows[i + 1];
    const double h = b.s - a.s;
    const double th = (s - a.s) / h;
    const double th2 = th * th, th3 = th2 * th;
    const double h00 = 2 * th3 - 3 * th2 + 1, h10 = th3 - 2 * th2 + th;
    const double h01 = -2 * th3 + 3 * th2, h11 = th3 - th2;
    x = h00 * a.x + (h10 * h) * a.v + h01 * b.x + (h11 * h) * b.v;
    const double d00 = (6 * th2 - 6 * th) / h, d10 = 3 * th2 - 4 * th + 1;
    const double d01 = (-6 * th2 + 6 * th) / h, d11 = 3 * th2 - 2 * th;
    dx = d00 * a.x + d10 * a.v + d01 * b.x + d11 * b.v;
  }
};

// Closest points of segments [p0,p1] and [q0,q1]; returns the distance and
// the fractions along each.
double segment_distance(const AmbientVector& p0, const AmbientVector& p1,
                        const AmbientVector& q0, const AmbientVector& q1, double& fa,
                        double& fb) {
  const AmbientVector d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  const double c = d1.dot(r), b = d1.dot(d2);
  const double denom = a * e - b * b;
  fa = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
  fb = e > 0.0 ? (b * fa + f) / e : 0.0;
  if (fb < 0.0) {
    fb = 0.0;
    fa = a > 0.0 ? std::clamp(-c / a, 0.0, 1.0) : 0.0;
  } else if (fb > 1.0) {
    fb = 1.0;
    fa = a > 0.0 ? std::clamp((b - c) / a, 0.0, 1.0) : 0.0;
  }
  return (p0 + fa * d1 - q0 - fb * d2).norm();
}

}  // namespace

std::vector<TraceRow> rows_from_trajectory(const Trajectory& traj) {
  std::vector<TraceRow> rows;
  rows.reserve(traj.samples.size());
  for (const auto& smp : traj.samples) rows.push_back({smp.s, smp.x, smp.v});
  return rows;
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace csv: empty input");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.empty() || header[0] != "s") throw std::runtime_error("trace csv: bad header");
  std::vector<std::size_t> xcols, vcols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i].rfind("x_", 0) == 0) xcols.push_back(i);
    if (header[i].rfind("v_", 0) == 0) vcols.push_back(i);
  }
  if (xcols.empty() || xcols.size() != vcols.size()) {
    throw std::runtime_error("trace csv: missing x_/v_ columns");
  }

  std::vector<TraceRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        cells.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("trace csv: bad number on line " + std::to_string(lineno));
      }
    }
    if (cells.size() != header.size()) {
      throw std::runtime_error("trace csv: wrong column count on line " + std::to_string(lineno));
    }
    const auto dim = static_cast<Eigen::Index>(xcols.size());
    TraceRow row{cells[0], AmbientVector(dim), AmbientVector(dim)};
    for (Eigen::Index k = 0; k < dim; ++k) {
      row.x[k] = cells[xcols[static_cast<std::size_t>(k)]];
      row.v[k] = cells[vcols[static_cast<std::size_t>(k)]];
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Crossing> find_self_intersections(const std::vector<TraceRow>& rows, double tol,
                                              double min_separation) {
  std::vector<Crossing> found;
  if (rows.size() < 4) return found;
  const Hermite curve{rows};
  const std::size_t nseg = rows.size() - 1;

  // Chord error bound used to admit candidates from the polyline scan.
  double longest = 0.0;
  for (std::size_t i = 0; i < nseg; ++i) {
    longest = std::max(longest, (rows[i + 1].x - rows[i].x).norm());
  }
  const double admit = std::max(tol, 0.5 * longest);

  for (std::size_t i = 0; i < nseg; ++i) {
    for (std::size_t j = i + 2; j < nseg; ++j) {
      if (rows[j].s - rows[i + 1].s < min_separation) continue;
      double fa = 0.0, fb = 0.0;
      const double dist =
          segment_distance(rows[i].x, rows[i + 1].x, rows[j].x, rows[j + 1].x, fa, fb);
      if (dist > admit) continue;

      double a = rows[i].s + fa * (rows[i + 1].s - rows[i].s);
      double b = rows[j].s + fb * (rows[j + 1].s - rows[j].s);
      AmbientVector xa, da, xb, db;
      double gap = 0.0;
      for (int it = 0; it < 50; ++it) {
        curve.eval(a, xa, da);
        curve.eval(b, xb, db);
        const AmbientVector r = xa - xb;
        gap = r.norm();
        Eigen::MatrixXd jac(r.size(), 2);
        jac.col(0) = da;
        jac.col(1) = -db;
        const Eigen::Vector2d step = jac.colPivHouseholderQr().solve(-r);
        a = std::clamp(a + step[0], rows.front().s, rows.back().s);
        b = std::clamp(b + step[1], rows.front().s, rows.back().s);
        if (step.norm() < 1e-15 * (1.0 + std::abs(a) + std::abs(b))) break;
      }
      curve.eval(a, xa, da);
      curve.eval(b, xb, db);
      gap = (xa - xb).norm();
      if (a > b) std::swap(a, b);
      if (gap > tol || b - a < min_separation) continue;
      const bool duplicate = std::any_of(found.begin(), found.end(), [&](const Crossing& c) {
        return std::abs(c.s1 - a) < min_separation && std::abs(c.s2 - b) < min_separation;
      });
      if (!duplicate) found.push_back({a, b, gap});
    }
  }
  std::sort(found.begin(), found.end(),
            [](const Crossing& l, const Crossing& r) { return l.s1 < r.s1; });
  return found;
}

}  // namespace coneflow::cli

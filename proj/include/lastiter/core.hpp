#pragma once

// Problem data model shared by the solver, the certificate checks and the
// worst-case generators: points, oracle samples, feasible-set projections,
// problem instances and run traces.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lastiter/errors.hpp"

namespace lastiter {

using Point = Eigen::VectorXd;
using Index = Eigen::Index;

/// Subgradients with norm at or below this value are treated as zero.
inline constexpr double kZeroTol = 1e-14;

/// Iteration counter handed to oracles (1-based). Evaluations made outside
/// the method loop (averages, reference points, audits) pass std::nullopt.
using Iteration = std::optional<std::size_t>;

struct SubgradientSample {
  double value = 0.0;
  Point subgradient;
  bool is_zero = false;
};

inline SubgradientSample make_sample(double value, Point subgradient) {
  const bool zero = subgradient.norm() <= kZeroTol;
  return {value, std::move(subgradient), zero};
}

using Oracle = std::function<SubgradientSample(const Point&, Iteration)>;
using Projection = std::function<Point(const Point&)>;

inline bool all_finite(const Point& x) { return x.allFinite(); }

// ---------------------------------------------------------------------------
// Projections

/// X = R^n.
inline Projection project_all() {
  return [](const Point& y) { return y; };
}

inline Projection project_box(Point lo, Point hi) {
  if (lo.size() != hi.size()) throw InvalidArgument("project_box: bound dimensions differ");
  if ((lo.array() > hi.array()).any()) throw InvalidArgument("project_box: lo > hi");
  return [lo = std::move(lo), hi = std::move(hi)](const Point& y) -> Point {
    if (y.size() != lo.size()) throw InvalidArgument("project_box: dimension mismatch");
    return y.cwiseMax(lo).cwiseMin(hi);
  };
}

inline Projection project_ball(Point center, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("project_ball: radius must be positive");
  return [center = std::move(center), radius](const Point& y) -> Point {
    if (y.size() != center.size()) throw InvalidArgument("project_ball: dimension mismatch");
    const Point d = y - center;
    const double n = d.norm();
    if (n <= radius) return y;
    return center + (radius / n) * d;
  };
}

// ---------------------------------------------------------------------------
// Problem instances

/// A convex problem min_{x in X} f(x) together with the constants of the
/// analysis. B bounds subgradient norms on X, R bounds ||x1 - x_star||.
struct ProblemInstance {
  Oracle oracle;
  Projection projection;
  double f_star = 0.0;
  std::optional<Point> x_star;
  double B = 1.0;
  double R = 1.0;
  Index dimension = 1;
  std::string name;

  SubgradientSample sample(const Point& x, Iteration k = std::nullopt) const {
    if (x.size() != dimension) throw InvalidArgument("oracle: dimension mismatch");
    return oracle(x, k);
  }
  double value(const Point& x) const { return sample(x).value; }
  Point project(const Point& y) const { return projection(y); }

  bool is_feasible(const Point& x, double tol = 1e-12) const {
    return (projection(x) - x).norm() <= tol * (1.0 + x.norm());
  }
};

/// Rescales an instance built with B = R = 1 to arbitrary B and R:
/// f'(x) = B R f(x / R) and X' = R X. Running a method whose steps scale
/// like R / B multiplies every gap by exactly B R.
inline ProblemInstance scale_instance(const ProblemInstance& p, double B, double R) {
  if (!(B > 0.0) || !(R > 0.0)) throw InvalidArgument("scale_instance: B and R must be positive");
  if (p.B != 1.0 || p.R != 1.0) throw InvalidArgument("scale_instance: instance is not normalized");
  ProblemInstance q = p;
  const double br = B * R;
  q.oracle = [inner = p.oracle, B, R, br](const Point& x, Iteration k) {
    SubgradientSample s = inner(x / R, k);
    return make_sample(br * s.value, B * s.subgradient);
  };
  q.projection = [inner = p.projection, R](const Point& y) -> Point { return R * inner(y / R); };
  q.f_star = br * p.f_star;
  if (p.x_star) q.x_star = R * *p.x_star;
  q.B = B;
  q.R = R;
  return q;
}

// ---------------------------------------------------------------------------
// Invariant audit

struct AuditReport {
  double worst_subgradient_inequality = 0.0;  // min over pairs of f(y) - f(x) - <g, y - x>
  double worst_value_below_optimum = 0.0;     // min over x of f(x) - f_star
  double worst_norm_excess = 0.0;             // max over x of ||g|| - B
  double worst_idempotence = 0.0;
  double worst_nonexpansive = 0.0;            // max of ||P y - P z|| - ||y - z||
  bool ok = true;
};

/// Samples random point pairs around the origin (radius `spread` times R) and
/// checks the ProblemInstance invariants: subgradient inequality, f >= f_star
/// on X, bounded subgradients, idempotent and non-expansive projection.
inline AuditReport audit_instance(const ProblemInstance& p, std::uint64_t seed, int samples = 1000,
                                  double spread = 2.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&] {
    Point y(p.dimension);
    for (Index i = 0; i < y.size(); ++i) y[i] = normal(rng);
    return Point(spread * p.R / std::sqrt(static_cast<double>(p.dimension)) * y);
  };
  AuditReport r;
  for (int i = 0; i < samples; ++i) {
    const Point y = draw();
    const Point z = draw();
    const Point py = p.project(y);
    const Point pz = p.project(z);
    r.worst_idempotence = std::max(r.worst_idempotence, (p.project(py) - py).norm());
    r.worst_nonexpansive = std::max(r.worst_nonexpansive, (py - pz).norm() - (y - z).norm());

    const SubgradientSample sy = p.sample(py);
    const SubgradientSample sz = p.sample(pz);
    r.worst_subgradient_inequality =
        std::min(r.worst_subgradient_inequality, sz.value - sy.value - sy.subgradient.dot(pz - py));
    r.worst_value_below_optimum = std::min(r.worst_value_below_optimum, sy.value - p.f_star);
    r.worst_norm_excess = std::max(r.worst_norm_excess, sy.subgradient.norm() - p.B);
  }
  // Absolute tolerances are stated at the B = R = 1 scale.
  const double scale = std::max(1.0, p.B * p.R);
  r.ok = r.worst_subgradient_inequality >= -1e-9 * scale &&
         r.worst_value_below_optimum >= -1e-12 * scale && r.worst_norm_excess <= 1e-12 * p.B &&
         r.worst_idempotence <= 1e-12 * std::max(1.0, p.R) &&
         r.worst_nonexpansive <= 1e-12 * std::max(1.0, p.R);
  return r;
}

// ---------------------------------------------------------------------------
// Run traces

enum class RecordMode { full, values_only };

/// Iterates of one run of the projected subgradient method. In full mode
/// points holds x^1..x^{N+1} and subgradients g^1..g^N; in values_only mode
/// only the final iterate is kept and subgradients is empty.
struct RunTrace {
  std::vector<Point> points;
  std::vector<Point> subgradients;
  std::vector<double> values;  // f(x^1) .. f(x^{N+1})
  std::vector<double> steps;   // h_1 .. h_N
  bool terminated_early = false;
  RecordMode record_mode = RecordMode::full;

  std::size_t iterations() const { return steps.size(); }
  const Point& last_point() const { return points.back(); }
  double last_value() const { return values.back(); }
};

}  // namespace lastiter

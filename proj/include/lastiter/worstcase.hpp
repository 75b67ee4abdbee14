#pragma once

// Instances on which the subgradient method attains its worst-case rate,
// each with the scripted subgradient selections that drive it there.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lastiter/core.hpp"
#include "lastiter/errors.hpp"
#include "lastiter/plmax.hpp"
#include "lastiter/rates.hpp"
#include "lastiter/sequences.hpp"
#include "lastiter/solver.hpp"

namespace lastiter {

/// A piecewise-linear instance bundled with its starting point and, when
/// known, the exact gap the intended run produces.
struct Scenario {
  PiecewiseLinearMax function;
  ProblemInstance instance;  // scripted oracle
  Point x1;
  std::optional<double> predicted_gap;

  /// Same problem with the highest-index tie-break everywhere; use it when
  /// running a schedule other than the one the script was built for.
  ProblemInstance unscripted() const {
    ProblemInstance p = instance;
    auto f = std::make_shared<const PiecewiseLinearMax>(function.without_script());
    p.oracle = [f](const Point& x, Iteration k) { return eval_plmax(*f, x, k); };
    return p;
  }
};

namespace detail {
inline Point unit(Index n, Index i) {
  Point e = Point::Zero(n);
  e[i] = 1.0;
  return e;
}
}  // namespace detail

/// f(x) = B |x| on X = R with x1 = R. Constant steps h <= 1/s_{N+1}^2 leave a
/// gap of exactly B R (1 - N h).
inline Scenario abs_instance(double B, double R) {
  if (!(B > 0.0) || !(R > 0.0)) throw InvalidArgument("abs_instance: B and R must be positive");
  PiecewiseLinearMax f;
  f.slopes = {Point::Constant(1, B), Point::Constant(1, -B)};
  f.intercepts = {0.0, 0.0};
  Scenario sc{f, make_plmax_instance(f, 0.0, Point::Zero(1), B, R, project_all(), "abs"),
              Point::Constant(1, R), std::nullopt};
  return sc;
}

/// Raw data of the long-step construction in R^{N+1} (B = R = 1), indexed
/// 1..N+1 with entry 0 unused. levels[k] is f at z^k.
struct LongStepConstruction {
  std::size_t N = 0;
  double h = 0.0;
  std::vector<double> gamma;  // gamma_1..gamma_N
  std::vector<Point> xi;      // xi^1..xi^{N+1}
  std::vector<Point> z;       // z^1..z^{N+1}
  std::vector<double> levels;
};

inline LongStepConstruction long_step_construction(std::size_t N, double h) {
  if (N < 1) throw InvalidArgument("long_step_instance: N must be >= 1");
  if (!(h > constant_step_knee(N)))
    throw StepTooSmall("long_step_instance: h must exceed 1/s_{N+1}^2");
  const Index n = static_cast<Index>(N) + 1;
  const double sn = s(N + 1);
  const double s2 = sn * sn;
  const double a = 1.0 / (h * s2);        // e_1 component of every xi^k
  const double b = std::sqrt(1.0 - a * a);  // scale of the remaining components
  auto s_sq = [](std::size_t j) {
    const double v = s(j);
    return v * v;
  };

  LongStepConstruction c;
  c.N = N;
  c.h = h;
  c.gamma.assign(N + 1, 0.0);
  c.gamma[1] = 1.0;
  double prod = 1.0;
  for (std::size_t k = 2; k <= N; ++k) {
    const double sq = s_sq(N + 1 - (k - 1));
    prod *= 1.0 - 1.0 / (sq * sq);
    c.gamma[k] = std::sqrt(prod);
  }

  c.xi.assign(N + 2, Point::Zero(n));
  for (std::size_t k = 1; k <= N; ++k) {
    Point v = Point::Zero(n);
    v[0] = a;
    for (std::size_t i = 2; i <= k; ++i) v[static_cast<Index>(i) - 1] += b * c.gamma[i - 1] / s_sq(N + 2 - i);
    v[static_cast<Index>(k)] -= b * c.gamma[k];
    c.xi[k] = v;
  }
  c.xi[N + 1] = c.xi[N];
  c.xi[N + 1][static_cast<Index>(N)] += 2.0 * c.gamma[N] * b;

  c.z.assign(N + 2, Point::Zero(n));
  c.z[1] = detail::unit(n, 0);
  for (std::size_t k = 2; k <= N + 1; ++k) c.z[k] = c.z[k - 1] - h * c.xi[k - 1];

  // Every piece passes through the origin, so f^k = <xi^k, z^k>; expanded with
  // the inner products <xi^i, xi^k> = 1 - gamma_i^2 (1 + 1/s_{N+1-i}^2) b^2:
  //   f^k = a - h (k-1) + h b^2 sum_{i<k} gamma_i^2 (1 + 1/s_{N+1-i}^2).
  c.levels.assign(N + 2, 0.0);
  double acc = 0.0;
  for (std::size_t k = 1; k <= N + 1; ++k) {
    c.levels[k] = a - h * static_cast<double>(k - 1) + h * b * b * acc;
    if (k <= N) acc += c.gamma[k] * c.gamma[k] * (1.0 + 1.0 / s_sq(N + 1 - k));
  }
  return c;
}

/// Long-step tightness instance: f(x) = max{0, max_k <xi^k, x>}
/// with x1 = e_1. Constant steps h produce x^k = z^k, g^k = xi^k and a final
/// gap of (s_{N+1}^2/2 - N) h + 1/(2 s_{N+1}^2 h).
inline Scenario long_step_instance(std::size_t N, double h) {
  const LongStepConstruction c = long_step_construction(N, h);
  const Index n = static_cast<Index>(N) + 1;
  PiecewiseLinearMax f;
  f.slopes.push_back(Point::Zero(n));
  f.intercepts.push_back(0.0);
  for (std::size_t k = 1; k <= N + 1; ++k) {
    f.slopes.push_back(c.xi[k]);
    f.intercepts.push_back(0.0);  // levels[k] = <xi^k, z^k>
  }
  for (std::size_t k = 1; k <= N; ++k) f.scripted_choices[k] = k;

  Scenario sc{f,
              make_plmax_instance(f, 0.0, Point::Zero(n), 1.0, 1.0, project_all(), "longstep"),
              detail::unit(n, 0), constant_step_rate(N, h)};
  return sc;
}

/// The two step sizes h_1 = 1/(2 sqrt 2), h_2 of the counterexamples.
inline std::vector<double> lemma_last_steps(double h2) {
  return {1.0 / (2.0 * std::numbers::sqrt2), h2};
}

/// f(x) = max{-1, x_1 - 1, x_2 - 1} on R^2 from x1 = (1,1)/sqrt 2. For
/// h_2 <= 1/(8 sqrt 2) the two-step run ends with gap 1/sqrt 2 - h_2.
inline Scenario lemma_last_i(double h2) {
  if (!(h2 > 0.0) || h2 > kNoUniversalBreak)
    throw StepOutOfRange("lemma_last_i: h2 must lie in (0, 1/(8 sqrt 2)]");
  PiecewiseLinearMax f;
  f.slopes = {Point::Zero(2), detail::unit(2, 0), detail::unit(2, 1)};
  f.intercepts = {-1.0, -1.0, -1.0};
  f.scripted_choices = {{1, 1}, {2, 2}};
  Scenario sc{f,
              make_plmax_instance(f, -1.0, Point::Zero(2), 1.0, 1.0, project_all(), "lemma-i"),
              Point::Constant(2, 1.0 / std::numbers::sqrt2), no_universal_H(h2)};
  return sc;
}

/// Three-dimensional counterexample for h_2 > 1/(8 sqrt 2): the two-step run
/// from e_1 ends with gap h_2 + 1/(64 h_2) + 16 h_2 / (1 + 8 sqrt2 h_2)^2.
inline Scenario lemma_last_ii(double h2) {
  if (!(h2 > kNoUniversalBreak) || !std::isfinite(h2))
    throw StepOutOfRange("lemma_last_ii: h2 must exceed 1/(8 sqrt 2)");
  const double r2 = std::numbers::sqrt2;
  const double d = 1.0 + 8.0 * r2 * h2;
  const double gamma = 32.0 * h2 / (d * d);
  const double tail = 1.0 - 1.0 / (128.0 * h2 * h2);
  if (gamma < 0.0 || gamma > 1.0 || tail < 0.0)
    throw StepOutOfRange("lemma_last_ii: construction parameters out of range");
  const double root = std::sqrt(1.0 - gamma * gamma);
  const double third = std::sqrt((1.0 - gamma * gamma) * tail);

  Point xi1(3), xi2(3), xi3(3);
  xi1 << gamma, -root, 0.0;
  xi2 << gamma, root / (8.0 * r2 * h2), -third;
  xi3 << gamma, root / (8.0 * r2 * h2), third;

  const double h1 = 1.0 / (2.0 * r2);
  const Point z1 = detail::unit(3, 0);
  const Point z2 = z1 - h1 * xi1;
  const Point z3 = z2 - h2 * xi2;
  const double level1 = gamma;
  const double level2 = gamma + (1.0 - gamma * gamma) / (32.0 * h2) - gamma * gamma / (2.0 * r2);
  const double level3 = no_universal_H(h2);

  PiecewiseLinearMax f;
  f.slopes = {Point::Zero(3), xi1, xi2, xi3};
  f.intercepts = {0.0, level1 - xi1.dot(z1), level2 - xi2.dot(z2), level3 - xi3.dot(z3)};
  f.scripted_choices = {{1, 1}, {2, 2}};
  Scenario sc{f,
              make_plmax_instance(f, 0.0, Point::Zero(3), 1.0, 1.0, project_all(), "lemma-ii"),
              z1, level3};
  return sc;
}

/// Dispatches to lemma_last_i or lemma_last_ii by the value of h2.
inline Scenario lemma_last(double h2) {
  return h2 <= kNoUniversalBreak ? lemma_last_i(h2) : lemma_last_ii(h2);
}

/// Runs N constant normalized steps h (B = R = 1) on the instance that makes
/// the constant-step rate tight.
inline RateReport tightness_report(std::size_t N, double h) {
  if (N < 1) throw InvalidArgument("tightness_report: N must be >= 1");
  if (!(h > 0.0)) throw InvalidArgument("tightness_report: h must be positive");
  const bool short_steps = h <= constant_step_knee(N);
  const Scenario sc = short_steps ? abs_instance(1.0, 1.0) : long_step_instance(N, h);
  const RunTrace t = run(sc.instance, StepSchedule::constant_normalized(h), sc.x1, N, RecordMode::values_only);
  RateReport r;
  r.N = N;
  r.regime = short_steps ? "constant/short" : "constant/long";
  r.predicted_bound = constant_step_rate(N, h);
  r.observed_gap = last_gap(t, sc.instance);
  return r;
}

enum class FeasibleSet { all, ball, box };

/// Random instance with B = R = 1: pieces through the origin with unit
/// slopes plus the zero piece, so f_star = 0 at x_star = 0; x1 on the unit
/// sphere. The feasible set contains both the origin and x1.
inline Scenario random_plmax_scenario(std::uint64_t seed, Index dim, std::size_t pieces,
                                      FeasibleSet set = FeasibleSet::all) {
  if (dim < 1 || pieces < 1) throw InvalidArgument("random_plmax_scenario: empty instance");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto sphere = [&] {
    Point v(dim);
    double n = 0.0;
    while (n < 1e-8) {
      for (Index i = 0; i < dim; ++i) v[i] = normal(rng);
      n = v.norm();
    }
    return Point(v / n);
  };
  PiecewiseLinearMax f;
  f.slopes.push_back(Point::Zero(dim));
  f.intercepts.push_back(0.0);
  for (std::size_t i = 0; i < pieces; ++i) {
    f.slopes.push_back(sphere());
    f.intercepts.push_back(0.0);
  }
  const Point x1 = sphere();
  Projection proj;
  switch (set) {
    case FeasibleSet::all: proj = project_all(); break;
    case FeasibleSet::ball: proj = project_ball(Point::Zero(dim), 1.0 + std::uniform_real_distribution<double>(0.0, 1.0)(rng)); break;
    case FeasibleSet::box: proj = project_box(Point::Constant(dim, -1.0), Point::Constant(dim, 1.0)); break;
  }
  Scenario sc{f, make_plmax_instance(f, 0.0, Point::Zero(dim), 1.0, 1.0, std::move(proj), "random"), x1,
              std::nullopt};
  return sc;
}

}  // namespace lastiter

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lastiter/core.hpp"

namespace lastiter {

/// f(x) = max_i { <slope_i, x> + intercept_i }.
///
/// scripted_choices maps a 1-based iteration index to the piece whose slope
/// the oracle must return at that iteration; this reproduces the adversarial
/// subgradient selections of worst-case constructions. Unscripted calls
/// return the active piece of highest index.
struct PiecewiseLinearMax {
  std::vector<Point> slopes;
  std::vector<double> intercepts;
  std::map<std::size_t, std::size_t> scripted_choices;
  double active_tol = 1e-9;

  std::size_t pieces() const { return slopes.size(); }
  Index dimension() const { return slopes.empty() ? 0 : slopes.front().size(); }

  double max_slope_norm() const {
    double m = 0.0;
    for (const Point& s : slopes) m = std::max(m, s.norm());
    return m;
  }

  PiecewiseLinearMax without_script() const {
    PiecewiseLinearMax copy = *this;
    copy.scripted_choices.clear();
    return copy;
  }

  void validate() const {
    if (slopes.empty()) throw InvalidArgument("PiecewiseLinearMax: no pieces");
    if (slopes.size() != intercepts.size())
      throw InvalidArgument("PiecewiseLinearMax: slopes and intercepts differ in length");
    for (const Point& s : slopes) {
      if (s.size() != dimension()) throw InvalidArgument("PiecewiseLinearMax: ragged slopes");
      if (!all_finite(s)) throw InvalidArgument("PiecewiseLinearMax: non-finite slope");
    }
    for (const auto& [k, piece] : scripted_choices) {
      if (piece >= slopes.size()) throw InvalidArgument("PiecewiseLinearMax: script references unknown piece");
    }
  }
};

/// Value and subgradient of a piecewise-linear max. `k` selects a scripted
/// piece when one is registered for that iteration.
inline SubgradientSample eval_plmax(const PiecewiseLinearMax& f, const Point& x,
                                    Iteration k = std::nullopt) {
  if (x.size() != f.dimension()) throw InvalidArgument("eval_plmax: dimension mismatch");
  const std::size_t m = f.pieces();
  std::vector<double> values(m);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    values[i] = f.slopes[i].dot(x) + f.intercepts[i];
    best = std::max(best, values[i]);
  }
  const double floor = best - f.active_tol * (1.0 + std::abs(best));

  std::size_t chosen = m;
  if (k) {
    if (auto it = f.scripted_choices.find(*k); it != f.scripted_choices.end()) {
      chosen = it->second;
      if (values[chosen] < floor) {
        throw ScriptedPieceInactive("eval_plmax: scripted piece " + std::to_string(chosen) +
                                    " is not active at iteration " + std::to_string(*k));
      }
    }
  }
  if (chosen == m) {
    for (std::size_t i = m; i-- > 0;) {
      if (values[i] >= floor) {
        chosen = i;
        break;
      }
    }
  }
  return make_sample(best, f.slopes[chosen]);
}

/// Wraps a piecewise-linear max into a ProblemInstance. Throws if a slope
/// exceeds the stated bound B.
inline ProblemInstance make_plmax_instance(PiecewiseLinearMax f, double f_star,
                                           std::optional<Point> x_star, double B, double R,
                                           Projection projection = project_all(),
                                           std::string name = "plmax") {
  f.validate();
  if (!(B > 0.0) || !(R > 0.0)) throw InvalidArgument("make_plmax_instance: B and R must be positive");
  if (f.max_slope_norm() > B * (1.0 + 1e-12))
    throw InvalidArgument("make_plmax_instance: slope norm exceeds B");
  auto shared = std::make_shared<const PiecewiseLinearMax>(std::move(f));
  ProblemInstance p;
  p.dimension = shared->dimension();
  p.oracle = [shared](const Point& x, Iteration k) { return eval_plmax(*shared, x, k); };
  p.projection = std::move(projection);
  p.f_star = f_star;
  p.x_star = std::move(x_star);
  p.B = B;
  p.R = R;
  p.name = std::move(name);
  return p;
}

}  // namespace lastiter

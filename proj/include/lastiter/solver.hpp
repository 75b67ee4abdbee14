#pragma once

// Projected subgradient method x^{k+1} = P_X(x^k - h_k g^k) with the step-size
// rules: custom, constant (normalized), constant length, optimal
// last-iterate, optimal length.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "lastiter/core.hpp"
#include "lastiter/errors.hpp"

namespace lastiter {

namespace schedule {

/// Raw step sizes h_1, h_2, ...
struct Custom {
  std::vector<double> steps;
};
/// h_k = h R / B.
struct ConstantNormalized {
  double h;
};
/// h_k = t R / ||g^k||, i.e. every move has length t R.
struct ConstantLength {
  double t;
};
/// h_k = R (N+1-k) / (B (N+1)^{3/2}).
struct OptimalLastIterate {
  std::size_t N;
};
/// Move length t_k = R (N+1-k) / (N+1)^{3/2} along g^k / ||g^k||.
struct OptimalLength {
  std::size_t N;
};

}  // namespace schedule

class StepSchedule {
 public:
  using Kind = std::variant<schedule::Custom, schedule::ConstantNormalized, schedule::ConstantLength,
                            schedule::OptimalLastIterate, schedule::OptimalLength>;

  static StepSchedule custom(std::vector<double> steps) {
    if (steps.empty()) throw EmptySchedule("custom schedule: no step sizes");
    for (double h : steps)
      if (!(h > 0.0)) throw InvalidArgument("custom schedule: step sizes must be positive");
    return StepSchedule(schedule::Custom{std::move(steps)});
  }
  static StepSchedule constant_normalized(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("constant schedule: h must be positive");
    return StepSchedule(schedule::ConstantNormalized{h});
  }
  static StepSchedule constant_length(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("constant length schedule: t must be positive");
    return StepSchedule(schedule::ConstantLength{t});
  }
  static StepSchedule optimal_last_iterate(std::size_t N) {
    if (N < 1) throw InvalidArgument("optimal schedule: N must be >= 1");
    return StepSchedule(schedule::OptimalLastIterate{N});
  }
  static StepSchedule optimal_length(std::size_t N) {
    if (N < 1) throw InvalidArgument("optimal length schedule: N must be >= 1");
    return StepSchedule(schedule::OptimalLength{N});
  }

  const Kind& kind() const { return kind_; }

  /// Whether the step size depends on the subgradient norm.
  bool uses_length() const {
    return std::holds_alternative<schedule::ConstantLength>(kind_) ||
           std::holds_alternative<schedule::OptimalLength>(kind_);
  }

  /// Largest N this schedule can serve.
  std::size_t capacity() const {
    return std::visit(
        [](const auto& k) -> std::size_t {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, schedule::Custom>) return k.steps.size();
          else if constexpr (std::is_same_v<T, schedule::OptimalLastIterate> ||
                             std::is_same_v<T, schedule::OptimalLength>)
            return k.N;
          else return std::numeric_limits<std::size_t>::max();
        },
        kind_);
  }

  /// Step size h_k multiplying g^k at iteration k (1-based). For length
  /// rules `gnorm` must be positive.
  double step(std::size_t k, double gnorm, double B, double R) const {
    return std::visit(
        [&](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, schedule::Custom>) {
            return s.steps.at(k - 1);
          } else if constexpr (std::is_same_v<T, schedule::ConstantNormalized>) {
            return s.h * R / B;
          } else if constexpr (std::is_same_v<T, schedule::ConstantLength>) {
            return s.t * R / gnorm;
          } else if constexpr (std::is_same_v<T, schedule::OptimalLastIterate>) {
            const double n1 = static_cast<double>(s.N) + 1.0;
            return R * (n1 - static_cast<double>(k)) / (B * std::pow(n1, 1.5));
          } else {
            const double n1 = static_cast<double>(s.N) + 1.0;
            return R * (n1 - static_cast<double>(k)) / std::pow(n1, 1.5) / gnorm;
          }
        },
        kind_);
  }

  /// Step size recorded when the subgradient vanishes: length rules use the
  /// bound B in place of ||g^k||. Any positive value is consistent with the
  /// update since the move is zero.
  double nominal_step(std::size_t k, double B, double R) const { return step(k, B, B, R); }

  std::string describe() const {
    return std::visit(
        [](const auto& s) -> std::string {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, schedule::Custom>) return "custom";
          else if constexpr (std::is_same_v<T, schedule::ConstantNormalized>) return "constant";
          else if constexpr (std::is_same_v<T, schedule::ConstantLength>) return "length";
          else if constexpr (std::is_same_v<T, schedule::OptimalLastIterate>) return "optimal";
          else return "optimal-length";
        },
        kind_);
  }

 private:
  explicit StepSchedule(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

/// Runs N iterations from x1. The oracle is called with the 1-based
/// iteration index, plus once at x^{N+1} for its value. A zero subgradient
/// ends the run early: x^k is replicated through x^{N+1} and
/// terminated_early is set.
inline RunTrace run(const ProblemInstance& p, const StepSchedule& schedule, const Point& x1,
                    std::size_t N, RecordMode mode = RecordMode::full) {
  if (N < 1) throw InvalidArgument("run: N must be >= 1");
  if (x1.size() != p.dimension) throw InvalidArgument("run: x1 has the wrong dimension");
  if (!all_finite(x1)) throw InvalidArgument("run: x1 is not finite");
  if (!p.is_feasible(x1)) throw InvalidArgument("run: x1 is not feasible");
  if (schedule.capacity() < N) throw ScheduleExhausted("run: schedule supports fewer than N steps");

  const bool full = mode == RecordMode::full;
  RunTrace trace;
  trace.record_mode = mode;
  trace.values.reserve(N + 1);
  trace.steps.reserve(N);
  if (full) {
    trace.points.reserve(N + 1);
    trace.subgradients.reserve(N);
  }

  Point x = x1;
  for (std::size_t k = 1; k <= N; ++k) {
    SubgradientSample g = p.sample(x, k);
    if (g.is_zero) {
      trace.terminated_early = true;
      for (std::size_t j = k; j <= N; ++j) {
        trace.values.push_back(g.value);
        trace.steps.push_back(schedule.nominal_step(j, p.B, p.R));
        if (full) {
          trace.points.push_back(x);
          trace.subgradients.push_back(g.subgradient);
        }
      }
      trace.values.push_back(g.value);
      trace.points.push_back(x);
      return trace;
    }
    const double h = schedule.step(k, g.subgradient.norm(), p.B, p.R);
    trace.values.push_back(g.value);
    trace.steps.push_back(h);
    Point next = p.project(x - h * g.subgradient);
    if (full) {
      trace.points.push_back(std::move(x));
      trace.subgradients.push_back(std::move(g.subgradient));
    }
    x = std::move(next);
  }
  trace.values.push_back(p.sample(x, N + 1).value);
  trace.points.push_back(std::move(x));
  return trace;
}

namespace detail {
inline double clamp_gap(double gap, const ProblemInstance& p) {
  const double tol = 1e-12 * std::max(1.0, p.B * p.R);
  if (gap < -tol) throw InvalidArgument("gap below zero: f_star is not the optimal value");
  return gap < 0.0 ? 0.0 : gap;
}
}  // namespace detail

/// f(x^{N+1}) - f_star.
inline double last_gap(const RunTrace& trace, const ProblemInstance& p) {
  if (trace.values.empty()) throw InvalidArgument("last_gap: empty trace");
  return detail::clamp_gap(trace.last_value() - p.f_star, p);
}

/// min_k f(x^k) - f_star.
inline double best_gap(const RunTrace& trace, const ProblemInstance& p) {
  if (trace.values.empty()) throw InvalidArgument("best_gap: empty trace");
  double best = trace.values.front();
  for (double v : trace.values) best = std::min(best, v);
  return detail::clamp_gap(best - p.f_star, p);
}

/// f(sum_k w_k x^k) - f_star with w_k proportional to h_k over k = 1..N+1.
inline double avg_gap(const RunTrace& trace, const ProblemInstance& p, std::span<const double> h) {
  if (trace.record_mode != RecordMode::full) throw RecordModeError("avg_gap: needs a full trace");
  if (h.size() != trace.points.size()) throw IncompatibleLength("avg_gap: need N+1 step sizes");
  double total = 0.0;
  for (double hk : h) {
    if (!(hk > 0.0)) throw InvalidArgument("avg_gap: step sizes must be positive");
    total += hk;
  }
  Point avg = Point::Zero(p.dimension);
  for (std::size_t k = 0; k < h.size(); ++k) avg += (h[k] / total) * trace.points[k];
  return detail::clamp_gap(p.value(avg) - p.f_star, p);
}

/// The run's steps h_1..h_N followed by h_{N+1}.
inline std::vector<double> with_last_step(const RunTrace& trace, double h_last) {
  std::vector<double> h = trace.steps;
  h.push_back(h_last);
  return h;
}

}  // namespace lastiter

#pragma once

// Closed-form worst-case bounds. Every rate here is normalized to B = R = 1;
// multiply by B*R for a concrete instance.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>

#include "lastiter/errors.hpp"
#include "lastiter/sequences.hpp"

namespace lastiter {

/// Predicted bound against the observed last-iterate gap of one experiment.
struct RateReport {
  std::size_t N = 0;
  std::string regime;
  double predicted_bound = 0.0;
  std::optional<double> observed_gap;

  std::optional<double> slack() const {
    if (!observed_gap) return std::nullopt;
    return predicted_bound - *observed_gap;
  }
  bool valid(double tol = 1e-9) const { return !observed_gap || *slack() >= -tol; }
};

/// Best (or average) iterate bound (R^2 + B^2 sum h_k^2) / (2 sum h_k) over
/// the N+1 step sizes h_1..h_{N+1}. Not normalized: h are raw step sizes.
inline double best_iterate_bound(std::span<const double> h, double B, double R) {
  if (h.empty()) throw EmptySchedule("best_iterate_bound: empty schedule");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double hk : h) {
    if (!(hk > 0.0)) throw InvalidArgument("best_iterate_bound: step sizes must be positive");
    sum += hk;
    sum_sq += hk * hk;
  }
  return (R * R + B * B * sum_sq) / (2.0 * sum);
}

/// 1/s_{N+1}^2, where the constant-step rate switches branch.
inline double constant_step_knee(std::size_t N) {
  const double sn = s(N + 1);
  return 1.0 / (sn * sn);
}

/// Exact last-iterate rate of N constant normalized steps h (h_k = h R / B).
inline double constant_step_rate(std::size_t N, double h) {
  if (!(h > 0.0)) throw InvalidArgument("constant_step_rate: h must be positive");
  const double sn = s(N + 1);
  const double s2 = sn * sn;
  const double n = static_cast<double>(N);
  if (h <= 1.0 / s2) return 1.0 - n * h;
  return (0.5 * s2 - n) * h + 1.0 / (2.0 * s2 * h);
}

struct OptimalConstantStep {
  double h_star;
  double rate;
};

inline OptimalConstantStep optimal_constant_step(std::size_t N) {
  if (N < 1) throw InvalidArgument("optimal_constant_step: N must be >= 1");
  const double sn = s(N + 1);
  const double s2 = sn * sn;
  const double n = static_cast<double>(N);
  return {1.0 / (sn * std::sqrt(s2 - 2.0 * n)), std::sqrt(1.0 - 2.0 * n / s2)};
}

struct WeakenedRateBounds {
  double log_form;          // (1 + log(N)/4) h + 1 / (4 (N+1) h)
  double optimal_log_form;  // sqrt(1 + log(N)/4) / sqrt(N+1)
};

/// Looser closed forms of the constant-step rate that make the logarithmic
/// loss explicit. log_form only dominates the long-step branch.
inline WeakenedRateBounds weakened_rate_bounds(std::size_t N, double h) {
  if (N < 2) throw InvalidArgument("weakened_rate_bounds: N must be >= 2");
  if (!(h > 0.0)) throw InvalidArgument("weakened_rate_bounds: h must be positive");
  const double n = static_cast<double>(N);
  const double l = 1.0 + 0.25 * std::log(n);
  return {l * h + 1.0 / (4.0 * (n + 1.0) * h), std::sqrt(l) / std::sqrt(n + 1.0)};
}

/// Constant step lengths t (each move has length t R) obey the same
/// piecewise rate as constant step sizes.
inline double constant_length_rate(std::size_t N, double t) {
  if (!(t > 0.0)) throw InvalidArgument("constant_length_rate: t must be positive");
  return constant_step_rate(N, t);
}

/// Rate of the decreasing schedule h_k = R (N+1-k) / (B (N+1)^{3/2}).
inline double optimal_method_rate(std::size_t N) {
  return 1.0 / std::sqrt(static_cast<double>(N) + 1.0);
}

/// No method moving in the span of observed subgradients can beat this.
inline double lower_bound(std::size_t N) { return 1.0 / std::sqrt(static_cast<double>(N) + 1.0); }

/// The older lower bound 1 / (2 (2 + sqrt(N+1))).
inline double nesterov_lower_bound(std::size_t N) {
  return 1.0 / (2.0 * (2.0 + std::sqrt(static_cast<double>(N) + 1.0)));
}

/// Breakpoint 1/(8 sqrt 2) between the two counterexample families for N = 2.
inline constexpr double kNoUniversalBreak = 1.0 / (8.0 * std::numbers::sqrt2);

/// Worst gap after two steps h_1 = 1/(2 sqrt 2), h_2 = h2, realized by the
/// two counterexample instances.
inline double no_universal_H(double h2) {
  if (!(h2 > 0.0)) throw InvalidArgument("no_universal_H: h2 must be positive");
  if (h2 <= kNoUniversalBreak) return 1.0 / std::numbers::sqrt2 - h2;
  const double d = 1.0 + 8.0 * std::numbers::sqrt2 * h2;
  return h2 + 1.0 / (64.0 * h2) + 16.0 * h2 / (d * d);
}

struct MinimumCertificate {
  double o;        // min over h2 of no_universal_H
  double h2_star;  // its minimizer
  double margin;   // o - 1/sqrt(3)
};

/// Golden-section minimization of `fn` on [lo, hi] to absolute tolerance
/// `tol` in the argument. Returns the midpoint of the final bracket.
template <class Fn>
double golden_section_minimize(Fn&& fn, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
    }
  }
  return 0.5 * (a + b);
}

/// Certifies that no step h_2 can follow h_1 = 1/(2 sqrt 2) and still reach
/// the optimal two-step rate 1/sqrt(3).
inline MinimumCertificate no_universal_certificate() {
  const double lo = kNoUniversalBreak;
  const double hi = 10.0;
  const double tol = 1e-10;
  const double h2 = golden_section_minimize(no_universal_H, lo, hi, tol);
  const double o = no_universal_H(h2);
  if (h2 - lo <= 2.0 * tol || hi - h2 <= 2.0 * tol || !(o < no_universal_H(hi)) ||
      !(o <= no_universal_H(lo))) {
    throw OptimizationFailed("no_universal_certificate: search did not bracket a minimum");
  }
  return {o, h2, o - 1.0 / std::sqrt(3.0)};
}

}  // namespace lastiter

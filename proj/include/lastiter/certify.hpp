#pragma once

// Numerical checks of the weighted key inequality
//
//   sum_{k=1}^{N+1} c_k (f(x^k) - f(x_hat))
//       <= v_0^2/2 ||x^1 - x_hat||^2 + 1/2 sum_{k=1}^{N+1} h_k^2 v_k^2 ||g^k||^2,
//   c_k = h_k v_k^2 - (v_k - v_{k-1}) sum_{i=k}^{N+1} h_i v_i,
//
// for nondecreasing positive weights v_0..v_{N+1} and any h_{N+1} > 0,
// together with the weight families that turn it into last-iterate rates.

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lastiter/core.hpp"
#include "lastiter/errors.hpp"
#include "lastiter/rates.hpp"
#include "lastiter/sequences.hpp"
#include "lastiter/solver.hpp"

namespace lastiter {

/// Weights v_0..v_{N+1} and the extra step h_{N+1}.
struct WeightSequence {
  std::vector<double> v;
  double h_last = 1.0;
  std::size_t N = 0;

  void validate() const {
    if (v.size() != N + 2) throw IncompatibleLength("weights: expected N+2 entries");
    if (!(h_last > 0.0)) throw InvalidArgument("weights: h_{N+1} must be positive");
    if (!(v.front() > 0.0)) throw MonotonicityViolation("weights: v_0 must be positive");
    for (std::size_t k = 1; k < v.size(); ++k) {
      if (!(v[k] >= v[k - 1]))
        throw MonotonicityViolation("weights: v_" + std::to_string(k) + " < v_" + std::to_string(k - 1));
    }
  }
};

/// c_1..c_{N+1} for the run's step sizes h_1..h_N (h_{N+1} comes from w).
inline std::vector<double> coefficients(const WeightSequence& w, std::span<const double> h) {
  w.validate();
  if (h.size() != w.N) throw IncompatibleLength("coefficients: expected N step sizes");
  const std::size_t n1 = w.N + 1;
  std::vector<double> hh(h.begin(), h.end());
  hh.push_back(w.h_last);

  // tail[k] = sum_{i=k}^{N+1} h_i v_i, 1-based k.
  std::vector<double> tail(n1 + 2, 0.0);
  for (std::size_t k = n1; k >= 1; --k) tail[k] = tail[k + 1] + hh[k - 1] * w.v[k];

  std::vector<double> c(n1);
  for (std::size_t k = 1; k <= n1; ++k) {
    c[k - 1] = hh[k - 1] * w.v[k] * w.v[k] - (w.v[k] - w.v[k - 1]) * tail[k];
  }
  return c;
}

/// Relative residual of sum_k c_k = v_0 sum_k h_k v_k.
inline double coefficient_identity_residual(const WeightSequence& w, std::span<const double> h) {
  const std::vector<double> c = coefficients(w, h);
  const double lhs = std::accumulate(c.begin(), c.end(), 0.0);
  double rhs = w.h_last * w.v[w.N + 1];
  for (std::size_t k = 1; k <= w.N; ++k) rhs += h[k - 1] * w.v[k];
  rhs *= w.v[0];
  return std::abs(lhs - rhs) / std::max(std::abs(rhs), std::numeric_limits<double>::min());
}

struct LemmaCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double c_last = 0.0;  // c_{N+1}
};

/// Evaluates both sides of the key inequality on a full trace. g^{N+1} is
/// obtained with one extra oracle call at x^{N+1}.
inline LemmaCheck verify_lemma(const RunTrace& trace, const ProblemInstance& p, const WeightSequence& w,
                               const Point& x_hat) {
  if (trace.record_mode != RecordMode::full) throw RecordModeError("verify_lemma: needs a full trace");
  if (trace.iterations() != w.N || trace.points.size() != w.N + 1 ||
      trace.subgradients.size() != w.N || trace.values.size() != w.N + 1)
    throw IncompatibleLength("verify_lemma: trace length does not match the weights");
  if (x_hat.size() != p.dimension) throw InvalidArgument("verify_lemma: x_hat has the wrong dimension");
  if (!p.is_feasible(x_hat)) throw InfeasibleReference("verify_lemma: x_hat is not in X");

  const std::vector<double> c = coefficients(w, trace.steps);
  const double f_hat = p.value(x_hat);
  const Point g_last = p.sample(trace.last_point()).subgradient;

  LemmaCheck out;
  const std::size_t n1 = w.N + 1;
  for (std::size_t k = 1; k <= n1; ++k) out.lhs += c[k - 1] * (trace.values[k - 1] - f_hat);

  const double v0 = w.v[0];
  out.rhs = 0.5 * v0 * v0 * (trace.points.front() - x_hat).squaredNorm();
  for (std::size_t k = 1; k <= n1; ++k) {
    const double hk = k <= w.N ? trace.steps[k - 1] : w.h_last;
    const double gk2 = k <= w.N ? trace.subgradients[k - 1].squaredNorm() : g_last.squaredNorm();
    out.rhs += 0.5 * hk * hk * w.v[k] * w.v[k] * gk2;
  }
  out.slack = out.rhs - out.lhs;
  out.c_last = c.back();
  return out;
}

// ---------------------------------------------------------------------------
// Weight families that zero out c_1..c_N

/// v_k = 1 for all k: recovers the standard telescoped bound.
inline WeightSequence unit_weights(std::size_t N, double h_last) {
  return {std::vector<double>(N + 2, 1.0), h_last, N};
}

/// Constant-step weights v_k = 1/s_{alpha,N+1-k} (k <= N), v_{N+1} = alpha,
/// with h_{N+1} equal to the constant step size.
inline WeightSequence constant_step_weights(std::size_t N, double step, double alpha = 1.0) {
  WeightSequence w{std::vector<double>(N + 2), step, N};
  for (std::size_t k = 0; k <= N; ++k) w.v[k] = 1.0 / s(alpha, N + 1 - k);
  w.v[N + 1] = alpha;
  return w;
}

/// Weights for the optimal decreasing schedule:
/// v_k = (N+1)^{3/4} / (N+1-k) sqrt(B/R) (k <= N), v_{N+1} = v_N,
/// h_{N+1} = R / (B (N+1)^{3/2}). They give c_{N+1} = 1.
inline WeightSequence optimal_method_weights(std::size_t N, double B, double R) {
  const double n1 = static_cast<double>(N) + 1.0;
  WeightSequence w{std::vector<double>(N + 2), R / (B * std::pow(n1, 1.5)), N};
  const double scale = std::pow(n1, 0.75) * std::sqrt(B / R);
  for (std::size_t k = 0; k <= N; ++k) w.v[k] = scale / (n1 - static_cast<double>(k));
  w.v[N + 1] = w.v[N];
  return w;
}

/// Backward recursion v_k = numerator / sum_{i=k+1}^{N+1} h_i v_i from
/// v_{N+1} = v_last, for realized steps h_1..h_N.
inline WeightSequence recursive_weights(std::span<const double> h, double h_last, double v_last,
                                        double numerator) {
  const std::size_t N = h.size();
  WeightSequence w{std::vector<double>(N + 2), h_last, N};
  w.v[N + 1] = v_last;
  double tail = h_last * v_last;
  for (std::size_t k = N + 1; k-- > 0;) {
    w.v[k] = numerator / tail;
    // Exact ties (v_N = v_{N+1} for the optimal length weights) can round the wrong way.
    if (w.v[k] > w.v[k + 1] && w.v[k] - w.v[k + 1] <= 1e-13 * w.v[k + 1]) w.v[k] = w.v[k + 1];
    if (k >= 1) tail += h[k - 1] * w.v[k];
  }
  return w;
}

/// Constant step length weights: v_{N+1} = alpha, h_{N+1} = t R / B and
/// numerator h_{N+1}.
inline WeightSequence constant_length_weights(std::span<const double> h, double t, double B, double R,
                                              double alpha = 1.0) {
  const double h_last = t * R / B;
  return recursive_weights(h, h_last, alpha, h_last);
}

/// Optimal step-length weights: u_{N+1} = (N+1)^{3/4} sqrt(B/R),
/// h_{N+1} = R / (B (N+1)^{3/2}) and numerator 1.
inline WeightSequence optimal_length_weights(std::span<const double> h, double B, double R) {
  const double n1 = static_cast<double>(h.size()) + 1.0;
  return recursive_weights(h, R / (B * std::pow(n1, 1.5)), std::pow(n1, 0.75) * std::sqrt(B / R), 1.0);
}

/// Last-iterate bound certified by weights whose c_1..c_N vanish, with
/// x_hat a minimizer: f(x^{N+1}) - f_star <= rhs / c_{N+1}.
struct LastIterateCertificate {
  LemmaCheck check;
  double max_leading_coefficient;  // max_{k<=N} |c_k|
  double bound;                    // rhs / c_{N+1}
};

inline LastIterateCertificate certify_last_iterate(const RunTrace& trace, const ProblemInstance& p,
                                                   const WeightSequence& w, const Point& x_hat) {
  LastIterateCertificate cert;
  cert.check = verify_lemma(trace, p, w, x_hat);
  const std::vector<double> c = coefficients(w, trace.steps);
  cert.max_leading_coefficient = 0.0;
  for (std::size_t k = 0; k + 1 < c.size(); ++k)
    cert.max_leading_coefficient = std::max(cert.max_leading_coefficient, std::abs(c[k]));
  cert.bound = cert.check.rhs / c.back();
  return cert;
}

// ---------------------------------------------------------------------------
// Constant-step bound with a free alpha

/// (1/2 (s_{alpha,N+1} sqrt h - 1/(s_{alpha,N+1} sqrt h))^2 + 1 - N h), valid
/// for every alpha >= 1 (units of B R).
inline double free_alpha_bound(std::size_t N, double h, double alpha) {
  if (!(alpha >= 1.0)) throw AlphaOutOfRange("free_alpha_bound: alpha must be >= 1");
  if (!(h > 0.0)) throw InvalidArgument("free_alpha_bound: h must be positive");
  const double q = s_direct(alpha, N + 1) * std::sqrt(h);
  const double d = q - 1.0 / q;
  return 0.5 * d * d + 1.0 - static_cast<double>(N) * h;
}

/// For h <= 1/s_{N+1}^2, the alpha >= 1 with s_{alpha,N+1} sqrt h = 1, found by
/// bisection on the increasing map alpha -> s_{alpha,N+1} sqrt h.
inline double knee_alpha(std::size_t N, double h, double tol = 1e-12) {
  if (!(h > 0.0)) throw InvalidArgument("knee_alpha: h must be positive");
  if (h > constant_step_knee(N)) throw StepOutOfRange("knee_alpha: h is above the knee");
  const double root_h = std::sqrt(h);
  auto excess = [&](double a) { return s_direct(a, N + 1) * root_h - 1.0; };
  double lo = 1.0;
  double hi = 10.0 / root_h;
  if (excess(lo) >= 0.0) return lo;
  if (excess(hi) <= 0.0) throw OptimizationFailed("knee_alpha: upper end does not bracket");
  while (hi - lo > tol * std::max(1.0, lo)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace lastiter

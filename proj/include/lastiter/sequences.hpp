#pragma once

// The sequence s_{alpha,1} = alpha, s_{alpha,k+1} = s_{alpha,k} + 1/s_{alpha,k}.
// With alpha = 1 it sets the knee h = 1/s_{N+1}^2 and the slope of the
// constant-step last-iterate rate.

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lastiter/errors.hpp"

namespace lastiter {

/// Lazily extended table of s_{alpha,1}, s_{alpha,2}, ...
class Sequence {
 public:
  explicit Sequence(double alpha) : alpha_(alpha) {
    if (!(alpha >= 1.0)) throw AlphaOutOfRange("sequence: alpha must be >= 1");
    cache_.push_back(alpha);
  }

  double alpha() const { return alpha_; }

  double operator()(std::size_t k) {
    if (k == 0) throw InvalidArgument("sequence: index is 1-based");
    extend(k);
    return cache_[k - 1];
  }

  /// Ensures s_{alpha,1..k} are tabulated.
  void extend(std::size_t k) {
    if (k <= cache_.size()) return;
    cache_.reserve(k);
    double s = cache_.back();
    while (cache_.size() < k) {
      s = s + 1.0 / s;
      cache_.push_back(s);
    }
  }

  const std::vector<double>& values() const { return cache_; }

 private:
  double alpha_;
  std::vector<double> cache_;
};

/// Uncached evaluation; used for one-off alphas (bisection over alpha).
inline double s_direct(double alpha, std::size_t k) {
  if (!(alpha >= 1.0)) throw AlphaOutOfRange("s: alpha must be >= 1");
  if (k == 0) throw InvalidArgument("s: index is 1-based");
  double s = alpha;
  for (std::size_t i = 1; i < k; ++i) s = s + 1.0 / s;
  return s;
}

/// s_{alpha,k}, cached per thread and keyed on the exact bits of alpha.
inline double s(double alpha, std::size_t k) {
  if (!(alpha >= 1.0)) throw AlphaOutOfRange("s: alpha must be >= 1");
  if (k == 0) throw InvalidArgument("s: index is 1-based");
  thread_local std::unordered_map<std::uint64_t, Sequence> tables;
  const auto key = std::bit_cast<std::uint64_t>(alpha);
  auto it = tables.find(key);
  if (it == tables.end()) it = tables.emplace(key, Sequence(alpha)).first;
  return it->second(k);
}

/// s_k = s_{1,k}.
inline double s(std::size_t k) { return s(1.0, k); }

struct IdentityResiduals {
  double sum_of_reciprocals;  // |s_{k+1} - alpha - sum_{i<=k} 1/s_i|
  double sum_of_squares;      // |s_{k+1}^2 - alpha^2 - 2k - sum_{i<=k} 1/s_i^2|
};

/// Residuals of the telescoped forms of the recursion.
inline IdentityResiduals s_identity_check(double alpha, std::size_t k) {
  if (!(alpha >= 1.0)) throw AlphaOutOfRange("s_identity_check: alpha must be >= 1");
  if (k == 0) throw InvalidArgument("s_identity_check: k must be positive");
  double recip = 0.0;
  double recip_sq = 0.0;
  for (std::size_t i = 1; i <= k; ++i) {
    const double si = s(alpha, i);
    recip += 1.0 / si;
    recip_sq += 1.0 / (si * si);
  }
  const double next = s(alpha, k + 1);
  return {std::abs(next - alpha - recip),
          std::abs(next * next - alpha * alpha - 2.0 * static_cast<double>(k) - recip_sq)};
}

struct Bracket {
  double lower;
  double upper;
};

/// sqrt(2k) <= s_k <= sqrt(2k + log(k-1)/2) for k >= 2.
inline Bracket s_bounds(std::size_t k) {
  if (k < 2) throw InvalidArgument("s_bounds: k must be >= 2");
  const double kk = static_cast<double>(k);
  return {std::sqrt(2.0 * kk), std::sqrt(2.0 * kk + 0.5 * std::log(kk - 1.0))};
}

}  // namespace lastiter

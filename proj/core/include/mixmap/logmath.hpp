#pragma once

// Log-domain arithmetic. Zero probabilities are represented by -infinity and
// follow the conventions -inf + finite = -inf and exp(-inf) = 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace mixmap {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Tolerance (in log units) used whenever a set of maximizing states is needed.
inline constexpr double kArgmaxTieTol = 1e-9;

inline double max_of(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  return m;
}

/// log(sum_i exp(v_i)) with max-shift. Returns -inf for an empty or all -inf input.
inline double log_sum_exp(std::span<const double> v) {
  const double m = max_of(v);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

/// Shift so that the maximum entry is 0. An all -inf vector becomes all zeros.
inline void max_normalize(std::span<double> v) {
  const double m = max_of(v);
  if (m == kNegInf) {
    std::fill(v.begin(), v.end(), 0.0);
    return;
  }
  for (double& x : v) x -= m;
}

/// Shift so that log_sum_exp(v) == 0. An all -inf vector becomes uniform.
inline void log_normalize(std::span<double> v) {
  const double z = log_sum_exp(v);
  if (z == kNegInf) {
    const double u = -std::log(static_cast<double>(v.size()));
    std::fill(v.begin(), v.end(), u);
    return;
  }
  for (double& x : v) x -= z;
}

inline std::vector<double> exp_all(std::span<const double> v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return std::exp(x); });
  return out;
}

/// 0 log 0 := 0.
inline double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

/// p * theta with 0 * (-inf) := 0.
inline double weighted_value(double p, double theta) {
  if (p == 0.0) return 0.0;
  return p * theta;
}

/// Lowest index whose value is within kArgmaxTieTol of the maximum.
inline int argmax_lowest(std::span<const double> v) {
  const double m = max_of(v);
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k] >= m - kArgmaxTieTol) return static_cast<int>(k);
  }
  return 0;
}

/// All indices within kArgmaxTieTol of the maximum. -inf entries never qualify.
inline std::vector<int> argmax_set(std::span<const double> v) {
  const double m = max_of(v);
  std::vector<int> out;
  if (m == kNegInf) return out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k] >= m - kArgmaxTieTol) out.push_back(static_cast<int>(k));
  }
  return out;
}

/// |a - b| treating equal infinities as equal.
inline double log_abs_diff(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b);
}

}  // namespace mixmap

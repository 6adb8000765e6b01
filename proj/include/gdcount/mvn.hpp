#pragma once

// Rectangle probabilities of the standard multivariate normal with a given
// correlation matrix: separation of variables after a greedy variable
// reordering, integrated with randomly shifted Korobov lattice rules (tent
// periodization, antithetic pairs). The lattice multipliers and shifts come
// from an explicit seed, so results are reproducible.

#include <algorithm>
#include <array>
#include <numbers>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "gdcount/error.hpp"
#include "gdcount/special_fn.hpp"

namespace gdcount {

inline constexpr double kDefaultMvnAccuracy = 1e-7;
inline constexpr std::uint64_t kDefaultIntegrationSeed = 0;
inline constexpr std::size_t kMaxMvnDim = 20;

struct MvnOptions {
  double accuracy = kDefaultMvnAccuracy;
  std::uint64_t seed = kDefaultIntegrationSeed;
  std::size_t max_evaluations = std::size_t{1} << 24;
  int shifts = 12;
};

struct MvnResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

/// Uniform double in (0, 1) from the top 53 bits of a 64-bit engine draw.
template <class Engine>
double open_uniform(Engine& eng) {
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

namespace detail {

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// Korobov generator (1, a, a^2, ...) mod n for a prime n, with a picked among
// random candidates to minimize the weighted P2 figure of merit
// (weights 1/j^2, the later variables matter less after reordering).
template <class Engine>
std::vector<std::uint64_t> korobov_generator(std::uint64_t n, std::size_t dims, Engine& eng, int candidates = 32) {
  std::vector<std::uint64_t> best(dims, 1), z(dims), pos(dims);
  if (n < 5) return best;
  std::uniform_int_distribution<std::uint64_t> pick(2, n - 2);
  double best_p2 = kInf;
  for (int c = 0; c < candidates; ++c) {
    const std::uint64_t a = pick(eng);
    z[0] = 1;
    for (std::size_t j = 1; j < dims; ++j) z[j] = z[j - 1] * a % n;
    std::fill(pos.begin(), pos.end(), 0);
    double sum = 0.0;
    for (std::uint64_t k = 0; k < n; ++k) {
      double prod = 1.0;
      for (std::size_t j = 0; j < dims; ++j) {
        const double x = static_cast<double>(pos[j]) / static_cast<double>(n);
        const double b2 = x * x - x + 1.0 / 6.0;
        prod *= 1.0 + 2.0 * std::numbers::pi * std::numbers::pi * b2 / static_cast<double>((j + 1) * (j + 1));
        pos[j] += z[j];
        if (pos[j] >= n) pos[j] -= n;
      }
      sum += prod;
    }
    if (sum < best_p2) {
      best_p2 = sum;
      best = z;
    }
  }
  return best;
}

// P(lo < Z <= hi) for standard normal Z, computed in the tail that avoids
// cancellation.
inline double normal_interval(double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  if (lo > 0.0) return std_normal_sf(lo) - std_normal_sf(hi);
  return std_normal_cdf(hi) - std_normal_cdf(lo);
}

struct OrderedProblem {
  std::size_t n;
  std::vector<double> lower, upper;
  std::vector<double> chol;  // row-major lower-triangular
  [[nodiscard]] double l(std::size_t i, std::size_t j) const { return chol[i * n + j]; }
};

// Greedy reordering: at each step pick the remaining variable whose
// conditional interval probability is smallest, then extend the Cholesky
// factor and condition on the truncated-normal mean of that variable.
inline OrderedProblem reorder_and_factor(std::span<const double> lower, std::span<const double> upper,
                                         const CorrelationMatrix& rho) {
  const std::size_t n = rho.dim();
  OrderedProblem out{n, {lower.begin(), lower.end()}, {upper.begin(), upper.end()},
                     std::vector<double>(n * n, 0.0)};
  std::vector<double> r(rho.entries().begin(), rho.entries().end());
  std::vector<double> y(n, 0.0);
  auto& a = out.lower;
  auto& b = out.upper;
  auto& l = out.chol;

  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = i;
    double best_p = kInf;
    for (std::size_t j = i; j < n; ++j) {
      double shift = 0.0;
      double var = r[j * n + j];
      for (std::size_t k = 0; k < i; ++k) {
        shift += l[j * n + k] * y[k];
        var -= l[j * n + k] * l[j * n + k];
      }
      const double sd = std::sqrt(std::max(var, kMinCholeskyPivot));
      const double p = normal_interval((a[j] - shift) / sd, (b[j] - shift) / sd);
      if (p < best_p) {
        best_p = p;
        best = j;
      }
    }
    if (best != i) {
      std::swap(a[i], a[best]);
      std::swap(b[i], b[best]);
      for (std::size_t k = 0; k < i; ++k) std::swap(l[i * n + k], l[best * n + k]);
      for (std::size_t k = 0; k < n; ++k) std::swap(r[i * n + k], r[best * n + k]);
      for (std::size_t k = 0; k < n; ++k) std::swap(r[k * n + i], r[k * n + best]);
    }
    double d = r[i * n + i];
    for (std::size_t k = 0; k < i; ++k) d -= l[i * n + k] * l[i * n + k];
    if (!(d > kMinCholeskyPivot)) throw NotPositiveDefinite("mvn_rect_prob: correlation matrix is not positive definite");
    const double lii = std::sqrt(d);
    l[i * n + i] = lii;
    for (std::size_t m = i + 1; m < n; ++m) {
      double s = r[m * n + i];
      for (std::size_t k = 0; k < i; ++k) s -= l[m * n + k] * l[i * n + k];
      l[m * n + i] = s / lii;
    }
    double shift = 0.0;
    for (std::size_t k = 0; k < i; ++k) shift += l[i * n + k] * y[k];
    const double lo = (a[i] - shift) / lii;
    const double hi = (b[i] - shift) / lii;
    const double mass = normal_interval(lo, hi);
    if (mass > 1e-300) {
      const double plo = std::isinf(lo) ? 0.0 : std_normal_pdf(lo);
      const double phi = std::isinf(hi) ? 0.0 : std_normal_pdf(hi);
      y[i] = (plo - phi) / mass;
    } else if (std::isinf(lo)) {
      y[i] = hi;
    } else if (std::isinf(hi)) {
      y[i] = lo;
    } else {
      y[i] = 0.5 * (lo + hi);
    }
  }
  return out;
}

// Point of N(0,1) truncated to (a, b] at relative position w of the mass,
// working in the upper tail when the interval lies right of zero.
inline double truncated_normal_point(double a, double width, double w) {
  constexpr double kTiny = 1e-300;
  constexpr double kBelowOne = 1.0 - 0x1.0p-53;
  if (a > 0.0) return -ppnd16(std::clamp(std_normal_sf(a) - w * width, kTiny, kBelowOne));
  return ppnd16(std::clamp(std_normal_cdf(a) + w * width, kTiny, kBelowOne));
}

// Integrand over w in [0,1)^(n-1) after separation of variables.
class SeparatedIntegrand {
 public:
  explicit SeparatedIntegrand(const OrderedProblem& p) : p_(p), y_(p.n, 0.0) {
    a0_ = p_.lower[0] / p_.l(0, 0);
    width0_ = normal_interval(a0_, p_.upper[0] / p_.l(0, 0));
  }

  double operator()(std::span<const double> w) {
    double a = a0_;
    double width = width0_;
    double f = width;
    for (std::size_t i = 1; i < p_.n && f > 0.0; ++i) {
      y_[i - 1] = truncated_normal_point(a, width, w[i - 1]);
      double shift = 0.0;
      for (std::size_t k = 0; k < i; ++k) shift += p_.l(i, k) * y_[k];
      a = (p_.lower[i] - shift) / p_.l(i, i);
      width = normal_interval(a, (p_.upper[i] - shift) / p_.l(i, i));
      f *= width;
    }
    return f;
  }

 private:
  const OrderedProblem& p_;
  std::vector<double> y_;
  double a0_;
  double width0_;
};

}  // namespace detail

/// P(lower < Z <= upper) for Z ~ N(0, rho). Infinite limits are allowed.
/// The reported error is 3.5 standard errors over the random lattice shifts.
inline MvnResult mvn_rect_prob(std::span<const double> lower, std::span<const double> upper,
                               const CorrelationMatrix& rho, const MvnOptions& opts = {}) {
  const std::size_t n = rho.dim();
  if (lower.size() != n || upper.size() != n) throw DimensionError("mvn_rect_prob: limits do not match the matrix dimension");
  if (n > kMaxMvnDim) throw DimensionError("mvn_rect_prob: at most 20 dimensions are supported");
  if (!(opts.accuracy > 0.0)) throw DomainError("mvn_rect_prob: accuracy must be positive");
  if (opts.shifts < 2) throw DomainError("mvn_rect_prob: need at least two random shifts");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(lower[i]) || std::isnan(upper[i])) throw DomainError("mvn_rect_prob: NaN limit");
    if (lower[i] > upper[i]) throw DomainError("mvn_rect_prob: lower limit exceeds upper limit");
  }
  if (n == 1) return {detail::normal_interval(lower[0], upper[0]), 0.0, 1};
  for (std::size_t i = 0; i < n; ++i) {
    if (lower[i] == upper[i]) {
      (void)cholesky_factor(rho);  // still report a non-PD matrix
      return {0.0, 0.0, 0};
    }
  }

  const detail::OrderedProblem prob = detail::reorder_and_factor(lower, upper, rho);
  detail::SeparatedIntegrand integrand(prob);
  const std::size_t dims = n - 1;

  std::mt19937_64 eng(opts.seed);
  const auto shifts = static_cast<std::size_t>(opts.shifts);
  std::vector<double> shift(shifts * dims);
  for (double& s : shift) s = open_uniform(eng);

  std::vector<double> w(dims), wa(dims);
  std::vector<std::uint64_t> pos(dims);
  MvnResult res;
  std::vector<double> shift_means(shifts);
  // Independent rules of roughly doubling prime size; each level is a fresh
  // estimate, and the work of all levels is counted.
  for (std::uint64_t target = 31;; target *= 2) {
    std::uint64_t points = target;
    while (!detail::is_prime(points)) ++points;
    const std::vector<std::uint64_t> z = detail::korobov_generator(points, dims, eng);
    const double inv = 1.0 / static_cast<double>(points);
    for (std::size_t s = 0; s < shifts; ++s) {
      const double* d = shift.data() + s * dims;
      std::fill(pos.begin(), pos.end(), 0);
      double acc = 0.0;
      for (std::uint64_t k = 0; k < points; ++k) {
        for (std::size_t j = 0; j < dims; ++j) {
          double x = static_cast<double>(pos[j]) * inv + d[j];
          if (x >= 1.0) x -= 1.0;
          w[j] = std::fabs(2.0 * x - 1.0);
          wa[j] = 1.0 - w[j];
          pos[j] += z[j];
          if (pos[j] >= points) pos[j] -= points;
        }
        acc += 0.5 * (integrand(w) + integrand(wa));
      }
      shift_means[s] = acc * inv;
    }
    res.evaluations += 2 * points * shifts;
    const double m = static_cast<double>(shifts);
    double mean = 0.0;
    for (double v : shift_means) mean += v;
    mean /= m;
    double var = 0.0;
    for (double v : shift_means) var += (v - mean) * (v - mean);
    var /= m * (m - 1.0);
    res.value = std::clamp(mean, 0.0, 1.0);
    res.error = 3.5 * std::sqrt(var);
    if (res.error <= opts.accuracy || res.evaluations + 4 * points * shifts > opts.max_evaluations) break;
  }
  return res;
}

}  // namespace gdcount

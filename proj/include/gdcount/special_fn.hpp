#pragma once

// Scalar and small-matrix numerical kernels: log-gamma differences,
// generalized binomial coefficients, the standard normal pdf/cdf/quantile,
// the bivariate normal cdf and Cholesky factors of correlation matrices.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "gdcount/error.hpp"

namespace gdcount {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Log-gamma family
// ---------------------------------------------------------------------------

/// ln Γ(x) for x > 0.
inline double ln_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("ln_gamma: argument must be positive");
  return std::lgamma(x);
}

namespace detail {

// ln Γ(a) - [(a - 1/2) ln a - a + ln √(2π)], asymptotic series; accurate to
// below 1e-16 for a >= 15.
inline double stirling_tail(double a) {
  const double r = 1.0 / a;
  const double r2 = r * r;
  return r * (1.0 / 12.0 -
              r2 * (1.0 / 360.0 -
                    r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 * (1.0 / 1188.0)))));
}

}  // namespace detail

/// ln Γ(a + x) - ln Γ(a) for a > 0, a + x > 0.
///
/// For a >= 15 the difference is formed analytically from Stirling's series,
/// so it stays accurate when a is huge and x is small (lgamma subtraction
/// would cancel catastrophically there).
inline double ln_gamma_ratio(double a, double x) {
  if (!(a > 0.0) || !(a + x > 0.0)) {
    throw DomainError("ln_gamma_ratio: arguments outside the domain of Gamma");
  }
  if (x == 0.0) return 0.0;
  if (a >= 15.0 && a + x >= 15.0) {
    const double b = a + x;
    return (a - 0.5) * std::log1p(x / a) + x * (std::log(b) - 1.0) +
           (detail::stirling_tail(b) - detail::stirling_tail(a));
  }
  return ln_gamma(a + x) - ln_gamma(a);
}

/// ln of the generalized binomial coefficient Γ(m+1) / (Γ(x+1) Γ(m-x+1)).
inline double ln_gen_choose(double m, double x) {
  if (!(m >= 0.0) || !(x >= 0.0)) throw DomainError("ln_gen_choose: negative argument");
  if (!(m - x + 1.0 > 0.0)) throw DomainError("ln_gen_choose: x outside the support of m");
  if (x == 0.0) return 0.0;
  return ln_gamma_ratio(m - x + 1.0, x) - ln_gamma(x + 1.0);
}

// ---------------------------------------------------------------------------
// Standard normal
// ---------------------------------------------------------------------------

inline double std_normal_pdf(double s) {
  constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  return kInvSqrt2Pi * std::exp(-0.5 * s * s);
}

/// Φ(s), via erfc so both tails keep relative accuracy.
inline double std_normal_cdf(double s) {
  if (std::isnan(s)) throw DomainError("std_normal_cdf: NaN argument");
  return 0.5 * std::erfc(-s / std::numbers::sqrt2);
}

/// 1 - Φ(s) without cancellation.
inline double std_normal_sf(double s) { return std_normal_cdf(-s); }

namespace detail {

// Wichura's AS 241 (PPND16); about 16 digits on its own.
inline double ppnd16(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                 67265.770927008700853) * r + 45921.953931549871457) * r +
               13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((r * 5226.495278852854561 + 28729.085735721942674) * r +
                 39307.89580009271061) * r + 21213.794301586595867) * r +
               5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

}  // namespace detail

/// Φ⁻¹(u) for u in (0, 1): rational approximation plus one Halley step.
inline double std_normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("std_normal_quantile: u must lie in (0, 1)");
  double x = detail::ppnd16(u);
  // Residual Φ(x) - u, taken in whichever tail keeps it exact.
  const double resid = u <= 0.5 ? std_normal_cdf(x) - u : (1.0 - u) - std_normal_sf(x);
  const double dens = std_normal_pdf(x);
  if (dens > 0.0) {
    const double t = resid / dens;
    x -= t / (1.0 + 0.5 * x * t);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Bivariate normal
// ---------------------------------------------------------------------------

namespace detail {

struct GaussLegendreHalf {
  std::array<double, 10> w;
  std::array<double, 10> x;
  int n;
};

// Half rules (the symmetric partner is -x) for 6, 12 and 20 points.
inline constexpr std::array<GaussLegendreHalf, 3> kBvnRules{{
    {{0.1713244923791705, 0.3607615730481384, 0.4679139345726904},
     {-0.9324695142031522, -0.6612093864662647, -0.2386191860831970},
     3},
    {{0.04717533638651177, 0.1069393259953183, 0.1600783285433464, 0.2031674267230659,
      0.2334925365383547, 0.2491470458134029},
     {-0.9815606342467191, -0.9041172563704750, -0.7699026741943050, -0.5873179542866171,
      -0.3678314989981802, -0.1252334085114692},
     6},
    {{0.01761400713915212, 0.04060142980038694, 0.06267204833410906, 0.08327674157670475,
      0.1019301198172404, 0.1181945319615184, 0.1316886384491766, 0.1420961093183821,
      0.1491729864726037, 0.1527533871307259},
     {-0.9931285991850949, -0.9639719272779138, -0.9122344282513259, -0.8391169718222188,
      -0.7463319064601508, -0.6360536807265150, -0.5108670019508271, -0.3737060887154196,
      -0.2277858511416451, -0.07652652113349733},
     10},
}};

// P(S > h, T > k) for finite h, k (Drezner-Wesolowsky as refined by Genz).
inline double bvn_upper(double h, double k, double r) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const auto& rule = std::fabs(r) < 0.3 ? kBvnRules[0] : std::fabs(r) < 0.75 ? kBvnRules[1] : kBvnRules[2];
  double hk = h * k;
  double bvn = 0.0;
  if (std::fabs(r) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r);
    for (int i = 0; i < rule.n; ++i) {
      double sn = std::sin(asr * (rule.x[i] + 1.0) / 2.0);
      bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      sn = std::sin(asr * (-rule.x[i] + 1.0) / 2.0);
      bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return bvn * asr / (2.0 * kTwoPi) + std_normal_cdf(-h) * std_normal_cdf(-k);
  }
  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::fabs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * std_normal_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (int i = 0; i < rule.n; ++i) {
      double xs = a * (rule.x[i] + 1.0);
      xs *= xs;
      double rs = std::sqrt(1.0 - xs);
      bvn += a * rule.w[i] *
             (std::exp(-bs / (xs * 2.0) - hk / (rs + 1.0)) / rs -
              std::exp(-(bs / xs + hk) / 2.0) * (c * xs * (d * xs + 1.0) + 1.0));
      xs = as * (1.0 - rule.x[i]) * (1.0 - rule.x[i]) / 4.0;
      rs = std::sqrt(1.0 - xs);
      bvn += a * rule.w[i] * std::exp(-(bs / xs + hk) / 2.0) *
             (std::exp(-hk * xs / ((rs + 1.0) * (rs + 1.0) * 2.0)) / rs -
              (c * xs * (d * xs + 1.0) + 1.0));
    }
    bvn = -bvn / kTwoPi;
  }
  if (r > 0.0) return bvn + std_normal_cdf(-std::max(h, k));
  bvn = -bvn;
  if (k > h) {
    bvn += h < 0.0 ? std_normal_cdf(k) - std_normal_cdf(h)
                   : std_normal_cdf(-h) - std_normal_cdf(-k);
  }
  return std::max(bvn, 0.0);
}

}  // namespace detail

/// P(S <= h, T <= k) for a standard bivariate normal with correlation rho.
/// Infinite limits are accepted.
inline double bvn_cdf(double h, double k, double rho) {
  if (!(std::fabs(rho) <= 1.0)) throw DomainError("bvn_cdf: |rho| must not exceed 1");
  if (std::isnan(h) || std::isnan(k)) throw DomainError("bvn_cdf: NaN limit");
  if (h == -kInf || k == -kInf) return 0.0;
  if (h == kInf) return std_normal_cdf(k);
  if (k == kInf) return std_normal_cdf(h);
  if (h > k) std::swap(h, k);  // exact symmetry in (h, k)
  // Never above the Frechet bound min(Phi(h), Phi(k)) = Phi(h).
  return std::clamp(detail::bvn_upper(-h, -k, rho), 0.0, std_normal_cdf(h));
}

// ---------------------------------------------------------------------------
// Correlation matrices and their Cholesky factors
// ---------------------------------------------------------------------------

/// Symmetric matrix with unit diagonal and entries in [-1, 1], stored row-major.
/// Positive definiteness is established by cholesky_factor().
class CorrelationMatrix {
 public:
  CorrelationMatrix(std::size_t dim, std::vector<double> entries)
      : dim_(dim), entries_(std::move(entries)) {
    if (dim_ == 0) throw DimensionError("CorrelationMatrix: dimension must be positive");
    if (entries_.size() != dim_ * dim_) {
      throw DimensionError("CorrelationMatrix: expected " + std::to_string(dim_ * dim_) +
                           " entries, got " + std::to_string(entries_.size()));
    }
    for (std::size_t i = 0; i < dim_; ++i) {
      if ((*this)(i, i) != 1.0) throw DomainError("CorrelationMatrix: diagonal must be 1");
      for (std::size_t j = 0; j < i; ++j) {
        const double v = (*this)(i, j);
        if (v != (*this)(j, i)) throw DomainError("CorrelationMatrix: matrix is not symmetric");
        if (!(std::fabs(v) <= 1.0)) throw DomainError("CorrelationMatrix: entry outside [-1, 1]");
      }
    }
  }

  static CorrelationMatrix identity(std::size_t dim) {
    std::vector<double> e(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) e[i * dim + i] = 1.0;
    return {dim, std::move(e)};
  }

  static CorrelationMatrix bivariate(double rho) { return {2, {1.0, rho, rho, 1.0}}; }

  /// Builds the matrix from its strict upper triangle, row-major
  /// (rho_01, rho_02, ..., rho_12, ...).
  static CorrelationMatrix from_upper_triangle(std::size_t dim, std::span<const double> upper) {
    if (upper.size() != dim * (dim - 1) / 2) {
      throw DimensionError("CorrelationMatrix: expected " + std::to_string(dim * (dim - 1) / 2) +
                           " upper-triangle entries, got " + std::to_string(upper.size()));
    }
    std::vector<double> e(dim * dim, 0.0);
    std::size_t next = 0;
    for (std::size_t i = 0; i < dim; ++i) {
      e[i * dim + i] = 1.0;
      for (std::size_t j = i + 1; j < dim; ++j) {
        e[i * dim + j] = upper[next];
        e[j * dim + i] = upper[next];
        ++next;
      }
    }
    return {dim, std::move(e)};
  }

  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return entries_[i * dim_ + j]; }
  [[nodiscard]] std::span<const double> entries() const { return entries_; }

  [[nodiscard]] bool is_identity() const {
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j)
        if (i != j && (*this)(i, j) != 0.0) return false;
    return true;
  }

 private:
  std::size_t dim_;
  std::vector<double> entries_;
};

/// Lower-triangular L with strictly positive diagonal, stored row-major.
class TriangularFactor {
 public:
  TriangularFactor(std::size_t dim, std::vector<double> entries)
      : dim_(dim), entries_(std::move(entries)) {}

  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return entries_[i * dim_ + j]; }

  /// Solves L y = b.
  [[nodiscard]] std::vector<double> solve(std::span<const double> b) const {
    if (b.size() != dim_) throw DimensionError("TriangularFactor::solve: size mismatch");
    std::vector<double> y(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
      double acc = b[i];
      for (std::size_t k = 0; k < i; ++k) acc -= (*this)(i, k) * y[k];
      y[i] = acc / (*this)(i, i);
    }
    return y;
  }

  /// y = L z.
  [[nodiscard]] std::vector<double> apply(std::span<const double> z) const {
    if (z.size() != dim_) throw DimensionError("TriangularFactor::apply: size mismatch");
    std::vector<double> y(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t k = 0; k <= i; ++k) y[i] += (*this)(i, k) * z[k];
    return y;
  }

  /// ln |L Lᵀ|.
  [[nodiscard]] double log_det_product() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) acc += std::log((*this)(i, i));
    return 2.0 * acc;
  }

 private:
  std::size_t dim_;
  std::vector<double> entries_;
};

inline constexpr double kMinCholeskyPivot = 1e-12;

/// Cholesky factor of a correlation matrix; throws NotPositiveDefinite when
/// a pivot falls to 1e-12 or below.
inline TriangularFactor cholesky_factor(const CorrelationMatrix& rho) {
  const std::size_t n = rho.dim();
  std::vector<double> l(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double d = rho(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
    if (!(d > kMinCholeskyPivot)) {
      throw NotPositiveDefinite("correlation matrix is not positive definite (pivot " +
                                std::to_string(j) + ")");
    }
    const double ljj = std::sqrt(d);
    l[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = rho(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = s / ljj;
    }
  }
  return {n, std::move(l)};
}

}  // namespace gdcount

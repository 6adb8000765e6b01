#pragma once

// Gd_n: Gd marginals coupled by a normal copula. The exact pmf is the
// normal probability of the rectangle bounded by the normal scores
// Phi^-1(F_i(x_i - 1)) and Phi^-1(F_i(x_i)); the approximate pmf multiplies
// the marginal pmfs by the copula density at the upper scores.

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gdcount/error.hpp"
#include "gdcount/grid.hpp"
#include "gdcount/mvn.hpp"
#include "gdcount/special_fn.hpp"
#include "gdcount/univariate.hpp"

namespace gdcount {

class GdnParams {
 public:
  GdnParams(std::vector<GdParams> marginals, CorrelationMatrix rho)
      : marginals_(std::move(marginals)), rho_(std::move(rho)), chol_(cholesky_factor(rho_)) {
    if (marginals_.size() < 2) throw DimensionError("Gd_n: dimension must be at least 2");
    if (marginals_.size() > kMaxMvnDim) throw DimensionError("Gd_n: at most 20 dimensions are supported");
    if (marginals_.size() != rho_.dim()) {
      throw DimensionError("Gd_n: " + std::to_string(marginals_.size()) + " marginals but a " +
                           std::to_string(rho_.dim()) + "x" + std::to_string(rho_.dim()) + " correlation matrix");
    }
  }

  [[nodiscard]] std::size_t dim() const { return marginals_.size(); }
  [[nodiscard]] const std::vector<GdParams>& marginals() const { return marginals_; }
  [[nodiscard]] const CorrelationMatrix& rho() const { return rho_; }
  [[nodiscard]] const TriangularFactor& chol() const { return chol_; }

  [[nodiscard]] const GdParams& marginal(std::size_t i) const {
    if (i >= marginals_.size()) {
      throw DimensionError("Gd_n: marginal index " + std::to_string(i) + " out of range for dimension " +
                           std::to_string(marginals_.size()));
    }
    return marginals_[i];
  }

 private:
  std::vector<GdParams> marginals_;
  CorrelationMatrix rho_;
  TriangularFactor chol_;
};

inline GdnParams new_gdn(std::span<const double> mu, std::span<const double> v, CorrelationMatrix rho,
                         BinomialSize rule = BinomialSize::kGeneralized) {
  if (mu.size() != v.size()) throw DimensionError("Gd_n: mean and variance vectors differ in length");
  std::vector<GdParams> margins;
  margins.reserve(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) margins.push_back(GdParams::from_moments(mu[i], v[i], rule));
  return {std::move(margins), std::move(rho)};
}

inline const GdParams& marginal(const GdnParams& params, std::size_t i) { return params.marginal(i); }

// ---------------------------------------------------------------------------
// Normal scores
// ---------------------------------------------------------------------------

/// Probabilities are clamped into [1e-15, 1 - 1e-15] before inversion in the
/// approximate pmf, so its density ratio stays finite.
inline constexpr double kScoreClamp = 1e-15;

/// Marginal accessors over a GdParams, matching GdTable's interface.
struct DirectMarginal {
  const GdParams& g;
  [[nodiscard]] double pmf(std::int64_t x) const { return g.pmf(x); }
  [[nodiscard]] double cdf(std::int64_t x) const { return gdcount::cdf(g, x); }
  [[nodiscard]] double sf(std::int64_t x) const { return gdcount::sf(g, x); }
};

/// Phi^-1 of a probability given as (cdf, sf), inverted in the smaller tail.
/// Returns -inf / +inf when cdf / sf is exactly zero.
inline double normal_score(double cdf_value, double sf_value) {
  if (cdf_value <= 0.5) return cdf_value <= 0.0 ? -kInf : std_normal_quantile(cdf_value);
  return sf_value <= 0.0 ? kInf : -std_normal_quantile(std::min(sf_value, 0.5));
}

inline double clamped_normal_score(double cdf_value, double sf_value) {
  if (cdf_value <= 0.5) return std_normal_quantile(std::max(cdf_value, kScoreClamp));
  return -std_normal_quantile(std::clamp(sf_value, kScoreClamp, 0.5));
}

/// Rectangle limits (Phi^-1(F(x-1)), Phi^-1(F(x))] for one coordinate.
template <class Marginal>
std::pair<double, double> score_interval(const Marginal& m, std::int64_t x) {
  return {normal_score(m.cdf(x - 1), m.sf(x - 1)), normal_score(m.cdf(x), m.sf(x))};
}

// ---------------------------------------------------------------------------
// Exact pmf
// ---------------------------------------------------------------------------

/// P(a1 < S <= b1, a2 < T <= b2) for a standard bivariate normal. Each
/// coordinate lying mostly above zero is reflected first, so the four-term
/// difference is taken among lower-tail probabilities. May be slightly
/// negative from rounding.
inline double bvn_rectangle(double a1, double b1, double a2, double b2, double rho) {
  if (a1 > -b1) {
    std::tie(a1, b1) = std::pair{-b1, -a1};
    rho = -rho;
  }
  if (a2 > -b2) {
    std::tie(a2, b2) = std::pair{-b2, -a2};
    rho = -rho;
  }
  return bvn_cdf(b1, b2, rho) - bvn_cdf(a1, b2, rho) - bvn_cdf(b1, a2, rho) + bvn_cdf(a1, a2, rho);
}

template <class Marginal>
double exact_pmf2_raw(const Marginal& m1, const Marginal& m2, double rho, std::int64_t x1, std::int64_t x2) {
  if (m1.pmf(x1) <= 0.0 || m2.pmf(x2) <= 0.0) return 0.0;
  const auto [a1, b1] = score_interval(m1, x1);
  const auto [a2, b2] = score_interval(m2, x2);
  return bvn_rectangle(a1, b1, a2, b2, rho);
}

/// Four-term difference of the bivariate copula cdf, before clamping.
inline double exact_pmf2_raw(const GdnParams& params, std::int64_t x1, std::int64_t x2) {
  if (params.dim() != 2) throw DimensionError("exact_pmf2: parameters must be bivariate");
  return exact_pmf2_raw(DirectMarginal{params.marginal(0)}, DirectMarginal{params.marginal(1)}, params.rho()(0, 1), x1, x2);
}

/// Exact bivariate pmf; rounding negatives are clamped to zero.
inline double exact_pmf2(const GdnParams& params, std::int64_t x1, std::int64_t x2) {
  return std::max(0.0, exact_pmf2_raw(params, x1, x2));
}

/// Exact Gd_n pmf by quasi-Monte Carlo over the normal-score rectangle.
/// The error adds a floor of 8 n eps for the Phi(Phi^-1(F)) round trip
/// (the copula is 1-Lipschitz in each coordinate).
inline MvnResult exact_pmf(const GdnParams& params, std::span<const std::int64_t> x, const MvnOptions& opts = {}) {
  const std::size_t n = params.dim();
  if (x.size() != n) throw DimensionError("exact_pmf: point dimension does not match the distribution");
  std::vector<double> lower(n), upper(n);
  for (std::size_t i = 0; i < n; ++i) {
    const DirectMarginal m{params.marginal(i)};
    if (m.pmf(x[i]) <= 0.0) return {0.0, 0.0, 0};
    std::tie(lower[i], upper[i]) = score_interval(m, x[i]);
  }
  MvnResult res = mvn_rect_prob(lower, upper, params.rho(), opts);
  res.error += 8.0 * static_cast<double>(n) * DBL_EPSILON;
  return res;
}

// ---------------------------------------------------------------------------
// Approximate pmf
// ---------------------------------------------------------------------------

/// ln of phi_rho(s) / prod phi(s_i) = -1/2 s'(rho^-1 - I)s - 1/2 ln|rho|.
inline double log_copula_density(const TriangularFactor& chol, std::span<const double> s) {
  const std::vector<double> w = chol.solve(s);
  double quad = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) quad += w[i] * w[i] - s[i] * s[i];
  return -0.5 * quad - 0.5 * chol.log_det_product();
}

template <class Marginal>
double approx_pmf_unnorm(std::span<const Marginal> margins, const TriangularFactor& chol,
                         std::span<const std::int64_t> x) {
  double prod = 1.0;
  std::vector<double> s(margins.size());
  for (std::size_t i = 0; i < margins.size(); ++i) {
    const double p = margins[i].pmf(x[i]);
    if (p <= 0.0) return 0.0;
    prod *= p;
    s[i] = clamped_normal_score(margins[i].cdf(x[i]), margins[i].sf(x[i]));
  }
  return std::exp(log_copula_density(chol, s)) * prod;
}

/// Approximate pmf without the normalization constant K.
inline double approx_pmf_unnorm(const GdnParams& params, std::span<const std::int64_t> x) {
  if (x.size() != params.dim()) throw DimensionError("approx_pmf_unnorm: point dimension does not match the distribution");
  std::vector<DirectMarginal> margins;
  for (const auto& g : params.marginals()) margins.push_back(DirectMarginal{g});
  return approx_pmf_unnorm(std::span<const DirectMarginal>(margins), params.chol(), x);
}

inline void check_grid(const GdnParams& params, const GridSpec& grid) {
  if (grid.dim() != params.dim()) throw DimensionError("grid dimension does not match the distribution");
  for (std::size_t i = 0; i < grid.dim(); ++i) {
    const auto smax = params.marginal(i).support_max();
    if (smax && grid[i].hi > *smax) {
      throw DomainError("grid range " + std::to_string(i) + " extends past the Binomial support maximum " +
                        std::to_string(*smax));
    }
  }
}

inline std::vector<GdTable> marginal_tables(const GdnParams& params) {
  std::vector<GdTable> tables;
  tables.reserve(params.dim());
  for (const auto& g : params.marginals()) tables.emplace_back(g);
  return tables;
}

/// K = 1 / sum of the unnormalized approximate pmf over the grid, summed in
/// row-major order.
inline double normalization_constant(const GdnParams& params, const GridSpec& grid) {
  check_grid(params, grid);
  const auto tables = marginal_tables(params);
  double total = 0.0;
  grid.for_each([&](std::span<const std::int64_t> x) {
    total += approx_pmf_unnorm(std::span<const GdTable>(tables), params.chol(), x);
  });
  if (!(total > 0.0)) throw ZeroMass("normalization_constant: approximate pmf has no mass on the grid");
  return 1.0 / total;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Copula sampler: z = L e with e iid N(0,1), x_i = F_i^-1(Phi(z_i)).
/// Builds the marginal tables once; reuse it for bulk draws.
class GdnSampler {
 public:
  explicit GdnSampler(const GdnParams& params) : params_(params), tables_(marginal_tables(params)) {}

  template <class Engine>
  std::vector<std::int64_t> operator()(Engine& eng) const {
    const std::size_t n = params_.dim();
    std::vector<double> e(n);
    for (double& v : e) v = std_normal_quantile(open_uniform(eng));
    const std::vector<double> z = params_.chol().apply(e);
    std::vector<std::int64_t> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = tables_[i].from_normal(z[i]);
    return x;
  }

 private:
  GdnParams params_;
  std::vector<GdTable> tables_;
};

template <class Engine>
std::vector<std::int64_t> sample_gdn(const GdnParams& params, Engine& eng) {
  return GdnSampler(params)(eng);
}

}  // namespace gdcount

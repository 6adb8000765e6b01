#pragma once

// Grid construction, grid moments, contour matrices for the exact and
// approximate bivariate pmfs, and the four-case reproduction table.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gdcount/error.hpp"
#include "gdcount/grid.hpp"
#include "gdcount/multivariate.hpp"
#include "gdcount/univariate.hpp"

namespace gdcount {

inline constexpr double kDefaultSigmas = 8.0;

/// [max(0, floor(mu - k sd)), min(support_max, ceil(mu + k sd))].
inline GridRange default_range(const GdParams& g, double sigmas = kDefaultSigmas) {
  if (!(sigmas >= 4.0)) throw DomainError("default_grid: sigmas must be at least 4");
  const double sd = std::sqrt(g.variance());
  GridRange r;
  r.lo = static_cast<std::int64_t>(std::max(0.0, std::floor(g.mean() - sigmas * sd)));
  r.hi = static_cast<std::int64_t>(std::ceil(g.mean() + sigmas * sd));
  if (g.support_max()) r.hi = std::min(r.hi, *g.support_max());
  return r;
}

/// default_range for every marginal.
inline GridSpec default_grid(const GdnParams& params, double sigmas = kDefaultSigmas) {
  std::vector<GridRange> ranges;
  for (const auto& g : params.marginals()) ranges.push_back(default_range(g, sigmas));
  return GridSpec(std::move(ranges));
}

struct MomentSummary {
  std::vector<double> means;
  std::vector<double> variances;
  std::vector<double> correlation;  // dim x dim, row-major
  double total_mass = 0.0;
  std::optional<double> normalization;  // K, for unnormalized evaluators

  [[nodiscard]] std::size_t dim() const { return means.size(); }
  [[nodiscard]] double corr(std::size_t i, std::size_t j) const { return correlation[i * dim() + j]; }
};

/// Moments of a pmf tabulated on a grid, after renormalizing by the grid
/// mass. With unnormalized = true the values are treated as an
/// unnormalized pmf: K = 1 / raw mass is reported and total_mass is 1.
inline MomentSummary moments_from_values(const DenseGrid& dense, bool unnormalized = false) {
  const GridSpec& grid = dense.grid;
  const std::size_t n = grid.dim();
  if (dense.values.size() != grid.point_count()) throw DimensionError("moments_from_values: value count does not match the grid");
  double mass = 0.0;
  std::vector<double> first(n, 0.0);
  std::size_t k = 0;
  grid.for_each([&](std::span<const std::int64_t> x) {
    const double p = dense.values[k++];
    if (p < 0.0) throw DomainError("moments_from_values: negative pmf value on the grid");
    mass += p;
    for (std::size_t i = 0; i < n; ++i) first[i] += p * static_cast<double>(x[i]);
  });
  if (!(mass > 0.0)) throw ZeroMass("moments_from_values: zero total mass on the grid");

  MomentSummary out;
  out.means.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.means[i] = first[i] / mass;
  std::vector<double> cov(n * n, 0.0);
  std::vector<double> d(n);
  k = 0;
  grid.for_each([&](std::span<const std::int64_t> x) {
    const double p = dense.values[k++];
    for (std::size_t i = 0; i < n; ++i) d[i] = static_cast<double>(x[i]) - out.means[i];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) cov[i * n + j] += p * d[i] * d[j];
  });
  out.variances.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.variances[i] = cov[i * n + i] / mass;
  out.correlation.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.correlation[i * n + i] = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      const double denom = std::sqrt(cov[i * n + i] * cov[j * n + j]);
      const double c = denom > 0.0 ? cov[i * n + j] / denom : 0.0;
      out.correlation[i * n + j] = c;
      out.correlation[j * n + i] = c;
    }
  }
  if (unnormalized) {
    out.normalization = 1.0 / mass;
    out.total_mass = 1.0;
  } else {
    out.total_mass = mass;
  }
  return out;
}

using PmfEvaluator = std::function<double(std::span<const std::int64_t>)>;

/// Evaluates pmf on every grid point (row-major).
inline DenseGrid tabulate(const PmfEvaluator& pmf, const GridSpec& grid) {
  DenseGrid out{grid, {}};
  out.values.reserve(grid.point_count());
  grid.for_each([&](std::span<const std::int64_t> x) { out.values.push_back(pmf(x)); });
  return out;
}

inline MomentSummary moments_from_pmf(const PmfEvaluator& pmf, const GridSpec& grid, bool unnormalized = false) {
  return moments_from_values(tabulate(pmf, grid), unnormalized);
}

enum class PmfKind { kExact, kApprox };

inline const char* to_string(PmfKind k) { return k == PmfKind::kExact ? "exact" : "approx"; }

struct ContourData {
  DenseGrid matrix;
  PmfKind kind = PmfKind::kExact;
  /// K used to scale the approximate values; 1 for the exact pmf.
  double normalization = 1.0;
  /// Exact pmf: points whose four-term difference was negative and clamped.
  std::size_t clamped = 0;
  double most_negative = 0.0;

  /// More than 0.1% of the grid clamped.
  [[nodiscard]] bool clamp_warning() const { return clamped * 1000 > matrix.values.size(); }
};

/// Dense matrix of bivariate pmf values over the grid. Approximate values
/// are multiplied by the grid K so the matrix sums to one.
inline ContourData contour_grid(const GdnParams& params, const GridSpec& grid, PmfKind kind) {
  if (params.dim() != 2) throw DimensionError("contour_grid: parameters must be bivariate");
  check_grid(params, grid);
  const auto tables = marginal_tables(params);
  ContourData out;
  out.kind = kind;
  out.matrix.grid = grid;
  out.matrix.values.reserve(grid.point_count());
  if (kind == PmfKind::kExact) {
    const double rho = params.rho()(0, 1);
    grid.for_each([&](std::span<const std::int64_t> x) {
      const double raw = exact_pmf2_raw(tables[0], tables[1], rho, x[0], x[1]);
      if (raw < 0.0) {
        ++out.clamped;
        out.most_negative = std::min(out.most_negative, raw);
      }
      out.matrix.values.push_back(std::max(raw, 0.0));
    });
    return out;
  }
  double total = 0.0;
  grid.for_each([&](std::span<const std::int64_t> x) {
    const double v = approx_pmf_unnorm(std::span<const GdTable>(tables), params.chol(), x);
    total += v;
    out.matrix.values.push_back(v);
  });
  if (!(total > 0.0)) throw ZeroMass("contour_grid: approximate pmf has no mass on the grid");
  out.normalization = 1.0 / total;
  for (double& v : out.matrix.values) v *= out.normalization;
  return out;
}

/// Half the L1 distance between two pmfs on the same grid.
inline double total_variation(const DenseGrid& a, const DenseGrid& b) {
  if (!(a.grid == b.grid)) throw DimensionError("total_variation: grids differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += std::fabs(a.values[i] - b.values[i]);
  return 0.5 * s;
}

/// Row-major index of the largest value (first one on ties).
inline std::size_t argmax_index(const DenseGrid& g) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < g.values.size(); ++i)
    if (g.values[i] > g.values[best]) best = i;
  return best;
}

// ---------------------------------------------------------------------------
// Four reference cases
// ---------------------------------------------------------------------------

struct Table1Values {
  double rho_prime, k, mu1s, v1s, mu2s, v2s, rhos;
};

struct Table1Case {
  std::string label;
  double mu1, v1, mu2, v2, rho;
  Table1Values reference;
};

inline const std::array<Table1Case, 4>& table1_cases() {
  static const std::array<Table1Case, 4> cases{{
      {"a", 50, 25, 50, 25, 0.5, {0.5144, 0.99, 50.25, 24.99, 50.25, 24.99, 0.5009}},
      {"b", 50, 25, 60, 25, 0.7, {0.7129, 0.99, 50.35, 25.04, 59.85, 24.76, 0.7013}},
      {"c", 10, 25, 11, 4, 0.4, {0.3988, 0.99, 9.45, 23.30, 10.90, 3.85, 0.3876}},
      {"d", 10, 5, 5, 10, 0.7, {0.6869, 0.97, 10.23, 4.68, 5.43, 10.43, 0.6670}},
  }};
  return cases;
}

inline GdnParams case_params(const Table1Case& c, BinomialSize rule = BinomialSize::kGeneralized) {
  const std::array<double, 2> mu{c.mu1, c.mu2};
  const std::array<double, 2> v{c.v1, c.v2};
  return new_gdn(mu, v, CorrelationMatrix::bivariate(c.rho), rule);
}

struct Table1Row {
  Table1Case input;
  GridSpec grid;
  Table1Values computed;
  Table1Values deviation;  // computed - reference
  double exact_mass = 0.0;
  double tv_distance = 0.0;
  bool argmax_match = false;
  std::size_t clamped = 0;
};

struct Table1Options {
  double sigmas = kDefaultSigmas;
  BinomialSize rule = BinomialSize::kGeneralized;
};

inline Table1Row reproduce_case(const Table1Case& c, const Table1Options& opts = {}) {
  const GdnParams params = case_params(c, opts.rule);
  Table1Row row{c, default_grid(params, opts.sigmas), {}, {}, 0.0, 0.0, false, 0};
  const ContourData exact = contour_grid(params, row.grid, PmfKind::kExact);
  const ContourData approx = contour_grid(params, row.grid, PmfKind::kApprox);
  const MomentSummary em = moments_from_values(exact.matrix);
  const MomentSummary am = moments_from_values(approx.matrix);
  row.exact_mass = em.total_mass;
  row.clamped = exact.clamped;
  row.computed = {em.corr(0, 1), approx.normalization, am.means[0], am.variances[0],
                  am.means[1], am.variances[1], am.corr(0, 1)};
  const auto& r = c.reference;
  const auto& v = row.computed;
  row.deviation = {v.rho_prime - r.rho_prime, v.k - r.k, v.mu1s - r.mu1s, v.v1s - r.v1s,
                   v.mu2s - r.mu2s, v.v2s - r.v2s, v.rhos - r.rhos};
  row.tv_distance = total_variation(exact.matrix, approx.matrix);
  row.argmax_match = argmax_index(exact.matrix) == argmax_index(approx.matrix);
  return row;
}

/// Runs the four reference cases with their reference inputs.
inline std::vector<Table1Row> reproduce_table1(const Table1Options& opts = {}) {
  std::vector<Table1Row> rows;
  for (const auto& c : table1_cases()) rows.push_back(reproduce_case(c, opts));
  return rows;
}

}  // namespace gdcount

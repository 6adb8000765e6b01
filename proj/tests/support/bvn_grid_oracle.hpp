#pragma once

// Brute-force oracle for the bivariate exact and approximate pmfs on a grid,
// built without the library's bivariate code: exact cells as one-dimensional
// Gauss-Kronrod integrals of phi(s) times a conditional normal probability,
// approximate cells from the closed-form copula density, normal quantiles
// from Boost. Only the univariate cdf/sf/pmf come from the library.

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "gdcount/gdcount.hpp"

namespace oracle {

inline constexpr double kInfty = std::numeric_limits<double>::infinity();

inline const boost::math::normal_distribution<double> kStd;

inline double phi(double s) { return std::exp(-0.5 * s * s) / std::sqrt(2.0 * std::numbers::pi); }
inline double big_phi(double s) { return boost::math::cdf(kStd, s); }

// Phi^-1 of F(x), inverted from whichever tail is smaller.
inline double score(const gdcount::GdParams& g, std::int64_t x, double clamp) {
  const double f = gdcount::cdf(g, x), s = gdcount::sf(g, x);
  if (f <= 0.5) return f <= clamp ? (clamp == 0.0 ? -kInfty : boost::math::quantile(kStd, clamp)) : boost::math::quantile(kStd, f);
  if (s <= clamp) return clamp == 0.0 ? kInfty : boost::math::quantile(boost::math::complement(kStd, clamp));
  return boost::math::quantile(boost::math::complement(kStd, s));
}

// P(a1 < S <= b1, a2 < T <= b2) = int_a1^b1 phi(s) [Phi((b2 - r s)/q) - Phi((a2 - r s)/q)] ds.
inline double cell(double a1, double b1, double a2, double b2, double r) {
  const double q = std::sqrt(1.0 - r * r);
  auto f = [&](double s) {
    const double hi = (b2 - r * s) / q, lo = (a2 - r * s) / q;
    // Difference of upper tails when both limits sit above zero.
    const double d = lo > 0.0 ? boost::math::cdf(boost::math::complement(kStd, lo)) - boost::math::cdf(boost::math::complement(kStd, hi))
                              : big_phi(hi) - big_phi(lo);
    return phi(s) * d;
  };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a1, b1, 10, 1e-12);
}

struct OracleGrids {
  std::vector<double> exact, approx;
};

inline OracleGrids grids(const gdcount::GdnParams& p, const gdcount::GridSpec& g) {
  const double r = p.rho()(0, 1);
  const auto& g1 = p.marginal(0);
  const auto& g2 = p.marginal(1);
  OracleGrids out;
  double total = 0.0;
  for (auto x1 = g[0].lo; x1 <= g[0].hi; ++x1) {
    for (auto x2 = g[1].lo; x2 <= g[1].hi; ++x2) {
      out.exact.push_back(cell(score(g1, x1 - 1, 0.0), score(g1, x1, 0.0), score(g2, x2 - 1, 0.0), score(g2, x2, 0.0), r));
      const double s = score(g1, x1, 1e-15), t = score(g2, x2, 1e-15);
      const double dens = std::exp(-(s * s - 2.0 * r * s * t + t * t) / (2.0 * (1.0 - r * r))) / (2.0 * std::numbers::pi * std::sqrt(1.0 - r * r));
      const double a = dens / (phi(s) * phi(t)) * g1.pmf(x1) * g2.pmf(x2);
      out.approx.push_back(a);
      total += a;
    }
  }
  for (double& a : out.approx) a /= total;
  return out;
}

/// Half the L1 distance between the two oracle pmfs.
inline double total_variation(const OracleGrids& o) {
  double tv = 0.0;
  for (std::size_t k = 0; k < o.exact.size(); ++k) tv += 0.5 * std::fabs(o.exact[k] - o.approx[k]);
  return tv;
}

}  // namespace oracle

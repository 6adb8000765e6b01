#pragma once

// The univariate generic discrete distribution Gd(mu, v): Binomial when the
// target variance is below the mean, Poisson at equality, Negative Binomial
// above, with size m = mu^2 / |mu - v| and success probability
// p = 1 - min(mu/v, v/mu) so that E X = mu and Var X = v.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gdcount/error.hpp"
#include "gdcount/mvn.hpp"
#include "gdcount/special_fn.hpp"

namespace gdcount {

enum class Branch { kBinomial, kPoisson, kNegBinomial };

/// How the Binomial branch treats a non-integer size m.
enum class BinomialSize {
  /// Gamma-generalized coefficients on {0, ..., floor(m)}, renormalized.
  kGeneralized,
  /// Ordinary Binomial(floor(m), p); the mean drops to floor(m) p.
  kFloor,
};

inline constexpr double kBranchTolerance = 1e-10;
inline constexpr double kSizeSnapTolerance = 1e-12;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline const char* to_string(Branch b) {
  switch (b) {
    case Branch::kBinomial: return "binomial";
    case Branch::kPoisson: return "poisson";
    case Branch::kNegBinomial: return "negbinomial";
  }
  return "?";
}

class GdParams {
 public:
  static GdParams from_moments(double mu, double v, BinomialSize rule = BinomialSize::kGeneralized) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("Gd: mean must be positive and finite");
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("Gd: variance must be positive and finite");
    GdParams g;
    g.mu_ = mu;
    g.v_ = v;
    g.rule_ = rule;
    if (mu > v * (1.0 + kBranchTolerance)) {
      g.branch_ = Branch::kBinomial;
      const double diff = mu - v;
      g.m_ = mu * mu / diff;
      // mu - v cancels, so an integer size can arrive ~eps/p off; snapped so
      // floor() does not drop the top support point (mass p^m).
      if (const double r = std::round(g.m_); std::fabs(g.m_ - r) <= kSizeSnapTolerance * r) g.m_ = r;
      g.p_ = 1.0 - v / mu;
      g.ln_p_ = std::log(diff) - std::log(mu);
      g.ln_q_ = std::log1p(-diff / mu);  // m can be huge near mu = v; keep ln(1-p) to full relative accuracy
      const double floor_m = std::floor(g.m_);
      if (!(floor_m < 9.0e15)) throw DomainError("Gd: Binomial size too large");
      g.support_max_ = static_cast<std::int64_t>(floor_m);
      g.trials_ = rule == BinomialSize::kFloor ? floor_m : g.m_;
      // Integer sizes are renormalized too: ln p and ln q are rounded
      // separately, and (p + q)^m drifts from 1 by ~m eps for large m.
      g.ln_norm_ = g.binomial_log_mass();
    } else if (v > mu * (1.0 + kBranchTolerance)) {
      g.branch_ = Branch::kNegBinomial;
      const double diff = v - mu;
      g.m_ = mu * mu / diff;
      g.p_ = 1.0 - mu / v;
      g.ln_p_ = std::log(diff) - std::log(v);
      g.ln_q_ = std::log1p(-diff / v);
      g.trials_ = g.m_;
    } else {
      g.branch_ = Branch::kPoisson;
      g.ln_p_ = std::log(mu);
    }
    return g;
  }

  [[nodiscard]] double mean() const { return mu_; }
  [[nodiscard]] double variance() const { return v_; }
  [[nodiscard]] Branch branch() const { return branch_; }
  [[nodiscard]] BinomialSize binomial_size() const { return rule_; }

  /// m = mu^2 / |mu - v|; empty for the Poisson branch.
  [[nodiscard]] std::optional<double> size() const {
    if (branch_ == Branch::kPoisson) return std::nullopt;
    return m_;
  }
  /// Success probability; empty for the Poisson branch.
  [[nodiscard]] std::optional<double> prob() const {
    if (branch_ == Branch::kPoisson) return std::nullopt;
    return p_;
  }
  /// Largest value with positive mass (Binomial only).
  [[nodiscard]] std::optional<std::int64_t> support_max() const { return support_max_; }

  /// Size actually used in the coefficients: m, or floor(m) under BinomialSize::kFloor.
  [[nodiscard]] double effective_size() const { return trials_; }

  [[nodiscard]] double log_pmf(std::int64_t x) const {
    if (x < 0) return kNegInf;
    if (support_max_ && x > *support_max_) return kNegInf;
    const auto xd = static_cast<double>(x);
    switch (branch_) {
      case Branch::kBinomial: return raw_binomial_log_pmf(xd) - ln_norm_;
      case Branch::kNegBinomial:
        return ln_gamma_ratio(trials_, xd) - ln_gamma(xd + 1.0) + xd * ln_p_ + trials_ * ln_q_;
      case Branch::kPoisson: return -mu_ + xd * ln_p_ - ln_gamma(xd + 1.0);
    }
    return kNegInf;
  }

  [[nodiscard]] double pmf(std::int64_t x) const {
    const double lp = log_pmf(x);
    return lp == kNegInf ? 0.0 : std::exp(lp);
  }

  /// Integer near the mode used to split lower/upper-tail summation.
  [[nodiscard]] std::int64_t pivot() const {
    auto c = static_cast<std::int64_t>(std::floor(mu_));
    if (support_max_) c = std::min(c, *support_max_);
    return c;
  }

  /// Upper bound on P(X > x) from the pmf at x and the largest ratio
  /// pmf(y+1)/pmf(y) over y >= x. Valid for x at or beyond the mode.
  [[nodiscard]] double upper_tail_bound(std::int64_t x) const {
    if (support_max_ && x >= *support_max_) return 0.0;
    const auto xd = static_cast<double>(x);
    double ratio = 0.0;
    switch (branch_) {
      case Branch::kBinomial: ratio = (trials_ - xd) / (xd + 1.0) * p_ / (1.0 - p_); break;
      case Branch::kNegBinomial: ratio = std::max(p_ * (xd + trials_) / (xd + 1.0), p_); break;
      case Branch::kPoisson: ratio = mu_ / (xd + 1.0); break;
    }
    if (ratio >= 1.0) return kInf;
    return pmf(x) * ratio / (1.0 - ratio);
  }

  /// Hard stop for upward searches in the unbounded branches.
  [[nodiscard]] std::int64_t search_cap() const {
    double cap = mu_ + 50.0 * std::sqrt(v_);
    if (branch_ == Branch::kNegBinomial) cap = std::max(cap, mu_ + 800.0 / -ln_p_);
    if (support_max_) cap = std::min(cap, static_cast<double>(*support_max_));
    return static_cast<std::int64_t>(std::min(std::ceil(cap), 4.0e15));
  }

 private:
  GdParams() = default;

  [[nodiscard]] double raw_binomial_log_pmf(double x) const {
    return ln_gen_choose(trials_, x) + x * ln_p_ + (trials_ - x) * ln_q_;
  }

  // ln of the total raw mass on {0..floor(m)} for non-integer m; only the
  // window where the mass lives contributes.
  [[nodiscard]] double binomial_log_mass() const {
    const double sd = std::sqrt(v_);
    const auto hi = static_cast<std::int64_t>(std::min(static_cast<double>(*support_max_), std::ceil(mu_ + 40.0 * sd)));
    const auto lo = static_cast<std::int64_t>(std::max(0.0, std::floor(mu_ - 40.0 * sd)));
    double sum = 0.0;
    for (std::int64_t x = lo; x <= hi; ++x) sum += std::exp(raw_binomial_log_pmf(static_cast<double>(x)));
    return std::log(sum);
  }

  double mu_ = 0.0;
  double v_ = 0.0;
  Branch branch_ = Branch::kPoisson;
  BinomialSize rule_ = BinomialSize::kGeneralized;
  double m_ = 0.0;
  double p_ = 0.0;
  double trials_ = 0.0;
  double ln_p_ = 0.0;  // ln p, or ln mu for the Poisson branch
  double ln_q_ = 0.0;  // ln(1 - p)
  double ln_norm_ = 0.0;
  std::optional<std::int64_t> support_max_;
};

inline GdParams from_moments(double mu, double v, BinomialSize rule = BinomialSize::kGeneralized) {
  return GdParams::from_moments(mu, v, rule);
}

inline double pmf(const GdParams& g, std::int64_t x) { return g.pmf(x); }
inline double log_pmf(const GdParams& g, std::int64_t x) { return g.log_pmf(x); }

inline double sf(const GdParams& g, std::int64_t x);

/// P(X <= x). Summed from zero below the mode and as 1 - P(X > x) above it.
inline double cdf(const GdParams& g, std::int64_t x) {
  if (x < 0) return 0.0;
  if (g.support_max() && x >= *g.support_max()) return 1.0;
  if (x >= g.pivot()) return 1.0 - sf(g, x);
  double acc = 0.0;
  for (std::int64_t y = 0; y <= x; ++y) acc += g.pmf(y);
  return std::min(acc, 1.0);
}

/// P(X > x), summed upward above the mode until the remaining mass is
/// negligible relative to the partial sum.
inline double sf(const GdParams& g, std::int64_t x) {
  if (x < 0) return 1.0;
  if (g.support_max() && x >= *g.support_max()) return 0.0;
  if (x < g.pivot()) return 1.0 - cdf(g, x);
  const std::int64_t cap = std::max(g.search_cap(), x + 1);
  double acc = 0.0;
  for (std::int64_t y = x + 1; y <= cap; ++y) {
    const double term = g.pmf(y);
    acc += term;
    if (term == 0.0 || g.upper_tail_bound(y) <= 1e-17 * acc) break;
  }
  return std::min(acc, 1.0);
}

/// Smallest x with cdf(x) >= u, for u in (0, 1).
inline std::int64_t quantile(const GdParams& g, double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: u must lie in (0, 1)");
  std::int64_t x = 0;
  double acc = g.pmf(0);
  const std::int64_t cap = g.search_cap();
  while (acc < u && x < cap) acc += g.pmf(++x);
  while (cdf(g, x) < u) ++x;
  while (x > 0 && cdf(g, x - 1) >= u) --x;
  return x;
}

/// One draw by inversion of a uniform from the caller's engine.
template <class Engine>
std::int64_t sample(const GdParams& g, Engine& eng) {
  return quantile(g, open_uniform(eng));
}

/// Last value that must be kept so the omitted upper tail has mass at most
/// tail_mass (bounded by GdParams::search_cap()).
inline std::int64_t truncation_upper(const GdParams& g, double tail_mass) {
  std::int64_t x = std::max<std::int64_t>(g.pivot(), 0);
  const std::int64_t cap = g.search_cap();
  while (x < cap && g.upper_tail_bound(x) > tail_mass) ++x;
  return x;
}

struct SummedMoments {
  double mean = 0.0;
  double variance = 0.0;
  double mass = 0.0;
};

/// Mean and variance by direct summation over {0, ..., U}, U chosen so the
/// omitted mass is at most tail_mass; moments are taken relative to the
/// included mass.
inline SummedMoments summed_moments(const GdParams& g, double tail_mass) {
  if (!(tail_mass > 0.0 && tail_mass <= 1e-3)) throw DomainError("summed_moments: tail_mass must lie in (0, 1e-3]");
  const std::int64_t upper = truncation_upper(g, tail_mass);
  std::vector<double> p(static_cast<std::size_t>(upper) + 1);
  SummedMoments out;
  double first = 0.0;
  for (std::int64_t x = 0; x <= upper; ++x) {
    p[static_cast<std::size_t>(x)] = g.pmf(x);
    out.mass += p[static_cast<std::size_t>(x)];
    first += static_cast<double>(x) * p[static_cast<std::size_t>(x)];
  }
  out.mean = first / out.mass;
  double second = 0.0;
  for (std::int64_t x = 0; x <= upper; ++x) {
    const double d = static_cast<double>(x) - out.mean;
    second += d * d * p[static_cast<std::size_t>(x)];
  }
  out.variance = second / out.mass;
  return out;
}

/// pmf, cdf and survival values tabulated on {0, ..., upper()}, where the
/// mass above upper() is below 1e-17. Used for grid work and bulk sampling.
class GdTable {
 public:
  explicit GdTable(GdParams params, double tail_mass = 1e-17)
      : params_(std::move(params)) {
    const std::int64_t upper = truncation_upper(params_, tail_mass);
    const auto n = static_cast<std::size_t>(upper) + 1;
    pmf_.resize(n);
    cdf_.resize(n);
    sf_.resize(n);
    for (std::size_t x = 0; x < n; ++x) pmf_[x] = params_.pmf(static_cast<std::int64_t>(x));
    const auto pivot = static_cast<std::size_t>(std::max<std::int64_t>(params_.pivot(), 0));
    double acc = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      acc += pmf_[x];
      cdf_[x] = acc;
    }
    double tail = params_.support_max() && upper >= *params_.support_max() ? 0.0 : params_.upper_tail_bound(upper);
    for (std::size_t x = n; x-- > 0;) {
      sf_[x] = tail;
      tail += pmf_[x];
    }
    for (std::size_t x = 0; x < n; ++x) {
      if (x < pivot) {
        sf_[x] = 1.0 - cdf_[x];
      } else {
        cdf_[x] = 1.0 - sf_[x];
      }
    }
  }

  [[nodiscard]] const GdParams& params() const { return params_; }
  [[nodiscard]] std::int64_t upper() const { return static_cast<std::int64_t>(pmf_.size()) - 1; }

  [[nodiscard]] double pmf(std::int64_t x) const {
    if (x < 0) return 0.0;
    return x <= upper() ? pmf_[static_cast<std::size_t>(x)] : params_.pmf(x);
  }
  [[nodiscard]] double cdf(std::int64_t x) const {
    if (x < 0) return 0.0;
    return x <= upper() ? cdf_[static_cast<std::size_t>(x)] : gdcount::cdf(params_, x);
  }
  [[nodiscard]] double sf(std::int64_t x) const {
    if (x < 0) return 1.0;
    return x <= upper() ? sf_[static_cast<std::size_t>(x)] : gdcount::sf(params_, x);
  }

  /// Smallest x with cdf(x) >= u.
  [[nodiscard]] std::int64_t quantile(double u) const {
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) return gdcount::quantile(params_, u);
    return it - cdf_.begin();
  }

  /// Smallest x with sf(x) <= q; the upper-tail counterpart of quantile(1 - q).
  [[nodiscard]] std::int64_t upper_quantile(double q) const {
    auto it = std::lower_bound(sf_.begin(), sf_.end(), q, [](double s, double v) { return s > v; });
    if (it == sf_.end()) {
      std::int64_t x = upper();
      while (gdcount::sf(params_, x) > q) ++x;
      return x;
    }
    return it - sf_.begin();
  }

  /// Value whose normal score interval contains z: the inversion used by
  /// copula sampling, done in the tail where the probabilities are exact.
  [[nodiscard]] std::int64_t from_normal(double z) const {
    return z <= 0.0 ? quantile(std_normal_cdf(z)) : upper_quantile(std_normal_sf(z));
  }

 private:
  GdParams params_;
  std::vector<double> pmf_, cdf_, sf_;
};

/// Inversion sampler over a prebuilt table, for bulk draws. Consumes the
/// engine exactly like sample() and returns the same values (the table's
/// upper-tail cdf is accumulated in a different order, so the two can only
/// differ when a uniform lands within ~1e-16 of a cdf step).
class GdSampler {
 public:
  explicit GdSampler(GdParams params) : table_(std::move(params)) {}

  template <class Engine>
  std::int64_t operator()(Engine& eng) const {
    return table_.quantile(open_uniform(eng));
  }

  [[nodiscard]] const GdTable& table() const { return table_; }

 private:
  GdTable table_;
};

}  // namespace gdcount

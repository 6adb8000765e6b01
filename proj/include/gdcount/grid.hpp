#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gdcount/error.hpp"

namespace gdcount {

/// Inclusive integer range [lo, hi].
struct GridRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(hi - lo + 1); }
  friend bool operator==(const GridRange&, const GridRange&) = default;
};

/// Rectangular truncated support, one inclusive range per dimension.
/// Points are visited row-major (last dimension fastest).
class GridSpec {
 public:
  GridSpec() = default;
  explicit GridSpec(std::vector<GridRange> ranges) : ranges_(std::move(ranges)) {
    if (ranges_.empty()) throw DimensionError("GridSpec: at least one dimension is required");
    for (const auto& r : ranges_) {
      if (r.lo < 0) throw DomainError("GridSpec: ranges must start at or above 0");
      if (r.lo > r.hi) throw DomainError("GridSpec: empty range [" + std::to_string(r.lo) + ", " + std::to_string(r.hi) + "]");
    }
  }

  [[nodiscard]] std::size_t dim() const { return ranges_.size(); }
  [[nodiscard]] const GridRange& operator[](std::size_t i) const { return ranges_[i]; }
  [[nodiscard]] std::span<const GridRange> ranges() const { return ranges_; }

  [[nodiscard]] std::size_t point_count() const {
    std::size_t n = 1;
    for (const auto& r : ranges_) n *= r.size();
    return n;
  }

  /// Calls f(point) for every grid point in row-major order.
  template <class F>
  void for_each(F&& f) const {
    std::vector<std::int64_t> x(ranges_.size());
    for (std::size_t i = 0; i < ranges_.size(); ++i) x[i] = ranges_[i].lo;
    for (;;) {
      f(std::span<const std::int64_t>(x));
      std::size_t d = ranges_.size();
      while (d > 0) {
        --d;
        if (x[d] < ranges_[d].hi) {
          ++x[d];
          break;
        }
        x[d] = ranges_[d].lo;
        if (d == 0) return;
      }
    }
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  std::vector<GridRange> ranges_;
};

/// Values on a GridSpec, row-major.
struct DenseGrid {
  GridSpec grid;
  std::vector<double> values;

  [[nodiscard]] double sum() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
};

}  // namespace gdcount

#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace rmon {

/// Closed interval [lo, hi] over the reals. Degenerate intervals are allowed.
///
/// Arithmetic uses round-to-nearest; no outward rounding is applied.
class Interval {
 public:
  /// Throws std::invalid_argument if lo > hi or either bound is NaN.
  Interval(double lo, double hi);

  static Interval point(double x) { return Interval(x, x); }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double width() const noexcept { return hi_ - lo_; }
  double mid() const noexcept { return lo_ + (hi_ - lo_) / 2.0; }
  bool is_point() const noexcept { return lo_ == hi_; }
  bool contains(double x) const noexcept { return lo_ <= x && x <= hi_; }
  bool contains(const Interval& other) const noexcept {
    return lo_ <= other.lo_ && other.hi_ <= hi_;
  }

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  double lo_;
  double hi_;
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);
Interval operator*(const Interval& a, const Interval& b);
/// Throws EvalError when the divisor contains zero.
Interval operator/(const Interval& a, const Interval& b);
Interval scale(const Interval& a, double factor);

/// Elementwise lower/upper envelope: {min(x, y) | x in a, y in b}.
Interval min(const Interval& a, const Interval& b);
Interval max(const Interval& a, const Interval& b);

/// Common part of two intervals; touching endpoints overlap.
std::optional<Interval> intersect(const Interval& a, const Interval& b);
bool overlaps(const Interval& a, const Interval& b);

/// How disagreement between two value intervals is measured.
enum class GapMode {
  /// max(0, max(lo) - min(hi)): zero whenever the intervals overlap.
  Separation,
  /// |max(lo) - min(hi)|: also counts the overlap width of overlapping intervals.
  AbsoluteLiteral,
};

double gap(const Interval& a, const Interval& b, GapMode mode = GapMode::Separation);

std::ostream& operator<<(std::ostream& os, const Interval& iv);

/// Fixed-length vector of intervals (length >= 1). Binary operations require
/// equal lengths and throw DimensionError otherwise.
class IntervalVector {
 public:
  /// Throws DimensionError on an empty list.
  explicit IntervalVector(std::vector<Interval> dims);
  IntervalVector(std::initializer_list<Interval> dims);

  /// Builds [x_i, x_i] for every sample.
  static IntervalVector points(std::span<const double> xs);

  std::size_t size() const noexcept { return dims_.size(); }
  const Interval& operator[](std::size_t i) const { return dims_[i]; }
  const Interval& at(std::size_t i) const;
  std::span<const Interval> dims() const noexcept { return dims_; }
  auto begin() const noexcept { return dims_.begin(); }
  auto end() const noexcept { return dims_.end(); }

  bool contains(std::span<const double> xs) const;

  friend bool operator==(const IntervalVector&, const IntervalVector&) = default;

 private:
  std::vector<Interval> dims_;
};

IntervalVector operator+(const IntervalVector& a, const IntervalVector& b);
IntervalVector operator-(const IntervalVector& a, const IntervalVector& b);
IntervalVector operator*(const IntervalVector& a, const IntervalVector& b);
IntervalVector operator/(const IntervalVector& a, const IntervalVector& b);
IntervalVector scale(const IntervalVector& a, double factor);

/// [min_i lo_i, min_i hi_i] and the symmetric max; sum adds all dimensions.
Interval min_reduce(const IntervalVector& v);
Interval max_reduce(const IntervalVector& v);
Interval sum_reduce(const IntervalVector& v);

/// Sum of per-dimension gaps. Throws DimensionError on length mismatch.
double vec_gap(const IntervalVector& a, const IntervalVector& b,
               GapMode mode = GapMode::Separation);

std::ostream& operator<<(std::ostream& os, const IntervalVector& v);

}  // namespace rmon

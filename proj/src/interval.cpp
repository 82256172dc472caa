#include "rmon/interval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rmon/errors.hpp"

namespace rmon {

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
  if (std::isnan(lo) || std::isnan(hi)) {
    throw std::invalid_argument("interval bound is NaN");
  }
  if (lo > hi) {
    throw std::invalid_argument("interval lower bound " + std::to_string(lo) +
                                " exceeds upper bound " + std::to_string(hi));
  }
}

Interval operator+(const Interval& a, const Interval& b) {
  return Interval(a.lo() + b.lo(), a.hi() + b.hi());
}

Interval operator-(const Interval& a, const Interval& b) {
  return Interval(a.lo() - b.hi(), a.hi() - b.lo());
}

Interval operator-(const Interval& a) { return Interval(-a.hi(), -a.lo()); }

Interval operator*(const Interval& a, const Interval& b) {
  const double p[] = {a.lo() * b.lo(), a.lo() * b.hi(), a.hi() * b.lo(), a.hi() * b.hi()};
  const auto [lo, hi] = std::minmax_element(std::begin(p), std::end(p));
  return Interval(*lo, *hi);
}

Interval operator/(const Interval& a, const Interval& b) {
  if (b.contains(0.0)) {
    throw EvalError("division by an interval containing zero");
  }
  const double q[] = {a.lo() / b.lo(), a.lo() / b.hi(), a.hi() / b.lo(), a.hi() / b.hi()};
  const auto [lo, hi] = std::minmax_element(std::begin(q), std::end(q));
  return Interval(*lo, *hi);
}

Interval scale(const Interval& a, double factor) {
  return factor >= 0.0 ? Interval(a.lo() * factor, a.hi() * factor)
                       : Interval(a.hi() * factor, a.lo() * factor);
}

Interval min(const Interval& a, const Interval& b) {
  return Interval(std::min(a.lo(), b.lo()), std::min(a.hi(), b.hi()));
}

Interval max(const Interval& a, const Interval& b) {
  return Interval(std::max(a.lo(), b.lo()), std::max(a.hi(), b.hi()));
}

std::optional<Interval> intersect(const Interval& a, const Interval& b) {
  const double lo = std::max(a.lo(), b.lo());
  const double hi = std::min(a.hi(), b.hi());
  if (lo > hi) return std::nullopt;
  return Interval(lo, hi);
}

bool overlaps(const Interval& a, const Interval& b) {
  return std::max(a.lo(), b.lo()) <= std::min(a.hi(), b.hi());
}

double gap(const Interval& a, const Interval& b, GapMode mode) {
  const double d = std::max(a.lo(), b.lo()) - std::min(a.hi(), b.hi());
  switch (mode) {
    case GapMode::AbsoluteLiteral:
      return std::abs(d);
    case GapMode::Separation:
      break;
  }
  return std::max(0.0, d);
}

std::ostream& operator<<(std::ostream& os, const Interval& iv) {
  return os << '[' << iv.lo() << ',' << iv.hi() << ']';
}

IntervalVector::IntervalVector(std::vector<Interval> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw DimensionError("interval vector must have at least one dimension");
}

IntervalVector::IntervalVector(std::initializer_list<Interval> dims)
    : IntervalVector(std::vector<Interval>(dims)) {}

IntervalVector IntervalVector::points(std::span<const double> xs) {
  std::vector<Interval> dims;
  dims.reserve(xs.size());
  for (double x : xs) dims.push_back(Interval::point(x));
  return IntervalVector(std::move(dims));
}

const Interval& IntervalVector::at(std::size_t i) const {
  if (i >= dims_.size()) {
    throw DimensionError("index " + std::to_string(i) + " out of range for length " +
                         std::to_string(dims_.size()));
  }
  return dims_[i];
}

bool IntervalVector::contains(std::span<const double> xs) const {
  if (xs.size() != dims_.size()) return false;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!dims_[i].contains(xs[i])) return false;
  }
  return true;
}

namespace {

void require_same_length(const IntervalVector& a, const IntervalVector& b, const char* op) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string("length mismatch in ") + op + ": " +
                         std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
}

template <typename Op>
IntervalVector zip(const IntervalVector& a, const IntervalVector& b, const char* name, Op op) {
  require_same_length(a, b, name);
  std::vector<Interval> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(op(a[i], b[i]));
  return IntervalVector(std::move(out));
}

}  // namespace

IntervalVector operator+(const IntervalVector& a, const IntervalVector& b) {
  return zip(a, b, "+", [](const Interval& x, const Interval& y) { return x + y; });
}

IntervalVector operator-(const IntervalVector& a, const IntervalVector& b) {
  return zip(a, b, "-", [](const Interval& x, const Interval& y) { return x - y; });
}

IntervalVector operator*(const IntervalVector& a, const IntervalVector& b) {
  return zip(a, b, "*", [](const Interval& x, const Interval& y) { return x * y; });
}

IntervalVector operator/(const IntervalVector& a, const IntervalVector& b) {
  return zip(a, b, "/", [](const Interval& x, const Interval& y) { return x / y; });
}

IntervalVector scale(const IntervalVector& a, double factor) {
  std::vector<Interval> out;
  out.reserve(a.size());
  for (const auto& d : a) out.push_back(scale(d, factor));
  return IntervalVector(std::move(out));
}

Interval min_reduce(const IntervalVector& v) {
  Interval acc = v[0];
  for (std::size_t i = 1; i < v.size(); ++i) acc = min(acc, v[i]);
  return acc;
}

Interval max_reduce(const IntervalVector& v) {
  Interval acc = v[0];
  for (std::size_t i = 1; i < v.size(); ++i) acc = max(acc, v[i]);
  return acc;
}

Interval sum_reduce(const IntervalVector& v) {
  Interval acc = v[0];
  for (std::size_t i = 1; i < v.size(); ++i) acc = acc + v[i];
  return acc;
}

double vec_gap(const IntervalVector& a, const IntervalVector& b, GapMode mode) {
  require_same_length(a, b, "vec_gap");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += gap(a[i], b[i], mode);
  return total;
}

std::ostream& operator<<(std::ostream& os, const IntervalVector& v) {
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << v[i];
  }
  return os << ']';
}

}  // namespace rmon

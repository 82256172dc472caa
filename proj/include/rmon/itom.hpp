#pragma once

#include <utility>

#include "rmon/ids.hpp"
#include "rmon/interval.hpp"

namespace rmon {

/// One observation of a signal: a value region, the time span over which the
/// value is taken to hold, the sender's timestamp t_s (inside that span) and
/// the monitor-side reception time t_r. t_r may precede t_s under clock skew.
class Itom {
 public:
  /// Throws std::invalid_argument if t_s lies outside `time`.
  Itom(SignalId signal, IntervalVector value, Interval time, double t_s, double t_r);

  const SignalId& signal() const noexcept { return signal_; }
  const IntervalVector& value() const noexcept { return value_; }
  const Interval& time() const noexcept { return time_; }
  double t_s() const noexcept { return t_s_; }
  double t_r() const noexcept { return t_r_; }

  friend bool operator==(const Itom&, const Itom&) = default;

 private:
  SignalId signal_;
  IntervalVector value_;
  Interval time_;
  double t_s_;
  double t_r_;
};

}  // namespace rmon

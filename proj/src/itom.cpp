#include "rmon/itom.hpp"

#include <stdexcept>

namespace rmon {

Itom::Itom(SignalId signal, IntervalVector value, Interval time, double t_s, double t_r)
    : signal_(std::move(signal)), value_(std::move(value)), time_(time), t_s_(t_s), t_r_(t_r) {
  if (!time_.contains(t_s_)) {
    throw std::invalid_argument("itom timestamp lies outside its validity interval");
  }
}

}  // namespace rmon

#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <mutex>
#include <set>
#include <span>
#include <vector>

#include "rmon/ids.hpp"
#include "rmon/interval.hpp"
#include "rmon/itom.hpp"
#include "rmon/knowledge_base.hpp"

namespace rmon {

/// Per-dimension value half-width. A single entry applies to every dimension.
struct Uncertainty {
  enum class Mode { Absolute, Relative };
  Mode mode = Mode::Absolute;
  std::vector<double> half_widths{0.0};

  double half_width(std::size_t dim, double raw) const;
};

/// Datasheet-style description of a signal.
struct SignalSpec {
  SignalId signal;
  std::size_t dims = 1;
  double delta = 0.0;   // worst-case delay Δ (s); validity interval is [t_s - Δ, t_s]
  Uncertainty uncertainty;
  double period = 1.0;  // nominal sampling period T (s)

  /// Throws ConfigError on negative delta/uncertainty, non-positive period,
  /// zero dims, or a per-dimension uncertainty list of the wrong length.
  void check() const;
};

/// value_i = [raw_i - u_i, raw_i + u_i], time = [t_s - Δ, t_s].
/// Throws DimensionError if raw.size() != spec.dims and Error on non-finite input.
Itom make_itom(const SignalSpec& spec, double t_s, std::span<const double> raw, double t_r);

/// Copy of the buffer contents taken at the start of a step.
struct BufferSnapshot {
  double t_cur = 0.0;
  std::map<SignalId, std::vector<Itom>> itoms;

  const std::vector<Itom>& of(const SignalId& sig) const;
  std::size_t size() const;
};

/// Monitor-side history of itoms covering the last n_buf monitor periods.
///
/// ingest() only appends; itoms leave the buffer in evict(), which the
/// monitor calls at step boundaries. Within a signal, itoms keep arrival
/// order, which is t_r order whenever producers deliver in reception order.
class ItomBuffer {
 public:
  ItomBuffer() = default;
  /// Throws ConfigError unless n_buf >= 1 and monitor_period > 0.
  ItomBuffer(std::size_t n_buf, double monitor_period);

  void add_signal(const SignalId& sig);
  bool knows(const SignalId& sig) const { return rings_.contains(sig); }

  /// Throws Error for an unregistered signal.
  void ingest(Itom itom);

  /// Itoms with t_r in (t_cur - n_buf * T_m, t_cur].
  BufferSnapshot snapshot(double t_cur) const;
  /// Drops itoms with t_r <= t_cur - n_buf * T_m.
  void evict(double t_cur);

  double retention() const noexcept { return static_cast<double>(n_buf_) * period_; }
  std::size_t n_buf() const noexcept { return n_buf_; }
  double monitor_period() const noexcept { return period_; }
  std::size_t size() const;
  const std::deque<Itom>& of(const SignalId& sig) const;

 private:
  std::size_t n_buf_ = 1;
  double period_ = 1.0;
  std::map<SignalId, std::deque<Itom>> rings_;
};

/// True iff some buffered itom of a signal bound to v is valid at t_cur.
bool is_provided(const ItomBuffer& buffer, const VariableId& v, const KnowledgeBase& kb,
                 double t_cur);

/// Thread-safe hand-off of itoms from producers to the stepping context.
class IngestQueue {
 public:
  /// Replaces the set of signals push() accepts.
  void accept(std::set<SignalId> signals);
  /// Throws Error for a signal outside the accepted set.
  void push(Itom itom);
  /// Moves all queued itoms out, in push order.
  std::vector<Itom> drain();

 private:
  std::mutex mutex_;
  std::set<SignalId> accepted_;
  std::vector<Itom> pending_;
};

}  // namespace rmon

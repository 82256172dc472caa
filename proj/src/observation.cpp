#include "rmon/observation.hpp"

#include <cmath>
#include <string>

#include "rmon/errors.hpp"

namespace rmon {

double Uncertainty::half_width(std::size_t dim, double raw) const {
  const double u = half_widths.size() == 1 ? half_widths[0] : half_widths.at(dim);
  return mode == Mode::Relative ? u * std::abs(raw) : u;
}

void SignalSpec::check() const {
  const std::string who = "signal " + signal.str() + ": ";
  if (dims == 0) throw ConfigError(who + "dims must be at least 1");
  if (!(delta >= 0.0)) throw ConfigError(who + "delta must be non-negative");
  if (!(period > 0.0)) throw ConfigError(who + "period must be positive");
  if (uncertainty.half_widths.empty()) throw ConfigError(who + "uncertainty is empty");
  if (uncertainty.half_widths.size() != 1 && uncertainty.half_widths.size() != dims) {
    throw ConfigError(who + "uncertainty needs 1 or " + std::to_string(dims) + " entries");
  }
  for (double u : uncertainty.half_widths) {
    if (!(u >= 0.0) || !std::isfinite(u)) throw ConfigError(who + "uncertainty must be >= 0");
  }
}

Itom make_itom(const SignalSpec& spec, double t_s, std::span<const double> raw, double t_r) {
  if (raw.size() != spec.dims) {
    throw DimensionError("signal " + spec.signal.str() + " expects " + std::to_string(spec.dims) +
                         " values, got " + std::to_string(raw.size()));
  }
  if (!std::isfinite(t_s) || !std::isfinite(t_r)) {
    throw Error("signal " + spec.signal.str() + ": non-finite timestamp");
  }
  std::vector<Interval> dims;
  dims.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) {
      throw Error("signal " + spec.signal.str() + ": non-finite value in dimension " +
                  std::to_string(i));
    }
    const double u = spec.uncertainty.half_width(i, raw[i]);
    dims.emplace_back(raw[i] - u, raw[i] + u);
  }
  return Itom(spec.signal, IntervalVector(std::move(dims)), Interval(t_s - spec.delta, t_s), t_s,
              t_r);
}

const std::vector<Itom>& BufferSnapshot::of(const SignalId& sig) const {
  static const std::vector<Itom> kNone;
  auto it = itoms.find(sig);
  return it == itoms.end() ? kNone : it->second;
}

std::size_t BufferSnapshot::size() const {
  std::size_t n = 0;
  for (const auto& [sig, xs] : itoms) n += xs.size();
  return n;
}

ItomBuffer::ItomBuffer(std::size_t n_buf, double monitor_period)
    : n_buf_(n_buf), period_(monitor_period) {
  if (n_buf == 0) throw ConfigError("n_buf must be at least 1");
  if (!(monitor_period > 0.0)) throw ConfigError("monitor period must be positive");
}

void ItomBuffer::add_signal(const SignalId& sig) { rings_.try_emplace(sig); }

void ItomBuffer::ingest(Itom itom) {
  auto it = rings_.find(itom.signal());
  if (it == rings_.end()) throw Error("itom of unknown signal " + itom.signal().str());
  it->second.push_back(std::move(itom));
}

BufferSnapshot ItomBuffer::snapshot(double t_cur) const {
  BufferSnapshot snap;
  snap.t_cur = t_cur;
  const double oldest = t_cur - retention();
  for (const auto& [sig, ring] : rings_) {
    auto& out = snap.itoms[sig];
    for (const auto& itom : ring) {
      if (itom.t_r() > oldest && itom.t_r() <= t_cur) out.push_back(itom);
    }
  }
  return snap;
}

void ItomBuffer::evict(double t_cur) {
  const double oldest = t_cur - retention();
  for (auto& [sig, ring] : rings_) {
    std::erase_if(ring, [&](const Itom& i) { return i.t_r() <= oldest; });
  }
}

std::size_t ItomBuffer::size() const {
  std::size_t n = 0;
  for (const auto& [sig, ring] : rings_) n += ring.size();
  return n;
}

const std::deque<Itom>& ItomBuffer::of(const SignalId& sig) const {
  static const std::deque<Itom> kNone;
  auto it = rings_.find(sig);
  return it == rings_.end() ? kNone : it->second;
}

bool is_provided(const ItomBuffer& buffer, const VariableId& v, const KnowledgeBase& kb,
                 double t_cur) {
  for (const auto& sig : kb.signals_of(v)) {
    for (const auto& itom : buffer.of(sig)) {
      if (itom.time().contains(t_cur)) return true;
    }
  }
  return false;
}

void IngestQueue::accept(std::set<SignalId> signals) {
  std::lock_guard lock(mutex_);
  accepted_ = std::move(signals);
}

void IngestQueue::push(Itom itom) {
  std::lock_guard lock(mutex_);
  if (!accepted_.contains(itom.signal())) {
    throw Error("itom of unknown signal " + itom.signal().str());
  }
  pending_.push_back(std::move(itom));
}

std::vector<Itom> IngestQueue::drain() {
  std::lock_guard lock(mutex_);
  std::vector<Itom> out;
  out.swap(pending_);
  return out;
}

}  // namespace rmon

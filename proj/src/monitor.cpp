#include "rmon/monitor.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "rmon/errors.hpp"

namespace rmon {

void MonitorConfig::check() const {
  if (n_buf == 0) throw ConfigError("n_buf must be at least 1");
  if (!(period > 0.0)) throw ConfigError("monitor period must be positive");
  if (filter != OutputFilterKind::None && filter_window == 0) {
    throw ConfigError("filter window must be at least 1");
  }
  if (max_depth == 0) throw ConfigError("max_depth must be at least 1");
}

namespace {

void extend(const std::vector<const std::vector<Itom>*>& pools, std::size_t k,
            std::optional<Interval> common, Combination& current,
            std::vector<Combination>& out) {
  if (k == pools.size()) {
    out.push_back(current);
    return;
  }
  for (const auto& itom : *pools[k]) {
    auto next = common ? intersect(*common, itom.time()) : std::optional<Interval>(itom.time());
    if (!next) continue;
    current.push_back(&itom);
    extend(pools, k + 1, next, current, out);
    current.pop_back();
  }
}

}  // namespace

std::vector<std::vector<Combination>> collect_combinations(const std::vector<Pipeline>& pipelines,
                                                           const BufferSnapshot& snapshot) {
  std::vector<std::vector<Combination>> result;
  result.reserve(pipelines.size());
  for (const auto& p : pipelines) {
    std::vector<const std::vector<Itom>*> pools;
    for (const auto& sig : p.leaf_signals()) pools.push_back(&snapshot.of(sig));
    std::vector<Combination> combos;
    Combination current;
    extend(pools, 0, std::nullopt, current, combos);
    result.push_back(std::move(combos));
  }
  return result;
}

Execution execute_substitutions(const std::vector<Pipeline>& pipelines,
                                const std::vector<std::vector<Combination>>& combinations) {
  Execution ex;
  const std::size_t n = std::min(pipelines.size(), combinations.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& combo : combinations[i]) {
      try {
        ex.outputs.push_back({i, pipelines[i].run(combo)});
      } catch (const Error& e) {
        ex.diagnostics.push_back("s" + std::to_string(i) + ": " + e.what());
      }
    }
  }
  return ex;
}

MonitorVerdict compare_and_rank(std::vector<SubstitutionOutput> outputs,
                                std::size_t substitution_count, const RankOptions& options,
                                const CompareHook& hook) {
  MonitorVerdict v;
  v.errors.assign(substitution_count, 0.0);
  // pair[i][j]: aggregated gap between substitutions i and j, if compared
  std::vector<std::vector<std::optional<double>>> pair(
      substitution_count, std::vector<std::optional<double>>(substitution_count));
  std::vector<bool> compared(substitution_count, false);

  for (std::size_t a = 0; a < outputs.size(); ++a) {
    for (std::size_t b = a + 1; b < outputs.size(); ++b) {
      const auto& x = outputs[a];
      const auto& y = outputs[b];
      if (x.substitution == y.substitution) continue;
      if (x.substitution >= substitution_count || y.substitution >= substitution_count) {
        throw Error("output refers to an unknown substitution index");
      }
      if (!overlaps(x.itom.time(), y.itom.time())) continue;
      if (x.itom.value().size() != y.itom.value().size()) {
        v.diagnostics.push_back("s" + std::to_string(x.substitution) + " and s" +
                                std::to_string(y.substitution) +
                                " outputs differ in length; not compared");
        continue;
      }
      if (hook) hook(x, y);
      const double g = vec_gap(x.itom.value(), y.itom.value(), options.gap_mode);
      auto& cell = pair[x.substitution][y.substitution];
      if (!cell) {
        cell = g;
      } else if (options.aggregation == PairAggregation::Sum) {
        *cell += g;
      } else {
        *cell = std::min(*cell, g);
      }
      pair[y.substitution][x.substitution] = cell;
      compared[x.substitution] = true;
      compared[y.substitution] = true;
    }
  }

  for (std::size_t i = 0; i < substitution_count; ++i) {
    for (std::size_t j = 0; j < substitution_count; ++j) {
      if (pair[i][j]) v.errors[i] += *pair[i][j];
    }
  }
  v.comparable_count = static_cast<std::size_t>(std::count(compared.begin(), compared.end(), true));
  v.insufficient_redundancy = v.comparable_count < 2;
  if (!v.insufficient_redundancy) {
    auto it = std::max_element(v.errors.begin(), v.errors.end());
    if (*it > 0.0) v.failed = static_cast<std::size_t>(it - v.errors.begin());
  }
  v.reported = v.failed;
  v.outputs = std::move(outputs);
  return v;
}

OutputFilter::OutputFilter(OutputFilterKind kind, std::size_t window)
    : kind_(kind), window_(window) {
  if (kind_ != OutputFilterKind::None && window_ == 0) {
    throw ConfigError("filter window must be at least 1");
  }
}

std::optional<std::size_t> OutputFilter::push(std::optional<std::size_t> failed) {
  if (kind_ == OutputFilterKind::None) return failed;
  history_.push_back(failed ? static_cast<long>(*failed) : -1L);
  while (history_.size() > window_) history_.pop_front();

  long chosen = -1;
  if (kind_ == OutputFilterKind::Median) {
    std::vector<long> sorted(history_.begin(), history_.end());
    std::sort(sorted.begin(), sorted.end());
    chosen = sorted[(sorted.size() - 1) / 2];
  } else {
    std::map<long, std::size_t> counts;
    for (long x : history_) ++counts[x];
    std::size_t best = 0;
    // later ties win, so walk from the newest entry back
    for (auto it = history_.rbegin(); it != history_.rend(); ++it) {
      if (counts[*it] > best) {
        best = counts[*it];
        chosen = *it;
      }
    }
  }
  if (chosen < 0) return std::nullopt;
  return static_cast<std::size_t>(chosen);
}

Monitor::Monitor(KnowledgeBase kb, std::map<RelationId, RelationExpr> implementations,
                 VariableId variable, MonitorConfig config)
    : kb_(std::move(kb)),
      implementations_(std::move(implementations)),
      variable_(std::move(variable)),
      config_(config),
      buffer_(config.n_buf, config.period),
      filter_(config.filter, config.filter_window),
      inbox_(std::make_unique<IngestQueue>()) {
  config_.check();
  pipelines_ = instantiate(kb_, implementations_, variable_, config_.max_depth);
  register_signals();
}

std::vector<Pipeline> Monitor::instantiate(const KnowledgeBase& kb,
                                           const std::map<RelationId, RelationExpr>& impls,
                                           const VariableId& variable, std::size_t max_depth) {
  if (!kb.has_variable(variable)) {
    throw KnowledgeBaseError("unknown variable " + variable.str());
  }
  auto subs = search_substitutions(kb, variable, max_depth);
  if (subs.empty()) {
    throw NotMonitorableError("variable " + variable.str() + " has no valid substitution");
  }
  std::vector<Pipeline> out;
  out.reserve(subs.size());
  for (auto& s : subs) out.emplace_back(std::move(s), impls);
  return out;
}

void Monitor::register_signals() {
  std::set<SignalId> known;
  for (const auto& v : kb_.variables()) {
    for (const auto& sig : kb_.signals_of(v)) {
      buffer_.add_signal(sig);
      known.insert(sig);
    }
  }
  inbox_->accept(std::move(known));
}

void Monitor::adapt(KnowledgeBase kb) { adapt(std::move(kb), implementations_); }

void Monitor::adapt(KnowledgeBase kb, std::map<RelationId, RelationExpr> implementations) {
  auto fresh = instantiate(kb, implementations, variable_, config_.max_depth);
  kb_ = std::move(kb);
  implementations_ = std::move(implementations);
  pipelines_ = std::move(fresh);
  register_signals();
}

void Monitor::ingest(Itom itom) { inbox_->push(std::move(itom)); }

MonitorVerdict Monitor::step(double t_cur) {
  if (last_step_ && !(t_cur > *last_step_)) {
    std::ostringstream msg;
    msg << "step time " << t_cur << " does not advance past " << *last_step_;
    throw Error(msg.str());
  }
  last_step_ = t_cur;

  for (auto& itom : inbox_->drain()) {
    // signals unbound by adapt() may still sit in the queue
    if (buffer_.knows(itom.signal())) buffer_.ingest(std::move(itom));
  }
  const BufferSnapshot snap = buffer_.snapshot(t_cur);
  const auto combos = collect_combinations(pipelines_, snap);
  Execution ex = execute_substitutions(pipelines_, combos);
  MonitorVerdict v = compare_and_rank(std::move(ex.outputs), pipelines_.size(),
                                      {config_.aggregation, config_.gap_mode}, hook_);
  v.t_cur = t_cur;
  v.diagnostics.insert(v.diagnostics.begin(), ex.diagnostics.begin(), ex.diagnostics.end());
  v.reported = filter_.push(v.failed);
  buffer_.evict(t_cur);
  return v;
}

}  // namespace rmon

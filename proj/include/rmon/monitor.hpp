#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rmon/expr.hpp"
#include "rmon/interval.hpp"
#include "rmon/knowledge_base.hpp"
#include "rmon/observation.hpp"
#include "rmon/pipeline.hpp"

namespace rmon {

/// Post-processing of the failed index stream. Mode is what a "mean" setting
/// maps to: averaging categorical indices has no meaning, a majority vote does.
enum class OutputFilterKind { None, Median, Mode };

/// How several comparable output pairs of the same two substitutions combine.
enum class PairAggregation { Sum, Min };

struct MonitorConfig {
  std::size_t n_buf = 1;
  double period = 1.0;  // T_m (s)
  OutputFilterKind filter = OutputFilterKind::None;
  std::size_t filter_window = 3;
  PairAggregation aggregation = PairAggregation::Sum;
  GapMode gap_mode = GapMode::Separation;
  std::size_t max_depth = kDefaultMaxDepth;

  /// Throws ConfigError.
  void check() const;
};

struct SubstitutionOutput {
  std::size_t substitution;
  Itom itom;
};

/// One itom per leaf signal, aligned with Pipeline::leaf_signals().
using Combination = std::vector<const Itom*>;

struct MonitorVerdict {
  double t_cur = 0.0;
  std::vector<SubstitutionOutput> outputs;
  std::vector<double> errors;               // one entry per substitution
  std::optional<std::size_t> failed;        // argmax of errors, if any disagreement
  std::optional<std::size_t> reported;      // failed after the output filter
  std::size_t comparable_count = 0;
  bool insufficient_redundancy = false;     // comparable_count < 2
  std::vector<std::string> diagnostics;
};

/// Called once for every pair of outputs that is actually compared.
using CompareHook = std::function<void(const SubstitutionOutput&, const SubstitutionOutput&)>;

/// For each pipeline: every choice of one snapshot itom per leaf signal whose
/// time intervals share a common point.
std::vector<std::vector<Combination>> collect_combinations(const std::vector<Pipeline>& pipelines,
                                                           const BufferSnapshot& snapshot);

struct Execution {
  std::vector<SubstitutionOutput> outputs;
  std::vector<std::string> diagnostics;
};

/// Runs every combination. Evaluation failures are recorded as diagnostics
/// and the combination is skipped.
Execution execute_substitutions(const std::vector<Pipeline>& pipelines,
                                const std::vector<std::vector<Combination>>& combinations);

struct RankOptions {
  PairAggregation aggregation = PairAggregation::Sum;
  GapMode gap_mode = GapMode::Separation;
};

/// Compares outputs of different substitutions whose time intervals overlap
/// and sums the value gaps into a per-substitution error (row sums of a
/// symmetric matrix). Outputs with mismatched value lengths are skipped with
/// a diagnostic. `failed` is the lowest index with the largest error, set only
/// when that error is positive and at least two substitutions were compared.
MonitorVerdict compare_and_rank(std::vector<SubstitutionOutput> outputs,
                                std::size_t substitution_count, const RankOptions& options = {},
                                const CompareHook& hook = {});

/// Sliding median or majority vote over the last `window` failed indices,
/// with "none" encoded as -1.
class OutputFilter {
 public:
  OutputFilter(OutputFilterKind kind, std::size_t window);
  std::optional<std::size_t> push(std::optional<std::size_t> failed);

 private:
  OutputFilterKind kind_;
  std::size_t window_;
  std::deque<long> history_;
};

/// Plausibility check of one variable against its redundant substitutions.
///
/// ingest() may be called from any thread; setup, adapt and step belong to a
/// single stepping context.
class Monitor {
 public:
  /// Throws NotMonitorableError when the variable has no valid substitution,
  /// KnowledgeBaseError when it is undeclared, Error for missing implementations.
  Monitor(KnowledgeBase kb, std::map<RelationId, RelationExpr> implementations,
          VariableId variable, MonitorConfig config);

  /// Re-queries substitutions against a changed knowledge base. Buffered itoms
  /// are kept; the pipeline list is replaced only if the new setup succeeds.
  void adapt(KnowledgeBase kb);
  void adapt(KnowledgeBase kb, std::map<RelationId, RelationExpr> implementations);

  /// Throws Error for signals not bound in the knowledge base.
  void ingest(Itom itom);

  /// Throws Error unless t_cur is strictly greater than the previous step.
  MonitorVerdict step(double t_cur);

  void set_compare_hook(CompareHook hook) { hook_ = std::move(hook); }

  const VariableId& variable() const noexcept { return variable_; }
  const KnowledgeBase& knowledge_base() const noexcept { return kb_; }
  const MonitorConfig& config() const noexcept { return config_; }
  const std::vector<Pipeline>& pipelines() const noexcept { return pipelines_; }
  const ItomBuffer& buffer() const noexcept { return buffer_; }

 private:
  static std::vector<Pipeline> instantiate(const KnowledgeBase& kb,
                                           const std::map<RelationId, RelationExpr>& impls,
                                           const VariableId& variable, std::size_t max_depth);
  void register_signals();

  KnowledgeBase kb_;
  std::map<RelationId, RelationExpr> implementations_;
  VariableId variable_;
  MonitorConfig config_;
  std::vector<Pipeline> pipelines_;
  ItomBuffer buffer_;
  OutputFilter filter_;
  std::unique_ptr<IngestQueue> inbox_;
  CompareHook hook_;
  std::optional<double> last_step_;
};

}  // namespace rmon

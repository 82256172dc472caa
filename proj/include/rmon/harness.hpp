#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "rmon/kb_format.hpp"
#include "rmon/monitor.hpp"
#include "rmon/observation.hpp"

namespace rmon {

/// Seedable source for every random draw in the harness.
class Prng {
 public:
  static constexpr const char* kName = "mt19937_64";
  explicit Prng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [a, b), computed from the raw 64-bit output so the stream is
  /// identical across standard libraries.
  double uniform(double a, double b);

 private:
  std::mt19937_64 engine_;
};

// ---- traces ---------------------------------------------------------------

/// One raw observation as stored in a trace file.
struct TraceRecord {
  SignalId signal;
  double t_s = 0.0;
  double t_r = 0.0;
  std::vector<double> value;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

using Trace = std::vector<TraceRecord>;

std::string trace_line(const TraceRecord& r);
void write_trace(std::ostream& out, const Trace& trace);
/// Throws ParseError with the 1-based line number.
Trace read_trace(std::istream& in);
Trace load_trace(const std::filesystem::path& path);

/// Stable sort by t_r.
void sort_by_reception(Trace& trace);

struct ValueFunction {
  enum class Kind { Constant, Sinusoid };
  Kind kind = Kind::Constant;
  double constant = 0.0;
  double offset = 0.0;
  double amplitude = 0.0;
  double frequency = 0.0;  // Hz
  double phase = 0.0;      // rad

  double at(double t) const;
};

struct GeneratedSignal {
  SignalId signal;
  double period = 1.0;
  double phase = 0.0;    // first t_s
  double latency = 0.0;  // t_r - t_s before jitter
  double jitter = 0.0;   // extra latency drawn from U(0, jitter)
  std::size_t dims = 1;
  double gain = 1.0;     // multiplies the shared value function
  ValueFunction value;
};

struct GeneratorParams {
  double duration = 10.0;
  std::uint64_t seed = 0;
  std::vector<GeneratedSignal> signals;

  /// Throws ConfigError.
  void check() const;
};

/// Samples t_s = phase + k * period for t_s < duration, records in t_r order.
Trace generate_trace(const GeneratorParams& params);

// ---- faults ---------------------------------------------------------------

struct FaultSpec {
  enum class Kind { Noise, StuckAtZero, TimeShift, Drop };
  Kind kind = Kind::StuckAtZero;
  SignalId target;
  double t_start = 0.0;
  double t_end = 0.0;
  double a = 0.0;  // noise bounds
  double b = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> delta;  // time_shift/drop amount (s)

  /// Throws ConfigError.
  void check() const;
  bool covers(double t_s) const { return t_start <= t_s && t_s <= t_end; }
};

const char* to_string(FaultSpec::Kind kind);

/// Applies faults in order to records whose t_s lies in the fault window.
/// `drop_delta` is used for drop faults without an explicit delta. Throws
/// Error if a target signal never occurs in the trace.
Trace inject_faults(Trace trace, const std::vector<FaultSpec>& faults,
                    std::optional<double> drop_delta = std::nullopt);

// ---- scenarios ------------------------------------------------------------

struct ScenarioConfig {
  std::filesystem::path kb;
  VariableId variable;
  std::uint64_t seed = 0;
  MonitorConfig monitor;
  std::optional<double> start;  // first step time; defaults to T_m
  std::optional<double> end;    // last step time; defaults to the latest t_r
  std::vector<SignalSpec> signals;
  std::optional<std::filesystem::path> trace_file;
  std::optional<GeneratorParams> generator;
  std::vector<FaultSpec> faults;
  std::optional<std::filesystem::path> verdicts_out;
  std::optional<std::filesystem::path> summary_out;
};

/// Parses a YAML scenario. Relative paths resolve against `base_dir`.
/// Throws ParseError (with line and column) on malformed or invalid input.
ScenarioConfig parse_scenario(std::string_view yaml, const std::filesystem::path& base_dir);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Drop amount used when a drop fault has no delta: one period past retention.
double default_drop_delta(const MonitorConfig& config);

/// Generator output or trace file, with faults applied.
Trace scenario_trace(const ScenarioConfig& scenario);

// ---- replay ---------------------------------------------------------------

struct WindowStats {
  FaultSpec fault;
  std::vector<std::size_t> expected;  // substitutions reading the target
  std::size_t steps = 0;
  std::size_t correct = 0;
  std::size_t wrong = 0;
  std::size_t silent = 0;

  double detection_rate() const { return steps ? double(correct) / double(steps) : 0.0; }
  double misclassification_rate() const { return steps ? double(wrong) / double(steps) : 0.0; }
};

struct ReplaySummary {
  std::size_t steps = 0;
  std::vector<WindowStats> windows;
  std::size_t outside_steps = 0;
  std::size_t false_alarms = 0;

  double false_alarm_rate() const {
    return outside_steps ? double(false_alarms) / double(outside_steps) : 0.0;
  }
};

std::string summary_json(const ReplaySummary& summary);

struct ReplayResult {
  std::vector<MonitorVerdict> verdicts;
  ReplaySummary summary;
  std::string log;  // verdict JSONL including the header line
};

/// Feeds the trace to a fresh monitor in t_r order, stepping at
/// start + k * T_m, and scores the verdicts against the fault windows.
ReplayResult replay(const ScenarioConfig& scenario, const ParsedKb& kb, const Trace& trace);
/// Loads the KB and trace named by the scenario.
ReplayResult replay(const ScenarioConfig& scenario);

/// Step-level scoring. A step is inside a window when its whole buffer
/// horizon lies in it, and outside all windows when it is at least one
/// monitor period clear of every window edge.
ReplaySummary summarize(const std::vector<MonitorVerdict>& verdicts,
                        const std::vector<Pipeline>& pipelines,
                        const std::vector<FaultSpec>& faults, const MonitorConfig& config);

}  // namespace rmon

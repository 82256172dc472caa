#include "rmon/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <set>
#include <sstream>
#include <yaml-cpp/yaml.h>

#include "rmon/errors.hpp"
#include "rmon/verdict_log.hpp"

namespace rmon {

using nlohmann::json;

double Prng::uniform(double a, double b) {
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return a + (b - a) * u;
}

// ---- traces ---------------------------------------------------------------

std::string trace_line(const TraceRecord& r) {
  nlohmann::ordered_json j;
  j["signal"] = r.signal.str();
  j["t_s"] = r.t_s;
  j["t_r"] = r.t_r;
  j["value"] = r.value;
  return j.dump();
}

void write_trace(std::ostream& out, const Trace& trace) {
  for (const auto& r : trace) out << trace_line(r) << '\n';
}

Trace read_trace(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      TraceRecord r;
      r.signal = SignalId(j.at("signal").get<std::string>());
      r.t_s = j.at("t_s").get<double>();
      r.t_r = j.at("t_r").get<double>();
      r.value = j.at("value").get<std::vector<double>>();
      if (r.value.empty()) throw ParseError("empty value", lineno, 1);
      trace.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad trace record: ") + e.what(), lineno, 1);
    }
  }
  return trace;
}

Trace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace " + path.string());
  try {
    return read_trace(in);
  } catch (ParseError& e) {
    e.set_file(path.string());
    throw;
  }
}

void sort_by_reception(Trace& trace) {
  std::stable_sort(trace.begin(), trace.end(),
                   [](const TraceRecord& x, const TraceRecord& y) { return x.t_r < y.t_r; });
}

double ValueFunction::at(double t) const {
  if (kind == Kind::Constant) return constant;
  return offset + amplitude * std::sin(2.0 * std::numbers::pi * frequency * t + phase);
}

void GeneratorParams::check() const {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw ConfigError("generator duration must be positive");
  }
  if (signals.empty()) throw ConfigError("generator needs at least one signal");
  std::set<SignalId> seen;
  for (const auto& s : signals) {
    const std::string who = "generated signal " + s.signal.str() + ": ";
    if (s.signal.empty()) throw ConfigError("generated signal without a name");
    if (!seen.insert(s.signal).second) throw ConfigError(who + "listed twice");
    if (!(s.period > 0.0)) throw ConfigError(who + "period must be positive");
    if (!(s.latency >= 0.0) || !(s.jitter >= 0.0)) {
      throw ConfigError(who + "latency and jitter must be non-negative");
    }
    if (s.dims == 0) throw ConfigError(who + "dims must be at least 1");
  }
}

Trace generate_trace(const GeneratorParams& params) {
  params.check();
  Prng rng(params.seed);
  Trace trace;
  for (const auto& s : params.signals) {
    for (std::size_t k = 0;; ++k) {
      const double t_s = s.phase + static_cast<double>(k) * s.period;
      if (!(t_s < params.duration)) break;
      const double jitter = s.jitter > 0.0 ? rng.uniform(0.0, s.jitter) : 0.0;
      TraceRecord r;
      r.signal = s.signal;
      r.t_s = t_s;
      r.t_r = t_s + s.latency + jitter;
      r.value.assign(s.dims, s.gain * s.value.at(t_s));
      trace.push_back(std::move(r));
    }
  }
  sort_by_reception(trace);
  return trace;
}

// ---- faults ---------------------------------------------------------------

const char* to_string(FaultSpec::Kind kind) {
  switch (kind) {
    case FaultSpec::Kind::Noise: return "noise";
    case FaultSpec::Kind::StuckAtZero: return "stuck_at_zero";
    case FaultSpec::Kind::TimeShift: return "time_shift";
    case FaultSpec::Kind::Drop: return "drop";
  }
  return "?";
}

void FaultSpec::check() const {
  const std::string who = std::string(to_string(kind)) + " fault on " + target.str() + ": ";
  if (target.empty()) throw ConfigError(std::string(to_string(kind)) + " fault without target");
  if (!(t_start <= t_end)) throw ConfigError(who + "window start after end");
  if (kind == Kind::Noise && !(a < b)) throw ConfigError(who + "noise needs a < b");
  if (kind == Kind::TimeShift && !delta) throw ConfigError(who + "time_shift needs delta");
  if (delta && !std::isfinite(*delta)) throw ConfigError(who + "delta must be finite");
}

Trace inject_faults(Trace trace, const std::vector<FaultSpec>& faults,
                    std::optional<double> drop_delta) {
  for (const auto& f : faults) {
    f.check();
    const bool present = std::any_of(trace.begin(), trace.end(),
                                     [&](const TraceRecord& r) { return r.signal == f.target; });
    if (!present) throw Error("fault target " + f.target.str() + " does not occur in the trace");
    double shift = 0.0;
    if (f.kind == FaultSpec::Kind::TimeShift) shift = *f.delta;
    if (f.kind == FaultSpec::Kind::Drop) {
      if (f.delta) {
        shift = *f.delta;
      } else if (drop_delta) {
        shift = *drop_delta;
      } else {
        throw ConfigError("drop fault on " + f.target.str() + " needs delta");
      }
    }
    Prng rng(f.seed);
    for (auto& r : trace) {
      if (r.signal != f.target || !f.covers(r.t_s)) continue;
      switch (f.kind) {
        case FaultSpec::Kind::Noise:
          for (auto& x : r.value) x += rng.uniform(f.a, f.b);
          break;
        case FaultSpec::Kind::StuckAtZero:
          std::fill(r.value.begin(), r.value.end(), 0.0);
          break;
        case FaultSpec::Kind::TimeShift:
        case FaultSpec::Kind::Drop:
          r.t_r += shift;
          break;
      }
    }
  }
  sort_by_reception(trace);
  return trace;
}

// ---- scenarios ------------------------------------------------------------

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& msg) {
  const auto m = node.Mark();
  throw ParseError(msg, static_cast<std::size_t>(m.line + 1), static_cast<std::size_t>(m.column + 1));
}

void allow_keys(const YAML::Node& map, std::initializer_list<std::string_view> keys,
                const std::string& where) {
  if (!map.IsMap()) fail(map, where + " must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      fail(kv.first, "unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T get(const YAML::Node& node, const std::string& what) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, "invalid value for " + what);
  }
}

template <typename T>
T get_or(const YAML::Node& map, const std::string& key, T fallback) {
  const YAML::Node n = map[key];
  return n ? get<T>(n, key) : fallback;
}

YAML::Node require(const YAML::Node& map, const std::string& key, const std::string& where) {
  const YAML::Node n = map[key];
  if (!n) fail(map, "missing '" + key + "' in " + where);
  return n;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

Interval window_of(const YAML::Node& node) {
  if (!node.IsSequence() || node.size() != 2) fail(node, "window must be [start, end]");
  const double a = get<double>(node[0], "window start");
  const double b = get<double>(node[1], "window end");
  if (!(a <= b)) fail(node, "window start after end");
  return Interval(a, b);
}

ValueFunction value_of(const YAML::Node& node) {
  ValueFunction f;
  if (node.IsScalar()) {
    f.constant = get<double>(node, "value");
    return f;
  }
  allow_keys(node, {"kind", "constant", "offset", "amplitude", "frequency", "phase"}, "value");
  const auto kind = get_or<std::string>(node, "kind", "constant");
  if (kind == "constant") {
    f.kind = ValueFunction::Kind::Constant;
    f.constant = get<double>(require(node, "constant", "constant value"), "constant");
  } else if (kind == "sinusoid") {
    f.kind = ValueFunction::Kind::Sinusoid;
    f.offset = get_or(node, "offset", 0.0);
    f.amplitude = get_or(node, "amplitude", 1.0);
    f.frequency = get<double>(require(node, "frequency", "sinusoid"), "frequency");
    f.phase = get_or(node, "phase", 0.0);
  } else {
    fail(node["kind"], "unknown value kind '" + kind + "'");
  }
  return f;
}

OutputFilterKind filter_of(const YAML::Node& node) {
  const auto s = get<std::string>(node, "filter");
  if (s == "none") return OutputFilterKind::None;
  if (s == "median") return OutputFilterKind::Median;
  if (s == "mean" || s == "mode") return OutputFilterKind::Mode;
  fail(node, "filter must be none, median or mean");
}

template <typename Fn>
void guarded(const YAML::Node& node, Fn&& fn) {
  try {
    fn();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    fail(node, e.what());
  }
}

std::vector<double> numbers_of(const YAML::Node& node, const std::string& what) {
  if (node.IsSequence()) {
    std::vector<double> out;
    for (const auto& x : node) out.push_back(get<double>(x, what));
    if (out.empty()) fail(node, what + " is empty");
    return out;
  }
  return {get<double>(node, what)};
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, static_cast<std::size_t>(e.mark.line + 1),
                     static_cast<std::size_t>(e.mark.column + 1));
  }
  if (!root || root.IsNull()) throw ParseError("empty scenario", 1, 1);
  allow_keys(root,
             {"kb", "variable", "seed", "monitor", "signals", "trace", "generator", "faults",
              "output"},
             "scenario");

  ScenarioConfig sc;
  sc.kb = resolve(base_dir, get<std::string>(require(root, "kb", "scenario"), "kb"));
  sc.variable = VariableId(get<std::string>(require(root, "variable", "scenario"), "variable"));
  sc.seed = get_or<std::uint64_t>(root, "seed", 0);

  if (const auto m = root["monitor"]) {
    allow_keys(m,
               {"n_buf", "period", "filter", "filter_window", "pair_aggregation", "gap",
                "max_depth", "start", "end"},
               "monitor");
    sc.monitor.n_buf = get_or<std::size_t>(m, "n_buf", sc.monitor.n_buf);
    sc.monitor.period = get_or(m, "period", sc.monitor.period);
    if (m["filter"]) sc.monitor.filter = filter_of(m["filter"]);
    sc.monitor.filter_window = get_or<std::size_t>(m, "filter_window", sc.monitor.filter_window);
    if (const auto a = m["pair_aggregation"]) {
      const auto s = get<std::string>(a, "pair_aggregation");
      if (s == "sum") {
        sc.monitor.aggregation = PairAggregation::Sum;
      } else if (s == "min") {
        sc.monitor.aggregation = PairAggregation::Min;
      } else {
        fail(a, "pair_aggregation must be sum or min");
      }
    }
    if (const auto g = m["gap"]) {
      const auto s = get<std::string>(g, "gap");
      if (s == "separation") {
        sc.monitor.gap_mode = GapMode::Separation;
      } else if (s == "absolute") {
        sc.monitor.gap_mode = GapMode::AbsoluteLiteral;
      } else {
        fail(g, "gap must be separation or absolute");
      }
    }
    sc.monitor.max_depth = get_or<std::size_t>(m, "max_depth", sc.monitor.max_depth);
    if (m["start"]) sc.start = get<double>(m["start"], "start");
    if (m["end"]) sc.end = get<double>(m["end"], "end");
    guarded(m, [&] { sc.monitor.check(); });
  }

  if (const auto sigs = root["signals"]) {
    if (!sigs.IsSequence()) fail(sigs, "signals must be a list");
    std::set<SignalId> seen;
    for (const auto& s : sigs) {
      allow_keys(s, {"signal", "dims", "delta", "uncertainty", "relative", "period"}, "signal");
      SignalSpec spec;
      spec.signal = SignalId(get<std::string>(require(s, "signal", "signal"), "signal"));
      spec.dims = get_or<std::size_t>(s, "dims", 1);
      spec.delta = get_or(s, "delta", 0.0);
      if (s["uncertainty"]) spec.uncertainty.half_widths = numbers_of(s["uncertainty"], "uncertainty");
      if (get_or(s, "relative", false)) spec.uncertainty.mode = Uncertainty::Mode::Relative;
      spec.period = get_or(s, "period", 1.0);
      guarded(s, [&] { spec.check(); });
      if (!seen.insert(spec.signal).second) fail(s, "signal " + spec.signal.str() + " listed twice");
      sc.signals.push_back(std::move(spec));
    }
  }

  if (const auto t = root["trace"]) {
    allow_keys(t, {"file"}, "trace");
    sc.trace_file = resolve(base_dir, get<std::string>(require(t, "file", "trace"), "file"));
  }
  if (const auto g = root["generator"]) {
    allow_keys(g, {"duration", "seed", "value", "signals"}, "generator");
    GeneratorParams gp;
    gp.duration = get<double>(require(g, "duration", "generator"), "duration");
    gp.seed = get_or<std::uint64_t>(g, "seed", sc.seed);
    std::optional<ValueFunction> shared;
    if (g["value"]) shared = value_of(g["value"]);
    const auto list = require(g, "signals", "generator");
    if (!list.IsSequence()) fail(list, "generator signals must be a list");
    for (const auto& s : list) {
      allow_keys(s, {"signal", "period", "phase", "latency", "jitter", "dims", "gain", "value"},
                 "generated signal");
      GeneratedSignal gs;
      gs.signal = SignalId(get<std::string>(require(s, "signal", "generated signal"), "signal"));
      gs.period = get_or(s, "period", 1.0);
      gs.phase = get_or(s, "phase", 0.0);
      gs.latency = get_or(s, "latency", 0.0);
      gs.jitter = get_or(s, "jitter", 0.0);
      gs.dims = get_or<std::size_t>(s, "dims", 1);
      gs.gain = get_or(s, "gain", 1.0);
      if (s["value"]) {
        gs.value = value_of(s["value"]);
      } else if (shared) {
        gs.value = *shared;
      } else {
        fail(s, "generated signal " + gs.signal.str() + " has no value");
      }
      gp.signals.push_back(std::move(gs));
    }
    guarded(g, [&] { gp.check(); });
    sc.generator = std::move(gp);
  }
  if (sc.trace_file && sc.generator) fail(root, "scenario has both trace and generator");
  if (!sc.trace_file && !sc.generator) fail(root, "scenario needs a trace or a generator");

  if (const auto fs = root["faults"]) {
    if (!fs.IsSequence()) fail(fs, "faults must be a list");
    for (const auto& f : fs) {
      allow_keys(f, {"kind", "target", "window", "a", "b", "seed", "delta"}, "fault");
      FaultSpec spec;
      const auto kindnode = require(f, "kind", "fault");
      const auto kind = get<std::string>(kindnode, "kind");
      if (kind == "noise") {
        spec.kind = FaultSpec::Kind::Noise;
      } else if (kind == "stuck_at_zero") {
        spec.kind = FaultSpec::Kind::StuckAtZero;
      } else if (kind == "time_shift") {
        spec.kind = FaultSpec::Kind::TimeShift;
      } else if (kind == "drop") {
        spec.kind = FaultSpec::Kind::Drop;
      } else {
        fail(kindnode, "unknown fault kind '" + kind + "'");
      }
      spec.target = SignalId(get<std::string>(require(f, "target", "fault"), "target"));
      const Interval w = window_of(require(f, "window", "fault"));
      spec.t_start = w.lo();
      spec.t_end = w.hi();
      spec.a = get_or(f, "a", 0.0);
      spec.b = get_or(f, "b", 0.0);
      spec.seed = get_or<std::uint64_t>(f, "seed", sc.seed);
      if (f["delta"]) spec.delta = get<double>(f["delta"], "delta");
      guarded(f, [&] { spec.check(); });
      if (spec.kind == FaultSpec::Kind::Drop && spec.delta &&
          !(*spec.delta > sc.monitor.n_buf * sc.monitor.period)) {
        fail(f, "drop delta must exceed n_buf * period");
      }
      sc.faults.push_back(std::move(spec));
    }
  }

  if (const auto o = root["output"]) {
    allow_keys(o, {"verdicts", "summary"}, "output");
    if (o["verdicts"]) sc.verdicts_out = resolve(base_dir, get<std::string>(o["verdicts"], "verdicts"));
    if (o["summary"]) sc.summary_out = resolve(base_dir, get<std::string>(o["summary"], "summary"));
  }
  return sc;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str(), path.parent_path());
  } catch (ParseError& e) {
    e.set_file(path.string());
    throw;
  }
}

double default_drop_delta(const MonitorConfig& config) {
  return static_cast<double>(config.n_buf + 1) * config.period;
}

Trace scenario_trace(const ScenarioConfig& scenario) {
  Trace trace = scenario.generator ? generate_trace(*scenario.generator)
                                   : load_trace(*scenario.trace_file);
  return inject_faults(std::move(trace), scenario.faults, default_drop_delta(scenario.monitor));
}

// ---- replay ---------------------------------------------------------------

std::string summary_json(const ReplaySummary& s) {
  nlohmann::ordered_json windows = nlohmann::ordered_json::array();
  for (const auto& w : s.windows) {
    windows.push_back(nlohmann::ordered_json{{"kind", to_string(w.fault.kind)},
                       {"target", w.fault.target.str()},
                       {"window", {w.fault.t_start, w.fault.t_end}},
                       {"expected", w.expected},
                       {"steps", w.steps},
                       {"correct", w.correct},
                       {"wrong", w.wrong},
                       {"silent", w.silent},
                       {"detection_rate", w.detection_rate()},
                       {"misclassification_rate", w.misclassification_rate()}});
  }
  nlohmann::ordered_json j;
  j["steps"] = s.steps;
  j["windows"] = std::move(windows);
  j["outside_steps"] = s.outside_steps;
  j["false_alarms"] = s.false_alarms;
  j["false_alarm_rate"] = s.false_alarm_rate();
  return j.dump(2);
}

ReplaySummary summarize(const std::vector<MonitorVerdict>& verdicts,
                        const std::vector<Pipeline>& pipelines,
                        const std::vector<FaultSpec>& faults, const MonitorConfig& config) {
  const double horizon = static_cast<double>(config.n_buf) * config.period;
  ReplaySummary s;
  s.steps = verdicts.size();
  for (const auto& f : faults) {
    WindowStats w;
    w.fault = f;
    for (std::size_t i = 0; i < pipelines.size(); ++i) {
      const auto& leaves = pipelines[i].leaf_signals();
      if (std::find(leaves.begin(), leaves.end(), f.target) != leaves.end()) w.expected.push_back(i);
    }
    s.windows.push_back(std::move(w));
  }
  for (const auto& v : verdicts) {
    bool near_any = false;
    for (auto& w : s.windows) {
      const auto& f = w.fault;
      if (!(v.t_cur < f.t_start - config.period || v.t_cur - horizon > f.t_end + config.period)) {
        near_any = true;
      }
      if (f.t_start + horizon <= v.t_cur && v.t_cur <= f.t_end) {
        ++w.steps;
        if (!v.reported) {
          ++w.silent;
        } else if (std::find(w.expected.begin(), w.expected.end(), *v.reported) !=
                   w.expected.end()) {
          ++w.correct;
        } else {
          ++w.wrong;
        }
      }
    }
    if (!near_any) {
      ++s.outside_steps;
      if (v.reported) ++s.false_alarms;
    }
  }
  return s;
}

ReplayResult replay(const ScenarioConfig& scenario, const ParsedKb& parsed, const Trace& trace) {
  const auto& kb = parsed.kb;
  std::map<SignalId, const SignalSpec*> specs;
  for (const auto& spec : scenario.signals) {
    if (!kb.variable_of(spec.signal)) {
      throw ConfigError("signal " + spec.signal.str() + " is not bound in the knowledge base");
    }
    specs.emplace(spec.signal, &spec);
  }

  Monitor monitor(kb, parsed.implementations, scenario.variable, scenario.monitor);

  std::vector<const TraceRecord*> order;
  order.reserve(trace.size());
  for (const auto& r : trace) {
    if (!specs.contains(r.signal)) {
      throw ConfigError("trace signal " + r.signal.str() + " has no signal spec");
    }
    order.push_back(&r);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const TraceRecord* x, const TraceRecord* y) { return x->t_r < y->t_r; });

  const double period = scenario.monitor.period;
  const double start = scenario.start.value_or(period);
  double end = start;
  if (scenario.end) {
    end = *scenario.end;
  } else if (!order.empty()) {
    end = std::max(start, order.back()->t_r);
  }

  ReplayResult result;
  VerdictLogHeader header;
  header.seed = scenario.seed;
  header.prng = Prng::kName;
  header.variable = scenario.variable.str();
  for (const auto& p : monitor.pipelines()) header.substitutions.push_back(to_string(kb, p.substitution()));
  std::ostringstream log;
  VerdictWriter writer(log);
  writer.header(header);

  std::size_t next = 0;
  for (std::size_t k = 0;; ++k) {
    const double t_cur = start + static_cast<double>(k) * period;
    if (t_cur > end) break;
    while (next < order.size() && order[next]->t_r <= t_cur) {
      const auto& r = *order[next++];
      monitor.ingest(make_itom(*specs.at(r.signal), r.t_s, r.value, r.t_r));
    }
    auto v = monitor.step(t_cur);
    writer.write(v);
    result.verdicts.push_back(std::move(v));
  }
  result.log = log.str();
  result.summary = summarize(result.verdicts, monitor.pipelines(), scenario.faults, scenario.monitor);
  return result;
}

ReplayResult replay(const ScenarioConfig& scenario) {
  const ParsedKb parsed = load_kb(scenario.kb);
  return replay(scenario, parsed, scenario_trace(scenario));
}

}  // namespace rmon

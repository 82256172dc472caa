// rmon: substitution search, KB validation and offline fault-injection runs.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "rmon/errors.hpp"
#include "rmon/harness.hpp"
#include "rmon/kb_format.hpp"
#include "rmon/verdict_log.hpp"

namespace {

constexpr int kUsage = 1;
constexpr int kDataError = 2;

struct Common {
  std::string kb;
  std::string variable;
  std::optional<std::size_t> n_buf;
  std::optional<double> period;
  std::optional<std::string> filter;
  std::optional<std::uint64_t> seed;
  std::string out;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

rmon::OutputFilterKind filter_kind(const std::string& s) {
  if (s == "none") return rmon::OutputFilterKind::None;
  if (s == "median") return rmon::OutputFilterKind::Median;
  if (s == "mean" || s == "mode") return rmon::OutputFilterKind::Mode;
  throw UsageError("--filter must be none, median or mean");
}

// Writes to the named file, or stdout for "" and "-".
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rmon::Error("cannot write " + path);
  fn(out);
  if (!out) throw rmon::Error("write to " + path + " failed");
}

rmon::ScenarioConfig scenario_with_overrides(const std::string& path, const Common& c) {
  auto sc = rmon::load_scenario(path);
  if (!c.kb.empty()) sc.kb = c.kb;
  if (!c.variable.empty()) sc.variable = rmon::VariableId(c.variable);
  if (c.n_buf) sc.monitor.n_buf = *c.n_buf;
  if (c.period) sc.monitor.period = *c.period;
  if (c.filter) sc.monitor.filter = filter_kind(*c.filter);
  if (c.seed) {
    sc.seed = *c.seed;
    if (sc.generator) sc.generator->seed = *c.seed;
    for (auto& f : sc.faults) f.seed = *c.seed;
  }
  try {
    sc.monitor.check();
  } catch (const rmon::ConfigError& e) {
    throw UsageError(e.what());
  }
  return sc;
}

int cmd_search(const std::string& kb_path, const std::string& variable, std::size_t max_depth) {
  const auto parsed = rmon::load_kb(kb_path);
  for (const auto& w : parsed.warnings) {
    std::cerr << kb_path << ":" << w.pos.line << ":" << w.pos.column << ": warning: " << w.message
              << '\n';
  }
  const auto subs = rmon::search_substitutions(parsed.kb, rmon::VariableId(variable), max_depth);
  for (const auto& s : subs) std::cout << rmon::to_string(parsed.kb, s) << '\n';
  std::cerr << subs.size() << " substitution(s)\n";
  return 0;
}

int cmd_validate(const std::string& kb_path) {
  try {
    const auto parsed = rmon::load_kb(kb_path);
    for (const auto& w : parsed.warnings) {
      std::cerr << kb_path << ":" << w.pos.line << ":" << w.pos.column << ": warning: "
                << w.message << '\n';
    }
    std::cout << "ok: " << parsed.kb.variables().size() << " variables, "
              << parsed.kb.relations().size() << " relations, " << parsed.kb.signal_count()
              << " signals, " << parsed.implementations.size() << " implementations\n";
    return 0;
  } catch (const rmon::KbValidationError& e) {
    std::cerr << e.what() << '\n';
    for (const auto& v : e.violations()) {
      std::cout << rmon::to_string(v.kind) << ": " << v.message << '\n';
    }
    return kDataError;
  }
}

int cmd_generate(const std::string& scenario, const Common& c) {
  const auto sc = scenario_with_overrides(scenario, c);
  if (!sc.generator) throw UsageError("scenario has no generator section");
  const auto trace = rmon::generate_trace(*sc.generator);
  emit(c.out, [&](std::ostream& os) { rmon::write_trace(os, trace); });
  return 0;
}

int cmd_inject(const std::string& scenario, const std::string& trace_path, const Common& c) {
  const auto sc = scenario_with_overrides(scenario, c);
  rmon::Trace trace;
  if (!trace_path.empty()) {
    trace = rmon::load_trace(trace_path);
  } else if (sc.generator) {
    trace = rmon::generate_trace(*sc.generator);
  } else {
    trace = rmon::load_trace(*sc.trace_file);
  }
  const auto faulty = rmon::inject_faults(std::move(trace), sc.faults,
                                          rmon::default_drop_delta(sc.monitor));
  emit(c.out, [&](std::ostream& os) { rmon::write_trace(os, faulty); });
  return 0;
}

int cmd_replay(const std::string& scenario, const std::string& summary_path, const Common& c) {
  const auto sc = scenario_with_overrides(scenario, c);
  const auto result = rmon::replay(sc);
  std::string verdicts = c.out;
  if (verdicts.empty() && sc.verdicts_out) verdicts = sc.verdicts_out->string();
  if (!verdicts.empty()) {
    emit(verdicts, [&](std::ostream& os) { os << result.log; });
  }
  const std::string summary = rmon::summary_json(result.summary);
  std::string summary_out = summary_path;
  if (summary_out.empty() && sc.summary_out) summary_out = sc.summary_out->string();
  if (!summary_out.empty()) emit(summary_out, [&](std::ostream& os) { os << summary << '\n'; });
  // stdout carries the log only when it was asked for there
  if (verdicts != "-") std::cout << summary << '\n';
  return 0;
}

int cmd_report(const std::string& log_path, const Common& c) {
  std::ifstream in(log_path);
  if (!in) throw rmon::Error("cannot open " + log_path);
  rmon::VerdictLog log;
  try {
    log = rmon::read_verdict_log(in);
  } catch (rmon::ParseError& e) {
    e.set_file(log_path);
    throw;
  }
  emit(c.out, [&](std::ostream& os) { rmon::write_report_csv(os, log); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runtime plausibility monitor based on redundant substitutions"};
  app.require_subcommand(1);
  Common c;
  std::string positional_kb, positional_var, scenario, trace_path, log_path, summary_path;
  std::size_t max_depth = rmon::kDefaultMaxDepth;

  auto add_monitor_flags = [&](CLI::App* sub) {
    sub->add_option("--kb", c.kb, "Knowledge base file (overrides the scenario)");
    sub->add_option("--variable", c.variable, "Monitored variable (overrides the scenario)");
    sub->add_option("--n-buf", c.n_buf, "Buffer size in monitor periods");
    sub->add_option("--period", c.period, "Monitor period T_m in seconds");
    sub->add_option("--filter", c.filter, "Output filter: none, median or mean");
    sub->add_option("--seed", c.seed, "Seed for generator and noise faults");
    sub->add_option("--out", c.out, "Output file ('-' for stdout)");
  };

  auto* search = app.add_subcommand("search", "Print the substitutions of a variable");
  search->add_option("kb_file", positional_kb, "Knowledge base file");
  search->add_option("variable_name", positional_var, "Variable to search for");
  search->add_option("--kb", c.kb, "Knowledge base file");
  search->add_option("--variable", c.variable, "Variable to search for");
  search->add_option("--max-depth", max_depth, "Maximum relation depth")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "Parse and check a knowledge base");
  validate->add_option("kb_file", positional_kb, "Knowledge base file");
  validate->add_option("--kb", c.kb, "Knowledge base file");

  auto* generate = app.add_subcommand("generate", "Write the scenario's synthetic trace");
  generate->add_option("scenario", scenario, "Scenario file")->required();
  add_monitor_flags(generate);

  auto* inject = app.add_subcommand("inject", "Apply the scenario's faults to a trace");
  inject->add_option("scenario", scenario, "Scenario file")->required();
  inject->add_option("--trace", trace_path, "Input trace (default: the scenario's source)");
  add_monitor_flags(inject);

  auto* replay = app.add_subcommand("replay", "Run the monitor over a scenario");
  replay->add_option("scenario", scenario, "Scenario file")->required();
  replay->add_option("--summary", summary_path, "Summary JSON output file");
  add_monitor_flags(replay);

  auto* report = app.add_subcommand("report", "Convert a verdict log to CSV");
  report->add_option("log", log_path, "Verdict log")->required();
  report->add_option("--out", c.out, "CSV output file ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (search->parsed() || validate->parsed()) {
      const std::string kb = !c.kb.empty() ? c.kb : positional_kb;
      if (kb.empty()) throw UsageError("a knowledge base file is required");
      if (validate->parsed()) return cmd_validate(kb);
      const std::string var = !c.variable.empty() ? c.variable : positional_var;
      if (var.empty()) throw UsageError("a variable is required");
      return cmd_search(kb, var, max_depth);
    }
    if (generate->parsed()) return cmd_generate(scenario, c);
    if (inject->parsed()) return cmd_inject(scenario, trace_path, c);
    if (replay->parsed()) return cmd_replay(scenario, summary_path, c);
    if (report->parsed()) return cmd_report(log_path, c);
  } catch (const UsageError& e) {
    std::cerr << "rmon: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "rmon: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

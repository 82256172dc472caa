#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "rmon/errors.hpp"
#include "rmon/harness.hpp"
#include "rmon/verdict_log.hpp"

using namespace rmon;

namespace {

GeneratorParams three_constant(double duration = 10.0) {
  GeneratorParams p;
  p.duration = duration;
  p.seed = 5;
  for (auto [name, phase] : {std::pair{"/a", 0.0}, std::pair{"/b", 0.1}, std::pair{"/c", 0.2}}) {
    GeneratedSignal s;
    s.signal = SignalId(name);
    s.phase = phase;
    s.latency = 0.05;
    s.value.constant = 1.0;
    p.signals.push_back(s);
  }
  return p;
}

FaultSpec fault(FaultSpec::Kind kind, const char* target, double a, double b) {
  FaultSpec f;
  f.kind = kind;
  f.target = SignalId(target);
  f.t_start = a;
  f.t_end = b;
  return f;
}

std::string dump(const Trace& t) {
  std::ostringstream out;
  write_trace(out, t);
  return out.str();
}

const char* kMinimal = R"(kb: late_message.kb
variable: x
monitor: {n_buf: 1, period: 1}
signals:
  - {signal: /a, delta: 1, uncertainty: 0.1}
generator:
  duration: 3
  value: 1
  signals:
    - {signal: /a}
)";

}  // namespace

TEST(Prng, MatchesRawEngineOutput) {
  Prng p(7);
  std::mt19937_64 raw(7);
  for (int i = 0; i < 100; ++i) {
    const double expect = 2.0 + 3.0 * (double(raw() >> 11) / 9007199254740992.0);
    ASSERT_EQ(p.uniform(2.0, 5.0), expect);
  }
}

TEST(Generate, ConstantSignals) {
  const auto t = generate_trace(three_constant());
  ASSERT_EQ(t.size(), 30u);
  for (const auto& r : t) {
    EXPECT_EQ(r.value, std::vector<double>{1.0});
    EXPECT_NEAR(r.t_r - r.t_s, 0.05, 1e-12);
  }
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_LE(t[i - 1].t_r, t[i].t_r);
  EXPECT_EQ(dump(generate_trace(three_constant())), dump(t));
}

TEST(Generate, SinusoidDependsOnlyOnSendTimeAndGain) {
  auto p = three_constant(4.0);
  for (auto& s : p.signals) {
    s.value = {ValueFunction::Kind::Sinusoid, 0, 2, 1, 0.25, 0};
    s.phase = 0;
    s.jitter = 0.01;
    s.dims = 2;
  }
  p.signals[2].gain = 2;
  const auto t = generate_trace(p);
  std::map<double, std::map<std::string, double>> by_ts;
  for (const auto& r : t) {
    ASSERT_EQ(r.value.size(), 2u);
    by_ts[r.t_s][r.signal.str()] = r.value[0];
    EXPECT_GE(r.t_r - r.t_s, 0.05);
    EXPECT_LT(r.t_r - r.t_s, 0.06 + 1e-12);
  }
  for (const auto& [ts, vals] : by_ts) {
    EXPECT_EQ(vals.at("/a"), vals.at("/b"));
    EXPECT_EQ(vals.at("/c"), 2 * vals.at("/a"));
  }
  auto other = p;
  other.seed = 6;
  EXPECT_NE(dump(generate_trace(other)), dump(t));
  EXPECT_EQ(dump(generate_trace(p)), dump(t));
}

TEST(Generate, InvalidParams) {
  auto p = three_constant();
  p.signals[0].period = 0;
  EXPECT_THROW(generate_trace(p), ConfigError);
  p = three_constant();
  p.signals.push_back(p.signals[0]);
  EXPECT_THROW(generate_trace(p), ConfigError);
}

TEST(Trace, RoundTripAndErrors) {
  const auto t = generate_trace(three_constant());
  std::istringstream in(dump(t));
  EXPECT_EQ(read_trace(in), t);
  std::istringstream bad(trace_line(t[0]) + "\n{\"signal\":\"/a\"}\n");
  try {
    read_trace(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(load_trace("/nonexistent/trace.jsonl"), Error);
}

TEST(Inject, StuckAtZeroInsideWindowOnly) {
  const auto clean = generate_trace(three_constant());
  const auto t = inject_faults(clean, {fault(FaultSpec::Kind::StuckAtZero, "/c", 3, 6)});
  ASSERT_EQ(t.size(), clean.size());
  std::size_t zeroed = 0;
  for (const auto& r : t) {
    const bool hit = r.signal == SignalId("/c") && r.t_s >= 3 && r.t_s <= 6;
    EXPECT_EQ(r.value[0], hit ? 0.0 : 1.0);
    zeroed += hit;
  }
  EXPECT_EQ(zeroed, 3u);  // t_s = 3.2, 4.2, 5.2
}

TEST(Inject, NoiseIsBoundedAndReproducible) {
  auto p = three_constant();
  p.signals[0].dims = 3;
  const auto clean = generate_trace(p);
  auto f = fault(FaultSpec::Kind::Noise, "/a", 2, 8);
  f.a = -0.5;
  f.b = 0.5;
  f.seed = 11;
  const auto t = inject_faults(clean, {f});
  EXPECT_EQ(dump(inject_faults(clean, {f})), dump(t));
  Prng expect(11);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    ASSERT_EQ(t[i].signal, clean[i].signal);
    for (std::size_t d = 0; d < t[i].value.size(); ++d) {
      const double diff = t[i].value[d] - clean[i].value[d];
      if (f.covers(t[i].t_s) && t[i].signal == f.target) {
        EXPECT_EQ(t[i].value[d], clean[i].value[d] + expect.uniform(-0.5, 0.5));
        EXPECT_LE(std::abs(diff), 0.5);
        ++changed;
      } else {
        EXPECT_EQ(diff, 0.0);
      }
    }
  }
  EXPECT_EQ(changed, 7u * 3u);
}

TEST(Inject, TimeShiftAndDrop) {
  const auto clean = generate_trace(three_constant());
  auto shift = fault(FaultSpec::Kind::TimeShift, "/b", 0, 10);
  shift.delta = 0.0;
  EXPECT_EQ(inject_faults(clean, {shift}), clean);

  shift = fault(FaultSpec::Kind::TimeShift, "/b", 2.0, 2.5);
  shift.delta = 1.5;
  const auto t = inject_faults(clean, {shift});
  ASSERT_EQ(t.size(), clean.size());
  std::size_t moved = 0;
  for (const auto& r : t) {
    if (r.signal == SignalId("/b") && std::abs(r.t_s - 2.1) < 1e-9) {
      EXPECT_NEAR(r.t_r, 3.65, 1e-12);
      ++moved;
    } else {
      EXPECT_NEAR(r.t_r - r.t_s, 0.05, 1e-12);
    }
  }
  EXPECT_EQ(moved, 1u);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_LE(t[i - 1].t_r, t[i].t_r);

  const auto drop = fault(FaultSpec::Kind::Drop, "/a", 4, 4);
  MonitorConfig cfg;
  cfg.n_buf = 2;
  cfg.period = 0.5;
  EXPECT_EQ(default_drop_delta(cfg), 1.5);
  const auto dropped = inject_faults(clean, {drop}, default_drop_delta(cfg));
  for (const auto& r : dropped) {
    if (r.signal == SignalId("/a") && r.t_s == 4) EXPECT_NEAR(r.t_r, 5.55, 1e-12);
  }
  EXPECT_THROW(inject_faults(clean, {drop}), ConfigError);
}

TEST(Inject, Errors) {
  const auto clean = generate_trace(three_constant());
  EXPECT_THROW(inject_faults(clean, {fault(FaultSpec::Kind::StuckAtZero, "/zz", 0, 1)}), Error);
  EXPECT_THROW(inject_faults(clean, {fault(FaultSpec::Kind::StuckAtZero, "/a", 2, 1)}), ConfigError);
  EXPECT_THROW(inject_faults(clean, {fault(FaultSpec::Kind::Noise, "/a", 0, 1)}), ConfigError);
  EXPECT_THROW(inject_faults(clean, {fault(FaultSpec::Kind::TimeShift, "/a", 0, 1)}), ConfigError);
}

TEST(Scenario, ParsesValueFaults) {
  const auto sc = load_scenario(RMON_TEST_DATA "/value_faults.yaml");
  EXPECT_EQ(sc.kb, std::filesystem::path(RMON_TEST_DATA) / "value_faults.kb");
  EXPECT_EQ(sc.variable, VariableId("x"));
  EXPECT_EQ(sc.seed, 42u);
  EXPECT_EQ(sc.monitor.period, 0.25);
  EXPECT_EQ(sc.end, 15.0);
  ASSERT_EQ(sc.signals.size(), 3u);
  EXPECT_EQ(sc.signals[2].uncertainty.half_widths, std::vector<double>{0.1});
  ASSERT_TRUE(sc.generator);
  EXPECT_EQ(sc.generator->signals[2].gain, 2.0);
  EXPECT_EQ(sc.generator->signals[1].value.kind, ValueFunction::Kind::Sinusoid);
  ASSERT_EQ(sc.faults.size(), 2u);
  EXPECT_EQ(sc.faults[1].kind, FaultSpec::Kind::Noise);
  EXPECT_EQ(sc.faults[1].seed, 7u);
  EXPECT_EQ(sc.faults[0].t_end, 6.0);
}

TEST(Scenario, ErrorsCarryPositions) {
  auto expect_error_on = [](const std::string& text, std::size_t line) {
    try {
      parse_scenario(text, RMON_TEST_DATA);
      ADD_FAILURE() << "accepted:\n" << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << e.what();
    }
  };
  EXPECT_NO_THROW(parse_scenario(kMinimal, RMON_TEST_DATA));
  std::string s = kMinimal;
  expect_error_on(std::string(kMinimal) + "bogus: 1\n", 11);
  expect_error_on(s.replace(s.find("n_buf: 1"), 8, "n_buf: x"), 3);
  s = kMinimal;
  expect_error_on(s.replace(s.find("delta: 1"), 8, "delta: -1"), 5);
  s = kMinimal;
  expect_error_on(s.replace(s.find("kb: late_message.kb\n"), 20, ""), 1);
  expect_error_on(std::string(kMinimal) + "faults:\n  - {kind: melt, target: /a, window: [0, 1]}\n", 12);
  expect_error_on(std::string(kMinimal) + "faults:\n  - {kind: noise, target: /a, window: [0]}\n", 12);
  expect_error_on("kb: [unclosed\n", 2);  // reported where input ends
}

TEST(Replay, ValueFaultsAreAttributed) {
  const auto r = replay(load_scenario(RMON_TEST_DATA "/value_faults.yaml"));
  EXPECT_EQ(r.verdicts.size(), 60u);
  ASSERT_EQ(r.summary.windows.size(), 2u);
  EXPECT_EQ(r.summary.windows[0].expected, std::vector<std::size_t>{1});
  EXPECT_EQ(r.summary.windows[1].expected, std::vector<std::size_t>{0});
  for (const auto& w : r.summary.windows) {
    EXPECT_GT(w.steps, 0u);
    EXPECT_GE(w.detection_rate(), 0.9);
  }
  EXPECT_GT(r.summary.outside_steps, 20u);
  EXPECT_EQ(r.summary.false_alarms, 0u);
  EXPECT_EQ(r.log.substr(0, 10), "{\"header\":");
}

TEST(Replay, LateMessageNeedsLongerBuffer) {
  auto sc = load_scenario(RMON_TEST_DATA "/late_message.yaml");
  auto at = [](const ReplayResult& r, double t) -> const MonitorVerdict& {
    for (const auto& v : r.verdicts) {
      if (v.t_cur == t) return v;
    }
    throw std::runtime_error("no step");
  };
  const auto short_buf = replay(sc);
  EXPECT_NE(at(short_buf, 3).reported, std::optional<std::size_t>(2));
  EXPECT_NE(at(short_buf, 4).reported, std::optional<std::size_t>(2));
  sc.monitor.n_buf = 2;
  const auto long_buf = replay(sc);
  EXPECT_TRUE(at(long_buf, 3).reported == 2u || at(long_buf, 4).reported == 2u);
}

TEST(Replay, FaultFreeRunIsSilent) {
  const auto r = replay(load_scenario(RMON_TEST_DATA "/silent.yaml"));
  EXPECT_EQ(r.summary.outside_steps, r.summary.steps);
  EXPECT_EQ(r.summary.false_alarms, 0u);
  for (const auto& v : r.verdicts) {
    if (v.t_cur >= 1.0) EXPECT_GE(v.comparable_count, 2u);
  }
}

TEST(Replay, SpecsMustMatchTheKb) {
  auto sc = load_scenario(RMON_TEST_DATA "/late_message.yaml");
  sc.signals.push_back(sc.signals[0]);
  sc.signals.back().signal = SignalId("/unbound");
  EXPECT_THROW(replay(sc), ConfigError);
  sc = load_scenario(RMON_TEST_DATA "/late_message.yaml");
  sc.signals.pop_back();
  EXPECT_THROW(replay(sc), ConfigError);
}

TEST(Summary, WindowClassification) {
  MonitorConfig cfg;
  cfg.n_buf = 2;
  cfg.period = 1;
  std::vector<FaultSpec> faults{fault(FaultSpec::Kind::StuckAtZero, "/b", 10, 20)};
  const auto parsed = parse_kb("function(x, r, [y]).\nitomsOf(x, [\"/a\"]).\nitomsOf(y, [\"/b\"]).\n"
                               "implementation(r, \"x.v = y.v\").");
  std::vector<Pipeline> pipes;
  for (auto& s : search_substitutions(parsed.kb, VariableId("x"))) pipes.emplace_back(s, parsed.implementations);
  std::vector<MonitorVerdict> vs;
  for (int t = 1; t <= 30; ++t) {
    MonitorVerdict v;
    v.t_cur = t;
    if (t == 12) v.reported = 1;
    if (t == 13) v.reported = 0;
    if (t == 25) v.reported = 0;
    vs.push_back(v);
  }
  const auto s = summarize(vs, pipes, faults, cfg);
  ASSERT_EQ(s.windows.size(), 1u);
  EXPECT_EQ(s.windows[0].expected, std::vector<std::size_t>{1});
  EXPECT_EQ(s.windows[0].steps, 9u);  // 12..20
  EXPECT_EQ(s.windows[0].correct, 1u);
  EXPECT_EQ(s.windows[0].wrong, 1u);
  EXPECT_EQ(s.windows[0].silent, 7u);
  EXPECT_EQ(s.outside_steps, 8u + 7u);  // 1..8 and 24..30
  EXPECT_EQ(s.false_alarms, 1u);
  EXPECT_NE(summary_json(s).find("\"false_alarm_rate\""), std::string::npos);
}

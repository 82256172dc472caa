#include <gtest/gtest.h>

#include <random>

#include "point_eval.hpp"
#include "rmon/errors.hpp"
#include "rmon/expr.hpp"
#include "rmon/kb_format.hpp"

using namespace rmon;

namespace {

// Relation `out = r(a, b)` with the given body.
RelationExpr body(const std::string& text) {
  const auto parsed = parse_kb("function(out, r, [a, b]).\nimplementation(r, \"" + text + "\").");
  return parsed.implementations.at(RelationId("r"));
}

Itom itom(IntervalVector v, Interval t = {0, 1}) {
  return Itom(SignalId("/s"), std::move(v), t, t.hi(), t.hi());
}

std::map<VariableId, Itom> inputs(IntervalVector a, IntervalVector b = IntervalVector{{0, 0}},
                                  Interval ta = {0, 1}, Interval tb = {0, 1}) {
  std::map<VariableId, Itom> m;
  m.emplace(VariableId("a"), itom(std::move(a), ta));
  m.emplace(VariableId("b"), itom(std::move(b), tb));
  return m;
}

}  // namespace

TEST(Eval, MinOfRanges) {
  const auto out = eval_relation(body("out.v = min(a.v)"), inputs(IntervalVector{{1, 2}, {0.5, 1.5}, {3, 4}}));
  EXPECT_EQ(out, (IntervalVector{{0.5, 1.5}}));
}

TEST(Eval, DepthImageRow) {
  const auto parsed = load_kb(RMON_TEST_DATA "/rover.kb");
  const auto& r2 = parsed.implementations.at(RelationId("r2"));
  std::vector<double> frame(320 * 240);
  for (std::size_t i = 0; i < frame.size(); ++i) frame[i] = static_cast<double>(i);
  std::map<VariableId, Itom> in;
  in.emplace(VariableId("d_3d"), Itom(SignalId("/tof"), IntervalVector::points(frame), {0, 1}, 1, 1));
  const auto row = eval_relation(r2, in);
  ASSERT_EQ(row.size(), 320u);
  EXPECT_EQ(row[0], Interval::point(115 * 320));
  EXPECT_EQ(row[319], Interval::point(116 * 320 - 1));
}

TEST(Eval, Identity) {
  const IntervalVector a{{1, 2}, {3, 4}};
  EXPECT_EQ(eval_relation(body("out.v = a.v"), inputs(a)), a);
}

TEST(Eval, ScalarsBroadcastAndWrap) {
  const auto in = inputs(IntervalVector{{1, 2}, {3, 4}}, IntervalVector{{1, 1}, {2, 2}});
  EXPECT_EQ(eval_relation(body("out.v = a.v * 2 + 1"), in), (IntervalVector{{3, 5}, {7, 9}}));
  EXPECT_EQ(eval_relation(body("out.v = a.v - b.v"), in), (IntervalVector{{0, 1}, {1, 2}}));
  EXPECT_EQ(eval_relation(body("out.v = sum(a.v)"), in), (IntervalVector{{4, 6}}));
  EXPECT_EQ(eval_relation(body("out.v = len(a.v)"), in), (IntervalVector{{2, 2}}));
  EXPECT_EQ(eval_relation(body("out.v = max(a.v, b.v * 3)"), in), (IntervalVector{{3, 3}, {6, 6}}));
  EXPECT_EQ(eval_relation(body("out.v = -a.v[1]"), in), (IntervalVector{{-4, -3}}));
}

TEST(Eval, TimeAccessorAndLets) {
  const auto in = inputs(IntervalVector{{1, 2}}, IntervalVector{{0, 0}}, {10, 11});
  EXPECT_EQ(eval_relation(body("k = a.t - 10; out.v = k * 2"), in), (IntervalVector{{0, 2}}));
}

TEST(Eval, OutputTimeStatementIsIgnored) {
  const auto in = inputs(IntervalVector{{1, 2}});
  EXPECT_EQ(eval_relation(body("out.v = a.v\nout.t = b.t"), in), (IntervalVector{{1, 2}}));
}

TEST(Eval, Errors) {
  const auto in = inputs(IntervalVector{{1, 2}, {3, 4}}, IntervalVector{{-1, 1}, {0, 0}, {1, 1}});
  EXPECT_THROW(eval_relation(body("out.v = a.v / b.v[0]"), in), EvalError);
  EXPECT_THROW(eval_relation(body("out.v = a.v + b.v"), in), DimensionError);
  EXPECT_THROW(eval_relation(body("out.v = a.v[2]"), in), EvalError);
  EXPECT_THROW(eval_relation(body("out.v = a.v[0:3]"), in), EvalError);
  EXPECT_THROW(eval_relation(body("out.v = a.v[1:1]"), in), EvalError);
  EXPECT_THROW(eval_relation(body("out.v = a.v[0.5]"), in), EvalError);
  EXPECT_THROW(eval_relation(body("out.v = a.v[b.v[0]]"), in), EvalError);
  EXPECT_THROW(eval_relation(body("out.v = min(a.v)[0]"), in), EvalError);
  std::map<VariableId, Itom> only_a;
  only_a.emplace(VariableId("a"), itom(IntervalVector{{1, 1}}));
  EXPECT_THROW(eval_relation(body("out.v = a.v"), only_a), EvalError);
}

TEST(Eval, ErrorsCarryPosition) {
  const auto in = inputs(IntervalVector{{1, 2}}, IntervalVector{{-1, 1}});
  try {
    eval_relation(body("\nout.v = a.v / b.v"), in);  // positions count from the document start
    FAIL();
  } catch (const EvalError& e) {
    EXPECT_NE(std::string(e.what()).find("at 3:"), std::string::npos) << e.what();
  }
}

TEST(Eval, Deterministic) {
  const auto r = body("k = a.v * b.v; out.v = min(k) + max(k) / 3");
  const auto in = inputs(IntervalVector{{1, 2}, {-3, 4}}, IntervalVector{{0.1, 0.2}, {5, 6}});
  EXPECT_EQ(eval_relation(r, in), eval_relation(r, in));
}

TEST(EvalProperty, InclusionOverRandomBodies) {
  static const char* kBodies[] = {
      "out.v = a.v * b.v - a.v",
      "out.v = min(a.v) + max(b.v) * 2",
      "out.v = (a.v + 1) / (b.v * b.v + 1)",
      "k = a.v[0:2] * b.v[1:3]; out.v = sum(k) - min(k, 0.5)",
      "out.v = max(a.v, b.v) - min(a.v, b.v)",
      "out.v = -a.v[len(a.v) - 1] * a.t",
      "k = sum(a.v) / len(b.v); out.v = b.v * k + b.t",
      "out.v = a.v[1] * a.v[1] - a.v[2] / (2 + max(b.v) - min(b.v))",
  };
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(-5, 5);
  auto rand_vec = [&](std::size_t n) {
    std::vector<Interval> dims;
    for (std::size_t i = 0; i < n; ++i) {
      double x = coord(rng), y = coord(rng);
      if (x > y) std::swap(x, y);
      dims.emplace_back(x, y);
    }
    return IntervalVector(dims);
  };
  std::size_t checked = 0;
  for (const char* text : kBodies) {
    const auto rel = body(text);
    for (int trial = 0; trial < 200; ++trial) {
      const auto a = rand_vec(3), b = rand_vec(3);
      const Interval time(0, 1);
      IntervalVector result{{0, 0}};
      try {
        result = eval_relation(rel, inputs(a, b, time, time));
      } catch (const EvalError&) {
        continue;  // e.g. a divisor interval containing zero
      }
      for (int k = 0; k < 20; ++k) {
        std::map<VariableId, oracle::PointInput> pin;
        const double t = std::uniform_real_distribution<double>(0, 1)(rng);
        for (auto [name, vec] : {std::pair{"a", &a}, std::pair{"b", &b}}) {
          oracle::PointInput p;
          for (const auto& d : *vec) p.value.push_back(std::uniform_real_distribution<double>(d.lo(), d.hi())(rng));
          p.time = t;
          pin[VariableId(name)] = p;
        }
        const auto point = oracle::PointEval(rel, pin).run();
        ASSERT_TRUE(result.contains(point)) << text;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 10000u);
}

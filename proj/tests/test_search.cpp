#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <set>

#include "rmon/errors.hpp"
#include "rmon/kb_format.hpp"
#include "rmon/knowledge_base.hpp"
#include "search_oracle.hpp"

using namespace rmon;

namespace {

KnowledgeBase rover_kb() { return load_kb(RMON_TEST_DATA "/rover.kb").kb; }

std::set<std::string> terms(const KnowledgeBase& kb, const std::vector<Substitution>& subs) {
  std::set<std::string> out;
  for (const auto& s : subs) out.insert(to_term(kb, s.root));
  return out;
}

const std::set<std::string> kRoverDmin = {
    "\"/emergency_stop/dmin/data\"",
    "[function(dmin,r1,[d_2d]),\"/scan/ranges\"]",
    "[function(dmin,r1,[d_2d]),\"/p2os/sonar/ranges\"]",
    "[function(dmin,r1,[d_2d]),[function(d_2d,r2,[d_3d]),\"/tof_camera/frame/depth\"]]",
};

}  // namespace

TEST(Search, RoverDmin) {
  const auto kb = rover_kb();
  const auto subs = search_substitutions(kb, VariableId("dmin"));
  ASSERT_EQ(subs.size(), 4u);
  EXPECT_EQ(terms(kb, subs), kRoverDmin);
  for (const auto& s : subs) EXPECT_TRUE(is_valid_substitution(kb, s));
}

TEST(Search, DeclarationOrder) {
  const auto kb = rover_kb();
  const auto subs = search_substitutions(kb, VariableId("dmin"));
  ASSERT_EQ(subs.size(), 4u);
  EXPECT_TRUE(subs[0].is_direct());
  EXPECT_EQ(subs[1].leaf_signals().front(), SignalId("/p2os/sonar/ranges"));
  EXPECT_EQ(subs[2].leaf_signals().front(), SignalId("/scan/ranges"));
  EXPECT_EQ(subs[3].depth(), 2u);
  // stable across calls
  EXPECT_EQ(subs, search_substitutions(kb, VariableId("dmin")));
}

TEST(Search, UnprovidedIsolatedVariable) {
  KnowledgeBase kb;
  kb.declare_variable(VariableId("lonely"));
  EXPECT_TRUE(search_substitutions(kb, VariableId("lonely")).empty());
}

TEST(Search, Errors) {
  const auto kb = rover_kb();
  EXPECT_THROW(search_substitutions(kb, VariableId("ghost")), KnowledgeBaseError);
  EXPECT_THROW(search_substitutions(kb, VariableId("dmin"), 0), KnowledgeBaseError);
}

TEST(Search, DepthLimit) {
  const auto kb = rover_kb();
  EXPECT_EQ(search_substitutions(kb, VariableId("dmin"), 1).size(), 3u);
  EXPECT_EQ(search_substitutions(kb, VariableId("dmin"), 2).size(), 4u);
}

TEST(Search, BindingNewSignalAddsSubstitution) {
  auto kb = rover_kb();
  kb.unbind(VariableId("speed"), SignalId("/p2os/odom"));
  EXPECT_EQ(search_substitutions(kb, VariableId("speed")).size(), 1u);
  kb.bind(VariableId("speed"), SignalId("/p2os/odom"));
  const auto subs = search_substitutions(kb, VariableId("speed"));
  ASSERT_EQ(subs.size(), 2u);
  EXPECT_EQ(subs[1].leaf_signals().front(), SignalId("/p2os/odom"));
}

TEST(Search, UnbindingSoleSourceRemovesChain) {
  const auto kb =
      rover_kb().without_binding(VariableId("d_3d"), SignalId("/tof_camera/frame/depth"));
  const auto subs = search_substitutions(kb, VariableId("dmin"));
  EXPECT_EQ(subs.size(), 3u);
  for (const auto& s : subs) EXPECT_LE(s.depth(), 1u);
}

TEST(Search, SharedVariableResolvesOnce) {
  // x = r(a, b); a = ra(c); b = rb(c); c has two signals
  KnowledgeBase kb;
  for (const char* v : {"x", "a", "b", "c"}) kb.declare_variable(VariableId(v));
  kb.add_relation({RelationId("r"), VariableId("x"), {VariableId("a"), VariableId("b")}});
  kb.add_relation({RelationId("ra"), VariableId("a"), {VariableId("c")}});
  kb.add_relation({RelationId("rb"), VariableId("b"), {VariableId("c")}});
  kb.bind(VariableId("c"), SignalId("/c1"));
  kb.bind(VariableId("c"), SignalId("/c2"));
  const auto subs = search_substitutions(kb, VariableId("x"));
  ASSERT_EQ(subs.size(), 2u);
  for (const auto& s : subs) EXPECT_EQ(s.leaf_signals().size(), 1u);
}

TEST(Search, ChainGrowsAsBranchingToTheDepth) {
  for (std::size_t b = 1; b <= 3; ++b) {
    for (std::size_t d = 1; d <= 4; ++d) {
      KnowledgeBase kb;
      for (std::size_t i = 0; i <= d; ++i) kb.declare_variable(VariableId("v" + std::to_string(i)));
      std::size_t rid = 0;
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < b; ++k) {
          kb.add_relation({RelationId("r" + std::to_string(rid++)), VariableId("v" + std::to_string(i)),
                           {VariableId("v" + std::to_string(i + 1))}});
        }
      }
      kb.bind(VariableId("v" + std::to_string(d)), SignalId("/leaf"));
      std::size_t expected = 1;
      for (std::size_t i = 0; i < d; ++i) expected *= b;
      EXPECT_EQ(search_substitutions(kb, VariableId("v0")).size(), expected) << "b=" << b << " d=" << d;
    }
  }
}

TEST(SearchProperty, MatchesBruteForce) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const auto kb = oracle::random_kb(rng);
    ASSERT_TRUE(kb.validate().empty());
    const std::size_t depth = 1 + rng() % 5;
    for (const auto& v : kb.variables()) {
      const auto subs = search_substitutions(kb, v, depth);
      const auto got = terms(kb, subs);
      ASSERT_EQ(got.size(), subs.size()) << "duplicates for " << v;
      ASSERT_EQ(got, oracle::enumerate(kb, v, depth)) << "trial " << trial << " var " << v;
      for (const auto& s : subs) ASSERT_TRUE(is_valid_substitution(kb, s));
    }
  }
}

TEST(SearchProperty, BindingMonotonicity) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const auto kb = oracle::random_kb(rng);
    const auto& vars = kb.variables();
    const VariableId target = vars[rng() % vars.size()];
    const auto more = kb.with_binding(target, SignalId("/extra"));
    for (const auto& v : vars) {
      const auto base = terms(kb, search_substitutions(kb, v));
      const auto grown = terms(more, search_substitutions(more, v));
      ASSERT_TRUE(std::includes(grown.begin(), grown.end(), base.begin(), base.end()));
    }
  }
}

TEST(SearchProperty, ValidityCheckerRejectsMutations) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto kb = oracle::random_kb(rng);
    for (const auto& v : kb.variables()) {
      for (auto s : search_substitutions(kb, v)) {
        auto* leaf = &s.root;
        while (!leaf->is_leaf()) leaf = &leaf->inputs.front();
        leaf->signal = SignalId("/unbound");
        ASSERT_FALSE(is_valid_substitution(kb, s));
      }
    }
  }
}

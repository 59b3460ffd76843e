#include <gtest/gtest.h>

#include <optional>
#include <vector>

#include "ctm/automata.hpp"

namespace ctm {
namespace {

using Kind = TransitionOutcome::Kind;

AutomatonConfig make(TaState n, std::optional<TaState> b_ex = {}, std::optional<TaState> b_in = {}) {
  AutomatonConfig c;
  c.states_per_action = n;
  c.exclude_barrier = b_ex;
  c.include_barrier = b_in;
  return c;
}

// Brute-force transition table for a 2N-state chain. Built node by node from
// the chain picture (neighbour edges, clamped ends, barrier nodes that
// swallow the walker) rather than from the case analysis in automata.hpp.
struct TableEntry {
  TaState next;
  bool absorbed;
  bool crossed;
};

std::vector<TableEntry> brute_table(TaState n, std::optional<TaState> barrier, bool upward) {
  const TaState total = 2 * n;
  std::vector<TableEntry> table(total);
  for (TaState s = 0; s < total; ++s) {
    TaState target = upward ? s + 1 : s - 1;
    if (target < 0) target = 0;
    if (target > total - 1) target = total - 1;
    const bool absorbed = barrier.has_value() && target == *barrier && target != s;
    const bool crossed = (s < n) != (target < n);
    table[s] = {target, absorbed, crossed};
  }
  return table;
}

Kind expected_kind(const TableEntry& e, bool upward) {
  if (e.absorbed) return upward ? Kind::AbsorbedInclude : Kind::AbsorbedExclude;
  if (e.crossed) return upward ? Kind::SwitchedToInclude : Kind::SwitchedToExclude;
  return Kind::Stayed;
}

TEST(AutomatonConfigTest, DefaultIsEightBit) {
  AutomatonConfig c;
  EXPECT_EQ(c.states_per_action, 128);
  EXPECT_EQ(c.total_states(), 256);
  EXPECT_FALSE(c.absorbing());
  EXPECT_NO_THROW(c.validate());
}

TEST(AutomatonConfigTest, BarrierBounds) {
  EXPECT_NO_THROW(make(128, 0).validate());
  EXPECT_NO_THROW(make(128, 126).validate());
  EXPECT_THROW(make(128, 127).validate(), std::invalid_argument);
  EXPECT_THROW(make(128, -1).validate(), std::invalid_argument);
  EXPECT_NO_THROW(make(128, {}, 129).validate());
  EXPECT_NO_THROW(make(128, {}, 255).validate());
  EXPECT_THROW(make(128, {}, 128).validate(), std::invalid_argument);
  EXPECT_THROW(make(128, {}, 256).validate(), std::invalid_argument);
  EXPECT_THROW(make(0).validate(), std::invalid_argument);
  // N = 1 has no room for an exclude barrier.
  EXPECT_THROW(make(1, 0).validate(), std::invalid_argument);
}

TEST(AutomatonTest, InitialState) {
  EXPECT_EQ(initial_state(make(128)), 127);
  EXPECT_EQ(initial_state(make(4)), 3);
  EXPECT_EQ(initial_state(make(1)), 0);
}

TEST(AutomatonTest, IncreaseExamples) {
  EXPECT_EQ(increase(127, make(128)), (TransitionOutcome{Kind::SwitchedToInclude, 128}));
  EXPECT_EQ(increase(255, make(128)), (TransitionOutcome{Kind::Stayed, 255}));
  EXPECT_EQ(increase(254, make(128, {}, 255)).kind, Kind::AbsorbedInclude);
}

TEST(AutomatonTest, DecreaseExamples) {
  EXPECT_EQ(decrease(2, make(128, 1)).kind, Kind::AbsorbedExclude);
  EXPECT_EQ(decrease(128, make(128)), (TransitionOutcome{Kind::SwitchedToExclude, 127}));
  EXPECT_EQ(decrease(0, make(128)), (TransitionOutcome{Kind::Stayed, 0}));
  EXPECT_EQ(decrease(40, make(128, 1)), (TransitionOutcome{Kind::Stayed, 39}));
}

TEST(AutomatonTest, MatchesBruteForceTableForAllBarriers) {
  const TaState n = 128;
  // Every live state against every legal barrier, both directions.
  for (int b = -1; b <= n - 2; ++b) {
    const std::optional<TaState> b_ex = b < 0 ? std::nullopt : std::optional<TaState>(b);
    const auto cfg = make(n, b_ex);
    const auto table = brute_table(n, b_ex, false);
    for (TaState s = b_ex ? *b_ex + 1 : 0; s < 2 * n; ++s) {
      const auto got = decrease(s, cfg);
      ASSERT_EQ(got.kind, expected_kind(table[s], false)) << "state " << s << " barrier " << b;
      ASSERT_EQ(got.state, table[s].next) << "state " << s << " barrier " << b;
    }
  }
  for (int b = n; b <= 2 * n - 1; ++b) {
    const std::optional<TaState> b_in = b == n ? std::nullopt : std::optional<TaState>(b);
    const auto cfg = make(n, {}, b_in);
    const auto table = brute_table(n, b_in, true);
    for (TaState s = 0; s < (b_in ? *b_in : 2 * n); ++s) {
      const auto got = increase(s, cfg);
      ASSERT_EQ(got.kind, expected_kind(table[s], true)) << "state " << s << " barrier " << b;
      ASSERT_EQ(got.state, table[s].next) << "state " << s << " barrier " << b;
    }
  }
}

TEST(AutomatonTest, ExcludeBarrierReachedAfterExpectedSteps) {
  for (TaState n : {2, 4, 128}) {
    for (TaState b = 0; b <= n - 2; ++b) {
      const auto cfg = make(n, b);
      TaState s = initial_state(cfg);
      int steps = 0;
      for (;;) {
        const auto out = decrease(s, cfg);
        ++steps;
        if (out.kind == Kind::AbsorbedExclude) break;
        ASSERT_EQ(out.kind, Kind::Stayed);
        s = out.state;
        ASSERT_LT(steps, 2 * n);
      }
      EXPECT_EQ(steps, n - 1 - b) << "n " << n << " barrier " << b;
    }
  }
}

TEST(AutomatonTest, IncludeBarrierReachedAfterExpectedSteps) {
  for (TaState n : {2, 4, 128}) {
    for (TaState b = n + 1; b <= 2 * n - 1; ++b) {
      const auto cfg = make(n, {}, b);
      TaState s = n;
      int steps = 0;
      for (;;) {
        const auto out = increase(s, cfg);
        ++steps;
        if (out.kind == Kind::AbsorbedInclude) break;
        s = out.state;
        ASSERT_LT(steps, 2 * n);
      }
      EXPECT_EQ(steps, b - n);
    }
  }
}

TEST(AutomatonTest, ActionFlipsOnlyAtCentre) {
  const auto cfg = make(128);
  for (TaState s = 0; s + 1 < 256; ++s) {
    const bool flips = action(s, cfg) != action(s + 1, cfg);
    EXPECT_EQ(flips, s == 127) << s;
  }
  EXPECT_EQ(action(0, cfg), Action::Exclude);
  EXPECT_EQ(action(255, cfg), Action::Include);
}

TEST(AutomatonTest, RandomWalksStayInBounds) {
  const auto cfg = make(16);
  std::uint64_t x = 0x1234567;
  TaState s = initial_state(cfg);
  for (int i = 0; i < 100000; ++i) {
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    s = ((x & 1) ? increase(s, cfg) : decrease(s, cfg)).state;
    ASSERT_GE(s, 0);
    ASSERT_LE(s, 31);
  }
}

}  // namespace
}  // namespace ctm

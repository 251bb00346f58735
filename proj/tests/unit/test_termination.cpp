#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "grouprec/termination.hpp"
#include "support/builders.hpp"
#include "support/oracle.hpp"

using namespace grouprec;

namespace {

constexpr Millis kTick = 30'000;

TerminationMonitor monitor() { return TerminationMonitor(TerminationConfig{}); }

}  // namespace

TEST(Entropy, UniformMatrix) {
  PairMatrix m(build::members({"a", "b", "c", "d"}), 0.4);
  EXPECT_NEAR(matrix_entropy(m), std::log(12.0), 1e-15);
}

TEST(Entropy, SingleNonZeroEntry) {
  PairMatrix m(build::members({"a", "b", "c"}));
  m(0, 1) = 0.9;
  EXPECT_NEAR(matrix_entropy(m), 0.0, 1e-15);
}

TEST(Entropy, RandomFixture) {
  const auto f = oracle::load_fixture("derived_values.json")["entropy_random5"];
  const auto m = oracle::matrix_from(f["matrix"].get<std::vector<std::vector<double>>>());
  EXPECT_NEAR(matrix_entropy(m), f["entropy"].get<double>(), 1e-12);
}

TEST(Entropy, NeedsTwoMembers) {
  EXPECT_THROW(matrix_entropy(PairMatrix(build::members({"a"}))), Error);
}

TEST(EntropyProperty, BoundedAndShiftInvariantForNegatives) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 4;
    std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) rows[i][j] = u(rng);
    const double h = matrix_entropy(oracle::matrix_from(rows));
    EXPECT_GE(h, -1e-12);
    EXPECT_LE(h, std::log(static_cast<double>(n * (n - 1))) + 1e-12);
  }
}

TEST(Termination, NothingBeforeArm) {
  auto t = monitor();
  for (Millis s = 0; s < 600'000; s += kTick) {
    t.record_entropies(1.0, 2.0, s);
    EXPECT_FALSE(t.should_terminate(s).stop());
  }
  EXPECT_EQ(t.counters(), (std::array<int, 3>{0, 0, 0}));
}

TEST(Termination, FrozenEntropiesFireCriterionTwoWithinC) {
  auto t = monitor();
  Millis s = 0;
  for (; s < 600'000; s += kTick) t.record_entropies(2.0, 1.0, s);
  int fired_after = 0;
  for (int k = 1; k <= 3; ++k, s += kTick) {
    t.record_entropies(2.0, 1.0, s);
    if (t.should_terminate(s).stop()) {
      fired_after = k;
      break;
    }
  }
  EXPECT_EQ(fired_after, 3);
  const auto d = t.should_terminate(s);
  EXPECT_EQ(d.kind, StopKind::criteria);
  EXPECT_EQ(d.reason(), "criterion2+criterion3");
}

TEST(Termination, CriterionOneAlone) {
  auto t = monitor();
  Millis s = 0;
  double h = 0.0;
  for (; s < 600'000; s += kTick, h += 1.0) t.record_entropies(h, h + 5.0, s);
  for (int k = 0; k < 3; ++k, s += kTick, h += 1.0) t.record_entropies(h, h + 5.0, s);
  const auto d = t.should_terminate(s - kTick);
  EXPECT_EQ(d.reason(), "criterion1");
}

TEST(Termination, HardStopIsExact) {
  auto t = monitor();
  EXPECT_FALSE(t.should_terminate(1'199'999).stop());
  EXPECT_EQ(t.should_terminate(1'200'000).kind, StopKind::hard);
  EXPECT_EQ(t.should_terminate(1'200'000).reason(), "hard_stop");
}

TEST(Termination, CounterResetsWhenCriterionBreaks) {
  auto t = monitor();
  Millis s = 0;
  for (; s < 600'000; s += kTick) t.record_entropies(2.0, 1.0, s);
  t.record_entropies(2.0, 1.0, s);
  s += kTick;
  t.record_entropies(2.0, 1.0, s);
  EXPECT_EQ(t.counters()[1], 2);
  s += kTick;
  t.record_entropies(2.5, 1.0, s);
  EXPECT_EQ(t.counters()[1], 0);
  // The jump is not yet part of the preceding window.
  EXPECT_EQ(t.counters()[2], 3);
  s += kTick;
  t.record_entropies(2.5, 1.0, s);
  EXPECT_EQ(t.counters()[1], 1);
  EXPECT_EQ(t.counters()[2], 0);
}

TEST(Termination, CriterionThreeUsesPrecedingWindow) {
  TerminationConfig c;
  c.arm_ms = 0;
  c.consecutive = 1;
  TerminationMonitor t(c);
  // Quiet changes, then a jump on the current tick: the window before the
  // current tick is still quiet.
  const double hs[] = {1.0, 1.001, 1.002, 1.003, 1.8};
  for (int i = 0; i < 5; ++i) t.record_entropies(hs[i], 0.5, i * kTick);
  const auto d = t.should_terminate(4 * kTick);
  EXPECT_EQ(d.reason(), "criterion3");
}

TEST(Termination, RejectsEarlyTick) {
  auto t = monitor();
  t.record_entropies(1.0, 1.0, 0);
  EXPECT_THROW(t.record_entropies(1.0, 1.0, 10'000), Error);
}

TEST(Termination, ConfigValidation) {
  TerminationConfig c;
  c.arm_ms = c.hard_stop_ms;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.epsilon = 0.0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(TerminationProperty, NoStopBeforeArmAlwaysStopAtHard) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto t = monitor();
    for (Millis s = 0; s <= 1'200'000; s += kTick) {
      t.record_entropies(u(rng), u(rng), s);
      if (s < 600'000) {
        EXPECT_FALSE(t.should_terminate(s).stop());
      }
    }
    EXPECT_TRUE(t.should_terminate(1'200'000).stop());
  }
}

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "grouprec/leaderrank.hpp"
#include "support/builders.hpp"
#include "support/oracle.hpp"

using namespace grouprec;
using build::M;

namespace {

std::vector<std::vector<double>> rows_of(const nlohmann::json& j) { return j.get<std::vector<std::vector<double>>>(); }

CompositeMatrix composite_of(const std::vector<std::vector<double>>& rows) {
  return {oracle::matrix_from(rows), 0.5, 0.5};
}

std::vector<std::vector<double>> random_rows(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) m[i][j] = u(rng);
  return m;
}

}  // namespace

TEST(Composite, UniformHalfIsFixedPoint) {
  const auto ids = build::members({"a", "b", "c"});
  PairMatrix s(ids, 0.5), t(ids, 0.5);
  for (std::size_t i = 0; i < 3; ++i) s(i, i) = t(i, i) = 0.0;
  const auto c = composite_matrix(s, t);
  EXPECT_EQ(c.matrix, s);
}

TEST(Composite, DegenerateWeightsReturnSimilarity) {
  std::mt19937_64 rng(1);
  const auto s = oracle::matrix_from(random_rows(rng, 4));
  const auto t = oracle::matrix_from(random_rows(rng, 4));
  EXPECT_EQ(composite_matrix(s, t, 1.0, 0.0).matrix, s);
}

TEST(Composite, RandomFixtureMatchesOracle) {
  const auto d = oracle::load_fixture("derived_values.json")["composite_random4"];
  const auto c = composite_matrix(oracle::matrix_from(rows_of(d["similarity"])),
                                  oracle::matrix_from(rows_of(d["trust"])));
  const auto expected = rows_of(d["composite"]);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(c.matrix(i, j), expected[i][j], 1e-15);
}

TEST(Composite, DimensionMismatch) {
  PairMatrix a(build::members({"a", "b"})), b(build::members({"a", "c"}));
  try {
    composite_matrix(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::dimension_mismatch);
  }
}

TEST(LeaderRank, UniformMatrixGivesEqualScores) {
  std::vector<std::vector<double>> m(4, std::vector<double>(4, 0.3));
  for (int i = 0; i < 4; ++i) m[i][i] = 0.0;
  const auto s = leaderrank_scores(composite_of(m));
  for (double x : s.scores) EXPECT_NEAR(x, s.scores[0], 1e-12);
  EXPECT_EQ(select_leader(s), M("u1"));
}

TEST(LeaderRank, TwoMembersSymmetricTieBreaksToSmallestId) {
  const auto s = leaderrank_scores(composite_of({{0, 0.7}, {0.7, 0}}));
  EXPECT_NEAR(s.scores[0], s.scores[1], 1e-12);
  EXPECT_EQ(select_leader(s), M("u1"));
}

TEST(LeaderRank, ThreeMemberGraphMatchesOracle) {
  const auto d = oracle::load_fixture("derived_values.json");
  for (const char* key : {"leaderrank_three_eps0.1", "leaderrank_three_eps0.0"}) {
    const auto& f = d[key];
    LeaderRankParams p;
    p.ground_epsilon = std::string(key).ends_with("0.1") ? 0.1 : 0.0;
    const auto s = leaderrank_scores(composite_of(rows_of(f["matrix"])), p);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(s.scores[i], f["scores"][i].get<double>(), 1e-8) << key;
    EXPECT_NEAR(s.ground, f["ground"].get<double>(), 1e-8);
    EXPECT_EQ(select_leader(s), M("u1"));
  }
}

TEST(LeaderRank, StarCenterLeads) {
  const auto f = oracle::load_fixture("derived_values.json")["leaderrank_star"];
  const auto s = leaderrank_scores(composite_of(rows_of(f["matrix"])));
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(s.scores[i], f["scores"][i].get<double>(), 1e-8);
  EXPECT_EQ(select_leader(s), M("u3"));
}

TEST(LeaderRank, NeedsTwoMembers) {
  EXPECT_THROW(leaderrank_scores(composite_of({{0.0}})), Error);
}

// With no positive member edges the graph is a star around the ground
// node. The walk on it is periodic, so it runs to the iteration cap, but
// every member sees the same sequence and the scores stay equal.
TEST(LeaderRank, AllNegativeRowsRouteToGround) {
  const auto s = leaderrank_scores(composite_of({{0, -0.5, -0.2}, {-0.1, 0, -0.3}, {-0.9, -0.4, 0}}));
  for (double x : s.scores) EXPECT_NEAR(x, s.scores[0], 1e-12);
  EXPECT_EQ(select_leader(s), M("u1"));
  const auto ref = oracle::leaderrank({{0, -0.5, -0.2}, {-0.1, 0, -0.3}, {-0.9, -0.4, 0}}, 0.1);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(s.scores[i], ref.scores[i], 1e-8);
}

TEST(SelectLeader, ArgmaxAndTieBreak) {
  InfluenceScores s{build::members({"u1", "u2", "u3"}), {1.2, 1.5, 1.1}, 0.0, 1, true, 0.0};
  EXPECT_EQ(select_leader(s), M("u2"));
  s.scores = {1.0, 1.0, 1.0};
  EXPECT_EQ(select_leader(s), M("u1"));
}

TEST(LeaderRankProperty, DenseReferenceAgreement) {
  std::mt19937_64 rng(17);
  for (std::size_t n = 2; n <= 5; ++n) {
    for (int trial = 0; trial < 50; ++trial) {
      const auto m = random_rows(rng, n);
      for (double eps : {0.1, 0.0}) {
        LeaderRankParams p;
        p.ground_epsilon = eps;
        const auto s = leaderrank_scores(composite_of(m), p);
        const auto ref = oracle::leaderrank(m, eps);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(s.scores[i], ref.scores[i], 1e-8);
      }
    }
  }
}

TEST(LeaderRankProperty, MassConservedWithoutGroundBoost) {
  std::mt19937_64 rng(23);
  LeaderRankParams p;
  p.ground_epsilon = 0.0;
  for (std::size_t n = 2; n <= 5; ++n) {
    for (int trial = 0; trial < 30; ++trial) {
      const auto m = composite_of(random_rows(rng, n));
      const auto g = make_grounded_graph(m.matrix);
      std::vector<double> cur(n + 1, 1.0), next(n + 1);
      for (int it = 0; it < 50; ++it) {
        EXPECT_NEAR(leaderrank_step(g, cur, next, 0.0), static_cast<double>(n + 1), 1e-9);
        cur.swap(next);
      }
      const auto s = leaderrank_scores(m, p);
      EXPECT_NEAR(std::accumulate(s.scores.begin(), s.scores.end(), 0.0), static_cast<double>(n + 1), 1e-9);
      EXPECT_NEAR(s.mass_drift, 0.0, 1e-12);
    }
  }
}

TEST(LeaderRankProperty, ScaleInvarianceAndPermutationEquivariance) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 4;
    auto m = random_rows(rng, n);
    const auto base = leaderrank_scores(composite_of(m));
    for (double c : {0.1, 10.0}) {
      auto scaled = m;
      for (auto& row : scaled)
        for (double& x : row) x *= c;
      EXPECT_EQ(select_leader(leaderrank_scores(composite_of(scaled))), select_leader(base));
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<double>> pm(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) pm[perm[i]][perm[j]] = m[i][j];
    const auto ps = leaderrank_scores(composite_of(pm));
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(ps.scores[perm[i]], base.scores[i], 1e-9);
  }
}

TEST(LeaderRankProperty, ScoresNonNegativeAndFinite) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = leaderrank_scores(composite_of(random_rows(rng, 2 + rng() % 4)));
    for (double x : s.scores) {
      EXPECT_TRUE(std::isfinite(x));
      EXPECT_GE(x, 0.0);
    }
  }
}

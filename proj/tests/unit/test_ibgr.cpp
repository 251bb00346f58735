#include <random>
#include <set>

#include <gtest/gtest.h>

#include "grouprec/ibgr.hpp"
#include "support/builders.hpp"
#include "support/oracle.hpp"

using namespace grouprec;
using build::M;
using build::R;

TEST(Ibgr, HarmonicMean) {
  EXPECT_NEAR(ibgr::harmonic_mean(0.5, 0.2), 2.0 / 7.0, 1e-15);
  EXPECT_EQ(ibgr::harmonic_mean(0.0, 0.7), 0.0);
  EXPECT_EQ(ibgr::harmonic_mean(0.4, -0.1), 0.0);
  EXPECT_NEAR(ibgr::harmonic_mean(2.0 / 7.0, 0.5), 2.0 * (2.0 / 7.0) * 0.5 / (2.0 / 7.0 + 0.5), 1e-15);
}

TEST(Ibgr, PartnershipIsAsymmetric) {
  const std::set<int> u{1, 2, 3, 4};
  const std::set<int> v{3, 4};
  EXPECT_DOUBLE_EQ(ibgr::partnership(u, v), 0.5);
  EXPECT_DOUBLE_EQ(ibgr::partnership(v, u), 1.0);
  EXPECT_DOUBLE_EQ(ibgr::partnership(std::set<int>{}, v), 0.0);
}

TEST(Ibgr, Distance) {
  const std::vector<double> a{4, 2}, b{1, 6};
  EXPECT_DOUBLE_EQ(ibgr::distance(a, b), 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(ibgr::distance(std::vector<double>{}, std::vector<double>{}), 1.0);
}

TEST(Ibgr, ThreeMemberFixture) {
  const auto f = oracle::load_fixture("derived_values.json")["ibgr_three"];
  RatingTable t;
  for (const auto& [m, rs] : f["ratings"].items())
    for (const auto& [r, v] : rs.items()) t.set(M(m), R(r), v.get<int>());
  const std::vector<RestaurantId> c{R("a"), R("b"), R("c"), R("d")};
  const auto res = ibgr::group_recommend(build::members({"u1", "u2", "u3"}), t, c, {});
  EXPECT_EQ(res.leader, M(f["leader"].get<std::string>()));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(res.trust(i, j), f["trust"][i][j].get<double>(), 1e-12);
      EXPECT_NEAR(res.similarity(i, j), f["similarity"][i][j].get<double>(), 1e-12);
    }
  }
  for (const auto& [r, v] : f["group"].items()) EXPECT_NEAR(res.group.at(R(r)), v.get<double>(), 1e-12);
  std::vector<std::string> top;
  for (const auto& item : res.snapshot.items) top.push_back(item.restaurant.str());
  EXPECT_EQ(top, f["top"].get<std::vector<std::string>>());
  EXPECT_EQ(res.snapshot.algorithm, Algorithm::baseline);
}

TEST(Ibgr, ImpactOneMatchesLeaderless) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> rating(1, 5);
  for (int trial = 0; trial < 100; ++trial) {
    RatingTable t;
    const auto ids = build::members({"u1", "u2", "u3", "u4"});
    std::vector<RestaurantId> c;
    for (int r = 0; r < 6; ++r) c.emplace_back("r" + std::to_string(r));
    for (const auto& m : ids)
      for (const auto& r : c)
        if (rng() % 3 != 0) t.set(m, r, rating(rng));
    ibgr::Params p;
    p.leader_impact = 1.0;
    const auto with = ibgr::group_recommend(ids, t, c, p, 0, true);
    const auto without = ibgr::group_recommend(ids, t, c, p, 0, false);
    for (const auto& r : c) EXPECT_EQ(with.group.at(r), without.group.at(r));
    EXPECT_EQ(with.snapshot.items, without.snapshot.items);
  }
}

TEST(Ibgr, RejectsImpactBelowOne) {
  ibgr::Params p;
  p.leader_impact = 0.9;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Ibgr, SingleMemberRecommendsOwnRatings) {
  RatingTable t;
  t.set(M("u1"), R("a"), 2);
  t.set(M("u1"), R("b"), 5);
  const std::vector<RestaurantId> c{R("a"), R("b")};
  const auto res = ibgr::group_recommend(build::members({"u1"}), t, c, {});
  EXPECT_EQ(res.leader, M("u1"));
  EXPECT_DOUBLE_EQ(res.group.at(R("b")), 5.0);
  EXPECT_EQ(res.snapshot.items.front().restaurant, R("b"));
}

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "grouprec/report.hpp"
#include "support/builders.hpp"
#include "support/oracle.hpp"
#include "support/tempdir.hpp"

using namespace grouprec;
using build::M;
using build::R;

namespace {

std::string read_file(const std::string& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string write_file(const build::TempDir& dir, const std::string& name, const std::string& text) {
  const auto p = (dir.path() / name).string();
  std::ofstream(p) << text;
  return p;
}

RecommendationSnapshot ranked(std::initializer_list<const char*> ids) {
  RecommendationSnapshot s;
  double r = 5.0;
  for (const auto* id : ids) s.items.push_back({R(id), r -= 0.5});
  return s;
}

}  // namespace

TEST(Report, GoldenText) {
  const auto run = replay_file(oracle::source_path("tests/fixtures/golden_session.log"), Config{});
  EXPECT_EQ(render_text(replay_report(run)), read_file(oracle::source_path("tests/fixtures/golden_session.report.txt")));
}

TEST(Report, GoldenTextAgreesWithOracle) {
  const auto o = oracle::load_fixture("golden_session.oracle.json");
  const auto text = read_file(oracle::source_path("tests/fixtures/golden_session.report.txt"));
  EXPECT_NE(text.find("final.leader = \"" + o["leader"].get<std::string>() + "\"\n"), std::string::npos);
  for (const auto& [m, x] : o["influence"].items()) {
    EXPECT_NE(text.find("final.influence.scores." + m + " = " + format_double(x.get<double>()) + "\n"),
              std::string::npos)
        << m;
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string r = o["proposed_top3"][i];
    EXPECT_NE(text.find("final.recommendations.proposed.items[" + std::to_string(i) + "].restaurant = \"" + r + "\""),
              std::string::npos);
  }
}

TEST(Report, EmptyLog) {
  build::TempDir dir;
  const auto run = replay_file(write_file(dir, "e.log", ""), Config{});
  const auto report = replay_report(run);
  EXPECT_EQ(report["events"], 0);
  EXPECT_TRUE(report["final"]["leader"].is_null());
}

TEST(Report, CorruptedLineIsNamed) {
  build::TempDir dir;
  auto text = read_file(oracle::source_path("tests/fixtures/golden_session.log"));
  const auto at = text.find("31\t379000");
  text.replace(at, 2, "3x");
  try {
    replay_file(write_file(dir, "c.log", text), Config{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse);
    EXPECT_NE(std::string(e.what()).find("line 34"), std::string::npos) << e.what();
  }
}

TEST(Report, LexiconMismatchRejected) {
  build::TempDir dir;
  const auto p = write_file(dir, "l.log", "# grouprec-log lexicon=other-2 resolver=heuristic-v1\n");
  EXPECT_THROW(replay_file(p, Config{}), Error);
}

TEST(Report, ReplayIsFixedPoint) {
  build::TempDir dir;
  const auto first = replay_file(oracle::source_path("tests/fixtures/golden_session.log"), Config{});
  std::ostringstream log;
  eventlog::write(log, first.session.log());
  const auto second = replay_file(write_file(dir, "again.log", log.str()), Config{});
  EXPECT_EQ(render_text(replay_report(second)), render_text(replay_report(first)));
  EXPECT_EQ(compare_report(second), compare_report(first));
}

TEST(Report, LeaderChangesOnlyOnChange) {
  const auto run = replay_file(oracle::source_path("tests/fixtures/golden_session.log"), Config{});
  const auto changes = replay_report(run)["leader_changes"];
  for (std::size_t i = 1; i < changes.size(); ++i) {
    EXPECT_TRUE(changes[i]["proposed"] != changes[i - 1]["proposed"] ||
                changes[i]["baseline"] != changes[i - 1]["baseline"]);
  }
}

TEST(Compare, RankCorrelation) {
  EXPECT_EQ(rank_correlation(ranked({"a", "b", "c"}).items, ranked({"a", "b", "c"}).items), 1.0);
  EXPECT_EQ(rank_correlation(ranked({"a", "b", "c"}).items, ranked({"c", "b", "a"}).items), -1.0);
  EXPECT_DOUBLE_EQ(rank_correlation(ranked({"a", "b", "c"}).items, ranked({"b", "a", "c"}).items).get<double>(), 0.5);
  EXPECT_TRUE(rank_correlation(ranked({"a"}).items, ranked({"a"}).items).is_null());
  EXPECT_TRUE(rank_correlation(ranked({"a", "b"}).items, ranked({"c", "d"}).items).is_null());
}

TEST(Compare, EmptyCandidatesGiveEmptyColumns) {
  SessionView v;
  v.leader = M("u1");
  v.baseline.leader = M("u1");
  const auto row = compare_row(v);
  EXPECT_EQ(row["proposed_top"], Json::array());
  EXPECT_EQ(row["top_k_overlap"], 0);
  EXPECT_TRUE(row["rank_correlation"].is_null());
  const auto text = render_compare_text({{"rows", {row}}});
  EXPECT_NE(text.find("\tu1\tu1\tyes\t-\t-\t0\t-\n"), std::string::npos) << text;
}

TEST(Compare, SymmetricFixtureLeadersAgree) {
  // Identical tastes: every pairwise score ties, both rules fall back to u1.
  Session s;
  for (const char* m : {"u1", "u2", "u3"}) s.append(0, Join{M(m), std::string("n") + m});
  s.append(0, PhaseChange{Phase::bookmarking, Origin::admin, ""});
  for (const char* m : {"u1", "u2", "u3"}) {
    s.append(1, Rating{M(m), R("a"), 5});
    s.append(1, Rating{M(m), R("b"), 3});
  }
  s.advance_to(5'000);
  const auto row = compare_row(s.view());
  EXPECT_EQ(row["proposed_leader"], "u1");
  EXPECT_EQ(row["leaders_agree"], true);
  EXPECT_EQ(row["rank_correlation"], 1.0);
}

TEST(Compare, StarFixtureRecordsBothLeaders) {
  // u3's list is the common ground; the others disagree with each other.
  Session s;
  for (const char* m : {"u1", "u2", "u3", "u4"}) s.append(0, Join{M(m), std::string("n") + m});
  s.append(0, PhaseChange{Phase::bookmarking, Origin::admin, ""});
  const std::map<const char*, std::map<const char*, int>> taste{
      {"u1", {{"a", 5}, {"b", 4}, {"c", 1}}},
      {"u2", {{"a", 4}, {"b", 5}, {"d", 2}}},
      {"u3", {{"a", 5}, {"b", 5}, {"c", 2}, {"d", 2}, {"e", 1}}},
      {"u4", {{"a", 5}, {"c", 1}, {"e", 2}}}};
  for (const auto& [m, rs] : taste)
    for (const auto& [r, v] : rs) s.append(1, Rating{M(m), R(r), v});
  s.advance_to(5'000);
  const auto& v = s.view();
  const auto row = compare_row(v);
  EXPECT_EQ(row["proposed_leader"], v.leader->str());
  EXPECT_EQ(row["baseline_leader"], v.baseline.leader->str());
  EXPECT_EQ(row["leaders_agree"], *v.leader == *v.baseline.leader);
  const auto ref = ibgr::group_recommend(build::members({"u1", "u2", "u3", "u4"}), s.ratings(), v.candidates, {});
  EXPECT_EQ(*v.baseline.leader, ref.leader);
}

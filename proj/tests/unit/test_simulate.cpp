#include <sstream>

#include <gtest/gtest.h>

#include "grouprec/event_log.hpp"
#include "grouprec/json_io.hpp"
#include "grouprec/simulate.hpp"
#include "support/builders.hpp"
#include "support/oracle.hpp"

using namespace grouprec;
using build::M;

namespace {

PersonaFile personas(const std::string& name) {
  return load_personas(oracle::source_path("data/personas/" + name));
}

SimulationOptions opts(std::uint64_t seed) {
  SimulationOptions o;
  o.seed = seed;
  return o;
}

std::string log_text(const Session& s) {
  std::ostringstream out;
  eventlog::write(out, s.log());
  return out.str();
}

}  // namespace

TEST(Simulate, SameSeedSameLog) {
  const auto p = personas("dominant.json");
  const auto a = simulate_session(p, opts(7));
  const auto b = simulate_session(p, opts(7));
  EXPECT_EQ(log_text(a), log_text(b));
  EXPECT_NE(log_text(a), log_text(simulate_session(p, opts(8))));
}

TEST(Simulate, GeneratedLogReplaysToSameView) {
  const auto p = personas("dominant.json");
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto s = simulate_session(p, opts(seed));
    std::istringstream in(log_text(s));
    const auto r = Session::replay(eventlog::read(in));
    EXPECT_EQ(to_json(r.view()), to_json(s.view()));
  }
}

TEST(Simulate, UniformPersonasGiveSymmetricTrustAndLeaderU1) {
  const auto s = simulate_session(personas("uniform.json"), opts(1));
  const auto& v = s.view();
  ASSERT_EQ(v.trust.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_DOUBLE_EQ(v.trust(i, j), v.trust(j, i));
  EXPECT_EQ(v.leader, M("u1"));
  EXPECT_EQ(v.phase, Phase::results);
}

TEST(Simulate, DominantPersonaLeads) {
  const auto s = simulate_session(personas("dominant.json"), opts(1));
  const auto& v = s.view();
  EXPECT_EQ(v.leader, M("u3"));
  std::vector<std::vector<double>> rows(v.composite.size(), std::vector<double>(v.composite.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.size(); ++j) rows[i][j] = v.composite(i, j);
  const auto ref = oracle::leaderrank(rows, 0.1);
  const auto best = std::max_element(ref.scores.begin(), ref.scores.end() - 1) - ref.scores.begin();
  EXPECT_EQ(v.influence->members[static_cast<std::size_t>(best)], M("u3"));
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_NEAR(v.influence->scores[i], ref.scores[i], 1e-8);
}

TEST(Simulate, EventsRespectPhaseRules) {
  const auto s = simulate_session(personas("dominant.json"), opts(4));
  bool saw_chat = false, saw_save = false;
  for (const auto& e : s.log()) {
    saw_chat = saw_chat || std::holds_alternative<ChatMessage>(e.body);
    saw_save = saw_save || std::holds_alternative<SaveEvent>(e.body);
  }
  EXPECT_TRUE(saw_chat);
  EXPECT_TRUE(saw_save);
  EXPECT_EQ(s.phase(), Phase::results);
}

TEST(Simulate, ShortDurationEndsWithAdminStop) {
  auto o = opts(1);
  o.duration_ms = 400'000;
  const auto s = simulate_session(personas("dominant.json"), o);
  const auto& last = std::get<PhaseChange>(s.log().back().body);
  EXPECT_EQ(last.origin, Origin::admin);
  EXPECT_EQ(s.log().back().at, 400'000);
}

TEST(Simulate, PersonaFileValidation) {
  using nlohmann::json;
  EXPECT_THROW(parse_personas(json::array()), Error);
  EXPECT_THROW(parse_personas(json::parse(R"({"personas": [{"member": "u1", "nickname": "a", "taste": {}}]})")), Error);
  EXPECT_THROW(parse_personas(json::parse(
                   R"({"personas": [{"member": "u1", "nickname": "a", "taste": {"r": 9}},
                                    {"member": "u2", "nickname": "b", "taste": {}}]})")),
               Error);
  EXPECT_THROW(parse_personas(json::parse(
                   R"({"personas": [{"member": "u1", "nickname": "a", "taste": {}, "agreement_bias": 2},
                                    {"member": "u2", "nickname": "b", "taste": {}}]})")),
               Error);
  EXPECT_THROW(load_personas("/nonexistent.json"), Error);
}

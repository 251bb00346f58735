#pragma once

// JSON views of derived state, shared by the HTTP API, push digests and
// machine-readable reports. Object keys are sorted.

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "grouprec/event_log.hpp"
#include "grouprec/session.hpp"

namespace grouprec {

using Json = nlohmann::json;

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

inline Json to_json(const PairMatrix& m) {
  Json members = Json::array();
  for (const auto& id : m.members()) members.push_back(id.str());
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return {{"members", std::move(members)}, {"rows", std::move(rows)}};
}

inline Json to_json(const InfluenceScores& s) {
  Json scores = Json::object();
  for (std::size_t i = 0; i < s.members.size(); ++i) scores[s.members[i].str()] = s.scores[i];
  return {{"scores", std::move(scores)},
          {"ground", s.ground},
          {"iterations", s.iterations},
          {"converged", s.converged},
          {"mass_drift", s.mass_drift}};
}

inline Json to_json(const RecommendationSnapshot& r) {
  Json items = Json::array();
  for (const auto& it : r.items) items.push_back({{"restaurant", it.restaurant.str()}, {"rating", it.rating}});
  return {{"algorithm", std::string(to_string(r.algorithm))},
          {"tick", r.tick},
          {"leader", r.leader ? Json(r.leader->str()) : Json(nullptr)},
          {"k", r.k},
          {"items", std::move(items)}};
}

inline Json to_json(const GroupRatings& g) {
  Json out = Json::object();
  for (const auto& [r, v] : g) out[r.str()] = v;
  return out;
}

inline Json to_json(const EntropyTick& t) {
  return {{"index", t.index},
          {"since_start_ms", t.since_start},
          {"trust", t.entropy_trust},
          {"similarity", t.entropy_similarity}};
}

inline Json to_json(const SessionView& v) {
  Json roster = Json::array();
  for (const auto& m : v.roster) roster.push_back({{"member", m.id.str()}, {"nickname", m.nickname}});
  Json candidates = Json::array();
  for (const auto& c : v.candidates) candidates.push_back(c.str());
  Json entropy = Json::array();
  for (const auto& t : v.entropy) entropy.push_back(to_json(t));
  return {
      {"tick", v.tick},
      {"last_seq", v.last_seq},
      {"phase", std::string(to_string(v.phase))},
      {"phase_started",
       {{"bookmarking", optional_json(v.bookmarking_started)},
        {"discussion", optional_json(v.discussion_started)},
        {"results", optional_json(v.results_at)}}},
      {"roster", std::move(roster)},
      {"candidates", std::move(candidates)},
      {"similarity", to_json(v.similarity)},
      {"trust", to_json(v.trust)},
      {"composite", to_json(v.composite)},
      {"influence", v.influence ? to_json(*v.influence) : Json(nullptr)},
      {"leader", v.leader ? Json(v.leader->str()) : Json(nullptr)},
      {"group_ratings",
       {{"proposed", to_json(v.proposed_ratings)}, {"baseline", to_json(v.baseline_ratings)}}},
      {"recommendations", {{"proposed", to_json(v.proposed)}, {"baseline", to_json(v.baseline)}}},
      {"entropy", std::move(entropy)},
      {"termination", {{"stop", v.termination.stop()}, {"reason", v.termination.reason()}}},
  };
}

/// Short form pushed on every recompute.
inline Json digest(const SessionView& v) {
  return {{"tick", v.tick},
          {"last_seq", v.last_seq},
          {"phase", std::string(to_string(v.phase))},
          {"leader", v.leader ? Json(v.leader->str()) : Json(nullptr)},
          {"recommendations", {{"proposed", to_json(v.proposed)}, {"baseline", to_json(v.baseline)}}},
          {"termination", {{"stop", v.termination.stop()}, {"reason", v.termination.reason()}}}};
}

/// An event as JSON with the same field names as its log line.
inline Json to_json(const InteractionEvent& e) {
  Json payload = Json::object();
  for (const auto& [k, v] : eventlog::payload_fields(e.body)) payload[k] = v;
  return {{"seq", e.seq}, {"at", e.at}, {"type", std::string(eventlog::type_tag(e.body))},
          {"payload", std::move(payload)}};
}

}  // namespace grouprec

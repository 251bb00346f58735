#pragma once

// Identifiers, interaction events and rating bookkeeping shared by every
// other grouprec header.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace grouprec {

enum class ErrorKind {
  out_of_range,
  validation,
  phase_violation,
  unknown_member,
  unknown_session,
  parse,
  out_of_order,
  dimension_mismatch,
  io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::out_of_range: return "out_of_range";
    case ErrorKind::validation: return "validation";
    case ErrorKind::phase_violation: return "phase_violation";
    case ErrorKind::unknown_member: return "unknown_member";
    case ErrorKind::unknown_session: return "unknown_session";
    case ErrorKind::parse: return "parse";
    case ErrorKind::out_of_order: return "out_of_order";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Opaque string identifier. Ordering is lexicographic on the underlying
/// string and is the tie-break order used everywhere.
template <typename Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string value) : value_(std::move(value)) {}
  explicit Id(const char* value) : value_(value) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const Id&, const Id&) = default;
  friend bool operator==(const Id&, const Id&) = default;

 private:
  std::string value_;
};

using MemberId = Id<struct MemberTag>;
using GroupId = Id<struct GroupTag>;
using RestaurantId = Id<struct RestaurantTag>;

/// Milliseconds since session start.
using Millis = std::int64_t;

inline double to_seconds(Millis ms) { return static_cast<double>(ms) / 1000.0; }

enum class Phase { lobby, bookmarking, discussion, results };

inline std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::lobby: return "lobby";
    case Phase::bookmarking: return "bookmarking";
    case Phase::discussion: return "discussion";
    case Phase::results: return "results";
  }
  return "lobby";
}

inline std::optional<Phase> parse_phase(std::string_view s) {
  if (s == "lobby") return Phase::lobby;
  if (s == "bookmarking") return Phase::bookmarking;
  if (s == "discussion") return Phase::discussion;
  if (s == "results") return Phase::results;
  return std::nullopt;
}

/// Who caused a phase transition. Automatic transitions are produced by the
/// session clock (deadlines, termination monitor) and are never accepted
/// from outside.
enum class Origin { admin, automatic };

struct Join {
  MemberId member;
  std::string nickname;
  friend bool operator==(const Join&, const Join&) = default;
};

/// A bookmark (positive value) or a negative rating (negative value).
struct Rating {
  MemberId member;
  RestaurantId restaurant;
  int value = 0;
  friend bool operator==(const Rating&, const Rating&) = default;
};

/// `saver` copies `restaurant` from `source`'s preferred list and rates it.
struct SaveEvent {
  MemberId saver;
  MemberId source;
  RestaurantId restaurant;
  int rating = 0;
  friend bool operator==(const SaveEvent&, const SaveEvent&) = default;
};

struct ChatMessage {
  std::uint64_t id = 0;  // the event sequence number
  MemberId sender;
  std::string text;
  Millis at = 0;
  std::optional<RestaurantId> shared_restaurant;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct PhaseChange {
  Phase phase = Phase::lobby;
  Origin origin = Origin::admin;
  std::string reason;
  friend bool operator==(const PhaseChange&, const PhaseChange&) = default;
};

using EventBody = std::variant<Join, Rating, SaveEvent, ChatMessage, PhaseChange>;

struct InteractionEvent {
  std::uint64_t seq = 0;
  Millis at = 0;
  EventBody body;
  friend bool operator==(const InteractionEvent&, const InteractionEvent&) = default;
};

/// Accepts the rating scale {-5..-1} and {1..5}. Zero is the implicit
/// value of an unrated restaurant and is never a valid explicit input.
inline int validate_rating(int value) {
  if (value == 0 || value < -5 || value > 5) {
    throw Error(ErrorKind::out_of_range,
                "rating " + std::to_string(value) + " outside {-5..-1} u {1..5}");
  }
  return value;
}

/// Explicit ratings, last write wins. Absence reads as 0.
class RatingTable {
 public:
  void set(const MemberId& member, const RestaurantId& restaurant, int value) {
    table_[member][restaurant] = value;
  }

  std::optional<int> get(const MemberId& member, const RestaurantId& restaurant) const {
    auto m = table_.find(member);
    if (m == table_.end()) return std::nullopt;
    auto r = m->second.find(restaurant);
    if (r == m->second.end()) return std::nullopt;
    return r->second;
  }

  int effective(const MemberId& member, const RestaurantId& restaurant) const {
    return get(member, restaurant).value_or(0);
  }

  const std::map<RestaurantId, int>& of(const MemberId& member) const {
    static const std::map<RestaurantId, int> empty;
    auto m = table_.find(member);
    return m == table_.end() ? empty : m->second;
  }

  bool empty() const { return table_.empty(); }

  const std::map<MemberId, std::map<RestaurantId, int>>& all() const { return table_; }

 private:
  std::map<MemberId, std::map<RestaurantId, int>> table_;
};

/// Restaurants on at least one member's preferred list, sorted by id.
/// Negative ratings never add a candidate.
inline std::vector<RestaurantId> build_candidate_set(std::span<const InteractionEvent> events) {
  std::set<RestaurantId> out;
  for (const auto& e : events) {
    if (const auto* r = std::get_if<Rating>(&e.body); r && r->value > 0) {
      out.insert(r->restaurant);
    } else if (const auto* s = std::get_if<SaveEvent>(&e.body)) {
      out.insert(s->restaurant);
    }
  }
  return {out.begin(), out.end()};
}

/// Applies events in order; a later rating of the same restaurant by the
/// same member replaces the earlier one.
inline RatingTable build_rating_table(std::span<const InteractionEvent> events) {
  RatingTable table;
  for (const auto& e : events) {
    if (const auto* r = std::get_if<Rating>(&e.body)) {
      table.set(r->member, r->restaurant, r->value);
    } else if (const auto* s = std::get_if<SaveEvent>(&e.body)) {
      table.set(s->saver, s->restaurant, s->rating);
    }
  }
  return table;
}

}  // namespace grouprec

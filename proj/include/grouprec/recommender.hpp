#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "grouprec/domain.hpp"
#include "grouprec/leaderrank.hpp"

namespace grouprec {

enum class Algorithm { proposed, baseline };

inline std::string_view to_string(Algorithm a) {
  return a == Algorithm::proposed ? "proposed" : "baseline";
}

struct RankedItem {
  RestaurantId restaurant;
  double rating = 0.0;
  friend bool operator==(const RankedItem&, const RankedItem&) = default;
};

struct RecommendationSnapshot {
  Algorithm algorithm = Algorithm::proposed;
  Millis tick = 0;
  std::optional<MemberId> leader;
  std::vector<RankedItem> items;
  std::size_t k = 3;
  friend bool operator==(const RecommendationSnapshot&, const RecommendationSnapshot&) = default;
};

using GroupRatings = std::map<RestaurantId, double>;

/// Influence-weighted group rating of every candidate. Weights are the
/// influence scores divided by their sum, so a restaurant every member rates
/// s gets exactly s. Unrated restaurants count as 0.
inline GroupRatings group_ratings(const InfluenceScores& influence, const RatingTable& ratings,
                                  std::span<const RestaurantId> candidates) {
  GroupRatings out;
  double total = 0.0;
  for (double s : influence.scores) total += s;
  for (const auto& r : candidates) {
    double g = 0.0;
    for (std::size_t i = 0; i < influence.members.size(); ++i) {
      const double w = total > 0.0 ? influence.scores[i] / total
                                   : 1.0 / static_cast<double>(influence.members.size());
      g += w * ratings.effective(influence.members[i], r);
    }
    out[r] = g;
  }
  return out;
}

/// All candidates, best first. Ratings equal to 1e-9 tie and are ordered
/// by RestaurantId.
inline std::vector<RankedItem> rank_all(const GroupRatings& ratings) {
  std::vector<RankedItem> items;
  items.reserve(ratings.size());
  for (const auto& [r, v] : ratings) items.push_back({r, v});
  std::stable_sort(items.begin(), items.end(), [](const RankedItem& a, const RankedItem& b) {
    return score_key(a.rating) > score_key(b.rating);
  });
  return items;
}

inline RecommendationSnapshot top_k(const GroupRatings& ratings, std::size_t k,
                                    Algorithm algorithm = Algorithm::proposed, Millis tick = 0,
                                    std::optional<MemberId> leader = std::nullopt) {
  if (k < 1) throw Error(ErrorKind::validation, "k must be at least 1");
  RecommendationSnapshot snap{algorithm, tick, std::move(leader), rank_all(ratings), k};
  if (snap.items.size() > k) snap.items.resize(k);
  return snap;
}

}  // namespace grouprec

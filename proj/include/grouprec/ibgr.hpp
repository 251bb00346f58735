#pragma once

// Influence-based group recommendation (IBGR), used as the comparison
// baseline.
//
// Per ordered pair (u, v), with I_u the restaurants u rated explicitly:
//   partnership(u, v) = |I_u n I_v| / |I_u|
//   distance(u, v)    = 1 / (1 + sqrt(sum over shared items (r_u - r_v)^2))
//   trust(u, v)       = harmonic mean of partnership and distance
//   similarity(u, v)  = PCC over shared items
//   w(v -> u)         = harmonic mean of trust(u, v) and similarity(u, v),
//                       0 when either is <= 0 (influence of v on u)
// Leader: argmax over u of sum_v [trust(v, u) + similarity(v, u)].
// Adjusted rating of u for item i:
//   (r_u,i + sum_v m_v * w(v -> u) * r_v,i) / (1 + sum_v m_v * w(v -> u))
// where m_v is the leader impact factor L for the leader and 1 otherwise.
// Group rating is the mean adjusted rating; unrated items count as 0.

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "grouprec/domain.hpp"
#include "grouprec/pair_matrix.hpp"
#include "grouprec/recommender.hpp"
#include "grouprec/similarity.hpp"

namespace grouprec::ibgr {

struct Params {
  double leader_impact = 1.5;
  std::size_t k = 3;

  void validate() const {
    if (!(leader_impact >= 1.0)) throw Error(ErrorKind::validation, "leader impact must be >= 1");
    if (k < 1) throw Error(ErrorKind::validation, "k must be at least 1");
  }
};

template <typename Set>
double partnership(const Set& items_u, const Set& items_v) {
  if (items_u.empty()) return 0.0;
  std::size_t shared = 0;
  for (const auto& i : items_u) shared += items_v.count(i);
  return static_cast<double>(shared) / static_cast<double>(items_u.size());
}

inline double partnership(const MemberId& u, const MemberId& v, const RatingTable& ratings) {
  std::set<RestaurantId> iu;
  std::set<RestaurantId> iv;
  for (const auto& [r, _] : ratings.of(u)) iu.insert(r);
  for (const auto& [r, _] : ratings.of(v)) iv.insert(r);
  return partnership(iu, iv);
}

/// Rating distance on co-rated items; no shared items gives 1.
inline double distance(std::span<const double> ru, std::span<const double> rv) {
  double ss = 0.0;
  for (std::size_t i = 0; i < std::min(ru.size(), rv.size()); ++i) {
    ss += (ru[i] - rv[i]) * (ru[i] - rv[i]);
  }
  return 1.0 / (1.0 + std::sqrt(ss));
}

inline double distance(const MemberId& u, const MemberId& v, const RatingTable& ratings) {
  auto [x, y] = co_rated(u, v, ratings);
  return distance(std::span<const double>(x), std::span<const double>(y));
}

inline double harmonic_mean(double a, double b) {
  if (a <= 0.0 || b <= 0.0) return 0.0;
  return 2.0 * a * b / (a + b);
}

inline double trust(double partnership_uv, double distance_uv) {
  return harmonic_mean(partnership_uv, distance_uv);
}

inline double trust(const MemberId& u, const MemberId& v, const RatingTable& ratings) {
  return trust(partnership(u, v, ratings), distance(u, v, ratings));
}

inline double similarity(const MemberId& u, const MemberId& v, const RatingTable& ratings) {
  return pcc(u, v, ratings);
}

inline double influence_weight(double trust_uv, double similarity_uv) {
  return harmonic_mean(trust_uv, similarity_uv);
}

struct Result {
  MemberId leader;
  PairMatrix trust;       // (u, v) -> trust(u, v)
  PairMatrix similarity;  // symmetric
  PairMatrix influence;   // (v, u) -> influence of v on u
  std::map<MemberId, std::map<RestaurantId, double>> adjusted;
  GroupRatings group;
  RecommendationSnapshot snapshot;
};

/// `apply_leader_impact = false` runs the leaderless variant used to check
/// that L = 1 changes nothing.
inline Result group_recommend(const std::vector<MemberId>& group, const RatingTable& ratings,
                              std::span<const RestaurantId> candidates, const Params& params,
                              Millis tick = 0, bool apply_leader_impact = true) {
  params.validate();
  Result res;
  res.trust = PairMatrix(group);
  res.similarity = PairMatrix(group);
  res.influence = PairMatrix(group);
  const auto& ids = res.trust.members();
  const std::size_t n = ids.size();
  if (n == 0) throw Error(ErrorKind::validation, "empty group");

  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u == v) continue;
      res.trust(u, v) = trust(ids[u], ids[v], ratings);
      res.similarity(u, v) = similarity(ids[u], ids[v], ratings);
    }
  }
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u != v) res.influence(v, u) = influence_weight(res.trust(u, v), res.similarity(u, v));
    }
  }

  std::size_t leader = 0;
  double best = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    double s = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (v != u) s += res.trust(v, u) + res.similarity(v, u);
    }
    if (u == 0 || score_key(s) > score_key(best)) {
      best = s;
      leader = u;
    }
  }
  res.leader = ids[leader];

  for (const auto& item : candidates) {
    double sum = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      double num = ratings.effective(ids[u], item);
      double den = 1.0;
      for (std::size_t v = 0; v < n; ++v) {
        if (v == u) continue;
        double w = std::max(res.influence(v, u), 0.0);
        if (apply_leader_impact && v == leader) w *= params.leader_impact;
        num += w * ratings.effective(ids[v], item);
        den += w;
      }
      const double adjusted = num / den;
      res.adjusted[ids[u]][item] = adjusted;
      sum += adjusted;
    }
    res.group[item] = sum / static_cast<double>(n);
  }
  res.snapshot = top_k(res.group, params.k, Algorithm::baseline, tick, res.leader);
  return res;
}

}  // namespace grouprec::ibgr

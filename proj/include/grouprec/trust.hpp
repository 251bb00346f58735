#pragma once

// Directed trust between group members.
//
// Trust(u, v) is the trust u places in v. Its chat part is built from the
// messages u directs at v (frequency) and the tone of everything exchanged
// between the two (sentiment), both weighted by exp(-alpha * age_seconds).
// Its save part compares co-rated restaurants, weighting each by how far
// u's rating departs from u's own habit. Missing evidence yields 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "grouprec/domain.hpp"
#include "grouprec/pair_matrix.hpp"
#include "grouprec/recipient.hpp"
#include "grouprec/sentiment.hpp"

namespace grouprec {

struct TrustParams {
  double alpha = 0.01;  // per second
  double beta1 = 0.5;   // frequency
  double beta2 = 0.5;   // sentiment
  double gamma1 = 0.5;  // chat
  double gamma2 = 0.5;  // save

  void validate() const {
    constexpr double eps = 1e-12;
    if (!(alpha > 0.0)) throw Error(ErrorKind::validation, "trust alpha must be > 0");
    if (std::abs(beta1 + beta2 - 1.0) > eps)
      throw Error(ErrorKind::validation, "beta1 + beta2 must equal 1");
    if (std::abs(gamma1 + gamma2 - 1.0) > eps)
      throw Error(ErrorKind::validation, "gamma1 + gamma2 must equal 1");
  }
};

inline double decay_weight(Millis sent_at, Millis now, double alpha) {
  if (sent_at > now) {
    throw Error(ErrorKind::out_of_order, "message timestamp " + std::to_string(sent_at) +
                                             " is after t_now " + std::to_string(now));
  }
  return std::exp(-alpha * to_seconds(now - sent_at));
}

struct DirectedEntry {
  Millis at = 0;
  double weight = 0.0;    // recipient weight in [0, 1]
  double compound = 0.0;  // sentiment of the message
};

/// Per ordered pair (sender, recipient): every message share sent along
/// that edge.
class DirectedMessageLedger {
 public:
  void add(const ChatMessage& message, const RecipientAssignment& to, SentimentScore sentiment) {
    for (const auto& [recipient, w] : to.weights) {
      if (w <= 0.0 || recipient == message.sender) continue;
      edges_[{message.sender, recipient}].push_back({message.at, w, sentiment.compound});
    }
  }

  void add(const MemberId& from, const MemberId& to, DirectedEntry entry) {
    edges_[{from, to}].push_back(entry);
  }

  const std::vector<DirectedEntry>& directed(const MemberId& from, const MemberId& to) const {
    static const std::vector<DirectedEntry> none;
    auto it = edges_.find({from, to});
    return it == edges_.end() ? none : it->second;
  }

  bool empty() const { return edges_.empty(); }

 private:
  std::map<std::pair<MemberId, MemberId>, std::vector<DirectedEntry>> edges_;
};

namespace detail {
inline double decayed_count(const std::vector<DirectedEntry>& entries, Millis now, double alpha) {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.weight * decay_weight(e.at, now, alpha);
  return sum;
}
}  // namespace detail

/// Share of the decayed u<->v traffic that u directed at v.
inline double chat_frequency_trust(const MemberId& u, const MemberId& v,
                                   const DirectedMessageLedger& ledger, Millis now,
                                   const TrustParams& params) {
  const double out = detail::decayed_count(ledger.directed(u, v), now, params.alpha);
  const double in = detail::decayed_count(ledger.directed(v, u), now, params.alpha);
  if (out + in == 0.0) return 0.0;
  return out / (out + in);
}

/// Decay-weighted mean sentiment over messages in both directions.
inline double chat_sentiment_trust(const MemberId& u, const MemberId& v,
                                   const DirectedMessageLedger& ledger, Millis now,
                                   const TrustParams& params) {
  double num = 0.0;
  double den = 0.0;
  for (const auto* entries : {&ledger.directed(u, v), &ledger.directed(v, u)}) {
    for (const auto& e : *entries) {
      const double w = e.weight * decay_weight(e.at, now, params.alpha);
      num += w * e.compound;
      den += w;
    }
  }
  if (den == 0.0) return 0.0;
  return std::clamp(num / den, -1.0, 1.0);
}

inline double chat_trust(const MemberId& u, const MemberId& v, const DirectedMessageLedger& ledger,
                         Millis now, const TrustParams& params) {
  return params.beta1 * chat_frequency_trust(u, v, ledger, now, params) +
         params.beta2 * chat_sentiment_trust(u, v, ledger, now, params);
}

struct RatingHabit {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  std::size_t count = 0;
};

inline RatingHabit rating_habit(const std::map<RestaurantId, int>& ratings) {
  RatingHabit h;
  h.count = ratings.size();
  if (h.count == 0) return h;
  for (const auto& [_, r] : ratings) h.mean += r;
  h.mean /= static_cast<double>(h.count);
  double ss = 0.0;
  for (const auto& [_, r] : ratings) ss += (r - h.mean) * (r - h.mean);
  h.stddev = std::sqrt(ss / static_cast<double>(h.count));
  return h;
}

/// Weight of one of u's ratings: 1 + |rating - mean| / stddev, or 1 when
/// u's habit is undefined (stddev 0 or fewer than two ratings).
inline double habit_weight(int rating, const RatingHabit& habit) {
  if (habit.count < 2 || habit.stddev == 0.0) return 1.0;
  return 1.0 + std::abs(rating - habit.mean) / habit.stddev;
}

inline double save_trust(const MemberId& u, const MemberId& v, const RatingTable& ratings,
                         const RatingHabit& habit_u, std::size_t group_size) {
  if (group_size == 0) return 0.0;
  const auto& ru = ratings.of(u);
  const auto& rv = ratings.of(v);
  double num = 0.0;
  double den = 0.0;
  for (const auto& [restaurant, ui] : ru) {
    auto it = rv.find(restaurant);
    if (it == rv.end()) continue;
    const double w = habit_weight(ui, habit_u);
    const double s = 1.0 - std::abs(ui - it->second) / static_cast<double>(group_size);
    num += w * s;
    den += w;
  }
  if (den == 0.0) return 0.0;
  return num / den;
}

inline double save_trust(const MemberId& u, const MemberId& v, const RatingTable& ratings,
                         std::size_t group_size) {
  return save_trust(u, v, ratings, rating_habit(ratings.of(u)), group_size);
}

inline double trust_degree(double chat, double save, const TrustParams& params) {
  return params.gamma1 * chat + params.gamma2 * save;
}

inline double trust_degree(const MemberId& u, const MemberId& v,
                           const DirectedMessageLedger& ledger, const RatingTable& ratings,
                           Millis now, const TrustParams& params, std::size_t group_size) {
  return trust_degree(chat_trust(u, v, ledger, now, params),
                      save_trust(u, v, ratings, group_size), params);
}

/// Directed trust matrix: entry (i, j) is Trust(member_i, member_j).
inline PairMatrix trust_matrix(const std::vector<MemberId>& group,
                               const DirectedMessageLedger& ledger, const RatingTable& ratings,
                               Millis now, const TrustParams& params) {
  PairMatrix m(group);
  const auto& ids = m.members();
  std::vector<RatingHabit> habits;
  habits.reserve(ids.size());
  for (const auto& id : ids) habits.push_back(rating_habit(ratings.of(id)));
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (i == j) continue;
      const double chat = chat_trust(ids[i], ids[j], ledger, now, params);
      const double save = save_trust(ids[i], ids[j], ratings, habits[i], m.size());
      m(i, j) = trust_degree(chat, save, params);
    }
  }
  return m;
}

}  // namespace grouprec

#pragma once

// A group session as a fold over its event log plus a clock.
//
// Time is milliseconds since session start. `advance_to(t)` runs every
// scheduled point up to and including t, in time order:
//   * the bookmarking deadline (automatic switch to discussion),
//   * entropy ticks and the hard stop of the termination monitor
//     (automatic switch to results),
//   * recomputation ticks every `recompute_interval_ms` from time 0.
// An event stamped t is applied after the points at t, so derived state
// computed at a point t sees exactly the events stamped before t. Phase
// transitions recompute the derived view immediately. Since the schedule is
// absolute, the resulting state depends only on the log and the final
// clock value, not on how often the clock was advanced.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "grouprec/domain.hpp"
#include "grouprec/ibgr.hpp"
#include "grouprec/leaderrank.hpp"
#include "grouprec/pair_matrix.hpp"
#include "grouprec/recipient.hpp"
#include "grouprec/recommender.hpp"
#include "grouprec/sentiment.hpp"
#include "grouprec/similarity.hpp"
#include "grouprec/termination.hpp"
#include "grouprec/trust.hpp"

namespace grouprec {

struct SessionConfig {
  TrustParams trust;
  double lambda1 = 0.5;
  double lambda2 = 0.5;
  LeaderRankParams leaderrank;
  ibgr::Params ibgr;
  TerminationConfig termination;
  std::size_t top_k = 3;
  Millis recompute_interval_ms = 5'000;
  Millis bookmarking_ms = 360'000;
  std::size_t context_window = DialogueContext::kDefaultWindow;

  void validate() const {
    trust.validate();
    ibgr.validate();
    termination.validate();
    if (top_k < 1) throw Error(ErrorKind::validation, "top_k must be >= 1");
    if (recompute_interval_ms <= 0) throw Error(ErrorKind::validation, "recompute interval must be > 0");
    if (bookmarking_ms <= 0) throw Error(ErrorKind::validation, "bookmarking time must be > 0");
    if (leaderrank.max_iterations < 1) throw Error(ErrorKind::validation, "max_iterations must be >= 1");
    if (leaderrank.ground_epsilon < 0.0) throw Error(ErrorKind::validation, "ground epsilon must be >= 0");
  }
};

struct SessionView {
  Millis tick = 0;
  std::uint64_t last_seq = 0;
  Phase phase = Phase::lobby;
  std::optional<Millis> bookmarking_started;
  std::optional<Millis> discussion_started;
  std::optional<Millis> results_at;
  std::vector<GroupMember> roster;
  std::vector<RestaurantId> candidates;
  PairMatrix similarity;
  PairMatrix trust;
  PairMatrix composite;
  std::optional<InfluenceScores> influence;
  std::optional<MemberId> leader;
  GroupRatings proposed_ratings;
  GroupRatings baseline_ratings;
  RecommendationSnapshot proposed;
  RecommendationSnapshot baseline;
  std::vector<EntropyTick> entropy;
  TerminationDecision termination;
};

class Session {
 public:
  using EventObserver = std::function<void(const InteractionEvent&)>;
  using ViewObserver = std::function<void(const SessionView&)>;

  explicit Session(SessionConfig config = {},
                   std::shared_ptr<const SentimentScorer> scorer = std::make_shared<LexiconScorer>(),
                   std::shared_ptr<const RecipientResolver> resolver =
                       std::make_shared<HeuristicResolver>())
      : config_(std::move(config)), scorer_(std::move(scorer)), resolver_(std::move(resolver)) {
    config_.validate();
    recompute(0);
    next_recompute_ = config_.recompute_interval_ms;
  }

  void on_event(EventObserver f) { on_event_ = std::move(f); }
  void on_view(ViewObserver f) { on_view_ = std::move(f); }

  /// Validates and appends an external event stamped `at`. Automatic phase
  /// changes are rejected here; they only come from the clock.
  const InteractionEvent& append(Millis at, EventBody body) {
    advance_to(at);
    validate(body);
    return commit(at, std::move(body));
  }

  void advance_to(Millis t) {
    if (t < now_) {
      throw Error(ErrorKind::out_of_order, "clock cannot move back from " + std::to_string(now_) +
                                               " to " + std::to_string(t) + " ms");
    }
    while (true) {
      const auto p = next_point();
      if (!p || *p > t) break;
      run_point(*p);
    }
    now_ = t;
  }

  /// Rebuilds a session from a stored log. Automatic transitions in the
  /// log are regenerated by the clock and must match the stored records.
  static Session replay(std::span<const InteractionEvent> log, SessionConfig config = {},
                        std::shared_ptr<const SentimentScorer> scorer =
                            std::make_shared<LexiconScorer>(),
                        std::shared_ptr<const RecipientResolver> resolver =
                            std::make_shared<HeuristicResolver>(),
                        ViewObserver on_view = {}) {
    Session s(std::move(config), std::move(scorer), std::move(resolver));
    if (on_view) {
      s.on_view(std::move(on_view));
      on_view_initial(s);
    }
    s.replay_into(log);
    return s;
  }

  void replay_into(std::span<const InteractionEvent> log) {
    for (const auto& rec : log) {
      const auto* pc = std::get_if<PhaseChange>(&rec.body);
      if (pc && pc->origin == Origin::automatic) {
        advance_to(rec.at);
        if (!contains(rec)) {
          throw Error(ErrorKind::parse, "event " + std::to_string(rec.seq) +
                                            ": automatic phase change is not reproduced by the "
                                            "session clock");
        }
        continue;
      }
      if (rec.seq != next_seq_) {
        throw Error(ErrorKind::parse, "event " + std::to_string(rec.seq) + ": expected sequence " +
                                          std::to_string(next_seq_));
      }
      try {
        append(rec.at, rec.body);
      } catch (const Error& e) {
        throw Error(e.kind(), "event " + std::to_string(rec.seq) + ": " + e.what());
      }
    }
  }

  std::span<const InteractionEvent> log() const { return log_; }
  const SessionView& view() const { return view_; }
  Phase phase() const { return phase_; }
  Millis now() const { return now_; }
  const SessionConfig& config() const { return config_; }
  const SentimentScorer& scorer() const { return *scorer_; }
  const RecipientResolver& resolver() const { return *resolver_; }
  const RatingTable& ratings() const { return ratings_; }
  const DirectedMessageLedger& ledger() const { return ledger_; }
  const std::map<MemberId, std::string>& roster() const { return roster_; }

  const std::set<RestaurantId>& preferred(const MemberId& m) const {
    static const std::set<RestaurantId> none;
    auto it = preferred_.find(m);
    return it == preferred_.end() ? none : it->second;
  }

  std::vector<RestaurantId> candidates() const { return {candidates_.begin(), candidates_.end()}; }

  /// Recipient weights resolved for each chat message, keyed by message id.
  const std::map<std::uint64_t, RecipientAssignment>& assignments() const { return assignments_; }

 private:
  static void on_view_initial(Session& s) {
    if (s.on_view_) s.on_view_(s.view_);
  }

  bool contains(const InteractionEvent& rec) const {
    for (auto it = log_.rbegin(); it != log_.rend(); ++it) {
      if (it->seq == rec.seq) return *it == rec;
      if (it->seq < rec.seq) break;
    }
    return false;
  }

  std::vector<GroupMember> group() const {
    std::vector<GroupMember> g;
    for (const auto& [id, nick] : roster_) g.push_back({id, nick});
    return g;
  }

  std::vector<MemberId> member_ids() const {
    std::vector<MemberId> ids;
    for (const auto& [id, _] : roster_) ids.push_back(id);
    return ids;
  }

  void require_member(const MemberId& m) const {
    if (!roster_.contains(m)) throw Error(ErrorKind::unknown_member, "unknown member '" + m.str() + "'");
  }

  void require_phase(std::initializer_list<Phase> allowed, std::string_view what) const {
    for (auto p : allowed)
      if (p == phase_) return;
    throw Error(ErrorKind::phase_violation, std::string(what) + " is not allowed during the " +
                                                std::string(to_string(phase_)) + " phase");
  }

  static bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
      const auto c = static_cast<unsigned char>(s[i]);
      std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
      if (len == 0 || i + len > s.size()) return false;
      for (std::size_t k = 1; k < len; ++k) {
        if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
      }
      i += len;
    }
    return true;
  }

  void validate(const EventBody& body) const {
    if (phase_ == Phase::results) {
      throw Error(ErrorKind::phase_violation, "the session has ended");
    }
    if (const auto* j = std::get_if<Join>(&body)) {
      require_phase({Phase::lobby, Phase::bookmarking}, "joining");
      if (j->member.empty()) throw Error(ErrorKind::validation, "member id must not be empty");
      if (roster_.contains(j->member))
        throw Error(ErrorKind::validation, "member '" + j->member.str() + "' already joined");
      if (!valid_nickname(j->nickname))
        throw Error(ErrorKind::validation, "nickname '" + j->nickname + "' is not a single word");
      for (const auto& [_, nick] : roster_) {
        if (ascii_lower(nick) == ascii_lower(j->nickname))
          throw Error(ErrorKind::validation, "nickname '" + j->nickname + "' is taken");
      }
    } else if (const auto* r = std::get_if<Rating>(&body)) {
      require_member(r->member);
      validate_rating(r->value);
      if (r->restaurant.empty()) throw Error(ErrorKind::validation, "restaurant id must not be empty");
      if (r->value > 0) {
        require_phase({Phase::bookmarking, Phase::discussion}, "rating");
      } else {
        require_phase({Phase::discussion}, "negative rating");
        if (preferred(r->member).contains(r->restaurant))
          throw Error(ErrorKind::validation, "cannot negatively rate a restaurant on your own list");
        bool listed_by_other = false;
        for (const auto& [m, list] : preferred_) {
          if (m != r->member && list.contains(r->restaurant)) listed_by_other = true;
        }
        if (!listed_by_other)
          throw Error(ErrorKind::validation, "restaurant '" + r->restaurant.str() +
                                                 "' is not on another member's list");
      }
    } else if (const auto* s = std::get_if<SaveEvent>(&body)) {
      require_phase({Phase::discussion}, "saving from another list");
      require_member(s->saver);
      require_member(s->source);
      if (s->saver == s->source) throw Error(ErrorKind::validation, "cannot save from your own list");
      if (validate_rating(s->rating) < 0)
        throw Error(ErrorKind::out_of_range, "a saved restaurant needs a positive rating");
      if (!preferred(s->source).contains(s->restaurant))
        throw Error(ErrorKind::validation, "restaurant '" + s->restaurant.str() + "' is not on " +
                                               s->source.str() + "'s list");
    } else if (const auto* c = std::get_if<ChatMessage>(&body)) {
      require_phase({Phase::discussion}, "chat");
      require_member(c->sender);
      if (c->text.empty() && !c->shared_restaurant)
        throw Error(ErrorKind::validation, "empty chat message");
      if (c->shared_restaurant && c->shared_restaurant->empty())
        throw Error(ErrorKind::validation, "shared restaurant id must not be empty");
      if (!valid_utf8(c->text)) throw Error(ErrorKind::validation, "chat text is not valid UTF-8");
    } else if (const auto* p = std::get_if<PhaseChange>(&body)) {
      if (p->origin != Origin::admin)
        throw Error(ErrorKind::validation, "automatic phase changes come from the session clock");
      const auto expected = static_cast<int>(phase_) + 1;
      if (static_cast<int>(p->phase) != expected)
        throw Error(ErrorKind::phase_violation, "cannot move from " + std::string(to_string(phase_)) +
                                                    " to " + std::string(to_string(p->phase)));
    }
  }

  const InteractionEvent& commit(Millis at, EventBody body) {
    if (auto* c = std::get_if<ChatMessage>(&body)) {
      c->id = next_seq_;
      c->at = at;
    }
    log_.push_back({next_seq_++, at, std::move(body)});
    const InteractionEvent& e = log_.back();
    apply(e);
    if (on_event_) on_event_(e);
    if (const auto* p = std::get_if<PhaseChange>(&e.body)) enter_phase(*p, at);
    return e;
  }

  void apply(const InteractionEvent& e) {
    if (const auto* j = std::get_if<Join>(&e.body)) {
      roster_[j->member] = j->nickname;
    } else if (const auto* r = std::get_if<Rating>(&e.body)) {
      ratings_.set(r->member, r->restaurant, r->value);
      if (r->value > 0) {
        preferred_[r->member].insert(r->restaurant);
        candidates_.insert(r->restaurant);
      }
    } else if (const auto* s = std::get_if<SaveEvent>(&e.body)) {
      ratings_.set(s->saver, s->restaurant, s->rating);
      preferred_[s->saver].insert(s->restaurant);
      candidates_.insert(s->restaurant);
    } else if (const auto* c = std::get_if<ChatMessage>(&e.body)) {
      DialogueContext ctx;
      ctx.messages.assign(recent_.begin(), recent_.end());
      const auto members = group();
      auto assignment = resolver_->resolve(*c, ctx, members);
      assignment.message_id = c->id;
      const auto sentiment = scorer_->score(c->text);
      ledger_.add(*c, assignment, sentiment);
      assignments_[c->id] = std::move(assignment);
      recent_.push_back({c->sender, c->text, c->at});
      while (recent_.size() > config_.context_window) recent_.pop_front();
    } else if (const auto* p = std::get_if<PhaseChange>(&e.body)) {
      phase_ = p->phase;
    }
  }

  void enter_phase(const PhaseChange& p, Millis at) {
    switch (p.phase) {
      case Phase::lobby: break;
      case Phase::bookmarking:
        bookmarking_started_ = at;
        break;
      case Phase::discussion:
        discussion_started_ = at;
        monitor_.emplace(config_.termination);
        entropy_.clear();
        last_decision_ = {};
        next_entropy_ = at;
        break;
      case Phase::results:
        results_at_ = at;
        if (p.origin == Origin::admin) last_decision_ = {StopKind::forced, {}};
        next_entropy_.reset();
        break;
    }
    if (p.phase == Phase::discussion) {
      // Tick 0 is recorded at the moment the discussion opens.
      run_entropy_tick(at);
      next_entropy_ = at + config_.termination.interval_ms;
    }
    recompute(at);
  }

  std::optional<Millis> next_point() const {
    std::optional<Millis> p;
    auto consider = [&](std::optional<Millis> x) {
      if (x && (!p || *x < *p)) p = x;
    };
    if (phase_ == Phase::results) return p;
    consider(next_recompute_);
    if (phase_ == Phase::bookmarking && bookmarking_started_)
      consider(*bookmarking_started_ + config_.bookmarking_ms);
    if (phase_ == Phase::discussion) {
      consider(next_entropy_);
      consider(*discussion_started_ + config_.termination.hard_stop_ms);
    }
    return p;
  }

  void run_point(Millis p) {
    if (phase_ == Phase::bookmarking && *bookmarking_started_ + config_.bookmarking_ms == p) {
      commit(p, PhaseChange{Phase::discussion, Origin::automatic, "deadline"});
    }
    if (phase_ == Phase::discussion) {
      bool evaluate = false;
      if (next_entropy_ == p) {
        run_entropy_tick(p);
        next_entropy_ = p + config_.termination.interval_ms;
        evaluate = true;
      }
      if (*discussion_started_ + config_.termination.hard_stop_ms == p) evaluate = true;
      if (evaluate) {
        last_decision_ = monitor_->should_terminate(p - *discussion_started_);
        if (last_decision_.stop()) {
          commit(p, PhaseChange{Phase::results, Origin::automatic, last_decision_.reason()});
        }
      }
    }
    if (next_recompute_ == p) {
      const std::uint64_t last = log_.empty() ? 0 : log_.back().seq;
      if (view_.tick != p || view_.last_seq != last) recompute(p);
      next_recompute_ = p + config_.recompute_interval_ms;
    }
  }

  void run_entropy_tick(Millis p) {
    if (roster_.size() < 2) return;
    const auto ids = member_ids();
    const PairMatrix sim = similarity_matrix(ids, ratings_);
    const PairMatrix trust = trust_matrix(ids, ledger_, ratings_, p, config_.trust);
    monitor_->record_tick(trust, sim, p - *discussion_started_);
    entropy_.push_back(monitor_->history().back());
  }

  void recompute(Millis tick) {
    SessionView v;
    v.tick = tick;
    v.last_seq = log_.empty() ? 0 : log_.back().seq;
    v.phase = phase_;
    v.bookmarking_started = bookmarking_started_;
    v.discussion_started = discussion_started_;
    v.results_at = results_at_;
    v.roster = group();
    v.candidates = candidates();
    v.entropy = entropy_;
    v.termination = last_decision_;
    v.proposed = {Algorithm::proposed, tick, std::nullopt, {}, config_.top_k};
    v.baseline = {Algorithm::baseline, tick, std::nullopt, {}, config_.ibgr.k};

    const auto ids = member_ids();
    if (ids.size() >= 2) {
      v.similarity = similarity_matrix(ids, ratings_);
      v.trust = trust_matrix(ids, ledger_, ratings_, tick, config_.trust);
      v.composite =
          composite_matrix(v.similarity, v.trust, config_.lambda1, config_.lambda2).matrix;
      v.influence = leaderrank_scores({v.composite, config_.lambda1, config_.lambda2},
                                      config_.leaderrank);
      v.leader = select_leader(*v.influence);
    } else if (ids.size() == 1) {
      v.influence = InfluenceScores{ids, {1.0}, 0.0, 0, true, 0.0};
      v.leader = ids.front();
    }
    if (!ids.empty()) {
      v.proposed.leader = v.leader;
      auto base = ibgr::group_recommend(ids, ratings_, v.candidates, config_.ibgr, tick);
      v.baseline = base.snapshot;
      if (!v.candidates.empty()) {
        v.proposed_ratings = group_ratings(*v.influence, ratings_, v.candidates);
        v.proposed = top_k(v.proposed_ratings, config_.top_k, Algorithm::proposed, tick, v.leader);
        v.baseline_ratings = std::move(base.group);
      }
    }
    view_ = std::move(v);
    if (on_view_) on_view_(view_);
  }

  SessionConfig config_;
  std::shared_ptr<const SentimentScorer> scorer_;
  std::shared_ptr<const RecipientResolver> resolver_;
  EventObserver on_event_;
  ViewObserver on_view_;

  std::vector<InteractionEvent> log_;
  std::uint64_t next_seq_ = 1;
  Millis now_ = 0;

  Phase phase_ = Phase::lobby;
  std::optional<Millis> bookmarking_started_;
  std::optional<Millis> discussion_started_;
  std::optional<Millis> results_at_;

  std::map<MemberId, std::string> roster_;
  RatingTable ratings_;
  std::map<MemberId, std::set<RestaurantId>> preferred_;
  std::set<RestaurantId> candidates_;
  DirectedMessageLedger ledger_;
  std::map<std::uint64_t, RecipientAssignment> assignments_;
  std::deque<ContextMessage> recent_;

  std::optional<TerminationMonitor> monitor_;
  std::vector<EntropyTick> entropy_;
  TerminationDecision last_decision_;
  std::optional<Millis> next_entropy_;
  Millis next_recompute_ = 0;

  SessionView view_;
};

}  // namespace grouprec

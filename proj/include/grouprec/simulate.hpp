#pragma once

// Synthetic group sessions driven by agent personas.
//
// Persona file (JSON):
//   {"restaurants": ["r01", ...],
//    "personas": [{"member": "u1", "nickname": "ann", "taste": {"r01": 4, ...},
//                  "chattiness": 2.0,            // messages per minute
//                  "agreement_bias": 0.7,        // share of positive messages
//                  "negative_propensity": 0.3,   // weight of negative ratings
//                  "seed": 11}, ...]}
//
// Timeline: everyone joins at 0 and the admin opens bookmarking. Each
// persona bookmarks every restaurant it rates 4 or more at a random time
// inside the bookmarking window; ones it rates 3 are left to be saved from
// other lists during the discussion. The discussion opens on the clock. Each
// persona then acts at Poisson arrival times: mostly chat, sometimes a save
// from another member's list or a negative rating. The run ends when the
// session reaches results or, failing that, with an admin stop at the
// requested duration. Persona decisions depend only on the seed and the
// simulator's own record of what it has issued.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "grouprec/domain.hpp"
#include "grouprec/session.hpp"

namespace grouprec {

struct Persona {
  MemberId member;
  std::string nickname;
  std::map<RestaurantId, int> taste;
  double chattiness = 1.0;
  double agreement_bias = 0.5;
  double negative_propensity = 0.2;
  std::uint64_t seed = 0;
};

struct PersonaFile {
  std::vector<RestaurantId> restaurants;
  std::vector<Persona> personas;
};

inline PersonaFile parse_personas(const nlohmann::json& j) {
  auto fail = [](const std::string& why) { return Error(ErrorKind::parse, "persona file: " + why); };
  if (!j.is_object() || !j.contains("personas") || !j["personas"].is_array())
    throw fail("expected an object with a 'personas' array");
  PersonaFile f;
  try {
    if (j.contains("restaurants"))
      for (const auto& r : j["restaurants"]) f.restaurants.emplace_back(r.get<std::string>());
    for (const auto& p : j["personas"]) {
      Persona x;
      x.member = MemberId{p.at("member").get<std::string>()};
      x.nickname = p.at("nickname").get<std::string>();
      for (const auto& [r, v] : p.at("taste").items()) {
        x.taste[RestaurantId{r}] = validate_rating(v.get<int>());
      }
      x.chattiness = p.value("chattiness", 1.0);
      x.agreement_bias = p.value("agreement_bias", 0.5);
      x.negative_propensity = p.value("negative_propensity", 0.2);
      x.seed = p.value("seed", std::uint64_t{0});
      if (x.chattiness < 0.0) throw fail("chattiness must be >= 0");
      if (x.agreement_bias < 0.0 || x.agreement_bias > 1.0) throw fail("agreement_bias must be in [0, 1]");
      if (x.negative_propensity < 0.0 || x.negative_propensity > 1.0)
        throw fail("negative_propensity must be in [0, 1]");
      f.personas.push_back(std::move(x));
    }
  } catch (const nlohmann::json::exception& e) {
    throw fail(e.what());
  }
  if (f.personas.size() < 2) throw fail("at least two personas are required");
  std::set<RestaurantId> known(f.restaurants.begin(), f.restaurants.end());
  for (const auto& p : f.personas)
    for (const auto& [r, _] : p.taste) known.insert(r);
  f.restaurants.assign(known.begin(), known.end());
  return f;
}

inline PersonaFile load_personas(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open persona file '" + path + "'");
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::parse, "persona file '" + path + "' is not valid JSON");
  return parse_personas(j);
}

/// Anything a simulation can drive: an in-process Session or a service.
class SimulationTarget {
 public:
  virtual ~SimulationTarget() = default;
  virtual void append(Millis at, EventBody body) = 0;
  virtual void advance_to(Millis at) = 0;
  virtual Phase phase() const = 0;
};

class SessionTarget final : public SimulationTarget {
 public:
  explicit SessionTarget(Session& s) : s_(s) {}
  void append(Millis at, EventBody body) override { s_.append(at, std::move(body)); }
  void advance_to(Millis at) override { s_.advance_to(at); }
  Phase phase() const override { return s_.phase(); }

 private:
  Session& s_;
};

struct SimulationOptions {
  Millis duration_ms = 1'800'000;
  std::uint64_t seed = 1;
  Millis bookmarking_ms = 360'000;
};

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
inline double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(u01(rng) * static_cast<double>(n));
}

}  // namespace detail

class Simulator {
 public:
  Simulator(PersonaFile personas, SimulationOptions options)
      : file_(std::move(personas)), opt_(options) {
    for (std::size_t i = 0; i < file_.personas.size(); ++i) {
      rngs_.emplace_back(opt_.seed * 0x9E3779B97F4A7C15ULL ^ (file_.personas[i].seed + 0x632BE59BD9B4E019ULL * (i + 1)));
    }
  }

  void run(SimulationTarget& target) {
    const auto& ps = file_.personas;
    for (const auto& p : ps) target.append(0, Join{p.member, p.nickname});
    target.append(0, PhaseChange{Phase::bookmarking, Origin::admin, "admin"});

    struct Timed {
      Millis at;
      std::size_t persona;
      RestaurantId restaurant;
    };
    std::vector<Timed> bookmarks;
    const Millis window = std::max<Millis>(opt_.bookmarking_ms - 10'000, 1'000);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      for (const auto& [r, v] : ps[i].taste) {
        if (v < 4) continue;
        bookmarks.push_back({1'000 + static_cast<Millis>(detail::u01(rngs_[i]) * static_cast<double>(window - 1'000)), i, r});
      }
    }
    std::stable_sort(bookmarks.begin(), bookmarks.end(),
                     [](const Timed& a, const Timed& b) { return a.at < b.at; });
    for (const auto& b : bookmarks) {
      if (b.at >= opt_.duration_ms) break;
      target.advance_to(b.at);
      if (target.phase() != Phase::bookmarking) break;
      target.append(b.at, Rating{ps[b.persona].member, b.restaurant, ps[b.persona].taste.at(b.restaurant)});
      lists_[ps[b.persona].member].insert(b.restaurant);
      rated_[ps[b.persona].member].insert(b.restaurant);
    }

    const Millis start = opt_.bookmarking_ms;
    if (start < opt_.duration_ms) {
      target.advance_to(start);
      discuss(target, start);
    }
    if (target.phase() != Phase::results) {
      target.advance_to(opt_.duration_ms);
      if (target.phase() == Phase::discussion)
        target.append(opt_.duration_ms, PhaseChange{Phase::results, Origin::admin, "forced"});
    }
  }

 private:
  struct Arrival {
    Millis at;
    std::size_t persona;
  };

  void discuss(SimulationTarget& target, Millis start) {
    const auto& ps = file_.personas;
    std::vector<Arrival> arrivals;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (ps[i].chattiness <= 0.0) continue;
      const double rate_per_ms = ps[i].chattiness / 60'000.0;
      double t = static_cast<double>(start);
      while (true) {
        t += -std::log(1.0 - detail::u01(rngs_[i])) / rate_per_ms;
        if (t >= static_cast<double>(opt_.duration_ms)) break;
        arrivals.push_back({static_cast<Millis>(t), i});
      }
    }
    std::stable_sort(arrivals.begin(), arrivals.end(),
                     [](const Arrival& a, const Arrival& b) { return a.at < b.at; });
    std::optional<std::size_t> last_speaker;
    for (const auto& a : arrivals) {
      target.advance_to(a.at);
      if (target.phase() != Phase::discussion) return;
      act(target, a, last_speaker);
    }
  }

  void act(SimulationTarget& target, const Arrival& a, std::optional<std::size_t>& last_speaker) {
    const auto& ps = file_.personas;
    const Persona& me = ps[a.persona];
    auto& rng = rngs_[a.persona];

    // Restaurants on other lists, split by whether I like them.
    std::vector<std::pair<std::size_t, RestaurantId>> liked, disliked;
    for (std::size_t j = 0; j < ps.size(); ++j) {
      if (j == a.persona) continue;
      for (const auto& r : lists_[ps[j].member]) {
        if (lists_[me.member].contains(r) || rated_[me.member].contains(r)) continue;
        auto t = me.taste.find(r);
        const int taste = t == me.taste.end() ? 2 : t->second;
        (taste >= 3 ? liked : disliked).push_back({j, r});
      }
    }
    const double roll = detail::u01(rng);
    if (!liked.empty() && roll < 0.15) {
      const auto& [src, r] = liked[detail::pick(rng, liked.size())];
      const int v = me.taste.at(r);
      target.append(a.at, SaveEvent{me.member, ps[src].member, r, v});
      lists_[me.member].insert(r);
      rated_[me.member].insert(r);
      return;
    }
    if (!disliked.empty() && roll < 0.15 + 0.3 * me.negative_propensity) {
      const auto& [src, r] = disliked[detail::pick(rng, disliked.size())];
      auto t = me.taste.find(r);
      const int v = t == me.taste.end() ? -3 : -std::clamp(6 - t->second, 1, 5);
      target.append(a.at, Rating{me.member, r, v});
      rated_[me.member].insert(r);
      return;
    }

    // Chat: reply to the last speaker or address someone by name.
    std::size_t to = a.persona;
    if (last_speaker && *last_speaker != a.persona && detail::u01(rng) < 0.7) {
      to = *last_speaker;
    } else {
      double total = 0.0;
      for (std::size_t j = 0; j < ps.size(); ++j)
        if (j != a.persona) total += ps[j].chattiness + 0.1;
      double x = detail::u01(rng) * total;
      for (std::size_t j = 0; j < ps.size(); ++j) {
        if (j == a.persona) continue;
        to = j;
        x -= ps[j].chattiness + 0.1;
        if (x < 0.0) break;
      }
    }
    const bool mention = detail::u01(rng) < 0.5;
    const bool positive = detail::u01(rng) < me.agreement_bias;
    const auto& pool = file_.restaurants;
    const RestaurantId topic = pool.empty() ? RestaurantId{"it"} : pool[detail::pick(rng, pool.size())];
    static const std::vector<std::string> pos{"{r} sounds good", "yes I agree", "great idea",
                                              "I really like {r}", "{r} is delicious", "sure, {r} is fine"};
    static const std::vector<std::string> neg{"not sure about {r}", "no, {r} is bad", "I don't like that",
                                              "{r} is too expensive", "meh, {r} is boring", "I disagree"};
    const auto& templates = positive ? pos : neg;
    std::string text = templates[detail::pick(rng, templates.size())];
    if (auto at = text.find("{r}"); at != std::string::npos) text.replace(at, 3, topic.str());
    if (mention) text = "@" + ps[to].nickname + " " + text;
    ChatMessage m{0, me.member, text, a.at, std::nullopt};
    if (!pool.empty() && detail::u01(rng) < 0.2) m.shared_restaurant = topic;
    target.append(a.at, std::move(m));
    last_speaker = a.persona;
  }

  PersonaFile file_;
  SimulationOptions opt_;
  std::vector<std::mt19937_64> rngs_;
  std::map<MemberId, std::set<RestaurantId>> lists_;
  std::map<MemberId, std::set<RestaurantId>> rated_;
};

/// Runs a simulation against a fresh in-process session.
inline Session simulate_session(const PersonaFile& personas, SimulationOptions options,
                                SessionConfig config = {},
                                std::shared_ptr<const SentimentScorer> scorer = std::make_shared<LexiconScorer>(),
                                std::shared_ptr<const RecipientResolver> resolver =
                                    std::make_shared<HeuristicResolver>()) {
  options.bookmarking_ms = config.bookmarking_ms;
  Session s(std::move(config), std::move(scorer), std::move(resolver));
  SessionTarget target(s);
  Simulator(personas, options).run(target);
  return s;
}

}  // namespace grouprec

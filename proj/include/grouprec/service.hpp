#pragma once

// Hosts many sessions. Each session has one writer (a per-session mutex),
// an append-only log file `<id>.log`, a metadata file `<id>.meta.json`
// with the wall-clock creation time, a published read-only view and a
// bounded push buffer. On construction every session found in the data
// directory is recovered by replaying its log.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "grouprec/config.hpp"
#include "grouprec/event_log.hpp"
#include "grouprec/json_io.hpp"
#include "grouprec/session.hpp"

namespace grouprec {

/// Wall-clock milliseconds since the Unix epoch.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Millis now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Millis now() const override {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
  }
};

class ManualClock final : public Clock {
 public:
  explicit ManualClock(Millis start = 0) : now_(start) {}
  Millis now() const override { return now_.load(); }
  void set(Millis t) { now_.store(t); }
  void advance(Millis dt) { now_.fetch_add(dt); }

 private:
  std::atomic<Millis> now_;
};

struct PushMessage {
  std::uint64_t id = 0;
  std::string kind;  // "event" or "snapshot"
  std::string line;
};

/// Digest line in log style: seq column 0, type `snapshot`.
inline std::string digest_line(const SessionView& v) {
  auto ids = [](const RecommendationSnapshot& r) {
    std::string out;
    for (const auto& it : r.items) {
      if (!out.empty()) out += ',';
      out += it.restaurant.str();
    }
    return out;
  };
  std::string line = "0\t" + std::to_string(v.tick) + "\tsnapshot";
  auto field = [&](std::string_view k, const std::string& val) {
    line += '\t';
    line += k;
    line += '=';
    line += eventlog::encode_value(val);
  };
  field("last_seq", std::to_string(v.last_seq));
  field("phase", std::string(to_string(v.phase)));
  field("leader", v.leader ? v.leader->str() : "");
  field("proposed", ids(v.proposed));
  field("baseline_leader", v.baseline.leader ? v.baseline.leader->str() : "");
  field("baseline", ids(v.baseline));
  field("stop", v.termination.reason());
  return line;
}

class SessionService {
 public:
  static constexpr std::size_t kPushBuffer = 4096;

  SessionService(Config config, std::shared_ptr<const Clock> clock = std::make_shared<SystemClock>())
      : config_(std::move(config)), clock_(std::move(clock)) {
    config_.session.validate();
    scorer_ = config_.make_scorer();
    resolver_ = config_.make_resolver();
    std::filesystem::create_directories(config_.server.data_dir);
    recover();
  }

  ~SessionService() { stop_ticker(); }

  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  const Config& config() const { return config_; }
  const Clock& clock() const { return *clock_; }

  static bool valid_session_id(std::string_view id) {
    if (id.empty() || id.size() > 64) return false;
    for (char c : id) {
      const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '-' || c == '_';
      if (!ok) return false;
    }
    return true;
  }

  /// Creates a session and returns its id. An empty `requested` id picks
  /// the next free `g<N>`.
  std::string create_session(std::string requested = {}) {
    std::unique_lock lock(sessions_mu_);
    if (requested.empty()) {
      do {
        requested = "g" + std::to_string(++id_counter_);
      } while (sessions_.contains(requested) || std::filesystem::exists(log_path(requested)));
    }
    if (!valid_session_id(requested))
      throw Error(ErrorKind::validation, "session id must be 1-64 characters of [A-Za-z0-9_-]");
    if (sessions_.contains(requested))
      throw Error(ErrorKind::validation, "session '" + requested + "' already exists");
    const Millis created = clock_->now();
    {
      std::ofstream meta(meta_path(requested));
      meta << nlohmann::json{{"created_at_ms", created},
                             {"lexicon", scorer_->version()},
                             {"resolver", resolver_->name()}}
                  .dump()
           << '\n';
      if (!meta) throw Error(ErrorKind::io, "cannot write metadata for '" + requested + "'");
    }
    auto host = std::make_shared<Host>(requested, created, Session(config_.session, scorer_, resolver_));
    attach(*host, std::ios::trunc);
    sessions_.emplace(requested, host);
    return requested;
  }

  std::vector<std::string> session_ids() const {
    std::shared_lock lock(sessions_mu_);
    std::vector<std::string> out;
    for (const auto& [id, _] : sessions_) out.push_back(id);
    return out;
  }

  /// Appends an external event stamped with the current clock.
  InteractionEvent append(const std::string& id, EventBody body) {
    auto h = host(id);
    std::lock_guard lock(h->write_mu);
    const auto& e = h->session.append(elapsed(*h), std::move(body));
    return e;
  }

  /// Runs due deadlines and ticks for one session.
  void tick(const std::string& id) {
    auto h = host(id);
    std::lock_guard lock(h->write_mu);
    h->session.advance_to(elapsed(*h));
  }

  void tick_all() {
    for (const auto& id : session_ids()) tick(id);
  }

  std::shared_ptr<const SessionView> snapshot(const std::string& id) const {
    auto h = host(id);
    std::lock_guard lock(h->view_mu);
    return h->view;
  }

  std::vector<InteractionEvent> events(const std::string& id, std::uint64_t after_seq = 0) const {
    auto h = host(id);
    std::lock_guard lock(h->write_mu);
    std::vector<InteractionEvent> out;
    for (const auto& e : h->session.log())
      if (e.seq > after_seq) out.push_back(e);
    return out;
  }

  struct CandidateInfo {
    RestaurantId restaurant;
    std::vector<MemberId> listed_by;
  };

  std::vector<CandidateInfo> candidates(const std::string& id) const {
    auto h = host(id);
    std::lock_guard lock(h->write_mu);
    std::vector<CandidateInfo> out;
    for (const auto& r : h->session.candidates()) {
      CandidateInfo c{r, {}};
      for (const auto& [m, _] : h->session.roster()) {
        if (h->session.preferred(m).contains(r)) c.listed_by.push_back(m);
      }
      out.push_back(std::move(c));
    }
    return out;
  }

  /// Blocks up to `timeout` for push messages with id > `after`.
  std::vector<PushMessage> wait_push(const std::string& id, std::uint64_t after,
                                     std::chrono::milliseconds timeout) const {
    auto h = host(id);
    std::unique_lock lock(h->push_mu);
    h->push_cv.wait_for(lock, timeout, [&] {
      return stopping_.load() || (!h->push.empty() && h->push.back().id > after);
    });
    std::vector<PushMessage> out;
    for (const auto& m : h->push)
      if (m.id > after) out.push_back(m);
    return out;
  }

  std::uint64_t last_push_id(const std::string& id) const {
    auto h = host(id);
    std::lock_guard lock(h->push_mu);
    return h->push.empty() ? 0 : h->push.back().id;
  }

  /// Background thread calling tick_all() every `period`.
  void start_ticker(std::chrono::milliseconds period = std::chrono::milliseconds(200)) {
    if (ticker_.joinable()) return;
    ticker_running_ = true;
    ticker_ = std::thread([this, period] {
      std::unique_lock lock(ticker_mu_);
      while (ticker_running_) {
        ticker_cv_.wait_for(lock, period, [&] { return !ticker_running_; });
        if (!ticker_running_) break;
        lock.unlock();
        try {
          tick_all();
        } catch (const std::exception&) {
          // A failing session must not stop the others from ticking.
        }
        lock.lock();
      }
    });
  }

  void stop_ticker() {
    {
      std::lock_guard lock(ticker_mu_);
      ticker_running_ = false;
    }
    ticker_cv_.notify_all();
    if (ticker_.joinable()) ticker_.join();
  }

  bool stopping() const { return stopping_.load(); }

  /// Wakes blocked push waiters; used on shutdown.
  void shutdown() {
    stopping_ = true;
    std::shared_lock lock(sessions_mu_);
    for (const auto& [_, h] : sessions_) h->push_cv.notify_all();
  }

  std::filesystem::path log_path(const std::string& id) const {
    return std::filesystem::path(config_.server.data_dir) / (id + ".log");
  }
  std::filesystem::path meta_path(const std::string& id) const {
    return std::filesystem::path(config_.server.data_dir) / (id + ".meta.json");
  }

 private:
  struct Host {
    Host(std::string id_, Millis created, Session s)
        : id(std::move(id_)), created_at(created), session(std::move(s)) {}

    std::string id;
    Millis created_at;
    mutable std::mutex write_mu;
    Session session;
    std::ofstream log;

    mutable std::mutex view_mu;
    std::shared_ptr<const SessionView> view;

    mutable std::mutex push_mu;
    mutable std::condition_variable push_cv;
    std::deque<PushMessage> push;
    std::uint64_t next_push = 1;
  };

  std::shared_ptr<Host> host(const std::string& id) const {
    std::shared_lock lock(sessions_mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorKind::unknown_session, "unknown session '" + id + "'");
    return it->second;
  }

  Millis elapsed(const Host& h) const {
    return std::max(clock_->now() - h.created_at, h.session.now());
  }

  static void publish(Host& h, std::string kind, std::string line) {
    {
      std::lock_guard lock(h.push_mu);
      h.push.push_back({h.next_push++, std::move(kind), std::move(line)});
      while (h.push.size() > kPushBuffer) h.push.pop_front();
    }
    h.push_cv.notify_all();
  }

  void attach(Host& h, std::ios::openmode mode) {
    h.log.open(log_path(h.id), std::ios::out | mode);
    if (!h.log) throw Error(ErrorKind::io, "cannot open log for '" + h.id + "'");
    if (mode & std::ios::trunc) {
      h.log << "# grouprec-log lexicon=" << scorer_->version() << " resolver=" << resolver_->name()
            << '\n';
      h.log.flush();
    }
    {
      std::lock_guard lock(h.view_mu);
      h.view = std::make_shared<const SessionView>(h.session.view());
    }
    Host* hp = &h;
    h.session.on_event([hp](const InteractionEvent& e) {
      const auto line = eventlog::encode(e);
      hp->log << line << '\n';
      hp->log.flush();
      if (!hp->log) throw Error(ErrorKind::io, "cannot append to log of '" + hp->id + "'");
      publish(*hp, "event", line);
    });
    h.session.on_view([hp](const SessionView& v) {
      {
        std::lock_guard lock(hp->view_mu);
        hp->view = std::make_shared<const SessionView>(v);
      }
      publish(*hp, "snapshot", digest_line(v));
    });
  }

  void recover() {
    namespace fs = std::filesystem;
    std::vector<fs::path> metas;
    for (const auto& entry : fs::directory_iterator(config_.server.data_dir)) {
      const auto name = entry.path().filename().string();
      if (name.size() > 10 && name.ends_with(".meta.json")) metas.push_back(entry.path());
    }
    std::sort(metas.begin(), metas.end());
    for (const auto& meta : metas) {
      const auto name = meta.filename().string();
      const std::string id = name.substr(0, name.size() - 10);
      if (!valid_session_id(id)) continue;
      std::ifstream mi(meta);
      auto m = nlohmann::json::parse(mi, nullptr, false);
      if (m.is_discarded() || !m.contains("created_at_ms"))
        throw Error(ErrorKind::parse, "bad metadata file " + meta.string());
      if (m.contains("lexicon") && m["lexicon"] != scorer_->version())
        throw Error(ErrorKind::validation, "session '" + id + "' was recorded with lexicon " +
                                               m["lexicon"].get<std::string>() + ", configured " +
                                               scorer_->version());
      std::vector<InteractionEvent> log;
      if (std::ifstream li(log_path(id)); li) log = eventlog::read(li);
      Session s(config_.session, scorer_, resolver_);
      s.replay_into(log);
      auto h = std::make_shared<Host>(id, m["created_at_ms"].get<Millis>(), std::move(s));
      attach(*h, std::ios::app);
      sessions_.emplace(id, h);
      if (id.size() > 1 && id[0] == 'g') {
        try {
          id_counter_ = std::max<std::uint64_t>(id_counter_, std::stoull(id.substr(1)));
        } catch (const std::exception&) {
        }
      }
    }
  }

  Config config_;
  std::shared_ptr<const Clock> clock_;
  std::shared_ptr<const SentimentScorer> scorer_;
  std::shared_ptr<const RecipientResolver> resolver_;

  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Host>> sessions_;
  std::uint64_t id_counter_ = 0;

  std::atomic<bool> stopping_{false};
  std::mutex ticker_mu_;
  std::condition_variable ticker_cv_;
  bool ticker_running_ = false;
  std::thread ticker_;
};

}  // namespace grouprec

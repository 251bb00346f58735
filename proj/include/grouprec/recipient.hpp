#pragma once

// Recipient assignment for chat messages.
//
// HeuristicResolver decision table, first matching rule wins:
//   1. the text names one or more other members by nickname (case
//      insensitive, optional leading '@') -> uniform over those members;
//   2. the dialogue context holds a message from someone other than the
//      sender -> the sender of the newest such message (reply adjacency);
//   3. otherwise -> uniform over every other member (broadcast).

#include <cctype>
#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "grouprec/domain.hpp"

namespace grouprec {

struct ContextMessage {
  MemberId sender;
  std::string text;
  Millis at = 0;
};

/// Previous messages, oldest first.
struct DialogueContext {
  static constexpr std::size_t kDefaultWindow = 5;
  std::vector<ContextMessage> messages;
};

struct GroupMember {
  MemberId id;
  std::string nickname;
};

struct RecipientAssignment {
  std::uint64_t message_id = 0;
  std::map<MemberId, double> weights;
};

class RecipientResolver {
 public:
  virtual ~RecipientResolver() = default;
  virtual RecipientAssignment resolve(const ChatMessage& message, const DialogueContext& ctx,
                                      std::span<const GroupMember> group) const = 0;
  virtual std::string name() const = 0;
};

/// Nicknames are single tokens of ASCII letters, digits, '_' or '-', or
/// any non-ASCII byte.
inline bool is_nickname_char(unsigned char c) {
  return c >= 0x80 || std::isalnum(c) || c == '_' || c == '-';
}

inline bool valid_nickname(std::string_view nick) {
  if (nick.empty()) return false;
  for (char c : nick) {
    if (!is_nickname_char(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline std::set<std::string> mention_tokens(std::string_view text) {
  std::set<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (is_nickname_char(static_cast<unsigned char>(ch))) {
      cur.push_back(ch);
    } else if (!cur.empty()) {
      out.insert(ascii_lower(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.insert(ascii_lower(cur));
  return out;
}

inline RecipientAssignment uniform_assignment(std::uint64_t id, const std::vector<MemberId>& to) {
  RecipientAssignment a{id, {}};
  for (const auto& m : to) a.weights[m] = 1.0 / static_cast<double>(to.size());
  return a;
}

class HeuristicResolver final : public RecipientResolver {
 public:
  RecipientAssignment resolve(const ChatMessage& message, const DialogueContext& ctx,
                              std::span<const GroupMember> group) const override {
    std::vector<MemberId> others;
    for (const auto& m : group) {
      if (m.id != message.sender) others.push_back(m.id);
    }
    if (others.empty()) return {message.id, {}};

    const auto tokens = mention_tokens(message.text);
    std::vector<MemberId> mentioned;
    for (const auto& m : group) {
      if (m.id == message.sender || m.nickname.empty()) continue;
      if (tokens.contains(ascii_lower(m.nickname))) mentioned.push_back(m.id);
    }
    if (!mentioned.empty()) return uniform_assignment(message.id, mentioned);

    for (auto it = ctx.messages.rbegin(); it != ctx.messages.rend(); ++it) {
      if (it->sender == message.sender) continue;
      for (const auto& m : others) {
        if (m == it->sender) return {message.id, {{m, 1.0}}};
      }
    }
    return uniform_assignment(message.id, others);
  }

  std::string name() const override { return "heuristic-v1"; }
};

/// Delegates to a long-running external process. One JSON request line is
/// written per message:
///   {"message":{"id":..,"sender":..,"text":..,"at":..},
///    "context":[{"sender":..,"text":..,"at":..},...],
///    "group":[{"member":..,"nickname":..},...]}
/// and one JSON line is read back: {"weights":{"<member>":<weight>,...}}.
/// Weights for the sender or non-members, negative or non-finite weights,
/// a zero total, I/O failure or a timeout all fall back to `fallback`.
class ExternalResolver final : public RecipientResolver {
 public:
  explicit ExternalResolver(std::string command, int timeout_ms = 2000,
                            std::shared_ptr<const RecipientResolver> fallback =
                                std::make_shared<HeuristicResolver>())
      : command_(std::move(command)), timeout_ms_(timeout_ms), fallback_(std::move(fallback)) {}

  ~ExternalResolver() override { stop(); }

  ExternalResolver(const ExternalResolver&) = delete;
  ExternalResolver& operator=(const ExternalResolver&) = delete;

  RecipientAssignment resolve(const ChatMessage& message, const DialogueContext& ctx,
                              std::span<const GroupMember> group) const override {
    nlohmann::json req;
    req["message"] = {{"id", message.id},
                      {"sender", message.sender.str()},
                      {"text", message.text},
                      {"at", message.at}};
    req["context"] = nlohmann::json::array();
    for (const auto& c : ctx.messages) {
      req["context"].push_back({{"sender", c.sender.str()}, {"text", c.text}, {"at", c.at}});
    }
    req["group"] = nlohmann::json::array();
    for (const auto& m : group) {
      req["group"].push_back({{"member", m.id.str()}, {"nickname", m.nickname}});
    }

    std::string reply;
    {
      std::lock_guard lock(mutex_);
      if (!exchange(req.dump() + "\n", reply)) {
        ++failures_;
        return fallback_->resolve(message, ctx, group);
      }
    }
    auto parsed = parse_reply(reply, message, group);
    if (!parsed) {
      std::lock_guard lock(mutex_);
      ++failures_;
      return fallback_->resolve(message, ctx, group);
    }
    return *parsed;
  }

  std::string name() const override { return "external:" + command_; }

  std::size_t failures() const {
    std::lock_guard lock(mutex_);
    return failures_;
  }

 private:
  static std::optional<RecipientAssignment> parse_reply(const std::string& line,
                                                        const ChatMessage& message,
                                                        std::span<const GroupMember> group) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("weights") ||
        !j["weights"].is_object()) {
      return std::nullopt;
    }
    RecipientAssignment a{message.id, {}};
    double total = 0.0;
    for (const auto& [key, value] : j["weights"].items()) {
      if (!value.is_number()) return std::nullopt;
      const double w = value.get<double>();
      MemberId id{key};
      bool member = false;
      for (const auto& m : group) member = member || m.id == id;
      if (!member || id == message.sender || !std::isfinite(w) || w < 0.0) return std::nullopt;
      if (w > 0.0) a.weights[id] = w;
      total += w;
    }
    if (total <= 0.0) return std::nullopt;
    for (auto& [_, w] : a.weights) w /= total;
    return a;
  }

  bool start() const {
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) return false;
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      return false;
    }
    const pid_t pid = ::fork();
    if (pid < 0) {
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
      return false;
    }
    if (pid == 0) {
      ::setpgid(0, 0);
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::setpgid(pid, pid);
    ::close(to_child[0]);
    ::close(from_child[1]);
    pid_ = pid;
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    buffer_.clear();
    return true;
  }

  void stop() const {
    if (write_fd_ >= 0) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    write_fd_ = read_fd_ = -1;
    if (pid_ > 0) {
      // The shell and anything it started share one process group.
      ::kill(-pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
      pid_ = -1;
    }
  }

  bool exchange(const std::string& request, std::string& reply) const {
    if (pid_ <= 0 && !start()) return false;
    // SIGPIPE from a dead child must not kill the host process.
    std::signal(SIGPIPE, SIG_IGN);
    std::size_t sent = 0;
    while (sent < request.size()) {
      const ssize_t n = ::write(write_fd_, request.data() + sent, request.size() - sent);
      if (n <= 0) {
        if (n < 0 && errno == EINTR) continue;
        stop();
        return false;
      }
      sent += static_cast<std::size_t>(n);
    }
    while (true) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        reply = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return true;
      }
      pollfd pfd{read_fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, timeout_ms_);
      if (ready <= 0) {
        if (ready < 0 && errno == EINTR) continue;
        stop();
        return false;
      }
      char chunk[4096];
      const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n <= 0) {
        if (n < 0 && errno == EINTR) continue;
        stop();
        return false;
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  std::string command_;
  int timeout_ms_;
  std::shared_ptr<const RecipientResolver> fallback_;
  mutable std::mutex mutex_;
  mutable pid_t pid_ = -1;
  mutable int write_fd_ = -1;
  mutable int read_fd_ = -1;
  mutable std::string buffer_;
  mutable std::size_t failures_ = 0;
};

}  // namespace grouprec

#pragma once

// Service and pipeline configuration, read from a JSON file.
//
//   {
//     "server":      {"host": "127.0.0.1", "port": 8080, "data_dir": "sessions",
//                     "credentials": {"<token>": "admin" | "<member id>"}},
//     "trust":       {"alpha": 0.01, "beta1": 0.5, "beta2": 0.5, "gamma1": 0.5, "gamma2": 0.5},
//     "composite":   {"lambda1": 0.5, "lambda2": 0.5},
//     "leaderrank":  {"ground_epsilon": 0.1, "tolerance": 1e-9, "max_iterations": 1000},
//     "ibgr":        {"leader_impact": 1.5, "k": 3},
//     "termination": {"arm_ms": 600000, "hard_stop_ms": 1200000, "epsilon": 0.01,
//                     "consecutive": 3, "window": 3, "interval_ms": 30000},
//     "session":     {"recompute_interval_ms": 5000, "bookmarking_ms": 360000,
//                     "top_k": 3, "context_window": 5},
//     "sentiment":   {"lexicon": "path/to/lexicon.tsv"},
//     "resolver":    {"command": "python3 resolver.py", "timeout_ms": 2000}
//   }
//
// Every key is optional. Unknown keys are rejected. GROUPREC_PORT and
// GROUPREC_DATA_DIR override the server port and data directory.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "grouprec/domain.hpp"
#include "grouprec/recipient.hpp"
#include "grouprec/sentiment.hpp"
#include "grouprec/session.hpp"

namespace grouprec {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "sessions";
  // token -> "admin" or a member id. Empty map disables authentication.
  std::map<std::string, std::string> credentials;
};

struct Config {
  ServerConfig server;
  SessionConfig session;
  std::optional<std::string> lexicon_path;
  std::optional<std::string> resolver_command;
  int resolver_timeout_ms = 2000;

  std::shared_ptr<const SentimentScorer> make_scorer() const {
    if (!lexicon_path) return std::make_shared<LexiconScorer>();
    std::ifstream in(*lexicon_path);
    if (!in) throw Error(ErrorKind::io, "cannot open lexicon '" + *lexicon_path + "'");
    return std::make_shared<LexiconScorer>(SentimentLexicon::parse(in));
  }

  std::shared_ptr<const RecipientResolver> make_resolver() const {
    if (!resolver_command) return std::make_shared<HeuristicResolver>();
    return std::make_shared<ExternalResolver>(*resolver_command, resolver_timeout_ms);
  }
};

namespace detail {

class Section {
 public:
  Section(const nlohmann::json& root, const std::string& name) : name_(name) {
    if (!root.contains(name)) return;
    node_ = &root.at(name);
    if (!node_->is_object()) throw Error(ErrorKind::parse, "config: '" + name + "' must be an object");
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_ || !node_->contains(key)) return;
    try {
      out = node_->at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::parse, "config: '" + name_ + "." + key + "' has the wrong type");
    }
  }

  const nlohmann::json* raw(const std::string& key) {
    seen_.insert(key);
    if (!node_ || !node_->contains(key)) return nullptr;
    return &node_->at(key);
  }

  void finish() const {
    if (!node_) return;
    for (const auto& [k, _] : node_->items()) {
      if (!seen_.contains(k)) throw Error(ErrorKind::parse, "config: unknown key '" + name_ + "." + k + "'");
    }
  }

 private:
  std::string name_;
  const nlohmann::json* node_ = nullptr;
  std::set<std::string> seen_;
};

}  // namespace detail

inline Config parse_config(const nlohmann::json& root) {
  if (!root.is_object()) throw Error(ErrorKind::parse, "config: top level must be an object");
  static const std::set<std::string> sections{"server",      "trust",   "composite", "leaderrank",
                                              "ibgr",        "termination", "session", "sentiment",
                                              "resolver"};
  for (const auto& [k, _] : root.items()) {
    if (!sections.contains(k)) throw Error(ErrorKind::parse, "config: unknown section '" + k + "'");
  }
  Config c;
  auto& s = c.session;

  detail::Section server(root, "server");
  server.read("host", c.server.host);
  server.read("port", c.server.port);
  server.read("data_dir", c.server.data_dir);
  server.read("credentials", c.server.credentials);
  server.finish();

  detail::Section trust(root, "trust");
  trust.read("alpha", s.trust.alpha);
  trust.read("beta1", s.trust.beta1);
  trust.read("beta2", s.trust.beta2);
  trust.read("gamma1", s.trust.gamma1);
  trust.read("gamma2", s.trust.gamma2);
  trust.finish();

  detail::Section composite(root, "composite");
  composite.read("lambda1", s.lambda1);
  composite.read("lambda2", s.lambda2);
  composite.finish();

  detail::Section lr(root, "leaderrank");
  lr.read("ground_epsilon", s.leaderrank.ground_epsilon);
  lr.read("tolerance", s.leaderrank.tolerance);
  lr.read("max_iterations", s.leaderrank.max_iterations);
  lr.finish();

  detail::Section ib(root, "ibgr");
  ib.read("leader_impact", s.ibgr.leader_impact);
  ib.read("k", s.ibgr.k);
  ib.finish();

  detail::Section term(root, "termination");
  term.read("arm_ms", s.termination.arm_ms);
  term.read("hard_stop_ms", s.termination.hard_stop_ms);
  term.read("epsilon", s.termination.epsilon);
  term.read("consecutive", s.termination.consecutive);
  term.read("window", s.termination.window);
  term.read("interval_ms", s.termination.interval_ms);
  term.finish();

  detail::Section sess(root, "session");
  sess.read("recompute_interval_ms", s.recompute_interval_ms);
  sess.read("bookmarking_ms", s.bookmarking_ms);
  sess.read("top_k", s.top_k);
  sess.read("context_window", s.context_window);
  sess.finish();

  detail::Section sent(root, "sentiment");
  if (const auto* p = sent.raw("lexicon")) {
    if (!p->is_string()) throw Error(ErrorKind::parse, "config: 'sentiment.lexicon' must be a path");
    c.lexicon_path = p->get<std::string>();
  }
  sent.finish();

  detail::Section res(root, "resolver");
  if (const auto* p = res.raw("command")) {
    if (!p->is_string()) throw Error(ErrorKind::parse, "config: 'resolver.command' must be a string");
    c.resolver_command = p->get<std::string>();
  }
  res.read("timeout_ms", c.resolver_timeout_ms);
  res.finish();

  if (std::abs(s.lambda1 + s.lambda2 - 1.0) > 1e-12)
    throw Error(ErrorKind::validation, "lambda1 + lambda2 must equal 1");
  if (c.server.port < 0 || c.server.port > 65535)
    throw Error(ErrorKind::validation, "port out of range");
  s.validate();
  return c;
}

inline void apply_env_overrides(Config& c) {
  if (const char* port = std::getenv("GROUPREC_PORT"); port && *port) {
    try {
      c.server.port = std::stoi(port);
    } catch (const std::exception&) {
      throw Error(ErrorKind::validation, std::string("GROUPREC_PORT is not a number: ") + port);
    }
  }
  if (const char* dir = std::getenv("GROUPREC_DATA_DIR"); dir && *dir) c.server.data_dir = dir;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config '" + path + "'");
  nlohmann::json root = nlohmann::json::parse(in, nullptr, false);
  if (root.is_discarded()) throw Error(ErrorKind::parse, "config '" + path + "' is not valid JSON");
  return parse_config(root);
}

}  // namespace grouprec

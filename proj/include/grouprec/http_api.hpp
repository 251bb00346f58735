#pragma once

// HTTP binding of SessionService. Request and response bodies are JSON.
//
//   POST /sessions                        {"id"?}                     -> {"id"}
//   POST /sessions/{id}/join              {"member","nickname"}
//   POST /sessions/{id}/rate              {"member","restaurant","value" 1..5}
//   POST /sessions/{id}/negative          {"member","restaurant","value" -5..-1}
//   POST /sessions/{id}/save              {"saver","source","restaurant","value"}
//   POST /sessions/{id}/chat              {"sender","text","share"?}
//   POST /sessions/{id}/admin/phase       {"phase"}
//   POST /sessions/{id}/admin/stop
//   GET  /sessions                                                   -> ["id", ...]
//   GET  /sessions/{id}/snapshot
//   GET  /sessions/{id}/candidates
//   GET  /sessions/{id}/log?after=SEQ     text/plain log lines
//   GET  /sessions/{id}/stream?after=N    text/event-stream
//
// Event posts answer {"seq","at","type"}. Errors answer {"error","message"}
// with 400 (bad request body), 401/403 (credentials), 404 (unknown
// session), 409 (phase violation) or 422 (validation, unknown member).
// The stream sends `event: event` frames whose data is a log line and
// `event: snapshot` frames whose data is a digest line; frame ids allow
// resuming with `after` or Last-Event-ID.

#include <chrono>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "grouprec/json_io.hpp"
#include "grouprec/service.hpp"

namespace grouprec {

inline int http_status(ErrorKind k) {
  switch (k) {
    case ErrorKind::unknown_session: return 404;
    case ErrorKind::phase_violation:
    case ErrorKind::out_of_order: return 409;
    case ErrorKind::validation:
    case ErrorKind::unknown_member:
    case ErrorKind::out_of_range: return 422;
    case ErrorKind::parse: return 400;
    case ErrorKind::io:
    case ErrorKind::dimension_mismatch: return 500;
  }
  return 500;
}

class HttpApi {
 public:
  explicit HttpApi(SessionService& service) : service_(service) { routes(); }

  httplib::Server& server() { return server_; }

  /// Binds and serves until stop(). Port 0 picks a free port.
  bool listen(const std::string& host, int port) {
    if (port == 0) {
      port_ = server_.bind_to_any_port(host);
      if (port_ < 0) return false;
      return server_.listen_after_bind();
    }
    port_ = port;
    return server_.listen(host, port);
  }

  int bind_any(const std::string& host) { return port_ = server_.bind_to_any_port(host); }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  int port() const { return port_; }

  void stop() {
    service_.shutdown();
    server_.stop();
  }

 private:
  struct HttpError {
    int status;
    std::string message;
  };

  static void reply(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static Json body_of(const httplib::Request& req) {
    if (req.body.empty()) return Json::object();
    Json j = Json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw HttpError{400, "request body must be a JSON object"};
    return j;
  }

  static std::string str(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw HttpError{400, std::string("missing string field '") + key + "'"};
    return j[key].get<std::string>();
  }

  static int integer(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer())
      throw HttpError{400, std::string("missing integer field '") + key + "'"};
    return j[key].get<int>();
  }

  /// `member` empty means an admin action.
  void authorize(const httplib::Request& req, const std::string& member) const {
    const auto& creds = service_.config().server.credentials;
    if (creds.empty()) return;
    const auto auth = req.get_header_value("Authorization");
    const std::string prefix = "Bearer ";
    if (auth.rfind(prefix, 0) != 0) throw HttpError{401, "missing bearer token"};
    auto it = creds.find(auth.substr(prefix.size()));
    if (it == creds.end()) throw HttpError{401, "unknown token"};
    if (it->second == "admin") return;
    if (member.empty() || it->second != member) throw HttpError{403, "token does not permit this action"};
  }

  template <typename F>
  auto guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const HttpError& e) {
        reply(res, e.status, {{"error", "request"}, {"message", e.message}});
      } catch (const Error& e) {
        reply(res, http_status(e.kind()), {{"error", std::string(to_string(e.kind()))}, {"message", e.what()}});
      } catch (const std::exception& e) {
        reply(res, 500, {{"error", "internal"}, {"message", e.what()}});
      }
    };
  }

  void post_event(const char* pattern, std::function<std::pair<std::string, EventBody>(const Json&)> make) {
    server_.Post(pattern, guarded([this, make](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      auto [actor, body] = make(body_of(req));
      authorize(req, actor);
      const auto e = service_.append(id, std::move(body));
      reply(res, 200, {{"seq", e.seq}, {"at", e.at}, {"type", std::string(eventlog::type_tag(e.body))}});
    }));
  }

  void routes() {
    server_.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      authorize(req, "");
      const Json b = body_of(req);
      const std::string id = service_.create_session(b.contains("id") ? str(b, "id") : std::string{});
      reply(res, 201, {{"id", id}});
    }));
    server_.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, service_.session_ids());
    }));

    post_event(R"(/sessions/([A-Za-z0-9_-]+)/join)", [](const Json& b) {
      const auto m = str(b, "member");
      return std::pair<std::string, EventBody>{m, Join{MemberId{m}, str(b, "nickname")}};
    });
    post_event(R"(/sessions/([A-Za-z0-9_-]+)/rate)", [](const Json& b) {
      const auto m = str(b, "member");
      const int v = integer(b, "value");
      if (v < 1 || v > 5) throw Error(ErrorKind::out_of_range, "rating must be in 1..5");
      return std::pair<std::string, EventBody>{m, Rating{MemberId{m}, RestaurantId{str(b, "restaurant")}, v}};
    });
    post_event(R"(/sessions/([A-Za-z0-9_-]+)/negative)", [](const Json& b) {
      const auto m = str(b, "member");
      const int v = integer(b, "value");
      if (v < -5 || v > -1) throw Error(ErrorKind::out_of_range, "negative rating must be in -5..-1");
      return std::pair<std::string, EventBody>{m, Rating{MemberId{m}, RestaurantId{str(b, "restaurant")}, v}};
    });
    post_event(R"(/sessions/([A-Za-z0-9_-]+)/save)", [](const Json& b) {
      const auto m = str(b, "saver");
      return std::pair<std::string, EventBody>{
          m, SaveEvent{MemberId{m}, MemberId{str(b, "source")}, RestaurantId{str(b, "restaurant")},
                       integer(b, "value")}};
    });
    post_event(R"(/sessions/([A-Za-z0-9_-]+)/chat)", [](const Json& b) {
      const auto m = str(b, "sender");
      ChatMessage c{0, MemberId{m}, b.contains("text") ? str(b, "text") : std::string{}, 0, std::nullopt};
      if (b.contains("share") && !b["share"].is_null()) c.shared_restaurant = RestaurantId{str(b, "share")};
      return std::pair<std::string, EventBody>{m, std::move(c)};
    });
    post_event(R"(/sessions/([A-Za-z0-9_-]+)/admin/phase)", [](const Json& b) {
      const auto p = parse_phase(str(b, "phase"));
      if (!p) throw HttpError{400, "unknown phase"};
      return std::pair<std::string, EventBody>{"", PhaseChange{*p, Origin::admin, "admin"}};
    });
    post_event(R"(/sessions/([A-Za-z0-9_-]+)/admin/stop)", [](const Json&) {
      return std::pair<std::string, EventBody>{"", PhaseChange{Phase::results, Origin::admin, "forced"}};
    });

    server_.Get(R"(/sessions/([A-Za-z0-9_-]+)/snapshot)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  reply(res, 200, to_json(*service_.snapshot(req.matches[1])));
                }));
    server_.Get(R"(/sessions/([A-Za-z0-9_-]+)/candidates)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  Json out = Json::array();
                  for (const auto& c : service_.candidates(req.matches[1])) {
                    Json by = Json::array();
                    for (const auto& m : c.listed_by) by.push_back(m.str());
                    out.push_back({{"restaurant", c.restaurant.str()}, {"listed_by", std::move(by)}});
                  }
                  reply(res, 200, out);
                }));
    server_.Get(R"(/sessions/([A-Za-z0-9_-]+)/log)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  std::uint64_t after = 0;
                  if (req.has_param("after")) after = parse_u64(req.get_param_value("after"));
                  std::string body;
                  for (const auto& e : service_.events(req.matches[1], after)) body += eventlog::encode(e) + "\n";
                  res.set_content(body, "text/plain; charset=utf-8");
                }));
    server_.Get(R"(/sessions/([A-Za-z0-9_-]+)/stream)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string id = req.matches[1];
                  std::uint64_t after = 0;
                  if (req.has_param("after")) after = parse_u64(req.get_param_value("after"));
                  else if (req.has_header("Last-Event-ID")) after = parse_u64(req.get_header_value("Last-Event-ID"));
                  service_.last_push_id(id);  // 404 before streaming starts
                  res.set_chunked_content_provider(
                      "text/event-stream", [this, id, after](std::size_t, httplib::DataSink& sink) mutable {
                        if (!sink.is_writable() || service_.stopping()) return false;
                        const auto msgs = service_.wait_push(id, after, std::chrono::milliseconds(500));
                        std::string frames;
                        for (const auto& m : msgs) {
                          frames += "id: " + std::to_string(m.id) + "\nevent: " + m.kind + "\ndata: " + m.line + "\n\n";
                          after = m.id;
                        }
                        if (frames.empty()) frames = ": keep-alive\n\n";
                        return sink.write(frames.data(), frames.size());
                      });
                }));
  }

  static std::uint64_t parse_u64(const std::string& s) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(s, &used);
      if (used != s.size()) throw HttpError{400, "bad integer '" + s + "'"};
      return v;
    } catch (const std::logic_error&) {
      throw HttpError{400, "bad integer '" + s + "'"};
    }
  }

  SessionService& service_;
  httplib::Server server_;
  int port_ = -1;
};

}  // namespace grouprec

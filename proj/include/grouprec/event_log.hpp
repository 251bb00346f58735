#pragma once

// Event-log line format:
//
//   seq<TAB>timestamp_ms<TAB>type<TAB>key=value<TAB>key=value...
//
// Keys and their order are fixed per type:
//   join   member, nickname
//   rate   member, restaurant, value
//   save   saver, source, restaurant, value
//   chat   sender, text, share          (share empty when nothing shared)
//   phase  phase, by, reason            (by is admin or auto)
// Values are UTF-8 with '%', TAB, LF and CR percent-encoded. Lines starting
// with '#' and blank lines are ignored by the reader.

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "grouprec/domain.hpp"

namespace grouprec::eventlog {

inline std::string encode_value(std::string_view v) {
  std::string out;
  out.reserve(v.size());
  for (char c : v) {
    switch (c) {
      case '%': out += "%25"; break;
      case '\t': out += "%09"; break;
      case '\n': out += "%0A"; break;
      case '\r': out += "%0D"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::optional<std::string> decode_value(std::string_view v) {
  std::string out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != '%') {
      out += v[i];
      continue;
    }
    if (i + 2 >= v.size()) return std::nullopt;
    unsigned code = 0;
    auto [p, ec] = std::from_chars(v.data() + i + 1, v.data() + i + 3, code, 16);
    if (ec != std::errc{} || p != v.data() + i + 3) return std::nullopt;
    out += static_cast<char>(code);
    i += 2;
  }
  return out;
}

inline std::string_view type_tag(const EventBody& body) {
  struct Visitor {
    std::string_view operator()(const Join&) const { return "join"; }
    std::string_view operator()(const Rating&) const { return "rate"; }
    std::string_view operator()(const SaveEvent&) const { return "save"; }
    std::string_view operator()(const ChatMessage&) const { return "chat"; }
    std::string_view operator()(const PhaseChange&) const { return "phase"; }
  };
  return std::visit(Visitor{}, body);
}

inline std::vector<std::pair<std::string, std::string>> payload_fields(const EventBody& body) {
  struct Visitor {
    using Fields = std::vector<std::pair<std::string, std::string>>;
    Fields operator()(const Join& e) const {
      return {{"member", e.member.str()}, {"nickname", e.nickname}};
    }
    Fields operator()(const Rating& e) const {
      return {{"member", e.member.str()},
              {"restaurant", e.restaurant.str()},
              {"value", std::to_string(e.value)}};
    }
    Fields operator()(const SaveEvent& e) const {
      return {{"saver", e.saver.str()},
              {"source", e.source.str()},
              {"restaurant", e.restaurant.str()},
              {"value", std::to_string(e.rating)}};
    }
    Fields operator()(const ChatMessage& e) const {
      return {{"sender", e.sender.str()},
              {"text", e.text},
              {"share", e.shared_restaurant ? e.shared_restaurant->str() : std::string{}}};
    }
    Fields operator()(const PhaseChange& e) const {
      return {{"phase", std::string(to_string(e.phase))},
              {"by", e.origin == Origin::admin ? "admin" : "auto"},
              {"reason", e.reason}};
    }
  };
  return std::visit(Visitor{}, body);
}

inline std::string encode_payload(const EventBody& body) {
  std::string out;
  for (const auto& [k, v] : payload_fields(body)) {
    if (!out.empty()) out += '\t';
    out += k;
    out += '=';
    out += encode_value(v);
  }
  return out;
}

/// One log line without the trailing newline.
inline std::string encode(const InteractionEvent& e) {
  std::string out = std::to_string(e.seq);
  out += '\t';
  out += std::to_string(e.at);
  out += '\t';
  out += type_tag(e.body);
  out += '\t';
  out += encode_payload(e.body);
  return out;
}

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos
                                                                   : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace detail

/// Parses one line. Errors name `line_no`.
inline InteractionEvent decode(std::string_view line, std::size_t line_no) {
  auto fail = [&](const std::string& why) -> Error {
    return Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": " + why);
  };
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto cols = detail::split_tabs(line);
  if (cols.size() < 3) throw fail("expected seq, timestamp and type columns");
  InteractionEvent e;
  if (!detail::parse_int(cols[0], e.seq)) throw fail("bad sequence number '" + std::string(cols[0]) + "'");
  if (!detail::parse_int(cols[1], e.at) || e.at < 0)
    throw fail("bad timestamp '" + std::string(cols[1]) + "'");
  const std::string_view type = cols[2];

  std::vector<std::string> values;
  auto expect = [&](std::initializer_list<std::string_view> keys) {
    if (cols.size() - 3 != keys.size()) {
      throw fail("type '" + std::string(type) + "' expects " + std::to_string(keys.size()) +
                 " fields, got " + std::to_string(cols.size() - 3));
    }
    std::size_t i = 3;
    for (auto key : keys) {
      const auto field = cols[i++];
      const auto eq = field.find('=');
      if (eq == std::string_view::npos || field.substr(0, eq) != key) {
        throw fail("expected field '" + std::string(key) + "', got '" + std::string(field) + "'");
      }
      auto v = decode_value(field.substr(eq + 1));
      if (!v) throw fail("bad percent-encoding in field '" + std::string(key) + "'");
      values.push_back(std::move(*v));
    }
  };
  auto integer = [&](const std::string& s, std::string_view key) {
    int v = 0;
    if (!detail::parse_int(s, v)) throw fail("field '" + std::string(key) + "' is not an integer");
    return v;
  };

  if (type == "join") {
    expect({"member", "nickname"});
    e.body = Join{MemberId{values[0]}, values[1]};
  } else if (type == "rate") {
    expect({"member", "restaurant", "value"});
    e.body = Rating{MemberId{values[0]}, RestaurantId{values[1]}, integer(values[2], "value")};
  } else if (type == "save") {
    expect({"saver", "source", "restaurant", "value"});
    e.body = SaveEvent{MemberId{values[0]}, MemberId{values[1]}, RestaurantId{values[2]},
                       integer(values[3], "value")};
  } else if (type == "chat") {
    expect({"sender", "text", "share"});
    ChatMessage m{e.seq, MemberId{values[0]}, values[1], e.at, std::nullopt};
    if (!values[2].empty()) m.shared_restaurant = RestaurantId{values[2]};
    e.body = std::move(m);
  } else if (type == "phase") {
    expect({"phase", "by", "reason"});
    auto phase = parse_phase(values[0]);
    if (!phase) throw fail("unknown phase '" + values[0] + "'");
    if (values[1] != "admin" && values[1] != "auto") throw fail("unknown origin '" + values[1] + "'");
    e.body = PhaseChange{*phase, values[1] == "admin" ? Origin::admin : Origin::automatic, values[2]};
  } else {
    throw fail("unknown event type '" + std::string(type) + "'");
  }
  return e;
}

inline std::vector<InteractionEvent> read(std::istream& in) {
  std::vector<InteractionEvent> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    auto e = decode(line, line_no);
    if (!out.empty()) {
      if (e.seq <= out.back().seq)
        throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": sequence number not increasing");
      if (e.at < out.back().at)
        throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": timestamp goes backwards");
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline void write(std::ostream& out, std::span<const InteractionEvent> events) {
  for (const auto& e : events) out << encode(e) << '\n';
}

}  // namespace grouprec::eventlog

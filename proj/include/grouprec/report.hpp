#pragma once

// Batch replay and comparison reports.
//
// A replay report is one JSON document with sorted keys. The text form
// flattens it to `path = value` lines with doubles printed to 9 decimals,
// so golden files diff line by line.

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "grouprec/config.hpp"
#include "grouprec/event_log.hpp"
#include "grouprec/json_io.hpp"
#include "grouprec/session.hpp"

namespace grouprec {

/// `key=value` pairs from `# ...` comment lines of a log.
inline std::map<std::string, std::string> log_header(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] != '#') continue;
    std::istringstream words(line.substr(1));
    std::string w;
    while (words >> w) {
      const auto eq = w.find('=');
      if (eq != std::string::npos && eq > 0) out[w.substr(0, eq)] = w.substr(eq + 1);
    }
  }
  return out;
}

struct ReplayRun {
  Session session;
  std::vector<SessionView> views;
};

inline ReplayRun replay_events(std::span<const InteractionEvent> events, const Config& config) {
  std::vector<SessionView> views;
  Session s = Session::replay(events, config.session, config.make_scorer(), config.make_resolver(),
                              [&views](const SessionView& v) { views.push_back(v); });
  return {std::move(s), std::move(views)};
}

inline ReplayRun replay_file(const std::string& path, const Config& config) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open log '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  {
    std::istringstream hs(text);
    const auto header = log_header(hs);
    const auto lexicon = config.make_scorer()->version();
    if (auto it = header.find("lexicon"); it != header.end() && it->second != lexicon) {
      throw Error(ErrorKind::validation,
                  "log was recorded with lexicon " + it->second + " but " + lexicon + " is configured");
    }
  }
  std::istringstream es(text);
  const auto events = eventlog::read(es);
  return replay_events(events, config);
}

inline Json replay_report(const ReplayRun& run) {
  Json leaders = Json::array();
  std::optional<MemberId> last_p;
  std::optional<MemberId> last_b;
  bool first = true;
  for (const auto& v : run.views) {
    if (!first && v.leader == last_p && v.baseline.leader == last_b) continue;
    first = false;
    last_p = v.leader;
    last_b = v.baseline.leader;
    leaders.push_back({{"tick", v.tick},
                       {"proposed", v.leader ? Json(v.leader->str()) : Json(nullptr)},
                       {"baseline", v.baseline.leader ? Json(v.baseline.leader->str()) : Json(nullptr)}});
  }
  return {{"events", run.session.log().size()},
          {"lexicon", run.session.scorer().version()},
          {"resolver", run.session.resolver().name()},
          {"final", to_json(run.session.view())},
          {"leader_changes", std::move(leaders)}};
}

/// Spearman correlation of two rankings over their common items; null
/// when fewer than two items are shared.
inline Json rank_correlation(const std::vector<RankedItem>& a, const std::vector<RankedItem>& b) {
  std::map<RestaurantId, double> ra;
  for (std::size_t i = 0; i < a.size(); ++i) ra[a[i].restaurant] = static_cast<double>(i);
  std::vector<std::pair<double, double>> pairs;
  std::size_t j = 0;
  for (const auto& it : b) {
    auto f = ra.find(it.restaurant);
    if (f != ra.end()) pairs.push_back({f->second, static_cast<double>(j)});
    ++j;
  }
  const auto n = static_cast<double>(pairs.size());
  if (pairs.size() < 2) return nullptr;
  // Re-rank within the common subset.
  std::vector<double> xs, ys;
  for (auto& p : pairs) {
    xs.push_back(p.first);
    ys.push_back(p.second);
  }
  auto dense = [](std::vector<double> v) {
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (auto& x : v) x = static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
    return v;
  };
  xs = dense(xs);
  ys = dense(ys);
  double d2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) d2 += (xs[i] - ys[i]) * (xs[i] - ys[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

inline Json compare_row(const SessionView& v) {
  auto ids = [](const RecommendationSnapshot& r) {
    Json out = Json::array();
    for (const auto& it : r.items) out.push_back(it.restaurant.str());
    return out;
  };
  std::size_t overlap = 0;
  for (const auto& p : v.proposed.items)
    for (const auto& b : v.baseline.items)
      if (p.restaurant == b.restaurant) ++overlap;
  const auto leader = v.leader ? Json(v.leader->str()) : Json(nullptr);
  const auto base_leader = v.baseline.leader ? Json(v.baseline.leader->str()) : Json(nullptr);
  return {{"tick", v.tick},
          {"last_seq", v.last_seq},
          {"phase", std::string(to_string(v.phase))},
          {"proposed_leader", leader},
          {"baseline_leader", base_leader},
          {"leaders_agree", leader == base_leader},
          {"proposed_top", ids(v.proposed)},
          {"baseline_top", ids(v.baseline)},
          {"top_k_overlap", overlap},
          {"rank_correlation", rank_correlation(rank_all(v.proposed_ratings), rank_all(v.baseline_ratings))}};
}

inline Json compare_report(const ReplayRun& run) {
  Json rows = Json::array();
  for (const auto& v : run.views) rows.push_back(compare_row(v));
  return {{"rows", std::move(rows)}};
}

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", x);
  std::string s = buf;
  if (s == "-0.000000000") s = "0.000000000";
  return s;
}

inline std::string format_scalar(const Json& j) {
  if (j.is_number_float()) return format_double(j.get<double>());
  return j.dump();
}

inline void flatten(const Json& j, const std::string& path, std::string& out) {
  if (j.is_object()) {
    if (j.empty()) out += path + " = {}\n";
    for (const auto& [k, v] : j.items()) flatten(v, path.empty() ? k : path + "." + k, out);
  } else if (j.is_array()) {
    if (j.empty()) out += path + " = []\n";
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], path + "[" + std::to_string(i) + "]", out);
  } else {
    out += path + " = " + format_scalar(j) + "\n";
  }
}

inline std::string render_text(const Json& report) {
  std::string out;
  flatten(report, "", out);
  return out;
}

inline std::string render_compare_text(const Json& report) {
  auto cell = [](const Json& j) -> std::string {
    if (j.is_null()) return "-";
    if (j.is_string()) return j.get<std::string>();
    if (j.is_boolean()) return j.get<bool>() ? "yes" : "no";
    if (j.is_number_float()) return format_double(j.get<double>());
    if (j.is_array()) {
      std::string s;
      for (const auto& x : j) s += (s.empty() ? "" : ",") + x.get<std::string>();
      return s.empty() ? "-" : s;
    }
    return j.dump();
  };
  std::string out =
      "tick_ms\tseq\tphase\tproposed_leader\tbaseline_leader\tagree\tproposed_top\tbaseline_top\toverlap\tspearman\n";
  for (const auto& r : report["rows"]) {
    out += cell(r["tick"]) + "\t" + cell(r["last_seq"]) + "\t" + cell(r["phase"]) + "\t" +
           cell(r["proposed_leader"]) + "\t" + cell(r["baseline_leader"]) + "\t" + cell(r["leaders_agree"]) +
           "\t" + cell(r["proposed_top"]) + "\t" + cell(r["baseline_top"]) + "\t" + cell(r["top_k_overlap"]) +
           "\t" + cell(r["rank_correlation"]) + "\n";
  }
  return out;
}

}  // namespace grouprec

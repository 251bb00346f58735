#pragma once

// Lexicon-based compound sentiment in [-1, 1].
//
// Scoring rule of LexiconScorer:
//   * text is split into tokens (ASCII letters/digits, apostrophes and any
//     non-ASCII byte), ASCII-lowercased;
//   * each token with a lexicon valence v contributes v, multiplied by the
//     intensifier factor of the token immediately before it (if any) and
//     negated when a negation term occurs among the three tokens before it;
//   * the contributions are summed to s and mapped to s / sqrt(s^2 + 15).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "grouprec/domain.hpp"

namespace grouprec {

struct SentimentScore {
  double compound = 0.0;
};

class SentimentScorer {
 public:
  virtual ~SentimentScorer() = default;
  virtual SentimentScore score(std::string_view text) const = 0;
  virtual std::string version() const = 0;
};

struct SentimentLexicon {
  std::string version;
  std::map<std::string, double> valence;
  std::map<std::string, double> intensifiers;
  std::set<std::string> negations;

  friend bool operator==(const SentimentLexicon&, const SentimentLexicon&) = default;

  /// Line format: `term<TAB>value`, grouped under `[meta]`, `[valence]`,
  /// `[intensifiers]` and `[negations]` headers (negations carry no value).
  /// `#` starts a comment line. Lines before any header are valence terms.
  static SentimentLexicon parse(std::istream& in) {
    SentimentLexicon lex;
    std::string section = "valence";
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      if (line.front() == '[' && line.back() == ']') {
        section = line.substr(1, line.size() - 2);
        if (section != "meta" && section != "valence" && section != "intensifiers" &&
            section != "negations") {
          throw Error(ErrorKind::parse, "lexicon line " + std::to_string(line_no) +
                                            ": unknown section " + section);
        }
        continue;
      }
      const auto tab = line.find('\t');
      const std::string term = lower(line.substr(0, tab));
      const std::string value = tab == std::string::npos ? "" : line.substr(tab + 1);
      if (term.empty()) {
        throw Error(ErrorKind::parse, "lexicon line " + std::to_string(line_no) + ": empty term");
      }
      if (section == "negations") {
        lex.negations.insert(term);
        continue;
      }
      if (section == "meta") {
        if (term == "version") lex.version = value;
        continue;
      }
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw Error(ErrorKind::parse, "lexicon line " + std::to_string(line_no) +
                                          ": bad value '" + value + "'");
      }
      (section == "valence" ? lex.valence : lex.intensifiers)[term] = v;
    }
    if (lex.version.empty()) lex.version = "unversioned";
    return lex;
  }

  static SentimentLexicon parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse(in);
  }

  /// The mini lexicon shipped with the project (also in data/lexicon/mini.tsv).
  static const SentimentLexicon& builtin();

  static std::string lower(std::string s) {
    for (auto& c : s) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return s;
  }
};

inline constexpr std::string_view kBuiltinLexicon = R"(# grouprec mini lexicon
[meta]
version	mini-1
[valence]
agree	1.5
amazing	2.8
awesome	3.1
best	3.2
cool	1.3
delicious	2.9
excellent	2.7
fantastic	2.6
fine	0.8
fun	2.3
glad	2.0
good	1.9
great	3.1
happy	2.7
interesting	1.7
like	2.0
love	3.2
nice	1.8
ok	0.9
okay	0.9
perfect	2.7
please	1.3
sure	1.3
tasty	2.4
thanks	1.9
wonderful	2.7
yes	1.7
yummy	2.5
annoying	-1.7
awful	-2.0
bad	-2.5
bland	-1.0
boring	-1.3
disagree	-1.6
disgusting	-2.4
dislike	-1.6
expensive	-0.9
far	-0.4
gross	-2.1
hate	-2.7
horrible	-2.5
meh	-0.7
noisy	-1.0
overpriced	-1.5
sad	-2.1
slow	-0.9
terrible	-2.5
worse	-2.1
worst	-3.1
wrong	-2.1
[intensifiers]
extremely	1.5
really	1.3
so	1.2
super	1.3
very	1.3
kinda	0.8
slightly	0.7
somewhat	0.8
[negations]
not
no
never
nothing
nobody
neither
nor
cannot
can't
cant
don't
dont
doesn't
doesnt
didn't
didnt
isn't
isnt
wasn't
wasnt
won't
wont
)";

inline const SentimentLexicon& SentimentLexicon::builtin() {
  static const SentimentLexicon lex = parse(kBuiltinLexicon);
  return lex;
}

/// Lowercased tokens; apostrophes inside words are kept ("don't").
inline std::vector<std::string> sentiment_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && cur.front() == '\'') cur.erase(cur.begin());
    while (!cur.empty() && cur.back() == '\'') cur.pop_back();
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || std::isalnum(c) || c == '\'') {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else {
      flush();
    }
  }
  flush();
  return out;
}

class LexiconScorer final : public SentimentScorer {
 public:
  static constexpr double kNormalization = 15.0;
  static constexpr std::size_t kNegationWindow = 3;

  explicit LexiconScorer(SentimentLexicon lexicon = SentimentLexicon::builtin())
      : lexicon_(std::move(lexicon)) {}

  SentimentScore score(std::string_view text) const override {
    const auto tokens = sentiment_tokens(text);
    double sum = 0.0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      auto v = lexicon_.valence.find(tokens[i]);
      if (v == lexicon_.valence.end()) continue;
      double contribution = v->second;
      if (i > 0) {
        if (auto m = lexicon_.intensifiers.find(tokens[i - 1]); m != lexicon_.intensifiers.end())
          contribution *= m->second;
      }
      const std::size_t from = i >= kNegationWindow ? i - kNegationWindow : 0;
      for (std::size_t j = from; j < i; ++j) {
        if (lexicon_.negations.contains(tokens[j])) {
          contribution = -contribution;
          break;
        }
      }
      sum += contribution;
    }
    if (sum == 0.0) return {0.0};
    return {std::clamp(sum / std::sqrt(sum * sum + kNormalization), -1.0, 1.0)};
  }

  std::string version() const override { return lexicon_.version; }

  const SentimentLexicon& lexicon() const { return lexicon_; }

 private:
  SentimentLexicon lexicon_;
};

}  // namespace grouprec

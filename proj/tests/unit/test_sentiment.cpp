#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "grouprec/sentiment.hpp"
#include "support/oracle.hpp"

using namespace grouprec;

TEST(Sentiment, EmptyAndUnknownTextScoreZero) {
  LexiconScorer s;
  EXPECT_EQ(s.score("").compound, 0.0);
  EXPECT_EQ(s.score("zorp blim 42").compound, 0.0);
}

TEST(Sentiment, AllPositiveTermsScorePositive) {
  LexiconScorer s;
  EXPECT_GT(s.score("great amazing delicious").compound, 0.0);
}

TEST(Sentiment, NegationMatchesDeskEvaluation) {
  // good = 1.9, negated: -1.9 / sqrt(1.9^2 + 15)
  LexiconScorer s;
  const auto d = oracle::load_fixture("derived_values.json");
  EXPECT_NEAR(s.score("not good").compound, d["sentiment_not_good"].get<double>(), 1e-12);
  EXPECT_NEAR(s.score("not good").compound, -1.9 / std::sqrt(1.9 * 1.9 + 15.0), 1e-15);
  EXPECT_NEAR(s.score("very good").compound, d["sentiment_very_good"].get<double>(), 1e-12);
  EXPECT_NEAR(s.score("The food was great but the service was not good").compound,
              d["sentiment_mixed"].get<double>(), 1e-12);
}

TEST(Sentiment, CaseAndPunctuationInsensitive) {
  LexiconScorer s;
  EXPECT_EQ(s.score("GREAT!!!").compound, s.score("great").compound);
  EXPECT_EQ(s.score("don't like it").compound, s.score("dont like it").compound);
}

TEST(Sentiment, ShippedLexiconFileEqualsBuiltin) {
  std::ifstream in(oracle::source_path("data/lexicon/mini.tsv"));
  ASSERT_TRUE(in);
  EXPECT_EQ(SentimentLexicon::parse(in), SentimentLexicon::builtin());
  EXPECT_EQ(LexiconScorer().version(), "mini-1");
}

TEST(Sentiment, LexiconParseErrorsNameTheLine) {
  try {
    SentimentLexicon::parse(std::string_view("[valence]\ngood\tabc\n"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(SentimentProperty, BoundedAndDeterministic) {
  LexiconScorer s;
  const auto& lex = SentimentLexicon::builtin();
  std::vector<std::string> words;
  for (const auto& [w, _] : lex.valence) words.push_back(w);
  for (const auto& [w, _] : lex.intensifiers) words.push_back(w);
  for (const auto& w : lex.negations) words.push_back(w);
  words.push_back("food");
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    std::string text;
    const int n = static_cast<int>(rng() % 12);
    for (int k = 0; k < n; ++k) text += words[rng() % words.size()] + " ";
    const double c = s.score(text).compound;
    EXPECT_GE(c, -1.0);
    EXPECT_LE(c, 1.0);
    EXPECT_EQ(c, s.score(text).compound);
  }
}

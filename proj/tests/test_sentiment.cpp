#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "quantbench/rng.hpp"
#include "quantbench/sentiment.hpp"

using namespace quantbench;

namespace {

Lexicon tiny_lexicon() {
  Lexicon lex;
  lex.add_word("good", 0.8);
  lex.add_word("great", 1.0);
  lex.add_word("bad", -0.6);
  lex.add_word("terrible", -1.0);
  lex.add_negation("not");
  lex.add_negation("never");
  return lex;
}

std::vector<Date> calendar(int days) {
  std::vector<Date> out;
  for (int i = 0; i < days; ++i) out.push_back(Date{2021, 1 + i / 28, 1 + i % 28});
  return out;
}

NewsItem item(const Date& d, const std::string& text) {
  return NewsItem{d, "MSFT", text};
}

}  // namespace

TEST_CASE("score_text base cases", "[sentiment]") {
  const Lexicon lex = tiny_lexicon();
  CHECK(score_text("", lex) == 0.0);
  CHECK(score_text("great", lex) == 1.0);
  CHECK(score_text("nothing matches here", lex) == 0.0);
  // punctuation and case are ignored by tokenization
  CHECK(score_text("GREAT!!!", lex) == 1.0);
}

TEST_CASE("negation within two preceding tokens flips the sign", "[sentiment]") {
  const Lexicon lex = tiny_lexicon();
  CHECK(score_text("not good", lex) == Catch::Approx(-0.8));
  CHECK(score_text("not so good", lex) == Catch::Approx(-0.8));   // distance 2
  CHECK(score_text("not at all good", lex) == Catch::Approx(0.8));  // distance 3: no flip
  CHECK(score_text("never terrible", lex) == Catch::Approx(1.0));
}

TEST_CASE("score normalizes by matched count and clamps", "[sentiment]") {
  const Lexicon lex = tiny_lexicon();
  // two matches: (0.8 + (-0.6)) / 2
  CHECK(score_text("good but bad", lex) == Catch::Approx(0.1));
  // (1.0 + 0.8) / 2
  CHECK(score_text("great and good", lex) == Catch::Approx(0.9));
}

TEST_CASE("score_text is antisymmetric under lexicon negation", "[sentiment]") {
  const Lexicon lex = tiny_lexicon();
  const Lexicon neg = lex.negated();
  const std::vector<std::string> texts = {
      "good bad terrible great",       "not good but never terrible",
      "GREAT results, not bad at all", "nothing here",
      "good good good bad",
  };
  for (const auto& t : texts) {
    CHECK(score_text(t, lex) == Catch::Approx(-score_text(t, neg)).margin(1e-15));
  }
}

TEST_CASE("daily sentiment aggregation and decay", "[sentiment]") {
  const Lexicon lex = tiny_lexicon();
  const auto cal = calendar(5);

  SECTION("no news at all gives zeros") {
    const auto s = daily_sentiment({}, cal, lex);
    REQUIRE(s.size() == 5);
    for (double v : s.scores) CHECK(v == 0.0);
  }

  SECTION("single item decays by half per empty day") {
    // "good but bad" scores 0.1; use a text scoring 0.6: weight 0.6 needed.
    Lexicon lx = lex;
    lx.add_word("fine", 0.6);
    const auto s = daily_sentiment({item(cal[1], "fine")}, cal, lx, 0.5);
    CHECK(s.scores[0] == 0.0);
    CHECK(s.scores[1] == Catch::Approx(0.6));
    CHECK(s.scores[2] == Catch::Approx(0.3));
    CHECK(s.scores[3] == Catch::Approx(0.15));
    CHECK(s.scores[4] == Catch::Approx(0.075));
  }

  SECTION("opposite items on one day cancel") {
    const auto s =
        daily_sentiment({item(cal[2], "great"), item(cal[2], "terrible")}, cal, lex, 0.5);
    CHECK(s.scores[2] == 0.0);
  }

  SECTION("output is always within [-1, 1]") {
    std::vector<NewsItem> many;
    for (int i = 0; i < 30; ++i) many.push_back(item(cal[i % 5], "great great great"));
    const auto s = daily_sentiment(many, cal, lex, 0.9);
    for (double v : s.scores) {
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("merge_features appends an aligned column", "[sentiment]") {
  const auto cal = calendar(4);
  FeatureMatrix prices;
  prices.dates = cal;
  prices.values = Matrix::from_rows({{10}, {11}, {12}, {13}});

  SentimentSeries s;
  s.dates = cal;
  s.scores = {0.1, -0.2, 0.3, 0.0};

  const auto merged = merge_features(prices, s);
  REQUIRE(merged.features() == 2);
  CHECK(merged.columns.back() == "sentiment");
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(merged.values(i, 0) == prices.values(i, 0));  // bitwise
    CHECK(merged.values(i, 1) == s.scores[i]);
  }

  SECTION("zero series appends a zero column") {
    SentimentSeries zero;
    zero.dates = cal;
    zero.scores = {0, 0, 0, 0};
    const auto m2 = merge_features(prices, zero);
    for (std::size_t i = 0; i < 4; ++i) CHECK(m2.values(i, 1) == 0.0);
  }

  SECTION("uncovered date is an error") {
    SentimentSeries partial;
    partial.dates = {cal[0], cal[1]};
    partial.scores = {0.5, 0.5};
    CHECK_THROWS_AS(merge_features(prices, partial), DataError);
  }
}

TEST_CASE("builtin lexicon matches the shipped data file", "[sentiment]") {
  const Lexicon& builtin = Lexicon::builtin();
  CHECK(builtin.size() >= 190);
  CHECK(builtin.negation_count() >= 5);
  const Lexicon from_file =
      Lexicon::load(std::filesystem::path(QB_DATA_DIR) / "default_lexicon.csv");
  CHECK(builtin == from_file);
}

TEST_CASE("lexicon file parsing rejects bad content", "[sentiment]") {
  Lexicon lex;
  CHECK_THROWS_AS(lex.add_word("zero", 0.0), DataError);
  CHECK_THROWS_AS(lex.add_word("huge", 1.5), DataError);
  std::istringstream bad("word_without_weight\n");
  CHECK_THROWS_AS(Lexicon::parse(bad, "test"), DataError);
}

TEST_CASE("builtin lexicon scores plausible headlines", "[sentiment]") {
  const Lexicon& lex = Lexicon::builtin();
  CHECK(score_text("Shares rally on record profit and strong growth", lex) > 0.3);
  CHECK(score_text("Stock plunges after earnings miss and downgrade", lex) < -0.3);
  CHECK(score_text("The company scheduled a meeting on Tuesday", lex) == 0.0);
}

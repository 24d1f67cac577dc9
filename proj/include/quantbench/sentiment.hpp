#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "quantbench/data.hpp"
#include "quantbench/errors.hpp"
#include "quantbench/lexicon_builtin.hpp"
#include "quantbench/preprocess.hpp"

namespace quantbench {

// Word-weight table with a negation token set. Lookup is case-insensitive
// (keys are stored lowercase); zero weights are rejected at load.
class Lexicon {
 public:
  void add_word(const std::string& word, double weight) {
    if (weight == 0.0) throw DataError("lexicon: zero weight for '" + word + "'");
    if (weight < -1.0 || weight > 1.0) {
      throw DataError("lexicon: weight out of [-1,1] for '" + word + "'");
    }
    weights_[to_lower(word)] = weight;
  }

  void add_negation(const std::string& token) { negations_.insert(to_lower(token)); }

  std::optional<double> weight(const std::string& token) const {
    auto it = weights_.find(to_lower(token));
    if (it == weights_.end()) return std::nullopt;
    return it->second;
  }

  bool is_negation(const std::string& token) const {
    return negations_.count(to_lower(token)) > 0;
  }

  std::size_t size() const { return weights_.size(); }
  std::size_t negation_count() const { return negations_.size(); }

  bool operator==(const Lexicon& other) const {
    return weights_ == other.weights_ && negations_ == other.negations_;
  }

  // Flips the sign of every weight (test hook for the antisymmetry property).
  Lexicon negated() const {
    Lexicon out = *this;
    for (auto& [word, w] : out.weights_) w = -w;
    return out;
  }

  // Parses the lexicon text format: CSV lines `word,weight`, then an
  // optional `#negations` marker followed by one token per line.
  static Lexicon parse(std::istream& in, const std::string& origin) {
    Lexicon lex;
    std::string line;
    bool in_negations = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string t = detail::trim(line);
      if (t.empty()) continue;
      if (t == "#negations") {
        in_negations = true;
        continue;
      }
      if (in_negations) {
        lex.add_negation(t);
        continue;
      }
      const auto comma = t.find(',');
      if (comma == std::string::npos) {
        throw DataError(origin + " line " + std::to_string(lineno) + ": expected 'word,weight'");
      }
      const std::string word = t.substr(0, comma);
      lex.add_word(word, detail::parse_double_field(t.substr(comma + 1), "weight", lineno));
    }
    if (lex.size() == 0) throw DataError(origin + ": empty lexicon");
    return lex;
  }

  static Lexicon load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open lexicon file '" + path.string() + "'");
    return parse(in, path.string());
  }

  // Compiled-in default financial lexicon.
  static const Lexicon& builtin() {
    static const Lexicon lex = [] {
      std::istringstream in{std::string(kBuiltinLexiconText)};
      return parse(in, "builtin lexicon");
    }();
    return lex;
  }

  static std::string to_lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
  }

 private:
  std::unordered_map<std::string, double> weights_;
  std::unordered_set<std::string> negations_;
};

// Lowercase alphanumeric tokens, split on everything else.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

// Sums matched lexicon weights over the tokens, flipping a weight's sign
// when a negation token occurs within the 2 preceding tokens, then
// normalizes by max(1, matched count) and clamps to [-1, 1].
inline double score_text(const std::string& text, const Lexicon& lex) {
  const auto tokens = tokenize(text);
  double sum = 0.0;
  std::size_t matched = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto w = lex.weight(tokens[i]);
    if (!w) continue;
    bool negate = false;
    for (std::size_t back = 1; back <= 2 && back <= i; ++back) {
      if (lex.is_negation(tokens[i - back])) {
        negate = true;
        break;
      }
    }
    sum += negate ? -*w : *w;
    ++matched;
  }
  const double score = sum / static_cast<double>(std::max<std::size_t>(1, matched));
  return std::clamp(score, -1.0, 1.0);
}

// One sentiment score per date, ascending.
struct SentimentSeries {
  std::vector<Date> dates;
  std::vector<double> scores;

  std::size_t size() const { return dates.size(); }
};

// Per calendar date: the mean score of that date's items. Dates without
// news carry the previous score decayed by `decay`, starting from 0.
inline SentimentSeries daily_sentiment(const std::vector<NewsItem>& items,
                                       const std::vector<Date>& calendar, const Lexicon& lex,
                                       double decay = 0.5) {
  for (std::size_t i = 1; i < calendar.size(); ++i) {
    if (!(calendar[i - 1] < calendar[i])) {
      throw DataError("daily_sentiment: calendar not ascending");
    }
  }
  struct DayAgg {
    double sum = 0.0;
    std::size_t count = 0;
  };
  std::unordered_map<std::string, DayAgg> by_date;
  for (const auto& item : items) {
    auto& agg = by_date[item.date.str()];
    agg.sum += score_text(item.text, lex);
    agg.count += 1;
  }

  SentimentSeries out;
  out.dates = calendar;
  out.scores.reserve(calendar.size());
  double prev = 0.0;
  for (const auto& date : calendar) {
    auto it = by_date.find(date.str());
    const double score =
        it != by_date.end() ? it->second.sum / static_cast<double>(it->second.count) : prev * decay;
    out.scores.push_back(score);
    prev = score;
  }
  return out;
}

// Appends the date-aligned sentiment column; existing columns are copied
// unchanged. The sentiment column bypasses MinMax scaling downstream.
inline FeatureMatrix merge_features(const FeatureMatrix& prices, const SentimentSeries& s) {
  std::unordered_map<std::string, double> by_date;
  for (std::size_t i = 0; i < s.size(); ++i) by_date[s.dates[i].str()] = s.scores[i];

  FeatureMatrix out;
  out.dates = prices.dates;
  out.columns = prices.columns;
  out.columns.push_back("sentiment");
  out.values = Matrix(prices.steps(), prices.features() + 1);
  for (std::size_t i = 0; i < prices.steps(); ++i) {
    for (std::size_t j = 0; j < prices.features(); ++j) out.values(i, j) = prices.values(i, j);
    auto it = by_date.find(prices.dates[i].str());
    if (it == by_date.end()) {
      throw DataError("merge_features: no sentiment for date " + prices.dates[i].str());
    }
    out.values(i, prices.features()) = it->second;
  }
  return out;
}

}  // namespace quantbench

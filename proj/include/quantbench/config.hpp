#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "quantbench/data.hpp"
#include "quantbench/errors.hpp"
#include "quantbench/model_io.hpp"
#include "quantbench/preprocess.hpp"
#include "quantbench/sentiment.hpp"

namespace quantbench {

struct DataConfig {
  std::string csv;        // direct OHLCV file; takes precedence over symbol lookup
  std::string symbol;
  std::string start;      // optional ISO dates bounding a cache fetch
  std::string end;
  std::string cache_dir;  // defaults to QUANTBENCH_CACHE_DIR
  bool use_adj_close = false;
  std::string news;       // optional JSONL headlines; enables the sentiment column
  std::string lexicon;    // optional lexicon file; builtin when empty
  double sentiment_decay = 0.5;
};

struct EvalConfig {
  double train_fraction = 0.8;
  bool price_space = false;
  std::vector<std::size_t> windows{30, 60};
  std::vector<std::size_t> horizons{1, 5, 10};
};

struct AdvisoryConfig {
  std::vector<std::string> symbols;
  double threshold = 0.05;
  std::size_t trailing_days = 0;
};

// Everything a CLI run needs. Root JSON keys are the ModelSpec fields;
// train/data/eval/advisory nest their own sections.
struct RunConfig {
  ModelSpec spec;
  TrainConfig train;
  DataConfig data;
  EvalConfig eval;
  AdvisoryConfig advisory;
  std::string output_dir = "out";
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& known,
                                const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

}  // namespace detail

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  detail::reject_unknown_keys(
      j,
      {"architecture", "layers", "units", "dropout_rate", "window", "horizon", "features", "seed",
       "train", "data", "eval", "advisory", "output_dir"},
      "");
  RunConfig cfg;
  cfg.spec = spec_from_json(j);
  try {
    if (j.contains("train")) {
      cfg.train = train_config_from_json(j.at("train"));
      detail::reject_unknown_keys(j.at("train"),
                                  {"epochs", "batch_size", "learning_rate", "beta1", "beta2",
                                   "epsilon", "teacher_forcing", "seed", "shuffle_each_epoch"},
                                  "train");
    }
    if (j.contains("data")) {
      const auto& d = j.at("data");
      detail::reject_unknown_keys(d,
                                  {"csv", "symbol", "start", "end", "cache_dir", "use_adj_close",
                                   "news", "lexicon", "sentiment_decay"},
                                  "data");
      if (d.contains("csv")) cfg.data.csv = d.at("csv").get<std::string>();
      if (d.contains("symbol")) cfg.data.symbol = d.at("symbol").get<std::string>();
      if (d.contains("start")) cfg.data.start = d.at("start").get<std::string>();
      if (d.contains("end")) cfg.data.end = d.at("end").get<std::string>();
      if (d.contains("cache_dir")) cfg.data.cache_dir = d.at("cache_dir").get<std::string>();
      if (d.contains("use_adj_close")) cfg.data.use_adj_close = d.at("use_adj_close").get<bool>();
      if (d.contains("news")) cfg.data.news = d.at("news").get<std::string>();
      if (d.contains("lexicon")) cfg.data.lexicon = d.at("lexicon").get<std::string>();
      if (d.contains("sentiment_decay")) {
        cfg.data.sentiment_decay = d.at("sentiment_decay").get<double>();
      }
    }
    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      detail::reject_unknown_keys(e, {"train_fraction", "price_space", "windows", "horizons"},
                                  "eval");
      if (e.contains("train_fraction")) cfg.eval.train_fraction = e.at("train_fraction").get<double>();
      if (e.contains("price_space")) cfg.eval.price_space = e.at("price_space").get<bool>();
      if (e.contains("windows")) cfg.eval.windows = e.at("windows").get<std::vector<std::size_t>>();
      if (e.contains("horizons")) {
        cfg.eval.horizons = e.at("horizons").get<std::vector<std::size_t>>();
      }
    }
    if (j.contains("advisory")) {
      const auto& a = j.at("advisory");
      detail::reject_unknown_keys(a, {"symbols", "threshold", "trailing_days"}, "advisory");
      if (a.contains("symbols")) {
        cfg.advisory.symbols = a.at("symbols").get<std::vector<std::string>>();
      }
      if (a.contains("threshold")) cfg.advisory.threshold = a.at("threshold").get<double>();
      if (a.contains("trailing_days")) {
        cfg.advisory.trailing_days = a.at("trailing_days").get<std::size_t>();
      }
    }
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config file '" + path.string() + "' is not valid JSON");
  return run_config_from_json(j);
}

inline std::string effective_cache_dir(const DataConfig& data) {
  if (!data.cache_dir.empty()) return data.cache_dir;
  return default_cache_dir();
}

// Loads the configured price series (direct CSV, or symbol lookup in the
// cache directory, optionally date-bounded).
inline PriceSeries load_configured_series(const DataConfig& data) {
  if (!data.csv.empty()) {
    return load_ohlcv_csv(data.csv, data.symbol);
  }
  if (data.symbol.empty()) {
    throw ConfigError("config needs either data.csv or data.symbol");
  }
  const std::string cache = effective_cache_dir(data);
  if (cache.empty()) {
    throw ConfigError("config needs data.cache_dir (or QUANTBENCH_CACHE_DIR) for symbol lookup");
  }
  DirectoryCacheSource source{cache};
  if (!data.start.empty() || !data.end.empty()) {
    if (data.start.empty() || data.end.empty()) {
      throw ConfigError("data.start and data.end must be given together");
    }
    return fetch_history(data.symbol, Date::parse(data.start), Date::parse(data.end), source);
  }
  return source.history(data.symbol);
}

// Full feature pipeline: close column plus, when news is configured, the
// date-aligned sentiment column.
inline FeatureMatrix load_configured_features(const DataConfig& data) {
  const PriceSeries series = load_configured_series(data);
  FeatureMatrix features = make_feature_matrix(series, data.use_adj_close);
  if (!data.news.empty()) {
    const Lexicon lex = data.lexicon.empty() ? Lexicon::builtin() : Lexicon::load(data.lexicon);
    std::vector<NewsItem> items = load_news_jsonl(data.news);
    if (!series.symbol.empty()) {
      std::erase_if(items, [&](const NewsItem& it) { return it.symbol != series.symbol; });
    }
    const SentimentSeries s = daily_sentiment(items, features.dates, lex, data.sentiment_decay);
    features = merge_features(features, s);
  }
  return features;
}

}  // namespace quantbench

#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "quantbench/date.hpp"
#include "quantbench/errors.hpp"

namespace quantbench {

// One daily OHLCV bar.
struct PriceBar {
  Date date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double adj_close = 0.0;
  std::int64_t volume = 0;

  bool valid() const {
    if (open <= 0.0 || high <= 0.0 || low <= 0.0 || close <= 0.0 || adj_close <= 0.0) return false;
    if (volume < 0) return false;
    if (low > std::min(open, close)) return false;
    if (std::max(open, close) > high) return false;
    return true;
  }
};

// Daily price history for one symbol, dates strictly ascending.
struct PriceSeries {
  std::string symbol;
  std::vector<PriceBar> bars;

  std::size_t size() const { return bars.size(); }

  std::vector<double> closes(bool use_adj_close = false) const {
    std::vector<double> out;
    out.reserve(bars.size());
    for (const auto& b : bars) out.push_back(use_adj_close ? b.adj_close : b.close);
    return out;
  }
};

// One dated headline for one symbol.
struct NewsItem {
  Date date;
  std::string symbol;
  std::string text;
};

// Inputs to the valuation ratios.
struct FundamentalsRecord {
  std::string symbol;
  double price = 0.0;
  double eps = 0.0;
  double sales_per_share = 0.0;
  std::string sector;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_double_field(const std::string& s, const char* what, std::size_t row) {
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw DataError(std::string("row ") + std::to_string(row) + ": unparsable " + what + " '" + s +
                    "'");
  }
  return value;
}

inline std::int64_t parse_int_field(const std::string& s, const char* what, std::size_t row) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw DataError(std::string("row ") + std::to_string(row) + ": unparsable " + what + " '" + s +
                    "'");
  }
  return value;
}

inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline constexpr const char* kOhlcvHeader = "date,open,high,low,close,adj_close,volume";

// Loads a daily OHLCV CSV. Rows are validated against the PriceBar
// invariants and sorted ascending by date; any bad row aborts the load
// with its 1-based row number (header is row 1).
inline PriceSeries load_ohlcv_csv(const std::filesystem::path& path,
                                  const std::string& symbol = "") {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open price file '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty price file '" + path.string() + "'");
  if (detail::trim(line) != kOhlcvHeader) {
    throw DataError("bad header in '" + path.string() + "' (expected '" +
                    std::string(kOhlcvHeader) + "')");
  }

  PriceSeries series;
  series.symbol = symbol.empty() ? path.stem().string() : symbol;

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != 7) {
      throw DataError("row " + std::to_string(row) + ": expected 7 fields, got " +
                      std::to_string(fields.size()));
    }
    PriceBar bar;
    bar.date = Date::parse(fields[0]);
    bar.open = detail::parse_double_field(fields[1], "open", row);
    bar.high = detail::parse_double_field(fields[2], "high", row);
    bar.low = detail::parse_double_field(fields[3], "low", row);
    bar.close = detail::parse_double_field(fields[4], "close", row);
    bar.adj_close = detail::parse_double_field(fields[5], "adj_close", row);
    bar.volume = detail::parse_int_field(fields[6], "volume", row);
    if (!bar.valid()) {
      throw DataError("row " + std::to_string(row) + ": bar violates price invariants");
    }
    series.bars.push_back(bar);
  }

  std::stable_sort(series.bars.begin(), series.bars.end(),
                   [](const PriceBar& a, const PriceBar& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < series.bars.size(); ++i) {
    if (series.bars[i].date == series.bars[i - 1].date) {
      throw DataError("duplicate date " + series.bars[i].date.str() + " in '" + path.string() +
                      "'");
    }
  }
  if (series.bars.size() < 2) {
    throw DataError("price series in '" + path.string() + "' too short (need >= 2 rows)");
  }
  return series;
}

// Writes a series in the exact load_ohlcv_csv format. Doubles use the
// shortest text that round-trips, so save + load is an identity.
inline void save_ohlcv_csv(const PriceSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write price file '" + path.string() + "'");
  out << kOhlcvHeader << "\n";
  for (const auto& b : series.bars) {
    out << b.date.str() << ',' << detail::format_double(b.open) << ','
        << detail::format_double(b.high) << ',' << detail::format_double(b.low) << ','
        << detail::format_double(b.close) << ',' << detail::format_double(b.adj_close) << ','
        << b.volume << "\n";
  }
}

// Supplies full price histories by symbol. Implementations must either be
// safe for concurrent reads or document themselves single-use.
class HistorySource {
 public:
  virtual ~HistorySource() = default;
  virtual PriceSeries history(const std::string& symbol) const = 0;
};

// Reads <dir>/<SYMBOL>.csv in the load_ohlcv_csv format. Reentrant: every
// call opens the file fresh.
class DirectoryCacheSource final : public HistorySource {
 public:
  explicit DirectoryCacheSource(std::filesystem::path dir) : dir_(std::move(dir)) {}

  PriceSeries history(const std::string& symbol) const override {
    const auto path = dir_ / (symbol + ".csv");
    if (!std::filesystem::exists(path)) {
      throw DataError("unknown symbol '" + symbol + "' (no file " + path.string() + ")");
    }
    return load_ohlcv_csv(path, symbol);
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

// Default cache directory from QUANTBENCH_CACHE_DIR (empty if unset).
inline std::string default_cache_dir() {
  const char* env = std::getenv("QUANTBENCH_CACHE_DIR");
  return env ? env : "";
}

// Inclusive date-range slice of a symbol's history.
inline PriceSeries fetch_history(const std::string& symbol, const Date& start, const Date& end,
                                 const HistorySource& source) {
  if (!(start < end)) throw DataError("fetch_history: start must precede end");
  PriceSeries full = source.history(symbol);
  PriceSeries out;
  out.symbol = full.symbol;
  for (const auto& bar : full.bars) {
    if (bar.date >= start && bar.date <= end) out.bars.push_back(bar);
  }
  if (out.bars.empty()) {
    throw DataError("fetch_history: no bars for '" + symbol + "' in [" + start.str() + ", " +
                    end.str() + "]");
  }
  return out;
}

// Loads news headlines from a JSON-lines file (keys: date, symbol, text).
// A malformed line or blank text aborts with the 1-based line number.
inline std::vector<NewsItem> load_news_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open news file '" + path.string() + "'");

  std::vector<NewsItem> items;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("date") || !j.contains("symbol") ||
        !j.contains("text") || !j["date"].is_string() || !j["symbol"].is_string() ||
        !j["text"].is_string()) {
      throw DataError("line " + std::to_string(lineno) + ": malformed news record");
    }
    NewsItem item;
    item.date = Date::parse(j["date"].get<std::string>());
    item.symbol = j["symbol"].get<std::string>();
    item.text = j["text"].get<std::string>();
    if (detail::trim(item.text).empty()) {
      throw DataError("line " + std::to_string(lineno) + ": blank news text");
    }
    items.push_back(std::move(item));
  }
  return items;
}

// Loads fundamentals from CSV with header symbol,price,eps,sales_per_share,sector.
inline std::vector<FundamentalsRecord> load_fundamentals_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open fundamentals file '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty fundamentals file '" + path.string() + "'");
  if (detail::trim(line) != "symbol,price,eps,sales_per_share,sector") {
    throw DataError("bad header in '" + path.string() +
                    "' (expected 'symbol,price,eps,sales_per_share,sector')");
  }

  std::vector<FundamentalsRecord> records;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != 5) {
      throw DataError("row " + std::to_string(row) + ": expected 5 fields, got " +
                      std::to_string(fields.size()));
    }
    FundamentalsRecord rec;
    rec.symbol = fields[0];
    rec.price = detail::parse_double_field(fields[1], "price", row);
    rec.eps = detail::parse_double_field(fields[2], "eps", row);
    rec.sales_per_share = detail::parse_double_field(fields[3], "sales_per_share", row);
    rec.sector = fields[4];
    if (rec.price <= 0.0) {
      throw DataError("row " + std::to_string(row) + ": price must be positive");
    }
    if (rec.sales_per_share < 0.0) {
      throw DataError("row " + std::to_string(row) + ": sales_per_share must be non-negative");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace quantbench

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "quantbench/data.hpp"
#include "quantbench/errors.hpp"
#include "quantbench/eval.hpp"

namespace quantbench {

// r_t = close_t / close_{t-1} - 1.
inline std::vector<double> simple_returns(const PriceSeries& series) {
  if (series.size() < 2) throw DataError("simple_returns: need at least 2 bars");
  std::vector<double> out;
  out.reserve(series.size() - 1);
  for (std::size_t i = 1; i < series.size(); ++i) {
    out.push_back(series.bars[i].close / series.bars[i - 1].close - 1.0);
  }
  return out;
}

struct ReturnStats {
  double mean = 0.0;
  double volatility = 0.0;  // sample (n-1) standard deviation
  double ratio = 0.0;       // mean / volatility; meaningless when degenerate
  bool degenerate = false;  // zero volatility (flat series)
};

// Daily mean return over its sample standard deviation, un-annualized.
inline ReturnStats return_volatility_ratio(const std::vector<double>& returns) {
  if (returns.size() < 2) throw DataError("return_volatility_ratio: need at least 2 returns");
  ReturnStats stats;
  for (double r : returns) stats.mean += r;
  stats.mean /= static_cast<double>(returns.size());
  double ss = 0.0;
  for (double r : returns) {
    const double d = r - stats.mean;
    ss += d * d;
  }
  stats.volatility = std::sqrt(ss / static_cast<double>(returns.size() - 1));
  if (stats.volatility == 0.0) {
    stats.degenerate = true;
    stats.ratio = std::nan("");
  } else {
    stats.ratio = stats.mean / stats.volatility;
  }
  return stats;
}

enum class Signal { Buy, Sell, Hold };

inline const char* to_string(Signal s) {
  switch (s) {
    case Signal::Buy: return "buy";
    case Signal::Sell: return "sell";
    case Signal::Hold: return "hold";
  }
  return "hold";
}

struct AdvisoryEntry {
  std::string symbol;
  double mean_return = 0.0;
  double volatility = 0.0;
  double ratio = 0.0;
  bool degenerate = false;
  Signal signal = Signal::Hold;
};

struct AdvisoryReport {
  std::vector<AdvisoryEntry> entries;  // ratio descending, degenerate last
};

struct AdvisoryOptions {
  double threshold = 0.05;       // |ratio| band for buy/sell
  std::size_t trailing_days = 0; // 0 = full series; else last N returns
};

// Ranks a set of stocks by returns-to-volatility ratio. When a predicted
// next close is supplied for a symbol, its implied return is appended to
// the return list first (forecast-aware advisory).
inline AdvisoryReport advise(const std::vector<PriceSeries>& series_set,
                             const std::map<std::string, double>* forecast_next_close = nullptr,
                             const AdvisoryOptions& opt = {}) {
  if (series_set.empty()) throw ConfigError("advise: empty symbol set");

  AdvisoryReport report;
  report.entries.reserve(series_set.size());
  for (const auto& series : series_set) {
    std::vector<double> returns = simple_returns(series);
    if (opt.trailing_days > 0 && returns.size() > opt.trailing_days) {
      returns.erase(returns.begin(),
                    returns.begin() + static_cast<std::ptrdiff_t>(returns.size() - opt.trailing_days));
    }
    if (forecast_next_close) {
      auto it = forecast_next_close->find(series.symbol);
      if (it != forecast_next_close->end()) {
        returns.push_back(it->second / series.bars.back().close - 1.0);
      }
    }
    const ReturnStats stats = return_volatility_ratio(returns);

    AdvisoryEntry entry;
    entry.symbol = series.symbol;
    entry.mean_return = stats.mean;
    entry.volatility = stats.volatility;
    entry.ratio = stats.ratio;
    entry.degenerate = stats.degenerate;
    if (stats.degenerate) {
      entry.signal = Signal::Hold;
    } else if (stats.ratio >= opt.threshold) {
      entry.signal = Signal::Buy;
    } else if (stats.ratio <= -opt.threshold) {
      entry.signal = Signal::Sell;
    } else {
      entry.signal = Signal::Hold;
    }
    report.entries.push_back(std::move(entry));
  }

  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const AdvisoryEntry& a, const AdvisoryEntry& b) {
                     if (a.degenerate != b.degenerate) return !a.degenerate;
                     if (a.degenerate) return false;
                     return a.ratio > b.ratio;
                   });
  return report;
}

inline void write_advisory_csv(const AdvisoryReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "symbol,mean_return,volatility,ratio,signal\n";
  for (const auto& e : report.entries) {
    out << e.symbol << ',' << detail::csv_double(e.mean_return) << ','
        << detail::csv_double(e.volatility) << ',' << detail::csv_double(e.ratio) << ','
        << to_string(e.signal) << "\n";
  }
}

inline std::string format_advisory_table(const AdvisoryReport& report) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof(line), "%-10s %14s %14s %10s %6s\n", "symbol", "mean_return",
                "volatility", "ratio", "signal");
  out += line;
  for (const auto& e : report.entries) {
    std::snprintf(line, sizeof(line), "%-10s %14.6f %14.6f %10.4f %6s\n", e.symbol.c_str(),
                  e.mean_return, e.volatility, e.ratio, to_string(e.signal));
    out += line;
  }
  return out;
}

}  // namespace quantbench

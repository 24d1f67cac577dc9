#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quantbench/data.hpp"
#include "quantbench/errors.hpp"

namespace quantbench {

enum class ValuationFlag { Overvalued, Undervalued, Inline, Indeterminate };

inline const char* to_string(ValuationFlag f) {
  switch (f) {
    case ValuationFlag::Overvalued: return "overvalued";
    case ValuationFlag::Undervalued: return "undervalued";
    case ValuationFlag::Inline: return "inline";
    case ValuationFlag::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

struct ValuationResult {
  std::string symbol;
  std::optional<double> pe;
  std::optional<double> ps;
  ValuationFlag flag = ValuationFlag::Indeterminate;
};

// Price divided by earnings per share. Non-positive earnings have no
// meaningful P/E, signalled by an empty optional.
inline std::optional<double> pe_ratio(double price, double eps) {
  if (price <= 0.0) throw DataError("pe_ratio: price must be positive");
  if (eps <= 0.0) return std::nullopt;
  return price / eps;
}

// Price divided by sales per share; undefined for non-positive sales.
inline std::optional<double> ps_ratio(double price, double sales_per_share) {
  if (price <= 0.0) throw DataError("ps_ratio: price must be positive");
  if (sales_per_share <= 0.0) return std::nullopt;
  return price / sales_per_share;
}

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

// Peer comparison within each sector: a record is undervalued when its P/S
// sits below median * (1 - band), overvalued above median * (1 + band),
// inline otherwise. Lower P/S reads as cheaper. Records with no defined
// P/S, or with no peer to compare against, come back indeterminate.
inline std::vector<ValuationResult> relative_valuation(
    const std::vector<FundamentalsRecord>& records, double band = 0.2) {
  std::map<std::string, std::vector<double>> sector_ratios;
  std::map<std::string, std::size_t> sector_counts;

  std::vector<ValuationResult> results;
  results.reserve(records.size());
  for (const auto& rec : records) {
    ValuationResult r;
    r.symbol = rec.symbol;
    r.pe = pe_ratio(rec.price, rec.eps);
    r.ps = ps_ratio(rec.price, rec.sales_per_share);
    results.push_back(r);
    sector_counts[rec.sector] += 1;
    if (r.ps) sector_ratios[rec.sector].push_back(*r.ps);
  }

  std::map<std::string, double> sector_median;
  for (const auto& [sector, ratios] : sector_ratios) {
    // A lone firm (or a lone defined ratio among undefined peers) has no
    // peer baseline.
    if (sector_counts[sector] >= 2 && !ratios.empty()) {
      sector_median[sector] = detail::median(ratios);
    }
  }

  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = results[i];
    auto it = sector_median.find(records[i].sector);
    if (!r.ps || it == sector_median.end()) {
      r.flag = ValuationFlag::Indeterminate;
      continue;
    }
    const double med = it->second;
    if (*r.ps < med * (1.0 - band)) {
      r.flag = ValuationFlag::Undervalued;
    } else if (*r.ps > med * (1.0 + band)) {
      r.flag = ValuationFlag::Overvalued;
    } else {
      r.flag = ValuationFlag::Inline;
    }
  }
  return results;
}

}  // namespace quantbench

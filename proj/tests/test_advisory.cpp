#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "quantbench/advisory.hpp"
#include "quantbench/rng.hpp"

using namespace quantbench;

namespace {

PriceSeries series_from_closes(const std::string& symbol, const std::vector<double>& closes) {
  PriceSeries s;
  s.symbol = symbol;
  for (std::size_t i = 0; i < closes.size(); ++i) {
    PriceBar bar;
    bar.date = Date{2021, static_cast<int>(1 + i / 28), static_cast<int>(1 + i % 28)};
    bar.open = closes[i];
    bar.high = closes[i] * 1.01;
    bar.low = closes[i] * 0.99;
    bar.close = closes[i];
    bar.adj_close = closes[i];
    bar.volume = 1000;
    s.bars.push_back(bar);
  }
  return s;
}

}  // namespace

TEST_CASE("simple returns", "[advisory]") {
  const auto single = simple_returns(series_from_closes("A", {100, 110}));
  REQUIRE(single.size() == 1);
  CHECK(single[0] == Catch::Approx(0.1).margin(1e-15));

  const auto flat = simple_returns(series_from_closes("A", {50, 50, 50}));
  for (double r : flat) CHECK(r == 0.0);

  const auto r = simple_returns(series_from_closes("A", {100, 90, 99}));
  REQUIRE(r.size() == 2);
  CHECK(r[0] == Catch::Approx(-0.10).margin(1e-15));
  CHECK(r[1] == Catch::Approx(0.10).margin(1e-15));

  CHECK_THROWS_AS(simple_returns(series_from_closes("A", {100})), DataError);
}

TEST_CASE("return to volatility ratio", "[advisory]") {
  const ReturnStats stats = return_volatility_ratio({0.02, 0.00, 0.01, 0.03});
  CHECK(stats.mean == Catch::Approx(0.015).margin(1e-15));
  CHECK(stats.volatility == Catch::Approx(0.012909944487358056).margin(1e-12));
  CHECK(stats.ratio == Catch::Approx(1.161895003862225).margin(1e-9));
  CHECK_FALSE(stats.degenerate);

  const ReturnStats flat = return_volatility_ratio({0.01, 0.01, 0.01});
  CHECK(flat.degenerate);

  const ReturnStats sym = return_volatility_ratio({0.01, -0.01});
  CHECK(sym.mean == Catch::Approx(0.0).margin(1e-18));
  CHECK(sym.ratio == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("ratio antisymmetry under return negation", "[advisory]") {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> r(10);
    for (double& v : r) v = rng.uniform(-0.05, 0.05);
    std::vector<double> neg = r;
    for (double& v : neg) v = -v;
    const auto a = return_volatility_ratio(r);
    const auto b = return_volatility_ratio(neg);
    if (a.degenerate) continue;
    CHECK(a.mean == Catch::Approx(-b.mean).margin(1e-15));
    CHECK(a.volatility == Catch::Approx(b.volatility).margin(1e-15));
    CHECK(a.ratio == Catch::Approx(-b.ratio).margin(1e-12));
  }
}

TEST_CASE("advise ranks and signals", "[advisory]") {
  // steady up-trend: every return +1%, tiny wobble to avoid degeneracy
  std::vector<double> up{100};
  std::vector<double> down{100};
  Rng rng(4);
  for (int i = 0; i < 30; ++i) {
    const double wobble = 0.002 * rng.uniform(-1, 1);
    up.push_back(up.back() * (1.010 + wobble));
    down.push_back(down.back() * (0.990 + wobble));
  }
  const auto up_series = series_from_closes("UP", up);
  const auto down_series = series_from_closes("DOWN", down);
  const auto flat_series = series_from_closes("FLAT", std::vector<double>(20, 42.0));

  const AdvisoryReport report = advise({down_series, flat_series, up_series});
  REQUIRE(report.entries.size() == 3);
  CHECK(report.entries[0].symbol == "UP");
  CHECK(report.entries[0].signal == Signal::Buy);
  CHECK(report.entries[1].symbol == "DOWN");
  CHECK(report.entries[1].signal == Signal::Sell);
  CHECK(report.entries[2].symbol == "FLAT");   // degenerate sinks to the bottom
  CHECK(report.entries[2].signal == Signal::Hold);
  CHECK(report.entries[2].degenerate);

  CHECK_THROWS_AS(advise({}), ConfigError);
}

TEST_CASE("mirrored series reverse the ranking", "[advisory]") {
  Rng rng(6);
  std::vector<double> closes{100};
  std::vector<double> mirrored{100};
  for (int i = 0; i < 25; ++i) {
    const double r = 0.01 * rng.uniform(-1, 1) + 0.002;
    closes.push_back(closes.back() * (1 + r));
    mirrored.push_back(mirrored.back() * (1 - r));
  }
  const AdvisoryReport report =
      advise({series_from_closes("A", closes), series_from_closes("B", mirrored)});
  REQUIRE(report.entries.size() == 2);
  CHECK(report.entries[0].symbol == "A");
  CHECK(report.entries[0].ratio > 0);
  CHECK(report.entries[1].ratio < 0);
}

TEST_CASE("every input symbol appears exactly once", "[advisory]") {
  Rng rng(8);
  std::vector<PriceSeries> set;
  for (int s = 0; s < 7; ++s) {
    std::vector<double> closes{50.0 + s};
    for (int i = 0; i < 15; ++i) closes.push_back(closes.back() * (1 + 0.01 * rng.uniform(-1, 1)));
    set.push_back(series_from_closes("S" + std::to_string(s), closes));
  }
  const AdvisoryReport report = advise(set);
  REQUIRE(report.entries.size() == 7);
  std::set<std::string> seen;
  for (const auto& e : report.entries) seen.insert(e.symbol);
  CHECK(seen.size() == 7);
}

TEST_CASE("forecast-aware advisory raises the mean with a predicted gain", "[advisory]") {
  Rng rng(9);
  std::vector<double> closes{100};
  for (int i = 0; i < 20; ++i) closes.push_back(closes.back() * (1 + 0.005 * rng.uniform(-1, 1)));
  const auto s = series_from_closes("A", closes);

  const AdvisoryReport plain = advise({s});
  std::map<std::string, double> forecast{{"A", closes.back() * 1.10}};
  const AdvisoryReport boosted = advise({s}, &forecast);
  CHECK(boosted.entries[0].mean_return > plain.entries[0].mean_return);
}

TEST_CASE("trailing window restricts the lookback", "[advisory]") {
  // early crash, recent steady climb: trailing stats must look better
  std::vector<double> closes{100, 60, 40};
  for (int i = 0; i < 15; ++i) closes.push_back(closes.back() * 1.01);
  std::vector<double> wob = closes;
  wob[5] *= 1.001;  // avoid zero variance in the trailing window
  const auto s = series_from_closes("A", wob);

  AdvisoryOptions trailing;
  trailing.trailing_days = 10;
  const AdvisoryReport recent = advise({s}, nullptr, trailing);
  const AdvisoryReport full = advise({s});
  CHECK(recent.entries[0].mean_return > full.entries[0].mean_return);
}

TEST_CASE("advisory csv is deterministic", "[advisory]") {
  Rng rng(10);
  std::vector<double> closes{100};
  for (int i = 0; i < 12; ++i) closes.push_back(closes.back() * (1 + 0.01 * rng.uniform(-1, 1)));
  const auto s1 = series_from_closes("AAA", closes);
  const auto s2 = series_from_closes("BBB", std::vector<double>(10, 5.0));

  const auto dir = std::filesystem::temp_directory_path() / "quantbench_advisory";
  std::filesystem::create_directories(dir);
  write_advisory_csv(advise({s1, s2}), dir / "a.csv");
  write_advisory_csv(advise({s1, s2}), dir / "b.csv");

  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = slurp(dir / "a.csv");
  CHECK(a == slurp(dir / "b.csv"));
  CHECK(a.rfind("symbol,mean_return,volatility,ratio,signal\n", 0) == 0);
  CHECK(a.find("BBB,0,0,nan,hold") != std::string::npos);  // degenerate row
}

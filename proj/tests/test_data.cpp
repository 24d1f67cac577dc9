#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "quantbench/data.hpp"

using namespace quantbench;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = QB_FIXTURE_DIR;

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("quantbench_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("well-formed five-row file loads in date order", "[data]") {
  const auto dir = temp_dir("ohlcv5");
  // Deliberately shuffled dates; loader must sort.
  write_file(dir / "t.csv",
             "date,open,high,low,close,adj_close,volume\n"
             "2021-01-06,10,11,9,10.5,10.4,100\n"
             "2021-01-04,10,11,9,10.2,10.1,100\n"
             "2021-01-08,10,11,9,10.8,10.7,100\n"
             "2021-01-05,10,11,9,10.1,10.0,100\n"
             "2021-01-07,10,11,9,10.6,10.5,100\n");
  const PriceSeries s = load_ohlcv_csv(dir / "t.csv", "T");
  REQUIRE(s.size() == 5);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s.bars[i - 1].date < s.bars[i].date);
  CHECK(s.bars.front().date.str() == "2021-01-04");
  CHECK(s.symbol == "T");
}

TEST_CASE("duplicate date is an error naming the date", "[data]") {
  const auto dir = temp_dir("ohlcvdup");
  write_file(dir / "t.csv",
             "date,open,high,low,close,adj_close,volume\n"
             "2021-01-04,10,11,9,10.2,10.1,100\n"
             "2021-01-05,10,11,9,10.1,10.0,100\n"
             "2021-01-05,10,11,9,10.3,10.2,100\n");
  CHECK_THROWS_WITH(load_ohlcv_csv(dir / "t.csv"), Catch::Matchers::ContainsSubstring("2021-01-05"));
}

TEST_CASE("loader rejects bad files with row numbers", "[data]") {
  const auto dir = temp_dir("ohlcvbad");
  write_file(dir / "missing_col.csv", "date,open,high,low,close,volume\n");
  CHECK_THROWS_AS(load_ohlcv_csv(dir / "missing_col.csv"), DataError);

  write_file(dir / "badrow.csv",
             "date,open,high,low,close,adj_close,volume\n"
             "2021-01-04,10,11,9,10.2,10.1,100\n"
             "2021-01-05,10,11,9,oops,10.0,100\n");
  CHECK_THROWS_WITH(load_ohlcv_csv(dir / "badrow.csv"), Catch::Matchers::ContainsSubstring("row 3"));

  // high below close violates the bar invariant
  write_file(dir / "badbar.csv",
             "date,open,high,low,close,adj_close,volume\n"
             "2021-01-04,10,10.1,9,10.2,10.1,100\n"
             "2021-01-05,10,11,9,10.0,10.0,100\n");
  CHECK_THROWS_WITH(load_ohlcv_csv(dir / "badbar.csv"), Catch::Matchers::ContainsSubstring("row 2"));

  CHECK_THROWS_AS(load_ohlcv_csv(dir / "nothere.csv"), DataError);
}

TEST_CASE("msft fixture last close matches an independent text parse", "[data]") {
  const PriceSeries s = load_ohlcv_csv(kFixtures / "msft_2021.csv", "MSFT");
  REQUIRE(s.size() == 252);

  // Independent parse: grab the close field of the last non-empty line.
  std::ifstream in(kFixtures / "msft_2021.csv");
  std::string line, last;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  std::size_t pos = 0;
  for (int comma = 0; comma < 4; ++comma) pos = last.find(',', pos) + 1;
  const double want = std::strtod(last.c_str() + pos, nullptr);
  CHECK(s.bars.back().close == want);
}

TEST_CASE("csv round trip is identical", "[data]") {
  const PriceSeries s = load_ohlcv_csv(kFixtures / "msft_2021.csv", "MSFT");
  const auto dir = temp_dir("roundtrip");
  save_ohlcv_csv(s, dir / "MSFT.csv");
  const PriceSeries back = load_ohlcv_csv(dir / "MSFT.csv", "MSFT");
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(back.bars[i].date == s.bars[i].date);
    CHECK(back.bars[i].open == s.bars[i].open);
    CHECK(back.bars[i].high == s.bars[i].high);
    CHECK(back.bars[i].low == s.bars[i].low);
    CHECK(back.bars[i].close == s.bars[i].close);
    CHECK(back.bars[i].adj_close == s.bars[i].adj_close);
    CHECK(back.bars[i].volume == s.bars[i].volume);
  }
}

TEST_CASE("fetch_history slices and validates", "[data]") {
  const auto dir = temp_dir("cache");
  fs::copy_file(kFixtures / "msft_2021.csv", dir / "MSFT.csv");
  DirectoryCacheSource source{dir};

  const PriceSeries full = fetch_history("MSFT", Date::parse("2021-01-01"),
                                         Date::parse("2021-12-31"), source);
  CHECK(full.size() == 252);

  const PriceSeries slice =
      fetch_history("MSFT", Date::parse("2021-03-01"), Date::parse("2021-03-03"), source);
  CHECK(slice.size() == 3);  // Mar 1-3 2021 are Mon..Wed

  CHECK_THROWS_AS(fetch_history("NOPE", Date::parse("2021-01-01"), Date::parse("2021-02-01"), source),
                  DataError);
  CHECK_THROWS_AS(
      fetch_history("MSFT", Date::parse("2022-05-01"), Date::parse("2022-06-01"), source),
      DataError);  // empty range
  CHECK_THROWS_AS(
      fetch_history("MSFT", Date::parse("2021-06-01"), Date::parse("2021-06-01"), source),
      DataError);  // start must precede end
}

TEST_CASE("contiguous fetches union to the full fetch", "[data]") {
  const auto dir = temp_dir("cache2");
  fs::copy_file(kFixtures / "msft_2021.csv", dir / "MSFT.csv");
  DirectoryCacheSource source{dir};

  const auto a = fetch_history("MSFT", Date::parse("2021-02-01"), Date::parse("2021-05-14"), source);
  const auto b = fetch_history("MSFT", Date::parse("2021-05-15"), Date::parse("2021-09-30"), source);
  const auto whole =
      fetch_history("MSFT", Date::parse("2021-02-01"), Date::parse("2021-09-30"), source);
  REQUIRE(a.size() + b.size() == whole.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.bars[i].date == whole.bars[i].date);
  for (std::size_t i = 0; i < b.size(); ++i) {
    CHECK(b.bars[i].date == whole.bars[a.size() + i].date);
  }
}

TEST_CASE("news jsonl loading", "[data]") {
  const auto dir = temp_dir("news");
  write_file(dir / "empty.jsonl", "");
  CHECK(load_news_jsonl(dir / "empty.jsonl").empty());

  write_file(dir / "ok.jsonl",
             R"({"date":"2021-01-04","symbol":"MSFT","text":"strong quarter"})"
             "\n"
             R"({"date":"2021-01-05","symbol":"MSFT","text":"shares rally"})"
             "\n"
             R"({"date":"2021-01-06","symbol":"AAPL","text":"downgrade hits"})"
             "\n");
  const auto items = load_news_jsonl(dir / "ok.jsonl");
  REQUIRE(items.size() == 3);
  CHECK(items[0].text == "strong quarter");
  CHECK(items[2].symbol == "AAPL");

  write_file(dir / "blank.jsonl",
             R"({"date":"2021-01-04","symbol":"MSFT","text":"ok item"})"
             "\n"
             R"({"date":"2021-01-05","symbol":"MSFT","text":"   "})"
             "\n");
  CHECK_THROWS_WITH(load_news_jsonl(dir / "blank.jsonl"),
                    Catch::Matchers::ContainsSubstring("line 2"));

  write_file(dir / "broken.jsonl", "{not json}\n");
  CHECK_THROWS_WITH(load_news_jsonl(dir / "broken.jsonl"),
                    Catch::Matchers::ContainsSubstring("line 1"));

  const auto fixture_items = load_news_jsonl(kFixtures / "news_2021.jsonl");
  CHECK(fixture_items.size() == 46);
}

TEST_CASE("cache dir env var supplies the default", "[data]") {
  const auto dir = temp_dir("envcache");
  REQUIRE(setenv("QUANTBENCH_CACHE_DIR", dir.string().c_str(), 1) == 0);
  CHECK(default_cache_dir() == dir.string());
  unsetenv("QUANTBENCH_CACHE_DIR");
  CHECK(default_cache_dir().empty());
}

TEST_CASE("fundamentals csv loading", "[data]") {
  const auto records = load_fundamentals_csv(fs::path(QB_FIXTURE_DIR) / "fundamentals.csv");
  REQUIRE(records.size() == 7);
  CHECK(records[0].symbol == "MSFT");
  CHECK(records[4].eps < 0.0);  // loss-making firm is allowed
  CHECK(records[0].sector == "technology");
}

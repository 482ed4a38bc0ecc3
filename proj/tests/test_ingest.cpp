#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "aqibench/ingest.hpp"

using namespace aqibench;

namespace {

const char* kHeader = "Date,Daily Mean PM2.5 Concentration,Daily AQI Value,Local Site Name\n";

std::vector<RawObservation> parse(const std::string& body, IngestStats* stats = nullptr) {
    std::istringstream in(std::string(kHeader) + body);
    return parse_epa_daily_csv(in, ColumnMap{}, DateFormat::MonthDayYear, stats);
}

}  // namespace

TEST_CASE("a well-formed row becomes one observation") {
    const auto rows = parse("01/01/2022,6.10,34,site-A\n");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].date.to_iso() == "2022-01-01");
    CHECK(rows[0].station_id == "site-A");
    CHECK(rows[0].concentration == 6.10);
    CHECK(rows[0].aqi == 34.0);
}

TEST_CASE("rows with defects are dropped and counted") {
    IngestStats stats;
    const auto rows = parse(
        "01/01/2022,6.10,34,site-A\n"
        "bogus,6.10,34,site-A\n"        // bad date
        "01/02/2022,,34,site-A\n"       // missing concentration
        "01/03/2022,6.10,,site-A\n"     // missing aqi
        "01/04/2022,-1.0,34,site-A\n"   // negative concentration
        "01/05/2022,6.10,600,site-A\n"  // aqi out of range
        "01/06/2022,7.00,40,site-B\n",
        &stats);
    REQUIRE(rows.size() == 2);
    CHECK(stats.rows_total == 7);
    CHECK(stats.rows_kept == 2);
    CHECK(stats.rows_dropped == 5);
}

TEST_CASE("missing header column is a hard error naming the column") {
    std::istringstream in("Date,Daily AQI Value,Local Site Name\n01/01/2022,34,site-A\n");
    try {
        parse_epa_daily_csv(in, ColumnMap{}, DateFormat::MonthDayYear);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("Daily Mean PM2.5 Concentration") != std::string::npos);
    }
}

TEST_CASE("empty input and header-only input are errors") {
    std::istringstream empty("");
    CHECK_THROWS_AS(parse_epa_daily_csv(empty, ColumnMap{}, DateFormat::MonthDayYear), ParseError);
    CHECK_THROWS_AS(parse(""), ParseError);
}

TEST_CASE("columns are located by name, not position") {
    std::istringstream in(
        "Local Site Name,Daily AQI Value,Date,Daily Mean PM2.5 Concentration,Extra\n"
        "site-A,34,01/01/2022,6.10,ignored\n");
    const auto rows = parse_epa_daily_csv(in, ColumnMap{}, DateFormat::MonthDayYear);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].concentration == 6.10);
}

TEST_CASE("daily aggregation averages stations after collapsing duplicates") {
    std::vector<RawObservation> obs;
    const Date day = *Date::parse("2022-01-01", DateFormat::Iso);
    // Station A reports twice (e.g. duplicate POC rows): average first -> 10.
    obs.push_back({day, "A", 8.0, 20.0});
    obs.push_back({day, "A", 12.0, 40.0});
    obs.push_back({day, "B", 20.0, 60.0});
    const auto series = aggregate_daily_mean(obs, Pollutant::Pm25);
    REQUIRE(series.rows.size() == 1);
    // cross-station mean of {10, 20} = 15; of {30, 60} = 45
    CHECK(series.rows[0].mean_concentration == Catch::Approx(15.0));
    CHECK(series.rows[0].mean_aqi == Catch::Approx(45.0));
}

TEST_CASE("two-station mean is the arithmetic average") {
    std::vector<RawObservation> obs;
    const Date day = *Date::parse("2022-03-05", DateFormat::Iso);
    obs.push_back({day, "A", 15.0, 50.0});
    obs.push_back({day, "B", 50.0, 120.0});
    const auto series = aggregate_daily_mean(obs, Pollutant::Pm25);
    REQUIRE(series.rows.size() == 1);
    CHECK(series.rows[0].mean_concentration == Catch::Approx(32.5));
    CHECK(series.rows[0].mean_aqi == Catch::Approx(85.0));
}

TEST_CASE("aggregation output is sorted by date") {
    std::vector<RawObservation> obs;
    obs.push_back({*Date::parse("2022-01-03", DateFormat::Iso), "A", 1.0, 1.0});
    obs.push_back({*Date::parse("2022-01-01", DateFormat::Iso), "A", 2.0, 2.0});
    obs.push_back({*Date::parse("2022-01-02", DateFormat::Iso), "A", 3.0, 3.0});
    const auto series = aggregate_daily_mean(obs, Pollutant::Pm25);
    REQUIRE(series.rows.size() == 3);
    CHECK(series.rows[0].date.to_iso() == "2022-01-01");
    CHECK(series.rows[2].date.to_iso() == "2022-01-03");
}

TEST_CASE("aggregating no observations is an error") {
    CHECK_THROWS_AS(aggregate_daily_mean({}, Pollutant::Pm25), ValidationError);
}

namespace {

DailySeries tiny_series(Pollutant p, const char* first_iso, int days, double base) {
    DailySeries s;
    s.pollutant = p;
    Date d = *Date::parse(first_iso, DateFormat::Iso);
    for (int i = 0; i < days; ++i) {
        s.rows.push_back({d.plus_days(i), base + i, base + 2 * i});
    }
    return s;
}

}  // namespace

TEST_CASE("merge_years concatenates disjoint years in order") {
    const auto a = tiny_series(Pollutant::Pm25, "2023-01-01", 3, 10.0);
    const auto b = tiny_series(Pollutant::Pm25, "2022-01-01", 3, 1.0);
    const auto merged = merge_years({a, b});  // deliberately out of order
    REQUIRE(merged.rows.size() == 6);
    CHECK(merged.rows.front().date.to_iso() == "2022-01-01");
    CHECK(merged.rows.back().date.to_iso() == "2023-01-03");
}

TEST_CASE("merge_years rejects overlapping dates and mixed pollutants") {
    const auto a = tiny_series(Pollutant::Pm25, "2022-01-01", 3, 1.0);
    const auto overlap = tiny_series(Pollutant::Pm25, "2022-01-03", 3, 9.0);
    try {
        merge_years({a, overlap});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("2022-01-03") != std::string::npos);
    }
    const auto o3 = tiny_series(Pollutant::O3, "2023-01-01", 3, 0.01);
    CHECK_THROWS_AS(merge_years({a, o3}), ValidationError);
    CHECK_THROWS_AS(merge_years({}), ValidationError);
}

TEST_CASE("series summary reports population statistics") {
    DailySeries s = tiny_series(Pollutant::Pm25, "2022-01-01", 2, 0.0);
    s.rows[0].mean_aqi = 10.0;
    s.rows[1].mean_aqi = 20.0;
    const auto sum = series_summary(s);
    CHECK(sum.n == 2);
    CHECK(sum.aqi_mean == Catch::Approx(15.0));
    // population std of {10,20} is 5, not the sample value ~7.07
    CHECK(sum.aqi_std == Catch::Approx(5.0));
    CHECK(sum.first_date.to_iso() == "2022-01-01");
    CHECK(sum.last_date.to_iso() == "2022-01-02");
}

TEST_CASE("series csv round-trips") {
    const auto s = tiny_series(Pollutant::Pm25, "2022-01-01", 5, 3.25);
    std::ostringstream out;
    write_series_csv(s, out);
    std::istringstream in(out.str());
    const auto back = read_series_csv(in, Pollutant::Pm25);
    REQUIRE(back.rows.size() == s.rows.size());
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
        CHECK(back.rows[i].date == s.rows[i].date);
        CHECK(back.rows[i].mean_concentration == s.rows[i].mean_concentration);
        CHECK(back.rows[i].mean_aqi == s.rows[i].mean_aqi);
    }
}

TEST_CASE("series reader rejects unsorted dates") {
    std::istringstream in(
        "DATE,DAILY_MEAN,DAILY_AQI\n"
        "2022-01-02,1,2\n"
        "2022-01-01,1,2\n");
    CHECK_THROWS_AS(read_series_csv(in, Pollutant::Pm25), ParseError);
}

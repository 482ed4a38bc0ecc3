#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "aqibench/lag.hpp"

using namespace aqibench;

namespace {

// First days of a PM2.5 series; AQI values chosen so the lag-1 and lag-30
// targets match the published sample rows (34 -> 26 at lag 1, -> 19 at lag 30).
DailySeries sample_series() {
    DailySeries s;
    s.pollutant = Pollutant::Pm25;
    Date d = *Date::parse("2022-01-01", DateFormat::Iso);
    for (int i = 0; i < 40; ++i) {
        double aqi = 50.0 + i;
        if (i == 0) aqi = 34.0;
        if (i == 1) aqi = 26.0;
        if (i == 30) aqi = 19.0;
        const double conc = (i == 0) ? 6.10 : 10.0 + 0.25 * i;
        s.rows.push_back({d.plus_days(i), conc, aqi});
    }
    return s;
}

}  // namespace

TEST_CASE("lag-1 pairs today's features with tomorrow's AQI") {
    const auto ds = build_lag_dataset(sample_series(), 1);
    REQUIRE(ds.rows.size() == 39);
    CHECK(ds.rows[0].x_conc == 6.10);
    CHECK(ds.rows[0].x_aqi == 34.0);
    CHECK(ds.rows[0].y_future_aqi == 26.0);
    CHECK(ds.rows[0].date.to_iso() == "2022-01-01");
    CHECK(ds.rows[0].target_date.to_iso() == "2022-01-02");
}

TEST_CASE("lag-30 reaches thirty rows ahead") {
    const auto ds = build_lag_dataset(sample_series(), 30);
    REQUIRE(ds.rows.size() == 10);
    CHECK(ds.rows[0].x_aqi == 34.0);
    CHECK(ds.rows[0].y_future_aqi == 19.0);
    CHECK(ds.rows[0].target_date.to_iso() == "2022-01-31");
}

TEST_CASE("lag dataset has exactly n - L rows") {
    const auto s = sample_series();
    for (int lag : {1, 7, 14, 30}) {
        CHECK(build_lag_dataset(s, lag).rows.size() == s.rows.size() - static_cast<std::size_t>(lag));
    }
}

TEST_CASE("lag longer than the series is an error") {
    const auto s = sample_series();
    CHECK_THROWS_AS(build_lag_dataset(s, 40), ValidationError);
    CHECK_THROWS_AS(build_lag_dataset(s, 1000), ValidationError);
    CHECK_THROWS_AS(build_lag_dataset(s, 0), ValidationError);
}

TEST_CASE("chronological split at 80/20 keeps the first 8 of 10 rows for training") {
    DailySeries s;
    s.pollutant = Pollutant::Pm25;
    Date d = *Date::parse("2022-01-01", DateFormat::Iso);
    for (int i = 0; i < 11; ++i) s.rows.push_back({d.plus_days(i), 1.0 * i, 2.0 * i});
    const auto ds = build_lag_dataset(s, 1);  // 10 rows
    REQUIRE(ds.rows.size() == 10);
    const auto split = chrono_split(ds, 0.8);
    REQUIRE(split.train.rows.size() == 8);
    REQUIRE(split.test.rows.size() == 2);
    // order preserved, no shuffling
    CHECK(split.train.rows.front().date == ds.rows[0].date);
    CHECK(split.train.rows.back().date == ds.rows[7].date);
    CHECK(split.test.rows.front().date == ds.rows[8].date);
    // every training date precedes every test date
    CHECK(split.train.rows.back().date < split.test.rows.front().date);
}

TEST_CASE("degenerate splits are rejected") {
    const auto ds = build_lag_dataset(sample_series(), 1);
    CHECK_THROWS_AS(chrono_split(ds, 0.0), ValidationError);
    CHECK_THROWS_AS(chrono_split(ds, 1.0), ValidationError);
    CHECK_THROWS_AS(chrono_split(ds, 0.001), ValidationError);  // empty train side
    LagDataset tiny;
    tiny.rows.resize(1);
    CHECK_THROWS_AS(chrono_split(tiny, 0.8), ValidationError);
}

TEST_CASE("lag csv export carries the horizon in the target header") {
    const auto ds = build_lag_dataset(sample_series(), 7);
    std::ostringstream out;
    write_lag_csv(ds, out);
    const std::string text = out.str();
    CHECK(text.rfind("DATE,X_CONC,X_AQI,Y_AQI_LAG_7\n", 0) == 0);
    // one line per row plus header
    std::size_t lines = 0;
    for (char c : text) lines += (c == '\n');
    CHECK(lines == ds.rows.size() + 1);
}

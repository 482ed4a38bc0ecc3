#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aqibench/csv.hpp"
#include "aqibench/date.hpp"
#include "aqibench/errors.hpp"

namespace aqibench {

enum class Pollutant { Pm25, O3 };

inline std::string_view pollutant_name(Pollutant p) {
    return p == Pollutant::Pm25 ? "PM2.5" : "O3";
}

inline std::optional<Pollutant> pollutant_from_string(std::string_view s) {
    if (s == "PM2.5" || s == "pm25" || s == "PM25") return Pollutant::Pm25;
    if (s == "O3" || s == "o3" || s == "ozone") return Pollutant::O3;
    return std::nullopt;
}

/// One station-day record from a raw EPA export.
struct RawObservation {
    Date date;
    std::string station_id;
    double concentration = 0.0;  // µg/m³ for PM2.5, ppm for O3
    double aqi = 0.0;
};

/// Column headers locating the fields we need inside an EPA export.
/// Matched case-insensitively against the file's header row.
struct ColumnMap {
    std::string date = "Date";
    std::string concentration = "Daily Mean PM2.5 Concentration";
    std::string aqi = "Daily AQI Value";
    std::string station = "Local Site Name";
};

struct IngestStats {
    std::size_t rows_total = 0;    // data rows seen (header excluded)
    std::size_t rows_kept = 0;
    std::size_t rows_dropped = 0;  // unparseable date, missing/invalid value
};

/// Station-averaged daily record.
struct SeriesRow {
    Date date;
    double mean_concentration = 0.0;
    double mean_aqi = 0.0;
};

/// Clean multi-year daily series: strictly increasing dates, no gaps in the
/// fields (gaps in the calendar are allowed and handled downstream).
struct DailySeries {
    Pollutant pollutant = Pollutant::Pm25;
    std::vector<SeriesRow> rows;
};

/// Parses one EPA daily export. Rows whose date cannot be parsed or whose
/// concentration/AQI fields are blank or out of range are dropped and
/// counted in `stats`, mirroring a drop-NA pass.
inline std::vector<RawObservation> parse_epa_daily_csv(std::istream& in,
                                                       const ColumnMap& columns,
                                                       DateFormat date_format,
                                                       IngestStats* stats = nullptr) {
    std::string line;
    if (!csv::getline(in, line)) throw ParseError("empty dataset: no header row");
    const auto header = csv::split_line(line);

    auto find_column = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (csv::header_equals(header[i], name)) return i;
        }
        throw ParseError("missing column \"" + name + "\" in header");
    };
    const std::size_t idx_date = find_column(columns.date);
    const std::size_t idx_conc = find_column(columns.concentration);
    const std::size_t idx_aqi = find_column(columns.aqi);
    const std::size_t idx_station = find_column(columns.station);
    const std::size_t max_idx = std::max({idx_date, idx_conc, idx_aqi, idx_station});

    IngestStats local;
    std::vector<RawObservation> out;
    while (csv::getline(in, line)) {
        if (csv::trim(line).empty()) continue;
        ++local.rows_total;
        const auto fields = csv::split_line(line);
        if (fields.size() <= max_idx) {
            ++local.rows_dropped;
            continue;
        }
        const auto date = Date::parse(csv::trim(fields[idx_date]), date_format);
        const auto conc = csv::parse_double(fields[idx_conc]);
        const auto aqi = csv::parse_double(fields[idx_aqi]);
        if (!date || !conc || !aqi || *conc < 0.0 || *aqi < 0.0 || *aqi > 500.0) {
            ++local.rows_dropped;
            continue;
        }
        ++local.rows_kept;
        out.push_back(RawObservation{*date, std::string(csv::trim(fields[idx_station])),
                                     *conc, *aqi});
    }
    if (local.rows_total == 0) throw ParseError("empty dataset: no data rows");
    if (stats) *stats = local;
    return out;
}

inline std::vector<RawObservation> parse_epa_daily_csv_file(const std::string& path,
                                                            const ColumnMap& columns,
                                                            DateFormat date_format,
                                                            IngestStats* stats = nullptr) {
    auto in = csv::open_for_read(path);
    try {
        return parse_epa_daily_csv(in, columns, date_format, stats);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

/// Averages observations across stations for each date. Duplicate records
/// for the same (date, station) pair are averaged first, so a station that
/// reports twice does not get double weight.
inline DailySeries aggregate_daily_mean(const std::vector<RawObservation>& observations,
                                        Pollutant pollutant) {
    if (observations.empty()) {
        throw ValidationError("aggregate_daily_mean: no observations");
    }
    struct Accum {
        double sum_conc = 0.0;
        double sum_aqi = 0.0;
        std::size_t count = 0;
    };
    std::map<int, std::map<std::string, Accum>> by_date;
    for (const auto& obs : observations) {
        auto& a = by_date[obs.date.serial()][obs.station_id];
        a.sum_conc += obs.concentration;
        a.sum_aqi += obs.aqi;
        ++a.count;
    }
    DailySeries series;
    series.pollutant = pollutant;
    series.rows.reserve(by_date.size());
    for (const auto& [serial, stations] : by_date) {
        double sum_conc = 0.0;
        double sum_aqi = 0.0;
        for (const auto& [station, a] : stations) {
            sum_conc += a.sum_conc / static_cast<double>(a.count);
            sum_aqi += a.sum_aqi / static_cast<double>(a.count);
        }
        const double n = static_cast<double>(stations.size());
        series.rows.push_back(SeriesRow{Date::from_serial(serial), sum_conc / n, sum_aqi / n});
    }
    return series;
}

/// Concatenates per-year series into one global series sorted by date.
/// Inputs must share a pollutant and must not overlap in dates.
inline DailySeries merge_years(const std::vector<DailySeries>& series_list) {
    if (series_list.empty()) throw ValidationError("merge_years: no input series");
    DailySeries merged;
    merged.pollutant = series_list.front().pollutant;
    for (const auto& s : series_list) {
        if (s.pollutant != merged.pollutant) {
            throw ValidationError("merge_years: mixed pollutants");
        }
        merged.rows.insert(merged.rows.end(), s.rows.begin(), s.rows.end());
    }
    std::sort(merged.rows.begin(), merged.rows.end(),
              [](const SeriesRow& a, const SeriesRow& b) { return a.date < b.date; });
    std::string collisions;
    for (std::size_t i = 1; i < merged.rows.size(); ++i) {
        if (merged.rows[i].date == merged.rows[i - 1].date) {
            if (!collisions.empty()) collisions += ", ";
            collisions += merged.rows[i].date.to_iso();
        }
    }
    if (!collisions.empty()) {
        throw ValidationError("merge_years: duplicate dates across inputs: " + collisions);
    }
    return merged;
}

struct SummaryStats {
    std::size_t n = 0;
    Date first_date;
    Date last_date;
    double conc_min = 0.0, conc_max = 0.0, conc_mean = 0.0, conc_std = 0.0;
    double aqi_min = 0.0, aqi_max = 0.0, aqi_mean = 0.0, aqi_std = 0.0;
};

/// Count, range, mean and population standard deviation of both fields.
inline SummaryStats series_summary(const DailySeries& series) {
    if (series.rows.empty()) throw ValidationError("series_summary: empty series");
    SummaryStats s;
    s.n = series.rows.size();
    s.first_date = series.rows.front().date;
    s.last_date = series.rows.back().date;
    s.conc_min = s.conc_max = series.rows.front().mean_concentration;
    s.aqi_min = s.aqi_max = series.rows.front().mean_aqi;
    double sum_conc = 0.0, sum_aqi = 0.0;
    for (const auto& row : series.rows) {
        s.conc_min = std::min(s.conc_min, row.mean_concentration);
        s.conc_max = std::max(s.conc_max, row.mean_concentration);
        s.aqi_min = std::min(s.aqi_min, row.mean_aqi);
        s.aqi_max = std::max(s.aqi_max, row.mean_aqi);
        sum_conc += row.mean_concentration;
        sum_aqi += row.mean_aqi;
    }
    const double n = static_cast<double>(s.n);
    s.conc_mean = sum_conc / n;
    s.aqi_mean = sum_aqi / n;
    double ss_conc = 0.0, ss_aqi = 0.0;
    for (const auto& row : series.rows) {
        ss_conc += (row.mean_concentration - s.conc_mean) * (row.mean_concentration - s.conc_mean);
        ss_aqi += (row.mean_aqi - s.aqi_mean) * (row.mean_aqi - s.aqi_mean);
    }
    s.conc_std = std::sqrt(ss_conc / n);
    s.aqi_std = std::sqrt(ss_aqi / n);
    return s;
}

inline void write_series_csv(const DailySeries& series, std::ostream& out) {
    out << "DATE,DAILY_MEAN,DAILY_AQI\n";
    for (const auto& row : series.rows) {
        out << row.date.to_iso() << ',' << csv::format_double(row.mean_concentration) << ','
            << csv::format_double(row.mean_aqi) << '\n';
    }
}

inline void write_series_csv_file(const DailySeries& series, const std::string& path) {
    auto out = csv::open_for_write(path);
    write_series_csv(series, out);
}

inline DailySeries read_series_csv(std::istream& in, Pollutant pollutant) {
    std::string line;
    if (!csv::getline(in, line)) throw ParseError("series file: missing header");
    const auto header = csv::split_line(line);
    if (header.size() < 3 || !csv::header_equals(header[0], "DATE") ||
        !csv::header_equals(header[1], "DAILY_MEAN") ||
        !csv::header_equals(header[2], "DAILY_AQI")) {
        throw ParseError("series file: expected header DATE,DAILY_MEAN,DAILY_AQI");
    }
    DailySeries series;
    series.pollutant = pollutant;
    std::size_t lineno = 1;
    while (csv::getline(in, line)) {
        ++lineno;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split_line(line);
        if (fields.size() < 3) {
            throw ParseError("series file line " + std::to_string(lineno) + ": expected 3 fields");
        }
        const auto date = Date::parse(csv::trim(fields[0]), DateFormat::Iso);
        const auto conc = csv::parse_double(fields[1]);
        const auto aqi = csv::parse_double(fields[2]);
        if (!date || !conc || !aqi) {
            throw ParseError("series file line " + std::to_string(lineno) + ": bad values");
        }
        if (!series.rows.empty() && !(series.rows.back().date < *date)) {
            throw ParseError("series file line " + std::to_string(lineno) +
                             ": dates not strictly increasing");
        }
        series.rows.push_back(SeriesRow{*date, *conc, *aqi});
    }
    return series;
}

inline DailySeries read_series_csv_file(const std::string& path, Pollutant pollutant) {
    auto in = csv::open_for_read(path);
    try {
        return read_series_csv(in, pollutant);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

}  // namespace aqibench

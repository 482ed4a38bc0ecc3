#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "aqibench/csv.hpp"
#include "aqibench/date.hpp"
#include "aqibench/errors.hpp"
#include "aqibench/ingest.hpp"

namespace aqibench {

/// One supervised example: today's features paired with the AQI observed
/// `lag` rows later. `target_date` is the calendar date that y refers to,
/// kept so forecasts can be plotted on the right axis position.
struct LagRow {
    Date date;
    Date target_date;
    double x_conc = 0.0;
    double x_aqi = 0.0;
    double y_future_aqi = 0.0;
};

struct LagDataset {
    Pollutant pollutant = Pollutant::Pm25;
    int lag = 1;
    std::vector<LagRow> rows;
};

struct SplitDataset {
    LagDataset train;
    LagDataset test;
    double alpha = 0.8;
};

/// Pairs row i with the AQI at row i+lag. Indexing is positional over the
/// cleaned series, so missing calendar days shift the effective horizon —
/// consistent with how the datasets in the reference tables were built.
inline LagDataset build_lag_dataset(const DailySeries& series, int lag) {
    if (lag < 1) throw ValidationError("build_lag_dataset: lag must be >= 1");
    if (series.rows.size() <= static_cast<std::size_t>(lag)) {
        throw ValidationError("build_lag_dataset: series length " +
                              std::to_string(series.rows.size()) +
                              " too short for lag " + std::to_string(lag));
    }
    LagDataset ds;
    ds.pollutant = series.pollutant;
    ds.lag = lag;
    const std::size_t n = series.rows.size() - static_cast<std::size_t>(lag);
    ds.rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& today = series.rows[i];
        const auto& future = series.rows[i + static_cast<std::size_t>(lag)];
        ds.rows.push_back(LagRow{today.date, future.date, today.mean_concentration,
                                 today.mean_aqi, future.mean_aqi});
    }
    return ds;
}

/// Chronological split with boundary floor(alpha*n); no shuffling.
inline SplitDataset chrono_split(const LagDataset& ds, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("chrono_split: alpha must be in (0,1)");
    }
    const std::size_t n = ds.rows.size();
    if (n < 2) throw ValidationError("chrono_split: need at least 2 rows");
    const std::size_t boundary = static_cast<std::size_t>(alpha * static_cast<double>(n));
    if (boundary == 0 || boundary == n) {
        throw ValidationError("chrono_split: split leaves an empty side");
    }
    SplitDataset split;
    split.alpha = alpha;
    split.train.pollutant = split.test.pollutant = ds.pollutant;
    split.train.lag = split.test.lag = ds.lag;
    split.train.rows.assign(ds.rows.begin(), ds.rows.begin() + static_cast<std::ptrdiff_t>(boundary));
    split.test.rows.assign(ds.rows.begin() + static_cast<std::ptrdiff_t>(boundary), ds.rows.end());
    return split;
}

inline void write_lag_csv(const LagDataset& ds, std::ostream& out) {
    out << "DATE,X_CONC,X_AQI,Y_AQI_LAG_" << ds.lag << '\n';
    for (const auto& row : ds.rows) {
        out << row.date.to_iso() << ',' << csv::format_double(row.x_conc) << ','
            << csv::format_double(row.x_aqi) << ',' << csv::format_double(row.y_future_aqi)
            << '\n';
    }
}

inline void write_lag_csv_file(const LagDataset& ds, const std::string& path) {
    auto out = csv::open_for_write(path);
    write_lag_csv(ds, out);
}

}  // namespace aqibench

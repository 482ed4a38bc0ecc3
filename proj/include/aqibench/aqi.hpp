#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aqibench/errors.hpp"
#include "aqibench/ingest.hpp"

namespace aqibench {

/// One row of an EPA breakpoint table: concentrations [c_lo, c_hi] map
/// linearly onto index points [i_lo, i_hi].
struct BreakpointSegment {
    double c_lo = 0.0;
    double c_hi = 0.0;
    double i_lo = 0.0;
    double i_hi = 0.0;
};

class BreakpointTable {
  public:
    BreakpointTable(Pollutant pollutant, int truncation_digits, double aqi_cap,
                    std::vector<BreakpointSegment> segments)
        : pollutant_(pollutant),
          truncation_digits_(truncation_digits),
          aqi_cap_(aqi_cap),
          segments_(std::move(segments)) {
        validate();
    }

    Pollutant pollutant() const { return pollutant_; }
    int truncation_digits() const { return truncation_digits_; }
    double aqi_cap() const { return aqi_cap_; }
    const std::vector<BreakpointSegment>& segments() const { return segments_; }

    /// EPA convention: concentrations are truncated (not rounded) to a fixed
    /// number of decimals before the table lookup. The small epsilon absorbs
    /// binary representation error so that e.g. 0.055 truncates to 0.055.
    double truncate_concentration(double conc) const {
        const double scale = std::pow(10.0, truncation_digits_);
        return std::floor(conc * scale + 1e-7) / scale;
    }

    /// Piecewise-linear index: I = i_lo + (i_hi - i_lo)/(c_hi - c_lo) * (c - c_lo).
    /// Concentrations beyond the last segment return the cap. A value landing
    /// in the truncation gap between two segments resolves to the start of the
    /// higher segment.
    double compute_aqi(double conc) const {
        if (conc < 0.0) {
            throw ValidationError("compute_aqi: negative concentration");
        }
        const double c = truncate_concentration(conc);
        for (const auto& seg : segments_) {
            if (c > seg.c_hi) continue;
            const double cc = std::max(c, seg.c_lo);
            // Endpoints must hit the index values exactly; the slope/offset
            // arithmetic below can be off by an ulp there.
            if (cc == seg.c_lo) return seg.i_lo;
            if (cc == seg.c_hi) return seg.i_hi;
            return seg.i_lo + (seg.i_hi - seg.i_lo) / (seg.c_hi - seg.c_lo) * (cc - seg.c_lo);
        }
        return aqi_cap_;
    }

    std::vector<double> compute_aqi_batch(const std::vector<double>& conc) const {
        std::vector<double> out;
        out.reserve(conc.size());
        for (double c : conc) out.push_back(compute_aqi(c));
        return out;
    }

  private:
    void validate() const {
        if (segments_.empty()) {
            throw ValidationError("breakpoint table: no segments");
        }
        if (truncation_digits_ < 0 || truncation_digits_ > 6) {
            throw ValidationError("breakpoint table: truncation digits out of range");
        }
        if (segments_.front().c_lo != 0.0) {
            throw ValidationError("breakpoint table: first segment must start at 0");
        }
        if (aqi_cap_ != 500.0) {
            throw ValidationError("breakpoint table: AQI cap must be 500");
        }
        const double quantum = std::pow(10.0, -truncation_digits_);
        for (std::size_t k = 0; k < segments_.size(); ++k) {
            const auto& seg = segments_[k];
            if (!(seg.c_lo < seg.c_hi) || !(seg.i_lo < seg.i_hi)) {
                throw ValidationError("breakpoint table: degenerate segment " +
                                      std::to_string(k));
            }
            if (k == 0) continue;
            const auto& prev = segments_[k - 1];
            const double gap = seg.c_lo - prev.c_hi;
            if (gap <= 0.0) {
                throw ValidationError("breakpoint table: segments " + std::to_string(k - 1) +
                                      " and " + std::to_string(k) + " overlap");
            }
            if (gap > quantum + 1e-9) {
                throw ValidationError("breakpoint table: gap between segments " +
                                      std::to_string(k - 1) + " and " + std::to_string(k) +
                                      " exceeds one truncation step");
            }
            if (std::abs(seg.i_lo - (prev.i_hi + 1.0)) > 1e-9) {
                throw ValidationError("breakpoint table: index discontinuity between segments " +
                                      std::to_string(k - 1) + " and " + std::to_string(k));
            }
        }
    }

    Pollutant pollutant_;
    int truncation_digits_;
    double aqi_cap_;
    std::vector<BreakpointSegment> segments_;
};

inline BreakpointTable load_breakpoint_table(const nlohmann::json& j) {
    if (!j.contains("pollutant")) {
        throw ValidationError("breakpoint config: missing pollutant field");
    }
    const auto pollutant = pollutant_from_string(j.at("pollutant").get<std::string>());
    if (!pollutant) {
        throw ValidationError("breakpoint config: unknown pollutant \"" +
                              j.at("pollutant").get<std::string>() + "\"");
    }
    if (!j.contains("truncation_digits")) {
        throw ValidationError("breakpoint config: missing truncation_digits field");
    }
    if (!j.contains("segments") || !j.at("segments").is_array()) {
        throw ValidationError("breakpoint config: missing segments array");
    }
    std::vector<BreakpointSegment> segments;
    for (const auto& seg : j.at("segments")) {
        segments.push_back(BreakpointSegment{
            seg.at("c_lo").get<double>(), seg.at("c_hi").get<double>(),
            seg.at("i_lo").get<double>(), seg.at("i_hi").get<double>()});
    }
    const double cap = j.value("aqi_cap", 500.0);
    return BreakpointTable(*pollutant, j.at("truncation_digits").get<int>(), cap,
                           std::move(segments));
}

inline BreakpointTable load_breakpoint_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open breakpoint config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("breakpoint config " + path + ": " + e.what());
    }
    try {
        return load_breakpoint_table(j);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

/// Weighting of the data and physics terms in the composite objective
/// L_total = lambda_data * L_data + lambda_phys * L_phys.
struct LossWeights {
    double lambda_data = 1.0;
    double lambda_phys = 0.0;

    void validate() const {
        if (lambda_data < 0.0 || lambda_phys < 0.0) {
            throw ValidationError("loss weights must be non-negative");
        }
        if (lambda_data == 0.0 && lambda_phys == 0.0) {
            throw ValidationError("loss weights must not both be zero");
        }
    }
};

/// Mean squared error between predictions and targets.
inline double data_loss(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) {
        throw ValidationError("data_loss: length mismatch");
    }
    if (pred.empty()) throw ValidationError("data_loss: empty vectors");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        sum += d * d;
    }
    return sum / static_cast<double>(pred.size());
}

/// Mean squared deviation of predictions from the breakpoint-derived AQI of
/// the same samples' concentrations. Consumers operating in scaled target
/// space should transform the reference with their target scaler first (see
/// compute_aqi_batch + data_loss for the precomputed form used in training).
inline double physics_loss(const std::vector<double>& pred, const std::vector<double>& conc,
                           const BreakpointTable& table) {
    if (pred.size() != conc.size()) {
        throw ValidationError("physics_loss: length mismatch");
    }
    return data_loss(pred, table.compute_aqi_batch(conc));
}

inline double total_loss(double ld, double lp, const LossWeights& w) {
    return w.lambda_data * ld + w.lambda_phys * lp;
}

}  // namespace aqibench

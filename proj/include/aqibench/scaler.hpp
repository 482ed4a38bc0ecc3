#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aqibench/errors.hpp"

namespace aqibench {

enum class ScalerKind { Identity, Standard, MinMax };

inline std::string_view scaler_kind_name(ScalerKind k) {
    switch (k) {
        case ScalerKind::Identity: return "identity";
        case ScalerKind::Standard: return "standard";
        case ScalerKind::MinMax: return "minmax";
    }
    return "identity";
}

inline std::optional<ScalerKind> scaler_kind_from_string(std::string_view s) {
    if (s == "identity") return ScalerKind::Identity;
    if (s == "standard") return ScalerKind::Standard;
    if (s == "minmax") return ScalerKind::MinMax;
    return std::nullopt;
}

/// Per-column affine map fitted on training data only.
///
/// Standard: t(x) = (x - mean)/std.  MinMax: affine map sending the fitted
/// [min, max] onto a target range [lo, hi].  Both reduce to t(x) = a*x + b,
/// which makes the inverse exact up to rounding.
class Scaler {
  public:
    struct Column {
        std::string name;
        double a = 1.0;  // t(x) = a*x + b
        double b = 0.0;
    };

    Scaler() = default;

    static Scaler fit(ScalerKind kind, const std::vector<std::vector<double>>& columns,
                      const std::vector<std::string>& names, double range_lo = -1.0,
                      double range_hi = 1.0) {
        if (columns.size() != names.size()) {
            throw ValidationError("Scaler::fit: column/name count mismatch");
        }
        Scaler s;
        s.kind_ = kind;
        s.range_lo_ = range_lo;
        s.range_hi_ = range_hi;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const auto& col = columns[c];
            if (col.empty()) throw ValidationError("Scaler::fit: empty column " + names[c]);
            Column out;
            out.name = names[c];
            switch (kind) {
                case ScalerKind::Identity:
                    break;
                case ScalerKind::Standard: {
                    double sum = 0.0;
                    for (double v : col) sum += v;
                    const double mean = sum / static_cast<double>(col.size());
                    double ss = 0.0;
                    for (double v : col) ss += (v - mean) * (v - mean);
                    const double stddev = std::sqrt(ss / static_cast<double>(col.size()));
                    if (stddev == 0.0) {
                        throw ValidationError("Scaler::fit: zero variance in column " + names[c]);
                    }
                    out.a = 1.0 / stddev;
                    out.b = -mean / stddev;
                    break;
                }
                case ScalerKind::MinMax: {
                    double mn = col.front(), mx = col.front();
                    for (double v : col) {
                        mn = std::min(mn, v);
                        mx = std::max(mx, v);
                    }
                    if (mn == mx) {
                        throw ValidationError("Scaler::fit: constant column " + names[c]);
                    }
                    out.a = (range_hi - range_lo) / (mx - mn);
                    out.b = range_lo - out.a * mn;
                    break;
                }
            }
            s.columns_.push_back(std::move(out));
        }
        return s;
    }

    static Scaler identity(const std::vector<std::string>& names) {
        Scaler s;
        s.kind_ = ScalerKind::Identity;
        for (const auto& name : names) s.columns_.push_back(Column{name, 1.0, 0.0});
        return s;
    }

    /// Rebuilds a scaler from stored affine coefficients (checkpoint path).
    static Scaler from_coefficients(ScalerKind kind, std::vector<Column> columns,
                                    double range_lo = -1.0, double range_hi = 1.0) {
        Scaler s;
        s.kind_ = kind;
        s.range_lo_ = range_lo;
        s.range_hi_ = range_hi;
        s.columns_ = std::move(columns);
        for (const auto& col : s.columns_) {
            if (col.a == 0.0) {
                throw ValidationError("Scaler: zero scale coefficient in column " + col.name);
            }
        }
        return s;
    }

    ScalerKind kind() const { return kind_; }
    std::size_t column_count() const { return columns_.size(); }
    const Column& column(std::size_t c) const { return columns_.at(c); }

    double transform(std::size_t c, double x) const {
        const auto& col = columns_.at(c);
        return col.a * x + col.b;
    }

    double invert(std::size_t c, double y) const {
        const auto& col = columns_.at(c);
        return (y - col.b) / col.a;
    }

    std::vector<double> transform_column(std::size_t c, const std::vector<double>& xs) const {
        std::vector<double> out;
        out.reserve(xs.size());
        for (double x : xs) out.push_back(transform(c, x));
        return out;
    }

    std::vector<double> invert_column(std::size_t c, const std::vector<double>& ys) const {
        std::vector<double> out;
        out.reserve(ys.size());
        for (double y : ys) out.push_back(invert(c, y));
        return out;
    }

  private:
    ScalerKind kind_ = ScalerKind::Identity;
    double range_lo_ = -1.0;
    double range_hi_ = 1.0;
    std::vector<Column> columns_;
};

}  // namespace aqibench

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "aqibench/errors.hpp"

namespace aqibench {

namespace detail {
inline void require_pair(const std::vector<double>& truth, const std::vector<double>& pred,
                         const char* op) {
    if (truth.size() != pred.size()) {
        throw ValidationError(std::string(op) + ": length mismatch");
    }
    if (truth.empty()) {
        throw ValidationError(std::string(op) + ": empty vectors");
    }
}

inline double population_variance(const std::vector<double>& values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(values.size());
}
}  // namespace detail

inline double mae(const std::vector<double>& truth, const std::vector<double>& pred) {
    detail::require_pair(truth, pred, "mae");
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) sum += std::abs(truth[i] - pred[i]);
    return sum / static_cast<double>(truth.size());
}

inline double mse(const std::vector<double>& truth, const std::vector<double>& pred) {
    detail::require_pair(truth, pred, "mse");
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = truth[i] - pred[i];
        sum += d * d;
    }
    return sum / static_cast<double>(truth.size());
}

inline double rmse(const std::vector<double>& truth, const std::vector<double>& pred) {
    return std::sqrt(mse(truth, pred));
}

/// MSE normalized by the population variance of the observed values, so 1.0
/// equals the skill of always predicting the observed mean.
inline double nmse(const std::vector<double>& truth, const std::vector<double>& pred) {
    detail::require_pair(truth, pred, "nmse");
    const double var = detail::population_variance(truth);
    if (var == 0.0) throw ValidationError("nmse: zero-variance truth");
    return mse(truth, pred) / var;
}

/// Coefficient of determination under the population-variance convention;
/// identically equal to 1 - nmse.
inline double r2(const std::vector<double>& truth, const std::vector<double>& pred) {
    return 1.0 - nmse(truth, pred);
}

struct MetricBundle {
    double mae = 0.0;
    double mse = 0.0;
    double rmse = 0.0;
    double nmse = 0.0;
    double r2 = 0.0;
};

inline MetricBundle compute_metrics(const std::vector<double>& truth,
                                    const std::vector<double>& pred) {
    MetricBundle m;
    m.mae = mae(truth, pred);
    m.mse = mse(truth, pred);
    m.rmse = std::sqrt(m.mse);
    m.nmse = nmse(truth, pred);
    m.r2 = 1.0 - m.nmse;
    return m;
}

}  // namespace aqibench

#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <vector>

#include "aqibench/errors.hpp"
#include "aqibench/matrix.hpp"
#include "aqibench/model.hpp"

namespace aqibench {

/// Least squares via Householder QR. More stable than forming the normal
/// equations; rank deficiency surfaces as a near-zero diagonal in R.
inline std::vector<double> qr_least_squares(Matrix X, std::vector<double> y) {
    const std::size_t n = X.rows();
    const std::size_t p = X.cols();
    if (n < p) throw ValidationError("qr_least_squares: fewer rows than columns");
    if (y.size() != n) throw ValidationError("qr_least_squares: y length mismatch");

    for (std::size_t k = 0; k < p; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < n; ++i) norm += X(i, k) * X(i, k);
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            throw ValidationError("qr_least_squares: rank-deficient design matrix (column " +
                                  std::to_string(k) + ")");
        }
        const double alpha = X(k, k) >= 0.0 ? -norm : norm;
        std::vector<double> v(n - k);
        v[0] = X(k, k) - alpha;
        for (std::size_t i = k + 1; i < n; ++i) v[i - k] = X(i, k);
        double vnorm2 = 0.0;
        for (double vi : v) vnorm2 += vi * vi;
        if (vnorm2 == 0.0) continue;  // column already triangular
        // Apply H = I - 2 v vᵀ / (vᵀv) to the trailing block of X and to y.
        for (std::size_t j = k; j < p; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < n; ++i) dot += v[i - k] * X(i, j);
            const double s = 2.0 * dot / vnorm2;
            for (std::size_t i = k; i < n; ++i) X(i, j) -= s * v[i - k];
        }
        double dot_y = 0.0;
        for (std::size_t i = k; i < n; ++i) dot_y += v[i - k] * y[i];
        const double sy = 2.0 * dot_y / vnorm2;
        for (std::size_t i = k; i < n; ++i) y[i] -= sy * v[i - k];
    }

    std::vector<double> beta(p, 0.0);
    for (std::size_t k = p; k-- > 0;) {
        double sum = y[k];
        for (std::size_t j = k + 1; j < p; ++j) sum -= X(k, j) * beta[j];
        const double diag = X(k, k);
        if (std::abs(diag) < 1e-12) {
            throw ValidationError("qr_least_squares: rank-deficient design matrix (pivot " +
                                  std::to_string(k) + ")");
        }
        beta[k] = sum / diag;
    }
    return beta;
}

/// Linear regression ŷ = β₀ + β₁·conc + β₂·aqi fit by least squares.
class OlsModel : public FittedModel {
  public:
    OlsModel(ModelSpec spec, double beta0, double beta1, double beta2) {
        spec_ = std::move(spec);
        beta0_ = beta0;
        beta1_ = beta1;
        beta2_ = beta2;
    }

    ModelFamily family() const override { return ModelFamily::Lr; }

    std::vector<double> predict(const std::vector<LagRow>& rows) const override {
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& row : rows) {
            out.push_back(beta0_ + beta1_ * row.x_conc + beta2_ * row.x_aqi);
        }
        return out;
    }

    nlohmann::json state_to_json() const override {
        return {{"beta0", beta0_}, {"beta1", beta1_}, {"beta2", beta2_}};
    }

    static std::unique_ptr<OlsModel> from_json(ModelSpec spec, const nlohmann::json& state) {
        return std::make_unique<OlsModel>(std::move(spec), state.at("beta0").get<double>(),
                                          state.at("beta1").get<double>(),
                                          state.at("beta2").get<double>());
    }

    double beta0() const { return beta0_; }
    double beta1() const { return beta1_; }
    double beta2() const { return beta2_; }

  private:
    double beta0_, beta1_, beta2_;
};

inline std::unique_ptr<OlsModel> fit_ols(const SplitDataset& split, ModelSpec spec) {
    spec.validate();
    const auto& rows = split.train.rows;
    if (rows.size() < 3) throw ValidationError("fit_ols: need at least 3 training rows");
    Matrix X(rows.size(), 3);
    std::vector<double> y;
    y.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = rows[i].x_conc;
        X(i, 2) = rows[i].x_aqi;
        y.push_back(rows[i].y_future_aqi);
    }
    const auto beta = qr_least_squares(std::move(X), std::move(y));
    return std::make_unique<OlsModel>(std::move(spec), beta[0], beta[1], beta[2]);
}

}  // namespace aqibench

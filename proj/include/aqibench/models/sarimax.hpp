#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "aqibench/errors.hpp"
#include "aqibench/lag.hpp"
#include "aqibench/model.hpp"
#include "aqibench/nelder_mead.hpp"

namespace aqibench {

/// Parameters of the (1,1,1)x(1,0,1,7) model with one exogenous regressor:
///   (1 - phi B)(1 - seas_phi B^7) (1 - B)(y_t - beta x_{t-1})
///       = (1 + theta B)(1 + seas_theta B^7) eps_t
struct SarimaxParams {
    double phi = 0.0;
    double theta = 0.0;
    double seas_phi = 0.0;
    double seas_theta = 0.0;
    double beta = 0.0;
    double sigma2 = 0.0;
    bool converged = false;
    int iterations = 0;
};

namespace detail {

constexpr int kSeasonalPeriod = 7;
constexpr std::size_t kSarimaxNcond = 8;  // max AR lag of the expanded polynomial

/// Residual recursion on the differenced regression-error series w.
/// Residuals before ncond are conditioned to zero and excluded from the sum.
inline void sarimax_residuals(const std::vector<double>& w, double phi, double theta,
                              double seas_phi, double seas_theta, std::vector<double>& eps) {
    const std::size_t n = w.size();
    eps.assign(n, 0.0);
    auto wl = [&](std::size_t k, std::size_t lag) {
        return k >= lag ? w[k - lag] : 0.0;
    };
    auto el = [&](std::size_t k, std::size_t lag) {
        return k >= lag ? eps[k - lag] : 0.0;
    };
    for (std::size_t k = kSarimaxNcond; k < n; ++k) {
        eps[k] = w[k] - phi * wl(k, 1) - seas_phi * wl(k, 7) + phi * seas_phi * wl(k, 8) -
                 theta * el(k, 1) - seas_theta * el(k, 7) - theta * seas_theta * el(k, 8);
    }
}

/// w_t = (y_t - beta x_{t-1}) - (y_{t-1} - beta x_{t-2}), aligned so that
/// w[k] corresponds to calendar position k + 2.
inline std::vector<double> sarimax_differenced(const std::vector<double>& y,
                                               const std::vector<double>& x, double beta) {
    std::vector<double> w;
    if (y.size() < 3) return w;
    w.reserve(y.size() - 2);
    double u_prev = y[1] - beta * x[0];
    for (std::size_t t = 2; t < y.size(); ++t) {
        const double u = y[t] - beta * x[t - 1];
        w.push_back(u - u_prev);
        u_prev = u;
    }
    return w;
}

inline double sarimax_css(const std::vector<double>& y, const std::vector<double>& x,
                          double phi, double theta, double seas_phi, double seas_theta,
                          double beta, std::vector<double>* eps_out = nullptr) {
    const auto w = sarimax_differenced(y, x, beta);
    if (w.size() <= kSarimaxNcond) {
        throw ValidationError("sarimax: series too short after differencing");
    }
    std::vector<double> eps;
    sarimax_residuals(w, phi, theta, seas_phi, seas_theta, eps);
    double sse = 0.0;
    for (std::size_t k = kSarimaxNcond; k < eps.size(); ++k) sse += eps[k] * eps[k];
    if (eps_out) *eps_out = std::move(eps);
    return sse;
}

}  // namespace detail

/// SARIMAX forecaster. The default prediction mode is rolling one-step-ahead
/// over the observed daily calendar; the recursive flag instead iterates the
/// model forward from each feature date with future residuals set to zero.
class SarimaxModel : public FittedModel {
  public:
    SarimaxModel(ModelSpec spec, SarimaxParams params, int calendar_start,
                 std::vector<double> y, std::vector<double> x, std::size_t train_len)
        : params_(params),
          calendar_start_(calendar_start),
          y_(std::move(y)),
          x_(std::move(x)),
          train_len_(train_len) {
        spec_ = std::move(spec);
        precompute_one_step();
    }

    ModelFamily family() const override { return ModelFamily::Sarimax; }

    const SarimaxParams& params() const { return params_; }
    std::size_t train_length() const { return train_len_; }
    int calendar_start() const { return calendar_start_; }
    const std::vector<double>& calendar_aqi() const { return y_; }
    const std::vector<double>& one_step_residuals() const { return eps_; }

    std::vector<double> predict(const std::vector<LagRow>& rows) const override {
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& row : rows) {
            const std::size_t target = position_of(row.target_date);
            if (spec_.sarimax.recursive_forecast) {
                out.push_back(recursive_forecast(position_of(row.date), target));
            } else {
                out.push_back(yhat_[target]);
            }
        }
        return out;
    }

    nlohmann::json state_to_json() const override {
        return {{"phi", params_.phi},
                {"theta", params_.theta},
                {"seas_phi", params_.seas_phi},
                {"seas_theta", params_.seas_theta},
                {"beta", params_.beta},
                {"sigma2", params_.sigma2},
                {"converged", params_.converged},
                {"iterations", params_.iterations},
                {"calendar_start", calendar_start_},
                {"train_len", train_len_},
                {"y", y_},
                {"x", x_}};
    }

    static std::unique_ptr<SarimaxModel> from_json(ModelSpec spec, const nlohmann::json& state) {
        SarimaxParams p;
        p.phi = state.at("phi").get<double>();
        p.theta = state.at("theta").get<double>();
        p.seas_phi = state.at("seas_phi").get<double>();
        p.seas_theta = state.at("seas_theta").get<double>();
        p.beta = state.at("beta").get<double>();
        p.sigma2 = state.at("sigma2").get<double>();
        p.converged = state.at("converged").get<bool>();
        p.iterations = state.at("iterations").get<int>();
        return std::make_unique<SarimaxModel>(
            std::move(spec), p, state.at("calendar_start").get<int>(),
            state.at("y").get<std::vector<double>>(), state.at("x").get<std::vector<double>>(),
            state.at("train_len").get<std::size_t>());
    }

  private:
    std::size_t position_of(Date date) const {
        const long pos = static_cast<long>(date.serial()) - calendar_start_;
        if (pos < 0 || pos >= static_cast<long>(y_.size())) {
            throw ValidationError("sarimax predict: date " + date.to_iso() +
                                  " outside the fitted calendar");
        }
        return static_cast<std::size_t>(pos);
    }

    /// One-step predictions over the whole calendar via the identity
    /// yhat_t = y_t - eps_t (eps conditioned to zero in the warm-up region).
    void precompute_one_step() {
        const auto w = detail::sarimax_differenced(y_, x_, params_.beta);
        detail::sarimax_residuals(w, params_.phi, params_.theta, params_.seas_phi,
                                  params_.seas_theta, eps_full_);
        yhat_ = y_;
        eps_.assign(y_.size(), 0.0);
        for (std::size_t k = 0; k < eps_full_.size(); ++k) {
            // w[k] sits at calendar position k + 2.
            eps_[k + 2] = eps_full_[k];
            yhat_[k + 2] = y_[k + 2] - eps_full_[k];
        }
    }

    double recursive_forecast(std::size_t from, std::size_t target) const {
        if (target <= from) return yhat_[target];
        // Observed w/eps up to `from`; beyond it, extend with predicted w and
        // zero residuals.
        std::vector<double> w = detail::sarimax_differenced(y_, x_, params_.beta);
        std::vector<double> eps;
        detail::sarimax_residuals(w, params_.phi, params_.theta, params_.seas_phi,
                                  params_.seas_theta, eps);
        auto wl = [&](long k) { return k >= 0 && k < static_cast<long>(w.size()) ? w[k] : 0.0; };
        auto el = [&](long k, long horizon_start) {
            // Residuals after the forecast origin are unknown: use zero.
            if (k < 0 || k >= horizon_start) return 0.0;
            return k < static_cast<long>(eps.size()) ? eps[k] : 0.0;
        };
        const long origin = static_cast<long>(from) - 2 + 1;  // first unseen w index
        double u = y_[from] - params_.beta * (from >= 1 ? x_[from - 1] : 0.0);
        double yhat = y_[from];
        for (std::size_t pos = from + 1; pos <= target; ++pos) {
            const long k = static_cast<long>(pos) - 2;
            const double wpred = params_.phi * wl(k - 1) + params_.seas_phi * wl(k - 7) -
                                 params_.phi * params_.seas_phi * wl(k - 8) +
                                 params_.theta * el(k - 1, origin) +
                                 params_.seas_theta * el(k - 7, origin) +
                                 params_.theta * params_.seas_theta * el(k - 8, origin);
            if (k >= 0 && k < static_cast<long>(w.size())) w[k] = wpred;
            u += wpred;
            yhat = u + params_.beta * x_[pos - 1];
        }
        return yhat;
    }

    SarimaxParams params_;
    int calendar_start_;
    std::vector<double> y_;
    std::vector<double> x_;
    std::size_t train_len_;
    std::vector<double> eps_full_;
    std::vector<double> eps_;
    std::vector<double> yhat_;
};

inline std::unique_ptr<SarimaxModel> fit_sarimax(const SplitDataset& split, ModelSpec spec) {
    spec.validate();

    // Reconstruct the observed daily series. Feature rows are authoritative
    // for the dates they cover; target values fill only the trailing dates no
    // feature row reaches.
    struct Obs {
        double y = 0.0;
        double x = 0.0;
        bool has_x = false;
    };
    std::map<int, Obs> by_date;
    auto add_rows = [&](const std::vector<LagRow>& rows) {
        for (const auto& row : rows) {
            auto& o = by_date[row.date.serial()];
            o.y = row.x_aqi;
            o.x = row.x_conc;
            o.has_x = true;
        }
    };
    add_rows(split.train.rows);
    add_rows(split.test.rows);
    auto add_targets = [&](const std::vector<LagRow>& rows) {
        for (const auto& row : rows) {
            auto it = by_date.find(row.target_date.serial());
            if (it == by_date.end()) {
                Obs o;
                o.y = row.y_future_aqi;
                by_date[row.target_date.serial()] = o;
            }
        }
    };
    add_targets(split.train.rows);
    add_targets(split.test.rows);
    if (by_date.empty()) throw ValidationError("fit_sarimax: empty split");

    // Daily calendar with forward fill.
    const int start = by_date.begin()->first;
    const int end = by_date.rbegin()->first;
    std::vector<double> y, x;
    y.reserve(static_cast<std::size_t>(end - start + 1));
    double last_y = by_date.begin()->second.y;
    double last_x = by_date.begin()->second.x;
    for (int serial = start; serial <= end; ++serial) {
        auto it = by_date.find(serial);
        if (it != by_date.end()) {
            last_y = it->second.y;
            if (it->second.has_x) last_x = it->second.x;
        }
        y.push_back(last_y);
        x.push_back(last_x);
    }

    if (split.train.rows.empty()) throw ValidationError("fit_sarimax: empty training split");
    const int train_end_serial = split.train.rows.back().date.serial();
    const std::size_t train_len = static_cast<std::size_t>(train_end_serial - start + 1);
    if (train_len < 2 * detail::kSeasonalPeriod + 3) {
        throw ValidationError("fit_sarimax: training series too short (need > " +
                              std::to_string(2 * detail::kSeasonalPeriod + 2) + " days)");
    }
    std::vector<double> y_train(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(train_len));
    std::vector<double> x_train(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(train_len));

    if (spec.sarimax.scale_exog) {
        double mean = 0.0;
        for (double v : x_train) mean += v;
        mean /= static_cast<double>(x_train.size());
        double ss = 0.0;
        for (double v : x_train) ss += (v - mean) * (v - mean);
        const double stddev = std::sqrt(ss / static_cast<double>(x_train.size()));
        if (stddev == 0.0) throw ValidationError("fit_sarimax: constant exogenous series");
        for (double& v : x) v = (v - mean) / stddev;
        for (double& v : x_train) v = (v - mean) / stddev;
    }

    // tanh keeps the four ARMA coefficients inside the unit interval, which
    // enforces stationarity and invertibility; beta is unconstrained.
    auto objective = [&](const std::vector<double>& raw) {
        const double phi = std::tanh(raw[0]);
        const double theta = std::tanh(raw[1]);
        const double sphi = std::tanh(raw[2]);
        const double stheta = std::tanh(raw[3]);
        const double css = detail::sarimax_css(y_train, x_train, phi, theta, sphi, stheta,
                                               raw[4]);
        return std::isfinite(css) ? css : 1e300;
    };

    const auto result = nelder_mead(objective, std::vector<double>(5, 0.0), 0.2, 1e-12,
                                    spec.sarimax.max_iterations);
    SarimaxParams params;
    params.phi = std::tanh(result.x[0]);
    params.theta = std::tanh(result.x[1]);
    params.seas_phi = std::tanh(result.x[2]);
    params.seas_theta = std::tanh(result.x[3]);
    params.beta = result.x[4];
    params.converged = result.converged;
    params.iterations = result.iterations;
    std::vector<double> eps;
    const double sse = detail::sarimax_css(y_train, x_train, params.phi, params.theta,
                                           params.seas_phi, params.seas_theta, params.beta, &eps);
    params.sigma2 = sse / static_cast<double>(eps.size() - detail::kSarimaxNcond);

    if (!result.converged) {
        throw TrainingError(
            "fit_sarimax: optimizer did not converge after " +
            std::to_string(result.iterations) + " iterations; best-so-far phi=" +
            std::to_string(params.phi) + " theta=" + std::to_string(params.theta) +
            " seas_phi=" + std::to_string(params.seas_phi) + " seas_theta=" +
            std::to_string(params.seas_theta) + " beta=" + std::to_string(params.beta) +
            " (warning: results unreliable)");
    }

    return std::make_unique<SarimaxModel>(std::move(spec), params, start, std::move(y),
                                          std::move(x), train_len);
}

}  // namespace aqibench

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "aqibench/errors.hpp"

namespace aqibench {

struct NelderMeadResult {
    std::vector<double> x;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Derivative-free simplex minimizer (reflection 1, expansion 2,
/// contraction 0.5, shrink 0.5). Converges when the simplex function values
/// agree to within ftol in relative terms.
template <typename F>
NelderMeadResult nelder_mead(F&& f, const std::vector<double>& x0, double step = 0.1,
                             double ftol = 1e-10, int max_iter = 5000) {
    const std::size_t n = x0.size();
    if (n == 0) throw ValidationError("nelder_mead: empty start point");

    std::vector<std::vector<double>> simplex;
    simplex.reserve(n + 1);
    simplex.push_back(x0);
    for (std::size_t i = 0; i < n; ++i) {
        auto v = x0;
        v[i] += (v[i] != 0.0) ? step * std::abs(v[i]) + step : step;
        simplex.push_back(std::move(v));
    }
    std::vector<double> fvals(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fvals[i] = f(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    NelderMeadResult result;
    for (int iter = 0; iter < max_iter; ++iter) {
        result.iterations = iter + 1;
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[n - 1];

        const double spread = 2.0 * std::abs(fvals[worst] - fvals[best]) /
                              (std::abs(fvals[worst]) + std::abs(fvals[best]) + 1e-300);
        if (spread < ftol) {
            result.converged = true;
            result.x = simplex[best];
            result.fx = fvals[best];
            return result;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[i][d];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto blend = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t d = 0; d < n; ++d) {
                p[d] = centroid[d] + t * (simplex[worst][d] - centroid[d]);
            }
            return p;
        };

        auto reflected = blend(-1.0);
        const double fr = f(reflected);
        if (fr < fvals[best]) {
            auto expanded = blend(-2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                simplex[worst] = std::move(expanded);
                fvals[worst] = fe;
            } else {
                simplex[worst] = std::move(reflected);
                fvals[worst] = fr;
            }
        } else if (fr < fvals[second_worst]) {
            simplex[worst] = std::move(reflected);
            fvals[worst] = fr;
        } else {
            auto contracted = blend(fr < fvals[worst] ? -0.5 : 0.5);
            const double fc = f(contracted);
            if (fc < std::min(fr, fvals[worst])) {
                simplex[worst] = std::move(contracted);
                fvals[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t d = 0; d < n; ++d) {
                        simplex[i][d] = simplex[best][d] + 0.5 * (simplex[i][d] - simplex[best][d]);
                    }
                    fvals[i] = f(simplex[i]);
                }
            }
        }
    }

    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
    result.x = simplex[order.front()];
    result.fx = fvals[order.front()];
    result.converged = false;
    return result;
}

}  // namespace aqibench

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "aqibench/errors.hpp"
#include "aqibench/nn.hpp"

namespace aqibench {

/// Central finite-difference check of analytic gradients.
///
/// `forward_loss` must be a deterministic pure forward evaluation of the loss
/// as a function of the current parameter values (dropout disabled). The
/// analytic gradients must already be accumulated in each parameter's grad
/// before the call. Returns the maximum relative error over every entry,
/// with relative error |a-n| / max(1, |a|+|n|).
template <typename F>
double gradcheck_max_rel_error(F&& forward_loss, const std::vector<Parameter*>& params,
                               double eps = 1e-5) {
    const double l1 = forward_loss();
    const double l2 = forward_loss();
    if (l1 != l2) {
        throw ValidationError("gradcheck: loss closure is non-deterministic");
    }
    double max_err = 0.0;
    for (Parameter* p : params) {
        for (std::size_t i = 0; i < p->value.rows(); ++i) {
            for (std::size_t j = 0; j < p->value.cols(); ++j) {
                const double orig = p->value(i, j);
                p->value(i, j) = orig + eps;
                const double lp = forward_loss();
                p->value(i, j) = orig - eps;
                const double lm = forward_loss();
                p->value(i, j) = orig;
                const double numeric = (lp - lm) / (2.0 * eps);
                const double analytic = p->grad(i, j);
                const double rel = std::abs(analytic - numeric) /
                                   std::max(1.0, std::abs(analytic) + std::abs(numeric));
                max_err = std::max(max_err, rel);
            }
        }
    }
    return max_err;
}

}  // namespace aqibench

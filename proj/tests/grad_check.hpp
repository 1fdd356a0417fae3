#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "tensor.hpp"

namespace testutil {

// Central finite differences against an analytic gradient. `f` must evaluate
// the scalar loss as a pure function of the probed tensor.
inline double max_rel_grad_err(const std::function<double(const revcast::nn::Tensor&)>& f,
                               const revcast::nn::Tensor& at,
                               const revcast::nn::Tensor& analytic, double h = 1e-5) {
    double worst = 0.0;
    for (std::size_t i = 0; i < at.size(); ++i) {
        revcast::nn::Tensor plus = at;
        revcast::nn::Tensor minus = at;
        plus[i] += h;
        minus[i] -= h;
        const double fd = (f(plus) - f(minus)) / (2.0 * h);
        const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-6});
        worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
    }
    return worst;
}

} // namespace testutil

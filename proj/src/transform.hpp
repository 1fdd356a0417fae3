#pragma once

#include <vector>

#include "panel.hpp"

namespace revcast {

// Per-row smoothing statistics. log_mean is computed from training quarters
// only so the test period never leaks into the transform.
struct TransformState {
    DatarowKey key;
    double log_mean = 0.0;
};

struct TransformedSeries {
    int first_quarter = 0;
    std::vector<double> values; // aligned with the source row's quarters

    double at(int q) const { return values[static_cast<std::size_t>(q - first_quarter)]; }
    int last_quarter() const { return first_quarter + static_cast<int>(values.size()) - 1; }
};

// output_t = log(revenue_t) - mean(log revenue over observed quarters <= train_end).
std::pair<TransformedSeries, TransformState> forward_transform(const Datarow& row, int train_end);

// exp(x_t + log_mean); exact inverse of forward_transform.
std::vector<double> inverse_transform(const std::vector<double>& values,
                                      const TransformState& state);

} // namespace revcast

#include "transform.hpp"

#include <cmath>

#include "errors.hpp"

namespace revcast {

std::pair<TransformedSeries, TransformState> forward_transform(const Datarow& row, int train_end) {
    if (train_end < row.first_quarter) {
        throw ValidationError("forward_transform: row " + row.key.to_string() +
                              " has no observations at or before train_end");
    }
    TransformedSeries out;
    out.first_quarter = row.first_quarter;
    out.values.reserve(row.revenue.size());
    double sum = 0.0;
    int n_train = 0;
    for (int i = 0; i < row.quarters(); ++i) {
        const double v = row.revenue[static_cast<std::size_t>(i)];
        if (!(v > 0.0)) {
            throw ValidationError("forward_transform: non-positive value in row " +
                                  row.key.to_string());
        }
        const double lv = std::log(v);
        out.values.push_back(lv);
        if (row.first_quarter + i <= train_end) {
            sum += lv;
            ++n_train;
        }
    }
    TransformState state;
    state.key = row.key;
    state.log_mean = sum / n_train;
    for (double& v : out.values) v -= state.log_mean;
    return {std::move(out), state};
}

std::vector<double> inverse_transform(const std::vector<double>& values,
                                      const TransformState& state) {
    std::vector<double> out;
    out.reserve(values.size());
    for (const double v : values) out.push_back(std::exp(v + state.log_mean));
    return out;
}

} // namespace revcast

#include "stl.hpp"

#include <algorithm>
#include <cmath>

#include "csv.hpp"
#include "errors.hpp"

namespace revcast {

namespace {

double tricube(double u) {
    const double t = 1.0 - u * u * u;
    return t * t * t;
}

int smallest_odd_at_least(double x) {
    int v = static_cast<int>(std::ceil(x));
    if (v < 1) v = 1;
    return v % 2 == 0 ? v + 1 : v;
}

// Centered moving average of width w; output length n - w + 1.
std::vector<double> moving_average(const std::vector<double>& y, int w) {
    const int n = static_cast<int>(y.size());
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n - w + 1));
    for (int i = 0; i + w <= n; ++i) {
        double s = 0.0;
        for (int j = 0; j < w; ++j) s += y[static_cast<std::size_t>(i + j)];
        out.push_back(s / w);
    }
    return out;
}

struct StlResult {
    std::vector<double> trend;
    std::vector<double> seasonal;
    std::vector<double> residual;
};

// Additive STL core on y; inner loop twice, no robustness weights.
// periodic: cycle-subseries smoother is the subseries mean.
StlResult stl_additive(const std::vector<double>& y, int period, SeasonalMode mode) {
    const int n = static_cast<int>(y.size());
    const int p = period;
    const int seasonal_span = 7;
    const int lowpass_span = smallest_odd_at_least(p);
    const int trend_span =
        mode == SeasonalMode::periodic
            ? smallest_odd_at_least(1.5 * p)
            : smallest_odd_at_least(1.5 * p / (1.0 - 1.5 / seasonal_span));

    std::vector<double> trend(static_cast<std::size_t>(n), 0.0);
    std::vector<double> seasonal(static_cast<std::size_t>(n), 0.0);
    std::vector<double> extended(static_cast<std::size_t>(n + 2 * p), 0.0);

    for (int iteration = 0; iteration < 2; ++iteration) {
        // 1. Detrend.
        std::vector<double> detrended(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) detrended[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] - trend[static_cast<std::size_t>(i)];

        // 2. Cycle-subseries smoothing, evaluated one cycle beyond each end.
        for (int pos = 0; pos < p; ++pos) {
            std::vector<double> sub;
            for (int t = pos; t < n; t += p) sub.push_back(detrended[static_cast<std::size_t>(t)]);
            const int m = static_cast<int>(sub.size());
            if (mode == SeasonalMode::periodic) {
                double mean = 0.0;
                for (const double v : sub) mean += v;
                mean /= m;
                for (int k = -1; k <= m; ++k) {
                    const int t = pos + k * p;
                    extended[static_cast<std::size_t>(t + p)] = mean;
                }
            } else {
                for (int k = -1; k <= m; ++k) {
                    const int t = pos + k * p;
                    extended[static_cast<std::size_t>(t + p)] =
                        loess_at(sub, seasonal_span, static_cast<double>(k), 1);
                }
            }
        }

        // 3. Low-pass: MA(p), MA(p), MA(3), then loess; consumes the extension.
        std::vector<double> low = moving_average(extended, p);
        low = moving_average(low, p);
        low = moving_average(low, 3);
        low = loess_smooth(low, lowpass_span, 1);

        // 4. Detrended seasonal.
        for (int i = 0; i < n; ++i) {
            seasonal[static_cast<std::size_t>(i)] =
                extended[static_cast<std::size_t>(i + p)] - low[static_cast<std::size_t>(i)];
        }

        // 5/6. Deseasonalize, re-estimate trend.
        std::vector<double> deseasonalized(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            deseasonalized[static_cast<std::size_t>(i)] =
                y[static_cast<std::size_t>(i)] - seasonal[static_cast<std::size_t>(i)];
        }
        trend = loess_smooth(deseasonalized, trend_span, 1);
    }

    if (mode == SeasonalMode::periodic) {
        // Shift the seasonal mean into the trend so the p factors sum to zero
        // in log space (geometric mean one in level space).
        double mean = 0.0;
        for (int pos = 0; pos < p && pos < n; ++pos) mean += seasonal[static_cast<std::size_t>(pos)];
        mean /= std::min(p, n);
        for (double& s : seasonal) s -= mean;
        for (double& t : trend) t += mean;
    }

    StlResult result;
    result.trend = std::move(trend);
    result.seasonal = std::move(seasonal);
    result.residual.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        result.residual[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] -
                                                       result.trend[static_cast<std::size_t>(i)] -
                                                       result.seasonal[static_cast<std::size_t>(i)];
    }
    return result;
}

} // namespace

double loess_at(const std::vector<double>& y, int span, double x, int degree) {
    const int n = static_cast<int>(y.size());
    if (n == 1) return y[0];
    const int q = std::min(span, n);

    // Window of the q nearest grid points to x.
    int left = static_cast<int>(std::floor(x)) - (q - 1) / 2;
    left = std::clamp(left, 0, n - q);
    // Nudge so the window really holds the nearest points when x is interior.
    while (left > 0 && x - (left - 1) < (left + q - 1) - x) --left;
    while (left + q < n && (left + q) - x < x - left) ++left;
    const int right = left + q - 1;

    double h = std::max(x - left, static_cast<double>(right) - x);
    if (span > n) h += static_cast<double>(span - n) / 2.0;
    if (h <= 0.0) h = 1.0;

    double w_sum = 0.0, wx_sum = 0.0;
    std::vector<double> w(static_cast<std::size_t>(q), 0.0);
    for (int j = 0; j < q; ++j) {
        const double r = std::abs(left + j - x) / h;
        const double wj = r < 1.0 ? tricube(r) : 0.0;
        w[static_cast<std::size_t>(j)] = wj;
        w_sum += wj;
        wx_sum += wj * (left + j);
    }
    if (w_sum <= 0.0) {
        // All weight vanished (can only happen through extreme extrapolation);
        // fall back to the nearest point.
        return x < left ? y[static_cast<std::size_t>(left)] : y[static_cast<std::size_t>(right)];
    }

    const double x_bar = wx_sum / w_sum;
    double sxx = 0.0, sxy = 0.0, y_bar = 0.0;
    for (int j = 0; j < q; ++j) {
        y_bar += w[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(left + j)];
    }
    y_bar /= w_sum;
    for (int j = 0; j < q; ++j) {
        const double dx = (left + j) - x_bar;
        sxx += w[static_cast<std::size_t>(j)] * dx * dx;
        sxy += w[static_cast<std::size_t>(j)] * dx * (y[static_cast<std::size_t>(left + j)] - y_bar);
    }
    if (degree >= 1 && sxx > 1e-12 * q) {
        const double slope = sxy / sxx;
        return y_bar + slope * (x - x_bar);
    }
    return y_bar;
}

std::vector<double> loess_smooth(const std::vector<double>& y, int span, int degree) {
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        out[i] = loess_at(y, span, static_cast<double>(i), degree);
    }
    return out;
}

double Decomposition::trend_at(int q) const {
    if (q < first_quarter || q > fit_end) {
        throw ValidationError("decomposition " + key.to_string() + ": trend undefined at quarter " +
                              std::to_string(q));
    }
    return trend[static_cast<std::size_t>(q - first_quarter)];
}

double Decomposition::seasonal_at(int q) const {
    if (q < first_quarter || q > seasonal_end()) {
        throw ValidationError("decomposition " + key.to_string() +
                              ": seasonal undefined at quarter " + std::to_string(q));
    }
    return seasonal[static_cast<std::size_t>(q - first_quarter)];
}

double Decomposition::residual_at(int q) const {
    if (q < first_quarter || q > fit_end) {
        throw ValidationError("decomposition " + key.to_string() +
                              ": residual undefined at quarter " + std::to_string(q));
    }
    return residual[static_cast<std::size_t>(q - first_quarter)];
}

Decomposition stl_decompose(const Datarow& row, int period, SeasonalMode mode, int train_end) {
    if (period < 2) throw ValidationError("stl_decompose: period must be >= 2");
    const int fit_end = std::min(train_end, row.last_quarter());
    const int n = fit_end - row.first_quarter + 1;
    if (n < 2 * period) {
        throw InsufficientHistoryError("stl_decompose: row " + row.key.to_string() + " has " +
                                       std::to_string(std::max(n, 0)) + " quarters up to train_end; need >= " +
                                       std::to_string(2 * period));
    }

    std::vector<double> logs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        logs[static_cast<std::size_t>(i)] = std::log(row.revenue[static_cast<std::size_t>(i)]);
    }
    const StlResult fit = stl_additive(logs, period, mode);

    Decomposition d;
    d.key = row.key;
    d.first_quarter = row.first_quarter;
    d.fit_end = fit_end;
    d.period = period;
    d.trend.reserve(static_cast<std::size_t>(n));
    d.residual.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        d.trend.push_back(std::exp(fit.trend[static_cast<std::size_t>(i)]));
        d.residual.push_back(std::exp(fit.residual[static_cast<std::size_t>(i)]));
    }

    // Seasonal factors beyond the fit repeat the last estimated cycle.
    const int extend_to = std::max(row.last_quarter(), fit_end) + period;
    d.seasonal.reserve(static_cast<std::size_t>(extend_to - row.first_quarter + 1));
    for (int i = 0; i < n; ++i) {
        d.seasonal.push_back(std::exp(fit.seasonal[static_cast<std::size_t>(i)]));
    }
    for (int q = fit_end + 1; q <= extend_to; ++q) {
        const int offset = (q - fit_end - 1) % period; // position within the repeated cycle
        d.seasonal.push_back(d.seasonal[static_cast<std::size_t>(n - period + offset)]);
    }
    return d;
}

Datarow deseasonalize(const Datarow& row, const Decomposition& d) {
    if (row.first_quarter < d.first_quarter || row.last_quarter() > d.seasonal_end()) {
        throw ValidationError("deseasonalize: decomposition does not cover row " +
                              row.key.to_string());
    }
    Datarow out;
    out.key = row.key;
    out.first_quarter = row.first_quarter;
    out.revenue.reserve(row.revenue.size());
    for (int q = row.first_quarter; q <= row.last_quarter(); ++q) {
        out.revenue.push_back(row.at(q) / d.seasonal_at(q));
    }
    return out;
}

std::vector<double> reseasonalize(const std::vector<double>& forecasts,
                                  int first_forecast_quarter, const Decomposition& d) {
    std::vector<double> out;
    out.reserve(forecasts.size());
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        const int q = first_forecast_quarter + static_cast<int>(i);
        const int prior = q - d.period;
        if (prior < d.first_quarter || prior > d.seasonal_end()) {
            throw ValidationError("reseasonalize: no prior-year seasonal for quarter " +
                                  std::to_string(q) + " in row " + d.key.to_string());
        }
        out.push_back(forecasts[i] * d.seasonal_at(prior));
    }
    return out;
}

double residual_score(const Decomposition& d) {
    double sum = 0.0;
    for (const double r : d.residual) {
        const double e = r - 1.0;
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(d.residual.size()));
}

std::string render_decompositions_csv(const std::vector<Decomposition>& decomps,
                                      const PanelDataset& panel) {
    std::string out = "segment,region,product,quarter,trend,seasonal,residual\n";
    for (const auto& d : decomps) {
        for (int q = d.first_quarter; q <= d.fit_end; ++q) {
            out += d.key.segment + ',' + d.key.region + ',' + d.key.product + ',';
            out += quarter_label(panel, q);
            out += ',' + csv::format_double(d.trend_at(q));
            out += ',' + csv::format_double(d.seasonal_at(q));
            out += ',' + csv::format_double(d.residual_at(q));
            out += '\n';
        }
    }
    return out;
}

} // namespace revcast

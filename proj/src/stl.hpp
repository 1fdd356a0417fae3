#pragma once

#include <string>
#include <vector>

#include "panel.hpp"

namespace revcast {

enum class SeasonalMode { periodic, loess };

// Multiplicative trend/seasonal/residual components for one datarow, obtained
// from additive STL on the log series. trend and residual cover the fitted
// (training) quarters; seasonal additionally extends past fit_end by repeating
// the last fitted cycle, which is what forecast reseasonalization consumes.
struct Decomposition {
    DatarowKey key;
    int first_quarter = 0;
    int fit_end = 0; // last fitted quarter, inclusive
    int period = 4;
    std::vector<double> trend;
    std::vector<double> seasonal;
    std::vector<double> residual;

    int seasonal_end() const {
        return first_quarter + static_cast<int>(seasonal.size()) - 1;
    }
    double trend_at(int q) const;
    double seasonal_at(int q) const;
    double residual_at(int q) const;
};

// Additive STL on log(revenue) over quarters <= train_end, exponentiated.
// Inner loop runs twice; no robustness weighting. In periodic mode the
// cycle-subseries smoother is the subseries mean and the seasonal factors are
// normalized to geometric mean 1; in loess mode the subseries are smoothed by
// locally weighted linear regression with span 7.
Decomposition stl_decompose(const Datarow& row, int period, SeasonalMode mode, int train_end);

// revenue_t / seasonal_t for every observed quarter of the row.
Datarow deseasonalize(const Datarow& row, const Decomposition& d);

// forecast_t * seasonal_(t - period): reapplies the prior-year factor.
std::vector<double> reseasonalize(const std::vector<double>& forecasts,
                                  int first_forecast_quarter, const Decomposition& d);

// Root-mean-square of (residual_t - 1) over the fitted quarters.
double residual_score(const Decomposition& d);

// Locally weighted linear regression on an integer grid; evaluation points may
// lie outside [0, n) for extrapolation. Exposed for tests.
double loess_at(const std::vector<double>& y, int span, double x, int degree);
std::vector<double> loess_smooth(const std::vector<double>& y, int span, int degree);

std::string render_decompositions_csv(const std::vector<Decomposition>& decomps,
                                      const PanelDataset& panel);

} // namespace revcast

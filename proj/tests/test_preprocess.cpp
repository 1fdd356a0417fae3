#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"
#include "stl.hpp"
#include "synthetic.hpp"
#include "transform.hpp"

using namespace revcast;

namespace {

Datarow make_row(std::vector<double> values, int first_quarter = 0) {
    Datarow row;
    row.key = {"S", "R", "P"};
    row.first_quarter = first_quarter;
    row.revenue = std::move(values);
    return row;
}

} // namespace

TEST_CASE("forward_transform: constant series") {
    const double e2 = std::exp(2.0);
    const Datarow row = make_row({e2, e2, e2, e2});
    const auto [series, state] = forward_transform(row, 3);
    CHECK(state.log_mean == doctest::Approx(2.0).epsilon(1e-12));
    for (const double v : series.values) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("forward_transform: hand-computed (1, e, e^2)") {
    const Datarow row = make_row({1.0, std::exp(1.0), std::exp(2.0)});
    const auto [series, state] = forward_transform(row, 2);
    CHECK(state.log_mean == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(series.values.size() == 3);
    CHECK(series.values[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(series.values[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(series.values[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("forward_transform: train_end restricts the mean") {
    const Datarow row = make_row({1.0, 1.0, std::exp(6.0)});
    const auto [series, state] = forward_transform(row, 1);
    CHECK(state.log_mean == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(series.values[2] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("forward_transform: non-positive value is a domain error") {
    Datarow row = make_row({1.0, 0.0, 2.0});
    CHECK_THROWS_AS(forward_transform(row, 2), ValidationError);
}

TEST_CASE("inverse_transform: zeros with log_mean 2") {
    TransformState state;
    state.log_mean = 2.0;
    const auto out = inverse_transform({0.0, 0.0}, state);
    for (const double v : out) CHECK(v == doctest::Approx(std::exp(2.0)).epsilon(1e-12));
}

TEST_CASE("inverse_transform: inverse of the hand-computed case") {
    TransformState state;
    state.log_mean = 1.0;
    const auto out = inverse_transform({-1.0, 0.0, 1.0}, state);
    CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    CHECK(out[2] == doctest::Approx(std::exp(2.0)).epsilon(1e-12));
}

TEST_CASE("transform round trip on 100 random positive series") {
    Rng rng(99);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 5 + static_cast<int>(rng.uniform_index(35));
        std::vector<double> values;
        values.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) values.push_back(std::exp(rng.uniform(-8.0, 12.0)));
        const Datarow row = make_row(values);
        const int train_end = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n - 1)));
        const auto [series, state] = forward_transform(row, train_end);
        const auto back = inverse_transform(series.values, state);
        for (int i = 0; i < n; ++i) {
            const double rel = std::abs(back[static_cast<std::size_t>(i)] - values[static_cast<std::size_t>(i)]) /
                               values[static_cast<std::size_t>(i)];
            worst = std::max(worst, rel);
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("loess: exact on linear data, including extrapolation") {
    std::vector<double> line;
    for (int i = 0; i < 12; ++i) line.push_back(3.0 + 0.5 * i);
    for (const int span : {3, 5, 7, 25}) {
        for (const double x : {-1.0, 0.0, 4.0, 11.0, 12.0}) {
            CHECK(loess_at(line, span, x, 1) == doctest::Approx(3.0 + 0.5 * x).epsilon(1e-10));
        }
    }
}

TEST_CASE("stl: known seasonal factors recovered") {
    double s[4] = {0.8, 1.1, 0.9, 1.25 / 0.792};
    double gm = std::pow(s[0] * s[1] * s[2] * s[3], 0.25);
    for (double& v : s) v /= gm;

    std::vector<double> values;
    for (int t = 0; t < 32; ++t) values.push_back(10.0 * s[t % 4]);
    const Datarow row = make_row(values);

    for (const SeasonalMode mode : {SeasonalMode::periodic, SeasonalMode::loess}) {
        const Decomposition d = stl_decompose(row, 4, mode, 31);
        for (int t = 0; t < 32; ++t) {
            CHECK(d.seasonal_at(t) == doctest::Approx(s[t % 4]).epsilon(1e-3));
            CHECK(d.residual_at(t) == doctest::Approx(1.0).epsilon(1e-3));
        }
    }
}

TEST_CASE("stl: constant series has unit seasonal and residual") {
    const Datarow row = make_row(std::vector<double>(16, 42.0));
    const Decomposition d = stl_decompose(row, 4, SeasonalMode::periodic, 15);
    for (int t = 0; t < 16; ++t) {
        CHECK(d.seasonal_at(t) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(d.residual_at(t) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(d.trend_at(t) == doctest::Approx(42.0).epsilon(1e-6));
    }
}

TEST_CASE("stl: too-short series raises insufficient history") {
    const Datarow row = make_row({1, 2, 3, 4, 5});
    CHECK_THROWS_AS(stl_decompose(row, 4, SeasonalMode::periodic, 4), InsufficientHistoryError);
}

TEST_CASE("stl: multiplicative reconstruction on 100 random rows") {
    SyntheticSpec spec;
    spec.n_segments = 5;
    spec.n_regions = 5;
    spec.n_products = 5;
    spec.seed = 31;
    spec.short_history_fraction = 0.3;
    const PanelDataset panel = generate_synthetic(spec);
    const int train_end = panel.train_end_index();

    int tested = 0;
    double worst = 0.0;
    for (const auto& row : panel.rows) {
        if (tested >= 100) break;
        if (row.history_until(train_end) < 8) continue;
        const SeasonalMode mode = tested % 2 == 0 ? SeasonalMode::periodic : SeasonalMode::loess;
        const Decomposition d = stl_decompose(row, 4, mode, train_end);
        for (int q = row.first_quarter; q <= d.fit_end; ++q) {
            const double recon = d.trend_at(q) * d.seasonal_at(q) * d.residual_at(q);
            worst = std::max(worst, std::abs(recon - row.at(q)) / row.at(q));
        }
        ++tested;
    }
    REQUIRE(tested == 100);
    CHECK(worst < 1e-8);
}

TEST_CASE("stl: periodic factors repeat with geometric mean one") {
    SyntheticSpec spec;
    spec.seed = 5;
    const PanelDataset panel = generate_synthetic(spec);
    const int train_end = panel.train_end_index();
    int tested = 0;
    for (const auto& row : panel.rows) {
        if (tested >= 20) break;
        if (row.history_until(train_end) < 8) continue;
        const Decomposition d = stl_decompose(row, 4, SeasonalMode::periodic, train_end);
        double log_sum = 0.0;
        for (int pos = 0; pos < 4; ++pos) {
            log_sum += std::log(d.seasonal_at(row.first_quarter + pos));
        }
        CHECK(std::exp(log_sum / 4.0) == doctest::Approx(1.0).epsilon(1e-8));
        // Exact period-4 repetition, including the extension past fit_end.
        for (int q = row.first_quarter + 4; q <= d.seasonal_end(); ++q) {
            CHECK(d.seasonal_at(q) == d.seasonal_at(q - 4));
        }
        ++tested;
    }
    REQUIRE(tested == 20);
}

TEST_CASE("deseasonalize: unit seasonal is the identity, factors divide out") {
    Decomposition d;
    d.key = {"S", "R", "P"};
    d.first_quarter = 0;
    d.fit_end = 3;
    d.period = 4;
    d.trend = {100, 100, 100, 100};
    d.seasonal = {1.0, 1.25, 1.0, 1.0};
    d.residual = {1, 1, 1, 1};

    const Datarow row = make_row({100, 100, 100, 100});
    const Datarow out = deseasonalize(row, d);
    CHECK(out.revenue[0] == doctest::Approx(100.0));
    CHECK(out.revenue[1] == doctest::Approx(80.0));
}

TEST_CASE("reseasonalize: prior-year factors multiply back") {
    Decomposition d;
    d.key = {"S", "R", "P"};
    d.first_quarter = 0;
    d.fit_end = 7;
    d.period = 4;
    d.trend.assign(8, 1.0);
    d.seasonal = {1.25, 0.9, 1.0, 0.8, 1.25, 0.9, 1.0, 0.8};
    d.residual.assign(8, 1.0);

    SUBCASE("single value") {
        const auto out = reseasonalize({80.0}, 4, d);
        CHECK(out[0] == doctest::Approx(100.0));
    }
    SUBCASE("four-quarter hand product") {
        const auto out = reseasonalize({10.0, 20.0, 30.0, 40.0}, 8, d);
        CHECK(out[0] == doctest::Approx(10.0 * 1.25));
        CHECK(out[1] == doctest::Approx(20.0 * 0.9));
        CHECK(out[2] == doctest::Approx(30.0 * 1.0));
        CHECK(out[3] == doctest::Approx(40.0 * 0.8));
    }
    SUBCASE("missing prior-year seasonal is an error") {
        CHECK_THROWS_AS(reseasonalize({1.0}, 2, d), ValidationError);
    }
    SUBCASE("unit seasonal is the identity") {
        Decomposition flat = d;
        flat.seasonal.assign(8, 1.0);
        const auto out = reseasonalize({10.0, 20.0}, 6, flat);
        CHECK(out[0] == doctest::Approx(10.0));
        CHECK(out[1] == doctest::Approx(20.0));
    }
}

TEST_CASE("deseasonalize then reseasonalize is the identity in periodic mode") {
    SyntheticSpec spec;
    spec.seed = 77;
    spec.seasonal_amplitude = 0.3;
    const PanelDataset panel = generate_synthetic(spec);
    const int train_end = panel.train_end_index();
    const Datarow& row = panel.rows[0];
    const Decomposition d = stl_decompose(row, 4, SeasonalMode::periodic, train_end);
    const Datarow flat = deseasonalize(row, d);

    // Periodic factors satisfy S_t = S_(t-4), so multiplying by the prior-year
    // factor undoes the division.
    std::vector<double> dtail;
    const int start = row.first_quarter + 4;
    for (int q = start; q <= row.last_quarter(); ++q) dtail.push_back(flat.at(q));
    const auto back = reseasonalize(dtail, start, d);
    for (int q = start; q <= row.last_quarter(); ++q) {
        CHECK(back[static_cast<std::size_t>(q - start)] ==
              doctest::Approx(row.at(q)).epsilon(1e-10));
    }
}

TEST_CASE("residual_score: hand values") {
    Decomposition d;
    d.residual.assign(6, 1.0);
    CHECK(residual_score(d) == 0.0);
    d.residual = {1.1, 0.9, 1.1, 0.9};
    CHECK(residual_score(d) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("residual_score: noisier row scores strictly higher") {
    double s[4] = {0.9, 1.05, 1.0, 1.0 / (0.9 * 1.05)};
    std::vector<double> clean, noisy;
    Rng rng(3);
    for (int t = 0; t < 24; ++t) {
        const double base = 50.0 * s[t % 4] * std::pow(1.01, t);
        clean.push_back(base);
        noisy.push_back(base * std::exp(0.08 * rng.normal()));
    }
    const auto d_clean = stl_decompose(make_row(clean), 4, SeasonalMode::periodic, 23);
    const auto d_noisy = stl_decompose(make_row(noisy), 4, SeasonalMode::periodic, 23);
    CHECK(residual_score(d_noisy) > residual_score(d_clean));
}

TEST_CASE("residual_score: invariant to uniform scaling") {
    SyntheticSpec spec;
    spec.seed = 11;
    const PanelDataset panel = generate_synthetic(spec);
    const int train_end = panel.train_end_index();
    const Datarow& row = panel.rows[2];
    Datarow scaled = row;
    for (double& v : scaled.revenue) v *= 1730.5;
    const double a = residual_score(stl_decompose(row, 4, SeasonalMode::periodic, train_end));
    const double b = residual_score(stl_decompose(scaled, 4, SeasonalMode::periodic, train_end));
    CHECK(std::abs(a - b) < 1e-9);
}

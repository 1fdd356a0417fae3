#pragma once

#include <cstdint>

#include "panel.hpp"

#include <nlohmann/json_fwd.hpp>

namespace revcast {

// Stand-in for confidential revenue panels. Every draw comes from one seeded
// stream, so the generated panel is a pure function of the spec.
struct SyntheticSpec {
    int n_segments = 8;
    int n_regions = 6;
    int n_products = 4;
    std::uint64_t seed = 1;
    double seasonal_amplitude = 0.2;
    double growth_min = 0.99;
    double growth_max = 1.04;
    double noise_sigma = 0.05;
    double short_history_fraction = 0.16;
    double base_revenue_min = 1.0e6;
    double base_revenue_max = 5.0e7;
    double absence_prob = 0.1; // fraction of (segment, region, product) combos left out
    int n_quarters = 39;
    int horizon = 4;
    int min_history = 15; // short-history rows start too late to fill one window

    void validate() const;
    static SyntheticSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

PanelDataset generate_synthetic(const SyntheticSpec& spec);

} // namespace revcast

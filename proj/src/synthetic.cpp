#include "synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace revcast {

namespace {

std::string padded_label(const char* prefix, int index, int count) {
    std::size_t width = 1;
    for (int c = count; c >= 10; c /= 10) ++width;
    std::string digits = std::to_string(index + 1);
    if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
    return prefix + digits;
}

} // namespace

void SyntheticSpec::validate() const {
    if (n_segments < 1 || n_regions < 1 || n_products < 1) {
        throw ValidationError("synthetic spec: counts must be >= 1");
    }
    if (seasonal_amplitude < 0 || noise_sigma < 0) {
        throw ValidationError("synthetic spec: amplitudes must be >= 0");
    }
    if (short_history_fraction < 0 || short_history_fraction > 1) {
        throw ValidationError("synthetic spec: short_history_fraction must be in [0,1]");
    }
    if (absence_prob < 0 || absence_prob >= 1) {
        throw ValidationError("synthetic spec: absence_prob must be in [0,1)");
    }
    if (growth_min > growth_max || !(growth_min > 0)) {
        throw ValidationError("synthetic spec: growth range invalid");
    }
    if (base_revenue_min > base_revenue_max || !(base_revenue_min > 0)) {
        throw ValidationError("synthetic spec: base revenue range invalid");
    }
    if (horizon < 1 || n_quarters <= horizon) {
        throw ValidationError("synthetic spec: need n_quarters > horizon >= 1");
    }
    if (min_history < 1) throw ValidationError("synthetic spec: min_history must be >= 1");
}

SyntheticSpec SyntheticSpec::from_json(const nlohmann::json& j) {
    static const std::set<std::string> known = {
        "n_segments",    "n_regions",   "n_products",      "seed",
        "seasonal_amplitude", "growth_min", "growth_max",  "noise_sigma",
        "short_history_fraction", "base_revenue_min", "base_revenue_max",
        "absence_prob",  "n_quarters",  "horizon",         "min_history"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!known.count(key)) {
            throw ValidationError("synthetic spec: unknown field '" + key + "'");
        }
    }
    SyntheticSpec s;
    s.n_segments = j.value("n_segments", s.n_segments);
    s.n_regions = j.value("n_regions", s.n_regions);
    s.n_products = j.value("n_products", s.n_products);
    s.seed = j.value("seed", s.seed);
    s.seasonal_amplitude = j.value("seasonal_amplitude", s.seasonal_amplitude);
    s.growth_min = j.value("growth_min", s.growth_min);
    s.growth_max = j.value("growth_max", s.growth_max);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.short_history_fraction = j.value("short_history_fraction", s.short_history_fraction);
    s.base_revenue_min = j.value("base_revenue_min", s.base_revenue_min);
    s.base_revenue_max = j.value("base_revenue_max", s.base_revenue_max);
    s.absence_prob = j.value("absence_prob", s.absence_prob);
    s.n_quarters = j.value("n_quarters", s.n_quarters);
    s.horizon = j.value("horizon", s.horizon);
    s.min_history = j.value("min_history", s.min_history);
    s.validate();
    return s;
}

nlohmann::json SyntheticSpec::to_json() const {
    return nlohmann::json{{"n_segments", n_segments},
                          {"n_regions", n_regions},
                          {"n_products", n_products},
                          {"seed", seed},
                          {"seasonal_amplitude", seasonal_amplitude},
                          {"growth_min", growth_min},
                          {"growth_max", growth_max},
                          {"noise_sigma", noise_sigma},
                          {"short_history_fraction", short_history_fraction},
                          {"base_revenue_min", base_revenue_min},
                          {"base_revenue_max", base_revenue_max},
                          {"absence_prob", absence_prob},
                          {"n_quarters", n_quarters},
                          {"horizon", horizon},
                          {"min_history", min_history}};
}

PanelDataset generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    PanelDataset panel;
    panel.n_quarters = spec.n_quarters;
    panel.horizon = spec.horizon;
    panel.provenance_hash = csv::hash_hex(csv::fnv1a(spec.to_json().dump()));
    const int train_end = panel.train_end_index();

    // Draw order is fixed: segment bases, region shares, product shares,
    // the seasonal cycle, then per-combination rows in label order.
    std::vector<double> segment_base(spec.n_segments);
    for (double& b : segment_base) b = rng.uniform(spec.base_revenue_min, spec.base_revenue_max);
    std::vector<double> region_share(spec.n_regions);
    for (double& s : region_share) s = rng.uniform(0.2, 1.0);
    std::vector<double> product_share(spec.n_products);
    for (double& s : product_share) s = rng.uniform(0.2, 1.0);

    double cycle[4];
    double cycle_mean = 0.0;
    for (double& c : cycle) {
        c = rng.normal();
        cycle_mean += c / 4.0;
    }
    double seasonal[4];
    for (int q = 0; q < 4; ++q) {
        seasonal[q] = std::exp(spec.seasonal_amplitude * (cycle[q] - cycle_mean));
    }

    // Short rows start after the last offset that still fills one window.
    const int short_lo = train_end - spec.min_history + 2;
    const int short_hi = std::min(short_lo + 9, train_end - 3);

    for (int si = 0; si < spec.n_segments; ++si) {
        for (int ri = 0; ri < spec.n_regions; ++ri) {
            for (int pi = 0; pi < spec.n_products; ++pi) {
                // Not every product is sold in every region; keep the first
                // combination so no segment ends up empty.
                const bool keep_always = (ri == 0 && pi == 0);
                if (!keep_always && rng.uniform() < spec.absence_prob) continue;

                Datarow row;
                row.key = {padded_label("SEG", si, spec.n_segments),
                           padded_label("R", ri, spec.n_regions),
                           padded_label("P", pi, spec.n_products)};
                const double growth = rng.uniform(spec.growth_min, spec.growth_max);
                const bool short_history =
                    rng.uniform() < spec.short_history_fraction && short_hi >= short_lo;
                row.first_quarter =
                    short_history
                        ? short_lo + static_cast<int>(rng.uniform_index(
                                         static_cast<std::size_t>(short_hi - short_lo + 1)))
                        : 0;

                const double base = segment_base[si] * region_share[ri] * product_share[pi];
                row.revenue.reserve(static_cast<std::size_t>(spec.n_quarters - row.first_quarter));
                for (int t = row.first_quarter; t < spec.n_quarters; ++t) {
                    const double noise = std::exp(spec.noise_sigma * rng.normal());
                    row.revenue.push_back(base * seasonal[t % 4] * std::pow(growth, t) * noise);
                }
                panel.rows.push_back(std::move(row));
            }
        }
    }
    panel.validate();
    return panel;
}

} // namespace revcast

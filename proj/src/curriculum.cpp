#include "curriculum.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace revcast {

namespace {

double training_revenue(const PanelDataset& panel, const DatarowKey& key, int train_end) {
    const Datarow* row = panel.find(key);
    if (!row) throw ValidationError("score_datarows: key not in panel: " + key.to_string());
    double sum = 0.0;
    for (int q = row->first_quarter; q <= std::min(row->last_quarter(), train_end); ++q) {
        sum += row->at(q);
    }
    return sum;
}

nlohmann::json key_to_json(const DatarowKey& key) {
    return {{"segment", key.segment}, {"region", key.region}, {"product", key.product}};
}

} // namespace

Ordering ordering_from_string(const std::string& s) {
    if (s == "ascending") return Ordering::ascending;
    if (s == "descending") return Ordering::descending;
    throw ValidationError("unknown ordering '" + s + "' (ascending|descending)");
}

Grouping grouping_from_string(const std::string& s) {
    if (s == "uniform") return Grouping::uniform;
    if (s == "by_segment") return Grouping::by_segment;
    throw ValidationError("unknown grouping '" + s + "' (uniform|by_segment)");
}

ScoreWeighting weighting_from_string(const std::string& s) {
    if (s == "uniform") return ScoreWeighting::uniform;
    if (s == "segment_revenue") return ScoreWeighting::segment_revenue;
    throw ValidationError("unknown weighting '" + s + "' (uniform|segment_revenue)");
}

std::string to_string(Ordering o) {
    return o == Ordering::ascending ? "ascending" : "descending";
}
std::string to_string(Grouping g) { return g == Grouping::uniform ? "uniform" : "by_segment"; }
std::string to_string(ScoreWeighting w) {
    return w == ScoreWeighting::uniform ? "uniform" : "segment_revenue";
}

std::map<DatarowKey, double> score_datarows(const std::map<DatarowKey, Decomposition>& decomps,
                                            const PanelDataset& panel,
                                            const std::vector<DatarowKey>& keys,
                                            ScoreWeighting weighting, int train_end) {
    std::vector<std::string> missing;
    for (const auto& key : keys) {
        if (!decomps.count(key)) missing.push_back(key.to_string());
    }
    if (!missing.empty()) {
        std::string msg = "score_datarows: missing decompositions for " +
                          std::to_string(missing.size()) + " key(s):";
        for (const auto& k : missing) msg += " " + k;
        throw ValidationError(msg);
    }

    std::map<std::string, double> segment_revenue;
    double total_revenue = 0.0;
    if (weighting == ScoreWeighting::segment_revenue) {
        for (const auto& key : keys) {
            const double rev = training_revenue(panel, key, train_end);
            segment_revenue[key.segment] += rev;
            total_revenue += rev;
        }
    }

    std::map<DatarowKey, double> scores;
    for (const auto& key : keys) {
        double score = residual_score(decomps.at(key));
        if (weighting == ScoreWeighting::segment_revenue) {
            score *= segment_revenue.at(key.segment) / total_revenue;
        }
        scores.emplace(key, score);
    }
    return scores;
}

std::vector<DatarowKey> CurriculumPlan::stage_keys(int stage) const {
    if (stage < 1 || stage > k) {
        throw ValidationError("curriculum stage " + std::to_string(stage) +
                              " out of range 1.." + std::to_string(k));
    }
    std::vector<DatarowKey> keys;
    for (int s = 0; s < stage; ++s) {
        keys.insert(keys.end(), batches[static_cast<std::size_t>(s)].begin(),
                    batches[static_cast<std::size_t>(s)].end());
    }
    return keys;
}

nlohmann::json CurriculumPlan::to_json() const {
    nlohmann::json j;
    j["k"] = k;
    j["epochs_per_stage"] = epochs_per_stage;
    j["ordering"] = to_string(ordering);
    j["grouping"] = to_string(grouping);
    j["seed"] = seed;
    nlohmann::json jb = nlohmann::json::array();
    for (const auto& batch : batches) {
        nlohmann::json keys = nlohmann::json::array();
        for (const auto& key : batch) {
            nlohmann::json entry = key_to_json(key);
            entry["score"] = scores.at(key);
            keys.push_back(std::move(entry));
        }
        jb.push_back(std::move(keys));
    }
    j["batches"] = std::move(jb);
    return j;
}

CurriculumPlan build_plan(const std::map<DatarowKey, double>& scores, int k, Ordering ordering,
                          Grouping grouping, int epochs_per_stage, std::uint64_t seed,
                          const PanelDataset& panel, int train_end) {
    if (scores.empty()) throw ValidationError("build_plan: no scored datarows");

    // Ties broken by lexicographic key for reproducibility.
    std::vector<DatarowKey> sorted;
    sorted.reserve(scores.size());
    for (const auto& [key, score] : scores) sorted.push_back(key);
    std::stable_sort(sorted.begin(), sorted.end(), [&](const DatarowKey& a, const DatarowKey& b) {
        const double sa = scores.at(a), sb = scores.at(b);
        if (sa != sb) return sa < sb;
        return a < b;
    });

    CurriculumPlan plan;
    plan.scores = scores;
    plan.ordering = ordering;
    plan.grouping = grouping;
    plan.epochs_per_stage = epochs_per_stage;
    plan.seed = seed;

    if (grouping == Grouping::uniform) {
        if (k < 1 || static_cast<std::size_t>(k) > scores.size()) {
            throw ValidationError("build_plan: k must be in 1..|rows| (k=" + std::to_string(k) +
                                  ", rows=" + std::to_string(scores.size()) + ")");
        }
        const std::size_t n = sorted.size();
        const std::size_t base = n / static_cast<std::size_t>(k);
        const std::size_t extra = n % static_cast<std::size_t>(k);
        std::size_t offset = 0;
        for (int b = 0; b < k; ++b) {
            const std::size_t size = base + (static_cast<std::size_t>(b) < extra ? 1 : 0);
            plan.batches.emplace_back(sorted.begin() + static_cast<std::ptrdiff_t>(offset),
                                      sorted.begin() + static_cast<std::ptrdiff_t>(offset + size));
            offset += size;
        }
    } else {
        // One batch per segment, ordered by revenue-weighted segment residual.
        std::map<std::string, std::vector<DatarowKey>> by_segment;
        for (const auto& key : sorted) by_segment[key.segment].push_back(key);
        std::vector<std::pair<double, std::string>> segment_order;
        for (const auto& [segment, keys] : by_segment) {
            double weighted = 0.0, revenue = 0.0;
            for (const auto& key : keys) {
                const double rev = training_revenue(panel, key, train_end);
                weighted += scores.at(key) * rev;
                revenue += rev;
            }
            segment_order.emplace_back(weighted / revenue, segment);
        }
        std::sort(segment_order.begin(), segment_order.end());
        for (const auto& [score, segment] : segment_order) {
            (void)score;
            plan.batches.push_back(std::move(by_segment.at(segment)));
        }
    }

    if (ordering == Ordering::descending) {
        std::reverse(plan.batches.begin(), plan.batches.end());
    }
    plan.k = static_cast<int>(plan.batches.size());
    return plan;
}

} // namespace revcast

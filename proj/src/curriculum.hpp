#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "panel.hpp"
#include "stl.hpp"

namespace revcast {

enum class Ordering { ascending, descending };
enum class Grouping { uniform, by_segment };
enum class ScoreWeighting { uniform, segment_revenue };

Ordering ordering_from_string(const std::string& s);
Grouping grouping_from_string(const std::string& s);
ScoreWeighting weighting_from_string(const std::string& s);
std::string to_string(Ordering o);
std::string to_string(Grouping g);
std::string to_string(ScoreWeighting w);

// Difficulty per trainable datarow. uniform: the STL residual RMS itself.
// segment_revenue: residual RMS times the segment's share of total training
// revenue, so rows in heavy segments sort as harder.
std::map<DatarowKey, double> score_datarows(const std::map<DatarowKey, Decomposition>& decomps,
                                            const PanelDataset& panel,
                                            const std::vector<DatarowKey>& keys,
                                            ScoreWeighting weighting, int train_end);

// Ordered stage batches. Batches partition the scored keys; under ascending
// ordering every score in batch i is <= every score in batch j for i < j.
struct CurriculumPlan {
    std::vector<std::vector<DatarowKey>> batches;
    std::map<DatarowKey, double> scores;
    int k = 0;
    int epochs_per_stage = 75;
    Ordering ordering = Ordering::ascending;
    Grouping grouping = Grouping::uniform;
    std::uint64_t seed = 0; // base for within-stage shuffles during training

    // Union of batches 1..stage (1-based).
    std::vector<DatarowKey> stage_keys(int stage) const;
    nlohmann::json to_json() const;
};

// uniform grouping: sort by (score, key) and quantile-split into k batches
// whose sizes differ by at most one. by_segment: one batch per segment,
// segments ordered by revenue-weighted segment residual; k is ignored.
CurriculumPlan build_plan(const std::map<DatarowKey, double>& scores, int k, Ordering ordering,
                          Grouping grouping, int epochs_per_stage, std::uint64_t seed,
                          const PanelDataset& panel, int train_end);

} // namespace revcast

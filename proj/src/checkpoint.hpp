#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "params.hpp"

namespace revcast::nn {

// Everything needed to resume or apply one forecaster: trainable parameters
// plus optimizer moments, with free-form metadata (variant, config, hashes).
struct ModelState {
    ParameterSet params;
    AdamState adam;
};

nlohmann::json checkpoint_to_json(const ModelState& state, const nlohmann::json& meta);

// Restores into `state`, whose parameters must already be registered with the
// expected shapes; mismatched or missing tensors are rejected.
nlohmann::json checkpoint_from_json(const nlohmann::json& j, ModelState& state);

void save_checkpoint(const ModelState& state, const nlohmann::json& meta,
                     const std::string& path);
nlohmann::json load_checkpoint(const std::string& path, ModelState& state);

} // namespace revcast::nn

#include "checkpoint.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace revcast::nn {

namespace {

constexpr int kFormatVersion = 1;

nlohmann::json tensor_to_json(const Tensor& t) {
    nlohmann::json j;
    j["shape"] = t.shape();
    j["values"] = std::vector<double>(t.data(), t.data() + t.size());
    return j;
}

void tensor_from_json(const nlohmann::json& j, Tensor& out, const std::string& name) {
    const auto shape = j.at("shape").get<std::vector<std::size_t>>();
    const auto values = j.at("values").get<std::vector<double>>();
    const Tensor loaded(shape, values);
    if (!loaded.same_shape(out)) {
        throw ValidationError("checkpoint: shape mismatch for '" + name + "': expected " +
                              out.shape_string() + ", found " + loaded.shape_string());
    }
    out = loaded;
}

} // namespace

nlohmann::json checkpoint_to_json(const ModelState& state, const nlohmann::json& meta) {
    nlohmann::json j;
    j["format_version"] = kFormatVersion;
    j["meta"] = meta;
    nlohmann::json params = nlohmann::json::object();
    nlohmann::json m1 = nlohmann::json::object();
    nlohmann::json m2 = nlohmann::json::object();
    for (const auto& name : state.params.names()) {
        params[name] = tensor_to_json(state.params.value(name));
        if (state.adam.first_moment.count(name)) {
            m1[name] = tensor_to_json(state.adam.first_moment.at(name));
            m2[name] = tensor_to_json(state.adam.second_moment.at(name));
        }
    }
    j["params"] = std::move(params);
    j["adam"] = {{"step", state.adam.step},
                 {"learning_rate", state.adam.config.learning_rate},
                 {"beta1", state.adam.config.beta1},
                 {"beta2", state.adam.config.beta2},
                 {"epsilon", state.adam.config.epsilon},
                 {"first_moment", std::move(m1)},
                 {"second_moment", std::move(m2)}};
    return j;
}

nlohmann::json checkpoint_from_json(const nlohmann::json& j, ModelState& state) {
    if (j.value("format_version", -1) != kFormatVersion) {
        throw ValidationError("checkpoint: unsupported format_version");
    }
    const auto& params = j.at("params");
    for (const auto& name : state.params.names()) {
        if (!params.contains(name)) {
            throw ValidationError("checkpoint: missing parameter '" + name + "'");
        }
        tensor_from_json(params.at(name), state.params.value(name), name);
    }
    for (const auto& [name, value] : params.items()) {
        (void)value;
        if (!state.params.has(name)) {
            throw ValidationError("checkpoint: unexpected parameter '" + name + "'");
        }
    }
    const auto& adam = j.at("adam");
    state.adam.step = adam.at("step").get<long>();
    state.adam.config.learning_rate = adam.at("learning_rate").get<double>();
    state.adam.config.beta1 = adam.at("beta1").get<double>();
    state.adam.config.beta2 = adam.at("beta2").get<double>();
    state.adam.config.epsilon = adam.at("epsilon").get<double>();
    state.adam.first_moment.clear();
    state.adam.second_moment.clear();
    for (const auto& [name, value] : adam.at("first_moment").items()) {
        Tensor t(state.params.value(name).shape());
        tensor_from_json(value, t, name);
        state.adam.first_moment.emplace(name, std::move(t));
    }
    for (const auto& [name, value] : adam.at("second_moment").items()) {
        Tensor t(state.params.value(name).shape());
        tensor_from_json(value, t, name);
        state.adam.second_moment.emplace(name, std::move(t));
    }
    return j.value("meta", nlohmann::json::object());
}

void save_checkpoint(const ModelState& state, const nlohmann::json& meta,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out << checkpoint_to_json(state, meta).dump(1) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

nlohmann::json load_checkpoint(const std::string& path, ModelState& state) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("checkpoint: invalid JSON in " + path + ": " + e.what());
    }
    return checkpoint_from_json(j, state);
}

} // namespace revcast::nn

#include "params.hpp"

#include <cmath>
#include <cstring>

#include "csv.hpp"
#include "errors.hpp"

namespace revcast::nn {

Tensor& ParameterSet::add(const std::string& name, std::vector<std::size_t> shape) {
    if (values_.count(name)) throw ValidationError("parameter '" + name + "' already registered");
    names_.push_back(name);
    grads_.emplace(name, Tensor(shape));
    return values_.emplace(name, Tensor(std::move(shape))).first->second;
}

Tensor& ParameterSet::value(const std::string& name) {
    const auto it = values_.find(name);
    if (it == values_.end()) throw ValidationError("unknown parameter '" + name + "'");
    return it->second;
}

const Tensor& ParameterSet::value(const std::string& name) const {
    const auto it = values_.find(name);
    if (it == values_.end()) throw ValidationError("unknown parameter '" + name + "'");
    return it->second;
}

Tensor& ParameterSet::grad(const std::string& name) {
    const auto it = grads_.find(name);
    if (it == grads_.end()) throw ValidationError("unknown parameter '" + name + "'");
    return it->second;
}

const Tensor& ParameterSet::grad(const std::string& name) const {
    const auto it = grads_.find(name);
    if (it == grads_.end()) throw ValidationError("unknown parameter '" + name + "'");
    return it->second;
}

void ParameterSet::zero_grads() {
    for (auto& [name, g] : grads_) g.fill(0.0);
}

bool ParameterSet::grads_finite() const {
    for (const auto& [name, g] : grads_) {
        if (!g.all_finite()) return false;
    }
    return true;
}

double ParameterSet::grad_norm() const {
    double sum = 0.0;
    for (const auto& [name, g] : grads_) {
        for (std::size_t i = 0; i < g.size(); ++i) sum += g[i] * g[i];
    }
    return std::sqrt(sum);
}

void ParameterSet::clip_grads(double max_norm) {
    const double norm = grad_norm();
    if (norm <= max_norm || norm == 0.0) return;
    const double scale = max_norm / norm;
    for (auto& [name, g] : grads_) {
        for (std::size_t i = 0; i < g.size(); ++i) g[i] *= scale;
    }
}

std::uint64_t ParameterSet::content_hash() const {
    std::string bytes;
    for (const auto& name : names_) {
        bytes += name;
        const Tensor& t = value(name);
        const char* p = reinterpret_cast<const char*>(t.data());
        bytes.append(p, t.size() * sizeof(double));
    }
    return csv::fnv1a(bytes);
}

void glorot_init(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
}

void adam_step(ParameterSet& params, AdamState& state) {
    if (!params.grads_finite()) {
        throw TrainingError("adam_step: non-finite gradient at step " +
                            std::to_string(state.step));
    }
    state.step += 1;
    const AdamConfig& c = state.config;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (const auto& name : params.names()) {
        Tensor& value = params.value(name);
        const Tensor& grad = params.grad(name);
        auto mit = state.first_moment.find(name);
        if (mit == state.first_moment.end()) {
            mit = state.first_moment.emplace(name, Tensor(value.shape())).first;
            state.second_moment.emplace(name, Tensor(value.shape()));
        }
        Tensor& m = mit->second;
        Tensor& v = state.second_moment.at(name);
        check_same_shape(value, m, "adam moment");
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double g = grad[i];
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            value[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
        }
    }
}

} // namespace revcast::nn

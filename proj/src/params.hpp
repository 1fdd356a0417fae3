#pragma once

#include <map>
#include <string>
#include <vector>

#include "rng.hpp"
#include "tensor.hpp"

namespace revcast::nn {

// Named trainable tensors plus matching gradient accumulators. Name order is
// the registration order, fixed per model family, so checkpoints and updates
// are deterministic.
class ParameterSet {
public:
    Tensor& add(const std::string& name, std::vector<std::size_t> shape);
    Tensor& value(const std::string& name);
    const Tensor& value(const std::string& name) const;
    Tensor& grad(const std::string& name);
    const Tensor& grad(const std::string& name) const;
    bool has(const std::string& name) const { return values_.count(name) != 0; }
    const std::vector<std::string>& names() const { return names_; }

    void zero_grads();
    bool grads_finite() const;
    double grad_norm() const;
    // Scales gradients so their global L2 norm is at most max_norm.
    void clip_grads(double max_norm);

    std::uint64_t content_hash() const;

private:
    std::vector<std::string> names_;
    std::map<std::string, Tensor> values_;
    std::map<std::string, Tensor> grads_;
};

// Uniform in [-limit, limit] with limit = sqrt(6 / (fan_in + fan_out)).
void glorot_init(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig config;
    long step = 0;
    std::map<std::string, Tensor> first_moment;
    std::map<std::string, Tensor> second_moment;
};

// Bias-corrected Adam update over every parameter; increments step by one.
// Throws TrainingError when any gradient is non-finite.
void adam_step(ParameterSet& params, AdamState& state);

} // namespace revcast::nn

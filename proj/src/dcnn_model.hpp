#pragma once

#include <cstdint>
#include <vector>

#include "checkpoint.hpp"
#include "panel.hpp"
#include "params.hpp"

namespace revcast {

struct DcnnConfig {
    int n_layers = 10;
    int filters = 6;
    int kernel_width = 2;
    int dense_hidden = 128;
    int covariate_dim = 0;
    double learning_rate = 1e-3;
    double clip_norm = 5.0;

    int input_channels() const { return 1 + covariate_dim; }
    // Dilations 1, 2, ..., 2^(L-1) with width-2 kernels span 2^L inputs.
    int receptive_field() const;
    void validate() const;
};

// Next-step example: values[0..t] predict values[t+1]. Examples sharing one
// series are evaluated through a single causal pass, which leaves per-example
// outputs unchanged (the stack is causal), so this is batching, not a model
// change.
struct DcnnExample {
    const std::vector<double>* series = nullptr;
    int t = 0;
    double target = 0.0;
    const std::vector<double>* covariates = nullptr;
    DatarowKey key;
    int max_quarter = -1;
};

// Causal dilated convolution stack (ReLU between layers) with a dense-ReLU
// head applied at the final time position.
class DcnnForecaster {
public:
    DcnnForecaster(const DcnnConfig& cfg, std::uint64_t init_seed);

    double train_step(const std::vector<const DcnnExample*>& batch);

    // Iteratively predicts horizon steps, appending each prediction.
    std::vector<double> forecast(const std::vector<double>& history,
                                 const std::vector<double>* covariates, int horizon) const;

    nn::ModelState& state() { return state_; }
    const nn::ModelState& state() const { return state_; }
    const DcnnConfig& config() const { return cfg_; }

private:
    DcnnConfig cfg_;
    nn::ModelState state_;
};

} // namespace revcast

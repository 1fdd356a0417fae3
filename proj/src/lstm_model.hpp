#pragma once

#include <cstdint>
#include <vector>

#include "checkpoint.hpp"
#include "panel.hpp"
#include "params.hpp"

namespace revcast {

struct LstmConfig {
    int hidden_size = 64;
    int encoder_length = 11;
    int horizon = 4;
    int covariate_dim = 0; // one-hot length; 0 disables covariates
    double learning_rate = 1e-3;
    double clip_norm = 5.0;

    int input_dim() const { return 1 + covariate_dim; }
    void validate() const;
};

// One windowed training example. Decoder targets immediately follow the
// encoder values in time; max_quarter records the newest quarter the example
// touches (leakage instrumentation).
struct LstmExample {
    std::vector<double> encoder_values;
    std::vector<double> targets;
    const std::vector<double>* covariates = nullptr;
    DatarowKey key;
    int max_quarter = -1;
};

// Sequence-to-sequence forecaster: single-layer LSTM encoder, LSTM decoder
// initialized from the encoder's final state, dense head per decoder step.
// Teacher forcing during training; autoregressive decoding at inference.
class LstmForecaster {
public:
    LstmForecaster(const LstmConfig& cfg, std::uint64_t init_seed);

    // One MAE + Adam update over the batch; returns the batch loss.
    double train_step(const std::vector<const LstmExample*>& batch);

    // history: transformed values ending at the forecast origin; the last
    // encoder_length entries feed the encoder.
    std::vector<double> forecast(const std::vector<double>& history,
                                 const std::vector<double>* covariates, int horizon) const;

    nn::ModelState& state() { return state_; }
    const nn::ModelState& state() const { return state_; }
    const LstmConfig& config() const { return cfg_; }

    // When set, each train_step/forecast appends the revenue-feature value fed
    // to the decoder at every step (first example of the batch).
    mutable std::vector<double>* decoder_input_trace = nullptr;

private:
    LstmConfig cfg_;
    nn::ModelState state_;
};

} // namespace revcast

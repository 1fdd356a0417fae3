#include "lstm_model.hpp"

#include <cmath>

#include "errors.hpp"
#include "graph.hpp"
#include "layers.hpp"
#include "rng.hpp"

namespace revcast {

using nn::Graph;
using nn::Node;
using nn::Tensor;

void LstmConfig::validate() const {
    if (hidden_size < 1 || encoder_length < 1 || horizon < 0 || covariate_dim < 0) {
        throw ValidationError("lstm config: sizes out of range");
    }
    if (!(learning_rate > 0)) throw ValidationError("lstm config: learning_rate must be > 0");
}

LstmForecaster::LstmForecaster(const LstmConfig& cfg, std::uint64_t init_seed) : cfg_(cfg) {
    cfg_.validate();
    const auto d = static_cast<std::size_t>(cfg_.input_dim());
    const auto h = static_cast<std::size_t>(cfg_.hidden_size);
    Rng rng(init_seed);
    auto& p = state_.params;
    nn::glorot_init(p.add("encoder.w", {d, 4 * h}), d, 4 * h, rng);
    nn::glorot_init(p.add("encoder.u", {h, 4 * h}), h, 4 * h, rng);
    p.add("encoder.b", {4 * h});
    nn::glorot_init(p.add("decoder.w", {d, 4 * h}), d, 4 * h, rng);
    nn::glorot_init(p.add("decoder.u", {h, 4 * h}), h, 4 * h, rng);
    p.add("decoder.b", {4 * h});
    nn::glorot_init(p.add("head.w", {h, 1}), h, 1, rng);
    p.add("head.b", {1});
    state_.adam.config.learning_rate = cfg_.learning_rate;
}

namespace {

struct CellLeaves {
    nn::LstmCellRefs encoder;
    nn::LstmCellRefs decoder;
    Node* head_w;
    Node* head_b;
};

CellLeaves bind_leaves(Graph& g, nn::ModelState& state, std::size_t hidden, bool with_grads) {
    auto& p = state.params;
    auto leaf = [&](const char* name) {
        return with_grads ? g.parameter(p.value(name), &p.grad(name))
                          : g.input(p.value(name));
    };
    CellLeaves leaves{
        {leaf("encoder.w"), leaf("encoder.u"), leaf("encoder.b"), hidden},
        {leaf("decoder.w"), leaf("decoder.u"), leaf("decoder.b"), hidden},
        leaf("head.w"),
        leaf("head.b"),
    };
    return leaves;
}

} // namespace

double LstmForecaster::train_step(const std::vector<const LstmExample*>& batch) {
    if (batch.empty()) throw ValidationError("lstm train_step: empty batch");
    const std::size_t b = batch.size();
    const auto enc_len = static_cast<std::size_t>(cfg_.encoder_length);
    const auto horizon = static_cast<std::size_t>(cfg_.horizon);
    const auto d = static_cast<std::size_t>(cfg_.input_dim());
    const auto h = static_cast<std::size_t>(cfg_.hidden_size);

    for (const LstmExample* ex : batch) {
        if (ex->encoder_values.size() != enc_len || ex->targets.size() != horizon) {
            throw ValidationError("lstm train_step: example for " + ex->key.to_string() +
                                  " has wrong window sizes");
        }
        if (cfg_.covariate_dim > 0 &&
            (!ex->covariates ||
             ex->covariates->size() != static_cast<std::size_t>(cfg_.covariate_dim))) {
            throw ValidationError("lstm train_step: covariates missing or wrong length for " +
                                  ex->key.to_string());
        }
    }

    Graph g;
    CellLeaves leaves = bind_leaves(g, state_, h, true);

    auto make_step_input = [&](auto value_for_example) {
        Tensor x = Tensor::matrix(b, d);
        for (std::size_t i = 0; i < b; ++i) {
            x.at(i, 0) = value_for_example(*batch[i]);
            for (std::size_t c = 1; c < d; ++c) x.at(i, c) = (*batch[i]->covariates)[c - 1];
        }
        return g.input(std::move(x));
    };

    Node* hs = g.input(Tensor::matrix(b, h));
    Node* cs = g.input(Tensor::matrix(b, h));
    for (std::size_t t = 0; t < enc_len; ++t) {
        Node* x = make_step_input([t](const LstmExample& ex) { return ex.encoder_values[t]; });
        std::tie(hs, cs) = nn::lstm_cell(g, x, hs, cs, leaves.encoder);
    }

    // Teacher forcing: the decoder consumes the previous actual target; its
    // first input is the last encoder-step observation.
    Node* preds = nullptr;
    for (std::size_t j = 0; j < horizon; ++j) {
        Node* x = make_step_input([j, enc_len](const LstmExample& ex) {
            return j == 0 ? ex.encoder_values[enc_len - 1] : ex.targets[j - 1];
        });
        if (decoder_input_trace) decoder_input_trace->push_back(x->value.at(0, 0));
        std::tie(hs, cs) = nn::lstm_cell(g, x, hs, cs, leaves.decoder);
        Node* y = nn::dense(g, hs, leaves.head_w, leaves.head_b); // B x 1
        preds = preds ? g.concat_cols(preds, y) : y;
    }
    if (horizon == 0) return 0.0;

    Tensor targets = Tensor::matrix(b, horizon);
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < horizon; ++j) targets.at(i, j) = batch[i]->targets[j];
    }
    Node* loss = g.mae(preds, std::move(targets));
    const double loss_value = loss->scalar();
    if (!std::isfinite(loss_value)) {
        throw TrainingError("lstm train_step: non-finite loss on a batch of " +
                            std::to_string(b) + " examples (first key " +
                            batch[0]->key.to_string() + ")");
    }

    state_.params.zero_grads();
    g.backward(loss);
    state_.params.clip_grads(cfg_.clip_norm);
    nn::adam_step(state_.params, state_.adam);
    return loss_value;
}

std::vector<double> LstmForecaster::forecast(const std::vector<double>& history,
                                             const std::vector<double>* covariates,
                                             int horizon) const {
    if (horizon == 0) return {};
    if (horizon < 0) throw ValidationError("lstm forecast: negative horizon");
    const auto enc_len = static_cast<std::size_t>(cfg_.encoder_length);
    if (history.size() < enc_len) {
        throw InsufficientHistoryError("lstm forecast: need at least " +
                                       std::to_string(cfg_.encoder_length) +
                                       " observations, got " + std::to_string(history.size()));
    }
    if (cfg_.covariate_dim > 0 &&
        (!covariates || covariates->size() != static_cast<std::size_t>(cfg_.covariate_dim))) {
        throw ValidationError("lstm forecast: covariates missing or wrong length");
    }
    const auto d = static_cast<std::size_t>(cfg_.input_dim());
    const auto h = static_cast<std::size_t>(cfg_.hidden_size);

    Graph g;
    CellLeaves leaves = bind_leaves(g, const_cast<nn::ModelState&>(state_), h, false);
    auto step_input = [&](double value) {
        Tensor x = Tensor::matrix(1, d);
        x.at(0, 0) = value;
        for (std::size_t c = 1; c < d; ++c) x.at(0, c) = (*covariates)[c - 1];
        return g.input(std::move(x));
    };

    Node* hs = g.input(Tensor::matrix(1, h));
    Node* cs = g.input(Tensor::matrix(1, h));
    for (std::size_t t = history.size() - enc_len; t < history.size(); ++t) {
        std::tie(hs, cs) = nn::lstm_cell(g, step_input(history[t]), hs, cs, leaves.encoder);
    }

    // Autoregressive decoding: each step consumes the previous prediction.
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(horizon));
    double prev = history.back();
    for (int j = 0; j < horizon; ++j) {
        if (decoder_input_trace) decoder_input_trace->push_back(prev);
        std::tie(hs, cs) = nn::lstm_cell(g, step_input(prev), hs, cs, leaves.decoder);
        Node* y = nn::dense(g, hs, leaves.head_w, leaves.head_b);
        prev = y->value[0];
        out.push_back(prev);
    }
    return out;
}

} // namespace revcast

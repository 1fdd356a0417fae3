#include "dcnn_model.hpp"

#include <cmath>
#include <map>

#include "errors.hpp"
#include "graph.hpp"
#include "layers.hpp"
#include "rng.hpp"

namespace revcast {

using nn::Graph;
using nn::Node;
using nn::Tensor;

int DcnnConfig::receptive_field() const {
    int rf = 1;
    for (int l = 0; l < n_layers; ++l) rf += (1 << l) * (kernel_width - 1);
    return rf;
}

void DcnnConfig::validate() const {
    if (n_layers < 1 || filters < 1 || kernel_width < 2 || dense_hidden < 1 ||
        covariate_dim < 0) {
        throw ValidationError("dcnn config: sizes out of range");
    }
    if (n_layers > 30) throw ValidationError("dcnn config: n_layers too large");
    if (!(learning_rate > 0)) throw ValidationError("dcnn config: learning_rate must be > 0");
}

DcnnForecaster::DcnnForecaster(const DcnnConfig& cfg, std::uint64_t init_seed) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(init_seed);
    auto& p = state_.params;
    const auto width = static_cast<std::size_t>(cfg_.kernel_width);
    const auto filters = static_cast<std::size_t>(cfg_.filters);
    for (int l = 0; l < cfg_.n_layers; ++l) {
        const std::size_t c_in =
            l == 0 ? static_cast<std::size_t>(cfg_.input_channels()) : filters;
        const std::string tag = "conv" + std::to_string(l);
        nn::glorot_init(p.add(tag + ".w", {filters, c_in, width}), c_in * width, filters * width,
                        rng);
        p.add(tag + ".b", {filters});
    }
    const auto dense = static_cast<std::size_t>(cfg_.dense_hidden);
    nn::glorot_init(p.add("head1.w", {filters, dense}), filters, dense, rng);
    p.add("head1.b", {dense});
    nn::glorot_init(p.add("head2.w", {dense, 1}), dense, 1, rng);
    p.add("head2.b", {1});
    state_.adam.config.learning_rate = cfg_.learning_rate;
}

namespace {

struct DcnnLeaves {
    std::vector<Node*> conv_w;
    std::vector<Node*> conv_b;
    Node* head1_w;
    Node* head1_b;
    Node* head2_w;
    Node* head2_b;
};

DcnnLeaves bind_leaves(Graph& g, nn::ModelState& state, int n_layers, bool with_grads) {
    auto& p = state.params;
    auto leaf = [&](const std::string& name) {
        return with_grads ? g.parameter(p.value(name), &p.grad(name)) : g.input(p.value(name));
    };
    DcnnLeaves leaves;
    for (int l = 0; l < n_layers; ++l) {
        const std::string tag = "conv" + std::to_string(l);
        leaves.conv_w.push_back(leaf(tag + ".w"));
        leaves.conv_b.push_back(leaf(tag + ".b"));
    }
    leaves.head1_w = leaf("head1.w");
    leaves.head1_b = leaf("head1.b");
    leaves.head2_w = leaf("head2.w");
    leaves.head2_b = leaf("head2.b");
    return leaves;
}

Tensor build_input(const std::vector<double>& series, std::size_t length,
                   const std::vector<double>* covariates, int covariate_dim) {
    const auto channels = static_cast<std::size_t>(1 + covariate_dim);
    Tensor x = Tensor::matrix(channels, length);
    for (std::size_t t = 0; t < length; ++t) x.at(0, t) = series[t];
    for (std::size_t c = 1; c < channels; ++c) {
        const double v = (*covariates)[c - 1]; // constant over time
        for (std::size_t t = 0; t < length; ++t) x.at(c, t) = v;
    }
    return x;
}

// Conv stack with ReLU after every layer; returns channels x time.
Node* conv_stack(Graph& g, Node* x, const DcnnLeaves& leaves) {
    Node* out = x;
    for (std::size_t l = 0; l < leaves.conv_w.size(); ++l) {
        out = g.conv1d_causal(out, leaves.conv_w[l], leaves.conv_b[l], 1 << l);
        out = g.relu(out);
    }
    return out;
}

Node* head(Graph& g, Node* features, const DcnnLeaves& leaves) {
    Node* hidden = g.relu(nn::dense(g, features, leaves.head1_w, leaves.head1_b));
    return nn::dense(g, hidden, leaves.head2_w, leaves.head2_b);
}

} // namespace

double DcnnForecaster::train_step(const std::vector<const DcnnExample*>& batch) {
    if (batch.empty()) throw ValidationError("dcnn train_step: empty batch");
    for (const DcnnExample* ex : batch) {
        if (!ex->series || ex->t < 0 ||
            static_cast<std::size_t>(ex->t) >= ex->series->size()) {
            throw ValidationError("dcnn train_step: bad example position for " +
                                  ex->key.to_string());
        }
        if (cfg_.covariate_dim > 0 &&
            (!ex->covariates ||
             ex->covariates->size() != static_cast<std::size_t>(cfg_.covariate_dim))) {
            throw ValidationError("dcnn train_step: covariates missing or wrong length for " +
                                  ex->key.to_string());
        }
    }

    // Group by source series: examples from one series share a causal pass.
    struct Group {
        const DcnnExample* first;
        std::vector<int> positions;
        std::vector<double> targets;
    };
    std::vector<Group> groups;
    std::map<const std::vector<double>*, std::size_t> index;
    for (const DcnnExample* ex : batch) {
        auto [it, inserted] = index.emplace(ex->series, groups.size());
        if (inserted) groups.push_back({ex, {}, {}});
        Group& grp = groups[it->second];
        grp.positions.push_back(ex->t);
        grp.targets.push_back(ex->target);
    }

    Graph g;
    DcnnLeaves leaves = bind_leaves(g, state_, cfg_.n_layers, true);
    Node* loss = nullptr;
    const auto total = static_cast<double>(batch.size());
    for (const Group& grp : groups) {
        int t_max = 0;
        for (const int t : grp.positions) t_max = std::max(t_max, t);
        Node* x = g.input(build_input(*grp.first->series, static_cast<std::size_t>(t_max) + 1,
                                      grp.first->covariates, cfg_.covariate_dim));
        Node* features = conv_stack(g, x, leaves);
        Node* at_positions = g.gather_time(features, grp.positions);
        Node* preds = head(g, at_positions, leaves);
        Tensor targets({grp.targets.size(), 1}, grp.targets);
        Node* part = g.scale(g.mae(preds, std::move(targets)),
                             static_cast<double>(grp.positions.size()) / total);
        loss = loss ? g.add(loss, part) : part;
    }

    const double loss_value = loss->scalar();
    if (!std::isfinite(loss_value)) {
        throw TrainingError("dcnn train_step: non-finite loss on a batch of " +
                            std::to_string(batch.size()) + " examples (first key " +
                            batch[0]->key.to_string() + ")");
    }
    state_.params.zero_grads();
    g.backward(loss);
    state_.params.clip_grads(cfg_.clip_norm);
    nn::adam_step(state_.params, state_.adam);
    return loss_value;
}

std::vector<double> DcnnForecaster::forecast(const std::vector<double>& history,
                                             const std::vector<double>* covariates,
                                             int horizon) const {
    if (horizon == 0) return {};
    if (horizon < 0) throw ValidationError("dcnn forecast: negative horizon");
    if (history.empty()) {
        throw InsufficientHistoryError("dcnn forecast: history must be non-empty");
    }
    if (cfg_.covariate_dim > 0 &&
        (!covariates || covariates->size() != static_cast<std::size_t>(cfg_.covariate_dim))) {
        throw ValidationError("dcnn forecast: covariates missing or wrong length");
    }

    std::vector<double> series = history;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(horizon));
    for (int i = 0; i < horizon; ++i) {
        Graph g;
        DcnnLeaves leaves =
            bind_leaves(g, const_cast<nn::ModelState&>(state_), cfg_.n_layers, false);
        Node* x = g.input(build_input(series, series.size(), covariates, cfg_.covariate_dim));
        Node* features = conv_stack(g, x, leaves);
        Node* last = g.gather_time(features, {static_cast<int>(series.size()) - 1});
        const double pred = head(g, last, leaves)->value[0];
        out.push_back(pred);
        series.push_back(pred);
    }
    return out;
}

} // namespace revcast

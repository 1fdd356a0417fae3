#pragma once

#include <deque>
#include <functional>
#include <utility>
#include <vector>

#include "tensor.hpp"

namespace revcast::nn {

// Reverse-mode tape. Nodes are created in topological order, so the backward
// sweep is a reverse iteration over the arena. A graph is built per forward
// pass and discarded after backward().
struct Node {
    Tensor value;
    Tensor grad; // allocated lazily during backward
    bool needs_grad = false;
    std::function<void(Node&)> backprop;

    double scalar() const { return value[0]; }
};

class Graph {
public:
    // Leaf bound to an external gradient accumulator (a model parameter or a
    // probed input). After backward(), *grad_sink has the accumulated gradient
    // added to it.
    Node* parameter(const Tensor& value, Tensor* grad_sink);
    // Leaf without gradient tracking.
    Node* input(Tensor value);

    Node* matmul(Node* a, Node* b);
    Node* add(Node* a, Node* b);
    Node* sub(Node* a, Node* b);
    Node* mul(Node* a, Node* b);
    Node* add_row(Node* m, Node* row); // broadcast a vector across matrix rows
    Node* slice_cols(Node* m, std::size_t lo, std::size_t hi);
    Node* concat_cols(Node* a, Node* b);
    Node* sigmoid(Node* x);
    Node* tanh_op(Node* x);
    Node* relu(Node* x);
    Node* scale(Node* x, double factor);
    // Causal 1-D convolution: x is channels x time, w is {out, in, width},
    // bias {out}. Left zero padding keeps the output length equal to the
    // input length; output at t sees inputs at t, t-d, ..., t-d*(width-1).
    Node* conv1d_causal(Node* x, Node* w, Node* b, int dilation);
    // Rows of x' at the given time positions: (C x T, positions) -> P x C.
    Node* gather_time(Node* x, std::vector<int> positions);
    // Mean absolute error against a constant target; subgradient 0 at ties.
    Node* mae(Node* pred, Tensor target);
    // Sum of all elements, as a scalar.
    Node* sum(Node* x);

    void backward(Node* root);

private:
    Node* make(Tensor value, bool needs_grad, std::function<void(Node&)> backprop);
    static void ensure_grad(Node* n);

    std::deque<Node> nodes_;
    std::vector<std::pair<Node*, Tensor*>> bindings_;
};

} // namespace revcast::nn

#pragma once

#include <utility>

#include "graph.hpp"

namespace revcast::nn {

// One LSTM step over a batch. x is B x D, h/c are B x H. Weights are packed
// along the column axis in gate order [input, forget, candidate, output]:
// w is D x 4H, u is H x 4H, b is 4H.
struct LstmCellRefs {
    Node* w;
    Node* u;
    Node* b;
    std::size_t hidden;
};

std::pair<Node*, Node*> lstm_cell(Graph& g, Node* x, Node* h_prev, Node* c_prev,
                                  const LstmCellRefs& cell);

// x (B x D) -> x.w + b with w D x N, b N.
Node* dense(Graph& g, Node* x, Node* w, Node* b);

} // namespace revcast::nn

#include "layers.hpp"

namespace revcast::nn {

std::pair<Node*, Node*> lstm_cell(Graph& g, Node* x, Node* h_prev, Node* c_prev,
                                  const LstmCellRefs& cell) {
    const std::size_t h = cell.hidden;
    Node* gates = g.add_row(g.add(g.matmul(x, cell.w), g.matmul(h_prev, cell.u)), cell.b);
    Node* gate_i = g.sigmoid(g.slice_cols(gates, 0, h));
    Node* gate_f = g.sigmoid(g.slice_cols(gates, h, 2 * h));
    Node* gate_g = g.tanh_op(g.slice_cols(gates, 2 * h, 3 * h));
    Node* gate_o = g.sigmoid(g.slice_cols(gates, 3 * h, 4 * h));
    Node* c = g.add(g.mul(gate_f, c_prev), g.mul(gate_i, gate_g));
    Node* h_new = g.mul(gate_o, g.tanh_op(c));
    return {h_new, c};
}

Node* dense(Graph& g, Node* x, Node* w, Node* b) {
    return g.add_row(g.matmul(x, w), b);
}

} // namespace revcast::nn

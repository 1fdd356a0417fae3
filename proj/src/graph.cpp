#include "graph.hpp"

#include <cmath>

#include "errors.hpp"

namespace revcast::nn {

Node* Graph::make(Tensor value, bool needs_grad, std::function<void(Node&)> backprop) {
    nodes_.emplace_back();
    Node& n = nodes_.back();
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    n.backprop = std::move(backprop);
    return &n;
}

void Graph::ensure_grad(Node* n) {
    if (n->grad.size() == 0) n->grad = Tensor(n->value.shape());
}

Node* Graph::parameter(const Tensor& value, Tensor* grad_sink) {
    Node* n = make(value, true, nullptr);
    bindings_.emplace_back(n, grad_sink);
    return n;
}

Node* Graph::input(Tensor value) { return make(std::move(value), false, nullptr); }

Node* Graph::matmul(Node* a, Node* b) {
    if (a->value.rank() != 2 || b->value.rank() != 2 || a->value.cols() != b->value.rows()) {
        throw ValidationError("matmul: incompatible shapes " + a->value.shape_string() + " and " +
                              b->value.shape_string());
    }
    const std::size_t m = a->value.rows(), k = a->value.cols(), n = b->value.cols();
    Tensor out = Tensor::matrix(m, n);
    {
        const double* A = a->value.data();
        const double* B = b->value.data();
        double* C = out.data();
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t l = 0; l < k; ++l) {
                const double av = A[i * k + l];
                if (av == 0.0) continue;
                const double* Brow = B + l * n;
                double* Crow = C + i * n;
                for (std::size_t j = 0; j < n; ++j) Crow[j] += av * Brow[j];
            }
        }
    }
    const bool tracked = a->needs_grad || b->needs_grad;
    return make(std::move(out), tracked, [a, b, m, k, n](Node& self) {
        const double* G = self.grad.data();
        if (a->needs_grad) {
            ensure_grad(a);
            const double* B = b->value.data();
            double* dA = a->grad.data();
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t l = 0; l < k; ++l) {
                    const double* Grow = G + i * n;
                    const double* Brow = B + l * n;
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j) acc += Grow[j] * Brow[j];
                    dA[i * k + l] += acc;
                }
            }
        }
        if (b->needs_grad) {
            ensure_grad(b);
            const double* A = a->value.data();
            double* dB = b->grad.data();
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t l = 0; l < k; ++l) {
                    const double av = A[i * k + l];
                    if (av == 0.0) continue;
                    const double* Grow = G + i * n;
                    double* dBrow = dB + l * n;
                    for (std::size_t j = 0; j < n; ++j) dBrow[j] += av * Grow[j];
                }
            }
        }
    });
}

Node* Graph::add(Node* a, Node* b) {
    check_same_shape(a->value, b->value, "add");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b->value[i];
    const bool tracked = a->needs_grad || b->needs_grad;
    return make(std::move(out), tracked, [a, b](Node& self) {
        for (Node* p : {a, b}) {
            if (!p->needs_grad) continue;
            ensure_grad(p);
            for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
        }
    });
}

Node* Graph::sub(Node* a, Node* b) {
    check_same_shape(a->value, b->value, "sub");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b->value[i];
    const bool tracked = a->needs_grad || b->needs_grad;
    return make(std::move(out), tracked, [a, b](Node& self) {
        if (a->needs_grad) {
            ensure_grad(a);
            for (std::size_t i = 0; i < self.grad.size(); ++i) a->grad[i] += self.grad[i];
        }
        if (b->needs_grad) {
            ensure_grad(b);
            for (std::size_t i = 0; i < self.grad.size(); ++i) b->grad[i] -= self.grad[i];
        }
    });
}

Node* Graph::mul(Node* a, Node* b) {
    check_same_shape(a->value, b->value, "mul");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b->value[i];
    const bool tracked = a->needs_grad || b->needs_grad;
    return make(std::move(out), tracked, [a, b](Node& self) {
        if (a->needs_grad) {
            ensure_grad(a);
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                a->grad[i] += self.grad[i] * b->value[i];
            }
        }
        if (b->needs_grad) {
            ensure_grad(b);
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                b->grad[i] += self.grad[i] * a->value[i];
            }
        }
    });
}

Node* Graph::add_row(Node* m, Node* row) {
    if (m->value.rank() != 2 || row->value.rank() != 1 || row->value.shape()[0] != m->value.cols()) {
        throw ValidationError("add_row: incompatible shapes " + m->value.shape_string() + " and " +
                              row->value.shape_string());
    }
    const std::size_t rows = m->value.rows(), cols = m->value.cols();
    Tensor out = m->value;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) out.at(i, j) += row->value[j];
    }
    const bool tracked = m->needs_grad || row->needs_grad;
    return make(std::move(out), tracked, [m, row, rows, cols](Node& self) {
        if (m->needs_grad) {
            ensure_grad(m);
            for (std::size_t i = 0; i < self.grad.size(); ++i) m->grad[i] += self.grad[i];
        }
        if (row->needs_grad) {
            ensure_grad(row);
            for (std::size_t i = 0; i < rows; ++i) {
                for (std::size_t j = 0; j < cols; ++j) row->grad[j] += self.grad.at(i, j);
            }
        }
    });
}

Node* Graph::slice_cols(Node* m, std::size_t lo, std::size_t hi) {
    if (m->value.rank() != 2 || lo >= hi || hi > m->value.cols()) {
        throw ValidationError("slice_cols: bad range on " + m->value.shape_string());
    }
    const std::size_t rows = m->value.rows(), cols = hi - lo;
    Tensor out = Tensor::matrix(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) out.at(i, j) = m->value.at(i, lo + j);
    }
    return make(std::move(out), m->needs_grad, [m, lo, rows, cols](Node& self) {
        if (!m->needs_grad) return;
        ensure_grad(m);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) m->grad.at(i, lo + j) += self.grad.at(i, j);
        }
    });
}

Node* Graph::concat_cols(Node* a, Node* b) {
    if (a->value.rank() != 2 || b->value.rank() != 2 || a->value.rows() != b->value.rows()) {
        throw ValidationError("concat_cols: incompatible shapes " + a->value.shape_string() +
                              " and " + b->value.shape_string());
    }
    const std::size_t rows = a->value.rows(), ca = a->value.cols(), cb = b->value.cols();
    Tensor out = Tensor::matrix(rows, ca + cb);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < ca; ++j) out.at(i, j) = a->value.at(i, j);
        for (std::size_t j = 0; j < cb; ++j) out.at(i, ca + j) = b->value.at(i, j);
    }
    const bool tracked = a->needs_grad || b->needs_grad;
    return make(std::move(out), tracked, [a, b, rows, ca, cb](Node& self) {
        if (a->needs_grad) {
            ensure_grad(a);
            for (std::size_t i = 0; i < rows; ++i) {
                for (std::size_t j = 0; j < ca; ++j) a->grad.at(i, j) += self.grad.at(i, j);
            }
        }
        if (b->needs_grad) {
            ensure_grad(b);
            for (std::size_t i = 0; i < rows; ++i) {
                for (std::size_t j = 0; j < cb; ++j) b->grad.at(i, j) += self.grad.at(i, ca + j);
            }
        }
    });
}

Node* Graph::sigmoid(Node* x) {
    Tensor out = x->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
    return make(std::move(out), x->needs_grad, [x](Node& self) {
        if (!x->needs_grad) return;
        ensure_grad(x);
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            const double y = self.value[i];
            x->grad[i] += self.grad[i] * y * (1.0 - y);
        }
    });
}

Node* Graph::tanh_op(Node* x) {
    Tensor out = x->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
    return make(std::move(out), x->needs_grad, [x](Node& self) {
        if (!x->needs_grad) return;
        ensure_grad(x);
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            const double y = self.value[i];
            x->grad[i] += self.grad[i] * (1.0 - y * y);
        }
    });
}

Node* Graph::relu(Node* x) {
    Tensor out = x->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
    return make(std::move(out), x->needs_grad, [x](Node& self) {
        if (!x->needs_grad) return;
        ensure_grad(x);
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            if (x->value[i] > 0.0) x->grad[i] += self.grad[i];
        }
    });
}

Node* Graph::scale(Node* x, double factor) {
    Tensor out = x->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factor;
    return make(std::move(out), x->needs_grad, [x, factor](Node& self) {
        if (!x->needs_grad) return;
        ensure_grad(x);
        for (std::size_t i = 0; i < self.grad.size(); ++i) x->grad[i] += factor * self.grad[i];
    });
}

Node* Graph::conv1d_causal(Node* x, Node* w, Node* b, int dilation) {
    if (x->value.rank() != 2 || w->value.rank() != 3) {
        throw ValidationError("conv1d: expected x [CxT] and w [out,in,width]");
    }
    const std::size_t c_in = x->value.rows(), time = x->value.cols();
    const std::size_t c_out = w->value.shape()[0];
    const std::size_t width = w->value.shape()[2];
    if (w->value.shape()[1] != c_in || b->value.size() != c_out || dilation < 1) {
        throw ValidationError("conv1d: parameter shapes inconsistent with input " +
                              x->value.shape_string());
    }

    Tensor out = Tensor::matrix(c_out, time);
    const double* X = x->value.data();
    const double* W = w->value.data();
    for (std::size_t o = 0; o < c_out; ++o) {
        double* Orow = out.data() + o * time;
        for (std::size_t t = 0; t < time; ++t) Orow[t] = b->value[o];
        for (std::size_t c = 0; c < c_in; ++c) {
            const double* Xrow = X + c * time;
            for (std::size_t k = 0; k < width; ++k) {
                const double wv = W[(o * c_in + c) * width + k];
                if (wv == 0.0) continue;
                const std::size_t lag = static_cast<std::size_t>(dilation) * (width - 1 - k);
                for (std::size_t t = lag; t < time; ++t) Orow[t] += wv * Xrow[t - lag];
            }
        }
    }
    const bool tracked = x->needs_grad || w->needs_grad || b->needs_grad;
    return make(std::move(out), tracked, [x, w, b, c_in, c_out, time, width, dilation](Node& self) {
        const double* G = self.grad.data();
        if (b->needs_grad) {
            ensure_grad(b);
            for (std::size_t o = 0; o < c_out; ++o) {
                double acc = 0.0;
                const double* Grow = G + o * time;
                for (std::size_t t = 0; t < time; ++t) acc += Grow[t];
                b->grad[o] += acc;
            }
        }
        if (w->needs_grad) {
            ensure_grad(w);
            const double* X = x->value.data();
            for (std::size_t o = 0; o < c_out; ++o) {
                const double* Grow = G + o * time;
                for (std::size_t c = 0; c < c_in; ++c) {
                    const double* Xrow = X + c * time;
                    for (std::size_t k = 0; k < width; ++k) {
                        const std::size_t lag = static_cast<std::size_t>(dilation) * (width - 1 - k);
                        double acc = 0.0;
                        for (std::size_t t = lag; t < time; ++t) acc += Grow[t] * Xrow[t - lag];
                        w->grad[(o * c_in + c) * width + k] += acc;
                    }
                }
            }
        }
        if (x->needs_grad) {
            ensure_grad(x);
            const double* W = w->value.data();
            for (std::size_t o = 0; o < c_out; ++o) {
                const double* Grow = G + o * time;
                for (std::size_t c = 0; c < c_in; ++c) {
                    double* dXrow = x->grad.data() + c * time;
                    for (std::size_t k = 0; k < width; ++k) {
                        const double wv = W[(o * c_in + c) * width + k];
                        if (wv == 0.0) continue;
                        const std::size_t lag = static_cast<std::size_t>(dilation) * (width - 1 - k);
                        for (std::size_t t = lag; t < time; ++t) dXrow[t - lag] += wv * Grow[t];
                    }
                }
            }
        }
    });
}

Node* Graph::gather_time(Node* x, std::vector<int> positions) {
    if (x->value.rank() != 2) throw ValidationError("gather_time: expected CxT input");
    const std::size_t channels = x->value.rows(), time = x->value.cols();
    for (const int p : positions) {
        if (p < 0 || static_cast<std::size_t>(p) >= time) {
            throw ValidationError("gather_time: position out of range");
        }
    }
    Tensor out = Tensor::matrix(positions.size(), channels);
    for (std::size_t i = 0; i < positions.size(); ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
            out.at(i, c) = x->value.at(c, static_cast<std::size_t>(positions[i]));
        }
    }
    return make(std::move(out), x->needs_grad,
                [x, positions = std::move(positions), channels](Node& self) {
                    if (!x->needs_grad) return;
                    ensure_grad(x);
                    for (std::size_t i = 0; i < positions.size(); ++i) {
                        for (std::size_t c = 0; c < channels; ++c) {
                            x->grad.at(c, static_cast<std::size_t>(positions[i])) +=
                                self.grad.at(i, c);
                        }
                    }
                });
}

Node* Graph::mae(Node* pred, Tensor target) {
    check_same_shape(pred->value, target, "mae");
    const std::size_t n = target.size();
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) loss += std::abs(pred->value[i] - target[i]);
    loss /= static_cast<double>(n);
    return make(Tensor::scalar(loss), pred->needs_grad,
                [pred, target = std::move(target), n](Node& self) {
                    if (!pred->needs_grad) return;
                    ensure_grad(pred);
                    const double scale = self.grad[0] / static_cast<double>(n);
                    for (std::size_t i = 0; i < n; ++i) {
                        const double d = pred->value[i] - target[i];
                        if (d > 0.0) {
                            pred->grad[i] += scale;
                        } else if (d < 0.0) {
                            pred->grad[i] -= scale;
                        }
                    }
                });
}

Node* Graph::sum(Node* x) {
    double total = 0.0;
    for (std::size_t i = 0; i < x->value.size(); ++i) total += x->value[i];
    return make(Tensor::scalar(total), x->needs_grad, [x](Node& self) {
        if (!x->needs_grad) return;
        ensure_grad(x);
        for (std::size_t i = 0; i < x->grad.size(); ++i) x->grad[i] += self.grad[0];
    });
}

void Graph::backward(Node* root) {
    if (root->value.size() != 1) throw ValidationError("backward: root must be scalar");
    root->grad = Tensor::scalar(1.0);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        Node& n = *it;
        if (n.backprop && n.grad.size() != 0) n.backprop(n);
    }
    for (auto& [node, sink] : bindings_) {
        if (node->grad.size() == 0) continue;
        check_same_shape(*sink, node->grad, "parameter grad");
        for (std::size_t i = 0; i < sink->size(); ++i) (*sink)[i] += node->grad[i];
    }
}

} // namespace revcast::nn

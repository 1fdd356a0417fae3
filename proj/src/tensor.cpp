#include "tensor.hpp"

#include <cmath>

#include "../src/errors.hpp"

namespace revcast::nn {

namespace {
std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (const std::size_t d : shape) n *= d;
    return n;
}
} // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_product(shape_)) {
        throw ValidationError("tensor: data length does not match shape " + shape_string());
    }
}

Tensor Tensor::scalar(double v) {
    Tensor t(std::vector<std::size_t>{1});
    t.data_[0] = v;
    return t;
}

std::string Tensor::shape_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape_[i]);
    }
    return s + "]";
}

void Tensor::fill(double v) {
    for (double& x : data_) x = v;
}

bool Tensor::all_finite() const {
    for (const double x : data_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ValidationError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                              b.shape_string());
    }
}

} // namespace revcast::nn

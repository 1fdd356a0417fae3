#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace revcast::nn {

// Dense row-major tensor of 64-bit reals. Models run in double precision so
// finite-difference gradient checks and reproducibility hold.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }
    static Tensor matrix(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }
    static Tensor vector(std::size_t n) { return Tensor({n}); }
    static Tensor scalar(double v);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    std::string shape_string() const;

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // 2-D accessors.
    std::size_t rows() const { return shape_.at(0); }
    std::size_t cols() const { return shape_.at(1); }
    double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

    void fill(double v);
    bool all_finite() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

void check_same_shape(const Tensor& a, const Tensor& b, const char* op);

} // namespace revcast::nn

#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace newsrank::nn {

// Dense row-major float64 tensor. Rank 0 (scalar), 1 and 2 are what the
// network needs; shape is kept general for serialization.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor scalar(double v);
    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor full(std::vector<std::size_t> shape, double v);
    static Tensor row(std::initializer_list<double> values);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t axis) const;

    // rank-2 accessors
    std::size_t rows() const;
    std::size_t cols() const;
    double& at(std::size_t r, std::size_t c);
    double at(std::size_t r, std::size_t c) const;

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;
    void fill(double v);

    std::string shape_str() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// One trainable parameter: value and its gradient accumulator.
struct ParamGroup {
    std::string name;
    Tensor value;
    Tensor grad;

    ParamGroup() = default;
    ParamGroup(std::string n, Tensor v)
        : name(std::move(n)), value(std::move(v)), grad(Tensor::zeros(value.shape())) {}

    void zero_grad() { grad.fill(0.0); }
};

// Samples from normal(0, sqrt(2/fan_in)); deterministic given seed.
Tensor he_init(std::vector<std::size_t> shape, std::size_t fan_in, std::uint64_t seed);

// normal(0, scale)
Tensor gaussian_init(std::vector<std::size_t> shape, double scale, std::uint64_t seed);

std::size_t shape_numel(const std::vector<std::size_t>& shape);

}  // namespace newsrank::nn

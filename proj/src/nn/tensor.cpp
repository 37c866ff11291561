#include "nn/tensor.hpp"

#include <cmath>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace newsrank::nn {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_numel(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_numel(shape_)) {
        throw InputError("tensor data size " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str());
    }
}

Tensor Tensor::scalar(double v) { return Tensor({}, {v}); }

Tensor Tensor::zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
    Tensor t(std::move(shape));
    t.fill(v);
    return t;
}

Tensor Tensor::row(std::initializer_list<double> values) {
    return Tensor({values.size()}, std::vector<double>(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) throw InputError("tensor axis out of range");
    return shape_[axis];
}

std::size_t Tensor::rows() const {
    if (rank() != 2) throw InputError("rows() on tensor of rank " + std::to_string(rank()));
    return shape_[0];
}

std::size_t Tensor::cols() const {
    if (rank() != 2) throw InputError("cols() on tensor of rank " + std::to_string(rank()));
    return shape_[1];
}

double& Tensor::at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }

double Tensor::at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Tensor::fill(double v) {
    for (auto& x : data_) x = v;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << ", ";
        os << shape_[i];
    }
    os << ")";
    return os.str();
}

Tensor he_init(std::vector<std::size_t> shape, std::size_t fan_in, std::uint64_t seed) {
    if (fan_in == 0) throw InputError("he_init: fan_in must be positive");
    return gaussian_init(std::move(shape), std::sqrt(2.0 / static_cast<double>(fan_in)), seed);
}

Tensor gaussian_init(std::vector<std::size_t> shape, double scale, std::uint64_t seed) {
    Tensor t(std::move(shape));
    Rng rng(seed);
    for (auto& v : t.values()) v = scale * rng.gaussian();
    return t;
}

}  // namespace newsrank::nn

// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pl {

static std::size_t numel_of(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    if (shape_.size() > 4) throw std::invalid_argument("Tensor: rank > 4 unsupported");
    data_.assign(numel_of(shape_), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data) : shape_(std::move(shape)) {
    if (shape_.size() > 4) throw std::invalid_argument("Tensor: rank > 4 unsupported");
    if (data.size() != numel_of(shape_))
        throw std::invalid_argument("Tensor: data size does not match shape");
    data_ = std::move(data);
}

Tensor Tensor::scalar(double v) {
    Tensor t{std::vector<int>{}};
    t.data_.assign(1, v);
    return t;
}

Tensor Tensor::zeros_like(const Tensor& t) { return Tensor(t.shape_); }

double& Tensor::at(int i) {
    return data_[static_cast<std::size_t>(i)];
}

double& Tensor::at(int i, int j) {
    return data_[static_cast<std::size_t>(i) * shape_[1] + j];
}

double& Tensor::at(int i, int j, int k) {
    return data_[(static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k];
}

double& Tensor::at(int i, int j, int k, int l) {
    return data_[((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
}

double Tensor::item() const {
    if (data_.size() != 1) throw std::invalid_argument("Tensor::item: not a single element");
    return data_[0];
}

void Tensor::fill(double v) {
    for (auto& x : data_) x = v;
}

bool Tensor::all_finite() const {
    for (double x : data_)
        if (!std::isfinite(x)) return false;
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << ",";
        os << shape_[i];
    }
    os << ")";
    return os.str();
}

} // namespace pl

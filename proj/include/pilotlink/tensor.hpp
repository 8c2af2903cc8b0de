// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pl {

// Dense row-major tensor of doubles, rank 0..4.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);
    Tensor(std::vector<int> shape, std::vector<double> data);

    static Tensor scalar(double v);
    static Tensor zeros_like(const Tensor& t);

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int d) const { return shape_[static_cast<std::size_t>(d)]; }
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(int i);
    double& at(int i, int j);
    double& at(int i, int j, int k);
    double& at(int i, int j, int k, int l);
    double at(int i) const { return const_cast<Tensor*>(this)->at(i); }
    double at(int i, int j) const { return const_cast<Tensor*>(this)->at(i, j); }
    double at(int i, int j, int k) const { return const_cast<Tensor*>(this)->at(i, j, k); }
    double at(int i, int j, int k, int l) const { return const_cast<Tensor*>(this)->at(i, j, k, l); }

    // Value of a single-element tensor.
    double item() const;

    void fill(double v);
    void zero() { fill(0.0); }
    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    bool all_finite() const;

    std::string shape_str() const;

private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

} // namespace pl

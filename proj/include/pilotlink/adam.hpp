// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pilotlink/autodiff.hpp"
#include "pilotlink/tensor.hpp"

namespace pl {

// Named parameter tensors. Declaration order is the serialization order,
// so models must add parameters deterministically.
class ParamStore {
public:
    int add(std::string name, Tensor value);
    int count() const { return static_cast<int>(values_.size()); }
    const std::string& name(int i) const { return names_[static_cast<std::size_t>(i)]; }
    Tensor& value(int i) { return values_[static_cast<std::size_t>(i)]; }
    const Tensor& value(int i) const { return values_[static_cast<std::size_t>(i)]; }
    std::size_t total_size() const;

    // Fresh leaves holding copies of the current values, one per parameter.
    std::vector<ad::Var> make_leaves() const;

private:
    std::vector<std::string> names_;
    std::vector<Tensor> values_;
};

struct AdamConfig {
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction. Moment buffers are sized on first step and
// the parameter list must keep the same layout afterwards.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    const AdamConfig& config() const { return cfg_; }
    long long steps_taken() const { return t_; }

    // params[i] is updated in place using grads[i]. Throws on non-finite
    // gradients and on layout changes between calls.
    void step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads);

private:
    AdamConfig cfg_;
    long long t_ = 0;
    std::vector<Tensor> m_, v_;
};

} // namespace pl

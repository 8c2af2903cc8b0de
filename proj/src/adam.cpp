// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace pl {

int ParamStore::add(std::string name, Tensor value) {
    for (const auto& n : names_)
        if (n == name) throw std::invalid_argument("ParamStore: duplicate name " + name);
    names_.push_back(std::move(name));
    values_.push_back(std::move(value));
    return static_cast<int>(values_.size()) - 1;
}

std::size_t ParamStore::total_size() const {
    std::size_t n = 0;
    for (const auto& t : values_) n += t.size();
    return n;
}

std::vector<ad::Var> ParamStore::make_leaves() const {
    std::vector<ad::Var> out;
    out.reserve(values_.size());
    for (const auto& t : values_) out.push_back(ad::leaf(t));
    return out;
}

void Adam::step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads) {
    if (params.size() != grads.size())
        throw std::invalid_argument("Adam::step: params/grads count mismatch");
    if (m_.empty()) {
        m_.reserve(params.size());
        v_.reserve(params.size());
        for (const Tensor* p : params) {
            m_.push_back(Tensor::zeros_like(*p));
            v_.push_back(Tensor::zeros_like(*p));
        }
    }
    if (m_.size() != params.size())
        throw std::invalid_argument("Adam::step: parameter layout changed");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i]->same_shape(*grads[i]) || !params[i]->same_shape(m_[i]))
            throw std::invalid_argument("Adam::step: shape mismatch at parameter " +
                                        std::to_string(i));
        if (!grads[i]->all_finite())
            throw std::runtime_error("Adam::step: non-finite gradient at parameter " +
                                     std::to_string(i));
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = *grads[i];
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
            v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
            const double mh = m[j] / bc1;
            const double vh = v[j] / bc2;
            p[j] -= cfg_.lr * mh / (std::sqrt(vh) + cfg_.eps);
        }
    }
}

} // namespace pl

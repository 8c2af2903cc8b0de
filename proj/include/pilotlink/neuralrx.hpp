// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pilotlink/adam.hpp"
#include "pilotlink/autodiff.hpp"
#include "pilotlink/link.hpp"
#include "pilotlink/tensor.hpp"

namespace pl {

// Convolutional receiver turning one received slot straight into
// per-stream bit LLRs. No pilot or channel-estimate input exists.
struct RxConfig {
    int nf = 72;
    int ns = 14;
    int nr = 4;
    int nt = 2;
    int qm = 4;
    int blocks = 8;       // residual blocks, frequency dilation cycles 1,2,4
    int filters = 48;     // F
    int in_features = 32; // F0 real channels out of the complex 1x1 mixing

    void validate() const;
};

class RxModel {
public:
    RxModel(RxConfig cfg, std::uint64_t seed);

    const RxConfig& config() const { return cfg_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    // Differentiable forward pass. planes is the (nf, ns, 2*nr) node of
    // received real planes (see grid_to_planes / apply_channel_ad);
    // leaves must come from params().make_leaves(). Output logits are
    // (nf, ns, nt*qm), channel t*qm+q carrying the bit-1 logit of bit q
    // of stream t.
    ad::Var forward(const ad::Var& planes, const std::vector<ad::Var>& leaves) const;

    // Plain evaluation from a received grid, no graph kept.
    Tensor forward_eval(const ResourceGrid& y) const;

    void save(const std::string& path) const;
    static RxModel load(const std::string& path);

private:
    RxConfig cfg_;
    ParamStore params_;
    int mix_re_ = -1, mix_im_ = -1;
    int in_w_ = -1, in_b_ = -1;
    int out_w_ = -1, out_b_ = -1;
    std::vector<int> blk_; // 4 ids per block: w1 b1 w2 b2

    void init_params(std::uint64_t seed);
};

// Per-resource-element complex 1x1 mixing: planes (nf, ns, 2*nr) real
// channels against a (f0/2, nr) complex matrix given as separate real
// and imaginary tensors. Output (nf, ns, f0) with the feature real parts
// in channels 0..f0/2-1 and imaginary parts behind them.
ad::Var complex_mix(const ad::Var& planes, const ad::Var& w_re, const ad::Var& w_im);

} // namespace pl

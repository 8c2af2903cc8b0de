// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/neuralrx.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "pilotlink/io.hpp"
#include "pilotlink/rng.hpp"

namespace pl {

void RxConfig::validate() const {
    if (nf < 1 || ns < 1 || nr < 1 || nt < 1 || qm < 1)
        throw std::invalid_argument("rx config: geometry fields must be positive");
    if (blocks < 0 || filters < 1)
        throw std::invalid_argument("rx config: bad block or filter count");
    if (in_features < 2 || in_features % 2 != 0)
        throw std::invalid_argument("rx config: input feature count must be even and >= 2");
}

ad::Var complex_mix(const ad::Var& planes, const ad::Var& w_re, const ad::Var& w_im) {
    const Tensor& x = planes.value();
    const Tensor& wr = w_re.value();
    const Tensor& wi = w_im.value();
    if (x.rank() != 3 || wr.rank() != 2 || wi.rank() != 2 || !wr.same_shape(wi))
        throw std::invalid_argument("complex_mix: bad ranks");
    const int nf = x.dim(0), ns = x.dim(1), c2 = x.dim(2);
    const int fo2 = wr.dim(0), nr = wr.dim(1);
    if (c2 != 2 * nr)
        throw std::invalid_argument("complex_mix: plane channels do not match matrix columns");

    Tensor out({nf, ns, 2 * fo2});
    for (int f = 0; f < nf; ++f)
        for (int s = 0; s < ns; ++s)
            for (int j = 0; j < fo2; ++j) {
                double re = 0.0, im = 0.0;
                for (int r = 0; r < nr; ++r) {
                    const double xr = x.at(f, s, r);
                    const double xi = x.at(f, s, nr + r);
                    const double ar = wr.at(j, r);
                    const double ai = wi.at(j, r);
                    re += ar * xr - ai * xi;
                    im += ar * xi + ai * xr;
                }
                out.at(f, s, j) = re;
                out.at(f, s, fo2 + j) = im;
            }

    return ad::make_op(std::move(out), {planes, w_re, w_im}, [nf, ns, nr, fo2](ad::Node& n) {
        const Tensor& g = n.grad;
        const Tensor& x = n.parents[0]->value;
        const Tensor& wr = n.parents[1]->value;
        const Tensor& wi = n.parents[2]->value;
        Tensor& gx = n.parents[0]->grad;
        Tensor& gwr = n.parents[1]->grad;
        Tensor& gwi = n.parents[2]->grad;
        for (int f = 0; f < nf; ++f)
            for (int s = 0; s < ns; ++s)
                for (int j = 0; j < fo2; ++j) {
                    const double gr = g.at(f, s, j);
                    const double gi = g.at(f, s, fo2 + j);
                    for (int r = 0; r < nr; ++r) {
                        const double xr = x.at(f, s, r);
                        const double xi = x.at(f, s, nr + r);
                        const double ar = wr.at(j, r);
                        const double ai = wi.at(j, r);
                        gwr.at(j, r) += gr * xr + gi * xi;
                        gwi.at(j, r) += -gr * xi + gi * xr;
                        gx.at(f, s, r) += gr * ar + gi * ai;
                        gx.at(f, s, nr + r) += -gr * ai + gi * ar;
                    }
                }
    });
}

RxModel::RxModel(RxConfig cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    const int f0 = cfg_.in_features;
    const int f = cfg_.filters;
    mix_re_ = params_.add("mix_re", Tensor({f0 / 2, cfg_.nr}));
    mix_im_ = params_.add("mix_im", Tensor({f0 / 2, cfg_.nr}));
    in_w_ = params_.add("in_w", Tensor({3, 3, f0, f}));
    in_b_ = params_.add("in_b", Tensor({f}));
    for (int d = 0; d < cfg_.blocks; ++d) {
        const std::string p = "blk" + std::to_string(d) + "_";
        blk_.push_back(params_.add(p + "w1", Tensor({3, 3, f, f})));
        blk_.push_back(params_.add(p + "b1", Tensor({f})));
        blk_.push_back(params_.add(p + "w2", Tensor({3, 3, f, f})));
        blk_.push_back(params_.add(p + "b2", Tensor({f})));
    }
    out_w_ = params_.add("out_w", Tensor({1, 1, f, cfg_.nt * cfg_.qm}));
    out_b_ = params_.add("out_b", Tensor({cfg_.nt * cfg_.qm}));
    init_params(seed);
}

void RxModel::init_params(std::uint64_t seed) {
    for (int i = 0; i < params_.count(); ++i) {
        Tensor& t = params_.value(i);
        const std::string& name = params_.name(i);
        rng::Stream st(rng::derive(seed, {rng::label("rx-init"), static_cast<std::uint64_t>(i)}));
        if (name.find("_b") != std::string::npos) { // in_b, out_b, blk*_b1, blk*_b2
            t.zero();
            continue;
        }
        double a;
        if (name == "mix_re" || name == "mix_im") {
            a = 1.0 / std::sqrt(static_cast<double>(cfg_.nr));
        } else {
            // He-style fan-in bound for the convolution kernels
            const int fan = t.dim(0) * t.dim(1) * t.dim(2);
            a = std::sqrt(6.0 / fan);
        }
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = st.uniform(-a, a);
    }
}

ad::Var RxModel::forward(const ad::Var& planes, const std::vector<ad::Var>& leaves) const {
    const Tensor& x = planes.value();
    if (x.rank() != 3 || x.dim(0) != cfg_.nf || x.dim(1) != cfg_.ns || x.dim(2) != 2 * cfg_.nr)
        throw std::invalid_argument("rx forward: input planes do not match the configured geometry");
    if (static_cast<int>(leaves.size()) != params_.count())
        throw std::invalid_argument("rx forward: leaf count mismatch");

    // Pre-scale by 1/sqrt(mean |Y|^2) over the slot; the epsilon keeps the
    // all-zero slot defined (and maps it to zero).
    ad::Var power = ad::add_const(ad::scale(ad::mean_all(ad::mul(planes, planes)), 2.0), 1e-12);
    ad::Var scaled = ad::div_by_scalar(planes, ad::sqrt_(power));

    ad::Var h = complex_mix(scaled, leaves[static_cast<std::size_t>(mix_re_)],
                            leaves[static_cast<std::size_t>(mix_im_)]);
    h = ad::conv2d(h, leaves[static_cast<std::size_t>(in_w_)],
                   leaves[static_cast<std::size_t>(in_b_)], 1, 1);
    static constexpr int kDilCycle[3] = {1, 2, 4};
    for (int d = 0; d < cfg_.blocks; ++d) {
        const int dil = kDilCycle[d % 3];
        const ad::Var& w1 = leaves[static_cast<std::size_t>(blk_[static_cast<std::size_t>(4 * d)])];
        const ad::Var& b1 = leaves[static_cast<std::size_t>(blk_[static_cast<std::size_t>(4 * d + 1)])];
        const ad::Var& w2 = leaves[static_cast<std::size_t>(blk_[static_cast<std::size_t>(4 * d + 2)])];
        const ad::Var& b2 = leaves[static_cast<std::size_t>(blk_[static_cast<std::size_t>(4 * d + 3)])];
        ad::Var y = ad::conv2d(ad::relu_(h), w1, b1, dil, 1);
        y = ad::conv2d(ad::relu_(y), w2, b2, dil, 1);
        h = ad::add(h, y);
    }
    return ad::conv2d(h, leaves[static_cast<std::size_t>(out_w_)],
                      leaves[static_cast<std::size_t>(out_b_)], 1, 1);
}

Tensor RxModel::forward_eval(const ResourceGrid& y) const {
    if (y.nf != cfg_.nf || y.ns != cfg_.ns || y.nc != cfg_.nr)
        throw std::invalid_argument("rx forward: received grid does not match the configured geometry");
    auto leaves = params_.make_leaves();
    ad::Var out = forward(ad::leaf(grid_to_planes(y)), leaves);
    return out.value();
}

namespace {
constexpr std::int32_t kRxMagic = 0x52584c50; // "PLXR" little endian
constexpr std::int32_t kRxVersion = 1;
} // namespace

void RxModel::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
    io::write_i32(f, kRxMagic);
    io::write_i32(f, kRxVersion);
    for (int v : {cfg_.nf, cfg_.ns, cfg_.nr, cfg_.nt, cfg_.qm, cfg_.blocks, cfg_.filters,
                  cfg_.in_features})
        io::write_i32(f, v);
    for (int i = 0; i < params_.count(); ++i) io::write_tensor_f32(f, params_.value(i));
    if (!f) throw std::runtime_error("checkpoint: write failed for " + path);
}

RxModel RxModel::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
    if (io::read_i32(f) != kRxMagic) throw std::runtime_error("checkpoint: bad magic");
    if (io::read_i32(f) != kRxVersion) throw std::runtime_error("checkpoint: unsupported version");
    RxConfig cfg;
    cfg.nf = io::read_i32(f);
    cfg.ns = io::read_i32(f);
    cfg.nr = io::read_i32(f);
    cfg.nt = io::read_i32(f);
    cfg.qm = io::read_i32(f);
    cfg.blocks = io::read_i32(f);
    cfg.filters = io::read_i32(f);
    cfg.in_features = io::read_i32(f);
    RxModel m(cfg, 0);
    for (int i = 0; i < m.params_.count(); ++i)
        io::read_tensor_f32(f, m.params_.value(i));
    f.peek();
    if (!f.eof()) throw std::runtime_error("checkpoint: trailing bytes in " + path);
    return m;
}

} // namespace pl

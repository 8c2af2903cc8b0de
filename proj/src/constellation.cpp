// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/constellation.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "pilotlink/io.hpp"
#include "pilotlink/rng.hpp"

namespace pl {

std::string Constellation::label_string(int k) const {
    std::string s(static_cast<std::size_t>(qm), '0');
    for (int q = 0; q < qm; ++q)
        if ((k >> (qm - 1 - q)) & 1) s[static_cast<std::size_t>(q)] = '1';
    return s;
}

Constellation qam_reference(int qm) {
    if (qm != 4 && qm != 6)
        throw std::invalid_argument("qam_reference: unsupported bits per symbol " +
                                    std::to_string(qm));
    Constellation c;
    c.qm = qm;
    const int n = 1 << qm;
    c.points.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        // Label bits MSB first: b0 b1 ... b_{qm-1}.
        auto bit = [&](int q) { return (k >> (qm - 1 - q)) & 1; };
        double i, q, scale;
        if (qm == 4) {
            i = (1 - 2 * bit(0)) * (2.0 - (1 - 2 * bit(2)));
            q = (1 - 2 * bit(1)) * (2.0 - (1 - 2 * bit(3)));
            scale = 1.0 / std::sqrt(10.0);
        } else {
            i = (1 - 2 * bit(0)) * (4.0 - (1 - 2 * bit(2)) * (2.0 - (1 - 2 * bit(4))));
            q = (1 - 2 * bit(1)) * (4.0 - (1 - 2 * bit(3)) * (2.0 - (1 - 2 * bit(5))));
            scale = 1.0 / std::sqrt(42.0);
        }
        c.points[static_cast<std::size_t>(k)] = {i * scale, q * scale};
    }
    return c;
}

int symbol_index(const std::vector<int>& bits) {
    int k = 0;
    for (int b : bits) {
        if (b != 0 && b != 1) throw std::invalid_argument("symbol_index: bits must be 0 or 1");
        k = (k << 1) | b;
    }
    return k;
}

DistancePair min_max_distance(const std::vector<std::complex<double>>& pts) {
    if (pts.size() < 2) throw std::invalid_argument("min_max_distance: need at least two points");
    DistancePair d;
    d.dmin = std::abs(pts[1] - pts[0]);
    d.dmax = d.dmin;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double dist = std::abs(pts[j] - pts[i]);
            if (dist < d.dmin) d.dmin = dist;
            if (dist > d.dmax) d.dmax = dist;
        }
    return d;
}

std::vector<std::complex<double>> normalize_points(const std::vector<std::complex<double>>& pts) {
    if (pts.empty()) throw std::invalid_argument("normalize_points: empty set");
    std::complex<double> mu{0.0, 0.0};
    for (const auto& p : pts) mu += p;
    mu /= static_cast<double>(pts.size());
    double en = 0.0;
    for (const auto& p : pts) en += std::norm(p - mu);
    en /= static_cast<double>(pts.size());
    const double s = std::sqrt(en);
    if (s < 1e-12) throw std::runtime_error("normalize_points: degenerate constellation");
    std::vector<std::complex<double>> out(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) out[i] = (pts[i] - mu) / s;
    return out;
}

TxModel::TxModel(TxModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
    if (cfg_.qm != 4 && cfg_.qm != 6) throw std::invalid_argument("TxModel: unsupported qm");
    if (cfg_.n_streams < 1 || cfg_.n_transforms < 1)
        throw std::invalid_argument("TxModel: bad configuration");
    const Constellation ref = qam_reference(cfg_.qm);
    const int n = ref.order();
    ref_inputs_ = Tensor({n, 2});
    for (int k = 0; k < n; ++k) {
        const auto& p = ref.points[static_cast<std::size_t>(k)];
        ref_inputs_.at(k, 0) = std::abs(p);
        ref_inputs_.at(k, 1) = std::atan2(p.imag(), p.real());
    }
    init_params(seed);
}

void TxModel::init_params(std::uint64_t seed) {
    auto add_mlp = [&](const std::string& prefix, const std::vector<int>& hidden, int n_in,
                       int n_out) {
        Mlp mlp;
        int in = n_in;
        std::vector<int> widths = hidden;
        widths.push_back(n_out);
        for (std::size_t li = 0; li < widths.size(); ++li) {
            const int out = widths[li];
            Tensor w({in, out});
            Tensor b({out});
            rng::Stream st(rng::derive(
                seed, {rng::label("tx-init"), static_cast<std::uint64_t>(params_.count())}));
            if (li + 1 < widths.size()) {
                for (std::size_t i = 0; i < w.size(); ++i) w[i] = st.uniform(-0.1, 0.1);
            } else if (prefix[0] == 'q') {
                // Small final-layer noise keeps the start near the reference
                // grid (identity tolerance 0.05) while lifting its rotational
                // symmetry; an exactly symmetric start is a saddle the
                // pilotless loss escapes only very slowly.
                for (std::size_t i = 0; i < w.size(); ++i) w[i] = st.uniform(-0.02, 0.02);
                for (std::size_t i = 0; i < b.size(); ++i) b[i] = st.uniform(-0.02, 0.02);
            } else {
                // Tilted blend weights start the streams slightly apart so
                // the receiver can tell them apart from the first step.
                for (std::size_t i = 0; i < w.size(); ++i) w[i] = st.uniform(-0.05, 0.05);
                for (std::size_t i = 0; i < b.size(); ++i) b[i] = st.uniform(-1.0, 1.0);
            }
            mlp.w.push_back(params_.add(prefix + "_w" + std::to_string(li), std::move(w)));
            mlp.b.push_back(params_.add(prefix + "_b" + std::to_string(li), std::move(b)));
            in = out;
        }
        return mlp;
    };
    for (int c = 0; c < cfg_.n_transforms; ++c)
        qnets_.push_back(add_mlp("q" + std::to_string(c), cfg_.q_hidden, 2, 2));
    for (int l = 0; l < cfg_.n_streams; ++l)
        wnets_.push_back(add_mlp("w" + std::to_string(l), cfg_.w_hidden, 2, cfg_.n_transforms));
}

ad::Var TxModel::stream_points(const std::vector<ad::Var>& leaves, int stream) const {
    if (stream < 0 || stream >= cfg_.n_streams)
        throw std::invalid_argument("stream_points: stream out of range");
    if (static_cast<int>(leaves.size()) != params_.count())
        throw std::invalid_argument("stream_points: leaf count mismatch");
    const ad::Var x = ad::leaf(ref_inputs_);

    auto run_mlp = [&](const Mlp& mlp, const ad::Var& in, bool use_tanh) {
        ad::Var h = in;
        for (std::size_t li = 0; li < mlp.w.size(); ++li) {
            h = ad::add_rowvec(ad::matmul(h, leaves[static_cast<std::size_t>(mlp.w[li])]),
                               leaves[static_cast<std::size_t>(mlp.b[li])]);
            if (li + 1 < mlp.w.size()) h = use_tanh ? ad::tanh_(h) : ad::relu_(h);
        }
        return h;
    };

    const ad::Var logits = run_mlp(wnets_[static_cast<std::size_t>(stream)], x, false);
    const ad::Var weights = ad::softmax_rows(logits);

    ad::Var combo;
    for (int c = 0; c < cfg_.n_transforms; ++c) {
        const ad::Var qc = ad::add(x, run_mlp(qnets_[static_cast<std::size_t>(c)], x, true));
        const ad::Var term = ad::mul_colvec(qc, ad::col(weights, c));
        combo = c == 0 ? term : ad::add(combo, term);
    }

    const ad::Var amp = ad::col(combo, 0);
    const ad::Var ang = ad::col(combo, 1);
    const ad::Var pts = ad::stack_cols({ad::mul(amp, ad::cos_(ang)), ad::mul(amp, ad::sin_(ang))});

    const int n = ref_inputs_.dim(0);
    const ad::Var mu = ad::mean_rows(pts);
    const ad::Var cen = ad::sub_rowvec(pts, mu);
    const ad::Var energy = ad::scale(ad::sum_all(ad::mul(cen, cen)), 1.0 / n);
    const ad::Var s = ad::sqrt_(energy);
    if (s.value()[0] < 1e-12)
        throw std::runtime_error("stream_points: degenerate constellation");
    return ad::div_by_scalar(cen, s);
}

std::vector<std::complex<double>> TxModel::learned_points(int stream) const {
    const auto leaves = params_.make_leaves();
    const ad::Var pts = stream_points(leaves, stream);
    const int n = pts.value().dim(0);
    std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        out[static_cast<std::size_t>(k)] = {pts.value().at(k, 0), pts.value().at(k, 1)};
    return out;
}

static constexpr std::int32_t kTxMagic = 0x584c5450; // "PTLX" little-endian
static constexpr std::int32_t kTxVersion = 1;

void TxModel::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("TxModel::save: cannot open " + path);
    io::write_i32(os, kTxMagic);
    io::write_i32(os, kTxVersion);
    io::write_i32(os, cfg_.qm);
    io::write_i32(os, cfg_.n_streams);
    io::write_i32(os, cfg_.n_transforms);
    io::write_i32(os, static_cast<std::int32_t>(cfg_.q_hidden.size()));
    for (int h : cfg_.q_hidden) io::write_i32(os, h);
    io::write_i32(os, static_cast<std::int32_t>(cfg_.w_hidden.size()));
    for (int h : cfg_.w_hidden) io::write_i32(os, h);
    for (int i = 0; i < params_.count(); ++i) io::write_tensor_f32(os, params_.value(i));
    if (!os) throw std::runtime_error("TxModel::save: write failed for " + path);
}

TxModel TxModel::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("TxModel::load: cannot open " + path);
    if (io::read_i32(is) != kTxMagic)
        throw std::runtime_error("TxModel::load: bad magic in " + path);
    if (io::read_i32(is) != kTxVersion)
        throw std::runtime_error("TxModel::load: unsupported version in " + path);
    TxModelConfig cfg;
    cfg.qm = io::read_i32(is);
    cfg.n_streams = io::read_i32(is);
    cfg.n_transforms = io::read_i32(is);
    cfg.q_hidden.resize(static_cast<std::size_t>(io::read_i32(is)));
    for (auto& h : cfg.q_hidden) h = io::read_i32(is);
    cfg.w_hidden.resize(static_cast<std::size_t>(io::read_i32(is)));
    for (auto& h : cfg.w_hidden) h = io::read_i32(is);
    TxModel model(cfg, 0);
    for (int i = 0; i < model.params_.count(); ++i)
        io::read_tensor_f32(is, model.params_.value(i));
    is.peek();
    if (!is.eof()) throw std::runtime_error("TxModel::load: trailing bytes in " + path);
    return model;
}

void export_constellation_csv(const TxModel& model, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const Constellation ref = qam_reference(model.config().qm);
    for (int l = 0; l < model.config().n_streams; ++l) {
        const auto pts = model.learned_points(l);
        const std::string path =
            out_dir + "/layer" + std::to_string(l) + "_const.csv";
        std::FILE* f = std::fopen(path.c_str(), "w");
        if (!f) throw std::runtime_error("export_constellation_csv: cannot open " + path);
        std::fprintf(f, "x,y,label\n");
        for (std::size_t k = 0; k < pts.size(); ++k)
            std::fprintf(f, "%.9g,%.9g,%s\n", pts[k].real(), pts[k].imag(),
                         ref.label_string(static_cast<int>(k)).c_str());
        std::fclose(f);
    }
}

} // namespace pl

// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "pilotlink/gradcheck.hpp"
#include "pilotlink/neuralrx.hpp"
#include "pilotlink/rng.hpp"

using namespace pl;

namespace {

ResourceGrid random_grid(int nf, int ns, int nc, std::uint64_t seed, double scale = 1.0) {
    ResourceGrid g(nf, ns, nc);
    rng::Stream st(rng::derive(seed, {rng::label("rxtest")}));
    for (auto& v : g.v) v = st.next_cnormal(scale * scale);
    return g;
}

} // namespace

TEST_CASE("complex mix: identity rows pass the antennas through") {
    const int nf = 5, ns = 3, nr = 4;
    ResourceGrid y = random_grid(nf, ns, nr, 1);
    Tensor planes = grid_to_planes(y);
    Tensor wre({nr, nr}), wim({nr, nr});
    for (int j = 0; j < nr; ++j) wre.at(j, j) = 1.0;
    auto out = complex_mix(ad::leaf(planes), ad::leaf(wre), ad::leaf(wim));
    REQUIRE(out.value().same_shape(planes));
    for (std::size_t i = 0; i < planes.size(); ++i)
        CHECK(out.value()[i] == doctest::Approx(planes[i]).epsilon(1e-15));

    wre.zero();
    auto zero = complex_mix(ad::leaf(planes), ad::leaf(wre), ad::leaf(wim));
    for (std::size_t i = 0; i < zero.value().size(); ++i) CHECK(zero.value()[i] == 0.0);
}

TEST_CASE("complex mix matches a direct complex matvec oracle") {
    const int nf = 4, ns = 3, nr = 3, fo2 = 5;
    ResourceGrid y = random_grid(nf, ns, nr, 2);
    Tensor planes = grid_to_planes(y);
    rng::Stream st(rng::derive(3, {rng::label("mix")}));
    Tensor wre({fo2, nr}), wim({fo2, nr});
    for (std::size_t i = 0; i < wre.size(); ++i) wre[i] = st.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < wim.size(); ++i) wim[i] = st.uniform(-1.0, 1.0);
    auto out = complex_mix(ad::leaf(planes), ad::leaf(wre), ad::leaf(wim));
    for (int f = 0; f < nf; ++f)
        for (int s = 0; s < ns; ++s)
            for (int j = 0; j < fo2; ++j) {
                std::complex<double> acc(0.0, 0.0);
                for (int r = 0; r < nr; ++r) {
                    const std::complex<double> w(wre.at(j, r), wim.at(j, r));
                    acc += w * y.at(f, s, r);
                }
                CHECK(out.value().at(f, s, j) == doctest::Approx(acc.real()).epsilon(1e-12));
                CHECK(out.value().at(f, s, fo2 + j) == doctest::Approx(acc.imag()).epsilon(1e-12));
            }
}

TEST_CASE("complex mix gradients verify against central differences") {
    const int nf = 3, ns = 2, nr = 2, fo2 = 3;
    ResourceGrid y = random_grid(nf, ns, nr, 4);
    Tensor planes = grid_to_planes(y);
    rng::Stream st(rng::derive(5, {rng::label("mixgc")}));
    Tensor wre({fo2, nr}), wim({fo2, nr}), probe({nf, ns, 2 * fo2});
    for (std::size_t i = 0; i < wre.size(); ++i) wre[i] = st.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < wim.size(); ++i) wim[i] = st.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < probe.size(); ++i) probe[i] = st.uniform(-1.0, 1.0);
    auto build = [&](const std::vector<ad::Var>& leaves) {
        return ad::sum_all(ad::mul(complex_mix(leaves[0], leaves[1], leaves[2]), ad::leaf(probe)));
    };
    CHECK(finite_diff_check(build, {planes, wre, wim}) < 1e-6);
}

TEST_CASE("rx forward shape contract and geometry errors") {
    RxConfig cfg; // default desk-scale model
    RxModel m(cfg, 42);
    ResourceGrid y = random_grid(cfg.nf, cfg.ns, cfg.nr, 6);
    Tensor out = m.forward_eval(y);
    REQUIRE(out.rank() == 3);
    CHECK(out.dim(0) == 72);
    CHECK(out.dim(1) == 14);
    CHECK(out.dim(2) == 2 * 4);
    CHECK(out.all_finite());

    ResourceGrid bad(cfg.nf, cfg.ns, cfg.nr + 1);
    CHECK_THROWS_AS(m.forward_eval(bad), std::invalid_argument);
    ResourceGrid bad2(cfg.nf - 1, cfg.ns, cfg.nr);
    CHECK_THROWS_AS(m.forward_eval(bad2), std::invalid_argument);
}

TEST_CASE("rx config validation") {
    RxConfig odd;
    odd.in_features = 7;
    CHECK_THROWS_AS(RxModel(odd, 1), std::invalid_argument);
    RxConfig bad;
    bad.filters = 0;
    CHECK_THROWS_AS(RxModel(bad, 1), std::invalid_argument);
}

TEST_CASE("all-zero slot maps to all-zero llrs at a fresh init") {
    RxConfig cfg;
    cfg.nf = 12;
    cfg.ns = 6;
    cfg.blocks = 4;
    cfg.filters = 12;
    cfg.in_features = 8;
    RxModel m(cfg, 7);
    ResourceGrid y(cfg.nf, cfg.ns, cfg.nr);
    Tensor out = m.forward_eval(y);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == 0.0);
}

TEST_CASE("rx forward is deterministic") {
    RxConfig cfg;
    cfg.nf = 10;
    cfg.ns = 5;
    cfg.blocks = 3;
    cfg.filters = 10;
    cfg.in_features = 6;
    RxModel m(cfg, 11);
    ResourceGrid y = random_grid(cfg.nf, cfg.ns, cfg.nr, 12);
    Tensor a = m.forward_eval(y);
    Tensor b = m.forward_eval(y);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("llrs stay finite for very large inputs") {
    RxConfig cfg;
    cfg.nf = 10;
    cfg.ns = 5;
    cfg.blocks = 3;
    cfg.filters = 10;
    cfg.in_features = 6;
    RxModel m(cfg, 13);
    for (double s : {1e-6, 1.0, 1e3}) {
        ResourceGrid y = random_grid(cfg.nf, cfg.ns, cfg.nr, 14, s);
        Tensor out = m.forward_eval(y);
        CHECK(out.all_finite());
        // pre-scaling makes the output invariant to a global input scale
        if (s == 1e3) {
            ResourceGrid y1 = random_grid(cfg.nf, cfg.ns, cfg.nr, 14, 1.0);
            Tensor out1 = m.forward_eval(y1);
            for (std::size_t i = 0; i < out.size(); ++i)
                CHECK(out[i] == doctest::Approx(out1[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("rx gradients verify on a sampled subset of parameters") {
    RxConfig cfg;
    cfg.nf = 6;
    cfg.ns = 4;
    cfg.nr = 2;
    cfg.nt = 2;
    cfg.qm = 2;
    cfg.blocks = 2;
    cfg.filters = 6;
    cfg.in_features = 4;
    RxModel m(cfg, 21);
    ResourceGrid y = random_grid(cfg.nf, cfg.ns, cfg.nr, 22);
    Tensor planes = grid_to_planes(y);
    // probe projection keeps the functional sensitive to every output
    rng::Stream st(rng::derive(23, {rng::label("rxgc")}));
    Tensor probe({cfg.nf, cfg.ns, cfg.nt * cfg.qm});
    for (std::size_t i = 0; i < probe.size(); ++i) probe[i] = st.uniform(-1.0, 1.0);

    std::vector<Tensor> leaves_init;
    leaves_init.push_back(planes); // input gradient checked too
    for (int i = 0; i < m.params().count(); ++i) leaves_init.push_back(m.params().value(i));

    auto build = [&](const std::vector<ad::Var>& leaves) {
        std::vector<ad::Var> plist(leaves.begin() + 1, leaves.end());
        return ad::sum_all(ad::mul(m.forward(leaves[0], plist), ad::leaf(probe)));
    };
    FdOptions opt;
    opt.eps = 1e-5;
    opt.max_coords_per_param = 4;
    opt.sample_seed = 99;
    const double err = finite_diff_check(build, leaves_init, opt);
    CHECK(err < 1e-4);
}

TEST_CASE("rx checkpoint round trip") {
    RxConfig cfg;
    cfg.nf = 8;
    cfg.ns = 4;
    cfg.blocks = 2;
    cfg.filters = 8;
    cfg.in_features = 4;
    RxModel m(cfg, 31);
    const std::string path = "rx_test_ckpt.bin";
    m.save(path);
    RxModel r = RxModel::load(path);
    CHECK(r.config().nf == cfg.nf);
    CHECK(r.config().blocks == cfg.blocks);
    REQUIRE(r.params().count() == m.params().count());
    ResourceGrid y = random_grid(cfg.nf, cfg.ns, cfg.nr, 32);
    for (int i = 0; i < m.params().count(); ++i) {
        const Tensor& orig = m.params().value(i);
        const Tensor& back = r.params().value(i);
        for (std::size_t k = 0; k < orig.size(); ++k)
            CHECK(back[k] == static_cast<double>(static_cast<float>(orig[k])));
    }
    Tensor a = m.forward_eval(y);
    Tensor b = r.forward_eval(y);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-4)); // f32 round trip
    std::remove(path.c_str());

    CHECK_THROWS_AS(RxModel::load("no_such_rx_ckpt.bin"), std::runtime_error);
}

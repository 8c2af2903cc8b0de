// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <complex>

#include "pilotlink/gradcheck.hpp"
#include "pilotlink/link.hpp"
#include "pilotlink/rng.hpp"

using namespace pl;

TEST_CASE("tap line hits the requested rms delay spread") {
    for (auto profile : {TdlProfile::TrainA, TdlProfile::TrainB, TdlProfile::ValidC}) {
        ChannelParams p;
        p.profile = profile;
        p.delay_spread_s = 100e-9;
        const auto taps = tdl_taps(p);
        REQUIRE(taps.size() == 12);
        CHECK(taps[0].delay_s == 0.0);
        double psum = 0.0, mean = 0.0, mean2 = 0.0;
        for (std::size_t k = 0; k < taps.size(); ++k) {
            if (k) CHECK(taps[k].delay_s > taps[k - 1].delay_s);
            CHECK(taps[k].power > 0.0);
            psum += taps[k].power;
            mean += taps[k].power * taps[k].delay_s;
            mean2 += taps[k].power * taps[k].delay_s * taps[k].delay_s;
        }
        CHECK(psum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::sqrt(mean2 - mean * mean) == doctest::Approx(100e-9).epsilon(1e-9));
        // Powers decay along the line.
        for (std::size_t k = 1; k < taps.size(); ++k) CHECK(taps[k].power < taps[k - 1].power);
    }
}

TEST_CASE("profiles produce distinct tap lines") {
    ChannelParams a, b;
    a.profile = TdlProfile::TrainA;
    b.profile = TdlProfile::ValidC;
    const auto ta = tdl_taps(a), tb = tdl_taps(b);
    double diff = 0.0;
    for (std::size_t k = 0; k < ta.size(); ++k) diff += std::fabs(ta[k].power - tb[k].power);
    CHECK(diff > 1e-3);
}

TEST_CASE("channel is deterministic in the seed") {
    SlotGeometry g{.nf = 8, .ns = 3, .nt = 2, .nr = 2};
    ChannelParams p;
    const auto h1 = generate_channel(g, p, 42);
    const auto h2 = generate_channel(g, p, 42);
    const auto h3 = generate_channel(g, p, 43);
    double same = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < h1.h.size(); ++i) {
        same += std::abs(h1.h[i] - h2.h[i]);
        diff += std::abs(h1.h[i] - h3.h[i]);
    }
    CHECK(same == 0.0);
    CHECK(diff > 1e-3);
}

TEST_CASE("zero velocity freezes the channel over the slot") {
    SlotGeometry g{.nf = 6, .ns = 14, .nt = 2, .nr = 2};
    ChannelParams p;
    p.velocity_mps = 0.0;
    const auto h = generate_channel(g, p, 7);
    for (int f = 0; f < g.nf; ++f)
        for (int s = 1; s < g.ns; ++s)
            for (int r = 0; r < g.nr; ++r)
                for (int t = 0; t < g.nt; ++t)
                    CHECK(std::abs(h.at(f, s, r, t) - h.at(f, 0, r, t)) < 1e-12);
}

TEST_CASE("nonzero velocity decorrelates across the slot") {
    SlotGeometry g{.nf = 4, .ns = 14, .nt = 1, .nr = 1};
    ChannelParams p;
    p.velocity_mps = 5.0;
    double move = 0.0;
    for (int seed = 0; seed < 8; ++seed) {
        const auto h = generate_channel(g, p, 100 + static_cast<std::uint64_t>(seed));
        move += std::abs(h.at(0, 13, 0, 0) - h.at(0, 0, 0, 0));
    }
    CHECK(move > 1e-4);
}

TEST_CASE("mean channel power is unity per antenna pair") {
    SlotGeometry g{.nf = 8, .ns = 2, .nt = 2, .nr = 2};
    ChannelParams p;
    p.velocity_mps = 1.0;
    const int runs = 10000;
    std::vector<double> acc(static_cast<std::size_t>(g.nr) * g.nt, 0.0);
    long counts = 0;
    for (int i = 0; i < runs; ++i) {
        const auto h = generate_channel(g, p, static_cast<std::uint64_t>(i));
        for (int f = 0; f < g.nf; ++f)
            for (int s = 0; s < g.ns; ++s)
                for (int r = 0; r < g.nr; ++r)
                    for (int t = 0; t < g.nt; ++t)
                        acc[static_cast<std::size_t>(r) * g.nt + t] += std::norm(h.at(f, s, r, t));
        ++counts;
    }
    for (double a : acc)
        CHECK(a / (counts * g.nf * g.ns) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("larger delay spread decorrelates faster in frequency") {
    SlotGeometry g{.nf = 72, .ns = 1, .nt = 1, .nr = 1};
    const int runs = 300;
    auto corr_at = [&](double ds, int lag) {
        ChannelParams p;
        p.delay_spread_s = ds;
        std::complex<double> num{0.0, 0.0};
        double den = 0.0;
        for (int i = 0; i < runs; ++i) {
            const auto h = generate_channel(g, p, 5000 + static_cast<std::uint64_t>(i));
            for (int f = 0; f + lag < g.nf; ++f) {
                num += h.at(f, 0, 0, 0) * std::conj(h.at(f + lag, 0, 0, 0));
                den += std::norm(h.at(f, 0, 0, 0));
            }
        }
        return std::abs(num) / den;
    };
    const std::pair<int, double> margins[] = {{2, 0.002}, {4, 0.008}, {8, 0.03}, {16, 0.12}};
    double prev_wide = 1.0;
    for (const auto& [lag, margin] : margins) {
        const double tight = corr_at(10e-9, lag);
        const double wide = corr_at(300e-9, lag);
        CHECK(wide < tight - margin);
        CHECK(wide < prev_wide);
        prev_wide = wide;
    }
}

TEST_CASE("apply_channel reproduces y equals Hx plus n exactly") {
    SlotGeometry g{.nf = 5, .ns = 4, .nt = 2, .nr = 3};
    ChannelParams p;
    const auto h = generate_channel(g, p, 11);
    ResourceGrid x(g.nf, g.ns, g.nt);
    rng::Stream st(rng::derive(3, {rng::label("xfill")}));
    for (auto& v : x.v) v = {st.uniform(-1.0, 1.0), st.uniform(-1.0, 1.0)};
    // Noiseless: exact matrix product per resource element.
    const auto y0 = apply_channel(x, h, 0.0, 99);
    for (int f = 0; f < g.nf; ++f)
        for (int s = 0; s < g.ns; ++s)
            for (int r = 0; r < g.nr; ++r) {
                std::complex<double> want{0.0, 0.0};
                for (int t = 0; t < g.nt; ++t) want += h.at(f, s, r, t) * x.at(f, s, t);
                CHECK(std::abs(y0.at(f, s, r) - want) < 1e-12);
            }
    // Same seed, same noise, independent of call order.
    const auto y1 = apply_channel(x, h, 0.5, 77);
    const auto y2 = apply_channel(x, h, 0.5, 77);
    for (std::size_t i = 0; i < y1.v.size(); ++i) CHECK(y1.v[i] == y2.v[i]);
    ResourceGrid bad(g.nf + 1, g.ns, g.nt);
    CHECK_THROWS_AS(apply_channel(bad, h, 0.1, 1), std::invalid_argument);
}

TEST_CASE("noise variance tracks the snr in dB") {
    CHECK(noise_variance_from_snr(0.0) == doctest::Approx(1.0));
    CHECK(noise_variance_from_snr(10.0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(noise_variance_from_snr(-3.0) == doctest::Approx(1.9952623).epsilon(1e-6));
    // Empirical check against the realized noise power.
    SlotGeometry g{.nf = 24, .ns = 14, .nt = 1, .nr = 2};
    ChannelParams p;
    const auto h = generate_channel(g, p, 21);
    ResourceGrid x(g.nf, g.ns, g.nt);
    for (auto& v : x.v) v = {1.0, 0.0};
    const double nv = noise_variance_from_snr(7.0);
    const auto clean = apply_channel(x, h, 0.0, 0);
    const auto noisy = apply_channel(x, h, nv, 5);
    double e = 0.0;
    for (std::size_t i = 0; i < clean.v.size(); ++i) e += std::norm(noisy.v[i] - clean.v[i]);
    CHECK(e / static_cast<double>(clean.v.size()) == doctest::Approx(nv).epsilon(0.1));
}

TEST_CASE("training-mode channel matches the plain path and its gradients check out") {
    SlotGeometry g{.nf = 4, .ns = 3, .nt = 2, .nr = 3};
    ChannelParams p;
    const auto h = generate_channel(g, p, 31);
    const int m = g.nf * g.ns;
    ResourceGrid x(g.nf, g.ns, g.nt);
    Tensor s0({m, 2}), s1({m, 2});
    rng::Stream st(rng::derive(8, {rng::label("adx")}));
    for (int f = 0; f < g.nf; ++f)
        for (int s = 0; s < g.ns; ++s) {
            const int re = f * g.ns + s;
            for (int t = 0; t < g.nt; ++t) {
                const double a = st.uniform(-1.0, 1.0), b = st.uniform(-1.0, 1.0);
                x.at(f, s, t) = {a, b};
                (t == 0 ? s0 : s1).at(re, 0) = a;
                (t == 0 ? s0 : s1).at(re, 1) = b;
            }
        }
    const double nv = 0.25;
    const std::uint64_t seed = 17;
    const auto y = apply_channel(x, h, nv, seed);
    auto v0 = ad::leaf(s0), v1 = ad::leaf(s1);
    const auto yad = apply_channel_ad({v0, v1}, h, nv, seed);
    for (int f = 0; f < g.nf; ++f)
        for (int s = 0; s < g.ns; ++s)
            for (int r = 0; r < g.nr; ++r) {
                CHECK(yad.value().at(f, s, r) == doctest::Approx(y.at(f, s, r).real()).epsilon(1e-12));
                CHECK(yad.value().at(f, s, g.nr + r) ==
                      doctest::Approx(y.at(f, s, r).imag()).epsilon(1e-12));
            }
    const double err = finite_diff_check(
        [&](const std::vector<ad::Var>& leaves) {
            auto out = apply_channel_ad({leaves[0], leaves[1]}, h, nv, seed);
            return ad::sum_all(ad::mul(out, out));
        },
        {s0, s1}, {});
    CHECK(err < 1e-7);
}

// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/link.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "pilotlink/rng.hpp"

namespace pl {

namespace {
constexpr double kSpeedOfLight = 299792458.0;
constexpr int kSinusoids = 16;

struct Template {
    double lin, quad, decay;
};

// Fixed delay templates in normalized units; two for training, one held
// out for validation. Powers decay exponentially along the line.
Template profile_template(TdlProfile p) {
    switch (p) {
        case TdlProfile::TrainA: return {0.30, 0.035, 2.0};
        case TdlProfile::TrainB: return {0.15, 0.060, 1.6};
        case TdlProfile::ValidC: return {0.50, 0.060, 2.6};
    }
    throw std::invalid_argument("unknown delay profile");
}
} // namespace

void SlotGeometry::validate() const {
    if (nf < 1 || ns < 1 || nt < 1 || nr < 1)
        throw std::invalid_argument("SlotGeometry: all counts must be positive");
    if (nr < nt)
        throw std::invalid_argument("SlotGeometry: need at least as many rx antennas as streams");
    if (scs_hz <= 0.0 || carrier_hz <= 0.0)
        throw std::invalid_argument("SlotGeometry: frequencies must be positive");
}

std::vector<Tap> tdl_taps(const ChannelParams& p) {
    if (p.taps < 1) throw std::invalid_argument("tdl_taps: need at least one tap");
    if (p.taps > 64) throw std::invalid_argument("tdl_taps: at most 64 taps supported");
    if (p.delay_spread_s < 0.0) throw std::invalid_argument("tdl_taps: negative delay spread");
    if (p.delay_spread_s < 10e-9 || p.delay_spread_s > 300e-9)
        std::fprintf(stderr, "warning: delay spread %.3g s outside the validated 10..300 ns range\n",
                     p.delay_spread_s);
    if (p.velocity_mps < 0.0 || p.velocity_mps > 5.0)
        std::fprintf(stderr, "warning: velocity %.3g m/s outside the validated 0..5 m/s range\n",
                     p.velocity_mps);

    const Template t = profile_template(p.profile);
    std::vector<Tap> taps(static_cast<std::size_t>(p.taps));
    double psum = 0.0;
    for (int k = 0; k < p.taps; ++k) {
        const double d = t.lin * k + t.quad * static_cast<double>(k) * k;
        taps[static_cast<std::size_t>(k)].delay_s = d;
        taps[static_cast<std::size_t>(k)].power = std::exp(-d / t.decay);
        psum += taps[static_cast<std::size_t>(k)].power;
    }
    double mean = 0.0, mean2 = 0.0;
    for (auto& tp : taps) {
        tp.power /= psum;
        mean += tp.power * tp.delay_s;
        mean2 += tp.power * tp.delay_s * tp.delay_s;
    }
    const double rms = std::sqrt(std::max(mean2 - mean * mean, 0.0));
    const double scale = rms > 0.0 ? p.delay_spread_s / rms : 0.0;
    for (auto& tp : taps) tp.delay_s *= scale;
    return taps;
}

ChannelRealization generate_channel(const SlotGeometry& g, const ChannelParams& p,
                                    std::uint64_t seed) {
    g.validate();
    const auto taps = tdl_taps(p);
    const int nt = g.nt, nr = g.nr, nf = g.nf, ns = g.ns;
    const int K = static_cast<int>(taps.size());
    const double fd = p.velocity_mps * g.carrier_hz / kSpeedOfLight;
    const double tsym = 1.0 / g.scs_hz;

    // Per (tap, rx, tx): complex sinusoid amplitudes with total variance
    // equal to the tap power, plus per-sinusoid Doppler shifts.
    const int pairs = nr * nt;
    std::vector<std::complex<double>> amp(static_cast<std::size_t>(K) * pairs * kSinusoids);
    std::vector<double> shift(amp.size());
    for (int k = 0; k < K; ++k)
        for (int r = 0; r < nr; ++r)
            for (int t = 0; t < nt; ++t) {
                rng::Stream st(rng::derive(seed, {rng::label("chan"), static_cast<std::uint64_t>(k),
                                                  static_cast<std::uint64_t>(r),
                                                  static_cast<std::uint64_t>(t)}));
                const std::size_t base =
                    ((static_cast<std::size_t>(k) * nr + r) * nt + t) * kSinusoids;
                for (int m = 0; m < kSinusoids; ++m) {
                    amp[base + m] = st.next_cnormal(taps[static_cast<std::size_t>(k)].power /
                                                    kSinusoids);
                    shift[base + m] = 2.0 * M_PI * fd * std::cos(2.0 * M_PI * st.next_unit());
                }
            }

    // Tap gains per symbol, then the frequency response from the delays.
    std::vector<std::complex<double>> gain(static_cast<std::size_t>(K) * ns * pairs);
    for (int k = 0; k < K; ++k)
        for (int r = 0; r < nr; ++r)
            for (int t = 0; t < nt; ++t) {
                const std::size_t base =
                    ((static_cast<std::size_t>(k) * nr + r) * nt + t) * kSinusoids;
                for (int s = 0; s < ns; ++s) {
                    const double tj = s * tsym;
                    std::complex<double> acc{0.0, 0.0};
                    for (int m = 0; m < kSinusoids; ++m) {
                        const double ph = shift[base + m] * tj;
                        acc += amp[base + m] * std::complex<double>(std::cos(ph), std::sin(ph));
                    }
                    gain[(static_cast<std::size_t>(k) * ns + s) * pairs + (r * nt + t)] = acc;
                }
            }

    std::vector<std::complex<double>> twiddle(static_cast<std::size_t>(K) * nf);
    for (int k = 0; k < K; ++k)
        for (int f = 0; f < nf; ++f) {
            const double ph = -2.0 * M_PI * (f * g.scs_hz) * taps[static_cast<std::size_t>(k)].delay_s;
            twiddle[static_cast<std::size_t>(k) * nf + f] = {std::cos(ph), std::sin(ph)};
        }

    ChannelRealization out;
    out.nf = nf;
    out.ns = ns;
    out.nr = nr;
    out.nt = nt;
    out.h.assign(static_cast<std::size_t>(nf) * ns * nr * nt, {0.0, 0.0});
    for (int s = 0; s < ns; ++s)
        for (int rt = 0; rt < pairs; ++rt) {
            std::complex<double> gk[64];
            for (int k = 0; k < K; ++k)
                gk[k] = gain[(static_cast<std::size_t>(k) * ns + s) * pairs + rt];
            for (int f = 0; f < nf; ++f) {
                std::complex<double> acc{0.0, 0.0};
                for (int k = 0; k < K; ++k)
                    acc += gk[k] * twiddle[static_cast<std::size_t>(k) * nf + f];
                out.h[((static_cast<std::size_t>(f) * ns + s) * nr * nt) + rt] = acc;
            }
        }
    return out;
}

double noise_variance_from_snr(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

static std::complex<double> noise_draw(std::uint64_t seed, int f, int s, int r, double var) {
    rng::Stream st(rng::derive(seed, {rng::label("noise"), static_cast<std::uint64_t>(f),
                                      static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(r)}));
    return st.next_cnormal(var);
}

ResourceGrid apply_channel(const ResourceGrid& x, const ChannelRealization& h, double noise_var,
                           std::uint64_t seed) {
    if (x.nf != h.nf || x.ns != h.ns || x.nc != h.nt)
        throw std::invalid_argument("apply_channel: grid does not match the channel");
    if (noise_var < 0.0) throw std::invalid_argument("apply_channel: negative noise variance");
    ResourceGrid y(h.nf, h.ns, h.nr);
    for (int f = 0; f < h.nf; ++f)
        for (int s = 0; s < h.ns; ++s)
            for (int r = 0; r < h.nr; ++r) {
                std::complex<double> acc{0.0, 0.0};
                for (int t = 0; t < h.nt; ++t) acc += h.at(f, s, r, t) * x.at(f, s, t);
                if (noise_var > 0.0) acc += noise_draw(seed, f, s, r, noise_var);
                y.at(f, s, r) = acc;
            }
    return y;
}

ad::Var apply_channel_ad(const std::vector<ad::Var>& streams, const ChannelRealization& h,
                         double noise_var, std::uint64_t seed) {
    if (static_cast<int>(streams.size()) != h.nt)
        throw std::invalid_argument("apply_channel_ad: stream count does not match the channel");
    const int nf = h.nf, ns = h.ns, nr = h.nr, nt = h.nt;
    const int m = nf * ns;
    for (const auto& sv : streams)
        if (sv.value().rank() != 2 || sv.value().dim(0) != m || sv.value().dim(1) != 2)
            throw std::invalid_argument("apply_channel_ad: stream tensor must be (nf*ns, 2)");

    auto hptr = std::make_shared<ChannelRealization>(h);
    Tensor out({nf, ns, 2 * nr});
    for (int f = 0; f < nf; ++f)
        for (int s = 0; s < ns; ++s) {
            const int re = f * ns + s;
            for (int r = 0; r < nr; ++r) {
                double yr = 0.0, yi = 0.0;
                for (int t = 0; t < nt; ++t) {
                    const auto hv = h.at(f, s, r, t);
                    const double xr = streams[static_cast<std::size_t>(t)].value().at(re, 0);
                    const double xi = streams[static_cast<std::size_t>(t)].value().at(re, 1);
                    yr += hv.real() * xr - hv.imag() * xi;
                    yi += hv.real() * xi + hv.imag() * xr;
                }
                if (noise_var > 0.0) {
                    const auto nz = noise_draw(seed, f, s, r, noise_var);
                    yr += nz.real();
                    yi += nz.imag();
                }
                out.at(f, s, r) = yr;
                out.at(f, s, nr + r) = yi;
            }
        }
    return ad::make_op(std::move(out), streams, [hptr, nf, ns, nr, nt](ad::Node& nd) {
        for (int f = 0; f < nf; ++f)
            for (int s = 0; s < ns; ++s) {
                const int re = f * ns + s;
                for (int t = 0; t < nt; ++t) {
                    ad::Node& p = *nd.parents[static_cast<std::size_t>(t)];
                    double gr = 0.0, gi = 0.0;
                    for (int r = 0; r < nr; ++r) {
                        const auto hv = hptr->at(f, s, r, t);
                        const double gyr = nd.grad.at(f, s, r);
                        const double gyi = nd.grad.at(f, s, nr + r);
                        // Conjugate transpose of the per-element channel.
                        gr += hv.real() * gyr + hv.imag() * gyi;
                        gi += hv.real() * gyi - hv.imag() * gyr;
                    }
                    p.grad.at(re, 0) += gr;
                    p.grad.at(re, 1) += gi;
                }
            }
    });
}

Tensor grid_to_planes(const ResourceGrid& g) {
    Tensor t({g.nf, g.ns, 2 * g.nc});
    for (int f = 0; f < g.nf; ++f)
        for (int s = 0; s < g.ns; ++s)
            for (int c = 0; c < g.nc; ++c) {
                t.at(f, s, c) = g.at(f, s, c).real();
                t.at(f, s, g.nc + c) = g.at(f, s, c).imag();
            }
    return t;
}

} // namespace pl

// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pilotlink/rng.hpp"

namespace pl {

bool DmrsPattern::is_pilot_symbol(int s) const {
    for (int ps : pilot_symbols)
        if (ps == s) return true;
    return false;
}

std::complex<double> DmrsPattern::pilot_value(int stream, int subcarrier) const {
    rng::Stream st(rng::derive(seed, {rng::label("dmrs"),
                                      static_cast<std::uint64_t>(stream),
                                      static_cast<std::uint64_t>(subcarrier)}));
    const double ph = 2.0 * M_PI * st.next_unit();
    return {std::cos(ph), std::sin(ph)};
}

static void check_pattern(const DmrsPattern& p, int nf, int ns) {
    if (p.n_streams < 1) throw std::invalid_argument("dmrs: stream count must be positive");
    if (p.pilot_symbols.empty()) throw std::invalid_argument("dmrs: no pilot symbols");
    for (int s : p.pilot_symbols)
        if (s < 0 || s >= ns) throw std::invalid_argument("dmrs: pilot symbol outside slot");
    if (nf < p.n_streams) throw std::invalid_argument("dmrs: comb wider than the grid");
}

void insert_dmrs(ResourceGrid& x, const DmrsPattern& p) {
    check_pattern(p, x.nf, x.ns);
    if (x.nc != p.n_streams)
        throw std::invalid_argument("dmrs: grid stream count does not match pattern");
    for (int s : p.pilot_symbols) {
        for (int f = 0; f < x.nf; ++f) {
            const int owner = p.comb_owner(f);
            for (int c = 0; c < x.nc; ++c)
                x.at(f, s, c) = (c == owner) ? p.pilot_value(c, f)
                                             : std::complex<double>(0.0, 0.0);
        }
    }
}

int data_res(const SlotGeometry& g, const DmrsPattern& p) {
    check_pattern(p, g.nf, g.ns);
    return g.nf * (g.ns - static_cast<int>(p.pilot_symbols.size()));
}

// Frequency smoothing happens in the delay domain of the comb: the
// least-squares pilot estimates are transformed with an Np-point DFT,
// each bin is scaled by the Wiener factor for an exponential power
// profile, and the result is evaluated back on every subcarrier. The
// comb offset rides along in the tap coefficients, so evaluating the
// exponential basis at (f - offset)/comb_step reproduces the pilot
// samples exactly when the noise variance is zero.
ChannelRealization lmmse_estimate(const ResourceGrid& y, const DmrsPattern& p,
                                  const SlotGeometry& g, double noise_var,
                                  double assumed_delay_spread_s) {
    check_pattern(p, g.nf, g.ns);
    if (y.nf != g.nf || y.ns != g.ns || y.nc != g.nr)
        throw std::invalid_argument("lmmse: received grid does not match geometry");
    if (noise_var < 0.0) throw std::invalid_argument("lmmse: negative noise variance");
    if (assumed_delay_spread_s <= 0.0)
        throw std::invalid_argument("lmmse: assumed delay spread must be positive");

    const int nt = p.n_streams;
    const int nsym = static_cast<int>(p.pilot_symbols.size());
    std::vector<int> psyms = p.pilot_symbols;
    std::sort(psyms.begin(), psyms.end());

    ChannelRealization est;
    est.nf = g.nf;
    est.ns = g.ns;
    est.nr = g.nr;
    est.nt = nt;
    est.h.assign(static_cast<std::size_t>(g.nf) * g.ns * g.nr * nt, {0.0, 0.0});

    for (int t = 0; t < nt; ++t) {
        // Comb positions t, t+nt, ... and the delay grid they support.
        std::vector<int> comb;
        for (int f = t; f < g.nf; f += nt) comb.push_back(f);
        const int np = static_cast<int>(comb.size());
        const double bin_delay = 1.0 / (np * nt * g.scs_hz);

        // Signed bin delays: bins past the midpoint alias to small
        // negative delays. Leakage of off-grid taps lands on both sides,
        // so the prior decays in |delay| and interpolation uses the
        // centered exponents (minimal oscillation between samples).
        std::vector<int> signed_bin(static_cast<std::size_t>(np));
        for (int b = 0; b < np; ++b)
            signed_bin[static_cast<std::size_t>(b)] = (b <= np / 2) ? b : b - np;

        std::vector<double> wiener(static_cast<std::size_t>(np));
        {
            double psum = 0.0;
            for (int b = 0; b < np; ++b) {
                const double tau = std::abs(signed_bin[static_cast<std::size_t>(b)]) * bin_delay;
                wiener[static_cast<std::size_t>(b)] = std::exp(-tau / assumed_delay_spread_s);
                psum += wiener[static_cast<std::size_t>(b)];
            }
            for (int b = 0; b < np; ++b) {
                const double pb = wiener[static_cast<std::size_t>(b)] / psum;
                wiener[static_cast<std::size_t>(b)] = pb / (pb + noise_var / np);
            }
        }

        std::vector<std::complex<double>> ls(static_cast<std::size_t>(np));
        std::vector<std::complex<double>> bins(static_cast<std::size_t>(np));
        // Per pilot symbol estimates for every rx antenna, all subcarriers.
        std::vector<std::complex<double>> at_pilot(
            static_cast<std::size_t>(nsym) * g.nr * g.nf);

        for (int si = 0; si < nsym; ++si) {
            const int s = psyms[static_cast<std::size_t>(si)];
            for (int r = 0; r < g.nr; ++r) {
                for (int i = 0; i < np; ++i) {
                    const int f = comb[static_cast<std::size_t>(i)];
                    ls[static_cast<std::size_t>(i)] =
                        y.at(f, s, r) / p.pilot_value(t, f);
                }
                for (int b = 0; b < np; ++b) {
                    std::complex<double> acc(0.0, 0.0);
                    for (int i = 0; i < np; ++i) {
                        const double ph = 2.0 * M_PI * i * b / np;
                        acc += ls[static_cast<std::size_t>(i)] *
                               std::complex<double>(std::cos(ph), std::sin(ph));
                    }
                    bins[static_cast<std::size_t>(b)] =
                        acc * (wiener[static_cast<std::size_t>(b)] / np);
                }
                for (int f = 0; f < g.nf; ++f) {
                    const double x = static_cast<double>(f - t) / nt;
                    std::complex<double> acc(0.0, 0.0);
                    for (int b = 0; b < np; ++b) {
                        const double ph = -2.0 * M_PI * x * signed_bin[static_cast<std::size_t>(b)] / np;
                        acc += bins[static_cast<std::size_t>(b)] *
                               std::complex<double>(std::cos(ph), std::sin(ph));
                    }
                    at_pilot[(static_cast<std::size_t>(si) * g.nr + r) * g.nf + f] = acc;
                }
            }
        }

        // Linear time interpolation between pilot symbols; outside the
        // pilot span the nearest segment is extended. A single pilot
        // symbol gives a time-constant estimate.
        for (int s = 0; s < g.ns; ++s) {
            int seg = 0;
            double alpha = 0.0;
            if (nsym > 1) {
                seg = static_cast<int>(psyms.size()) - 2;
                for (int si = 0; si + 1 < nsym; ++si) {
                    if (s <= psyms[static_cast<std::size_t>(si) + 1] || si == nsym - 2) {
                        seg = si;
                        break;
                    }
                }
                const int s0 = psyms[static_cast<std::size_t>(seg)];
                const int s1 = psyms[static_cast<std::size_t>(seg) + 1];
                alpha = static_cast<double>(s - s0) / (s1 - s0);
            }
            for (int r = 0; r < g.nr; ++r) {
                for (int f = 0; f < g.nf; ++f) {
                    const std::complex<double> a =
                        at_pilot[(static_cast<std::size_t>(seg) * g.nr + r) * g.nf + f];
                    const std::complex<double> b =
                        (nsym > 1)
                            ? at_pilot[((static_cast<std::size_t>(seg) + 1) * g.nr + r) * g.nf + f]
                            : a;
                    est.at(f, s, r, t) = a * (1.0 - alpha) + b * alpha;
                }
            }
        }
    }
    return est;
}

namespace {

struct Partial {
    std::vector<int> sym;
    double metric;
};

bool partial_less(const Partial& a, const Partial& b) {
    if (a.metric != b.metric) return a.metric < b.metric;
    return a.sym < b.sym;
}

// Modified Gram-Schmidt on the (possibly augmented) channel matrix.
// Returns false when a column collapses, so the caller can retry with
// diagonal loading.
bool gram_schmidt(const std::vector<std::complex<double>>& h, int rows, int nt,
                  std::vector<std::complex<double>>& q,
                  std::vector<std::complex<double>>& r) {
    q.assign(static_cast<std::size_t>(rows) * nt, {0.0, 0.0});
    r.assign(static_cast<std::size_t>(nt) * nt, {0.0, 0.0});
    std::vector<std::complex<double>> v(static_cast<std::size_t>(rows));
    for (int t = 0; t < nt; ++t) {
        double cn = 0.0;
        for (int i = 0; i < rows; ++i) {
            v[static_cast<std::size_t>(i)] = h[static_cast<std::size_t>(i) * nt + t];
            cn += std::norm(v[static_cast<std::size_t>(i)]);
        }
        for (int u = 0; u < t; ++u) {
            std::complex<double> dot(0.0, 0.0);
            for (int i = 0; i < rows; ++i)
                dot += std::conj(q[static_cast<std::size_t>(i) * nt + u]) *
                       v[static_cast<std::size_t>(i)];
            r[static_cast<std::size_t>(u) * nt + t] = dot;
            for (int i = 0; i < rows; ++i)
                v[static_cast<std::size_t>(i)] -= dot * q[static_cast<std::size_t>(i) * nt + u];
        }
        double nn = 0.0;
        for (int i = 0; i < rows; ++i) nn += std::norm(v[static_cast<std::size_t>(i)]);
        const double vn = std::sqrt(nn);
        if (!(vn > 1e-12 * std::sqrt(cn) && vn > 1e-300)) return false;
        r[static_cast<std::size_t>(t) * nt + t] = vn;
        for (int i = 0; i < rows; ++i)
            q[static_cast<std::size_t>(i) * nt + t] = v[static_cast<std::size_t>(i)] / vn;
    }
    return true;
}

} // namespace

CandidateList kbest_detect(const std::vector<std::complex<double>>& y,
                           const std::vector<std::complex<double>>& h, int nr, int nt,
                           const std::vector<std::vector<std::complex<double>>>& points,
                           int k_best) {
    if (nr < 1 || nt < 1) throw std::invalid_argument("kbest: bad dimensions");
    if (k_best < 1) throw std::invalid_argument("kbest: K must be positive");
    if (static_cast<int>(y.size()) != nr ||
        static_cast<int>(h.size()) != nr * nt ||
        static_cast<int>(points.size()) != nt)
        throw std::invalid_argument("kbest: input sizes do not match dimensions");
    for (const auto& ps : points)
        if (ps.empty()) throw std::invalid_argument("kbest: empty constellation");

    CandidateList out;
    std::vector<std::complex<double>> q, r;
    std::vector<std::complex<double>> hw = h;
    std::vector<std::complex<double>> yw = y;
    int rows = nr;
    if (!gram_schmidt(hw, rows, nt, q, r)) {
        // Diagonal loading: solve the augmented system [H; sqrt(eps) I],
        // which regularizes the Gram matrix by eps on the diagonal. The
        // final metrics below still use the original channel.
        const double eps = 1e-9;
        out.regularized = true;
        rows = nr + nt;
        hw.assign(static_cast<std::size_t>(rows) * nt, {0.0, 0.0});
        for (int i = 0; i < nr; ++i)
            for (int t = 0; t < nt; ++t)
                hw[static_cast<std::size_t>(i) * nt + t] = h[static_cast<std::size_t>(i) * nt + t];
        for (int t = 0; t < nt; ++t)
            hw[static_cast<std::size_t>(nr + t) * nt + t] = std::sqrt(eps);
        yw.resize(static_cast<std::size_t>(rows), {0.0, 0.0});
        if (!gram_schmidt(hw, rows, nt, q, r))
            throw std::runtime_error("kbest: QR failed even with loading");
    }

    // z = Q^H y
    std::vector<std::complex<double>> z(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t) {
        std::complex<double> acc(0.0, 0.0);
        for (int i = 0; i < rows; ++i)
            acc += std::conj(q[static_cast<std::size_t>(i) * nt + t]) *
                   yw[static_cast<std::size_t>(i)];
        z[static_cast<std::size_t>(t)] = acc;
    }

    // Breadth first over streams nt-1 .. 0 with the triangular metric.
    std::vector<Partial> front{{std::vector<int>(), 0.0}};
    std::vector<Partial> next;
    for (int layer = nt - 1; layer >= 0; --layer) {
        next.clear();
        const auto& cset = points[static_cast<std::size_t>(layer)];
        for (const Partial& pa : front) {
            // Residual after the already fixed streams layer+1 .. nt-1.
            std::complex<double> base = z[static_cast<std::size_t>(layer)];
            for (int u = layer + 1; u < nt; ++u)
                base -= r[static_cast<std::size_t>(layer) * nt + u] *
                        points[static_cast<std::size_t>(u)]
                              [static_cast<std::size_t>(pa.sym[static_cast<std::size_t>(nt - 1 - u)])];
            for (int ci = 0; ci < static_cast<int>(cset.size()); ++ci) {
                const std::complex<double> d =
                    base - r[static_cast<std::size_t>(layer) * nt + layer] *
                               cset[static_cast<std::size_t>(ci)];
                Partial ext;
                ext.sym = pa.sym;
                ext.sym.push_back(ci);
                ext.metric = pa.metric + std::norm(d);
                next.push_back(std::move(ext));
            }
        }
        std::sort(next.begin(), next.end(), partial_less);
        if (static_cast<int>(next.size()) > k_best) next.resize(static_cast<std::size_t>(k_best));
        front.swap(next);
    }

    // Exact metrics against the unfactored channel; partial ordering only
    // steered the search.
    out.cands.reserve(front.size());
    for (const Partial& pa : front) {
        Candidate c;
        c.sym.resize(static_cast<std::size_t>(nt));
        for (int t = 0; t < nt; ++t)
            c.sym[static_cast<std::size_t>(t)] = pa.sym[static_cast<std::size_t>(nt - 1 - t)];
        double m = 0.0;
        for (int i = 0; i < nr; ++i) {
            std::complex<double> acc = y[static_cast<std::size_t>(i)];
            for (int t = 0; t < nt; ++t)
                acc -= h[static_cast<std::size_t>(i) * nt + t] *
                       points[static_cast<std::size_t>(t)]
                             [static_cast<std::size_t>(c.sym[static_cast<std::size_t>(t)])];
            m += std::norm(acc);
        }
        c.metric = m;
        out.cands.push_back(std::move(c));
    }
    std::sort(out.cands.begin(), out.cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.metric != b.metric) return a.metric < b.metric;
        return a.sym < b.sym;
    });
    return out;
}

std::vector<double> maxlog_llrs(const CandidateList& cl, int nt, int qm, double noise_var) {
    if (cl.cands.empty()) throw std::invalid_argument("maxlog: empty candidate list");
    const double clip = 15.0;
    const double nv = std::max(noise_var, 1e-30);
    std::vector<double> llr(static_cast<std::size_t>(nt) * qm, 0.0);
    constexpr double kNone = -1.0;
    std::vector<double> best0(static_cast<std::size_t>(nt) * qm, kNone);
    std::vector<double> best1(static_cast<std::size_t>(nt) * qm, kNone);
    for (const Candidate& c : cl.cands) {
        if (static_cast<int>(c.sym.size()) != nt)
            throw std::invalid_argument("maxlog: candidate stream count mismatch");
        for (int t = 0; t < nt; ++t) {
            for (int q = 0; q < qm; ++q) {
                const int bit = (c.sym[static_cast<std::size_t>(t)] >> (qm - 1 - q)) & 1;
                double& slot = bit ? best1[static_cast<std::size_t>(t) * qm + q]
                                   : best0[static_cast<std::size_t>(t) * qm + q];
                if (slot == kNone || c.metric < slot) slot = c.metric;
            }
        }
    }
    for (int t = 0; t < nt; ++t) {
        for (int q = 0; q < qm; ++q) {
            const std::size_t idx = static_cast<std::size_t>(t) * qm + q;
            double v;
            if (best0[idx] == kNone)
                v = -clip; // only bit-1 hypotheses seen
            else if (best1[idx] == kNone)
                v = clip;
            else
                v = (best1[idx] - best0[idx]) / nv;
            llr[idx] = std::clamp(v, -clip, clip);
        }
    }
    return llr;
}

} // namespace pl

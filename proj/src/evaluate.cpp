// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/evaluate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <thread>

#include "pilotlink/rng.hpp"

namespace pl {

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Practical: return "practical";
        case Scheme::Perfect: return "perfect";
        case Scheme::ML: return "ML";
    }
    throw std::invalid_argument("scheme_name: bad scheme");
}

int scheme_capacity(Scheme scheme, const SlotGeometry& geom, int qm) {
    if (scheme == Scheme::ML) return geom.res() * qm * geom.nt;
    DmrsPattern p;
    return data_res(geom, p) * qm * geom.nt;
}

double spectral_efficiency(const McsEntry& mcs, int n_streams, double pilot_overhead) {
    if (pilot_overhead < 0.0 || pilot_overhead >= 1.0)
        throw std::invalid_argument("spectral_efficiency: overhead outside [0,1)");
    return n_streams * mcs.qm * mcs.rate * (1.0 - pilot_overhead);
}

double scheme_overhead(Scheme scheme, const SlotGeometry& geom) {
    if (scheme == Scheme::ML) return 0.0;
    DmrsPattern p;
    return static_cast<double>(p.pilot_symbols.size()) / geom.ns;
}

namespace {

void check_ml_models(const SlotModels& m, const SlotGeometry& g, int qm) {
    if (!m.tx || !m.rx) throw std::runtime_error("ML scheme needs trained tx/rx models");
    const RxConfig& rc = m.rx->config();
    if (rc.nf != g.nf || rc.ns != g.ns || rc.nr != g.nr || rc.nt != g.nt || rc.qm != qm)
        throw std::runtime_error("receiver checkpoint geometry does not match the slot");
    if (m.tx->config().qm != qm || m.tx->config().n_streams != g.nt)
        throw std::runtime_error("constellation checkpoint does not match the slot");
}

SlotResult decode_and_compare(const std::vector<double>& llrs, const CodeSpec& code,
                              const std::vector<std::uint8_t>& payload) {
    DecodeResult res = ldpc_decode(llrs, code);
    SlotResult out;
    out.converged = res.converged;
    out.block_error = res.payload != payload;
    return out;
}

} // namespace

SlotResult simulate_slot(Scheme scheme, const McsEntry& mcs, const CodeSpec& code,
                         const SlotGeometry& geom, const SlotModels& models, int kbest_k,
                         double snr_db, const ChannelParams& cp, std::uint64_t slot_seed) {
    const int qm = mcs.qm;
    if (code.n_tx != scheme_capacity(scheme, geom, qm))
        throw std::invalid_argument("simulate_slot: code span does not match the scheme");

    rng::Stream st(rng::derive(slot_seed, {rng::label("slot")}));
    const std::uint64_t ch_seed = st.next_u64();
    const std::uint64_t noise_seed = st.next_u64();
    const std::uint64_t dmrs_seed = st.next_u64();
    std::vector<std::uint8_t> payload(static_cast<std::size_t>(code.k));
    for (auto& b : payload) b = (st.next_u64() & 1) ? 1 : 0;
    const std::vector<std::uint8_t> cw = ldpc_encode(payload, code);

    const double nv = noise_variance_from_snr(snr_db);
    const ChannelRealization h = generate_channel(geom, cp, ch_seed);

    if (scheme == Scheme::ML) {
        check_ml_models(models, geom, qm);
        ResourceGrid x(geom.nf, geom.ns, geom.nt);
        std::size_t bit = 0;
        for (int t = 0; t < geom.nt; ++t) {
            const auto pts = models.tx->learned_points(t);
            for (int f = 0; f < geom.nf; ++f)
                for (int s = 0; s < geom.ns; ++s) {
                    int label = 0;
                    for (int q = 0; q < qm; ++q) label = (label << 1) | cw[bit++];
                    x.at(f, s, t) = pts[static_cast<std::size_t>(label)];
                }
        }
        const ResourceGrid y = apply_channel(x, h, nv, noise_seed);
        const Tensor logits = models.rx->forward_eval(y);
        // receiver logits favor bit 1 when positive; the decoder expects
        // the opposite sign convention
        std::vector<double> llrs(static_cast<std::size_t>(code.n_tx));
        std::size_t w = 0;
        for (int t = 0; t < geom.nt; ++t)
            for (int f = 0; f < geom.nf; ++f)
                for (int s = 0; s < geom.ns; ++s)
                    for (int q = 0; q < qm; ++q) llrs[w++] = -logits.at(f, s, t * qm + q);
        return decode_and_compare(llrs, code, payload);
    }

    DmrsPattern p;
    p.seed = dmrs_seed;
    const int ndata = data_res(geom, p);
    const auto pts = qam_reference(qm).points;
    ResourceGrid x(geom.nf, geom.ns, geom.nt);
    std::size_t bit = 0;
    for (int t = 0; t < geom.nt; ++t)
        for (int f = 0; f < geom.nf; ++f)
            for (int s = 0; s < geom.ns; ++s) {
                if (p.is_pilot_symbol(s)) continue;
                int label = 0;
                for (int q = 0; q < qm; ++q) label = (label << 1) | cw[bit++];
                x.at(f, s, t) = pts[static_cast<std::size_t>(label)];
            }
    insert_dmrs(x, p);
    const ResourceGrid y = apply_channel(x, h, nv, noise_seed);

    const ChannelRealization est =
        scheme == Scheme::Perfect ? h : lmmse_estimate(y, p, geom, nv);

    std::vector<std::vector<std::complex<double>>> cs(static_cast<std::size_t>(geom.nt), pts);
    std::vector<std::vector<double>> per_stream(static_cast<std::size_t>(geom.nt));
    for (auto& v : per_stream) v.reserve(static_cast<std::size_t>(ndata) * qm);
    std::vector<std::complex<double>> yv(static_cast<std::size_t>(geom.nr));
    std::vector<std::complex<double>> hv(static_cast<std::size_t>(geom.nr) * geom.nt);
    for (int f = 0; f < geom.nf; ++f)
        for (int s = 0; s < geom.ns; ++s) {
            if (p.is_pilot_symbol(s)) continue;
            for (int r = 0; r < geom.nr; ++r) {
                yv[static_cast<std::size_t>(r)] = y.at(f, s, r);
                for (int t = 0; t < geom.nt; ++t)
                    hv[static_cast<std::size_t>(r) * geom.nt + t] = est.at(f, s, r, t);
            }
            const CandidateList cl = kbest_detect(yv, hv, geom.nr, geom.nt, cs, kbest_k);
            const std::vector<double> llr = maxlog_llrs(cl, geom.nt, qm, nv);
            for (int t = 0; t < geom.nt; ++t)
                for (int q = 0; q < qm; ++q)
                    per_stream[static_cast<std::size_t>(t)].push_back(
                        llr[static_cast<std::size_t>(t) * qm + q]);
        }
    std::vector<double> llrs;
    llrs.reserve(static_cast<std::size_t>(code.n_tx));
    for (int t = 0; t < geom.nt; ++t)
        for (const double v : per_stream[static_cast<std::size_t>(t)]) llrs.push_back(v);
    return decode_and_compare(llrs, code, payload);
}

std::vector<BlerRow> bler_sweep(Scheme scheme, int mcs_index,
                                const std::vector<double>& snr_points, const SweepConfig& cfg,
                                const SlotModels& models) {
    cfg.geom.validate();
    const McsEntry mcs = mcs_lookup(mcs_index);
    if (scheme == Scheme::ML) check_ml_models(models, cfg.geom, mcs.qm);
    if (cfg.stop.max_blocks < 1 || cfg.stop.min_errors < 1)
        throw std::invalid_argument("bler_sweep: bad stopping rule");
    const CodeSpec code =
        build_code(mcs.rate, scheme_capacity(scheme, cfg.geom, mcs.qm), BaseGraph::builtin());

    const int jobs = std::max(1, cfg.jobs);
    std::vector<BlerRow> rows;
    for (std::size_t snr_idx = 0; snr_idx < snr_points.size(); ++snr_idx) {
        const double snr_db = snr_points[snr_idx];
        long long errors = 0, blocks = 0;
        bool done = false;

        auto run_slot = [&](long long slot) {
            const std::uint64_t slot_seed =
                rng::derive(cfg.seed, {rng::label("sweep"), static_cast<std::uint64_t>(scheme),
                                       static_cast<std::uint64_t>(mcs_index),
                                       static_cast<std::uint64_t>(snr_idx),
                                       static_cast<std::uint64_t>(slot)});
            rng::Stream ds(rng::derive(slot_seed, {rng::label("chan-draw")}));
            ChannelParams cp;
            cp.profile = TdlProfile::ValidC;
            cp.taps = cfg.taps;
            cp.delay_spread_s = ds.uniform(cfg.delay_min_s, cfg.delay_max_s);
            cp.velocity_mps = ds.uniform(cfg.vel_min_mps, cfg.vel_max_mps);
            return simulate_slot(scheme, mcs, code, cfg.geom, models, cfg.kbest_k, snr_db, cp,
                                 slot_seed);
        };

        while (!done) {
            const int wave = jobs;
            std::vector<SlotResult> outcomes(static_cast<std::size_t>(wave));
            if (jobs == 1) {
                outcomes[0] = run_slot(blocks);
            } else {
                std::vector<std::thread> workers;
                for (int w = 0; w < wave; ++w)
                    workers.emplace_back(
                        [&, w]() { outcomes[static_cast<std::size_t>(w)] = run_slot(blocks + w); });
                for (auto& t : workers) t.join();
            }
            // fold in slot order so results do not depend on cfg.jobs
            for (const SlotResult& r : outcomes) {
                ++blocks;
                if (r.block_error) ++errors;
                if ((errors >= cfg.stop.min_errors && blocks >= cfg.stop.min_blocks) ||
                    blocks >= cfg.stop.max_blocks) {
                    done = true;
                    break;
                }
            }
        }
        BlerRow row;
        row.snr_db = snr_db;
        row.scheme = scheme;
        row.mcs = mcs_index;
        row.errors = errors;
        row.blocks = blocks;
        row.bler = static_cast<double>(errors) / static_cast<double>(blocks);
        rows.push_back(row);
    }
    return rows;
}

std::vector<SeRow> link_adapt(const std::vector<BlerRow>& table, const SlotGeometry& geom,
                              double target, bool isotonic) {
    if (target <= 0.0 || target >= 1.0)
        throw std::invalid_argument("link_adapt: target outside (0,1)");
    // group rows, then demand full MCS coverage per (scheme, snr)
    std::map<std::pair<int, double>, std::map<int, double>> groups; // (scheme,snr) -> mcs -> bler
    for (const BlerRow& r : table)
        groups[{static_cast<int>(r.scheme), r.snr_db}][r.mcs] = r.bler;
    std::string missing;
    for (const auto& [key, by_mcs] : groups)
        for (const McsEntry& e : mcs_table())
            if (!by_mcs.count(e.index)) {
                missing += " (" + scheme_name(static_cast<Scheme>(key.first)) +
                           ", snr " + std::to_string(key.second) + ", mcs " +
                           std::to_string(e.index) + ")";
            }
    if (!missing.empty())
        throw std::invalid_argument("link_adapt: table missing cells:" + missing);

    std::vector<SeRow> out;
    int lifted = 0;
    for (int si = 0; si < 3; ++si) {
        const Scheme scheme = static_cast<Scheme>(si);
        const double overhead = scheme_overhead(scheme, geom);
        SeRow prev;
        bool has_prev = false;
        for (const auto& [key, by_mcs] : groups) {
            if (key.first != si) continue;
            SeRow row;
            row.snr_db = key.second;
            row.scheme = scheme;
            for (const auto& [mcs_index, bler] : by_mcs) {
                if (bler > target) continue;
                const double se = spectral_efficiency(mcs_lookup(mcs_index), geom.nt, overhead);
                if (se > row.se || (se == row.se && mcs_index > row.mcs)) {
                    row.se = se;
                    row.mcs = mcs_index;
                }
            }
            if (isotonic && has_prev && row.se < prev.se) {
                row.se = prev.se;
                row.mcs = prev.mcs;
                ++lifted;
            }
            out.push_back(row);
            prev = row;
            has_prev = true;
        }
    }
    if (lifted > 0)
        std::fprintf(stderr, "[link_adapt] isotonic cleanup lifted %d points\n", lifted);
    return out;
}

std::vector<GainRow> se_gain(const std::vector<SeRow>& ml, const std::vector<SeRow>& base) {
    if (ml.size() != base.size()) throw std::invalid_argument("se_gain: SNR grids differ");
    std::vector<GainRow> out;
    for (std::size_t i = 0; i < ml.size(); ++i) {
        if (std::fabs(ml[i].snr_db - base[i].snr_db) > 1e-9)
            throw std::invalid_argument("se_gain: SNR grids differ");
        GainRow g;
        g.snr_db = ml[i].snr_db;
        if (base[i].se > 0.0) {
            g.defined = true;
            g.gain_pct = 100.0 * (ml[i].se - base[i].se) / base[i].se;
        }
        out.push_back(g);
    }
    return out;
}

namespace {

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("csv export: cannot open " + path);
    return f;
}

// SNR-pivoted three-scheme table; empty cell when a scheme is absent
template <typename Row, typename CellFn>
void export_scheme_pivot(const std::string& path, const std::vector<Row>& rows, CellFn cell) {
    std::map<double, std::array<std::string, 3>> pivot;
    for (const Row& r : rows) {
        auto& slots = pivot[r.snr_db];
        auto& c = slots[static_cast<std::size_t>(r.scheme)];
        const std::string v = cell(r);
        if (!c.empty() && c != v)
            throw std::invalid_argument("csv export: conflicting rows for one cell in " + path);
        c = v;
    }
    std::ofstream f = open_csv(path);
    f << "SNR,practical,perfect,ML\n";
    for (const auto& [snr, cells] : pivot)
        f << fmt9(snr) << ',' << cells[0] << ',' << cells[1] << ',' << cells[2] << '\n';
    if (!f) throw std::runtime_error("csv export: write failed for " + path);
}

} // namespace

void export_bler_csv(const std::string& path, const std::vector<BlerRow>& rows) {
    export_scheme_pivot(path, rows, [](const BlerRow& r) { return fmt9(r.bler); });
}

void export_counts_csv(const std::string& path, const std::vector<BlerRow>& rows) {
    std::ofstream f = open_csv(path);
    f << "SNR,scheme,mcs,errors,blocks\n";
    for (const BlerRow& r : rows)
        f << fmt9(r.snr_db) << ',' << scheme_name(r.scheme) << ',' << r.mcs << ',' << r.errors
          << ',' << r.blocks << '\n';
    if (!f) throw std::runtime_error("csv export: write failed for " + path);
}

void export_se_csv(const std::string& path, const std::vector<SeRow>& rows) {
    export_scheme_pivot(path, rows, [](const SeRow& r) { return fmt9(r.se); });
}

void export_gain_csv(const std::string& path, const std::vector<GainRow>& rows) {
    std::ofstream f = open_csv(path);
    f << "SNR,gain\n";
    for (const GainRow& r : rows)
        f << fmt9(r.snr_db) << ',' << (r.defined ? fmt9(r.gain_pct) : std::string()) << '\n';
    if (!f) throw std::runtime_error("csv export: write failed for " + path);
}

} // namespace pl

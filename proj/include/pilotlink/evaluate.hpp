// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pilotlink/baseline.hpp"
#include "pilotlink/constellation.hpp"
#include "pilotlink/ldpc.hpp"
#include "pilotlink/link.hpp"
#include "pilotlink/mcs.hpp"
#include "pilotlink/neuralrx.hpp"

namespace pl {

// Practical: DMRS pilots, delay-domain LMMSE estimate, K-Best detection.
// Perfect:   DMRS pilots, genie channel knowledge, K-Best detection.
// ML:        no pilots, learned constellations, convolutional receiver.
enum class Scheme { Practical = 0, Perfect = 1, ML = 2 };

std::string scheme_name(Scheme s);

struct BlerRow {
    double snr_db = 0.0;
    Scheme scheme = Scheme::Practical;
    int mcs = 1;
    long long errors = 0;
    long long blocks = 0;
    double bler = 0.0;
};

// chosen mcs -1 means no entry met the target (SE 0)
struct SeRow {
    double snr_db = 0.0;
    Scheme scheme = Scheme::Practical;
    int mcs = -1;
    double se = 0.0;
};

struct GainRow {
    double snr_db = 0.0;
    bool defined = false; // false when the baseline SE is zero
    double gain_pct = 0.0;
};

// Stop once min_errors block errors have been seen (but never before
// min_blocks slots), or unconditionally at max_blocks.
struct Stopping {
    int min_errors = 100;
    int min_blocks = 0;
    int max_blocks = 10000;
};

struct SweepConfig {
    SlotGeometry geom;
    int taps = 12;
    double delay_min_s = 10e-9;
    double delay_max_s = 300e-9;
    double vel_min_mps = 0.0;
    double vel_max_mps = 5.0;
    int kbest_k = 16;
    Stopping stop;
    std::uint64_t seed = 1;
    int jobs = 1;
};

struct SlotModels {
    const TxModel* tx = nullptr;
    const RxModel* rx = nullptr;
};

struct SlotResult {
    bool block_error = false;
    bool converged = false;
};

// One fully specified slot: encode, map, channel, detect, decode. The code
// must span the scheme's data capacity (all resource elements for ML, the
// non-pilot symbols otherwise). A block error is a payload mismatch.
SlotResult simulate_slot(Scheme scheme, const McsEntry& mcs, const CodeSpec& code,
                         const SlotGeometry& geom, const SlotModels& models, int kbest_k,
                         double snr_db, const ChannelParams& cp, std::uint64_t slot_seed);

// Transmitted-bit capacity of one slot for the scheme.
int scheme_capacity(Scheme scheme, const SlotGeometry& geom, int qm);

// Monte Carlo over held-out-profile slots with per-slot randomized delay
// spread and velocity. Results are independent of cfg.jobs: outcomes fold
// in slot order and the stopping rule is applied exactly as sequentially.
std::vector<BlerRow> bler_sweep(Scheme scheme, int mcs_index,
                                const std::vector<double>& snr_points, const SweepConfig& cfg,
                                const SlotModels& models = {});

// streams * Qm * rate * (1 - pilot_overhead), in bps/Hz
double spectral_efficiency(const McsEntry& mcs, int n_streams, double pilot_overhead);

// Fraction of symbols spent on pilots: 0 for ML, pilots/ns otherwise.
double scheme_overhead(Scheme scheme, const SlotGeometry& geom);

// Per (snr, scheme): the highest-SE MCS whose BLER meets the target
// (ties broken toward the higher index); none qualifying gives SE 0.
// Requires every (scheme, snr) group to cover all 15 MCS entries; the
// error lists the missing cells. isotonic forces SE non-decreasing in
// SNR per scheme (carrying the previous row forward) and logs when used.
std::vector<SeRow> link_adapt(const std::vector<BlerRow>& table, const SlotGeometry& geom,
                              double target = 0.10, bool isotonic = false);

// Percent SE gain per SNR point; both curves must sit on the same grid
// and hold a single scheme each. A zero-SE baseline row is undefined.
std::vector<GainRow> se_gain(const std::vector<SeRow>& ml, const std::vector<SeRow>& base);

// CSV exports, 9 significant digits, header always written.
// Pivot tables have one row per SNR and one column per scheme; a cell a
// table does not cover stays empty.
void export_bler_csv(const std::string& path, const std::vector<BlerRow>& rows);
void export_counts_csv(const std::string& path, const std::vector<BlerRow>& rows);
void export_se_csv(const std::string& path, const std::vector<SeRow>& rows);
void export_gain_csv(const std::string& path, const std::vector<GainRow>& rows);

} // namespace pl

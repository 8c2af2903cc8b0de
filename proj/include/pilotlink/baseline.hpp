// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "pilotlink/constellation.hpp"
#include "pilotlink/link.hpp"

namespace pl {

// Demodulation reference signals on a frequency comb: stream l occupies
// subcarriers with index % n_streams == l on the pilot symbols, other
// streams stay silent there. Pilot values are unit-modulus random phases
// keyed by (seed, stream, subcarrier).
struct DmrsPattern {
    std::vector<int> pilot_symbols{2, 11};
    int n_streams = 2;
    std::uint64_t seed = 0;

    bool is_pilot_symbol(int s) const;
    // Stream whose pilot sits on this subcarrier.
    int comb_owner(int subcarrier) const { return subcarrier % n_streams; }
    std::complex<double> pilot_value(int stream, int subcarrier) const;
};

// Zeroes the pilot symbols and writes the comb. Grid channel count must
// equal the pattern's stream count.
void insert_dmrs(ResourceGrid& x, const DmrsPattern& p);

// Number of resource elements per stream available for data.
int data_res(const SlotGeometry& g, const DmrsPattern& p);

// LMMSE channel estimation from the comb: least-squares at the pilots,
// transformed to the delay domain over the comb's unambiguous range,
// per-bin Wiener weighting under an exponential power profile with the
// given assumed delay spread, then evaluated on every subcarrier. Time
// direction is linear interpolation between pilot symbols (constant
// extension outside with a single pilot symbol).
ChannelRealization lmmse_estimate(const ResourceGrid& y, const DmrsPattern& p,
                                  const SlotGeometry& g, double noise_var,
                                  double assumed_delay_spread_s = 100e-9);

// K-Best sphere detection candidate. sym[l] indexes stream l's point.
struct Candidate {
    std::vector<int> sym;
    double metric = 0.0;
};

struct CandidateList {
    std::vector<Candidate> cands; // ascending metric, exact |y - Hx|^2
    bool regularized = false;     // QR needed diagonal loading
};

// Breadth-first tree search over the per-stream constellations keeping K
// survivors per layer; final metrics are recomputed exactly against the
// unfactored channel. Full K equals an exhaustive search.
CandidateList kbest_detect(const std::vector<std::complex<double>>& y,
                           const std::vector<std::complex<double>>& h, // nr x nt, row major
                           int nr, int nt,
                           const std::vector<std::vector<std::complex<double>>>& points,
                           int k_best);

// Max-log bit LLRs from a candidate list, decoder convention (positive
// means bit 0), clipped to +-15. Bits whose counter hypothesis never
// appears in the list saturate at the clip.
std::vector<double> maxlog_llrs(const CandidateList& cl, int nt, int qm, double noise_var);

// Genie estimator used by the perfect-CSI detection mode.
inline const ChannelRealization& perfect_csi(const ChannelRealization& h) { return h; }

} // namespace pl

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "pilotlink/adam.hpp"
#include "pilotlink/autodiff.hpp"

namespace pl {

// Reference QAM constellation with the reflected binary labeling used by
// the bit-interleaved chain. Point index equals the integer value of its
// label with bit 0 as MSB, so points[k] carries label k.
struct Constellation {
    int qm = 0;
    std::vector<std::complex<double>> points;

    int order() const { return static_cast<int>(points.size()); }
    std::string label_string(int k) const;
};

// Supported orders: 16 (qm=4) and 64 (qm=6). Unit average energy.
Constellation qam_reference(int qm);

// Index of the point whose label equals the given bits, MSB first.
int symbol_index(const std::vector<int>& bits);

// Smallest and largest pairwise Euclidean distances.
struct DistancePair {
    double dmin = 0.0;
    double dmax = 0.0;
};
DistancePair min_max_distance(const std::vector<std::complex<double>>& pts);

// Shifts to zero mean and scales to unit average energy. Throws
// std::runtime_error when the set is degenerate (all points identical).
std::vector<std::complex<double>> normalize_points(const std::vector<std::complex<double>>& pts);

// Learned transmitter: C transformation networks shared across streams,
// blended per stream by a softmax-weighting network. Inputs and outputs
// of the transformation nets are (amplitude, angle) pairs of the
// reference points; the blended result is converted back to I/Q and
// normalized per stream.
struct TxModelConfig {
    int qm = 4;
    int n_streams = 2;
    int n_transforms = 3;
    std::vector<int> q_hidden{32, 32, 16, 16};
    std::vector<int> w_hidden{16, 16, 8, 8};
};

class TxModel {
public:
    TxModel(TxModelConfig cfg, std::uint64_t seed);

    const TxModelConfig& config() const { return cfg_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    // Normalized constellation of one stream as a (2^qm, 2) graph over the
    // given parameter leaves (leaves must come from params().make_leaves()).
    ad::Var stream_points(const std::vector<ad::Var>& leaves, int stream) const;

    // Plain evaluation without gradients.
    std::vector<std::complex<double>> learned_points(int stream) const;

    void save(const std::string& path) const;
    static TxModel load(const std::string& path);

private:
    TxModelConfig cfg_;
    ParamStore params_;
    // Parameter index bookkeeping, filled in declaration order.
    struct Mlp {
        std::vector<int> w, b;
    };
    std::vector<Mlp> qnets_, wnets_;
    Tensor ref_inputs_; // (2^qm, 2) amplitude/angle of the reference points

    void init_params(std::uint64_t seed);
};

// Writes one CSV per stream: header x,y,label then one row per point.
// Files are named layer<stream>_const.csv under out_dir.
void export_constellation_csv(const TxModel& model, const std::string& out_dir);

} // namespace pl

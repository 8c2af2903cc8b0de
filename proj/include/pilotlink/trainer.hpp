// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pilotlink/constellation.hpp"
#include "pilotlink/link.hpp"
#include "pilotlink/neuralrx.hpp"

namespace pl {

// Joint transmitter/receiver training configuration. Negative lambda or
// bias pick the per-modulation defaults (16-point: 0.1/4.5, 64-point:
// 0.05/7.5).
struct TrainConfig {
    int qm = 4;
    double lambda = -1.0;
    double bias = -1.0;
    double lr = 5e-4;
    int batch = 10;
    int steps = 0;
    double snr_min_db = 0.0, snr_max_db = 30.0;
    double delay_min_s = 10e-9, delay_max_s = 300e-9;
    double vel_min_mps = 0.0, vel_max_mps = 5.0;
    int taps = 12;
    double clip_norm = 10.0;
    std::uint64_t seed = 1;
    SlotGeometry geom;
    int rx_blocks = 8;
    int rx_filters = 48;
    int rx_in_features = 32;
    std::string history_path; // streamed CSV when non-empty

    double resolved_lambda() const { return lambda >= 0.0 ? lambda : (qm == 6 ? 0.05 : 0.1); }
    double resolved_bias() const { return bias >= 0.0 ? bias : (qm == 6 ? 7.5 : 4.5); }
    void validate() const;
    RxConfig rx_config() const;
};

struct StepRecord {
    int step = 0;
    double loss = 0.0;
    double bce = 0.0;      // batch mean, unweighted
    double dterm = 0.0;    // raw distance penalty
    double snr_db = 0.0;   // batch mean of the draws
    double gradnorm = 0.0; // before clipping
};

struct TrainResult {
    std::unique_ptr<TxModel> tx;
    std::unique_ptr<RxModel> rx;
    std::vector<StepRecord> history;
};

// Runs the joint loop: per step, a batch of slots with independent
// channel/SNR draws, uncoded uniform bits through the learned
// constellations, the differentiable channel, and the receiver; one Adam
// step over the union of parameters. Deterministic given cfg.seed.
// Throws on non-finite loss after dumping the history.
TrainResult train_e2e(const TrainConfig& cfg);

void write_history_csv(const std::string& path, const std::vector<StepRecord>& hist);

// Finite-difference verification across every differentiable operation
// plus the composite slot loss at several random parameter points.
struct GradCheckItem {
    std::string name;
    double rel_err = 0.0;
};

std::vector<GradCheckItem> gradient_suite(int composite_points = 20,
                                          std::uint64_t seed = 2026);

} // namespace pl

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "pilotlink/autodiff.hpp"
#include "pilotlink/tensor.hpp"

namespace pl {

// Mean binary cross-entropy between sigmoid(llrs) and the transmitted
// bits. llrs carries bit-1 logits; bits must hold the same number of
// {0,1} entries.
ad::Var bce_loss(const ad::Var& llrs, const Tensor& bits);

// Smallest and largest pairwise point distances of an (n, 2) point set,
// as two scalar nodes. Subgradients flow only through the achieving
// pair; ties resolve to the first pair in row-major scan order.
ad::Var min_pair_distance(const ad::Var& pts);
ad::Var max_pair_distance(const ad::Var& pts);

// Distance penalty: ReLu(ln(mean over streams of dmax/dmin) - bias).
// dmin is floored at 1e-9, so a degenerate constellation yields a large
// finite penalty; *degenerate reports whether the floor engaged.
ad::Var distance_loss(const std::vector<ad::Var>& stream_points, double bias,
                      bool* degenerate = nullptr);

// SNR-weighted slot loss: ln(1 + snr_linear) * bce + lambda * dterm.
ad::Var total_loss(const ad::Var& bce, const ad::Var& dterm, double snr_linear,
                   double lambda);

} // namespace pl

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pilotlink/autodiff.hpp"

namespace pl {

struct FdOptions {
    double eps = 1e-5;
    // < 0 checks every coordinate; otherwise that many per parameter,
    // sampled deterministically from sample_seed.
    int max_coords_per_param = -1;
    std::uint64_t sample_seed = 0;
    // Denominator floor of the relative error. Raise for deep composite
    // graphs where legitimate gradients sit below the central-difference
    // noise floor (roundoff ~1e-11 at eps 1e-5); the default keeps the
    // comparison strict for O(1) single-op probes.
    double abs_floor = 1e-12;
};

// Central-difference verification of reverse-mode gradients.
//
// build must construct a scalar graph from the given leaves and be
// deterministic: the same parameter values always produce the same value.
// Returns the maximum relative error
//   |g_ad - g_fd| / max(|g_ad|, |g_fd|, abs_floor)
// over all checked coordinates.
double finite_diff_check(
    const std::function<ad::Var(const std::vector<ad::Var>&)>& build,
    const std::vector<Tensor>& params, const FdOptions& opt = {});

} // namespace pl

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>

namespace pl {

// Modulation and coding schemes available to link adaptation. Indices
// 1..6 use 16-point modulation, 7..15 use 64-point.
struct McsEntry {
    int index;
    int qm;      // bits per symbol
    double rate; // target code rate
};

const std::array<McsEntry, 15>& mcs_table();

// Throws std::out_of_range for indices outside 1..15.
const McsEntry& mcs_lookup(int index);

} // namespace pl

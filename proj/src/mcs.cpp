// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/mcs.hpp"

#include <stdexcept>
#include <string>

namespace pl {

const std::array<McsEntry, 15>& mcs_table() {
    static const std::array<McsEntry, 15> table = {{
        {1, 4, 0.37},
        {2, 4, 0.42},
        {3, 4, 0.48},
        {4, 4, 0.54},
        {5, 4, 0.60},
        {6, 4, 0.64},
        {7, 6, 0.46},
        {8, 6, 0.50},
        {9, 6, 0.55},
        {10, 6, 0.60},
        {11, 6, 0.65},
        {12, 6, 0.70},
        {13, 6, 0.75},
        {14, 6, 0.80},
        {15, 6, 0.85},
    }};
    return table;
}

const McsEntry& mcs_lookup(int index) {
    if (index < 1 || index > 15)
        throw std::out_of_range("mcs_lookup: index " + std::to_string(index) +
                                " outside 1..15");
    return mcs_table()[static_cast<std::size_t>(index - 1)];
}

} // namespace pl

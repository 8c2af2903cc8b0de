// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pl {

// Quasi-cyclic LDPC built from a prefix-lower-triangular protograph:
// base row r checks base columns <= kb + r and owns parity column kb + r,
// so any row prefix forms a valid code and encoding is back substitution.

struct BaseGraph {
    int kb = 0; // information columns
    int mb = 0; // parity rows (= parity columns)
    std::vector<std::vector<int>> row_cols; // sorted base column ids per row

    static BaseGraph load_alist(const std::string& path);
    // Default committed protograph (PILOTLINK_DATA_DIR/ldpc_basegraph.alist).
    static const BaseGraph& builtin();
};

struct CodeSpec {
    int k = 0;       // payload bits
    int n_tx = 0;    // transmitted bits
    int n_full = 0;  // codeword bits incl. punctured
    int z = 1;       // lifting size
    int rows = 0;    // expanded parity checks
    double rate = 0.0;
    int max_iters = 25;
    // Expanded sparse H: sorted column ids per row; columns 0..k-1 are
    // systematic, k..n_full-1 parity in transmission order.
    std::vector<std::vector<int>> row_cols;
    // Expanded parity column solved by each row, in encoding order.
    std::vector<int> solve_col;
    int n_punct = 0; // punctured bits, dropped from the tail of the codeword
};

// Sizes the lifted code so the payload is round(target_rate * available)
// bits carried in exactly `available` transmitted bits, using shortening
// (removed trailing info columns) and puncturing (untransmitted trailing
// parity bits). Throws when the realized rate misses the target by more
// than 0.01 or the base graph runs out of rows.
CodeSpec build_code(double target_rate, int available_bits, const BaseGraph& bg,
                    int max_iters = 25);

// Systematic encoding; returns the n_tx transmitted bits.
std::vector<std::uint8_t> ldpc_encode(const std::vector<std::uint8_t>& payload,
                                      const CodeSpec& code);

struct DecodeResult {
    std::vector<std::uint8_t> payload;
    bool converged = false;
    int iterations = 0;
};

// Normalized min-sum (factor 0.75) with early exit once the syndrome
// clears. LLR convention: positive means bit 0; punctured bits enter
// with LLR 0; exactly-zero LLRs decide to bit 0.
DecodeResult ldpc_decode(const std::vector<double>& llr, const CodeSpec& code);

// True when H c = 0 over GF(2) for the full codeword implied by the
// transmitted bits (punctured tail recovered by re-encoding is NOT done;
// candidates must supply all n_tx bits).
bool syndrome_ok(const std::vector<std::uint8_t>& tx_bits, const CodeSpec& code);

// Expanded parity matrix in alist text form, for external inspection.
void export_alist(const CodeSpec& code, const std::string& path);

} // namespace pl

// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pilotlink/rng.hpp"

namespace pl {

BaseGraph BaseGraph::load_alist(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("BaseGraph: cannot open " + path);
    int n = 0, m = 0, maxc = 0, maxr = 0;
    is >> n >> m >> maxc >> maxr;
    if (!is || n <= 0 || m <= 0 || n <= m)
        throw std::runtime_error("BaseGraph: malformed header in " + path);
    BaseGraph bg;
    bg.kb = n - m;
    bg.mb = m;
    std::vector<int> cdeg(static_cast<std::size_t>(n)), rdeg(static_cast<std::size_t>(m));
    for (auto& d : cdeg) is >> d;
    for (auto& d : rdeg) is >> d;
    // Column lists are read only to keep the cursor aligned.
    for (int c = 0; c < n; ++c)
        for (int j = 0; j < maxc; ++j) {
            int v;
            is >> v;
        }
    bg.row_cols.resize(static_cast<std::size_t>(m));
    for (int r = 0; r < m; ++r) {
        auto& row = bg.row_cols[static_cast<std::size_t>(r)];
        for (int j = 0; j < maxr; ++j) {
            int v;
            is >> v;
            if (v > 0) row.push_back(v - 1);
        }
        if (static_cast<int>(row.size()) != rdeg[static_cast<std::size_t>(r)])
            throw std::runtime_error("BaseGraph: row degree mismatch in " + path);
        std::sort(row.begin(), row.end());
    }
    if (!is) throw std::runtime_error("BaseGraph: truncated file " + path);
    for (int r = 0; r < m; ++r) {
        const auto& row = bg.row_cols[static_cast<std::size_t>(r)];
        if (row.empty() || row.back() != bg.kb + r)
            throw std::runtime_error("BaseGraph: row " + std::to_string(r) +
                                     " does not own parity column (not prefix-triangular)");
        for (std::size_t i = 1; i < row.size(); ++i)
            if (row[i] == row[i - 1])
                throw std::runtime_error("BaseGraph: duplicate entry in row " + std::to_string(r));
    }
    return bg;
}

const BaseGraph& BaseGraph::builtin() {
    static const BaseGraph bg = load_alist(std::string(PILOTLINK_DATA_DIR) +
                                           "/ldpc_basegraph.alist");
    return bg;
}

namespace {

// Greedy circulant shifts, assigned row-major, dodging length-4 cycles
// between already-placed entries where the lifting size allows it.
std::vector<std::vector<int>> assign_shifts(const BaseGraph& bg, int mp, int z) {
    std::vector<std::vector<int>> shift(static_cast<std::size_t>(mp));
    for (int r = 0; r < mp; ++r)
        shift[static_cast<std::size_t>(r)].assign(bg.row_cols[static_cast<std::size_t>(r)].size(),
                                                  0);
    if (z == 1) return shift;
    auto find_shift = [&](int r, int c) {
        const auto& row = bg.row_cols[static_cast<std::size_t>(r)];
        int best = -1, best_cycles = -1;
        const int start = static_cast<int>(rng::derive(0x5eed, {static_cast<std::uint64_t>(r),
                                                                static_cast<std::uint64_t>(c)}) %
                                           static_cast<std::uint64_t>(z));
        for (int step = 0; step < z; ++step) {
            const int t = (start + step) % z;
            int cycles = 0;
            for (int r2 = 0; r2 < r && cycles == 0; ++r2) {
                const auto& row2 = bg.row_cols[static_cast<std::size_t>(r2)];
                // The candidate column must be shared before any pair exists.
                const auto it = std::lower_bound(row2.begin(), row2.end(), c);
                if (it == row2.end() || *it != c) continue;
                const int sc2 = shift[static_cast<std::size_t>(r2)][static_cast<std::size_t>(
                    it - row2.begin())];
                for (std::size_t i = 0; i < row.size(); ++i) {
                    const int c2 = row[i];
                    if (c2 >= c) break; // only already-assigned entries of row r
                    const auto jt = std::lower_bound(row2.begin(), row2.end(), c2);
                    if (jt == row2.end() || *jt != c2) continue;
                    const int s_r_c2 = shift[static_cast<std::size_t>(r)][i];
                    const int s_r2_c2 = shift[static_cast<std::size_t>(r2)][static_cast<std::size_t>(
                        jt - row2.begin())];
                    const int d = ((t - s_r_c2 + s_r2_c2 - sc2) % z + z) % z;
                    if (d == 0) {
                        ++cycles;
                        break;
                    }
                }
            }
            if (cycles == 0) return t;
            if (best_cycles < 0 || cycles < best_cycles) {
                best_cycles = cycles;
                best = t;
            }
        }
        return best;
    };
    for (int r = 0; r < mp; ++r) {
        const auto& row = bg.row_cols[static_cast<std::size_t>(r)];
        for (std::size_t i = 0; i < row.size(); ++i) {
            const int c = row[i];
            if (c == bg.kb + r) continue; // identity on the solve column
            shift[static_cast<std::size_t>(r)][i] = find_shift(r, c);
        }
    }
    return shift;
}

} // namespace

CodeSpec build_code(double target_rate, int available_bits, const BaseGraph& bg, int max_iters) {
    if (target_rate <= 0.0 || target_rate >= 1.0)
        throw std::invalid_argument("build_code: target rate must be in (0,1)");
    if (available_bits < 2) throw std::invalid_argument("build_code: too few available bits");
    if (max_iters < 1) throw std::invalid_argument("build_code: need at least one iteration");

    const int k = static_cast<int>(std::lround(target_rate * available_bits));
    if (k < 1 || k >= available_bits)
        throw std::invalid_argument("build_code: rate/size combination leaves no room for parity");
    const double realized = static_cast<double>(k) / available_bits;
    if (std::fabs(realized - target_rate) > 0.01)
        throw std::invalid_argument("build_code: realized rate " + std::to_string(realized) +
                                    " misses target " + std::to_string(target_rate));
    const int z = (k + bg.kb - 1) / bg.kb;
    const int parity = available_bits - k;
    const int mp = (parity + z - 1) / z;
    if (mp > bg.mb)
        throw std::invalid_argument("build_code: rate " + std::to_string(target_rate) +
                                    " needs " + std::to_string(mp) +
                                    " base rows but the graph has " + std::to_string(bg.mb));
    const int punct = mp * z - parity;

    CodeSpec code;
    code.k = k;
    code.n_tx = available_bits;
    code.n_full = k + mp * z;
    code.z = z;
    code.rows = mp * z;
    code.rate = realized;
    code.max_iters = max_iters;
    code.n_punct = punct;

    const auto shifts = assign_shifts(bg, mp, z);
    code.row_cols.resize(static_cast<std::size_t>(code.rows));
    code.solve_col.resize(static_cast<std::size_t>(code.rows));
    for (int r = 0; r < mp; ++r) {
        const auto& brow = bg.row_cols[static_cast<std::size_t>(r)];
        for (int i = 0; i < z; ++i) {
            auto& erow = code.row_cols[static_cast<std::size_t>(r) * z + i];
            for (std::size_t e = 0; e < brow.size(); ++e) {
                const int c = brow[e];
                const int j = (i + shifts[static_cast<std::size_t>(r)][e]) % z;
                if (c < bg.kb) {
                    const int id = c * z + j;
                    if (id >= k) continue; // shortened information bit
                    erow.push_back(id);
                } else {
                    erow.push_back(k + (c - bg.kb) * z + j);
                }
            }
            std::sort(erow.begin(), erow.end());
            code.solve_col[static_cast<std::size_t>(r) * z + i] = k + r * z + i;
        }
    }
    return code;
}

std::vector<std::uint8_t> ldpc_encode(const std::vector<std::uint8_t>& payload,
                                      const CodeSpec& code) {
    if (static_cast<int>(payload.size()) != code.k)
        throw std::invalid_argument("ldpc_encode: payload must hold " + std::to_string(code.k) +
                                    " bits, got " + std::to_string(payload.size()));
    std::vector<std::uint8_t> cw(static_cast<std::size_t>(code.n_full), 0);
    for (int i = 0; i < code.k; ++i) {
        if (payload[static_cast<std::size_t>(i)] > 1)
            throw std::invalid_argument("ldpc_encode: payload bits must be 0 or 1");
        cw[static_cast<std::size_t>(i)] = payload[static_cast<std::size_t>(i)];
    }
    for (int row = 0; row < code.rows; ++row) {
        const int target = code.solve_col[static_cast<std::size_t>(row)];
        std::uint8_t x = 0;
        for (int c : code.row_cols[static_cast<std::size_t>(row)])
            if (c != target) x ^= cw[static_cast<std::size_t>(c)];
        cw[static_cast<std::size_t>(target)] = x;
    }
    cw.resize(static_cast<std::size_t>(code.n_tx));
    return cw;
}

static std::vector<std::uint8_t> full_codeword(const std::vector<std::uint8_t>& bits,
                                               const CodeSpec& code) {
    if (static_cast<int>(bits.size()) == code.n_full) return bits;
    if (static_cast<int>(bits.size()) != code.n_tx)
        throw std::invalid_argument("syndrome: expected " + std::to_string(code.n_tx) + " or " +
                                    std::to_string(code.n_full) + " bits");
    std::vector<std::uint8_t> cw = bits;
    cw.resize(static_cast<std::size_t>(code.n_full), 0);
    // Punctured bits sit only in their own solve rows, so back substitution
    // over the tail rows recovers them.
    for (int row = code.rows - code.n_punct; row < code.rows; ++row) {
        const int target = code.solve_col[static_cast<std::size_t>(row)];
        std::uint8_t x = 0;
        for (int c : code.row_cols[static_cast<std::size_t>(row)])
            if (c != target) x ^= cw[static_cast<std::size_t>(c)];
        cw[static_cast<std::size_t>(target)] = x;
    }
    return cw;
}

bool syndrome_ok(const std::vector<std::uint8_t>& tx_bits, const CodeSpec& code) {
    const auto cw = full_codeword(tx_bits, code);
    for (const auto& row : code.row_cols) {
        std::uint8_t x = 0;
        for (int c : row) x ^= cw[static_cast<std::size_t>(c)];
        if (x) return false;
    }
    return true;
}

DecodeResult ldpc_decode(const std::vector<double>& llr, const CodeSpec& code) {
    if (static_cast<int>(llr.size()) != code.n_tx)
        throw std::invalid_argument("ldpc_decode: expected " + std::to_string(code.n_tx) +
                                    " LLRs, got " + std::to_string(llr.size()));
    constexpr double kAlpha = 0.75;
    const int n = code.n_full;
    std::vector<double> chan(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < code.n_tx; ++i) chan[static_cast<std::size_t>(i)] = llr[static_cast<std::size_t>(i)];

    std::vector<double> total = chan;
    std::vector<std::uint8_t> hard(static_cast<std::size_t>(n), 0);
    auto harden = [&] {
        for (int i = 0; i < n; ++i) hard[static_cast<std::size_t>(i)] = total[static_cast<std::size_t>(i)] < 0.0;
    };
    auto syndrome_clear = [&] {
        for (const auto& row : code.row_cols) {
            std::uint8_t x = 0;
            for (int c : row) x ^= hard[static_cast<std::size_t>(c)];
            if (x) return false;
        }
        return true;
    };

    DecodeResult res;
    harden();
    if (syndrome_clear()) {
        res.converged = true;
        res.iterations = 0;
        res.payload.assign(hard.begin(), hard.begin() + code.k);
        return res;
    }

    std::vector<std::vector<double>> c2v(code.row_cols.size());
    for (std::size_t r = 0; r < code.row_cols.size(); ++r)
        c2v[r].assign(code.row_cols[r].size(), 0.0);

    for (int iter = 0; iter < code.max_iters; ++iter) {
        for (std::size_t r = 0; r < code.row_cols.size(); ++r) {
            const auto& row = code.row_cols[r];
            auto& msg = c2v[r];
            double min1 = 1e300, min2 = 1e300;
            std::size_t arg = 0;
            int sgn = 1;
            for (std::size_t e = 0; e < row.size(); ++e) {
                const double v = total[static_cast<std::size_t>(row[e])] - msg[e];
                const double a = std::fabs(v);
                if (v < 0.0) sgn = -sgn;
                if (a < min1) {
                    min2 = min1;
                    min1 = a;
                    arg = e;
                } else if (a < min2) {
                    min2 = a;
                }
            }
            for (std::size_t e = 0; e < row.size(); ++e) {
                const double v = total[static_cast<std::size_t>(row[e])] - msg[e];
                const int s = (v < 0.0 ? -1 : 1) * sgn;
                const double mag = (e == arg) ? min2 : min1;
                const double nm = kAlpha * s * mag;
                total[static_cast<std::size_t>(row[e])] += nm - msg[e];
                msg[e] = nm;
            }
        }
        harden();
        if (syndrome_clear()) {
            res.converged = true;
            res.iterations = iter + 1;
            res.payload.assign(hard.begin(), hard.begin() + code.k);
            return res;
        }
    }
    res.converged = false;
    res.iterations = code.max_iters;
    res.payload.assign(hard.begin(), hard.begin() + code.k);
    return res;
}

void export_alist(const CodeSpec& code, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("export_alist: cannot open " + path);
    const int n = code.n_full;
    const int m = code.rows;
    std::vector<std::vector<int>> col_rows(static_cast<std::size_t>(n));
    for (int r = 0; r < m; ++r)
        for (int c : code.row_cols[static_cast<std::size_t>(r)])
            col_rows[static_cast<std::size_t>(c)].push_back(r);
    std::size_t maxc = 0, maxr = 0;
    for (const auto& v : col_rows) maxc = std::max(maxc, v.size());
    for (const auto& v : code.row_cols) maxr = std::max(maxr, v.size());
    os << n << " " << m << "\n" << maxc << " " << maxr << "\n";
    for (int c = 0; c < n; ++c) os << col_rows[static_cast<std::size_t>(c)].size() << (c + 1 < n ? " " : "\n");
    for (int r = 0; r < m; ++r) os << code.row_cols[static_cast<std::size_t>(r)].size() << (r + 1 < m ? " " : "\n");
    for (const auto& v : col_rows) {
        for (std::size_t i = 0; i < maxc; ++i)
            os << (i < v.size() ? v[i] + 1 : 0) << (i + 1 < maxc ? " " : "\n");
    }
    for (const auto& v : code.row_cols) {
        for (std::size_t i = 0; i < maxr; ++i)
            os << (i < v.size() ? v[i] + 1 : 0) << (i + 1 < maxr ? " " : "\n");
    }
}

} // namespace pl

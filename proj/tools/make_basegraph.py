# SPDX-License-Identifier: Apache-2.0
"""Generates data/ldpc_basegraph.alist.

Protograph with 16 information columns and 40 parity rows in
prefix-lower-triangular form: row r checks only columns < 16 + r plus its
own parity column 16 + r, so any row prefix is a valid (higher rate) code
and encoding is sequential back substitution.

Layout:
  rows 0..2   heavy rows; every info column appears exactly twice here so
              the shortest usable prefix (highest code rate) protects all
              information bits
  rows 3..5   medium rows chained through the previous parity column
  rows 6..39  degree-4 extension rows, greedy balanced info coverage,
              each tied to one earlier parity column
"""
import sys


def main(out_path):
    KB = 16
    MB = 40
    rows = []  # list of sorted column lists, parity diag included

    # Heavy top rows: deal the 32 (column, copy) slots round-robin.
    slots = [c for c in range(KB)] + [(c * 7 + 3) % KB for c in range(KB)]
    heavy = [sorted(set(slots[0:11])), sorted(set(slots[11:22])), sorted(set(slots[22:32]))]
    # Round-robin dealing can duplicate a column within one row; patch by
    # moving duplicates to the row with the fewest entries.
    seen = [0] * KB
    for r in heavy:
        for c in r:
            seen[c] += 1
    for c in range(KB):
        while seen[c] < 2:
            tgt = min(range(3), key=lambda i: (len(heavy[i]), i))
            if c not in heavy[tgt]:
                heavy[tgt] = sorted(heavy[tgt] + [c])
                seen[c] += 1
            else:
                tgt = min((i for i in range(3) if c not in heavy[i]),
                          key=lambda i: (len(heavy[i]), i))
                heavy[tgt] = sorted(heavy[tgt] + [c])
                seen[c] += 1
    rows.append(heavy[0] + [KB + 0])
    rows.append(heavy[1] + [KB + 0, KB + 1])
    rows.append(heavy[2] + [KB + 1, KB + 2])

    # Medium rows.
    med = [
        [0, 2, 5, 7, 9, 12, 14],
        [1, 3, 4, 8, 10, 13, 15],
        [0, 4, 6, 7, 11, 12, 15],
    ]
    for i, m in enumerate(med):
        r = 3 + i
        rows.append(sorted(m) + [KB + r - 1, KB + r])

    # Extension rows: greedy lowest-degree info columns, one earlier parity.
    deg = [0] * KB
    for row in rows:
        for c in row:
            if c < KB:
                deg[c] += 1
    for r in range(6, MB):
        order = sorted(range(KB), key=lambda c: (deg[c], (c * 5 + r * 3) % KB, c))
        picked = sorted(order[:4])
        for c in picked:
            deg[c] += 1
        anchor = KB + (r * 7 + 1) % min(r, 6)
        rows.append(picked + sorted({anchor}) + [KB + r])

    # Sanity: triangular structure and full info coverage up to row 2.
    for r, row in enumerate(rows):
        assert row[-1] == KB + r, row
        assert all(c <= KB + r for c in row)
        assert len(set(row)) == len(row)
    cov = set()
    for row in rows[:3]:
        cov |= {c for c in row if c < KB}
    assert cov == set(range(KB))

    n = KB + MB
    m = MB
    col_rows = [[] for _ in range(n)]
    for r, row in enumerate(rows):
        for c in row:
            col_rows[c].append(r)
    with open(out_path, "w") as f:
        f.write(f"{n} {m}\n")
        maxc = max(len(x) for x in col_rows)
        maxr = max(len(x) for x in rows)
        f.write(f"{maxc} {maxr}\n")
        f.write(" ".join(str(len(x)) for x in col_rows) + "\n")
        f.write(" ".join(str(len(x)) for x in rows) + "\n")
        for x in col_rows:
            pad = x + [-1] * (maxc - len(x))
            f.write(" ".join(str(v + 1) for v in pad) + "\n")
        for x in rows:
            pad = x + [-1] * (maxr - len(x))
            f.write(" ".join(str(v + 1) for v in pad) + "\n")
    print(f"wrote {out_path}: {n} cols, {m} rows")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/ldpc_basegraph.alist")

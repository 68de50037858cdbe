#!/usr/bin/env python3
"""Writes a small corpus of structured Matrix Market files.

    make_corpus.py OUT_DIR [--seed N]

Families: banded, 2D Poisson, block diagonal, uniform random, power-law rows
and random with a few dense rows. Sizes range from 1k to 60k rows.
"""
import argparse
import os

import numpy as np


def write(path, n, rows, cols, vals):
    with open(path, "w") as f:
        f.write("%%MatrixMarket matrix coordinate real general\n")
        f.write(f"{n} {n} {len(rows)}\n")
        for r, c, v in zip(rows, cols, vals):
            f.write(f"{r + 1} {c + 1} {v:.17g}\n")


def dedupe(n, rows, cols, vals):
    key = rows.astype(np.int64) * n + cols
    _, idx = np.unique(key, return_index=True)
    return rows[idx], cols[idx], vals[idx]


def banded(rng, n, half):
    offs = np.arange(-half, half + 1)
    rows = np.repeat(np.arange(n), len(offs))
    cols = rows + np.tile(offs, n)
    keep = (cols >= 0) & (cols < n)
    rows, cols = rows[keep], cols[keep]
    vals = np.where(rows == cols, 2.0 * half + 1.0, -rng.uniform(0.1, 1.0, len(rows)))
    return rows, cols, vals


def poisson(k):
    n = k * k
    idx = np.arange(n)
    i, j = idx // k, idx % k
    rows, cols = [idx], [idx]
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        ok = (i + di >= 0) & (i + di < k) & (j + dj >= 0) & (j + dj < k)
        rows.append(idx[ok])
        cols.append(((i + di) * k + j + dj)[ok])
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    return rows, cols, np.where(rows == cols, 4.0, -1.0)


def blocks(rng, n, size):
    rows, cols = [], []
    for start in range(0, n, size):
        b = np.arange(start, min(start + size, n))
        rows.append(np.repeat(b, len(b)))
        cols.append(np.tile(b, len(b)))
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    return rows, cols, rng.uniform(-1, 1, len(rows)) + np.where(rows == cols, size, 0.0)


def uniform(rng, n, per_row):
    rows = np.repeat(np.arange(n), per_row)
    cols = rng.integers(0, n, len(rows))
    return dedupe(n, rows, cols, rng.uniform(-1, 1, len(rows)))


def power_law(rng, n, mean):
    lengths = np.minimum(rng.zipf(1.8, n) * max(1, mean // 2), n // 40)
    rows = np.repeat(np.arange(n), lengths)
    cols = rng.integers(0, n, len(rows))
    return dedupe(n, rows, cols, rng.uniform(-1, 1, len(rows)))


def dense_rows(rng, n, per_row, dense):
    rows, cols, vals = uniform(rng, n, per_row)
    extra = rng.choice(n, dense, replace=False)
    r = np.repeat(extra, n // 2)
    c = rng.integers(0, n, len(r))
    rows, cols, vals = (np.concatenate([rows, r]), np.concatenate([cols, c]),
                        np.concatenate([vals, rng.uniform(-1, 1, len(r))]))
    return dedupe(n, rows, cols, vals)


def main():
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("out_dir")
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    specs = []
    for n in (2000, 20000, 60000):
        for half in (1, 3, 8):
            specs.append((f"banded_{n}_{half}", n, banded(rng, n, half)))
    for k in (40, 120, 240):
        specs.append((f"poisson_{k * k}", k * k, poisson(k)))
    for n in (3000, 30000):
        for size in (4, 16):
            specs.append((f"blocks_{n}_{size}", n, blocks(rng, n, size)))
    for n in (1000, 10000, 50000):
        for per_row in (3, 12, 40):
            specs.append((f"uniform_{n}_{per_row}", n, uniform(rng, n, per_row)))
    for n in (5000, 40000):
        for mean in (4, 16):
            specs.append((f"powerlaw_{n}_{mean}", n, power_law(rng, n, mean)))
    for n in (4000, 30000):
        specs.append((f"denserows_{n}", n, dense_rows(rng, n, 6, 4)))
    for name, n, (rows, cols, vals) in specs:
        write(os.path.join(args.out_dir, name + ".mtx"), n, rows, cols, vals)
        print(f"{name}: n={n} nnz={len(rows)}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Produce the high-precision Verner 9(8) tableau shipped in data/verner98.tab.

Verner publishes the "efficient" 16-stage 9(8) pair (RKV98.IIa, 2024 revision,
https://www.sfu.ca/~jverner/) with coefficients that are exact surds in
sqrt(6).  The only transcription reachable from the build environment carries
them rounded to binary64 (the Rust crate ``differential-equations``,
``ButcherTableau::rkv988e``).  This script takes those rounded values and
projects them back onto the order conditions (order 9 for the propagating
weights, order 8 for the embedded ones) with a chord Gauss-Newton iteration
in 60-digit arithmetic.  The sparsity pattern of the tableau is kept fixed.
The result is an exact 9(8) pair (residuals < 1e-45) that agrees with
Verner's coefficients to about 1e-15.

Usage:
    refine_tableau.py RAW_RUST_LINES OUT.tab
where RAW_RUST_LINES holds the ``c[i] = ..;`` / ``a[i][j] = ..;`` /
``b[i] = ..;`` / ``bh[i] = ..;`` lines of the crate's rkv988e body.
"""

import re
import sys

import mpmath as mp
import numpy as np

STAGES = 16
DIGITS = 60
mp.mp.dps = DIGITS + 10


def parse_raw(path):
    c = [0.0] * STAGES
    a = {}
    b = [0.0] * STAGES
    bh = [0.0] * STAGES
    pat = re.compile(r"^\s*(c|a|b|bh)\[(\d+)\](?:\[(\d+)\])?\s*=\s*([-0-9._eE+]+);")
    for line in open(path):
        m = pat.match(line)
        if not m:
            continue
        name, i, j, val = m.group(1), int(m.group(2)), m.group(3), m.group(4)
        val = float(val.replace("_", ""))
        if i >= STAGES:
            continue
        if name == "a":
            if val != 0.0:
                a[(i, int(j))] = val
        elif name == "c":
            c[i] = val
        elif name == "b":
            b[i] = val
        else:
            bh[i] = val
    return c, a, b, bh


def rooted_trees(max_order):
    """Canonical rooted trees as sorted tuples of children, grouped by order."""
    by_order = {1: [()]}
    for n in range(2, max_order + 1):
        found = set()
        # partitions of n-1 nodes into child subtrees
        def build(remaining, min_key, acc):
            if remaining == 0:
                found.add(tuple(sorted(acc)))
                return
            for k in range(1, remaining + 1):
                for t in by_order[k]:
                    key = (k, t)
                    if min_key is not None and key < min_key:
                        continue
                    build(remaining - k, key, acc + [t])
        build(n - 1, None, [])
        by_order[n] = sorted(found)
    return by_order


def order_of(t):
    return 1 + sum(order_of(ch) for ch in t)


def density(t):
    g = order_of(t)
    for ch in t:
        g *= density(ch)
    return g


class Residual:
    def __init__(self, trees9, trees8):
        self.trees9 = trees9
        self.trees8 = trees8
        self.gamma9 = [density(t) for t in trees9]
        self.gamma8 = [density(t) for t in trees8]

    def stage_vectors(self, A, one, mul, matvec):
        memo = {}

        def phi(t):
            if t in memo:
                return memo[t]
            v = one
            for ch in t:
                v = mul(v, matvec(A, phi(ch)))
            memo[t] = v
            return v

        return phi


def residual_np(x, layout, res, dtype):
    A = np.zeros((STAGES, STAGES), dtype=dtype)
    b = np.zeros(STAGES, dtype=dtype)
    bh = np.zeros(STAGES, dtype=dtype)
    for k, (kind, i, j) in enumerate(layout):
        if kind == "a":
            A[i, j] = x[k]
        elif kind == "b":
            b[i] = x[k]
        else:
            bh[i] = x[k]
    phi = res.stage_vectors(A, np.ones(STAGES, dtype=dtype), lambda u, v: u * v, lambda M, v: M @ v)
    out = [b @ phi(t) - 1.0 / g for t, g in zip(res.trees9, res.gamma9)]
    out += [bh @ phi(t) - 1.0 / g for t, g in zip(res.trees8, res.gamma8)]
    return np.array(out)


def residual_mp(x, layout, res):
    A = [[mp.mpf(0)] * STAGES for _ in range(STAGES)]
    b = [mp.mpf(0)] * STAGES
    bh = [mp.mpf(0)] * STAGES
    for k, (kind, i, j) in enumerate(layout):
        if kind == "a":
            A[i][j] = x[k]
        elif kind == "b":
            b[i] = x[k]
        else:
            bh[i] = x[k]

    def matvec(M, v):
        return [mp.fsum(M[i][j] * v[j] for j in range(i)) for i in range(STAGES)]

    def mul(u, v):
        return [p * q for p, q in zip(u, v)]

    phi = res.stage_vectors(A, [mp.mpf(1)] * STAGES, mul, matvec)
    out = [mp.fsum(bi * pi for bi, pi in zip(b, phi(t))) - mp.mpf(1) / g
           for t, g in zip(res.trees9, res.gamma9)]
    out += [mp.fsum(bi * pi for bi, pi in zip(bh, phi(t))) - mp.mpf(1) / g
            for t, g in zip(res.trees8, res.gamma8)]
    return out


def jacobian(x, layout, res):
    h = 1e-30
    cols = []
    for k in range(len(x)):
        xc = np.array(x, dtype=np.complex128)
        xc[k] += 1j * h
        cols.append(residual_np(xc, layout, res, np.complex128).imag / h)
    return np.array(cols).T


def main(raw_path, out_path):
    c, a, b, bh = parse_raw(raw_path)
    trees = rooted_trees(9)
    counts = [len(trees[n]) for n in range(1, 10)]
    assert counts == [1, 1, 2, 4, 9, 20, 48, 115, 286], counts
    all9 = [t for n in range(1, 10) for t in trees[n]]
    all8 = [t for n in range(1, 9) for t in trees[n]]

    # Decide which weight vector carries order 9.
    res_probe = Residual(all9, all9)
    layout = [("a", i, j) for (i, j) in sorted(a)]
    layout += [("b", i, None) for i in range(STAGES) if b[i] != 0.0]
    layout += [("h", i, None) for i in range(STAGES) if bh[i] != 0.0]
    x0 = [a[(i, j)] for (i, j) in sorted(a)] + [v for v in b if v != 0.0] + [v for v in bh if v != 0.0]
    r = residual_np(np.array(x0), layout, res_probe, np.float64)
    nb = len(all9)
    err_b, err_bh = np.max(np.abs(r[:nb])), np.max(np.abs(r[nb:]))
    print(f"max order-9 residual: b {err_b:.2e}  bh {err_bh:.2e}")
    if err_bh < err_b:
        b, bh = bh, b
        layout = [("a", i, j) for (i, j) in sorted(a)]
        layout += [("b", i, None) for i in range(STAGES) if b[i] != 0.0]
        layout += [("h", i, None) for i in range(STAGES) if bh[i] != 0.0]
        x0 = [a[(i, j)] for (i, j) in sorted(a)] + [v for v in b if v != 0.0] + [v for v in bh if v != 0.0]

    res = Residual(all9, all8)
    x = [mp.mpf(v) for v in x0]
    J = jacobian(np.array(x0), layout, res)
    U, S, Vt = np.linalg.svd(J, full_matrices=False)
    rank = int(np.sum(S > 1e-13 * S[0]))
    print(f"unknowns {len(x)}, conditions {J.shape[0]}, numerical rank {rank}")
    Sinv = np.where(S > 1e-13 * S[0], 1.0 / S, 0.0)
    pinv = (Vt.T * Sinv) @ U.T
    for it in range(40):
        r = residual_mp(x, layout, res)
        rmax = max(abs(v) for v in r)
        print(f"iter {it}: max residual {mp.nstr(rmax, 5)}")
        if rmax < mp.mpf(10) ** (-(DIGITS - 5)):
            break
        # chord step: the double-precision pseudo-inverse applied to an
        # extended-precision residual, split in two halves to keep its bits
        hi = np.array([float(v) for v in r])
        lo = np.array([float(v - mp.mpf(float(v))) for v in r])
        step_hi = pinv @ hi
        step_lo = pinv @ lo
        x = [xi - mp.mpf(float(sh)) - mp.mpf(float(sl)) for xi, sh, sl in zip(x, step_hi, step_lo)]
    else:
        raise SystemExit("refinement did not converge")

    drift = max(abs(float(xi) - x0i) for xi, x0i in zip(x, x0))
    print(f"max change from binary64 input: {drift:.2e}")

    A = [[mp.mpf(0)] * STAGES for _ in range(STAGES)]
    bw = [mp.mpf(0)] * STAGES
    bhw = [mp.mpf(0)] * STAGES
    for k, (kind, i, j) in enumerate(layout):
        if kind == "a":
            A[i][j] = x[k]
        elif kind == "b":
            bw[i] = x[k]
        else:
            bhw[i] = x[k]
    cw = [mp.fsum(A[i][:i]) for i in range(STAGES)]
    cdrift = max(abs(float(cw[i]) - c[i]) for i in range(STAGES))
    print(f"max node change: {cdrift:.2e}")

    fmt = lambda v: mp.nstr(v, 50, min_fixed=0, max_fixed=0) if v != 0 else "0"
    with open(out_path, "w") as out:
        out.write("# Verner efficient 9(8) explicit Runge-Kutta pair (RKV98.IIa efficient, 16 stages).\n")
        out.write("# Source: J. H. Verner, https://www.sfu.ca/~jverner/ ; binary64 transcription refined\n")
        out.write("# onto the order conditions at 60 digits by scripts/refine_tableau.py.\n")
        out.write("# Layout: header 'stages p phat', then keyed rows: 'c i v', 'a i j v', 'b i v', 'bhat i v'.\n")
        out.write("# Entries of a that are not listed are zero.\n")
        out.write(f"{STAGES} 9 8\n")
        for i in range(STAGES):
            out.write(f"c {i} {fmt(cw[i])}\n")
        for i in range(STAGES):
            for j in range(i):
                if A[i][j] != 0:
                    out.write(f"a {i} {j} {fmt(A[i][j])}\n")
        for i in range(STAGES):
            out.write(f"b {i} {fmt(bw[i])}\n")
        for i in range(STAGES):
            out.write(f"bhat {i} {fmt(bhw[i])}\n")
    print(f"wrote {out_path}")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])

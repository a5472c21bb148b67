"""Pure-Python kernel backend.

Operates on flat row-major ``array('d')`` buffers and mirrors the compiled
backend in :mod:`sparsalloc._kernels._core` exactly (same signatures, same
operation order, so results agree to rounding). Kept free of third-party
imports so the package runs anywhere; it is 50-100x slower than the
compiled core on desk-scale matrices.
"""

import math
from array import array


def matmul(a, ar: int, ac: int, b, bc: int):
    """Row-major product of (ar x ac) and (ac x bc)."""
    out = array("d", bytes(8 * ar * bc))
    for i in range(ar):
        abase = i * ac
        obase = i * bc
        for k in range(ac):
            aik = a[abase + k]
            if aik == 0.0:
                continue
            bbase = k * bc
            for j in range(bc):
                out[obase + j] += aik * b[bbase + j]
    return out


def frob_norm_sq(a) -> float:
    acc = 0.0
    for v in a:
        acc += v * v
    return acc


def frob_diff_sq(a, b) -> float:
    acc = 0.0
    for x, y in zip(a, b):
        d = x - y
        acc += d * d
    return acc


def row_sq_norms(x, rows: int, cols: int):
    out = array("d", bytes(8 * rows))
    for i in range(rows):
        base = i * cols
        acc = 0.0
        for j in range(cols):
            v = x[base + j]
            acc += v * v
        out[i] = acc
    return out


def elementwise_mul(a, b):
    out = array("d", bytes(8 * len(a)))
    for i in range(len(a)):
        out[i] = a[i] * b[i]
    return out


def abs_values(a):
    out = array("d", bytes(8 * len(a)))
    for i in range(len(a)):
        out[i] = abs(a[i])
    return out


def wanda_scores(w, wr: int, wc: int, xnorms):
    """Score |w[i,j]| * xnorms[j]; xnorms holds per-input-feature 2-norms."""
    out = array("d", bytes(8 * wr * wc))
    for i in range(wr):
        base = i * wc
        for j in range(wc):
            out[base + j] = abs(w[base + j]) * xnorms[j]
    return out


def relu(a):
    out = array("d", bytes(8 * len(a)))
    for i in range(len(a)):
        v = a[i]
        if v > 0.0:
            out[i] = v
    return out


def sym_eigvals(a, n: int, max_sweeps: int = 100):
    """Eigenvalues of a symmetric n x n matrix, ascending, by cyclic Jacobi.

    Sweeps stop when the off-diagonal Frobenius norm falls below
    1e-14 times the matrix Frobenius norm. Adequate for the desk-scale
    sizes this package targets (n <= 512).
    """
    m = array("d", a)
    if n == 1:
        return array("d", [m[0]])

    scale_sq = 0.0
    for v in m:
        scale_sq += v * v
    if scale_sq == 0.0:
        return array("d", bytes(8 * n))
    stop_sq = (1e-14 * math.sqrt(scale_sq)) ** 2

    for _ in range(max_sweeps):
        off_sq = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                v = m[p * n + q]
                off_sq += 2.0 * v * v
        if off_sq <= stop_sq:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p * n + q]
                if apq == 0.0:
                    continue
                app = m[p * n + p]
                aqq = m[q * n + q]
                theta = (aqq - app) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                m[p * n + p] = app - t * apq
                m[q * n + q] = aqq + t * apq
                m[p * n + q] = 0.0
                m[q * n + p] = 0.0
                for r in range(n):
                    if r == p or r == q:
                        continue
                    arp = m[r * n + p]
                    arq = m[r * n + q]
                    m[r * n + p] = c * arp - s * arq
                    m[p * n + r] = m[r * n + p]
                    m[r * n + q] = s * arp + c * arq
                    m[q * n + r] = m[r * n + q]

    eig = sorted(m[i * n + i] for i in range(n))
    return array("d", eig)

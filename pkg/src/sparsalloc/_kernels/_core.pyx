# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel backend. Mirrors sparsalloc._kernels._py exactly."""

from cpython cimport array
import array

from libc.math cimport fabs, sqrt

cdef array.array _DOUBLE_TEMPLATE = array.array("d", [])


cdef array.array _zeros(Py_ssize_t n):
    return array.clone(_DOUBLE_TEMPLATE, n, zero=True)


def matmul(double[::1] a, int ar, int ac, double[::1] b, int bc):
    """Row-major product of (ar x ac) and (ac x bc)."""
    cdef array.array out_arr = _zeros(ar * bc)
    cdef double[::1] out = out_arr
    cdef int i, j, k
    cdef double aik
    with nogil:
        for i in range(ar):
            for k in range(ac):
                aik = a[i * ac + k]
                if aik == 0.0:
                    continue
                for j in range(bc):
                    out[i * bc + j] += aik * b[k * bc + j]
    return out_arr


def frob_norm_sq(double[::1] a):
    cdef double acc = 0.0
    cdef Py_ssize_t i
    with nogil:
        for i in range(a.shape[0]):
            acc += a[i] * a[i]
    return acc


def frob_diff_sq(double[::1] a, double[::1] b):
    cdef double acc = 0.0, d
    cdef Py_ssize_t i, n = a.shape[0]
    if b.shape[0] < n:
        n = b.shape[0]
    with nogil:
        for i in range(n):
            d = a[i] - b[i]
            acc += d * d
    return acc


def row_sq_norms(double[::1] x, int rows, int cols):
    cdef array.array out_arr = _zeros(rows)
    cdef double[::1] out = out_arr
    cdef int i, j
    cdef double acc, v
    with nogil:
        for i in range(rows):
            acc = 0.0
            for j in range(cols):
                v = x[i * cols + j]
                acc += v * v
            out[i] = acc
    return out_arr


def elementwise_mul(double[::1] a, double[::1] b):
    cdef Py_ssize_t n = a.shape[0]
    cdef array.array out_arr = _zeros(n)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            out[i] = a[i] * b[i]
    return out_arr


def abs_values(double[::1] a):
    cdef Py_ssize_t n = a.shape[0]
    cdef array.array out_arr = _zeros(n)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            out[i] = fabs(a[i])
    return out_arr


def wanda_scores(double[::1] w, int wr, int wc, double[::1] xnorms):
    """Score |w[i,j]| * xnorms[j]; xnorms holds per-input-feature 2-norms."""
    cdef array.array out_arr = _zeros(wr * wc)
    cdef double[::1] out = out_arr
    cdef int i, j
    with nogil:
        for i in range(wr):
            for j in range(wc):
                out[i * wc + j] = fabs(w[i * wc + j]) * xnorms[j]
    return out_arr


def relu(double[::1] a):
    cdef Py_ssize_t n = a.shape[0]
    cdef array.array out_arr = _zeros(n)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double v
    with nogil:
        for i in range(n):
            v = a[i]
            if v > 0.0:
                out[i] = v
    return out_arr


def sym_eigvals(double[::1] a, int n, int max_sweeps=100):
    """Eigenvalues of a symmetric n x n matrix, ascending, by cyclic Jacobi."""
    cdef array.array work = array.copy(array.array("d", a))
    cdef double[::1] m = work
    cdef array.array out_arr = _zeros(n)
    cdef double[::1] out = out_arr
    cdef int p, q, r, sweep, i
    cdef double scale_sq, stop_sq, off_sq, v
    cdef double apq, app, aqq, theta, t, c, s, arp, arq

    if n == 1:
        out[0] = m[0]
        return out_arr

    scale_sq = 0.0
    with nogil:
        for i in range(n * n):
            scale_sq += m[i] * m[i]
    if scale_sq == 0.0:
        return out_arr
    stop_sq = 1e-14 * sqrt(scale_sq)
    stop_sq = stop_sq * stop_sq

    with nogil:
        for sweep in range(max_sweeps):
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
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                    c = 1.0 / sqrt(t * t + 1.0)
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

        for i in range(n):
            out[i] = m[i * n + i]

    out_list = sorted(out_arr)
    for i in range(n):
        out[i] = out_list[i]
    return out_arr

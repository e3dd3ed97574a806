# cython: language_level=3
"""Compiled gate-application kernel.

Same contract as _fallback.apply_gate: big-endian qubit order, gate local
index bit 0 (MSB) corresponds to targets[0].

The state is processed as contiguous segments of non-target low bits, with
real/imaginary parts split so the inner loop vectorizes.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def apply_gate(vec, gate, targets, int n):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] v = np.ascontiguousarray(vec, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] g = np.ascontiguousarray(gate, dtype=np.complex128)
    cdef int k = len(targets)
    cdef Py_ssize_t dim = 1 << n
    cdef Py_ssize_t sub = 1 << k
    if v.shape[0] != dim:
        raise ValueError("vector length does not match qubit count")
    if g.shape[0] != sub or g.shape[1] != sub:
        raise ValueError("gate dimension does not match target count")

    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.zeros(dim, dtype=np.complex128)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] offs = np.zeros(sub, dtype=np.int64)

    cdef Py_ssize_t i, j, p, r, b, base
    cdef long long tmask = 0
    for i in range(k):
        tmask |= 1LL << (n - 1 - <long long>targets[i])
    for j in range(sub):
        base = 0
        for i in range(k):
            if (j >> (k - 1 - i)) & 1:
                base |= 1LL << (n - 1 - <long long>targets[i])
        offs[j] = base

    # contiguous segment: trailing bit positions free of targets
    cdef Py_ssize_t lbits = 0
    while lbits < n and not (tmask >> lbits) & 1:
        lbits += 1
    cdef Py_ssize_t seg = 1 << lbits

    # enumerate the remaining non-target bit positions
    rest = [b for b in range(lbits, n) if not (tmask >> b) & 1]
    cdef Py_ssize_t nouter = 1 << len(rest)
    rvals = np.arange(nouter, dtype=np.int64)
    bases_np = np.zeros(nouter, dtype=np.int64)
    for b in range(len(rest)):
        bases_np |= ((rvals >> b) & 1) << rest[b]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] bases = bases_np

    cdef double* vd = <double*> v.data
    cdef double* od = <double*> out.data
    cdef double gr, gi, ar, ai
    cdef Py_ssize_t src, dst
    for r in range(nouter):
        base = bases[r]
        for i in range(sub):
            dst = 2 * (base + offs[i])
            for j in range(sub):
                gr = g[i, j].real
                gi = g[i, j].imag
                if gr == 0.0 and gi == 0.0:
                    continue
                src = 2 * (base + offs[j])
                for p in range(seg):
                    ar = vd[src + 2 * p]
                    ai = vd[src + 2 * p + 1]
                    od[dst + 2 * p] += gr * ar - gi * ai
                    od[dst + 2 * p + 1] += gr * ai + gi * ar
    return out

#cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo kernel (preferred backend).

Per-element translation of ``_mc_numpy.run_batch`` drawing from the same
``numpy.random.Generator`` bit stream through numpy's C distribution API.
The draw-order contract documented in ``_mc_numpy`` is normative; any
change there must be mirrored here, and ``tests/test_montecarlo.py``
asserts the two backends are bit-identical.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport sqrt
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    binomial_t,
    random_binomial,
    random_normal,
    random_standard_uniform,
)

cnp.import_array()


def run_batch(
    object gen,
    double[:, ::1] q,
    cnp.int64_t[:, ::1] sched,
    cnp.int8_t[:, ::1] thr_kind,
    double[:, ::1] thr_val,
    double prior,
    double msi_mean,
    double msi_sigma,
    double pin_pd,
    double pin_pfa,
    int n_blocks,
    double clamp,
):
    """Simulate one batch; returns int8 bits of shape (P+1, K, n_blocks)."""
    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(
        gen.bit_generator.capsule, "BitGenerator"
    )
    cdef Py_ssize_t P = thr_kind.shape[0]
    cdef Py_ssize_t K = thr_kind.shape[1]
    cdef Py_ssize_t B = n_blocks

    bits_arr = np.zeros((P + 1, K, B), dtype=np.int8)
    cdef cnp.int8_t[:, :, ::1] bits = bits_arr
    count_arr = np.zeros(B, dtype=np.float64)
    acc_arr = np.zeros(B, dtype=np.float64)
    cdef double[::1] count = count_arr
    cdef double[::1] acc = acc_arr

    cdef binomial_t cache
    cache.has_binomial = 0

    cdef Py_ssize_t j, p, m, b
    cdef cnp.int8_t kind
    cdef cnp.int64_t n
    cdef double qm, mean_add, u, thr, var

    with gen.bit_generator.lock:
        # 1. source bits, symbol-major
        for j in range(K):
            for b in range(B):
                bits[0, j, b] = 1 if random_standard_uniform(rng) < prior else 0

        # 2. receivers, slot-major then chain order
        for j in range(1, K + 1):
            for p in range(1, P + 1):
                kind = thr_kind[p - 1, j - 1]
                if kind == 3:
                    for b in range(B):
                        u = random_standard_uniform(rng)
                        if bits[0, j - 1, b] == 1:
                            bits[p, j - 1, b] = 1 if u < pin_pd else 0
                        else:
                            bits[p, j - 1, b] = 1 if u < pin_pfa else 0
                elif kind == 1:
                    for b in range(B):
                        bits[p, j - 1, b] = 0
                elif kind == 2:
                    for b in range(B):
                        bits[p, j - 1, b] = 1
                else:
                    for b in range(B):
                        count[b] = 0.0
                        acc[b] = msi_mean
                    for m in range(j):
                        n = sched[p - 1, j + p - 2 - m]
                        qm = q[p - 1, m]
                        if n == 0 or qm == 0.0:
                            continue
                        mean_add = n * qm
                        for b in range(B):
                            if bits[p - 1, j - m - 1, b] == 1:
                                count[b] += <double> random_binomial(rng, qm, n, &cache)
                                acc[b] += mean_add
                    for b in range(B):
                        count[b] += random_normal(rng, msi_mean, msi_sigma)
                    for b in range(B):
                        var = acc[b] if acc[b] > clamp else clamp
                        count[b] += random_normal(rng, 0.0, sqrt(var))
                    thr = thr_val[p - 1, j - 1]
                    for b in range(B):
                        bits[p, j - 1, b] = 1 if count[b] > thr else 0
    return bits_arr

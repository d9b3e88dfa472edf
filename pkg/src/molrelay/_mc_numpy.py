"""Pure-numpy Monte Carlo kernel (fallback backend).

This module and ``_mc_core.pyx`` implement the *same* simulation under a
shared draw-order contract so that, given the same ``numpy.random.Generator``
state, both produce bit-identical results.  numpy's vectorized samplers
consume the underlying bit stream exactly like per-element C calls (verified
for ``random``, ``normal`` -- scalar and per-element scale -- and
``binomial``), which is what makes the contract implementable on both sides.

Draw-order contract, per batch of B blocks (one block = K source symbols
crossing P receiving nodes; node p's window for symbol j is absolute slot
j + p - 1):

1. Source bits: K * B uniforms, symbol-major (all blocks of symbol 1, then
   symbol 2, ...); bit = (u < prior).
2. For j = 1..K, then p = 1..P (receivers in chain order):
   a. pinned node (kind 3): B uniforms, one per block; decision =
      (u < pin_pd) if the block's source bit is 1 else (u < pin_pfa).
   b. degenerate rule (kind 1/2): no draws; decision constant.
   c. thresholded node (kind 0), in this exact order:
      - for m = 0..j-1 (m = 0 is the current-symbol signal, then ISI lags
        ascending): one Binomial(n, q_m) per block whose transmitter bit for
        symbol j - m is 1, blocks ascending; the term is skipped entirely
        (no draws, all blocks) when n == 0 or q_m == 0.
      - B Normal(msi_mean, msi_sigma) multi-source interference draws.
      - B Normal(0, sigma_b) counting-error draws, where sigma_b^2 is the
        expected count conditioned on the block's realized bits
        (msi_mean + sum over drawn terms of n q_m), clamped at ``clamp``.
      Decision = (count > threshold), ties to 0.
3. Nothing else consumes randomness.

The kernel returns the full bit tensor; trial counting happens in the
driver and consumes no randomness.
"""

from __future__ import annotations

import numpy as np


def run_batch(
    gen: np.random.Generator,
    q: np.ndarray,          # float64 (P, K)   per-hop arrival probabilities by lag
    sched: np.ndarray,      # int64  (P, K+N)  per-node emission counts by absolute slot
    thr_kind: np.ndarray,   # int8   (P, K)    0 threshold / 1 always-0 / 2 always-1 / 3 pinned
    thr_val: np.ndarray,    # float64(P, K)    threshold gamma' where kind == 0
    prior: float,
    msi_mean: float,
    msi_sigma: float,
    pin_pd: float,
    pin_pfa: float,
    n_blocks: int,
    clamp: float,
) -> np.ndarray:
    """Simulate one batch; returns int8 bits of shape (P+1, K, n_blocks).

    Row 0 holds the source bits; row p the decisions of receiver p.
    """
    P, K = thr_kind.shape
    B = n_blocks
    bits = np.zeros((P + 1, K, B), dtype=np.int8)
    bits[0] = gen.random((K, B)) < prior

    count = np.empty(B)
    for j in range(1, K + 1):
        for p in range(1, P + 1):
            kind = thr_kind[p - 1, j - 1]
            if kind == 3:
                u = gen.random(B)
                src = bits[0, j - 1] == 1
                dec = np.where(src, u < pin_pd, u < pin_pfa)
            elif kind == 1:
                dec = np.zeros(B, dtype=bool)
            elif kind == 2:
                dec = np.ones(B, dtype=bool)
            else:
                count[:] = 0.0
                acc = np.full(B, msi_mean, dtype=np.float64)
                for m in range(j):
                    n = int(sched[p - 1, j + p - 2 - m])
                    qm = float(q[p - 1, m])
                    if n == 0 or qm == 0.0:
                        continue
                    tb = bits[p - 1, j - m - 1] == 1
                    nsel = int(tb.sum())
                    if nsel > 0:
                        count[tb] += gen.binomial(n, qm, size=nsel)
                        acc[tb] += n * qm
                count += gen.normal(msi_mean, msi_sigma, size=B)
                count += gen.normal(0.0, np.sqrt(np.maximum(acc, clamp)))
                dec = count > thr_val[p - 1, j - 1]
            bits[p, j - 1] = dec
    return bits

"""Monte Carlo validation of the analytic chain model.

The simulator samples the physical channel model directly -- per-molecule
binomial transport (not the Gaussian approximation the analysis uses),
Gaussian multi-source interference, and Gaussian counting error whose
variance is the expected count given the realized bits -- then applies the
*analytic* per-slot decision rules at every node.  Agreement between its
empirical rates and the closed-form chain recursion is therefore evidence
for the Gaussian-approximation step itself.

Frames are source symbols.  They are simulated in independent blocks of K
symbols (one block spans K + N physical slots), reproducing the per-slot
transient ISI structure the analysis averages over; a trailing partial
block is simulated whole but only its first symbols are counted.

Determinism and merging: blocks are packed into fixed-size batches; batch
``i`` draws from ``PCG64(SeedSequence(seed, spawn_key=(i,)))``.  Batch
results are integer counts, so any partition of batches across workers
merges to identical totals, and the same seed always yields a bit-identical
report regardless of worker count or backend (the compiled and numpy
kernels share a draw-order contract; see ``_mc_numpy``).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .performance import ChainConfig, chain_profiles, chain_slot_eval

# Backend selection: compiled kernel if the extension built, else numpy.
# MOLRELAY_MC_BACKEND=python|compiled forces the choice; it is read on every
# simulation call, so flipping it mid-process switches kernels.
from . import _mc_numpy as _numpy_kernel

try:
    from . import _mc_core as _compiled_kernel
except ImportError:
    _compiled_kernel = None

BLOCKS_PER_BATCH = 1024
COUNTING_VAR_CLAMP = 1e-9
_Z95 = 1.959963984540054  # two-sided 95% normal quantile


def _select_kernel():
    forced = os.environ.get("MOLRELAY_MC_BACKEND", "").strip().lower()
    if forced == "python":
        return _numpy_kernel, "python"
    if forced == "compiled":
        if _compiled_kernel is None:
            raise ParameterError(
                "MOLRELAY_MC_BACKEND=compiled but the compiled kernel is unavailable"
            )
        return _compiled_kernel, "compiled"
    if forced not in ("", "auto"):
        raise ParameterError(
            f"unrecognized MOLRELAY_MC_BACKEND value: {forced!r}"
        )
    if _compiled_kernel is not None:
        return _compiled_kernel, "compiled"
    return _numpy_kernel, "python"


def mc_backend() -> str:
    """Name of the kernel a simulation started now would use."""
    return _select_kernel()[1]


def wilson_halfwidth(successes: int, trials: int, z: float = _Z95) -> float:
    """Half-width of the Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return math.nan
    phat = successes / trials
    denom = 1.0 + z * z / trials
    return (
        z
        * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials))
        / denom
    )


@dataclass(frozen=True)
class SimConfig:
    """One simulation run: a chain, a frame budget, and a seed."""

    chain: ChainConfig
    frames: int
    seed: int
    workers: int = 1

    def __post_init__(self):
        if self.frames < 1:
            raise ParameterError(f"frames must be >= 1, got {self.frames}")
        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class SimReport:
    """Empirical chain performance with Wilson 95% half-widths.

    ``node_pd``/``node_pfa`` run relay 1 .. relay N, destination, all
    source-relative; ``pd``/``pfa``/``pe`` are the destination's.
    """

    frames: int
    pe: float
    pe_halfwidth: float
    pd: float
    pd_halfwidth: float
    pfa: float
    pfa_halfwidth: float
    node_pd: tuple[float, ...]
    node_pfa: tuple[float, ...]
    backend: str


def _kernel_inputs(chain: ChainConfig):
    """Precompute the per-node analytic decision rules and channel tables."""
    profiles = chain_profiles(chain)
    P = len(chain.hops)
    K = chain.num_slots
    N = chain.num_relays
    q = np.zeros((P, K))
    for p in range(P):
        q[p, : len(profiles[p].q)] = profiles[p].q
    sched = np.zeros((P, K + N), dtype=np.int64)
    for p in range(P):
        sched[p] = chain.emissions[p].counts[: K + N]
    thr_kind = np.zeros((P, K), dtype=np.int8)
    thr_val = np.zeros((P, K))
    for j in range(1, K + 1):
        ev = chain_slot_eval(profiles, chain, j)
        for p, (_m, entry, _odds, _pd, _pfa) in enumerate(ev, start=1):
            if entry is None:  # pinned relay
                thr_kind[p - 1, j - 1] = 3
            elif entry.is_degenerate:
                thr_kind[p - 1, j - 1] = 1 if entry.constant == 0 else 2
            else:
                thr_val[p - 1, j - 1] = entry.value
    pin_pd, pin_pfa = chain.pinned_relay or (0.0, 0.0)
    return {
        "q": q,
        "sched": sched,
        "thr_kind": thr_kind,
        "thr_val": thr_val,
        "prior": chain.prior,
        "msi_mean": chain.msi.mean,
        "msi_sigma": chain.msi.sigma,
        "pin_pd": pin_pd,
        "pin_pfa": pin_pfa,
        "clamp": COUNTING_VAR_CLAMP,
    }


def _count_bits(bits: np.ndarray, limits: np.ndarray):
    """Trial counts from one batch's bit tensor, honoring per-block limits."""
    P1, K, _B = bits.shape
    counted = np.arange(1, K + 1)[:, None] <= limits[None, :]
    x = bits[0] == 1
    n1 = int(np.count_nonzero(x & counted))
    n0 = int(np.count_nonzero(~x & counted))
    k1 = np.zeros(P1 - 1, dtype=np.int64)
    k0 = np.zeros(P1 - 1, dtype=np.int64)
    for p in range(1, P1):
        d = bits[p] == 1
        k1[p - 1] = np.count_nonzero(d & x & counted)
        k0[p - 1] = np.count_nonzero(d & ~x & counted)
    return n1, n0, k1, k0


def _run_one_batch(args):
    seed, batch_index, n_blocks, limits, inputs, backend = args
    kernel = _compiled_kernel if backend == "compiled" else _numpy_kernel
    gen = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(batch_index,)))
    )
    bits = kernel.run_batch(
        gen,
        inputs["q"],
        inputs["sched"],
        inputs["thr_kind"],
        inputs["thr_val"],
        inputs["prior"],
        inputs["msi_mean"],
        inputs["msi_sigma"],
        inputs["pin_pd"],
        inputs["pin_pfa"],
        n_blocks,
        inputs["clamp"],
    )
    return _count_bits(bits, limits)


def simulate_chain(cfg: SimConfig) -> SimReport:
    """Run the chain simulator and report empirical rates with Wilson CIs."""
    chain = cfg.chain
    _, backend = _select_kernel()
    K = chain.num_slots
    n_blocks = -(-cfg.frames // K)  # ceil
    tail = cfg.frames - (n_blocks - 1) * K  # counted symbols in the last block
    inputs = _kernel_inputs(chain)

    jobs = []
    for batch_index, start in enumerate(range(0, n_blocks, BLOCKS_PER_BATCH)):
        nb = min(BLOCKS_PER_BATCH, n_blocks - start)
        limits = np.full(nb, K, dtype=np.int64)
        if start + nb == n_blocks:
            limits[-1] = tail
        jobs.append((cfg.seed, batch_index, nb, limits, inputs, backend))

    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_one_batch, jobs))
    else:
        results = [_run_one_batch(job) for job in jobs]

    n_nodes = len(chain.hops)
    n1 = n0 = 0
    k1 = np.zeros(n_nodes, dtype=np.int64)
    k0 = np.zeros(n_nodes, dtype=np.int64)
    for bn1, bn0, bk1, bk0 in results:
        n1 += bn1
        n0 += bn0
        k1 += bk1
        k0 += bk0

    trials = n1 + n0
    errors = (n1 - k1[-1]) + k0[-1]  # missed detections + false alarms at the destination
    pe = errors / trials
    pd = k1[-1] / n1 if n1 else math.nan
    pfa = k0[-1] / n0 if n0 else math.nan
    return SimReport(
        frames=cfg.frames,
        pe=float(pe),
        pe_halfwidth=wilson_halfwidth(int(errors), trials),
        pd=float(pd),
        pd_halfwidth=wilson_halfwidth(int(k1[-1]), n1),
        pfa=float(pfa),
        pfa_halfwidth=wilson_halfwidth(int(k0[-1]), n0),
        node_pd=tuple(float(k1[p] / n1) if n1 else math.nan for p in range(n_nodes)),
        node_pfa=tuple(float(k0[p] / n0) if n0 else math.nan for p in range(n_nodes)),
        backend=backend,
    )

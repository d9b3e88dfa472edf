"""Mutual information and capacity of the end-to-end binary channel.

Each source slot of a chain behaves as a binary (generally asymmetric)
channel from the transmitted bit to the destination decision, with
crossover behaviour fixed by that slot's end-to-end (pd, pfa):

    Pr{y=1 | x=1} = pd,    Pr{y=1 | x=0} = pfa.

The per-slot mutual information in bits follows directly, and the block of
K source symbols (occupying K + N physical slots end to end) carries

    I_block(beta) = (1 / (K + N)) * sum_{j=1..K} I_j(beta).

Because the prior beta enters the ISI moments and every threshold, the
capacity search re-evaluates the whole analytic pipeline at each candidate
beta: a coarse grid over {0.01, ..., 0.99} brackets the optimum and a
golden-section refinement narrows it to BETA_TOL.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from .errors import ParameterError, UninformativeRelayError
from .moments import EmissionSchedule
from .performance import ChainConfig, chain_profiles, chain_slot_eval

BETA_GRID_STEP = 0.01
BETA_TOL = 1e-4
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _plogq(p: float, q: float) -> float:
    """p * log2(p / q) with the 0 log 0 = 0 convention."""
    if p <= 0.0:
        return 0.0
    return p * math.log2(p / q)


def mutual_information(pd: float, pfa: float, prior: float) -> float:
    """Mutual information in bits of one slot's binary channel.

    Equals 1 - H2(pfa) when pd = 1 - pfa (the binary symmetric channel) and
    is zero exactly when pd = pfa (the decision is independent of the bit).
    """
    for name, p in (("pd", pd), ("pfa", pfa)):
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"{name} must be in [0, 1], got {p}")
    if not 0.0 < prior < 1.0:
        raise ParameterError(f"prior must be in (0, 1), got {prior}")
    beta = prior
    py1 = beta * pd + (1.0 - beta) * pfa
    py0 = 1.0 - py1
    info = 0.0
    if py1 > 0.0:
        info += beta * _plogq(pd, py1) + (1.0 - beta) * _plogq(pfa, py1)
    if py0 > 0.0:
        info += beta * _plogq(1.0 - pd, py0) + (1.0 - beta) * _plogq(1.0 - pfa, py0)
    # KL divergences are non-negative; clip the rounding dust so callers can
    # rely on info >= 0 exactly.
    return max(info, 0.0)


@dataclass(frozen=True)
class CapacityResult:
    """Outcome of a capacity search over the source prior."""

    capacity: float          # bits per physical slot at beta_star
    beta_star: float
    betas: np.ndarray        # coarse grid
    rates: np.ndarray        # block information rate at each grid beta


def _block_rate(cfg: ChainConfig, profiles) -> float:
    """(1 / (K + N)) sum_j I_j for one fully evaluated chain."""
    K = cfg.num_slots
    total = 0.0
    for j in range(1, K + 1):
        try:
            ev = chain_slot_eval(profiles, cfg, j)
        except UninformativeRelayError:
            # The decision machinery is undefined at this prior (a relay's
            # decisions cannot be folded into usable odds); the slot conveys
            # nothing through this model.
            continue
        _, _, _, pd, pfa = ev[-1]
        total += mutual_information(pd, pfa, cfg.prior)
    return total / (K + cfg.num_relays)


def information_rate(cfg: ChainConfig) -> float:
    """Block information rate of ``cfg`` at its own prior, bits per slot."""
    return _block_rate(cfg, chain_profiles(cfg))


def capacity(cfg: ChainConfig, beta_tol: float = BETA_TOL) -> CapacityResult:
    """Capacity of the chain over the source prior.

    Sweeps beta over a 0.01-step coarse grid, then golden-section refines
    inside the bracketing interval until its width falls below ``beta_tol``.
    The chain's own ``prior`` field is ignored (it is the search variable).
    """
    profiles = chain_profiles(cfg)
    betas = np.arange(BETA_GRID_STEP, 1.0, BETA_GRID_STEP)

    def f(beta: float) -> float:
        return _block_rate(replace(cfg, prior=float(beta)), profiles)

    rates = np.array([f(b) for b in betas])
    k = int(np.argmax(rates))
    lo = betas[max(k - 1, 0)]
    hi = betas[min(k + 1, len(betas) - 1)]

    # Golden-section refinement on [lo, hi].
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > beta_tol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
    beta_star = x1 if f1 >= f2 else x2
    best = max(f1, f2, float(rates[k]))
    if rates[k] > max(f1, f2):
        beta_star = float(betas[k])
    return CapacityResult(
        capacity=best, beta_star=float(beta_star), betas=betas, rates=rates
    )


@dataclass(frozen=True)
class BudgetPoint:
    """One allocation of the molecule budget across transmitting nodes."""

    allocation: tuple[int, ...]
    capacity: float
    beta_star: float


@dataclass(frozen=True)
class BudgetSweepResult:
    points: tuple[BudgetPoint, ...]
    best: BudgetPoint


def _compositions(total: int, parts: int, step: int):
    """All positive multiples of ``step`` with ``parts`` entries summing to total."""
    units = total // step
    for cuts in combinations(range(1, units), parts - 1):
        bounds = (0, *cuts, units)
        yield tuple((bounds[i + 1] - bounds[i]) * step for i in range(parts))


def budget_sweep(cfg: ChainConfig, total: int, step: int) -> BudgetSweepResult:
    """Capacity for every split of a molecule budget across the chain's nodes.

    Every transmitting node receives a positive multiple of ``step`` and the
    allocations sum to ``total``; each allocation replaces the chain's
    emission schedules with constant ones and runs a full capacity search.
    """
    parts = len(cfg.hops)
    if step < 1 or total % step != 0:
        raise ParameterError("total must be a positive multiple of step")
    if total < parts * step:
        raise ParameterError(
            f"budget {total} cannot give every one of {parts} nodes at least {step}"
        )
    horizon = cfg.num_slots + cfg.num_relays
    points = []
    for alloc in _compositions(total, parts, step):
        sweep_cfg = replace(
            cfg,
            emissions=tuple(
                EmissionSchedule.constant(q, horizon) for q in alloc
            ),
        )
        res = capacity(sweep_cfg)
        points.append(
            BudgetPoint(allocation=alloc, capacity=res.capacity, beta_star=res.beta_star)
        )
    best = max(points, key=lambda p: p.capacity)
    return BudgetSweepResult(points=tuple(points), best=best)

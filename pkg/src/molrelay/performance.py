"""End-to-end detection performance of direct and relayed links.

Given hypothesis moments and a threshold, a node listening directly to the
source detects and false-alarms with

    pd  = Q((gamma' - mu1) / sigma1),    pfa = Q((gamma' - mu0) / sigma0),

where Q is the Gaussian tail function.  A node listening to a relay sees a
mixture: conditioned on the source bit, the upstream relay re-emitted the
right or wrong bit with its own (pd, pfa), so with

    A = Q((gamma' - mu1) / sigma1),   B = Q((gamma' - mu0) / sigma0)

the node's source-relative rates are

    pd  = A pd_up  + B (1 - pd_up)
    pfa = A pfa_up + B (1 - pfa_up).

Chaining this recursion from the first relay to the destination yields the
end-to-end detection/false-alarm probabilities per source slot, and the
slot-averaged error probability

    P_e = mean_j [ beta (1 - pd_j) + (1 - beta) pfa_j ].

``brute_force_relayed_rates`` re-derives the destination rates by summing
over all 2^N joint relay-decision states; it exists purely as an oracle
certifying that the two-term mixture form is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import erfc

from .channel import ArrivalProfile, DiffusionLink, arrival_profile
from .detection import (
    EffectiveOdds,
    ThresholdEntry,
    effective_prior_ratio,
    optimal_threshold,
    prior_odds,
)
from .errors import ParameterError
from .moments import (
    EmissionSchedule,
    HypothesisMoments,
    MsiParams,
    hypothesis_moments,
)


def qfunc(x):
    """Gaussian tail probability Q(x) = P{N(0,1) > x}; scalar or array."""
    return 0.5 * erfc(np.asarray(x, dtype=np.float64) / math.sqrt(2.0))


def single_link_rates(
    moments: HypothesisMoments, entry: ThresholdEntry
) -> tuple[float, float]:
    """(pd, pfa) of a node that hears the source directly."""
    if entry.is_degenerate:
        return (1.0, 1.0) if entry.constant == 1 else (0.0, 0.0)
    g = entry.value
    pd = float(qfunc((g - moments.mu1) / moments.sigma1))
    pfa = float(qfunc((g - moments.mu0) / moments.sigma0))
    return pd, pfa


def relayed_rates(
    moments: HypothesisMoments,
    entry: ThresholdEntry,
    upstream: tuple[float, float],
) -> tuple[float, float]:
    """Source-relative (pd, pfa) of a node that hears a relay.

    ``upstream`` is the transmitting relay's own source-relative (pd, pfa).
    """
    a, b = single_link_rates(moments, entry)
    pd_up, pfa_up = upstream
    pd = a * pd_up + b * (1.0 - pd_up)
    pfa = a * pfa_up + b * (1.0 - pfa_up)
    return pd, pfa


def brute_force_relayed_rates(
    chain: Sequence[tuple[float, float]], a: float, b: float
) -> tuple[float, float]:
    """Destination rates by explicit enumeration of all 2^N relay states.

    Args:
        chain: source-relative (pd, pfa) of relays 1..N in order.
        a: destination Q((gamma' - mu1) / sigma1), its rate when the last
            relay re-emitted a 1.
        b: destination Q((gamma' - mu0) / sigma0), its rate when the last
            relay re-emitted a 0.

    Relay decisions are conditionally independent given the source bit, and
    the destination's count statistics depend only on the last relay's
    re-emission, so the enumerated sums must collapse to the two-term
    mixture of :func:`relayed_rates`; tests certify that collapse.
    """
    if len(chain) < 1:
        raise ParameterError("chain must contain at least one relay")
    pd = 0.0
    pfa = 0.0
    n_states = 1 << len(chain)
    n_relays = len(chain)
    for state in range(n_states):
        p_h1 = 1.0
        p_h0 = 1.0
        for n, (rel_pd, rel_pfa) in enumerate(chain, start=1):
            bit = (state >> (n_relays - n)) & 1
            p_h1 *= rel_pd if bit else (1.0 - rel_pd)
            p_h0 *= rel_pfa if bit else (1.0 - rel_pfa)
        w = a if (state & 1) else b  # last relay's bit drives the destination
        pd += w * p_h1
        pfa += w * p_h0
    return pd, pfa


def error_probability(pd: float, pfa: float, prior: float) -> float:
    """Bayes error probability beta (1 - pd) + (1 - beta) pfa."""
    if not 0.0 < prior < 1.0:
        raise ParameterError(f"prior must be in (0, 1), got {prior}")
    return prior * (1.0 - pd) + (1.0 - prior) * pfa


# ---------------------------------------------------------------------------
# Chain configuration and the per-slot evaluation engine
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainConfig:
    """A complete decode-and-forward chain.

    Attributes:
        hops: N+1 links source->relay1->...->destination, in order.
        emissions: per-transmitting-node schedules (source = node 0, then
            relays 1..N), each covering absolute slots 1..num_slots+N.
        prior: source prior beta = Pr{bit = 1}.
        msi: multi-source interference at every receiving node.
        num_slots: number K of source symbols per block.
        pinned_relay: optional fixed source-relative (pd, pfa) for relay 1,
            replacing its computed threshold and rates.
    """

    hops: tuple[DiffusionLink, ...]
    emissions: tuple[EmissionSchedule, ...]
    prior: float
    msi: MsiParams
    num_slots: int
    pinned_relay: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "hops", tuple(self.hops))
        object.__setattr__(self, "emissions", tuple(self.emissions))
        if len(self.hops) < 1:
            raise ParameterError("chain needs at least one hop")
        if len(self.emissions) != len(self.hops):
            raise ParameterError(
                f"need one emission schedule per transmitting node: "
                f"{len(self.emissions)} schedules for {len(self.hops)} hops"
            )
        if not 0.0 < self.prior < 1.0:
            raise ParameterError(f"prior must be in (0, 1), got {self.prior}")
        if self.num_slots < 1:
            raise ParameterError(f"num_slots must be >= 1, got {self.num_slots}")
        need = self.num_slots + self.num_relays
        for n, sched in enumerate(self.emissions):
            if len(sched) < need:
                raise ParameterError(
                    f"schedule of node {n} covers {len(sched)} slots, needs {need}"
                )
        if self.pinned_relay is not None:
            if self.num_relays < 1:
                raise ParameterError("pinned_relay requires at least one relay")
            pd, pfa = self.pinned_relay
            if not (0.0 <= pd <= 1.0 and 0.0 <= pfa <= 1.0):
                raise ParameterError(
                    f"pinned relay rates must be in [0, 1], got {self.pinned_relay}"
                )

    @property
    def num_relays(self) -> int:
        return len(self.hops) - 1


@dataclass(frozen=True)
class NodePerformance:
    """Source-relative detection/false-alarm rates of one node, per source slot."""

    pd: np.ndarray
    pfa: np.ndarray


@dataclass(frozen=True)
class ChainReport:
    """Analytic performance of a chain over one K-symbol block.

    ``nodes`` runs relay 1 .. relay N, destination; the destination's rates
    coincide with the end-to-end arrays.  ``thresholds`` carries each node's
    per-slot decision rule (None for a pinned relay).
    """

    nodes: tuple[NodePerformance, ...]
    end_to_end_pd: np.ndarray
    end_to_end_pfa: np.ndarray
    end_to_end_pe: np.ndarray
    avg_pd: float
    avg_pfa: float
    avg_pe: float
    thresholds: tuple[tuple[ThresholdEntry | None, ...], ...]
    gaussian_regime: bool = True


def chain_profiles(cfg: ChainConfig) -> tuple[ArrivalProfile, ...]:
    """Arrival profiles of every hop, with enough lags for a full block."""
    return tuple(arrival_profile(h, cfg.num_slots - 1) for h in cfg.hops)


def _node_is_pinned(cfg: ChainConfig, position: int) -> bool:
    return position == 1 and cfg.num_relays >= 1 and cfg.pinned_relay is not None


def _slot_moments(
    profiles: Sequence[ArrivalProfile],
    cfg: ChainConfig,
    source_slot: int,
    position: int,
) -> HypothesisMoments:
    """Moments of the node at chain position ``position`` (1..N+1) for symbol j."""
    return hypothesis_moments(
        profiles[position - 1],
        cfg.emissions[position - 1],
        cfg.prior,
        cfg.msi,
        slot=source_slot + position - 1,
        isi_depth=source_slot - 1,
    )


def chain_slot_eval(
    profiles: Sequence[ArrivalProfile],
    cfg: ChainConfig,
    source_slot: int,
    rate_overrides: dict[int, tuple[float, float]] | None = None,
    fixed_entries: Sequence[ThresholdEntry | None] | None = None,
):
    """Evaluate every node of the chain for one source slot.

    Args:
        profiles: per-hop arrival profiles (see :func:`chain_profiles`).
        cfg: the chain.
        source_slot: 1-based source symbol index j.
        rate_overrides: optional {position: (pd, pfa)} forcing a node's
            source-relative rates after its threshold is applied (used by
            data-processing style checks).
        fixed_entries: optional externally supplied per-node threshold
            entries (None entries fall back to the computed optimum).

    Returns:
        List over chain positions 1..N+1 of
        (moments, entry, odds, pd, pfa); for a pinned relay the moments,
        entry, and odds are None.
    """
    results = []
    upstream: tuple[float, float] | None = None
    for position in range(1, len(cfg.hops) + 1):
        if _node_is_pinned(cfg, position):
            pd, pfa = cfg.pinned_relay
            results.append((None, None, None, pd, pfa))
            upstream = (pd, pfa)
            continue
        m = _slot_moments(profiles, cfg, source_slot, position)
        if position == 1:
            odds = prior_odds(cfg.prior)
        else:
            odds = effective_prior_ratio(cfg.prior, upstream)
        entry = None
        if fixed_entries is not None:
            entry = fixed_entries[position - 1]
        if entry is None:
            entry = optimal_threshold(m, odds)
        if position == 1:
            pd, pfa = single_link_rates(m, entry)
        else:
            pd, pfa = relayed_rates(m, entry, upstream)
        if rate_overrides and position in rate_overrides:
            pd, pfa = rate_overrides[position]
        results.append((m, entry, odds, pd, pfa))
        upstream = (pd, pfa)
    return results


def chain_rates(
    cfg: ChainConfig, source_slot: int
) -> list[tuple[float, float]]:
    """Source-relative (pd, pfa) of every node for one source slot."""
    profiles = chain_profiles(cfg)
    ev = chain_slot_eval(profiles, cfg, source_slot)
    return [(pd, pfa) for (_, _, _, pd, pfa) in ev]


def system_metrics(cfg: ChainConfig) -> ChainReport:
    """Per-slot and slot-averaged performance of the whole chain."""
    profiles = chain_profiles(cfg)
    n_nodes = len(cfg.hops)
    K = cfg.num_slots
    pd = np.zeros((n_nodes, K))
    pfa = np.zeros((n_nodes, K))
    entries: list[list[ThresholdEntry | None]] = [[] for _ in range(n_nodes)]
    regime = True
    for j in range(1, K + 1):
        ev = chain_slot_eval(profiles, cfg, j)
        for pos, (m, entry, _odds, node_pd, node_pfa) in enumerate(ev):
            pd[pos, j - 1] = node_pd
            pfa[pos, j - 1] = node_pfa
            entries[pos].append(entry)
            if m is not None and not m.gaussian_regime:
                regime = False
    pe = cfg.prior * (1.0 - pd[-1]) + (1.0 - cfg.prior) * pfa[-1]
    nodes = tuple(NodePerformance(pd=pd[i].copy(), pfa=pfa[i].copy()) for i in range(n_nodes))
    return ChainReport(
        nodes=nodes,
        end_to_end_pd=pd[-1],
        end_to_end_pfa=pfa[-1],
        end_to_end_pe=pe,
        avg_pd=float(np.mean(pd[-1])),
        avg_pfa=float(np.mean(pfa[-1])),
        avg_pe=float(np.mean(pe)),
        thresholds=tuple(tuple(e) for e in entries),
        gaussian_regime=regime,
    )


def roc_sweep(
    cfg: ChainConfig, thresholds: Sequence[float]
) -> list[tuple[float, float, float]]:
    """(threshold, pfa, pd) of the destination over a caller-supplied grid.

    Upstream relays sit at their computed (or pinned) operating points; the
    destination's moments are held fixed at the converged last source slot
    while its threshold sweeps the grid.
    """
    profiles = chain_profiles(cfg)
    j = cfg.num_slots
    ev = chain_slot_eval(profiles, cfg, j)
    dest_moments = _slot_moments(profiles, cfg, j, len(cfg.hops))
    upstream = None
    if cfg.num_relays >= 1:
        _, _, _, up_pd, up_pfa = ev[-2]
        upstream = (up_pd, up_pfa)
    out = []
    for g in thresholds:
        entry = ThresholdEntry(value=float(g))
        if upstream is None:
            pd, pfa = single_link_rates(dest_moments, entry)
        else:
            pd, pfa = relayed_rates(dest_moments, entry, upstream)
        out.append((float(g), pfa, pd))
    return out

"""Shared builders and reference configurations for the test suite.

All distances are given in micrometres and converted here; every other
quantity is SI.  The reference grid collects the link configurations the
validation tests sweep over: direct, dual-hop, and three-section chains,
with computed and pinned relays, with and without degradation.
"""

from __future__ import annotations

import numpy as np

import molrelay as mr

DIFFUSION = 2.2e-11  # m^2/s
UM = 1e-6
K = 30  # block length (source symbols per frame)


def make_link(d_um, v, tau, alpha=0.2):
    return mr.DiffusionLink(
        distance=d_um * UM,
        drift_velocity=v,
        diffusion_coefficient=DIFFUSION,
        degradation_rate=alpha,
        slot_duration=tau,
    )


def make_chain(dists_um, v, tau, mols, msi, pinned=None, prior=0.5, alpha=0.2, num_slots=K):
    n_relays = len(dists_um) - 1
    return mr.ChainConfig(
        hops=tuple(make_link(d, v, tau, alpha) for d in dists_um),
        emissions=tuple(
            mr.EmissionSchedule.constant(q, num_slots + n_relays) for q in mols
        ),
        prior=prior,
        msi=mr.MsiParams(*msi),
        num_slots=num_slots,
        pinned_relay=pinned,
    )


def steady_threshold(cfg):
    """Destination threshold for the last source slot (steady state)."""
    entry = mr.system_metrics(cfg).thresholds[-1][-1]
    assert entry is not None and not entry.is_degenerate
    return entry.value


def pd_at_pfa(cfg, target_pfa=0.1, lo=-50.0, hi=400.0, n=40001):
    """Detection probability at a fixed false-alarm rate, read off the ROC."""
    pts = mr.roc_sweep(cfg, np.linspace(lo, hi, n))
    pfa = np.array([p[1] for p in pts])
    pd = np.array([p[2] for p in pts])
    order = np.argsort(pfa)
    return float(np.interp(target_pfa, pfa[order], pd[order]))


def reference_grid():
    """Labelled chain configurations used by the threshold-correctness sweeps."""
    return [
        ("direct_low_noise", make_chain([30], 1.5e-5, 3.0, [60], (10, 10))),
        ("direct_high_noise", make_chain([30], 1.5e-5, 3.0, [60], (30, 30))),
        ("dual_low_noise_no_decay", make_chain([15, 15], 1.5e-5, 3.0, [60, 60], (10, 10), alpha=0.0)),
        ("dual_high_noise_no_decay", make_chain([15, 15], 1.5e-5, 3.0, [60, 60], (40, 40), alpha=0.0)),
        ("dual_pinned", make_chain([15, 15], 7e-6, 2.0, [100, 100], (20, 20), pinned=(0.99, 0.01))),
        ("multi_small_budget", make_chain([10, 10, 10], 1.5e-5, 3.0, [60, 60, 30], (20, 20), pinned=(0.999, 0.001))),
        ("multi_large_budget", make_chain([10, 10, 10], 1.5e-5, 3.0, [60, 60, 70], (20, 20), pinned=(0.999, 0.001))),
        ("multi_computed", make_chain([10, 10, 10], 7e-6, 2.0, [60, 45, 70], (20, 10))),
    ]

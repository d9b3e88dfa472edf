"""Mutual information, capacity search, and emission-budget allocation."""

import math

import numpy as np
import pytest

import molrelay as mr
from molrelay import ParameterError

from helpers import make_chain

# I(X;Y) for pd = 0.9, pfa = 0.1, beta = 0.5, computed independently at
# 40-digit precision.
REF_MI = 0.5310044064107188


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_mutual_information_reference_value():
    assert mr.mutual_information(0.9, 0.1, 0.5) == pytest.approx(REF_MI, rel=1e-12)


def test_mutual_information_symmetric_channel_identity():
    # With pd = 1 - pfa and a uniform prior the channel is a binary
    # symmetric channel: I = 1 - H2(pfa).
    rng = np.random.default_rng(9)
    for _ in range(300):
        pfa = float(rng.uniform(1e-6, 0.5 - 1e-6))
        got = mr.mutual_information(1 - pfa, pfa, 0.5)
        assert abs(got - (1 - h2(pfa))) <= 1e-10


def test_mutual_information_bounds_and_degenerate_cases():
    rng = np.random.default_rng(10)
    for _ in range(300):
        pd, pfa, beta = rng.uniform(0.001, 0.999, 3)
        mi = mr.mutual_information(pd, pfa, beta)
        assert 0.0 <= mi <= 1.0
    # Uninformative channel carries nothing; a perfect one carries the
    # source entropy.
    assert mr.mutual_information(0.3, 0.3, 0.4) == pytest.approx(0.0, abs=1e-12)
    assert mr.mutual_information(1.0, 0.0, 0.3) == pytest.approx(h2(0.3), rel=1e-12)


def test_mutual_information_matches_direct_joint_sum():
    # Re-derive I(X;Y) from the joint distribution, term by term.
    def joint_mi(pd, pfa, beta):
        px = [beta, 1 - beta]  # P(X=1), P(X=0)
        cond = {(1, 1): pd, (0, 1): 1 - pd, (1, 0): pfa, (0, 0): 1 - pfa}
        py = {y: px[0] * cond[(y, 1)] + px[1] * cond[(y, 0)] for y in (0, 1)}
        total = 0.0
        for x, w in ((1, px[0]), (0, px[1])):
            for y in (0, 1):
                p = w * cond[(y, x)]
                if p > 0:
                    total += p * math.log2(p / (w * py[y]))
        return total

    rng = np.random.default_rng(12)
    for _ in range(200):
        pd, pfa, beta = rng.uniform(0.01, 0.99, 3)
        assert mr.mutual_information(pd, pfa, beta) == pytest.approx(
            joint_mi(pd, pfa, beta), abs=1e-12)


def test_information_rate_averages_slots():
    cfg = make_chain([30], 1.5e-5, 2.5, [60], (20, 10), num_slots=8)
    rep = mr.system_metrics(cfg)
    want = float(np.mean([mr.mutual_information(pd, pfa, cfg.prior)
                          for pd, pfa in zip(rep.end_to_end_pd, rep.end_to_end_pfa)]))
    assert mr.information_rate(cfg) == pytest.approx(want, rel=1e-12)


def test_capacity_beats_fine_prior_grid():
    cfg = make_chain([30], 1.5e-5, 2.5, [60], (20, 10), num_slots=6)
    res = mr.capacity(cfg)
    betas = np.arange(0.02, 0.981, 0.002)
    grid = [mr.information_rate(
        mr.ChainConfig(hops=cfg.hops, emissions=cfg.emissions, prior=float(b),
                       msi=cfg.msi, num_slots=cfg.num_slots,
                       pinned_relay=cfg.pinned_relay))
        for b in betas]
    best = int(np.argmax(grid))
    assert res.capacity >= grid[best] - 1e-9
    assert abs(res.beta_star - betas[best]) <= 2e-3
    assert 0.0 < res.beta_star < 1.0
    # The refined optimum must dominate its own coarse scan trace.
    assert len(res.betas) == len(res.rates)
    assert res.capacity >= max(res.rates) - 1e-12


def test_capacity_decreases_with_background_noise():
    quiet = make_chain([30], 1.5e-5, 2.5, [60], (20, 5), num_slots=6)
    loud = make_chain([30], 1.5e-5, 2.5, [60], (20, 60), num_slots=6)
    assert mr.capacity(quiet).capacity > mr.capacity(loud).capacity


def test_uninformative_pinned_relay_gives_zero_capacity():
    # A coin-flip relay destroys the source information at every prior.
    cfg = make_chain([15, 15], 1.5e-5, 2.5, [60, 60], (20, 20),
                     pinned=(0.5, 0.5), num_slots=6)
    res = mr.capacity(cfg)
    assert res.capacity == pytest.approx(0.0, abs=1e-12)


def test_budget_sweep_enumerates_positive_compositions():
    cfg = make_chain([15, 15], 7e-6, 2.0, [60, 60], (20, 10), num_slots=6)
    res = mr.budget_sweep(cfg, total=40, step=10)
    allocs = sorted(p.allocation for p in res.points)
    assert allocs == [(10, 30), (20, 20), (30, 10)]
    for p in res.points:
        assert sum(p.allocation) == 40
        assert all(a > 0 for a in p.allocation)
        assert 0.0 <= p.capacity <= 1.0
        assert 0.0 < p.beta_star < 1.0
    assert res.best.capacity == max(p.capacity for p in res.points)


def test_budget_sweep_three_transmitters_count():
    cfg = make_chain([10, 10, 10], 7e-6, 2.0, [60, 60, 60], (20, 10), num_slots=4)
    res = mr.budget_sweep(cfg, total=50, step=10)
    # Positive compositions of 5 steps into 3 parts: C(4, 2) = 6.
    assert len(res.points) == 6
    assert len({p.allocation for p in res.points}) == 6


def test_budget_sweep_validates_arguments():
    cfg = make_chain([15, 15], 7e-6, 2.0, [60, 60], (20, 10), num_slots=4)
    with pytest.raises(ParameterError):
        mr.budget_sweep(cfg, total=0, step=10)
    with pytest.raises(ParameterError):
        mr.budget_sweep(cfg, total=40, step=0)
    with pytest.raises(ParameterError):
        mr.budget_sweep(cfg, total=10, step=10)  # cannot feed two transmitters

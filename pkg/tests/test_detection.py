"""Threshold construction, decision rule, and upstream prior folding."""

import math

import numpy as np
import pytest
from scipy.optimize import brentq

import molrelay as mr
from molrelay import (
    IndistinguishableHypothesesError,
    ParameterError,
    UninformativeRelayError,
)
from molrelay.detection import optimal_threshold
from molrelay.moments import HypothesisMoments


def mk_moments(mu0, var0, mu1, var1):
    return HypothesisMoments(mu0=mu0, var0=var0, mu1=mu1, var1=var1,
                             gaussian_regime=True)


def log_normal_pdf(x, mu, var):
    return -0.5 * math.log(2 * math.pi * var) - (x - mu) ** 2 / (2 * var)


def random_moments(rng):
    mu0 = rng.uniform(5, 50)
    mu1 = mu0 + rng.uniform(2, 40)
    var0 = rng.uniform(4, 60)
    var1 = var0 + rng.uniform(0.5, 50)
    return mk_moments(mu0, var0, mu1, var1)


def test_threshold_sits_on_likelihood_crossing():
    # At the returned threshold the two posterior-weighted densities are
    # equal: log f1 - log f0 == log(odds).
    rng = np.random.default_rng(21)
    for _ in range(300):
        m = random_moments(rng)
        odds = float(np.exp(rng.uniform(-2.5, 2.5)))
        entry = optimal_threshold(m, mr.EffectiveOdds(odds))
        if entry.is_degenerate:
            continue
        x = entry.value
        delta = (log_normal_pdf(x, m.mu1, m.var1)
                 - log_normal_pdf(x, m.mu0, m.var0) - math.log(odds))
        assert abs(delta) <= 1e-9


def test_threshold_matches_root_finder():
    # Independent oracle: bracketed root of the log-likelihood difference.
    rng = np.random.default_rng(22)
    hits = 0
    for _ in range(100):
        m = random_moments(rng)
        odds = float(np.exp(rng.uniform(-1.5, 1.5)))
        entry = optimal_threshold(m, mr.EffectiveOdds(odds))
        if entry.is_degenerate:
            continue

        def g(x):
            return (log_normal_pdf(x, m.mu1, m.var1)
                    - log_normal_pdf(x, m.mu0, m.var0) - math.log(odds))

        lo, hi = entry.value - 1e-3, entry.value + 1e-3
        if g(lo) * g(hi) >= 0:
            continue  # tangent or double-root corner; covered elsewhere
        root = brentq(g, lo, hi, xtol=1e-12)
        assert abs(root - entry.value) <= 1e-8
        hits += 1
    assert hits >= 80


def test_threshold_decision_is_bayes_optimal_pointwise():
    # Deciding by count > threshold must agree with comparing the two
    # weighted densities directly, at counts on both sides of the cut.
    rng = np.random.default_rng(23)
    for _ in range(100):
        m = random_moments(rng)
        odds = float(np.exp(rng.uniform(-1.5, 1.5)))
        entry = optimal_threshold(m, mr.EffectiveOdds(odds))
        if entry.is_degenerate:
            continue
        for dx in (-7.0, -0.5, 0.5, 7.0):
            x = entry.value + dx
            want = int(log_normal_pdf(x, m.mu1, m.var1) - math.log(odds)
                       > log_normal_pdf(x, m.mu0, m.var0))
            # Only meaningful on the connected side of the upper crossing.
            if dx > 0 and want == 0:
                continue  # beyond the far (lower) crossing of the parabola
            if dx < 0 and want == 1:
                continue
            assert mr.decide(x, entry) == want


def test_equal_variance_reduces_to_linear_threshold():
    m = mk_moments(20.0, 40.0, 38.0, 40.0)
    for odds in (0.2, 1.0, 3.0):
        entry = optimal_threshold(m, mr.EffectiveOdds(odds))
        assert not entry.is_degenerate
        want = 0.5 * (m.mu0 + m.mu1) + m.var0 * math.log(odds) / (m.mu1 - m.mu0)
        assert entry.value == pytest.approx(want, rel=1e-12)
        # The quadratic path must approach the same value as var1 -> var0.
        near = optimal_threshold(mk_moments(20.0, 40.0, 38.0, 40.0 * (1 + 1e-7)), mr.EffectiveOdds(odds))
        assert near.value == pytest.approx(want, abs=1e-4)


def test_degenerate_threshold_is_constant_and_consistent():
    # With odds so lopsided that the densities never cross, the rule is a
    # constant decision matching the larger weighted density.
    m = mk_moments(20.0, 40.0, 38.0, 70.6)
    entry = optimal_threshold(m, mr.EffectiveOdds(1e-12))
    assert entry.is_degenerate
    assert entry.constant == 1
    for x in (-50.0, 0.0, 20.0, 38.0, 200.0):
        assert mr.decide(x, entry) == 1


def test_identical_hypotheses_rejected():
    m = mk_moments(20.0, 40.0, 20.0, 40.0)
    with pytest.raises(IndistinguishableHypothesesError):
        optimal_threshold(m, mr.EffectiveOdds(1.0))


def test_decide_tie_goes_to_zero():
    entry = optimal_threshold(mk_moments(20.0, 40.0, 38.0, 70.6), mr.EffectiveOdds(1.0))
    assert mr.decide(entry.value, entry) == 0
    assert mr.decide(entry.value + 1e-9, entry) == 1


def test_threshold_entry_construction_contract():
    with pytest.raises(ParameterError):
        mr.ThresholdEntry(value=3.0, constant=1)
    with pytest.raises(ParameterError):
        mr.ThresholdEntry()
    with pytest.raises(ParameterError):
        mr.ThresholdEntry(constant=2)


def test_nonpositive_variance_rejected():
    with pytest.raises(ParameterError):
        optimal_threshold(mk_moments(20.0, 0.0, 38.0, 70.6), mr.EffectiveOdds(1.0))
    with pytest.raises(ParameterError):
        optimal_threshold(mk_moments(20.0, 40.0, 38.0, -1.0), mr.EffectiveOdds(1.0))


def test_prior_odds_values():
    assert mr.prior_odds(0.5).value == 1.0
    assert mr.prior_odds(0.25).value == pytest.approx(3.0, rel=1e-15)
    with pytest.raises(ParameterError):
        mr.prior_odds(0.0)


def test_effective_prior_ratio_matches_two_state_sum():
    # Fold one relay: the ratio of posterior masses given the relay's
    # decision statistics must equal the explicit two-state computation.
    rng = np.random.default_rng(31)
    for _ in range(200):
        beta = float(rng.uniform(0.1, 0.9))
        pd = float(rng.uniform(0.55, 0.999))
        pfa = float(rng.uniform(0.001, 0.45))
        num = (1 - beta) * (1 - pfa) - beta * (1 - pd)
        den = beta * pd - (1 - beta) * pfa
        if num <= 0 or den <= 0:
            continue
        got = mr.effective_prior_ratio(beta, (pd, pfa))
        assert got.value == pytest.approx(num / den, rel=1e-13)


def test_effective_prior_ratio_rejects_uninformative_relay():
    with pytest.raises(UninformativeRelayError):
        mr.effective_prior_ratio(0.5, (0.3, 0.3))
    # Worse-than-chance relays flip the sign of the folded mass and are
    # reported rather than silently inverted.
    with pytest.raises(UninformativeRelayError):
        mr.effective_prior_ratio(0.5, (0.2, 0.8))


def test_brute_force_prior_ratio_small_chain():
    # One and two relays, checked against hand-expanded state sums.
    beta, pd1, pfa1, pd2, pfa2 = 0.4, 0.93, 0.06, 0.88, 0.11
    one = mr.brute_force_prior_ratio(beta, [(pd1, pfa1)])
    want1 = ((1 - beta) * (1 - pfa1) - beta * (1 - pd1)) / (beta * pd1 - (1 - beta) * pfa1)
    assert one.value == pytest.approx(want1, rel=1e-13)
    two = mr.brute_force_prior_ratio(beta, [(pd1, pfa1), (pd2, pfa2)])
    n2 = ((1 - beta) * (1 - pfa1) * (1 - pfa2) - beta * (1 - pd1) * (1 - pd2)
          + (1 - beta) * pfa1 * (1 - pfa2) - beta * pd1 * (1 - pd2))
    d2 = (beta * (1 - pd1) * pd2 - (1 - beta) * (1 - pfa1) * pfa2
          + beta * pd1 * pd2 - (1 - beta) * pfa1 * pfa2)
    assert two.value == pytest.approx(n2 / d2, rel=1e-13)

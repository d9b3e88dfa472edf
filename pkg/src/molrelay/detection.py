"""Bayesian likelihood-ratio detection on Gaussian hypothesis pairs.

Each receiving node runs a binary likelihood-ratio test between the two
Gaussian hypotheses produced by :mod:`molrelay.moments`.  With unequal
variances the log-likelihood ratio is quadratic in the received count R;
completing the square reduces the test to a single scalar comparison

    decide 1  iff  R > gamma',    gamma' = sqrt(gamma) - alpha_lin,

with

    alpha_lin = (mu1 var0 - mu0 var1) / (var1 - var0)
    gamma     = [2 var1 var0 / (var1 - var0)] * ln(odds * sqrt(var1 / var0))
                + alpha_lin^2 + (mu1^2 var0 - mu0^2 var1) / (var1 - var0)

where ``odds`` is the prior odds in favour of hypothesis 0.  When
``gamma < 0`` the odds-weighted likelihood curves never cross and the
optimal rule is constant; when ``var1 == var0`` the exact linear-LRT limit

    gamma' = (mu0 + mu1) / 2 + var ln(odds) / (mu1 - mu0)

is used instead of the (numerically singular) quadratic form.

For a node listening to a relay rather than to the source, the prior odds
must fold in the relay's decision quality.  If the upstream relay detects
with probability ``pd`` and false-alarms with ``pfa`` (both measured
against the *source* bit), the effective odds in favour of "relay sent 0
because the source sent 0" are

    odds_eff = [(1 - beta)(1 - pfa) - beta (1 - pd)]
               / [beta pd - (1 - beta) pfa].

A remarkable collapse makes this exact for any number of upstream relays:
enumerating all 2^N joint relay-decision states and weighting each by its
conditional probability yields the same ratio as using the last relay
alone.  ``brute_force_prior_ratio`` implements the full enumeration so the
collapse can be certified numerically against ``effective_prior_ratio``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    IndistinguishableHypothesesError,
    ParameterError,
    UninformativeRelayError,
)
from .moments import HypothesisMoments


@dataclass(frozen=True)
class EffectiveOdds:
    """Prior odds in favour of hypothesis 0, after folding in any relays."""

    value: float

    def __post_init__(self):
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ParameterError(
                f"effective odds must be positive and finite, got {self.value}"
            )


@dataclass(frozen=True)
class ThresholdEntry:
    """Decision rule for one node in one slot.

    Either a proper threshold (``value`` set, ``constant`` None): decide 1
    iff the count strictly exceeds ``value``; or a degenerate constant rule
    (``constant`` in {0, 1}) when the weighted likelihoods never cross.
    """

    value: float | None = None
    constant: int | None = None

    def __post_init__(self):
        if (self.value is None) == (self.constant is None):
            raise ParameterError(
                "exactly one of value/constant must be set on a ThresholdEntry"
            )
        if self.constant is not None and self.constant not in (0, 1):
            raise ParameterError(f"constant decision must be 0 or 1, got {self.constant}")

    @property
    def is_degenerate(self) -> bool:
        return self.constant is not None


def prior_odds(prior: float) -> EffectiveOdds:
    """Plain prior odds (1 - beta) / beta of a node listening to the source."""
    if not 0.0 < prior < 1.0:
        raise ParameterError(f"prior must be in (0, 1), got {prior}")
    return EffectiveOdds((1.0 - prior) / prior)


def effective_prior_ratio(
    prior: float, upstream: tuple[float, float]
) -> EffectiveOdds:
    """Effective odds for a node whose transmitter is a relay.

    Args:
        prior: source prior beta = Pr{bit = 1}.
        upstream: the immediate upstream relay's source-relative (pd, pfa).

    Raises:
        UninformativeRelayError: when either the numerator or denominator of
            the ratio is <= 0, i.e. observing the relay's decision does not
            shift belief in the right direction at this prior.
    """
    if not 0.0 < prior < 1.0:
        raise ParameterError(f"prior must be in (0, 1), got {prior}")
    pd, pfa = upstream
    for name, p in (("pd", pd), ("pfa", pfa)):
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"upstream {name} must be in [0, 1], got {p}")
    beta = prior
    num = (1.0 - beta) * (1.0 - pfa) - beta * (1.0 - pd)
    den = beta * pd - (1.0 - beta) * pfa
    if num <= 0.0 or den <= 0.0:
        raise UninformativeRelayError(
            f"effective odds undefined: numerator={num:.3g}, denominator={den:.3g} "
            f"(pd={pd}, pfa={pfa}, prior={beta})"
        )
    return EffectiveOdds(num / den)


def _state_probabilities(
    chain: Sequence[tuple[float, float]], under_h1: bool
) -> np.ndarray:
    """Joint probabilities of all 2^N relay-decision states.

    State index l encodes relay n's decision in bit (N - n); relay N (the
    one the next node actually hears) is the least-significant bit.  Relay
    decisions are conditionally independent given the source hypothesis,
    with per-relay marginals pd (under H1) or pfa (under H0).
    """
    probs = np.ones(1)
    for pd, pfa in chain:
        p1 = pd if under_h1 else pfa
        # appending this relay as the new least-significant bit
        probs = np.stack([probs * (1.0 - p1), probs * p1], axis=1).ravel()
    return probs


def brute_force_prior_ratio(
    prior: float, chain: Sequence[tuple[float, float]]
) -> EffectiveOdds:
    """Effective odds by explicit enumeration of all 2^N relay states.

    Exists as an independent oracle for :func:`effective_prior_ratio`: the
    enumerated ratio provably collapses to a function of the last relay
    alone, and tests certify the two agree to floating-point accuracy.
    """
    if not 0.0 < prior < 1.0:
        raise ParameterError(f"prior must be in (0, 1), got {prior}")
    if len(chain) < 1:
        raise ParameterError("chain must contain at least one relay")
    beta = prior
    p_h1 = _state_probabilities(chain, under_h1=True)
    p_h0 = _state_probabilities(chain, under_h1=False)
    l = np.arange(len(p_h1))
    even = (l & 1) == 0
    num = float(np.sum((1.0 - beta) * p_h0[even] - beta * p_h1[even]))
    den = float(np.sum(beta * p_h1[~even] - (1.0 - beta) * p_h0[~even]))
    if num <= 0.0 or den <= 0.0:
        raise UninformativeRelayError(
            f"effective odds undefined: numerator={num:.3g}, denominator={den:.3g}"
        )
    return EffectiveOdds(num / den)


def _log_gauss_pdf(x: float, mean: float, var: float) -> float:
    return -0.5 * (math.log(2.0 * math.pi * var) + (x - mean) ** 2 / var)


def optimal_threshold(
    moments: HypothesisMoments, odds: EffectiveOdds
) -> ThresholdEntry:
    """Bayes-optimal single-threshold rule for one Gaussian hypothesis pair.

    Raises:
        IndistinguishableHypothesesError: if the hypotheses coincide.
        ParameterError: if either variance is not strictly positive.
    """
    mu0, var0, mu1, var1 = moments.mu0, moments.var0, moments.mu1, moments.var1
    if var0 <= 0.0 or var1 <= 0.0:
        raise ParameterError("optimal_threshold requires strictly positive variances")
    if mu1 == mu0 and var1 == var0:
        raise IndistinguishableHypothesesError(
            "hypotheses have identical moments; no threshold exists"
        )
    ln_odds = math.log(odds.value)

    if var1 == var0:
        # Exact linear-LRT limit; numerically stable as the signal term -> 0.
        return ThresholdEntry(
            value=0.5 * (mu0 + mu1) + var0 * ln_odds / (mu1 - mu0)
        )

    dv = var1 - var0
    alpha_lin = (mu1 * var0 - mu0 * var1) / dv
    gamma = (
        (2.0 * var1 * var0 / dv) * (ln_odds + 0.5 * math.log(var1 / var0))
        + alpha_lin**2
        + (mu1**2 * var0 - mu0**2 * var1) / dv
    )
    if gamma < 0.0:
        # The odds-weighted likelihood curves never cross: the rule is
        # constant.  Resolve its value by comparing the weighted likelihoods
        # at an arbitrary point (mu0).
        llr = (
            _log_gauss_pdf(mu0, mu1, var1)
            - _log_gauss_pdf(mu0, mu0, var0)
            - ln_odds
        )
        return ThresholdEntry(constant=1 if llr > 0 else 0)
    return ThresholdEntry(value=math.sqrt(gamma) - alpha_lin)


def decide(count: float, entry: ThresholdEntry) -> int:
    """Apply one node's decision rule to a received count (ties go to 0)."""
    if entry.is_degenerate:
        return int(entry.constant)
    return int(count > entry.value)

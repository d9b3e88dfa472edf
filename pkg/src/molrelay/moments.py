"""Received-count statistics under both bit hypotheses.

Every receiving node in a decode-and-forward chain sees, in one slot, the
sum of four contributions: the current-slot signal, inter-symbol
interference (ISI) from the transmitter's earlier emissions, multi-source
interference (MSI) from other molecule sources, and a zero-mean counting
error whose variance equals the expected received count.  With the count
statistic treated as Gaussian, each hypothesis (current bit 0 or 1) is
fully described by a mean and a variance.

For a receiver observing transmitter emissions ``Q[.]`` through a hop with
arrival profile ``q``, prior ``beta = Pr{bit = 1}``, and MSI of mean
``mu_o`` / variance ``sigma_o^2``, the slot-``s`` hypothesis moments with
``L`` lags of history are

    mu_0  = beta * sum_{m=1..L} Q[s-m] q_m + mu_o
    var_0 = sum_{m=1..L} [ beta Q[s-m] q_m (1 - q_m)
                           + beta (1 - beta) (Q[s-m] q_m)^2 ]
            + sigma_o^2 + mu_0
    mu_1  = mu_0 + Q[s] q_0
    var_1 = var_0 - mu_0 + Q[s] q_0 (1 - q_0) + mu_1

(the trailing mean term in each variance is the counting error, which is
conditioned on that hypothesis's own mean).  The same template serves the
source->relay, relay->relay, and relay->destination windows of a chain;
the wrappers below only differ in slot/index bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ArrivalProfile
from .errors import ContractError, ParameterError

# A hypothesis is treated as comfortably Gaussian when the signal binomial
# has both Q q0 and Q (1 - q0) above this count.
GAUSSIAN_REGIME_MIN_COUNT = 5.0


@dataclass(frozen=True)
class EmissionSchedule:
    """Per-slot molecule release counts of one transmitting node.

    ``counts[s - 1]`` molecules are released at the start of slot ``s``
    (slots are 1-based to match the analysis; the array is the 0-based
    internal view).  Counts are non-negative integers so the Monte Carlo
    transport can treat each released molecule as a Bernoulli trial.
    """

    counts: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.counts)
        if arr.ndim != 1 or arr.size == 0:
            raise ParameterError("emission schedule must be a non-empty 1-D sequence")
        if not np.issubdtype(arr.dtype, np.integer):
            rounded = np.rint(np.asarray(arr, dtype=np.float64))
            if not np.allclose(arr, rounded, rtol=0, atol=1e-9):
                raise ParameterError("emission counts must be integers")
            arr = rounded
        arr = arr.astype(np.int64)
        if np.any(arr < 0):
            raise ParameterError("emission counts must be >= 0")
        arr.flags.writeable = False
        object.__setattr__(self, "counts", arr)

    @classmethod
    def constant(cls, count: int, num_slots: int) -> "EmissionSchedule":
        """Schedule releasing ``count`` molecules in every one of ``num_slots`` slots."""
        if num_slots < 1:
            raise ParameterError(f"num_slots must be >= 1, got {num_slots}")
        return cls(np.full(num_slots, count, dtype=np.int64))

    def __len__(self) -> int:
        return len(self.counts)

    def at(self, slot: int) -> int:
        """Release count for 1-based slot index ``slot``."""
        if not 1 <= slot <= len(self.counts):
            raise ContractError(
                f"slot {slot} outside schedule range 1..{len(self.counts)}"
            )
        return int(self.counts[slot - 1])


@dataclass(frozen=True)
class MsiParams:
    """Multi-source interference: Gaussian with mean >= 0 and variance >= 0."""

    mean: float
    variance: float

    def __post_init__(self):
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "variance", float(self.variance))
        if not (self.mean >= 0 and math.isfinite(self.mean)):
            raise ParameterError(f"MSI mean must be >= 0, got {self.mean}")
        if not (self.variance >= 0 and math.isfinite(self.variance)):
            raise ParameterError(f"MSI variance must be >= 0, got {self.variance}")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class HypothesisMoments:
    """Gaussian moments of the received count under bit = 0 and bit = 1.

    ``gaussian_regime`` records whether the current-slot signal binomial is
    comfortably approximated by a Gaussian (both Q q0 and Q (1 - q0) above
    GAUSSIAN_REGIME_MIN_COUNT); downstream consumers may report but must
    not silently trust results where it is False.
    """

    mu0: float
    var0: float
    mu1: float
    var1: float
    gaussian_regime: bool = True

    def __post_init__(self):
        for name in ("mu0", "var0", "mu1", "var1"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.var0 < 0 or self.var1 < 0:
            raise ParameterError("variances must be >= 0")
        if self.mu1 < self.mu0:
            raise ParameterError("mu1 must be >= mu0 (signal adds molecules)")
        if self.var1 < self.var0:
            raise ParameterError("var1 must be >= var0 (signal adds variance)")

    @property
    def sigma0(self) -> float:
        return math.sqrt(self.var0)

    @property
    def sigma1(self) -> float:
        return math.sqrt(self.var1)


def hypothesis_moments(
    profile: ArrivalProfile,
    emissions: EmissionSchedule,
    prior: float,
    msi: MsiParams,
    slot: int,
    isi_depth: int,
) -> HypothesisMoments:
    """Hypothesis moments for the receiver of one hop in a given slot.

    Args:
        profile: arrival probabilities of the hop (lags 0..isi_depth needed).
        emissions: schedule of the transmitting node, indexed by absolute slot.
        prior: beta = Pr{transmitted bit = 1}, in (0, 1).
        msi: multi-source interference parameters at this receiver.
        slot: 1-based absolute slot of the reception window; the current-slot
            signal uses ``emissions.at(slot)`` and lag-m ISI uses
            ``emissions.at(slot - m)``.
        isi_depth: number of ISI lags to include (0 <= isi_depth < slot).

    Raises:
        ContractError: if isi_depth reaches before slot 1 or beyond the
            profile's max lag.
    """
    if not 0.0 < prior < 1.0:
        raise ParameterError(f"prior must be in (0, 1), got {prior}")
    if slot < 1:
        raise ContractError(f"slot must be >= 1, got {slot}")
    if isi_depth < 0 or isi_depth >= slot:
        raise ContractError(
            f"isi_depth must satisfy 0 <= isi_depth < slot, got {isi_depth} (slot {slot})"
        )
    if isi_depth > profile.max_lag:
        raise ContractError(
            f"isi_depth {isi_depth} exceeds profile max lag {profile.max_lag}"
        )

    beta = float(prior)
    q0 = float(profile.q[0])
    q_now = emissions.at(slot) * q0

    if isi_depth > 0:
        q_lags = profile.q[1 : isi_depth + 1]
        # emissions at slots slot-1, slot-2, ..., slot-isi_depth
        counts = emissions.counts[slot - 1 - isi_depth : slot - 1][::-1].astype(
            np.float64
        )
        expected = counts * q_lags  # per-lag expected arrivals when bit = 1
        isi_mean = beta * float(np.sum(expected))
        isi_var = float(
            np.sum(beta * expected * (1.0 - q_lags) + beta * (1.0 - beta) * expected**2)
        )
    else:
        isi_mean = 0.0
        isi_var = 0.0

    mu0 = isi_mean + msi.mean
    var0 = isi_var + msi.variance + mu0
    mu1 = mu0 + q_now
    var1 = isi_var + q_now * (1.0 - q0) + msi.variance + mu1

    q_count = float(emissions.at(slot))
    regime = (
        q_count * q0 > GAUSSIAN_REGIME_MIN_COUNT
        and q_count * (1.0 - q0) > GAUSSIAN_REGIME_MIN_COUNT
    )
    return HypothesisMoments(mu0, var0, mu1, var1, gaussian_regime=regime)


# ---------------------------------------------------------------------------
# Named windows of a decode-and-forward chain.  All reduce to the template
# above; only the slot arithmetic differs.  ``source_slot`` is the 1-based
# index j of the source symbol the window serves, so relay n's copy of
# symbol j is received in absolute slot j + n - 1 and re-emitted in j + n.
# ---------------------------------------------------------------------------


def direct_link_moments(
    profile: ArrivalProfile,
    emissions: EmissionSchedule,
    prior: float,
    msi: MsiParams,
    slot: int,
) -> HypothesisMoments:
    """Destination moments of a relay-free link in source slot ``slot``."""
    return hypothesis_moments(profile, emissions, prior, msi, slot, isi_depth=slot - 1)


def source_to_relay_moments(
    profile: ArrivalProfile,
    emissions: EmissionSchedule,
    prior: float,
    msi: MsiParams,
    slot: int,
) -> HypothesisMoments:
    """First relay's moments (its window coincides with the source slot)."""
    return hypothesis_moments(profile, emissions, prior, msi, slot, isi_depth=slot - 1)


def relay_to_relay_moments(
    profile: ArrivalProfile,
    emissions: EmissionSchedule,
    prior: float,
    msi: MsiParams,
    source_slot: int,
    relay_index: int,
) -> HypothesisMoments:
    """Moments at relay ``relay_index + 1`` listening to relay ``relay_index``.

    Relay ``relay_index`` (1-based) re-emits source symbol j in absolute slot
    j + relay_index, so the downstream window for symbol j sits there, with
    j - 1 lags of that relay's own ISI behind it.
    """
    if relay_index < 1:
        raise ParameterError(f"relay_index must be >= 1, got {relay_index}")
    return hypothesis_moments(
        profile,
        emissions,
        prior,
        msi,
        slot=source_slot + relay_index,
        isi_depth=source_slot - 1,
    )


def relay_to_destination_moments(
    profile: ArrivalProfile,
    emissions: EmissionSchedule,
    prior: float,
    msi: MsiParams,
    source_slot: int,
    num_relays: int,
) -> HypothesisMoments:
    """Destination moments in a chain with ``num_relays`` relays."""
    if num_relays < 1:
        raise ParameterError(f"num_relays must be >= 1, got {num_relays}")
    return hypothesis_moments(
        profile,
        emissions,
        prior,
        msi,
        slot=source_slot + num_relays,
        isi_depth=source_slot - 1,
    )

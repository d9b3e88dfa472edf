"""Single-hop diffusive molecular transport with drift.

A molecule released into a fluid medium diffuses with coefficient ``D``
while being carried by a drift velocity ``v`` toward a fully absorbing
receiver at distance ``d``.  Its first hitting time ``T`` then follows an
inverse Gaussian law with mean ``mu = d / v`` and shape ``lam = d^2 / (2 D)``:

    f(t) = sqrt(lam / (2 pi t^3)) * exp(-lam (t - mu)^2 / (2 mu^2 t)),  t > 0.

Molecules degrade in transit via an exponential lifetime with rate
``alpha``, so a molecule released at the start of some slot is *counted*
during the window ``[i tau, (i+1) tau)`` after its release (slot duration
``tau``, lag ``i``) with probability

    q_i = integral_{i tau}^{(i+1) tau} f(t) exp(-alpha t) dt.

The ``q_i`` profile of a hop is the only thing downstream moment/detection
code needs; everything else in this module exists to compute it reliably.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .errors import NumericalError, ParameterError

# Absolute tolerance requested from the adaptive quadrature for each q_i.
QUAD_ABS_TOL = 1e-10
# Subdivision cap for the adaptive scheme.
_QUAD_LIMIT = 200


@dataclass(frozen=True)
class DiffusionLink:
    """Physical description of one diffusive hop.

    Attributes:
        distance: transmitter-receiver separation d in metres (> 0).
        drift_velocity: medium drift v toward the receiver in m/s (> 0).
        diffusion_coefficient: D in m^2/s (> 0).
        degradation_rate: exponential degradation rate alpha in 1/s (>= 0).
        slot_duration: slot length tau in seconds (> 0).
    """

    distance: float
    drift_velocity: float
    diffusion_coefficient: float
    degradation_rate: float = 0.0
    slot_duration: float = 1.0

    def __post_init__(self):
        if not (self.distance > 0 and math.isfinite(self.distance)):
            raise ParameterError(f"distance must be positive, got {self.distance}")
        if not (self.drift_velocity > 0 and math.isfinite(self.drift_velocity)):
            raise ParameterError(
                f"drift_velocity must be positive, got {self.drift_velocity}"
            )
        if not (self.diffusion_coefficient > 0 and math.isfinite(self.diffusion_coefficient)):
            raise ParameterError(
                f"diffusion_coefficient must be positive, got {self.diffusion_coefficient}"
            )
        if not (self.degradation_rate >= 0 and math.isfinite(self.degradation_rate)):
            raise ParameterError(
                f"degradation_rate must be >= 0, got {self.degradation_rate}"
            )
        if not (self.slot_duration > 0 and math.isfinite(self.slot_duration)):
            raise ParameterError(
                f"slot_duration must be positive, got {self.slot_duration}"
            )

    @property
    def mean_hitting_time(self) -> float:
        """Mean first hitting time mu = d / v in seconds."""
        return self.distance / self.drift_velocity

    @property
    def shape(self) -> float:
        """Inverse Gaussian shape parameter lam = d^2 / (2 D) in seconds."""
        return self.distance**2 / (2.0 * self.diffusion_coefficient)

    @property
    def mode_hitting_time(self) -> float:
        """Mode of the hitting-time density (useful as a quadrature breakpoint)."""
        mu, lam = self.mean_hitting_time, self.shape
        r = 1.5 * mu / lam
        return mu * (math.sqrt(1.0 + r * r) - r)


@dataclass(frozen=True)
class ArrivalProfile:
    """Per-lag arrival probabilities ``q[i]`` for one hop, lags 0..max_lag."""

    q: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.q, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "q", arr)

    def __len__(self) -> int:
        return len(self.q)

    def __getitem__(self, lag):
        return self.q[lag]

    @property
    def max_lag(self) -> int:
        return len(self.q) - 1


def _log_pdf_scalar(t: float, mu: float, lam: float) -> float:
    d = t - mu
    return 0.5 * (math.log(lam) - math.log(2.0 * math.pi) - 3.0 * math.log(t)) - (
        lam * d * d
    ) / (2.0 * mu * mu * t)


def hitting_time_pdf(link: DiffusionLink, t):
    """First hitting time density f(t) of the link; zero for t <= 0.

    Accepts a scalar or array ``t`` (seconds) and returns the matching shape.
    """
    mu, lam = link.mean_hitting_time, link.shape
    t_arr = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t_arr)
    pos = t_arr > 0
    if np.any(pos):
        tp = t_arr[pos]
        logf = (
            0.5 * (np.log(lam) - np.log(2.0 * np.pi) - 3.0 * np.log(tp))
            - lam * (tp - mu) ** 2 / (2.0 * mu * mu * tp)
        )
        out[pos] = np.exp(logf)
    if np.isscalar(t) or t_arr.ndim == 0:
        return float(out)
    return out


def arrival_probability(link: DiffusionLink, lag: int) -> float:
    """Probability q_lag that a released molecule is counted ``lag`` slots later.

    Integrates f(t) exp(-alpha t) over [lag tau, (lag+1) tau) with adaptive
    quadrature (absolute tolerance ``QUAD_ABS_TOL``).  The exponential factor
    is the probability the molecule is still intact when it first arrives.

    Raises:
        ParameterError: if ``lag`` is negative.
        NumericalError: if the quadrature does not converge; carries the
            achieved error estimate.
    """
    if lag < 0:
        raise ParameterError(f"lag must be >= 0, got {lag}")
    mu, lam = link.mean_hitting_time, link.shape
    alpha = link.degradation_rate
    a = lag * link.slot_duration
    b = (lag + 1) * link.slot_duration

    def integrand(t: float) -> float:
        if t <= 0.0:
            return 0.0
        return math.exp(_log_pdf_scalar(t, mu, lam) - alpha * t)

    # Break the interval at the density's mean and mode so a peak that is
    # narrow relative to the slot window cannot slip between sample points.
    pts = [p for p in (link.mode_hitting_time, mu) if a < p < b]
    val, abserr, info, *msg = quad(
        integrand,
        a,
        b,
        epsabs=QUAD_ABS_TOL,
        epsrel=1e-10,
        limit=_QUAD_LIMIT,
        points=pts or None,
        full_output=1,
    )
    if msg:  # QUADPACK flagged non-convergence (ier != 0)
        raise NumericalError(
            f"arrival probability quadrature failed on [{a}, {b}]: {msg[0]}",
            error_estimate=abserr,
        )
    # Clip roundoff excursions; the integral of a sub-probability density
    # over a window is a probability.
    return min(max(val, 0.0), 1.0)


@lru_cache(maxsize=256)
def arrival_profile(link: DiffusionLink, max_lag: int) -> ArrivalProfile:
    """Arrival probabilities for lags 0..max_lag of one hop.

    Cached on the (frozen, hashable) link so sweeps that revisit the same
    hop geometry do not pay for the quadrature twice.
    """
    if max_lag < 0:
        raise ParameterError(f"max_lag must be >= 0, got {max_lag}")
    q = np.array([arrival_probability(link, i) for i in range(max_lag + 1)])
    return ArrivalProfile(q)

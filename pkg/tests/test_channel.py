"""First-hitting-time density and slotted arrival probabilities."""

import numpy as np
import pytest
import scipy.stats

import molrelay as mr
from molrelay import ParameterError

from helpers import make_link

# Reference link: d = 30 um, v = 7 um/s, D = 2.2e-11 m^2/s.
# Hitting-time mean d/v = 30/7 s; shape d^2/(2D) = 450/22 s.
REF_MEAN = 30.0 / 7.0
REF_SHAPE = 450.0 / 22.0

# Density values computed independently at 40-digit precision from
# sqrt(shape/(2 pi t^3)) * exp(-shape (t - mean)^2 / (2 mean^2 t)).
REF_PDF = {
    1.0: 0.004421839005346817,
    4.0: 0.2229871468682728,
    10.0: 0.009261442858823280,
}

# Slot integrals of the density times exp(-0.2 t) over [i*2.5, (i+1)*2.5],
# same 40-digit oracle.
REF_Q = {
    0: 0.10539196779261143,
    1: 0.27001346103108816,
    2: 0.06624849896216738,
}


def ref_link(alpha=0.2, tau=2.5):
    return make_link(30, 7e-6, tau, alpha=alpha)


def test_hitting_time_density_matches_high_precision_values():
    link = ref_link()
    for t, want in REF_PDF.items():
        got = mr.hitting_time_pdf(link, t)
        assert got == pytest.approx(want, rel=1e-13)


def test_hitting_time_density_matches_scipy_inverse_gaussian():
    link = ref_link()
    dist = scipy.stats.invgauss(REF_MEAN / REF_SHAPE, scale=REF_SHAPE)
    ts = np.linspace(0.05, 25.0, 200)
    got = mr.hitting_time_pdf(link, ts)
    assert np.allclose(got, dist.pdf(ts), rtol=1e-12, atol=0.0)


def test_hitting_time_density_zero_at_origin_and_vectorized():
    link = ref_link()
    assert mr.hitting_time_pdf(link, 0.0) == 0.0
    ts = np.array([0.0, 1.0, 4.0, 10.0])
    out = mr.hitting_time_pdf(link, ts)
    assert out.shape == ts.shape
    for t, y in zip(ts, out):
        assert y == mr.hitting_time_pdf(link, float(t))


def test_hitting_time_density_normalizes_and_has_stated_mean():
    # Without degradation the density integrates to 1 with mean d/v;
    # checked against the scipy CDF and a quadrature of t*f(t).
    link = ref_link()
    dist = scipy.stats.invgauss(REF_MEAN / REF_SHAPE, scale=REF_SHAPE)
    assert dist.mean() == pytest.approx(REF_MEAN, rel=1e-12)
    from scipy.integrate import quad

    def split_integral(f):
        head, _ = quad(f, 0, 50.0, points=[REF_MEAN], limit=200)
        tail, _ = quad(f, 50.0, np.inf)
        return head + tail

    total = split_integral(lambda t: mr.hitting_time_pdf(link, t))
    mean = split_integral(lambda t: t * mr.hitting_time_pdf(link, t))
    assert total == pytest.approx(1.0, abs=1e-9)
    assert mean == pytest.approx(REF_MEAN, abs=1e-8)


def test_arrival_probability_matches_high_precision_values():
    link = ref_link()
    for lag, want in REF_Q.items():
        assert mr.arrival_probability(link, lag) == pytest.approx(want, abs=5e-10)


def test_arrival_probabilities_decay_and_stay_substochastic():
    link = ref_link()
    qs = [mr.arrival_probability(link, i) for i in range(40)]
    assert all(q >= 0.0 for q in qs)
    assert sum(qs) < 1.0
    # Far past the mode the per-slot mass must fall off monotonically.
    tail = qs[6:]
    assert all(a > b for a, b in zip(tail, tail[1:]))


def test_degradation_only_removes_mass():
    plain = ref_link(alpha=0.0)
    decayed = ref_link(alpha=0.2)
    for lag in range(6):
        assert mr.arrival_probability(decayed, lag) < mr.arrival_probability(plain, lag)


def test_arrival_profile_length_and_cache():
    link = ref_link()
    prof = mr.arrival_profile(link, 5)
    assert prof.q.shape == (6,)
    for lag in range(6):
        assert prof.q[lag] == pytest.approx(mr.arrival_probability(link, lag), abs=1e-12)
    assert mr.arrival_profile(link, 5) is prof


def test_link_parameter_validation():
    good = dict(distance=30e-6, drift_velocity=7e-6,
                diffusion_coefficient=2.2e-11, degradation_rate=0.2,
                slot_duration=2.5)
    for key, bad in [("distance", 0.0), ("drift_velocity", -1e-6),
                     ("diffusion_coefficient", 0.0), ("degradation_rate", -0.1),
                     ("slot_duration", 0.0)]:
        kw = dict(good, **{key: bad})
        with pytest.raises(ParameterError):
            mr.DiffusionLink(**kw)


def test_negative_lag_rejected():
    with pytest.raises(ParameterError):
        mr.arrival_probability(ref_link(), -1)

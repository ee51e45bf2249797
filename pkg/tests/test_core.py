"""Intensity evaluation and domain-type validation."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.special import expit

from reactivepp import core, kernels
from reactivepp.core import (
    EntityRecord,
    Inspection,
    KernelParams,
    RegressionKernel,
    RppParams,
)
from reactivepp.errors import InvalidParameterError, ValidationError

# single event at t=0 observed just afterwards with base 0.01, lift 0.1,
# unit cap/slope: 0.01 * (1 + sat(0.5) + 0.1); mpmath, 40 digits
DEMO_INTENSITY = 0.014160514859237645
LINK_BETA = 2.40896947491543

COV0 = np.zeros(3)


def entity(events=(), inspections=(), cov=COV0, eid="e"):
    insp = tuple(Inspection(t) if not isinstance(t, Inspection) else t
                 for t in inspections)
    return EntityRecord(eid, cov, np.asarray(events, dtype=float), insp)


def test_inspection_validation():
    Inspection(0.0)
    Inspection(5.0, core.TYPE_I, repair_draw=0.3)
    with pytest.raises(ValidationError):
        Inspection(-1.0)
    with pytest.raises(ValidationError):
        Inspection(float("nan"))
    with pytest.raises(ValidationError):
        Inspection(1.0, "type7")


def test_entity_record_validation():
    entity(events=[1.0, 1.0, 2.0])  # ties are legal
    with pytest.raises(ValidationError):
        EntityRecord("", COV0)
    with pytest.raises(ValidationError):
        EntityRecord("e", np.zeros(2))
    with pytest.raises(ValidationError):
        entity(events=[2.0, 1.0])
    with pytest.raises(ValidationError):
        entity(events=[-1.0])
    with pytest.raises(ValidationError):
        entity(inspections=[Inspection(3.0), Inspection(1.0)])


def test_kernel_params_validation():
    KernelParams()
    with pytest.raises(InvalidParameterError):
        KernelParams(excitation_cap=-0.1)
    with pytest.raises(InvalidParameterError):
        KernelParams(regulation_cap=1.2)
    with pytest.raises(InvalidParameterError):
        KernelParams(excitation_decay=0.0)
    with pytest.raises(InvalidParameterError):
        RppParams(base_rate=-1e-3)
    with pytest.raises(InvalidParameterError):
        RppParams(base_rate=1e-3, event_lift=-0.5)


def test_demo_intensity_value():
    p = RppParams(base_rate=0.01, event_lift=0.1,
                  kernel=KernelParams(excitation_decay=0.005))
    e = entity(events=[0.0])
    assert core.intensity(1e-12, e, p) == pytest.approx(DEMO_INTENSITY, rel=1e-9)


def test_history_is_strictly_before():
    p = RppParams(base_rate=0.01, event_lift=0.1)
    e = entity(events=[100.0])
    # at the event time itself neither the kernel nor the lift applies
    assert core.intensity(100.0, e, p) == pytest.approx(0.01, rel=1e-15)
    assert core.intensity(100.0 + 1e-9, e, p) > 0.011


def test_homogeneous_reduction():
    p = RppParams(base_rate=3e-3, event_lift=0.0,
                  kernel=KernelParams(excitation_cap=0.0))
    e = entity(events=np.sort(np.linspace(5, 900, 37)),
               inspections=[])
    t = np.linspace(0.0, 1000.0, 257)
    lam = core.intensity(t, e, p)
    assert np.allclose(lam, 3e-3, rtol=0, atol=1e-18)


def test_max_intensity_bounds_everything():
    rng = np.random.default_rng(7)
    p = RppParams(base_rate=0.02, event_lift=0.15,
                  kernel=KernelParams(excitation_cap=1.3, excitation_slope=0.7,
                                      excitation_decay=0.004))
    cap = core.max_intensity(p)
    assert cap == pytest.approx(0.02 * (1 + 1.3 + 0.15), rel=1e-15)
    for trial in range(25):
        ev = np.sort(rng.uniform(0, 2000, size=rng.integers(0, 40)))
        it = np.sort(rng.uniform(0, 2000, size=rng.integers(0, 10)))
        e = entity(events=ev, inspections=it.tolist())
        lam = core.intensity(np.linspace(0, 2100, 401), e, p)
        assert np.all(lam <= cap + 1e-15)
        assert np.all(lam >= 0.0)


def test_intensity_matches_hand_bracket():
    # direct transliteration of the bracket as the oracle
    rng = np.random.default_rng(11)
    p = RppParams(base_rate=0.05, event_lift=0.2,
                  kernel=KernelParams(excitation_cap=0.9, excitation_slope=1.4,
                                      regulation_cap=0.35, regulation_slope=2.0,
                                      excitation_decay=0.01,
                                      regulation_decay=0.003))
    for trial in range(40):
        ev = np.sort(rng.uniform(0, 500, size=rng.integers(0, 12)))
        it = np.sort(rng.uniform(0, 500, size=rng.integers(0, 6)))
        e = entity(events=ev, inspections=it.tolist())
        t = float(rng.uniform(0, 600))
        se = sum(expit(-0.01 * (t - te)) for te in ev if t > te)
        si = -sum(expit(-0.003 * (t - ti)) for ti in it if t > ti)
        bracket = (1.0
                   + kernels.excitation_saturation(se, 0.9, 1.4)
                   - kernels.regulation_saturation(si, 0.35, 2.0)
                   + 0.2 * (1.0 if np.any(ev < t) else 0.0))
        want = 0.05 * max(bracket, 0.0)
        assert core.intensity(t, e, p) == pytest.approx(want, rel=1e-12)


def test_regulation_reduces_intensity():
    p = RppParams(base_rate=0.01, kernel=KernelParams(regulation_decay=0.002))
    bare = entity()
    inspected = entity(inspections=[50.0])
    t = 60.0
    assert core.intensity(t, inspected, p) < core.intensity(t, bare, p)


def test_event_lift_is_permanent():
    p = RppParams(base_rate=0.01, event_lift=0.3,
                  kernel=KernelParams(excitation_decay=5.0))
    e = entity(events=[10.0])
    # excitation long gone at t=1e5; only the lift remains
    assert core.intensity(1e5, e, p) == pytest.approx(0.013, rel=1e-6)


def test_resolve_decays_fixed_and_regression():
    e = entity(cov=np.array([0.2, -0.1, 0.3]))
    fixed = RppParams(1e-3, kernel=KernelParams(excitation_decay=0.02,
                                                regulation_decay=0.05))
    assert core.resolve_decays(fixed, e) == (0.02, 0.05)
    reg = RppParams(1e-3, kernel=RegressionKernel(
        excitation_coeffs=np.array([-4.6554, -0.5716, -4.8028])))
    beta, gamma = core.resolve_decays(reg, e)
    assert beta == pytest.approx(LINK_BETA, rel=1e-12)
    assert gamma == pytest.approx(np.log(2.0), rel=1e-15)
    reg2 = RppParams(1e-3, kernel=RegressionKernel(
        excitation_coeffs=np.array([-4.6554, -0.5716, -4.8028]),
        regulation_coeffs=np.array([-4.6554, -0.5716, -4.8028])))
    assert core.resolve_decays(reg2, e)[1] == pytest.approx(LINK_BETA, rel=1e-12)


def test_regression_kernel_validation():
    with pytest.raises(InvalidParameterError):
        RegressionKernel(excitation_coeffs=np.zeros(2))
    with pytest.raises(InvalidParameterError):
        RegressionKernel(excitation_coeffs=np.array([np.inf, 0, 0]))


def test_intensity_array_matches_scalars():
    p = RppParams(base_rate=0.02, event_lift=0.1)
    e = entity(events=[5.0, 30.0], inspections=[12.0])
    t = np.linspace(0, 100, 53)
    arr = core.intensity(t, e, p)
    assert arr.shape == t.shape
    assert np.allclose(arr, [core.intensity(x, e, p) for x in t],
                       rtol=0, atol=0)


def test_intensity_clamped_at_zero():
    # unit-amplitude inspections with a heavy regulation cap push the bracket
    # negative only in the unsaturated model; the saturated one stays >= 0
    p = RppParams(base_rate=0.1, kernel=KernelParams(regulation_cap=1.0,
                                                     regulation_slope=8.0,
                                                     regulation_decay=1e-5))
    e = entity(inspections=list(np.arange(1.0, 200.0, 2.0)))
    lam = core.intensity(np.linspace(0, 250, 101), e, p)
    assert np.all(lam >= 0.0)
    assert lam.min() < 0.1 * 0.05  # regulation really bites

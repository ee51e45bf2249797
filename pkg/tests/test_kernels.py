"""Kernel and saturation transforms against independently evaluated values.

Frozen constants below were computed with 40-digit mpmath straight from the
defining formulas before the implementation existed; tests compare against
those decimals, not against the module itself.
"""

from __future__ import annotations

import numpy as np
import pytest

from reactivepp import kernels
from reactivepp.errors import DimensionMismatchError, InvalidParameterError

# mpmath, 40 digits, rounded to float64
EXC_1000_0005 = 0.0066928509242848556
SAT_EXC_1_1698_015 = 1.7684389244018674
SAT_EXC_05_1_1 = 0.3160514859237645
SAT_REG_M05_04_375 = 0.3176653607735406
LINK_DOT = -2.31476
LINK_BETA = 2.40896947491543


def test_excitation_kernel_frozen_value():
    assert kernels.excitation_kernel(1000.0, 0.005) == pytest.approx(
        EXC_1000_0005, rel=1e-12)


def test_excitation_kernel_shape():
    t = np.linspace(0.0, 5000.0, 101)
    v = kernels.excitation_kernel(t, 0.005)
    assert v[0] == 0.5
    assert np.all(np.diff(v) < 0)
    assert np.all((v > 0) & (v <= 0.5))


def test_regulation_kernel_is_negated_excitation():
    t = np.linspace(0.0, 2000.0, 50)
    assert np.array_equal(kernels.regulation_kernel(t, 0.01),
                          -kernels.excitation_kernel(t, 0.01))


def test_excitation_saturation_frozen_values():
    assert kernels.excitation_saturation(1.0, 16.98, 0.15) == pytest.approx(
        SAT_EXC_1_1698_015, rel=1e-12)
    assert kernels.excitation_saturation(0.5, 1.0, 1.0) == pytest.approx(
        SAT_EXC_05_1_1, rel=1e-12)


def test_excitation_saturation_range_and_monotonicity():
    w = np.linspace(0.0, 60.0, 400)
    v = kernels.excitation_saturation(w, 2.5, 0.8)
    assert v[0] == 0.0
    assert np.all(np.diff(v) >= 0)
    assert np.all(v <= 2.5)
    # strictly concave increasing before float saturation kicks in
    head = kernels.excitation_saturation(np.linspace(0.0, 10.0, 200), 2.5, 0.8)
    assert np.all(np.diff(head) > 0)
    assert np.all(head[1:] < 2.5)
    assert np.all(np.diff(head, 2) < 0)
    assert kernels.excitation_saturation(1e9, 2.5, 0.8) == pytest.approx(2.5)


def test_regulation_saturation_frozen_values():
    assert kernels.regulation_saturation(-0.5, 0.4, 3.75) == pytest.approx(
        SAT_REG_M05_04_375, rel=1e-12)
    assert kernels.regulation_saturation(-1e9, 0.4, 3.75) == pytest.approx(
        0.4, rel=1e-12)
    assert kernels.regulation_saturation(0.0, 0.4, 3.75) == 0.0


def test_regulation_saturation_caps_below_one():
    w = np.linspace(-40.0, 0.0, 200)
    v = kernels.regulation_saturation(w, 0.4, 3.75)
    assert np.all((v >= 0) & (v <= 0.4))
    assert np.all(np.diff(v) < 1e-15)  # deeper regulation, larger reduction


def test_saturation_parameter_validation():
    with pytest.raises(InvalidParameterError):
        kernels.excitation_saturation(1.0, -1.0, 1.0)
    with pytest.raises(InvalidParameterError):
        kernels.excitation_saturation(1.0, 1.0, 0.0)
    with pytest.raises(InvalidParameterError):
        kernels.regulation_saturation(-1.0, 1.5, 1.0)  # cap must stay <= 1
    with pytest.raises(InvalidParameterError):
        kernels.regulation_saturation(0.5, 0.4, 1.0)  # positive total


def test_softplus_basics():
    assert kernels.softplus(0.0) == pytest.approx(np.log(2.0), rel=1e-15)
    assert kernels.softplus(50.0) == pytest.approx(50.0, rel=1e-12)
    assert kernels.softplus(-60.0) == pytest.approx(np.exp(-60.0), rel=1e-9)
    x = np.linspace(-30, 30, 301)
    assert np.all(kernels.softplus(x) > 0)


def test_covariate_decay_frozen_link():
    cov = np.array([0.2, -0.1, 0.3])
    ups = np.array([-4.6554, -0.5716, -4.8028])
    assert float(cov @ ups) == pytest.approx(LINK_DOT, rel=1e-12)
    assert kernels.covariate_decay(cov, ups) == pytest.approx(
        LINK_BETA, rel=1e-12)


def test_covariate_decay_batched():
    rows = np.array([[0.2, -0.1, 0.3], [0.0, 0.0, 0.0], [-0.5, 0.5, 0.5]])
    ups = np.array([-4.6554, -0.5716, -4.8028])
    out = kernels.covariate_decay(rows, ups)
    assert out.shape == (3,)
    assert out[0] == pytest.approx(LINK_BETA, rel=1e-12)
    assert out[1] == pytest.approx(np.log(2.0), rel=1e-14)
    single = [kernels.covariate_decay(r, ups) for r in rows]
    assert np.allclose(out, single, rtol=0, atol=0)
    assert np.all(out > 0)


def test_covariate_decay_dimension_check():
    with pytest.raises(DimensionMismatchError):
        kernels.covariate_decay(np.zeros(3), np.zeros(4))
    with pytest.raises(DimensionMismatchError):
        kernels.covariate_decay(np.zeros((5, 2)), np.zeros(3))

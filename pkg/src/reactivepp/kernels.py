"""Kernel and link functions for reactive point processes.

An event at time s contributes excitation_kernel(t - s, decay) to the
excitation sum at time t; an inspection contributes regulation_kernel
(negative). The two saturation transforms map those sums onto bounded
lifts/cuts so the intensity stays inside
[base_rate * (1 - regulation_cap), base_rate * (1 + excitation_cap + event_lift)].

All functions accept scalars or arrays in their first argument and
validate parameter domains eagerly.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from .errors import DimensionMismatchError, InvalidParameterError

LOG2 = float(np.log(2.0))


def _check_positive(name, value):
    if not np.isfinite(value) or value <= 0:
        raise InvalidParameterError(f"{name} must be finite and > 0, got {value!r}")


def _check_nonnegative(name, value):
    if not np.isfinite(value) or value < 0:
        raise InvalidParameterError(f"{name} must be finite and >= 0, got {value!r}")


def excitation_kernel(elapsed, decay):
    """Post-event excitation 1 / (1 + e^(decay * elapsed)).

    Starts at 1/2 immediately after an event and decays to 0 at rate `decay`
    (per day). `elapsed` must be >= 0.
    """
    _check_positive("decay", decay)
    elapsed = np.asarray(elapsed, dtype=np.float64)
    if np.any(elapsed < 0):
        raise InvalidParameterError("elapsed must be >= 0")
    return expit(-decay * elapsed)


def regulation_kernel(elapsed, decay):
    """Post-inspection regulation -1 / (1 + e^(decay * elapsed)), in [-1/2, 0)."""
    return -excitation_kernel(elapsed, decay)


def excitation_saturation(total, cap, slope):
    """Map a nonnegative excitation sum onto [0, cap).

    cap * (1 - log(1 + e^(-slope * total)) / log 2); zero at total = 0 and
    saturating at `cap` as the sum grows, so stacked events cannot push the
    intensity past base_rate * (1 + cap + event_lift).
    """
    _check_nonnegative("cap", cap)
    _check_positive("slope", slope)
    total = np.asarray(total, dtype=np.float64)
    if np.any(total < 0):
        raise InvalidParameterError("excitation total must be >= 0")
    return cap * (1.0 - np.log1p(np.exp(-slope * total)) / LOG2)


def regulation_saturation(total, cap, slope):
    """Map a nonpositive regulation sum onto [0, cap).

    cap * (1 - log(1 + e^(slope * total)) / log 2) for total <= 0; the result
    is subtracted from the intensity bracket, and because it never reaches
    `cap` the intensity keeps a floor of base_rate * (1 + lift - cap).
    cap must lie in [0, 1] for that floor to be nonnegative.
    """
    _check_positive("slope", slope)
    if not np.isfinite(cap) or cap < 0 or cap > 1:
        raise InvalidParameterError(f"regulation cap must be in [0, 1], got {cap!r}")
    total = np.asarray(total, dtype=np.float64)
    if np.any(total > 0):
        raise InvalidParameterError("regulation total must be <= 0")
    return cap * (1.0 - np.log1p(np.exp(slope * total)) / LOG2)


def softplus(x):
    """log(1 + e^x), overflow-safe."""
    x = np.asarray(x, dtype=np.float64)
    return np.logaddexp(0.0, x)


def covariate_decay(covariates, coeffs):
    """Decay rate from covariates: softplus(-<covariates, coeffs>).

    Positive by construction for any coefficient vector. `covariates` may be
    a single 3-vector or an (n, 3) matrix; returns a scalar or length-n array.
    """
    covariates = np.asarray(covariates, dtype=np.float64)
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.ndim != 1 or coeffs.shape != (covariates.shape[-1],):
        raise DimensionMismatchError(
            f"coefficient shape {coeffs.shape} does not match covariates "
            f"{covariates.shape}"
        )
    score = covariates @ coeffs
    out = softplus(-score)
    return float(out) if out.ndim == 0 else out

"""Domain types and the reactive point process intensity.

The conditional intensity of an entity at time t is

    lambda(t) = base_rate * [ 1
                              + excitation_saturation(sum_e excitation_kernel(t - t_e))
                              - regulation_saturation(sum_i regulation_kernel(t - t_i))
                              + event_lift * 1[any event before t] ]

clamped at zero, where both sums run over history strictly before t.
Decay rates are either shared constants (KernelParams) or derived per entity
from covariates through a softplus link (RegressionKernel).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import kernels
from .errors import InvalidParameterError, ValidationError

CLEAN = "clean"
TYPE_I = "type1"
TYPE_II_IV = "type2_4"
OUTCOME_KINDS = (CLEAN, TYPE_I, TYPE_II_IV)


@dataclass(frozen=True)
class Inspection:
    """An inspection at `time` with an outcome kind and, when the outcome was
    sampled in a policy simulation, the repair severity draw."""

    time: float
    kind: str = CLEAN
    repair_draw: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.time) or self.time < 0:
            raise ValidationError(f"inspection time must be finite and >= 0, got {self.time!r}")
        if self.kind not in OUTCOME_KINDS:
            raise ValidationError(f"unknown inspection outcome {self.kind!r}")


@dataclass(frozen=True)
class EntityRecord:
    """One entity: identity, normalized covariates, and its event/inspection history.

    Events are kept as a sorted float array of day offsets; ties (several
    events with the same timestamp) are legal and contribute additively.
    """

    id: str
    covariates: np.ndarray
    events: np.ndarray = field(default_factory=lambda: np.empty(0))
    inspections: tuple[Inspection, ...] = ()

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValidationError("entity id must be a nonempty string")
        cov = np.asarray(self.covariates, dtype=np.float64)
        if cov.shape != (3,) or not np.all(np.isfinite(cov)):
            raise ValidationError(f"covariates must be 3 finite reals, got {self.covariates!r}")
        ev = np.asarray(self.events, dtype=np.float64)
        if ev.ndim != 1 or not np.all(np.isfinite(ev)):
            raise ValidationError("events must be a 1-d array of finite times")
        if ev.size and (np.any(ev < 0) or np.any(np.diff(ev) < 0)):
            raise ValidationError("events must be nonnegative and nondecreasing")
        insp = tuple(self.inspections)
        times = [i.time for i in insp]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValidationError("inspections must be sorted by time")
        object.__setattr__(self, "covariates", cov)
        object.__setattr__(self, "events", ev)
        object.__setattr__(self, "inspections", insp)

    def inspection_times(self) -> np.ndarray:
        return np.array([i.time for i in self.inspections], dtype=np.float64)


@dataclass(frozen=True)
class KernelParams:
    """Shared kernel constants: saturation caps/slopes and the two decay rates."""

    excitation_cap: float = 1.0      # a1 >= 0
    excitation_slope: float = 1.0    # b1 > 0
    regulation_cap: float = 0.4      # a3 in [0, 1]
    regulation_slope: float = 3.75   # b3 > 0
    excitation_decay: float = 0.01   # beta > 0, per day
    regulation_decay: float = 0.01   # gamma > 0, per day

    def __post_init__(self):
        kernels._check_nonnegative("excitation_cap", self.excitation_cap)
        kernels._check_positive("excitation_slope", self.excitation_slope)
        if not np.isfinite(self.regulation_cap) or not 0 <= self.regulation_cap <= 1:
            raise InvalidParameterError(
                f"regulation_cap must be in [0, 1], got {self.regulation_cap!r}")
        kernels._check_positive("regulation_slope", self.regulation_slope)
        kernels._check_positive("excitation_decay", self.excitation_decay)
        kernels._check_positive("regulation_decay", self.regulation_decay)


@dataclass(frozen=True)
class RegressionKernel:
    """Kernel with per-entity decay rates linked to covariates.

    excitation decay = softplus(-<covariates, excitation_coeffs>); likewise for
    regulation when regulation_coeffs is provided, else softplus(0) = log 2.
    """

    excitation_coeffs: np.ndarray
    regulation_coeffs: np.ndarray | None = None
    excitation_cap: float = 1.0
    excitation_slope: float = 1.0
    regulation_cap: float = 0.4
    regulation_slope: float = 3.75

    def __post_init__(self):
        u = np.asarray(self.excitation_coeffs, dtype=np.float64)
        if u.shape != (3,) or not np.all(np.isfinite(u)):
            raise InvalidParameterError("excitation_coeffs must be 3 finite reals")
        object.__setattr__(self, "excitation_coeffs", u)
        if self.regulation_coeffs is not None:
            w = np.asarray(self.regulation_coeffs, dtype=np.float64)
            if w.shape != (3,) or not np.all(np.isfinite(w)):
                raise InvalidParameterError("regulation_coeffs must be 3 finite reals")
            object.__setattr__(self, "regulation_coeffs", w)
        kernels._check_nonnegative("excitation_cap", self.excitation_cap)
        kernels._check_positive("excitation_slope", self.excitation_slope)
        if not np.isfinite(self.regulation_cap) or not 0 <= self.regulation_cap <= 1:
            raise InvalidParameterError(
                f"regulation_cap must be in [0, 1], got {self.regulation_cap!r}")
        kernels._check_positive("regulation_slope", self.regulation_slope)


@dataclass(frozen=True)
class RppParams:
    """Full model: baseline rate, post-first-event lift, and a kernel spec."""

    base_rate: float                          # lambda0 >= 0, per day
    event_lift: float = 0.0                   # C1 >= 0
    kernel: KernelParams | RegressionKernel = field(default_factory=KernelParams)

    def __post_init__(self):
        if not np.isfinite(self.base_rate) or self.base_rate < 0:
            raise InvalidParameterError(
                f"base_rate must be finite and >= 0, got {self.base_rate!r}")
        kernels._check_nonnegative("event_lift", self.event_lift)
        if not isinstance(self.kernel, (KernelParams, RegressionKernel)):
            raise InvalidParameterError("kernel must be KernelParams or RegressionKernel")


def resolve_decays(params: RppParams, entity: EntityRecord) -> tuple[float, float]:
    """Per-entity (excitation decay, regulation decay) for either kernel form."""
    k = params.kernel
    if isinstance(k, KernelParams):
        return k.excitation_decay, k.regulation_decay
    beta = kernels.covariate_decay(entity.covariates, k.excitation_coeffs)
    if k.regulation_coeffs is None:
        gamma = kernels.LOG2
    else:
        gamma = kernels.covariate_decay(entity.covariates, k.regulation_coeffs)
    return float(beta), float(gamma)


def max_intensity(params: RppParams) -> float:
    """Tight upper bound base_rate * (1 + excitation_cap + event_lift)."""
    return params.base_rate * (1.0 + params.kernel.excitation_cap + params.event_lift)


def regulation_marks(entity: EntityRecord, gamma: float):
    """Unit regulation marks (time, amplitude, decay) for an entity's inspections.

    Every inspection carries the unit kernel -1/(1+e^(gamma t)) in the plain
    model; outcome-dependent repair amplitudes exist only in the policy
    simulation, which builds its own marks.
    """
    t = entity.inspection_times()
    return t, np.ones_like(t), np.full_like(t, gamma)


def intensity(t, entity: EntityRecord, params: RppParams) -> np.ndarray | float:
    """Conditional intensity at time(s) t given history strictly before each t.

    Accepts a scalar or array of times; returns the matching shape. Events and
    inspections located exactly at an evaluation time do not contribute.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if not np.all(np.isfinite(t_arr)):
        raise InvalidParameterError("evaluation times must be finite")
    beta, gamma = resolve_decays(params, entity)
    k = params.kernel
    mt, ma, md = regulation_marks(entity, gamma)
    lam = _intensity_arrays(
        t_arr, entity.events, mt, ma, md, params.base_rate, params.event_lift,
        beta, k.excitation_cap, k.excitation_slope,
        k.regulation_cap, k.regulation_slope)
    return float(lam[0]) if np.isscalar(t) or np.ndim(t) == 0 else lam


def _intensity_arrays(t_arr, events, mark_t, mark_amp, mark_dec,
                      base_rate, event_lift, beta,
                      exc_cap, exc_slope, reg_cap, reg_slope,
                      saturated=True):
    """Vectorized bracket evaluation over sorted history arrays."""
    nt = t_arr.shape[0]
    se = np.zeros(nt)
    if events.size:
        d = t_arr[:, None] - events[None, :]
        np.multiply(expit(-beta * d), d > 0, out=d)
        se = d.sum(axis=1)
    si = np.zeros(nt)
    if mark_t.size:
        d = t_arr[:, None] - mark_t[None, :]
        np.multiply(expit(-mark_dec[None, :] * d), d > 0, out=d)
        si = -(d * mark_amp[None, :]).sum(axis=1)
    ind = (np.searchsorted(events, t_arr, side="left") > 0).astype(np.float64)
    if saturated:
        bracket = (1.0 + kernels.excitation_saturation(se, exc_cap, exc_slope)
                   - kernels.regulation_saturation(si, reg_cap, reg_slope)
                   + event_lift * ind)
    else:
        bracket = 1.0 + se + si + event_lift * ind
    return base_rate * np.clip(bracket, 0.0, None)

"""Conditional-frequency estimation.

Isolated events anchor "trails": day-by-day follow-up windows in which the
empirical probability of another event is tallied as an exact count ratio.
Nonlinear least squares then fits the excitation decay shape A/(1+e^(b t)) to
the curve, and the saturating shape A(1 - log(1+e^(-b x))/log 2) to lift
scatter. A rate-ratio estimator recovers the baseline and the post-first-event
lift from the same corpus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from scipy.special import expit

from .errors import ConvergenceError, InsufficientDataError, InvalidParameterError

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class Trail:
    """Follow-up window after one isolated anchor event.

    event_days holds the relative days (1-based, day d covers elapsed (d-1, d])
    on which at least one later event of the same entity fell, truncated to
    observed_days.
    """

    entity_id: str
    anchor: float
    observed_days: int
    event_days: np.ndarray


@dataclass(frozen=True)
class CfCurve:
    """Empirical conditional frequency per relative day.

    p_hat[d-1] = n_events[d-1] / n[d-1] with integer counts exposed; days with
    no observed trails have n = 0 and p_hat = 0.
    """

    grid: np.ndarray       # relative days 1..window
    p_hat: np.ndarray
    n: np.ndarray          # trails observed through each day
    n_events: np.ndarray   # trails with an event on each day


@dataclass(frozen=True)
class CurveFit:
    amplitude: float
    decay: float
    residual: float        # weighted sum of squared residuals
    flag: str | None = None


@dataclass(frozen=True)
class BaselineFit:
    base_rate: float
    event_lift: float
    n_first_events: int
    pre_exposure: float
    n_isolated_events: int
    post_exposure: float


def build_trails(corpus, t_end, isolation_gap_days=365.0, window_days=365):
    """Trails anchored at events with no earlier event within isolation_gap_days.

    Follow-up is truncated at window_days and at the corpus end; only whole
    observed days count (a partially observed final day is dropped).
    """
    if isolation_gap_days <= 0 or window_days <= 0:
        raise InvalidParameterError("isolation gap and window must be > 0")
    trails = []
    for entity in corpus:
        ev = entity.events
        for j in range(ev.size):
            a = ev[j]
            if j > 0 and a - ev[j - 1] < isolation_gap_days:
                continue
            observed = int(min(window_days, math.floor(t_end - a)))
            if observed < 1:
                continue
            later = ev[ev > a] - a
            days = np.unique(np.ceil(later).astype(np.int64))
            days = days[(days >= 1) & (days <= observed)]
            trails.append(Trail(entity.id, float(a), observed, days))
    return trails


def cf_curve(trails, window_days=365) -> CfCurve:
    """Exact count-ratio curve over relative days 1..window_days."""
    trails = list(trails)
    if not trails:
        raise InsufficientDataError("no trails to aggregate")
    grid = np.arange(1, window_days + 1, dtype=np.int64)
    n = np.zeros(window_days, dtype=np.int64)
    n_events = np.zeros(window_days, dtype=np.int64)
    for tr in trails:
        upto = min(tr.observed_days, window_days)
        if upto >= 1:
            n[:upto] += 1
        d = tr.event_days[tr.event_days <= upto]
        n_events[d - 1] += 1
    with np.errstate(invalid="ignore", divide="ignore"):
        p_hat = np.where(n > 0, n_events / np.maximum(n, 1), 0.0)
    return CfCurve(grid, p_hat, n, n_events)


def _multistart_fit(model, jac, x, y, weights, amp0, decay_starts, bounds):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidParameterError("x and y must be 1-d arrays of equal length")
    if x.size < 2:
        raise InsufficientDataError("need at least 2 points to fit a curve")
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != x.shape or np.any(w < 0):
        raise InvalidParameterError("weights must be nonnegative, same length as x")
    sw = np.sqrt(w)

    def resid(p):
        return sw * (model(p[0], p[1], x) - y)

    def jacobian(p):
        ja, jb = jac(p[0], p[1], x)
        return np.column_stack([sw * ja, sw * jb])

    best = None
    for b0 in decay_starts:
        for a0 in amp0:
            try:
                sol = least_squares(resid, np.array([a0, b0]), jac=jacobian,
                                    bounds=bounds, xtol=1e-14, ftol=1e-14,
                                    gtol=1e-14, max_nfev=2000)
            except Exception:
                continue
            if not sol.success:
                continue
            sse = float(np.sum(sol.fun ** 2))
            if best is None or sse < best[0]:
                best = (sse, float(sol.x[0]), float(sol.x[1]))
    if best is None:
        raise ConvergenceError("curve fit failed from every start")
    return best


def fit_excitation_curve(curve: CfCurve, n_starts=8, min_points=10) -> CurveFit:
    """Weighted fit of A/(1+e^(b t)) to a CF curve, multi-start over
    log-spaced decays; days with no observed trails carry zero weight.

    Flags 'decay-at-lower-bound' when the fitted decay collapses toward zero
    (the data carry no decay signal; amplitude is then only identified jointly
    with b)."""
    mask = curve.n > 0
    if int(np.sum(mask)) < min_points:
        raise InsufficientDataError(
            f"need >= {min_points} observed days, have {int(np.sum(mask))}")
    x = curve.grid[mask].astype(np.float64)
    y = curve.p_hat[mask]
    weights = curve.n[mask].astype(np.float64)

    def model(a, b, t):
        return a * expit(-b * t)

    def jac(a, b, t):
        # d/db of a*expit(-bt) = -a*t*expit(bt)*expit(-bt); stable at large bt
        s = expit(-b * t)
        return s, -a * t * expit(b * t) * s

    ymax = float(np.max(np.abs(y))) if np.max(np.abs(y)) > 0 else 1.0
    starts = np.geomspace(1e-4, 1.0, n_starts)
    sse, a, b = _multistart_fit(model, jac, x, y, weights,
                                amp0=(2.0 * ymax, ymax),
                                decay_starts=starts,
                                bounds=([0.0, 1e-12], [np.inf, 1e3]))
    flag = "decay-at-lower-bound" if b <= 1e-6 else None
    return CurveFit(a, b, math.sqrt(sse), flag)


def fit_saturation_curve(x, y, weights=None, n_starts=8, min_points=10) -> CurveFit:
    """Weighted fit of A(1 - log(1+e^(-b x))/log 2) on nonnegative x.

    Flags 'no-saturation-evidence' when the fitted curve is effectively linear
    over the data range (b * max(x) small): A and b are then only identified
    through their product."""

    def model(a, b, t):
        return a * (1.0 - np.log1p(np.exp(-b * t)) / LOG2)

    def jac(a, b, t):
        e = np.exp(-b * t)
        return (1.0 - np.log1p(e) / LOG2,
                a * t * e / ((1.0 + e) * LOG2))

    x = np.asarray(x, dtype=np.float64)
    if x.size < min_points:
        raise InsufficientDataError(
            f"need >= {min_points} points, have {x.size}")
    if np.any(x < 0):
        raise InvalidParameterError("saturation fit needs x >= 0")
    ymax = float(np.max(np.abs(y))) if np.max(np.abs(y)) > 0 else 1.0
    starts = np.geomspace(1e-3, 10.0, n_starts)
    sse, a, b = _multistart_fit(model, jac, x, y, weights,
                                amp0=(ymax, 2.0 * ymax),
                                decay_starts=starts,
                                bounds=([0.0, 1e-12], [np.inf, 1e6]))
    xmax = float(np.max(x)) if x.size else 0.0
    flag = "no-saturation-evidence" if b * xmax < 0.1 else None
    return CurveFit(a, b, math.sqrt(sse), flag)


def estimate_baseline(corpus, t_end, isolation_gap_days=365.0) -> BaselineFit:
    """Baseline rate and post-first-event lift by exposure-ratio estimation.

    base_rate: first events per entity-day of pre-first-event exposure.
    event_lift: (rate of isolated events over post-first exposure outside the
    union of post-event exclusion windows) / base_rate - 1, clamped info left
    to the caller (the raw ratio may be negative by sampling noise).
    """
    if t_end <= 0:
        raise InsufficientDataError("empty observation window")
    n_first = 0
    pre_exposure = 0.0
    n_post = 0
    post_exposure = 0.0
    for entity in corpus:
        ev = entity.events[entity.events <= t_end]
        if ev.size == 0:
            pre_exposure += t_end
            continue
        first = float(ev[0])
        n_first += 1
        pre_exposure += min(first, t_end)
        gaps = np.diff(ev)
        n_post += int(np.sum(gaps > isolation_gap_days))
        # exposure in (first, t_end] outside union of (e, e+gap] windows
        covered = 0.0
        win_start, win_end = first, first + isolation_gap_days
        for e in ev[1:]:
            if e <= win_end:
                win_end = max(win_end, e + isolation_gap_days)
            else:
                covered += min(win_end, t_end) - min(win_start, t_end)
                win_start, win_end = e, e + isolation_gap_days
        covered += min(win_end, t_end) - min(win_start, t_end)
        post_exposure += (t_end - first) - covered
    if n_first == 0:
        raise InsufficientDataError(
            "no entity has any event: base rate is 0 and the lift is undetermined")
    if pre_exposure <= 0:
        raise InsufficientDataError("no pre-first-event exposure")
    base_rate = n_first / pre_exposure
    if post_exposure <= 0:
        raise InsufficientDataError("no post-first-event exposure outside "
                                    "exclusion windows")
    lift = (n_post / post_exposure) / base_rate - 1.0
    return BaselineFit(base_rate, lift, n_first, pre_exposure, n_post,
                       post_exposure)

"""Approximate Bayesian computation for the covariate-link coefficients.

Coefficient vectors drawn from a heavy-tailed signed prior are scored by
simulating the observed corpus forward and comparing two summary statistics:
the absolute difference in total event counts, and the KL divergence between
inter-event-gap histograms. The jointly-low region of proposals is then
summarized by a quadratic surface expressing the third coefficient in the
other two, and the reported fit is the surface point closest to the origin
(smallest-norm coefficients consistent with the data).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import core
from ._rng import CounterStream, derive_key
from .errors import (
    ConvergenceError,
    DimensionMismatchError,
    InsufficientDataError,
    InvalidParameterError,
    ReactivePPError,
)
from .simulate import SimConfig, corpus_simulate


@dataclass(frozen=True, eq=False)
class Proposal:
    """One evaluated coefficient draw.

    error is None on success; when simulation or scoring failed the message is
    kept and the statistics are NaN.
    """

    upsilon: np.ndarray
    omega: np.ndarray | None
    dne: float
    kl: float
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None and math.isfinite(self.dne) and math.isfinite(self.kl)


@dataclass(frozen=True, eq=False)
class GapHistogram:
    """Normalized histogram of within-entity inter-event gaps.

    Left-closed bins; the final edge is +inf (overflow bin).
    """

    edges: np.ndarray
    masses: np.ndarray
    n_gaps: int

    def __post_init__(self):
        if self.edges.size != self.masses.size + 1:
            raise DimensionMismatchError("edges must have one more entry than masses")
        if np.any(self.masses < 0):
            raise InvalidParameterError("histogram masses must be >= 0")
        if abs(float(np.sum(self.masses)) - 1.0) > 1e-12:
            raise InvalidParameterError("histogram masses must sum to 1")


@dataclass(frozen=True, eq=False)
class QuadraticManifold:
    """Third coefficient as a quadratic in the first two.

    coeffs ordered (1, u, v, u^2, uv, v^2)."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.float64)
        if c.shape != (6,) or not np.all(np.isfinite(c)):
            raise InvalidParameterError("need 6 finite surface coefficients")
        object.__setattr__(self, "coeffs", c)

    def height(self, u, v):
        c = self.coeffs
        return c[0] + c[1] * u + c[2] * v + c[3] * u * u + c[4] * u * v + c[5] * v * v

    def height_gradient(self, u, v):
        c = self.coeffs
        return (c[1] + 2.0 * c[3] * u + c[4] * v,
                c[2] + c[4] * u + 2.0 * c[5] * v)

    def point(self, u, v) -> np.ndarray:
        return np.array([u, v, self.height(u, v)], dtype=np.float64)


@dataclass(frozen=True, eq=False)
class LowRegion:
    """Proposals jointly in the bottom quantile of both statistics."""

    proposals: tuple
    quantile: float
    escalated: bool


def sample_prior(n, seed, n_coeffs=3, sigma_mode="variance") -> np.ndarray:
    """Signed heavy-tailed draws: magnitude exp(N(0, 5)), sign fair-coin.

    sigma_mode picks how N(0, 5) is read: 'variance' (sigma = sqrt 5) or
    'std' (sigma = 5). Deterministic per (seed, draw index), so the list is
    stable under any evaluation order.
    """
    if n < 1:
        raise InvalidParameterError("need n >= 1 draws")
    if sigma_mode not in ("variance", "std"):
        raise InvalidParameterError(f"unknown sigma_mode {sigma_mode!r}")
    sigma = math.sqrt(5.0) if sigma_mode == "variance" else 5.0
    out = np.empty((n, n_coeffs), dtype=np.float64)
    for i in range(n):
        stream = CounterStream(derive_key(seed, "prior", i))
        for j in range(n_coeffs):
            mag = math.exp(sigma * stream.normal())
            sign = -1.0 if stream.uniform() <= 0.5 else 1.0
            out[i, j] = sign * mag
    return out


def _events_by_id(corpus) -> dict:
    table = {}
    for item in corpus:
        eid = getattr(item, "id", None)
        if eid is None:
            eid = item.entity_id
        if eid in table:
            raise InvalidParameterError(f"duplicate entity id {eid!r}")
        table[eid] = np.asarray(item.events, dtype=np.float64)
    return table


def dne(observed, simulated) -> float:
    """Absolute difference in total event counts over matching entity sets."""
    a = _events_by_id(observed)
    b = _events_by_id(simulated)
    if a.keys() != b.keys():
        raise DimensionMismatchError("corpora cover different entity sets")
    total_a = sum(v.size for v in a.values())
    total_b = sum(v.size for v in b.values())
    return float(abs(total_a - total_b))


def gap_histogram(corpus, bin_width_days=30.0, max_gap_days=1800.0) -> GapHistogram:
    """Pool within-entity consecutive gaps and bin them, overflow bin last."""
    if bin_width_days <= 0 or max_gap_days <= 0:
        raise InvalidParameterError("bin width and max gap must be > 0")
    gaps = []
    for item in corpus:
        ev = np.asarray(item.events, dtype=np.float64)
        if ev.size >= 2:
            gaps.append(np.diff(ev))
    if not gaps:
        raise InsufficientDataError("no entity has two or more events")
    pooled = np.concatenate(gaps)
    n_regular = int(math.ceil(max_gap_days / bin_width_days))
    edges = np.append(bin_width_days * np.arange(n_regular + 1), np.inf)
    counts, _ = np.histogram(pooled, bins=edges)
    return GapHistogram(edges, counts / pooled.size, int(pooled.size))


def kl(observed: GapHistogram, simulated: GapHistogram, eps=1e-9) -> float:
    """KL(P||Q) over bins, P = observed. Q is eps-smoothed (and renormalized)
    only when some bin has P > 0 with Q = 0, so P = Q returns exactly 0."""
    if not np.array_equal(observed.edges, simulated.edges):
        raise DimensionMismatchError("histograms use different binnings")
    p = observed.masses
    q = simulated.masses
    if np.any((p > 0) & (q == 0)):
        q = (q + eps) / (1.0 + eps * q.size)
    mask = p > 0
    total = float(np.sum(p[mask] * np.log(p[mask] / q[mask])))
    return max(total, 0.0)


def _blank_histories(observed):
    return [core.EntityRecord(e.id, e.covariates, (), e.inspections)
            for e in observed]


def abc_sweep(observed, params, t_end, n_proposals=1000, seed=0,
              bin_width_days=30.0, max_gap_days=1800.0,
              sigma_mode="variance", include_regulation=False,
              n_jobs=None) -> list[Proposal]:
    """Score n_proposals prior draws against the observed corpus.

    Each proposal swaps its coefficients into the kernel template from
    `params`, simulates the same entities (blank event histories, observed
    inspection schedules) over [0, t_end), and records DNE and KL. Failures
    are captured per proposal. Simulation streams are keyed by the proposal's
    coefficient values, so results are independent of evaluation order and of
    n_jobs.
    """
    if n_proposals < 1:
        raise InvalidParameterError("need n_proposals >= 1")
    observed = list(observed)
    obs_hist = gap_histogram(observed, bin_width_days, max_gap_days)
    obs_total = sum(np.asarray(e.events).size for e in observed)
    blank = _blank_histories(observed)
    k = params.kernel
    ups = sample_prior(n_proposals, derive_key(seed, "abc-upsilon"),
                       sigma_mode=sigma_mode)
    oms = (sample_prior(n_proposals, derive_key(seed, "abc-omega"),
                        sigma_mode=sigma_mode)
           if include_regulation else None)

    def evaluate(i):
        u = ups[i]
        om = None if oms is None else oms[i]
        parts = [seed, "abc-sim", float(u[0]), float(u[1]), float(u[2])]
        if om is not None:
            parts += [float(om[0]), float(om[1]), float(om[2])]
        kern = core.RegressionKernel(u, om, k.excitation_cap, k.excitation_slope,
                                     k.regulation_cap, k.regulation_slope)
        prop_params = core.RppParams(params.base_rate, params.event_lift, kern)
        cfg = SimConfig(0.0, float(t_end), derive_key(*parts))
        try:
            sims = corpus_simulate(blank, prop_params, cfg)
            d = float(abs(obs_total - sum(r.events.size for r in sims)))
            score = kl(obs_hist, gap_histogram(sims, bin_width_days, max_gap_days))
            return Proposal(u, om, d, score)
        except ReactivePPError as exc:
            return Proposal(u, om, float("nan"), float("nan"),
                            f"{type(exc).__name__}: {exc}")

    if n_jobs is not None and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(evaluate, range(n_proposals)))
    return [evaluate(i) for i in range(n_proposals)]


def low_region(proposals, quantile=0.10) -> LowRegion:
    """Proposals in the bottom-quantile sets of both KL and DNE.

    The cutoff is the ceil(q n)-th smallest value of each statistic, ties
    included. An empty intersection doubles q (capped at 0.5, flagged); still
    empty at 0.5 is an error.
    """
    if not 0.0 < quantile < 1.0:
        raise InvalidParameterError("quantile must lie in (0, 1)")
    valid = [p for p in proposals if p.ok]
    if not valid:
        raise InsufficientDataError("no successfully evaluated proposals")
    kls = np.array([p.kl for p in valid])
    dnes = np.array([p.dne for p in valid])
    q = quantile
    escalated = False
    while True:
        rank = max(1, math.ceil(q * len(valid)))
        kl_cut = np.partition(kls, rank - 1)[rank - 1]
        dne_cut = np.partition(dnes, rank - 1)[rank - 1]
        sel = (kls <= kl_cut) & (dnes <= dne_cut)
        if np.any(sel):
            chosen = tuple(p for p, s in zip(valid, sel) if s)
            return LowRegion(chosen, q, escalated)
        if q >= 0.5:
            raise InsufficientDataError(
                "bottom-quantile sets stay disjoint up to q = 0.5")
        escalated = True
        q = min(2.0 * q, 0.5)


def _as_points(points) -> np.ndarray:
    seq = list(points)
    if seq and isinstance(seq[0], Proposal):
        seq = [p.upsilon for p in seq]
    pts = np.asarray(seq, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise DimensionMismatchError("need an (n, 3) array of coefficient points")
    return pts


def fit_manifold(points) -> QuadraticManifold:
    """OLS of the third coefficient on (1, u, v, u^2, uv, v^2)."""
    pts = _as_points(points)
    if pts.shape[0] < 6:
        raise InsufficientDataError("need at least 6 points for 6 coefficients")
    u, v, w = pts[:, 0], pts[:, 1], pts[:, 2]
    design = np.column_stack([np.ones_like(u), u, v, u * u, u * v, v * v])
    coeffs, _, rank, _ = np.linalg.lstsq(design, w, rcond=None)
    if rank < 6:
        raise InsufficientDataError("rank-deficient design: points do not "
                                    "determine a quadratic surface")
    return QuadraticManifold(coeffs)


def _surface_objective(manifold, x):
    u, v = x
    f = manifold.height(u, v)
    fu, fv = manifold.height_gradient(u, v)
    value = u * u + v * v + f * f
    grad = np.array([2.0 * u + 2.0 * f * fu, 2.0 * v + 2.0 * f * fv])
    return value, grad


def closest_point(manifold: QuadraticManifold, grid_size=200, n_starts=12,
                  grad_tol=1e-6) -> np.ndarray:
    """Surface point minimizing distance to the origin.

    The objective at (0, 0) is c0^2, so every minimizer lies within radius
    |c0| of the origin; the search box adds a unit margin. Grid seeding plus
    quasi-Newton polishing; the returned point's objective gradient norm must
    fall below grad_tol.
    """
    c0 = float(manifold.coeffs[0])
    radius = abs(c0) + 1.0
    lin = np.linspace(-radius, radius, grid_size)
    uu, vv = np.meshgrid(lin, lin, indexing="ij")
    ff = manifold.height(uu, vv)
    obj = uu * uu + vv * vv + ff * ff
    order = np.argsort(obj, axis=None)[:n_starts]
    seeds = [np.array([uu.flat[i], vv.flat[i]]) for i in order]
    seeds.append(np.zeros(2))
    best = None
    for x0 in seeds:
        res = minimize(lambda x: _surface_objective(manifold, x), x0,
                       jac=True, method="BFGS",
                       options={"gtol": 1e-12, "maxiter": 1000})
        gnorm = float(np.linalg.norm(_surface_objective(manifold, res.x)[1]))
        if gnorm >= grad_tol:
            continue
        value = float(res.fun)
        if best is None or value < best[0]:
            best = (value, res.x.copy())
    if best is None:
        raise ConvergenceError("no stationary point reached from any start")
    u, v = best[1]
    return manifold.point(float(u), float(v))


@dataclass(frozen=True, eq=False)
class AbcFitResult:
    upsilon: np.ndarray
    manifold: QuadraticManifold
    region: LowRegion
    proposals: tuple = field(repr=False)


def fit_abc(observed, params, t_end, n_proposals=1000, seed=0, quantile=0.10,
            bin_width_days=30.0, max_gap_days=1800.0, sigma_mode="variance",
            include_regulation=False, n_jobs=None) -> AbcFitResult:
    """Sweep, extract the jointly-low region, fit the surface, take the point
    closest to the origin. The region quantile escalates (doubling, capped at
    0.5) until at least 6 points support the surface fit."""
    proposals = abc_sweep(observed, params, t_end, n_proposals, seed,
                          bin_width_days, max_gap_days, sigma_mode,
                          include_regulation, n_jobs)
    q = quantile
    while True:
        region = low_region(proposals, q)
        if len(region.proposals) >= 6 or region.quantile >= 0.5:
            break
        q = min(2.0 * region.quantile, 0.5)
    manifold = fit_manifold(region.proposals)
    point = closest_point(manifold)
    return AbcFitResult(point, manifold, region, tuple(proposals))

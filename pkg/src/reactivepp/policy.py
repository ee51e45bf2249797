"""Inspection-policy simulation and cost minimization.

A bright-line policy inspects every entity once per cycle, on top of a fixed
daily budget of ad-hoc inspections at random entities. Inspection outcomes
are sampled (clean / urgent repair / structural repair) and the repairs
depress the intensity through outcome-specific sigmoid kernels feeding the
regulation saturation. Runs start with one full pre-horizon cycle so the
horizon opens with steady-state vulnerabilities, and reports count events and
inspections per horizon year over replicates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import core
from ._rng import CounterStream, derive_key, uniform as key_uniform
from .errors import InsufficientDataError, InvalidParameterError, ValidationError
from .simulate import SimConfig, corpus_simulate


@dataclass(frozen=True)
class RepairKernelParams:
    """Outcome-specific repair effect laws.

    A repair at elapsed time t contributes -scale * (draw * noise + base) /
    (1 + e^(decay * t)) to the summed regulation input, draw ~ N(0, 1).
    Negative sampled amplitudes are clamped to zero: a repair never raises
    vulnerability.
    """

    type1_scale: float = 83.7989
    type1_base: float = 3.5e-3
    type1_noise: float = 5e-4
    type1_decay: float = 0.0018
    type2_4_scale: float = 49.014
    type2_4_base: float = 7e-3
    type2_4_noise: float = 5e-4
    type2_4_decay: float = 0.00068

    def __post_init__(self):
        for name in ("type1_scale", "type1_base", "type1_noise",
                     "type2_4_scale", "type2_4_base", "type2_4_noise"):
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} must be >= 0")
        for name in ("type1_decay", "type2_4_decay"):
            if getattr(self, name) <= 0:
                raise InvalidParameterError(f"{name} must be > 0")

    def amplitude(self, kind, draw) -> float:
        if kind == core.CLEAN:
            return 0.0
        d = 0.0 if draw is None else float(draw)
        if kind == core.TYPE_I:
            return self.type1_scale * max(d * self.type1_noise + self.type1_base, 0.0)
        if kind == core.TYPE_II_IV:
            return self.type2_4_scale * max(d * self.type2_4_noise + self.type2_4_base, 0.0)
        raise InvalidParameterError(f"unknown inspection outcome {kind!r}")

    def decay(self, kind) -> float:
        if kind == core.TYPE_I:
            return self.type1_decay
        if kind == core.TYPE_II_IV:
            return self.type2_4_decay
        if kind == core.CLEAN:
            return 1.0
        raise InvalidParameterError(f"unknown inspection outcome {kind!r}")

    def marks_for(self, inspections):
        t = np.array([i.time for i in inspections], dtype=np.float64)
        amp = np.array([self.amplitude(i.kind, i.repair_draw) for i in inspections])
        dec = np.array([self.decay(i.kind) for i in inspections])
        return t, amp, dec


DEFAULT_REPAIR = RepairKernelParams()


def repair_effect(kind, draw, elapsed, kernels: RepairKernelParams = DEFAULT_REPAIR) -> float:
    """Signed regulation contribution of one repair after `elapsed` days.

    Clean outcomes contribute exactly 0; repairs are <= 0 always.
    """
    if elapsed < 0:
        raise InvalidParameterError("elapsed must be >= 0")
    amp = kernels.amplitude(kind, draw)
    return -amp / (1.0 + math.exp(kernels.decay(kind) * elapsed))


@dataclass(frozen=True)
class PolicyConfig:
    cycle_years: int
    horizon_years: int = 20
    adhoc_per_day: int = 3
    p_clean: float = 0.5
    p_type1: float = 0.25
    p_type2_4: float = 0.25
    days_per_year: float = 365.0
    seed: int = 0

    def __post_init__(self):
        if int(self.cycle_years) != self.cycle_years or self.cycle_years < 1:
            raise InvalidParameterError("cycle_years must be an integer >= 1")
        if int(self.horizon_years) != self.horizon_years or self.horizon_years < 1:
            raise InvalidParameterError("horizon_years must be an integer >= 1")
        if int(self.adhoc_per_day) != self.adhoc_per_day or self.adhoc_per_day < 0:
            raise InvalidParameterError("adhoc_per_day must be an integer >= 0")
        probs = (self.p_clean, self.p_type1, self.p_type2_4)
        if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-12:
            raise InvalidParameterError("outcome probabilities must be >= 0 and sum to 1")
        if self.days_per_year <= 0:
            raise InvalidParameterError("days_per_year must be > 0")


def schedule_brightline(entity_ids, cycle_years, horizon_years, seed,
                        adhoc_per_day=3, days_per_year=365.0) -> dict:
    """Inspection times per entity over [0, horizon_years * days_per_year).

    Targeted: within every full cycle-length block each entity gets exactly
    one inspection at a uniform time; a partial final block covers a
    round(P * L / cycle) subset without replacement, keeping the total count
    at P * horizon / cycle whenever that is an integer. Ad-hoc: each block
    gets adhoc_per_day * days_per_year * L draws, each pairing a uniform
    entity with a uniform time. Targeted draws are keyed per (entity, block),
    so they do not depend on the entity list's order; subset picks and ad-hoc
    assignments are keyed per block over the sorted id list.
    """
    ids = sorted(entity_ids)
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate entity ids")
    if not ids:
        raise InsufficientDataError("no entities to schedule")
    if cycle_years < 1 or horizon_years < 1:
        raise InvalidParameterError("cycle and horizon must be >= 1 year")
    n = len(ids)
    times = {eid: [] for eid in ids}
    n_blocks = math.ceil(horizon_years / cycle_years)
    for b in range(n_blocks):
        y0 = b * cycle_years
        length = min(cycle_years, horizon_years - y0)
        start = y0 * days_per_year
        span = length * days_per_year
        if length == cycle_years:
            chosen = ids
        else:
            n_pick = round(n * length / cycle_years)
            pick_stream = CounterStream(derive_key(seed, "partial", b))
            chosen = [ids[j] for j in pick_stream.shuffle_pick(n, n_pick)]
        for eid in chosen:
            u = key_uniform(derive_key(seed, "target", eid, b), 0)
            times[eid].append(start + u * span)
        n_adhoc = int(round(adhoc_per_day * days_per_year * length))
        adhoc_stream = CounterStream(derive_key(seed, "adhoc", b))
        for _ in range(n_adhoc):
            j = adhoc_stream.integers(n)
            u = adhoc_stream.uniform()
            times[ids[j]].append(start + u * span)
    return times


def sample_outcome(stream: CounterStream, p_clean=0.5, p_type1=0.25):
    """One inspection outcome: (kind, severity draw or None).

    Consumes a fixed three draws from the stream per call (the severity draw
    is taken even for clean outcomes), so downstream positions never depend on
    the sampled kinds.
    """
    u = stream.uniform()
    r = stream.normal()
    if u <= p_clean:
        return core.CLEAN, None
    if u <= p_clean + p_type1:
        return core.TYPE_I, r
    return core.TYPE_II_IV, r


def realize_schedule(entity_ids, config: PolicyConfig, replicate: int) -> dict:
    """Full inspection histories (times + sampled outcomes) for one replicate.

    Covers the initialization cycle [0, cycle) plus the horizon
    [cycle, cycle + horizon), both in years; deterministic per
    (config.seed, replicate) and per entity.
    """
    rep_key = derive_key(config.seed, "policy", replicate)
    cycle, horizon = config.cycle_years, config.horizon_years
    dpy = config.days_per_year
    init = schedule_brightline(entity_ids, cycle, cycle,
                               derive_key(rep_key, "init"),
                               config.adhoc_per_day, dpy)
    main = schedule_brightline(entity_ids, cycle, horizon,
                               derive_key(rep_key, "main"),
                               config.adhoc_per_day, dpy)
    offset = cycle * dpy
    out = {}
    for eid in init:
        merged = sorted(init[eid] + [t + offset for t in main[eid]])
        stream = CounterStream(derive_key(rep_key, "outcome", eid))
        insp = []
        for t in merged:
            kind, draw = sample_outcome(stream, config.p_clean, config.p_type1)
            insp.append(core.Inspection(t, kind, draw))
        out[eid] = tuple(insp)
    return out


@dataclass(frozen=True, eq=False)
class PolicyReport:
    """Replicate-by-year event and inspection counts for one cycle length.

    Year 0 is the first horizon year; the initialization cycle is excluded
    from all counts.
    """

    cycle_years: int
    horizon_years: int
    n_entities: int
    n_replicates: int
    seed: int
    events_by_year: np.ndarray        # (replicates, years)
    inspections_by_year: np.ndarray   # (replicates, years)

    @property
    def events_total(self) -> np.ndarray:
        return self.events_by_year.sum(axis=1)

    @property
    def inspections_total(self) -> np.ndarray:
        return self.inspections_by_year.sum(axis=1)

    @property
    def events_mean(self) -> float:
        return float(self.events_total.mean())

    @property
    def events_std(self) -> float:
        tot = self.events_total
        return float(tot.std(ddof=1)) if tot.size > 1 else 0.0


def run_policy(entities, params, config: PolicyConfig,
               kernels: RepairKernelParams = DEFAULT_REPAIR,
               n_replicates=50) -> PolicyReport:
    """Monte Carlo bright-line policy evaluation.

    Entities must carry blank histories; each replicate simulates one prior
    cycle for initialization plus the horizon, with sampled inspection
    outcomes driving the repair kernels.
    """
    entities = sorted(entities, key=lambda e: e.id)
    if not entities:
        raise InsufficientDataError("no entities")
    if n_replicates < 1:
        raise InvalidParameterError("need n_replicates >= 1")
    for e in entities:
        if e.events.size or e.inspections:
            raise ValidationError(
                "policy runs generate all histories; entity "
                f"{e.id!r} already has events or inspections")
    ids = [e.id for e in entities]
    dpy = config.days_per_year
    horizon_start = config.cycle_years * dpy
    t_end = horizon_start + config.horizon_years * dpy
    year_edges = horizon_start + dpy * np.arange(config.horizon_years + 1)
    ev_years = np.zeros((n_replicates, config.horizon_years), dtype=np.int64)
    in_years = np.zeros((n_replicates, config.horizon_years), dtype=np.int64)
    for rep in range(n_replicates):
        insp_map = realize_schedule(ids, config, rep)
        records = [core.EntityRecord(e.id, e.covariates, (), insp_map[e.id])
                   for e in entities]
        cfg = SimConfig(0.0, t_end,
                        derive_key(config.seed, "policy", rep, "sim"))
        results = corpus_simulate(records, params, cfg, repair=kernels)
        ev = np.concatenate([r.events for r in results]) if results else np.empty(0)
        ev_years[rep] = np.histogram(ev[ev >= horizon_start], bins=year_edges)[0]
        it = np.concatenate([[i.time for i in insp_map[eid]] for eid in ids])
        in_years[rep] = np.histogram(it[it >= horizon_start], bins=year_edges)[0]
    return PolicyReport(config.cycle_years, config.horizon_years, len(ids),
                        n_replicates, config.seed, ev_years, in_years)


def intensity_floor(params, had_event: bool) -> float:
    """Lower bound on intensity under full regulation saturation."""
    k = params.kernel
    lift = params.event_lift if had_event else 0.0
    return params.base_rate * (1.0 + lift - k.regulation_cap)


def cost_table(entries, cost_event, cost_inspection, n_entities, horizon_years):
    """Total cost per cycle length from (cycle_years, mean event total) pairs.

    cost(Y) = cost_event * events + cost_inspection * P * T / Y. Returns
    (best cycle, [(cycle_years, cost), ...] sorted by cycle); cost ties
    resolve to the shorter cycle.
    """
    if cost_event < 0 or cost_inspection < 0:
        raise InvalidParameterError("costs must be >= 0")
    entries = sorted((int(y), float(m)) for y, m in entries)
    if not entries:
        raise InsufficientDataError("no cycle entries")
    costs = [(y, cost_event * m
              + cost_inspection * n_entities * horizon_years / y)
             for y, m in entries]
    best = min(costs, key=lambda c: (c[1], c[0]))
    return best[0], costs


def optimal_cycle(reports, cost_event, cost_inspection):
    """Cycle length minimizing mean total cost over a report grid."""
    reports = sorted(reports, key=lambda r: r.cycle_years)
    if not reports:
        raise InsufficientDataError("no policy reports")
    horizons = {(r.horizon_years, r.n_entities) for r in reports}
    if len(horizons) != 1:
        raise ValidationError("reports mix horizons or entity counts")
    entries = [(r.cycle_years, r.events_mean) for r in reports]
    return cost_table(entries, cost_event, cost_inspection,
                      reports[0].n_entities, reports[0].horizon_years)

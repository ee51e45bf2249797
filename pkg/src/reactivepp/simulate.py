"""Event-stream simulation by thinning.

The saturated model is sampled with the global dominating rate
base_rate * (1 + excitation_cap + event_lift); acceptance probability at a
proposal time t is exactly intensity(t) / dominating rate. The unsaturated
variant (saturations replaced by their linear limits) has no global bound, so
it uses an adaptive envelope and a runaway guard.

Randomness is drawn from counter streams keyed by (seed, "thin", entity id),
so per-entity results are independent of entity ordering and of parallel
scheduling, and replicate streams never overlap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _compute, core
from ._rng import derive_key
from .errors import InvalidParameterError, RunawayIntensityError, ValidationError

DEFAULT_RUNAWAY_FACTOR = 1e4


@dataclass(frozen=True)
class SimConfig:
    """Horizon [t_start, t_end), stream seed, and optional extras.

    initial_history supplies pre-horizon events/inspections in addition to the
    entity's own; every pre-horizon time must be strictly before t_start.
    record_trace samples the intensity on a grid of step trace_step (days)
    after simulation, using the full realized history.
    """

    t_start: float
    t_end: float
    seed: int
    initial_history: core.EntityRecord | None = None
    record_trace: bool = False
    trace_step: float = 1.0
    runaway_ceiling_factor: float = DEFAULT_RUNAWAY_FACTOR

    def __post_init__(self):
        if not (np.isfinite(self.t_start) and np.isfinite(self.t_end)):
            raise InvalidParameterError("horizon must be finite")
        if self.t_start < 0 or self.t_end <= self.t_start:
            raise InvalidParameterError(
                f"need 0 <= t_start < t_end, got [{self.t_start}, {self.t_end})")
        if self.trace_step <= 0:
            raise InvalidParameterError("trace_step must be > 0")
        if self.runaway_ceiling_factor <= 0:
            raise InvalidParameterError("runaway_ceiling_factor must be > 0")


@dataclass(frozen=True)
class SimResult:
    entity_id: str
    events: np.ndarray                    # accepted events in [t_start, t_end)
    trace_times: np.ndarray | None = None
    trace_values: np.ndarray | None = None


def _pre_history(entity, config, schedule):
    """Merged pre-horizon events and full inspection list for one entity."""
    ev = [entity.events]
    insp = list(entity.inspections)
    if config.initial_history is not None:
        ev.append(config.initial_history.events)
        insp.extend(config.initial_history.inspections)
    events0 = np.sort(np.concatenate(ev)) if ev else np.empty(0)
    if events0.size and events0[-1] >= config.t_start:
        raise ValidationError(
            "pre-horizon events must lie strictly before t_start")
    if schedule is not None:
        for s in schedule:
            insp.append(s if isinstance(s, core.Inspection) else core.Inspection(float(s)))
    insp.sort(key=lambda i: i.time)
    return events0, insp


def _unit_marks(inspections, gamma, amplitude=1.0):
    t = np.array([i.time for i in inspections], dtype=np.float64)
    return t, np.full_like(t, amplitude), np.full_like(t, gamma)


def _marks(inspections, gamma, repair=None, amplitude=1.0):
    """Regulation marks for a sorted inspection list.

    Without a repair model every inspection contributes a unit-amplitude mark
    decaying at the entity's regulation rate. With one, amplitude and decay
    come from the inspection outcome (clean outcomes get amplitude 0).
    """
    if repair is None:
        return _unit_marks(inspections, gamma, amplitude)
    return repair.marks_for(inspections)


def _make_trace(config, events0, accepted, marks, params, beta, saturated):
    grid = np.arange(config.t_start, config.t_end, config.trace_step, dtype=np.float64)
    ev = np.sort(np.concatenate([events0, accepted]))
    k = params.kernel
    vals = _compute.trace_entity(
        grid, ev, marks[0], marks[1], marks[2], params.base_rate,
        params.event_lift, beta, k.excitation_cap, k.excitation_slope,
        k.regulation_cap, k.regulation_slope, saturated)
    return grid, vals


def simulate_entity(entity, params, config, schedule=None, repair=None) -> SimResult:
    """Simulate one entity's events over the config horizon (saturated model)."""
    events0, insp = _pre_history(entity, config, schedule)
    beta, gamma = core.resolve_decays(params, entity)
    marks = _marks(insp, gamma, repair)
    key = np.uint64(derive_key(config.seed, "thin", entity.id))
    k = params.kernel
    flat, off = _compute.thin_saturated_batch(
        np.array([key], dtype=np.uint64), np.array([beta]),
        config.t_start, config.t_end, params.base_rate, params.event_lift,
        k.excitation_cap, k.excitation_slope, k.regulation_cap, k.regulation_slope,
        events0, np.array([0, events0.size], dtype=np.int64),
        marks[0], marks[1], marks[2],
        np.array([0, marks[0].size], dtype=np.int64))
    accepted = flat[off[0]:off[1]]
    tt = tv = None
    if config.record_trace:
        tt, tv = _make_trace(config, events0, accepted, marks, params, beta, True)
    return SimResult(entity.id, accepted, tt, tv)


def simulate_entity_unsaturated(entity, params, config, schedule=None,
                                regulation_amplitude=1.0) -> SimResult:
    """Simulate with the saturations replaced by their linear limits.

    The bracket is 1 + sum(excitation) + sum(regulation) + lift, clamped at 0;
    inspections subtract regulation_amplitude/(1 + e^(gamma t)) each. Raises
    RunawayIntensityError when intensity exceeds
    runaway_ceiling_factor * base_rate (supercritical growth).
    """
    events0, insp = _pre_history(entity, config, schedule)
    beta, gamma = core.resolve_decays(params, entity)
    marks = _unit_marks(insp, gamma, regulation_amplitude)
    key = np.uint64(derive_key(config.seed, "thin", entity.id))
    ceiling = config.runaway_ceiling_factor * params.base_rate
    accepted, status, t_stop = _compute.thin_unsaturated(
        key, config.t_start, config.t_end, params.base_rate, params.event_lift,
        beta, events0, marks[0], marks[1], marks[2], ceiling)
    if status == 1:
        raise RunawayIntensityError(
            f"intensity exceeded {ceiling:g} at t={t_stop:.3f} "
            f"({accepted.size} events accepted)",
            time=float(t_stop), n_events=int(accepted.size))
    tt = tv = None
    if config.record_trace:
        tt, tv = _make_trace(config, events0, accepted, marks, params, beta, False)
    return SimResult(entity.id, accepted, tt, tv)


def corpus_simulate(entities, params, config, schedules=None,
                    repair=None) -> list[SimResult]:
    """Simulate every entity independently (saturated model).

    schedules: optional mapping entity id -> iterable of inspection times or
    Inspection objects. repair: optional per-outcome mark model (see _marks).
    Results are bit-identical under any permutation of `entities` because each
    entity draws from its own keyed stream.
    """
    entities = list(entities)
    if not entities:
        return []
    ids = [e.id for e in entities]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate entity ids")
    keys = np.array([derive_key(config.seed, "thin", e.id) for e in entities],
                    dtype=np.uint64)
    betas = np.empty(len(entities))
    ev_list, mt_list, ma_list, md_list = [], [], [], []
    for j, e in enumerate(entities):
        sched = None if schedules is None else schedules.get(e.id)
        events0, insp = _pre_history(e, config, sched)
        beta, gamma = core.resolve_decays(params, e)
        betas[j] = beta
        mt, ma, md = _marks(insp, gamma, repair)
        ev_list.append(events0)
        mt_list.append(mt)
        ma_list.append(ma)
        md_list.append(md)
    ev_off = np.zeros(len(entities) + 1, dtype=np.int64)
    in_off = np.zeros(len(entities) + 1, dtype=np.int64)
    ev_off[1:] = np.cumsum([a.size for a in ev_list])
    in_off[1:] = np.cumsum([a.size for a in mt_list])
    cat = lambda lst: np.concatenate(lst) if lst else np.empty(0)
    k = params.kernel
    flat, off = _compute.thin_saturated_batch(
        keys, betas, config.t_start, config.t_end, params.base_rate,
        params.event_lift, k.excitation_cap, k.excitation_slope,
        k.regulation_cap, k.regulation_slope,
        cat(ev_list), ev_off, cat(mt_list), cat(ma_list), cat(md_list), in_off)
    results = []
    for j, e in enumerate(entities):
        accepted = flat[off[j]:off[j + 1]].copy()
        tt = tv = None
        if config.record_trace:
            tt, tv = _make_trace(
                config, ev_list[j], accepted,
                (mt_list[j], ma_list[j], md_list[j]), params, betas[j], True)
        results.append(SimResult(e.id, accepted, tt, tv))
    return results


def intensity_trace(entity, params, grid, saturated=True, regulation_amplitude=1.0,
                    repair=None):
    """Intensity over `grid` for the entity's recorded history.

    Diagnostic view of the same evaluation the samplers use; with
    saturated=False the unsaturated bracket is traced and inspection marks are
    scaled by regulation_amplitude. A repair model overrides the unit marks as
    in the samplers.
    """
    grid = np.asarray(grid, dtype=np.float64)
    beta, gamma = core.resolve_decays(params, entity)
    mt, ma, md = _marks(list(entity.inspections), gamma, repair, regulation_amplitude)
    k = params.kernel
    return _compute.trace_entity(
        grid, entity.events, mt, ma, md, params.base_rate, params.event_lift,
        beta, k.excitation_cap, k.excitation_slope,
        k.regulation_cap, k.regulation_slope, saturated)

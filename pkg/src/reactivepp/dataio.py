"""Corpus files, model artifacts, and the synthetic-data generator.

Tabular data is CSV with fixed headers; artifacts and summaries are JSON.
Writers emit an optional leading '#' provenance line which readers skip, so
output comparisons can exclude it. All timestamps are fractional days from a
corpus epoch; ingestion also accepts ISO dates when an epoch is supplied.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from . import core
from ._rng import CounterStream, derive_key
from .errors import InsufficientDataError, InvalidParameterError, ValidationError
from .simulate import SimConfig, corpus_simulate

COVARIATE_COLUMNS = ("main_phase_cables", "oldest_cable_age_years",
                     "total_cable_sets")
EVENTS_HEADER = ["entity_id", "day"]
INSPECTIONS_HEADER = ["entity_id", "day", "outcome"]
COVARIATES_HEADER = ["entity_id", *COVARIATE_COLUMNS]


@dataclass(frozen=True)
class CorpusFiles:
    events: Path
    inspections: Path
    covariates: Path

    @classmethod
    def in_dir(cls, directory) -> "CorpusFiles":
        d = Path(directory)
        return cls(d / "events.csv", d / "inspections.csv", d / "covariates.csv")


@dataclass(frozen=True)
class RejectedRow:
    file: str
    line: int
    reason: str
    raw: str


@dataclass(frozen=True)
class IngestReport:
    rejected: tuple
    n_events: int
    n_inspections: int
    n_entities: int

    @property
    def n_rejected(self) -> int:
        return len(self.rejected)


def _read_rows(path: Path, header, rejected):
    """Yield (line_no, row) for well-shaped rows; collect malformed ones."""
    if not path.exists():
        raise ValidationError(f"missing file: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        head = None
        for line_no, row in enumerate(reader, start=1):
            if not row or (row[0].startswith("#") and head is None):
                continue
            if head is None:
                head = [c.strip() for c in row]
                if head != header:
                    raise ValidationError(
                        f"{path}: header {head!r} does not match {header!r}")
                continue
            if len(row) != len(header):
                rejected.append(RejectedRow(path.name, line_no,
                                            f"expected {len(header)} fields",
                                            ",".join(row)))
                continue
            yield line_no, row
        if head is None:
            raise ValidationError(f"{path}: no header row")


def _parse_day(text, epoch):
    try:
        return float(text)
    except ValueError:
        if epoch is None:
            raise
        return float((date.fromisoformat(text.strip()) - epoch).days)


def ingest(files, epoch=None):
    """Read a corpus directory or CorpusFiles into validated EntityRecords.

    Returns (records sorted by id, IngestReport). Malformed rows land in the
    report; rows referencing an entity absent from the covariates file are a
    hard referential-integrity error. epoch: optional ISO date string letting
    day columns hold ISO dates.
    """
    if not isinstance(files, CorpusFiles):
        files = CorpusFiles.in_dir(files)
    epoch_date = date.fromisoformat(epoch) if epoch is not None else None
    rejected = []
    covariates = {}
    for line_no, row in _read_rows(files.covariates, COVARIATES_HEADER, rejected):
        eid = row[0].strip()
        if not eid:
            rejected.append(RejectedRow(files.covariates.name, line_no,
                                        "empty entity id", ",".join(row)))
            continue
        if eid in covariates:
            raise ValidationError(f"duplicate covariate row for entity {eid!r}")
        try:
            vals = np.array([float(c) for c in row[1:4]])
        except ValueError:
            rejected.append(RejectedRow(files.covariates.name, line_no,
                                        "non-numeric covariate", ",".join(row)))
            continue
        if not np.all(np.isfinite(vals)):
            rejected.append(RejectedRow(files.covariates.name, line_no,
                                        "non-finite covariate", ",".join(row)))
            continue
        covariates[eid] = vals

    def day_rows(path, header, extra=0):
        unknown = []
        parsed = []
        for line_no, row in _read_rows(path, header, rejected):
            eid = row[0].strip()
            if not eid:
                rejected.append(RejectedRow(path.name, line_no,
                                            "empty entity id", ",".join(row)))
                continue
            try:
                day = _parse_day(row[1], epoch_date)
            except ValueError:
                rejected.append(RejectedRow(path.name, line_no,
                                            "unparseable day", ",".join(row)))
                continue
            if not math.isfinite(day) or day < 0:
                rejected.append(RejectedRow(path.name, line_no,
                                            "day must be finite and >= 0",
                                            ",".join(row)))
                continue
            if eid not in covariates:
                unknown.append(eid)
                continue
            parsed.append((eid, day, row[2].strip() if extra else None, line_no))
        if unknown:
            sample = ", ".join(sorted(set(unknown))[:5])
            raise ValidationError(
                f"{path.name}: {len(unknown)} rows reference entities missing "
                f"from the covariates file (e.g. {sample})")
        return parsed

    events = {eid: [] for eid in covariates}
    for eid, day, _, _ in day_rows(files.events, EVENTS_HEADER):
        events[eid].append(day)
    inspections = {eid: [] for eid in covariates}
    for eid, day, outcome, line_no in day_rows(files.inspections,
                                               INSPECTIONS_HEADER, extra=1):
        kind = outcome if outcome else core.CLEAN
        if kind not in core.OUTCOME_KINDS:
            rejected.append(RejectedRow(files.inspections.name, line_no,
                                        f"unknown outcome {kind!r}",
                                        f"{eid},{day},{outcome}"))
            continue
        inspections[eid].append(core.Inspection(day, kind))

    records = [
        core.EntityRecord(eid, covariates[eid], np.sort(np.array(events[eid])),
                          tuple(sorted(inspections[eid], key=lambda i: i.time)))
        for eid in sorted(covariates)
    ]
    report = IngestReport(tuple(rejected),
                          sum(len(v) for v in events.values()),
                          sum(len(v) for v in inspections.values()),
                          len(records))
    return records, report


def normalize_covariates(records):
    """Min-max scale each covariate column to [-0.5, 0.5] over the records.

    Returns (scaled records, bounds array (2, 3) of column min/max, names of
    constant columns, which map to 0).
    """
    records = list(records)
    if not records:
        raise InsufficientDataError("no records to normalize")
    raw = np.array([r.covariates for r in records])
    lo = raw.min(axis=0)
    hi = raw.max(axis=0)
    flags = [COVARIATE_COLUMNS[j] for j in range(raw.shape[1]) if hi[j] == lo[j]]
    bounds = np.vstack([lo, hi])
    return apply_normalization(records, bounds), bounds, flags


def apply_normalization(records, bounds):
    """Scale records with stored bounds; constant columns go to 0."""
    bounds = np.asarray(bounds, dtype=np.float64)
    if bounds.shape != (2, len(COVARIATE_COLUMNS)):
        raise InvalidParameterError("bounds must be a (2, 3) min/max array")
    lo, hi = bounds
    span = hi - lo
    out = []
    for r in records:
        with np.errstate(invalid="ignore", divide="ignore"):
            scaled = np.where(span > 0, (r.covariates - lo) / np.where(span > 0, span, 1.0) - 0.5, 0.0)
        out.append(core.EntityRecord(r.id, scaled, r.events, r.inspections))
    return out


def _kernel_to_dict(kernel):
    shared = {
        "excitation_cap": kernel.excitation_cap,
        "excitation_slope": kernel.excitation_slope,
        "regulation_cap": kernel.regulation_cap,
        "regulation_slope": kernel.regulation_slope,
    }
    if isinstance(kernel, core.RegressionKernel):
        return {
            "kind": "regression",
            "excitation_coeffs": list(map(float, kernel.excitation_coeffs)),
            "regulation_coeffs": (None if kernel.regulation_coeffs is None
                                  else list(map(float, kernel.regulation_coeffs))),
            **shared,
        }
    return {
        "kind": "fixed",
        "excitation_decay": kernel.excitation_decay,
        "regulation_decay": kernel.regulation_decay,
        **shared,
    }


def _kernel_from_dict(d):
    shared = {k: d[k] for k in ("excitation_cap", "excitation_slope",
                                "regulation_cap", "regulation_slope")}
    if d["kind"] == "regression":
        reg = d["regulation_coeffs"]
        return core.RegressionKernel(np.array(d["excitation_coeffs"]),
                                     None if reg is None else np.array(reg),
                                     **shared)
    if d["kind"] == "fixed":
        return core.KernelParams(excitation_decay=d["excitation_decay"],
                                 regulation_decay=d["regulation_decay"],
                                 **shared)
    raise ValidationError(f"unknown kernel kind {d['kind']!r}")


@dataclass(frozen=True, eq=False)
class ModelArtifact:
    """Serializable fitted model: parameters, normalization, provenance."""

    params: core.RppParams
    bounds: np.ndarray | None
    method: str
    seed: int | None = None
    statistics: dict = field(default_factory=dict)
    schema_version: str = "1"

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "method": self.method,
            "seed": self.seed,
            "statistics": self.statistics,
            "base_rate": self.params.base_rate,
            "event_lift": self.params.event_lift,
            "kernel": _kernel_to_dict(self.params.kernel),
            "normalization_bounds": (None if self.bounds is None
                                     else [list(map(float, b)) for b in self.bounds]),
        }

    @classmethod
    def from_dict(cls, d) -> "ModelArtifact":
        if d.get("schema_version") != "1":
            raise ValidationError(
                f"unsupported artifact schema {d.get('schema_version')!r}")
        params = core.RppParams(d["base_rate"], d["event_lift"],
                                _kernel_from_dict(d["kernel"]))
        bounds = d["normalization_bounds"]
        return cls(params,
                   None if bounds is None else np.array(bounds, dtype=np.float64),
                   d["method"], d["seed"], d.get("statistics", {}), "1")


def save_artifact(artifact: ModelArtifact, path):
    with open(path, "w") as fh:
        json.dump(artifact.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_artifact(path) -> ModelArtifact:
    with open(path) as fh:
        return ModelArtifact.from_dict(json.load(fh))


@dataclass(frozen=True, eq=False)
class SyntheticCalibration:
    """Ground-truth generator settings for the public synthetic corpus."""

    base_rate: float = 2.4225e-4
    event_lift: float = 0.0512
    upsilon: np.ndarray = field(
        default_factory=lambda: np.array([-4.6554, -0.5716, -4.8028]))
    excitation_cap: float = 1.0
    excitation_slope: float = 1.0
    regulation_cap: float = 0.4
    regulation_slope: float = 3.75
    horizon_days: float = 5475.0

    def params(self) -> core.RppParams:
        kern = core.RegressionKernel(
            np.asarray(self.upsilon, dtype=np.float64), None,
            self.excitation_cap, self.excitation_slope,
            self.regulation_cap, self.regulation_slope)
        return core.RppParams(self.base_rate, self.event_lift, kern)


def _draw_covariates(n_entities, seed):
    """Skewed cable counts with a long right tail, ages spread over 0-130.

    Total cable sets include the main-phase cables plus extras, keeping the
    two columns positively dependent as in real duct layouts.
    """
    raw = np.empty((n_entities, 3))
    for i in range(n_entities):
        stream = CounterStream(derive_key(seed, "cov", i))
        main = max(1.0, round(math.exp(1.0 + 0.7 * stream.normal())))
        extra = round(math.exp(0.5 + 0.9 * stream.normal()))
        age = min(130.0, max(0.0, 55.0 + 30.0 * stream.normal()))
        raw[i] = (main, age, main + extra)
    return raw


def synthesize_corpus(n_entities, calibration: SyntheticCalibration | None = None,
                      seed=0):
    """Generate raw-covariate records with simulated events plus ground truth.

    Event simulation runs on the min-max-normalized covariates (the link
    model's scale); the returned records keep the raw covariates so the
    written corpus exercises the full ingest-normalize path.
    """
    if n_entities < 1:
        raise InvalidParameterError("need n_entities >= 1")
    cal = calibration if calibration is not None else SyntheticCalibration()
    raw = _draw_covariates(n_entities, seed)
    ids = [f"M{i:06d}" for i in range(n_entities)]
    blank = [core.EntityRecord(ids[i], raw[i], (), ()) for i in range(n_entities)]
    scaled, bounds, flags = normalize_covariates(blank)
    cfg = SimConfig(0.0, cal.horizon_days, derive_key(seed, "events"))
    results = corpus_simulate(scaled, cal.params(), cfg)
    by_id = {r.entity_id: r.events for r in results}
    records = [core.EntityRecord(ids[i], raw[i], by_id[ids[i]], ())
               for i in range(n_entities)]
    truth = {
        "base_rate": cal.base_rate,
        "event_lift": cal.event_lift,
        "upsilon": list(map(float, cal.upsilon)),
        "excitation_cap": cal.excitation_cap,
        "excitation_slope": cal.excitation_slope,
        "regulation_cap": cal.regulation_cap,
        "regulation_slope": cal.regulation_slope,
        "horizon_days": cal.horizon_days,
        "seed": seed,
        "n_entities": n_entities,
        "normalization_bounds": [list(map(float, b)) for b in bounds],
        "constant_columns": flags,
    }
    return records, truth


def _write_csv(path, header, rows, provenance=None):
    with open(path, "w", newline="") as fh:
        if provenance:
            fh.write(f"# {provenance}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x) -> str:
    return repr(float(x))


def write_corpus(records, out_dir, provenance=None) -> CorpusFiles:
    """Write events/inspections/covariates CSVs, entities sorted by id."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = CorpusFiles.in_dir(out)
    records = sorted(records, key=lambda r: r.id)
    _write_csv(files.events, EVENTS_HEADER,
               ((r.id, _fmt(t)) for r in records for t in r.events), provenance)
    _write_csv(files.inspections, INSPECTIONS_HEADER,
               ((r.id, _fmt(i.time), i.kind)
                for r in records for i in r.inspections), provenance)
    _write_csv(files.covariates, COVARIATES_HEADER,
               ((r.id, *(_fmt(c) for c in r.covariates)) for r in records),
               provenance)
    return files


def generate_synthetic(out_dir, n_entities,
                       calibration: SyntheticCalibration | None = None,
                       seed=0, provenance=None) -> CorpusFiles:
    """Write a synthetic corpus plus its ground_truth.json to out_dir."""
    records, truth = synthesize_corpus(n_entities, calibration, seed)
    files = write_corpus(records, out_dir, provenance)
    with open(Path(out_dir) / "ground_truth.json", "w") as fh:
        json.dump(truth, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return files


def write_cf_curve_csv(path, curve, provenance=None):
    _write_csv(path, ["day", "p_hat", "n", "n_events"],
               ((int(d), _fmt(p), int(n), int(k))
                for d, p, n, k in zip(curve.grid, curve.p_hat, curve.n,
                                      curve.n_events)),
               provenance)


def write_proposals_csv(path, proposals, provenance=None):
    _write_csv(path, ["upsilon1", "upsilon2", "upsilon3", "dne", "kl"],
               ((_fmt(p.upsilon[0]), _fmt(p.upsilon[1]), _fmt(p.upsilon[2]),
                 _fmt(p.dne), _fmt(p.kl)) for p in proposals),
               provenance)


def write_policy_report_csv(path, reports, provenance=None):
    rows = []
    for rep in sorted(reports, key=lambda r: r.cycle_years):
        ev = rep.events_by_year
        insp = rep.inspections_by_year
        for y in range(rep.horizon_years):
            col = ev[:, y]
            std = float(col.std(ddof=1)) if col.size > 1 else 0.0
            rows.append((rep.cycle_years, y, _fmt(col.mean()), _fmt(std),
                         _fmt(insp[:, y].mean()), rep.n_replicates))
    _write_csv(path, ["Y", "year", "events_mean", "events_std", "inspections",
                      "replicates"], rows, provenance)


def write_cost_csv(path, costs, provenance=None):
    _write_csv(path, ["Y", "total_cost"],
               ((y, _fmt(c)) for y, c in costs), provenance)


def write_rank_report(csv_path, summary_path, report, provenance=None):
    _write_csv(csv_path, ["event_time", "entity", "rank_a", "rank_b"],
               ((_fmt(t), eid, ra, rb) for t, eid, ra, rb in report.rows),
               provenance)
    summary = {
        "wins_a": report.wins_a,
        "wins_b": report.wins_b,
        "ties": report.ties,
        "better": report.better,
        "p_one_sided": report.p_one_sided,
        "p_two_sided": report.p_two_sided,
        "degenerate": report.degenerate,
    }
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_rejected_csv(path, report: IngestReport, provenance=None):
    _write_csv(path, ["file", "line", "reason", "raw"],
               ((r.file, r.line, r.reason, r.raw) for r in report.rejected),
               provenance)

"""Command-line surface.

Every subcommand reads an optional key=value config file, applies flag
overrides, echoes the resolved settings (for reproducibility), and writes its
outputs under --out. CSV outputs open with a '#' provenance line carrying the
resolved settings and a wall-clock timestamp; everything below that line is
deterministic given the seed. Exit codes: 0 success, 1 validation problem,
2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import core, dataio, policy, ranking
from .errors import (
    DimensionMismatchError,
    InsufficientDataError,
    InvalidParameterError,
    ReactivePPError,
    ValidationError,
)
from .estimators import AbcDecayEstimator, CfEstimator
from .simulate import SimConfig, corpus_simulate


def _load_config(path) -> dict:
    table = {}
    if path is None:
        return table
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"missing config file: {p}")
    for line_no, line in enumerate(p.read_text().splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ValidationError(f"{p}:{line_no}: expected key=value, got {text!r}")
        key, _, value = text.partition("=")
        table[key.strip()] = value.strip()
    return table


class Settings:
    """Flag-over-config-over-default resolution with an echo of the result."""

    def __init__(self, args, command):
        self.command = command
        self.config = _load_config(getattr(args, "config", None))
        self.args = args
        self.resolved = {}

    def get(self, key, cast=str, default=None, required=False):
        flag = getattr(self.args, key.replace("-", "_"), None)
        if flag is not None:
            value = flag if not isinstance(flag, str) else cast(flag)
        elif key in self.config:
            value = cast(self.config[key])
        else:
            value = default
        if value is None and required:
            raise ValidationError(f"{self.command}: missing required setting {key!r}")
        if isinstance(value, str) and cast is not str:
            value = cast(value)
        self.resolved[key] = value
        return value

    def echo(self):
        for key in sorted(self.resolved):
            print(f"resolved {key}={self.resolved[key]}")

    def provenance(self) -> str:
        pairs = " ".join(f"{k}={v}" for k, v in sorted(self.resolved.items()))
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return f"reactivepp {self.command} | {pairs} | written {stamp}"


def _out_dir(settings, default=None) -> Path:
    out = settings.get("out", str, default, required=default is None)
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _ingest(settings, data):
    records, report = dataio.ingest(data, epoch=settings.get("epoch", str))
    if report.n_rejected:
        print(f"warning: {report.n_rejected} malformed rows rejected",
              file=sys.stderr)
    return records, report


def _calibration(settings) -> dataio.SyntheticCalibration:
    base = dataio.SyntheticCalibration()
    upsilon = np.array([
        settings.get("upsilon1", float, float(base.upsilon[0])),
        settings.get("upsilon2", float, float(base.upsilon[1])),
        settings.get("upsilon3", float, float(base.upsilon[2])),
    ])
    return dataio.SyntheticCalibration(
        base_rate=settings.get("base_rate", float, base.base_rate),
        event_lift=settings.get("event_lift", float, base.event_lift),
        upsilon=upsilon,
        excitation_cap=settings.get("excitation_cap", float, base.excitation_cap),
        excitation_slope=settings.get("excitation_slope", float, base.excitation_slope),
        regulation_cap=settings.get("regulation_cap", float, base.regulation_cap),
        regulation_slope=settings.get("regulation_slope", float, base.regulation_slope),
        horizon_days=settings.get("horizon_days", float, base.horizon_days),
    )


def cmd_synth(args) -> int:
    s = Settings(args, "synth")
    n = s.get("entities", int, required=True)
    seed = s.get("seed", int, 0)
    cal = _calibration(s)
    out = _out_dir(s)
    s.echo()
    dataio.generate_synthetic(out, n, cal, seed, provenance=s.provenance())
    total = sum(1 for _ in open(out / "events.csv")) - 2  # header + provenance
    print(f"wrote corpus for {n} entities ({max(total, 0)} events) to {out}")
    return 0


def cmd_ingest_check(args) -> int:
    s = Settings(args, "ingest-check")
    data = s.get("data", str, required=True)
    out = _out_dir(s, default=data)
    s.echo()
    records, report = _ingest(s, data)
    dataio.write_rejected_csv(out / "rejected.csv", report,
                              provenance=s.provenance())
    print(f"entities={report.n_entities} events={report.n_events} "
          f"inspections={report.n_inspections} rejected={report.n_rejected}")
    return 0


def cmd_cf_fit(args) -> int:
    s = Settings(args, "cf-fit")
    data = s.get("data", str, required=True)
    out = _out_dir(s)
    t_end = s.get("t_end", float)
    gap = s.get("isolation_gap_days", float, 365.0)
    window = s.get("window_days", int, 365)
    s.get("seed", int, 0)
    s.echo()
    records, _ = _ingest(s, data)
    normalized, bounds, flags = dataio.normalize_covariates(records)
    est = CfEstimator(isolation_gap_days=gap, window_days=window)
    est.fit(normalized, t_end=t_end)
    stats = {
        "excitation_amplitude": est.excitation_amplitude_,
        "excitation_decay": est.excitation_decay_,
        "fit_flag": est.fit_flag_,
        "event_lift_raw": est.event_lift_,
        "n_trails": len(est.trails_),
        "t_end": est.t_end_,
        "constant_columns": flags,
    }
    artifact = dataio.ModelArtifact(est.params_, bounds, "cf",
                                    s.resolved.get("seed"), stats)
    dataio.save_artifact(artifact, out / "model.json")
    dataio.write_cf_curve_csv(out / "cf_curve.csv", est.curve_,
                              provenance=s.provenance())
    print(f"base_rate={est.base_rate_:.6g} event_lift={est.event_lift_:.6g} "
          f"decay={est.excitation_decay_:.6g} "
          f"amplitude={est.excitation_amplitude_:.6g}")
    return 0


def cmd_abc_fit(args) -> int:
    s = Settings(args, "abc-fit")
    data = s.get("data", str, required=True)
    out = _out_dir(s)
    est = AbcDecayEstimator(
        n_proposals=s.get("proposals", int, 1000),
        quantile=s.get("quantile", float, 0.10),
        bin_width_days=s.get("bin_width_days", float, 30.0),
        max_gap_days=s.get("max_gap_days", float, 1800.0),
        sigma_mode=s.get("sigma_mode", str, "variance"),
        n_jobs=s.get("jobs", int),
        seed=s.get("seed", int, 0),
        base_rate=s.get("base_rate", float),
        event_lift=s.get("event_lift", float),
    )
    t_end = s.get("t_end", float)
    s.echo()
    records, _ = _ingest(s, data)
    normalized, bounds, _ = dataio.normalize_covariates(records)
    est.fit(normalized, t_end=t_end)
    stats = {
        "upsilon": list(map(float, est.upsilon_)),
        "region_quantile": est.region_.quantile,
        "region_escalated": est.region_.escalated,
        "region_size": len(est.region_.proposals),
        "n_proposals": len(est.proposals_),
        "t_end": est.t_end_,
    }
    artifact = dataio.ModelArtifact(est.params_, bounds, "abc",
                                    s.resolved.get("seed"), stats)
    dataio.save_artifact(artifact, out / "model.json")
    dataio.write_proposals_csv(out / "proposals.csv", est.proposals_,
                               provenance=s.provenance())
    with open(out / "manifold.json", "w") as fh:
        json.dump({"coefficients": list(map(float, est.manifold_.coeffs)),
                   "closest_point": list(map(float, est.upsilon_))},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"upsilon=({est.upsilon_[0]:.4f}, {est.upsilon_[1]:.4f}, "
          f"{est.upsilon_[2]:.4f}) from {len(est.region_.proposals)} "
          f"low-region proposals")
    return 0


def _load_model(path) -> dataio.ModelArtifact:
    if path is None or not Path(path).exists():
        raise ValidationError(f"missing model artifact: {path}")
    return dataio.load_artifact(path)


def _normalized_for(artifact, records):
    if artifact.bounds is None:
        return records
    return dataio.apply_normalization(records, artifact.bounds)


def cmd_simulate(args) -> int:
    s = Settings(args, "simulate")
    data = s.get("data", str, required=True)
    out = _out_dir(s)
    artifact = _load_model(s.get("model", str, required=True))
    t_start = s.get("t_start", float, 0.0)
    t_end = s.get("t_end", float, required=True)
    seed = s.get("seed", int, 0)
    s.echo()
    records, _ = _ingest(s, data)
    normalized = _normalized_for(artifact, records)
    # forecasting semantics: condition on events strictly before t_start and
    # regenerate everything after it (inspections stay, they are a schedule)
    dropped = sum(int(np.sum(r.events >= t_start)) for r in normalized)
    if dropped:
        print(f"warning: ignoring {dropped} events at or after "
              f"t_start={t_start:g}", file=sys.stderr)
    history = [core.EntityRecord(r.id, r.covariates,
                                 r.events[r.events < t_start], r.inspections)
               for r in normalized]
    cfg = SimConfig(t_start, t_end, seed)
    results = corpus_simulate(history, artifact.params, cfg)
    dataio._write_csv(out / "sim_events.csv", dataio.EVENTS_HEADER,
                      ((r.entity_id, dataio._fmt(t))
                       for r in results for t in r.events),
                      provenance=s.provenance())
    print(f"simulated {sum(r.events.size for r in results)} events "
          f"for {len(results)} entities")
    return 0


def _parse_cycles(text) -> list:
    try:
        cycles = [int(part) for part in str(text).split(",") if part.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad cycle list {text!r}") from exc
    if not cycles:
        raise ValidationError("no cycle lengths given")
    return cycles


def cmd_policy(args) -> int:
    s = Settings(args, "policy")
    data = s.get("data", str, required=True)
    out = _out_dir(s)
    artifact = _load_model(s.get("model", str, required=True))
    cycles = _parse_cycles(s.get("Y", str, required=True))
    horizon = s.get("horizon_years", int, 20)
    replicates = s.get("replicates", int, 50)
    adhoc = s.get("adhoc_per_day", int, 3)
    seed = s.get("seed", int, 0)
    cost_event = s.get("cost_event", float)
    cost_inspection = s.get("cost_inspection", float)
    s.echo()
    records, _ = _ingest(s, data)
    normalized = _normalized_for(artifact, records)
    blank = [core.EntityRecord(r.id, r.covariates, (), ()) for r in normalized]
    reports = []
    for cycle in cycles:
        cfg = policy.PolicyConfig(cycle, horizon_years=horizon,
                                  adhoc_per_day=adhoc, seed=seed)
        reports.append(policy.run_policy(blank, artifact.params, cfg,
                                         n_replicates=replicates))
        print(f"cycle={cycle}: events_mean={reports[-1].events_mean:.2f} "
              f"inspections={int(reports[-1].inspections_total[0])}")
    dataio.write_policy_report_csv(out / "policy_report.csv", reports,
                                   provenance=s.provenance())
    summary = {
        "horizon_years": horizon,
        "n_entities": len(blank),
        "replicates": replicates,
        "seed": seed,
        "cycles": [
            {"cycle_years": r.cycle_years,
             "events_mean": r.events_mean,
             "events_std": r.events_std,
             "inspections_total": int(r.inspections_total[0])}
            for r in sorted(reports, key=lambda r: r.cycle_years)
        ],
    }
    with open(out / "policy_summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if cost_event is not None and cost_inspection is not None:
        best, costs = policy.optimal_cycle(reports, cost_event, cost_inspection)
        dataio.write_cost_csv(out / "cost.csv", costs, provenance=s.provenance())
        print(f"optimal cycle: {best} years")
    return 0


def cmd_cost(args) -> int:
    s = Settings(args, "cost")
    summary_path = s.get("summary", str, required=True)
    cost_event = s.get("cost_event", float, required=True)
    cost_inspection = s.get("cost_inspection", float, required=True)
    out = _out_dir(s)
    s.echo()
    if not Path(summary_path).exists():
        raise ValidationError(f"missing policy summary: {summary_path}")
    with open(summary_path) as fh:
        summary = json.load(fh)
    entries = [(c["cycle_years"], c["events_mean"]) for c in summary["cycles"]]
    best, costs = policy.cost_table(entries, cost_event, cost_inspection,
                                    summary["n_entities"],
                                    summary["horizon_years"])
    dataio.write_cost_csv(out / "cost.csv", costs, provenance=s.provenance())
    print(f"optimal cycle: {best} years")
    return 0


def cmd_rank(args) -> int:
    s = Settings(args, "rank")
    data = s.get("data", str, required=True)
    out = _out_dir(s)
    art_a = _load_model(s.get("model_a", str, required=True))
    art_b = _load_model(s.get("model_b", str, required=True))
    w0 = s.get("window_start", float, required=True)
    w1 = s.get("window_end", float, required=True)
    s.get("seed", int, 0)
    s.echo()
    if (art_a.bounds is None) != (art_b.bounds is None) or (
            art_a.bounds is not None
            and not np.array_equal(art_a.bounds, art_b.bounds)):
        raise ValidationError("models disagree on covariate normalization")
    records, _ = _ingest(s, data)
    normalized = _normalized_for(art_a, records)
    report = ranking.compare_models(normalized, art_a.params, art_b.params,
                                    w0, w1)
    dataio.write_rank_report(out / "rank_rows.csv", out / "rank_summary.json",
                             report, provenance=s.provenance())
    print(f"wins_a={report.wins_a} wins_b={report.wins_b} ties={report.ties} "
          f"better={report.better} p_one_sided={report.p_one_sided}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reactivepp",
        description="Reactive point process modeling: synthesis, fitting, "
                    "simulation, policy evaluation, and ranking experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value settings file")
        p.add_argument("--seed", help="random seed")
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    common(p)
    p.add_argument("--entities", help="number of entities")
    p.add_argument("--horizon-days", dest="horizon_days")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest-check", help="validate a corpus directory")
    common(p)
    p.add_argument("data", nargs="?", help="corpus directory")
    p.add_argument("--data", dest="data_flag", help="corpus directory")
    p.add_argument("--epoch", help="ISO date for day-offset conversion")
    p.set_defaults(func=cmd_ingest_check)

    p = sub.add_parser("cf-fit", help="conditional-frequency fit")
    common(p)
    p.add_argument("--data", help="corpus directory")
    p.add_argument("--t-end", dest="t_end")
    p.add_argument("--isolation-gap-days", dest="isolation_gap_days")
    p.add_argument("--window-days", dest="window_days")
    p.add_argument("--epoch")
    p.set_defaults(func=cmd_cf_fit)

    p = sub.add_parser("abc-fit", help="ABC fit of link coefficients")
    common(p)
    p.add_argument("--data", help="corpus directory")
    p.add_argument("--t-end", dest="t_end")
    p.add_argument("--proposals")
    p.add_argument("--quantile")
    p.add_argument("--jobs")
    p.add_argument("--sigma-mode", dest="sigma_mode")
    p.add_argument("--base-rate", dest="base_rate")
    p.add_argument("--event-lift", dest="event_lift")
    p.add_argument("--epoch")
    p.set_defaults(func=cmd_abc_fit)

    p = sub.add_parser("simulate", help="simulate a corpus under a model")
    common(p)
    p.add_argument("--data", help="corpus directory")
    p.add_argument("--model", help="model.json path")
    p.add_argument("--t-start", dest="t_start")
    p.add_argument("--t-end", dest="t_end")
    p.add_argument("--epoch")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("policy", help="bright-line policy sweep")
    common(p)
    p.add_argument("--data", help="corpus directory (covariates used)")
    p.add_argument("--model", help="model.json path")
    p.add_argument("--Y", help="comma-separated cycle lengths in years")
    p.add_argument("--horizon-years", dest="horizon_years")
    p.add_argument("--replicates")
    p.add_argument("--adhoc-per-day", dest="adhoc_per_day")
    p.add_argument("--cost-event", dest="cost_event")
    p.add_argument("--cost-inspection", dest="cost_inspection")
    p.add_argument("--epoch")
    p.set_defaults(func=cmd_policy)

    p = sub.add_parser("cost", help="cost curve from a policy summary")
    common(p)
    p.add_argument("--summary", help="policy_summary.json path")
    p.add_argument("--cost-event", dest="cost_event")
    p.add_argument("--cost-inspection", dest="cost_inspection")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("rank", help="compare two models by event ranks")
    common(p)
    p.add_argument("--data", help="corpus directory")
    p.add_argument("--model-a", dest="model_a")
    p.add_argument("--model-b", dest="model_b")
    p.add_argument("--window-start", dest="window_start")
    p.add_argument("--window-end", dest="window_end")
    p.add_argument("--epoch")
    p.set_defaults(func=cmd_rank)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "data_flag", None) and not getattr(args, "data", None):
        args.data = args.data_flag
    try:
        return args.func(args)
    except (ValidationError, InvalidParameterError, InsufficientDataError,
            DimensionMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ReactivePPError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

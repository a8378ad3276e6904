"""Command-line entry points: ``run``, ``experiment`` and ``report``.

Exit codes: 0 success, 2 configuration or usage error, 3 vacuum abort,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import io
from .config import ConfigError, load_config, config_to_dict
from .experiments import EXPERIMENT_IDS, ExperimentError, experiment_to_dict, parse_experiment, run_experiment
from .solver import RunReport, run_simulation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VACUUM = 3
EXIT_IO = 4

# budget tolerance used for the run checklist
BUDGET_TOL = 1e-4
MASS_TOL = 1e-12


def weak_solution_checklist(report: RunReport, floor: float) -> dict:
    """Bounds a weak solution carries, evaluated on the sampled records."""
    recs = report.records
    finite = lambda key: all(math.isfinite(getattr(r, key)) for r in recs)  # noqa: E731
    mass_drift = abs(report.final_mass - report.initial_mass) / abs(report.initial_mass) if report.initial_mass else 0.0
    return {
        "energy_finite": finite("energy_gamma"),
        "energy_inequality": report.max_budget_drift(signed=True) <= BUDGET_TOL,
        "dissipation_finite": finite("dissipation_cum"),
        "grad_rho_bounded": finite("h1_deviation"),
        "orlicz_deviation_finite": finite("orlicz_dev"),
        "density_above_floor": all(r.min_rho >= floor for r in recs),
        "mass_conserved": mass_drift <= MASS_TOL,
    }


def _member_s_values(report: RunReport) -> list[float]:
    return sorted(report.records[0].gain_samples) if report.records else []


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    every = cfg.output.snapshot_every
    counter = {"samples": 0, "written": 0}

    def on_sample(step, state):
        if every and counter["samples"] % every == 0:
            io.write_snapshot(out / "snapshots", counter["written"], state)
            counter["written"] += 1
        counter["samples"] += 1

    report = run_simulation(cfg.initial_state(), cfg.params, cfg.time, cfg.diagnostics, cfg.capillary_form, on_sample)
    report.verdicts = weak_solution_checklist(report, cfg.time.floor(cfg.params))
    io.write_diagnostics_csv(out / "diagnostics.csv", report.records, cfg.diagnostics.s_values)
    payload = {
        "kind": "run",
        "config": config_to_dict(cfg),
        "status": "completed" if report.abort is None else report.abort["cause"],
        "partial": report.abort is not None,
        "snapshots": counter["written"],
        **report.summary(),
    }
    (out / "report.json").write_text(io.dumps(payload) + "\n", encoding="utf-8")
    if report.vacuum_abort:
        return EXIT_VACUUM
    return EXIT_OK


def _verdict_payload(report: RunReport) -> dict:
    return {
        "abort": report.abort,
        "members": {
            name: {k: v for k, v in m.summary().items() if k != "verdicts"} for name, m in report.members.items()
        },
        "verdicts": report.verdicts,
    }


def cmd_experiment(args) -> int:
    try:
        data = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError("spec", f"cannot read {args.spec}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("spec", f"invalid JSON: {exc}") from None
    spec = parse_experiment(data, args.id)
    report = run_experiment(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, member in report.members.items():
        io.write_diagnostics_csv(out / f"{name}.csv", member.records, _member_s_values(member))
    payload = {"kind": "experiment", "id": spec.experiment_id, "spec": experiment_to_dict(spec)}
    payload.update(_verdict_payload(report))
    (out / "report.json").write_text(io.dumps(payload) + "\n", encoding="utf-8")
    aborted = report.vacuum_abort or any(m.vacuum_abort for m in report.members.values())
    return EXIT_VACUUM if aborted else EXIT_OK


def _flatten(prefix: str, value, rows: list) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(value, list) and any(isinstance(v, (dict, list)) for v in value):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, value))


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return io.fmt(value) if isinstance(value, float) else str(value)
    if isinstance(value, list):
        return '"' + " ".join(_csv_cell(v) for v in value) + '"'
    return str(value)


def cmd_report(args) -> int:
    path = Path(args.inp) / "report.json"
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        print(f"error: cannot read {path}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    summary = {
        "kind": data.get("kind"),
        "id": data.get("id"),
        "status": data.get("status", (data.get("verdicts") or {}).get("status")),
        "abort": data.get("abort"),
        "verdicts": data.get("verdicts", {}),
    }
    if args.format == "json":
        sys.stdout.write(io.dumps(summary) + "\n")
    else:
        rows: list = []
        _flatten("", summary, rows)
        sys.stdout.write("key,value\n" + "".join(f"{k},{_csv_cell(v)}\n" for k, v in rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsk", description="Pseudo-spectral capillary fluid runs and diagnostics.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log run progress")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="integrate one configuration")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.set_defaults(func=cmd_run)

    exp = sub.add_parser("experiment", help="run a named experiment")
    exp.add_argument("--id", required=True, choices=EXPERIMENT_IDS, metavar="ID",
                     help="one of: " + ", ".join(EXPERIMENT_IDS))
    exp.add_argument("--spec", required=True)
    exp.add_argument("--out", required=True)
    exp.set_defaults(func=cmd_experiment)

    rep = sub.add_parser("report", help="summarize the verdicts in an output directory")
    rep.add_argument("--in", dest="inp", required=True)
    rep.add_argument("--format", choices=("csv", "json"), default="json")
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ExperimentError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

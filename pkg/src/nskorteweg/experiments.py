"""Reproducible parameter scans around the solver.

Each experiment takes an :class:`ExperimentSpec` and returns a RunReport whose
``verdicts`` follow the keys listed in ``VERDICT_KEYS``; member runs are kept
in ``report.members`` for per-run CSV output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import spectral
from .config import ConfigError, RunConfig, config_to_dict, parse_config
from .functionals import CutoffKind, CutoffSpec, gain_norm_series, trapezoid
from .grid import State
from .initial import InitKind, hypothesis_triple
from .solver import RunReport, run_simulation, stable_dt

EXPERIMENT_IDS = (
    "energy-decay",
    "gain-scan-1d",
    "smallness-scan-2d",
    "compactness-probe",
    "vacuum-persistence-1d",
)

VERDICT_KEYS = {
    "energy-decay": {"status", "dt", "drift", "abs_drift", "drift_half", "abs_drift_half", "ratio", "budget_ok", "converges", "verdict"},
    "gain-scan-1d": {"status", "n", "n_refined", "rows", "verdict"},
    "smallness-scan-2d": {"status", "rows", "triple_monotone", "gain_monotone", "verdict"},
    "compactness-probe": {"status", "scales", "d", "t", "broken_index", "d_non_increasing", "t_non_increasing", "verdict"},
    "vacuum-persistence-1d": {"status", "t_star", "t_end", "completed", "sup_inv_rho_max", "sup_inv_rho", "max_deviation", "deviation_held", "beta_held", "verdict"},
}

# budget-drift improvement required when dt halves
HALVING_GAIN = 8.0
# relative slack for refinement / sequence comparisons
REL_TOL = 0.05


class ExperimentError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    experiment_id: str
    base: RunConfig
    amplitudes: tuple = ()
    s_values: tuple = ()
    mollify_scales: tuple = ()
    beta: float | None = None
    deviation_bound: float | None = None
    drift_tol: float = 1e-4
    refine_factor: int = 2

    def __post_init__(self):
        if self.experiment_id not in EXPERIMENT_IDS:
            raise ExperimentError(f"unknown experiment id {self.experiment_id!r}; valid ids: {', '.join(EXPERIMENT_IDS)}")
        for name in ("amplitudes", "s_values", "mollify_scales"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))


def _strictly_monotone(values: Sequence[float], name: str) -> None:
    if not values:
        raise ExperimentError(f"{name} must be non-empty")
    diffs = np.diff(values)
    if not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ExperimentError(f"{name} must be strictly monotone")


def parse_experiment(data: dict, experiment_id: str | None = None) -> ExperimentSpec:
    if not isinstance(data, dict):
        raise ConfigError("spec", "must be a JSON object")
    eid = experiment_id or data.get("id")
    if data.get("id") not in (None, eid):
        raise ConfigError("id", f"spec declares {data.get('id')!r} but {eid!r} was requested")
    if "base" not in data:
        raise ConfigError("base", "required section missing")
    known = {"id", "base", "amplitudes", "s_values", "mollify_scales", "beta", "deviation_bound", "drift_tol", "refine_factor"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")
    return ExperimentSpec(
        experiment_id=eid,
        base=parse_config(data["base"]),
        amplitudes=tuple(data.get("amplitudes", ())),
        s_values=tuple(data.get("s_values", ())),
        mollify_scales=tuple(data.get("mollify_scales", ())),
        beta=data.get("beta"),
        deviation_bound=data.get("deviation_bound"),
        drift_tol=float(data.get("drift_tol", 1e-4)),
        refine_factor=int(data.get("refine_factor", 2)),
    )


def experiment_to_dict(spec: ExperimentSpec) -> dict:
    return {
        "id": spec.experiment_id,
        "base": config_to_dict(spec.base),
        "amplitudes": list(spec.amplitudes),
        "s_values": list(spec.s_values),
        "mollify_scales": list(spec.mollify_scales),
        "beta": spec.beta,
        "deviation_bound": spec.deviation_bound,
        "drift_tol": spec.drift_tol,
        "refine_factor": spec.refine_factor,
    }


def _run(cfg: RunConfig, initial: State | None = None, keep_trajectory: bool = True, **time_overrides) -> RunReport:
    initial = initial if initial is not None else cfg.initial_state()
    controls = replace(cfg.time, **time_overrides) if time_overrides else cfg.time
    diagnostics = replace(cfg.diagnostics, keep_trajectory=keep_trajectory)
    return run_simulation(initial, cfg.params, controls, diagnostics, cfg.capillary_form)


def _status(report: RunReport) -> str:
    if report.abort is None:
        return "completed"
    return report.abort["cause"]


# -- energy budget ---------------------------------------------------------------


def energy_decay_experiment(spec: ExperimentSpec) -> RunReport:
    """Budget drift at the run's dt and at dt/2.

    ``budget_ok`` checks the signed drift against ``drift_tol``; ``converges``
    requires the absolute drift to shrink by HALVING_GAIN when dt halves.
    """
    cfg = spec.base
    initial = cfg.initial_state()
    dt = stable_dt(initial, cfg.params, cfg.time)
    coarse = _run(cfg, initial, keep_trajectory=False, dt_max=dt)
    report = coarse
    report.members = {"dt": coarse}
    if coarse.vacuum_abort:
        report.verdicts = _energy_verdicts("vacuum_abort", dt, coarse, None, spec)
        return report
    fine = _run(cfg, initial, keep_trajectory=False, dt_max=dt / 2)
    report.members["dt_half"] = fine
    status = "completed" if fine.abort is None else "vacuum_abort"
    report.verdicts = _energy_verdicts(status, dt, coarse, fine, spec)
    return report


def _energy_verdicts(status, dt, coarse, fine, spec) -> dict:
    drift = coarse.max_budget_drift(signed=True)
    abs_drift = coarse.max_budget_drift(signed=False)
    out = {"status": status, "dt": dt, "drift": drift, "abs_drift": abs_drift,
           "drift_half": None, "abs_drift_half": None, "ratio": None,
           "budget_ok": drift <= spec.drift_tol, "converges": False, "verdict": False}
    if fine is None or status != "completed":
        return out
    abs_half = fine.max_budget_drift(signed=False)
    out["drift_half"] = fine.max_budget_drift(signed=True)
    out["abs_drift_half"] = abs_half
    out["ratio"] = abs_drift / abs_half if abs_half > 0 else (math.inf if abs_drift > 0 else None)
    out["converges"] = bool(abs_half * HALVING_GAIN <= abs_drift)
    out["verdict"] = bool(out["budget_ok"] and out["converges"])
    return out


# -- gain of derivative, 1D ------------------------------------------------------------


def gain_scan_1d(spec: ExperimentSpec) -> RunReport:
    """||phi rho^2||_{L^2_T H^{1+s/2}} at n and refine_factor*n for each s."""
    cfg = spec.base
    if cfg.grid.dim != 1:
        raise ExperimentError("gain-scan-1d requires dim = 1")
    s_values = spec.s_values or cfg.diagnostics.s_values
    if not s_values:
        raise ExperimentError("s_values must be non-empty")
    _strictly_monotone(s_values, "s_values")
    n_fine = cfg.grid.n * spec.refine_factor
    fine_cfg = replace(cfg, grid=replace(cfg.grid, n=n_fine))
    coarse = _run(cfg)
    fine = _run(fine_cfg)
    report = coarse
    report.members = {f"n{cfg.grid.n}": coarse, f"n{n_fine}": fine}
    status = "completed" if coarse.abort is None and fine.abort is None else "vacuum_abort"
    cutoff = cfg.diagnostics.cutoff
    t_end = cfg.time.t_end
    rows = []
    for s in s_values:
        a = gain_norm_series(coarse.trajectory[0].grid, coarse.trajectory, cutoff, s)
        b = gain_norm_series(fine.trajectory[0].grid, fine.trajectory, cutoff, s)
        rel = abs(b - a) / abs(b) if b else 0.0
        stabilized = bool(rel < REL_TOL) and status == "completed"
        if s >= 0.5:
            label = "unguaranteed"
        else:
            label = "stabilized" if stabilized else "not_stabilized"
        rows.append({"s": s, "norm_n": a, "norm_refined": b, "rel_change": rel, "T": t_end,
                     "stabilized": stabilized, "label": label})
    verdict = status == "completed" and all(r["stabilized"] for r in rows if r["s"] < 0.5)
    report.verdicts = {"status": status, "n": cfg.grid.n, "n_refined": n_fine, "rows": rows, "verdict": verdict}
    return report


# -- smallness scan, 2D ---------------------------------------------------------------


def smallness_scan_2d(spec: ExperimentSpec) -> RunReport:
    """Hypothesis triple at t=0, sup 1/rho and localized gain norms per amplitude."""
    cfg = spec.base
    if cfg.grid.dim != 2:
        raise ExperimentError("smallness-scan-2d requires dim = 2")
    if cfg.diagnostics.cutoff.kind is not CutoffKind.SMOOTH_BUMP:
        raise ExperimentError("smallness-scan-2d requires a smooth_bump cutoff")
    _strictly_monotone(spec.amplitudes, "amplitudes")
    s_values = spec.s_values or cfg.diagnostics.s_values or (0.0,)
    if any(not 0 <= s < 2 for s in s_values):
        raise ExperimentError("s_values must lie in [0, 2)")
    rows = []
    members = {}
    for i, amp in enumerate(spec.amplitudes):
        member_cfg = replace(cfg, init=replace(cfg.init, amplitude=amp))
        initial = member_cfg.initial_state()
        triple = hypothesis_triple(initial, cfg.params)
        rep = _run(member_cfg, initial)
        members[f"amp{i:02d}"] = rep
        status = _status(rep)
        gains = {}
        if rep.trajectory:
            grid = rep.trajectory[0].grid
            gains = {s: gain_norm_series(grid, rep.trajectory, cfg.diagnostics.cutoff, s) for s in s_values}
        rows.append({
            "amplitude": amp,
            "status": status,
            "t_final": rep.t_final,
            "grad_rho0_l2": triple[0],
            "kinetic_l2": triple[1],
            "j_gamma_l1": triple[2],
            "hypothesis_size": sum(triple),
            "sup_inv_rho": max(r.sup_inv_rho for r in rep.records),
            "gain": {f"{s:g}": g for s, g in gains.items()},
        })
    sizes = [r["hypothesis_size"] for r in rows]
    triple_monotone = all(
        all(b[k] >= a[k] for k in ("grad_rho0_l2", "kinetic_l2", "j_gamma_l1")) for a, b in zip(rows, rows[1:])
    )
    done = [r for r in rows if r["status"] == "completed"]
    gain_monotone = all(
        all(b["gain"][k] >= a["gain"][k] for k in a["gain"]) for a, b in zip(done, done[1:])
    )
    report = RunReport()
    report.records = members[next(iter(members))].records if members else []
    report.members = members
    any_abort = any(r["status"] != "completed" for r in rows)
    report.verdicts = {
        "status": "vacuum_abort" if any_abort else "completed",
        "rows": rows,
        "triple_monotone": bool(triple_monotone and np.all(np.diff(sizes) >= 0)),
        "gain_monotone": bool(gain_monotone),
        "verdict": bool(triple_monotone),
    }
    if any_abort:
        first = next(r for r in rows if r["status"] != "completed")
        report.abort = {"cause": "vacuum_abort", "amplitude": first["amplitude"], "t": first["t_final"]}
    return report


# -- compactness under mollification ---------------------------------------------------


def _aligned(a: RunReport, b: RunReport) -> None:
    ta = [s.t for s in a.trajectory]
    tb = [s.t for s in b.trajectory]
    if len(ta) != len(tb) or not np.allclose(ta, tb, rtol=0, atol=1e-12):
        raise ExperimentError("member runs do not share sample times")


def gradient_distances(member: RunReport, ref: RunReport, chi: np.ndarray) -> tuple[float, float]:
    """(||chi (grad rho_n - grad rho_ref)||_{L^2 L^2}, ||chi (grad rho_n x grad rho_n - ...)||_{L^1 L^1})."""
    _aligned(member, ref)
    grid = ref.trajectory[0].grid
    times, sq, l1 = [], [], []
    for sn, sr in zip(member.trajectory, ref.trajectory):
        gn = spectral.gradient(grid, sn.rho)
        gr = spectral.gradient(grid, sr.rho)
        diff = chi * np.sqrt(np.sum((gn - gr) ** 2, axis=0))
        tens = gn[:, None] * gn[None, :] - gr[:, None] * gr[None, :]
        tens_norm = chi * np.sqrt(np.sum(tens**2, axis=(0, 1)))
        times.append(sr.t)
        sq.append(grid.integrate(diff**2))
        l1.append(grid.integrate(np.abs(tens_norm)))
    return math.sqrt(trapezoid(sq, times)), trapezoid(l1, times)


def compactness_probe(spec: ExperimentSpec) -> RunReport:
    """Gradient and gradient-tensor distances of mollified runs to the finest-scale run."""
    cfg = spec.base
    scales = spec.mollify_scales
    if not scales:
        raise ExperimentError("mollify_scales must be non-empty")
    diffs = np.diff(scales)
    if np.any(diffs > 0):
        raise ExperimentError("mollify_scales must be non-increasing")
    init = cfg.init
    if init.kind is not InitKind.MOLLIFIED_SEQUENCE:
        init = replace(init, kind=InitKind.MOLLIFIED_SEQUENCE, mollify_scale=scales[0])
    grid = cfg.grid.build()
    initials = [replace(init, mollify_scale=s).build(grid, cfg.params) for s in scales]
    # one fixed step for every member so samples line up
    dt = 0.9 * min(stable_dt(st, cfg.params, cfg.time) for st in initials)
    ref = _run(cfg, initials[-1], dt_max=dt)
    members = {}
    runs = []
    for i, (s, st) in enumerate(zip(scales, initials)):
        rep = ref if i == len(scales) - 1 else _run(cfg, st, dt_max=dt)
        members[f"scale{i:02d}"] = rep
        runs.append(rep)
    chi = cfg.diagnostics.cutoff.evaluate(grid)
    broken = next((i for i, r in enumerate(runs) if r.abort is not None), None)
    report = RunReport()
    report.records = ref.records
    report.members = members
    if broken is not None:
        report.abort = {"cause": runs[broken].abort["cause"], "index": broken}
        report.verdicts = {"status": "sequence broken", "scales": list(scales), "d": [], "t": [],
                           "broken_index": broken, "d_non_increasing": False, "t_non_increasing": False,
                           "verdict": False}
        return report
    d, t = [], []
    for rep in runs:
        dn, tn = gradient_distances(rep, ref, chi)
        d.append(dn)
        t.append(tn)
    d_ok = all(b <= a * (1 + REL_TOL) for a, b in zip(d, d[1:]))
    t_ok = all(b <= a * (1 + REL_TOL) for a, b in zip(t, t[1:]))
    report.verdicts = {"status": "completed", "scales": list(scales), "d": d, "t": t, "broken_index": None,
                       "d_non_increasing": d_ok, "t_non_increasing": t_ok, "verdict": bool(d_ok and t_ok)}
    return report


def initial_h1_distances(cfg: RunConfig, scales: Sequence[float]) -> list[float]:
    """||rho_0^n - rho_0^ref||_{H^1} with the smallest scale as reference."""
    grid = cfg.grid.build()
    init = replace(cfg.init, kind=InitKind.MOLLIFIED_SEQUENCE)
    states = [replace(init, mollify_scale=s).build(grid, cfg.params) for s in scales]
    ref = states[-1].rho
    return [spectral.sobolev_norm(grid, st.rho - ref, 1.0) for st in states]


# -- vacuum persistence, 1D -----------------------------------------------------------


def vacuum_persistence_1d(spec: ExperimentSpec) -> RunReport:
    """Largest sampled time with min rho above the floor, and the 1/rho history."""
    cfg = spec.base
    if cfg.grid.dim != 1:
        raise ExperimentError("vacuum-persistence-1d requires dim = 1")
    rep = _run(cfg, keep_trajectory=False)
    rb = cfg.params.rho_bar
    floor = cfg.time.floor(cfg.params)
    good = [r for r in rep.records if r.min_rho >= floor]
    t_star = good[-1].t if good else 0.0
    completed = rep.abort is None and math.isclose(t_star, cfg.time.t_end, rel_tol=0, abs_tol=1e-12)
    c = spec.deviation_bound
    deviation = max(max(rb - r.min_rho, r.max_rho - rb) for r in rep.records)
    deviation_held = None if c is None else bool(deviation <= c)
    beta_held = None if spec.beta is None else bool(all(r.min_rho >= spec.beta for r in rep.records))
    sup_inv = [r.sup_inv_rho for r in rep.records]
    rep.verdicts = {
        "status": _status(rep),
        "t_star": t_star,
        "t_end": cfg.time.t_end,
        "completed": bool(completed),
        "sup_inv_rho_max": max(sup_inv),
        "sup_inv_rho": sup_inv,
        "max_deviation": deviation,
        "deviation_held": deviation_held,
        "beta_held": beta_held,
        "verdict": bool(completed),
    }
    rep.members = {"run": rep}
    return rep


RUNNERS = {
    "energy-decay": energy_decay_experiment,
    "gain-scan-1d": gain_scan_1d,
    "smallness-scan-2d": smallness_scan_2d,
    "compactness-probe": compactness_probe,
    "vacuum-persistence-1d": vacuum_persistence_1d,
}


def run_experiment(spec: ExperimentSpec) -> RunReport:
    return RUNNERS[spec.experiment_id](spec)

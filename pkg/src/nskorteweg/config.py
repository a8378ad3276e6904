"""JSON run configuration: parsing with field-named errors, and exact emission."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .functionals import CutoffSpec, OrliczSpec
from .grid import GridError, ParameterError, PhysParams, build_grid
from .initial import InitKind, InitSpec
from .io import dumps
from .solver import CapillaryForm, DiagnosticsConfig, TimeControls


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


@dataclass(frozen=True)
class GridConfig:
    dim: int
    n: int
    length: float = 2 * math.pi

    def build(self):
        return build_grid(self.dim, self.n, self.length)


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    snapshot_every: int = 0


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig
    params: PhysParams
    init: InitSpec
    time: TimeControls
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    capillary_form: CapillaryForm = CapillaryForm.DIRECT

    def initial_state(self):
        return self.init.build(self.grid.build(), self.params)


_SECTIONS = {
    "grid": {"dim", "n", "length"},
    "params": {"mu", "lambda", "kappa", "a", "gamma", "rho_bar"},
    "init": {"kind", "amplitude", "mode_list", "seed", "mollify_scale", "velocity_ratio", "profile_modes"},
    "time": {"t_end", "cfl", "dt_max", "rho_floor", "dealias_products", "capillary_form"},
    "diagnostics": {"s_values", "sample_every", "cutoff", "orlicz"},
    "output": {"directory", "snapshot_every"},
}
_REQUIRED = {
    "grid": {"dim", "n"},
    "params": {"mu", "lambda", "kappa", "a", "gamma", "rho_bar"},
    "time": {"t_end"},
}


def _section(data: dict, name: str) -> dict:
    sec = data.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(name, "must be an object")
    unknown = set(sec) - _SECTIONS[name]
    if unknown:
        raise ConfigError(f"{name}.{sorted(unknown)[0]}", "unknown field")
    missing = _REQUIRED.get(name, set()) - set(sec)
    if missing:
        raise ConfigError(f"{name}.{sorted(missing)[0]}", "required field missing")
    return sec


def _num(sec: dict, name: str, key: str, default=None, kind=float):
    value = sec.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name}.{key}", "must be a number")
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{name}.{key}", "must be an integer")
        return int(value)
    return float(value)


def parse_config(data: dict) -> RunConfig:
    """Build a RunConfig from a JSON-like dict, re-validating every invariant."""
    if not isinstance(data, dict):
        raise ConfigError("config", "must be a JSON object")
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown section")
    for required in ("grid", "params", "time"):
        if required not in data:
            raise ConfigError(required, "required section missing")

    g = _section(data, "grid")
    grid = GridConfig(_num(g, "grid", "dim", kind=int), _num(g, "grid", "n", kind=int), _num(g, "grid", "length", 2 * math.pi))
    try:
        grid.build()
    except GridError as exc:
        raise ConfigError("grid", str(exc)) from None

    p = _section(data, "params")
    values = {k: _num(p, "params", k) for k in _SECTIONS["params"]}
    try:
        params = PhysParams(
            mu=values["mu"], lam=values["lambda"], kappa=values["kappa"],
            a=values["a"], gamma=values["gamma"], rho_bar=values["rho_bar"],
        )
    except ParameterError as exc:
        key = str(exc).split()[0]
        key = {"2*mu": "mu"}.get(key, key)
        raise ConfigError(f"params.{key}", str(exc)) from None

    i = _section(data, "init")
    try:
        init = InitSpec(
            kind=i.get("kind", InitKind.MODE_PERTURBATION.value),
            amplitude=_num(i, "init", "amplitude", 0.0),
            mode_list=tuple(_mode_entry(e) for e in i.get("mode_list", [[1, 1.0]])),
            seed=_num(i, "init", "seed", 0, int),
            mollify_scale=_num(i, "init", "mollify_scale", 0.0),
            velocity_ratio=_num(i, "init", "velocity_ratio", 0.0),
            profile_modes=_num(i, "init", "profile_modes", 16, int),
        )
        init.terms(grid.dim)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("init", str(exc)) from None

    t = _section(data, "time")
    dealias_flag = t.get("dealias_products", True)
    if not isinstance(dealias_flag, bool):
        raise ConfigError("time.dealias_products", "must be a boolean")
    try:
        controls = TimeControls(
            t_end=_num(t, "time", "t_end"),
            cfl=_num(t, "time", "cfl", 0.5),
            dt_max=_num(t, "time", "dt_max", 1e-2),
            rho_floor=_num(t, "time", "rho_floor", None),
            dealias_products=dealias_flag,
        )
    except ValueError as exc:
        raise ConfigError(f"time.{str(exc).split()[0]}", str(exc)) from None
    try:
        form = CapillaryForm(t.get("capillary_form", CapillaryForm.DIRECT.value))
    except ValueError:
        raise ConfigError("time.capillary_form", "must be 'direct' or 'tensor_divergence'") from None

    d = _section(data, "diagnostics")
    s_values = d.get("s_values", [])
    if not isinstance(s_values, list) or any(isinstance(s, bool) or not isinstance(s, (int, float)) for s in s_values):
        raise ConfigError("diagnostics.s_values", "must be a list of numbers")
    if any(not 0 <= s < 2 for s in s_values):
        raise ConfigError("diagnostics.s_values", "every s must lie in [0, 2)")
    sample_every = _num(d, "diagnostics", "sample_every", 1, int)
    if sample_every < 1:
        raise ConfigError("diagnostics.sample_every", "must be >= 1")
    try:
        cutoff = _cutoff(d.get("cutoff"))
        orlicz = _orlicz(d.get("orlicz"))
    except ValueError as exc:
        raise ConfigError("diagnostics", str(exc)) from None
    diagnostics = DiagnosticsConfig(s_values=tuple(float(s) for s in s_values), sample_every=sample_every, cutoff=cutoff, orlicz=orlicz)

    o = _section(data, "output")
    directory = o.get("directory", "out")
    if not isinstance(directory, str):
        raise ConfigError("output.directory", "must be a string")
    snapshot_every = _num(o, "output", "snapshot_every", 0, int)
    if snapshot_every < 0:
        raise ConfigError("output.snapshot_every", "must be >= 0")
    return RunConfig(grid, params, init, controls, diagnostics, OutputConfig(directory, snapshot_every), form)


def _mode_entry(entry):
    if not isinstance(entry, (list, tuple)) or len(entry) != 2:
        raise ConfigError("init.mode_list", "entries must be [mode, coefficient]")
    return entry[0], entry[1]


def _cutoff(data) -> CutoffSpec:
    if data is None:
        return CutoffSpec()
    return CutoffSpec(kind=data.get("kind", "ones"), center=tuple(data.get("center", ())), radius=float(data.get("radius", 1.0)))


def _orlicz(data) -> OrliczSpec | None:
    if data is None:
        return None
    return OrliczSpec(p=float(data["p"]), q=float(data["q"]), delta=float(data.get("delta", 1.0)))


def config_to_dict(cfg: RunConfig) -> dict:
    def mode_out(mode):
        return mode[0] if len(mode) == 1 else list(mode)

    d = cfg.diagnostics
    return {
        "grid": {"dim": cfg.grid.dim, "n": cfg.grid.n, "length": cfg.grid.length},
        "params": {
            "mu": cfg.params.mu, "lambda": cfg.params.lam, "kappa": cfg.params.kappa,
            "a": cfg.params.a, "gamma": cfg.params.gamma, "rho_bar": cfg.params.rho_bar,
        },
        "init": {
            "kind": cfg.init.kind.value,
            "amplitude": cfg.init.amplitude,
            "mode_list": [[mode_out(m), c] for m, c in cfg.init.mode_list],
            "seed": cfg.init.seed,
            "mollify_scale": cfg.init.mollify_scale,
            "velocity_ratio": cfg.init.velocity_ratio,
            "profile_modes": cfg.init.profile_modes,
        },
        "time": {
            "t_end": cfg.time.t_end,
            "cfl": cfg.time.cfl,
            "dt_max": cfg.time.dt_max,
            "rho_floor": cfg.time.rho_floor,
            "dealias_products": cfg.time.dealias_products,
            "capillary_form": cfg.capillary_form.value,
        },
        "diagnostics": {
            "s_values": list(d.s_values),
            "sample_every": d.sample_every,
            "cutoff": {"kind": d.cutoff.kind.value, "center": list(d.cutoff.center), "radius": d.cutoff.radius},
            "orlicz": None if d.orlicz is None else {"p": d.orlicz.p, "q": d.orlicz.q, "delta": d.orlicz.delta},
        },
        "output": {"directory": cfg.output.directory, "snapshot_every": cfg.output.snapshot_every},
    }


def emit_config(cfg: RunConfig) -> str:
    return dumps(config_to_dict(cfg))


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None
    return parse_config(data)

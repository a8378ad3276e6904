"""Explicit pseudo-spectral integration of the isothermal capillary system.

Unknowns are the density rho and velocity u (non-conservative form):

    d_t rho = -div(rho u)
    d_t u   = -(u.grad)u + [mu Lap u + (mu+lambda) grad div u - grad P(rho) + F(rho)] / rho

with P(rho) = a rho^gamma and capillary force F = kappa rho grad Lap rho.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from . import functionals as fn
from . import spectral
from .grid import Grid, PhysParams, State, check_field, validate_state

log = logging.getLogger(__name__)


class CapillaryForm(str, Enum):
    DIRECT = "direct"
    TENSOR_DIVERGENCE = "tensor_divergence"


class VacuumBreach(RuntimeError):
    """Density dropped below the configured floor."""

    def __init__(self, t: float, location: tuple, min_rho: float, floor: float):
        self.t = t
        self.location = location
        self.min_rho = min_rho
        self.floor = floor
        super().__init__(f"vacuum breach at t={t:.6g}, index {location}: min rho {min_rho:.6g} < {floor:.6g}")


class TimeStepError(ValueError):
    """Requested step exceeds the stability bound."""


@dataclass(frozen=True)
class TimeControls:
    t_end: float
    cfl: float = 0.5
    dt_max: float = 1e-2
    rho_floor: float | None = None
    dealias_products: bool = True

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")
        if self.rho_floor is not None and not self.rho_floor > 0:
            raise ValueError("rho_floor must be positive")

    def floor(self, params: PhysParams) -> float:
        return self.rho_floor if self.rho_floor is not None else params.rho_bar / 100.0


def stable_dt(state: State, params: PhysParams, controls: TimeControls) -> float:
    """Largest step allowed: min(dt_max, cfl dx^2 / S).

    S = sqrt(kappa rho_bar) + (2 mu + lambda)/rho_floor + max|u| dx combines the
    dispersive, viscous and advective rates, all scaled to a dx^2 limit.
    """
    dx = state.grid.dx
    umax = float(np.max(np.abs(state.u))) if state.u.size else 0.0
    scale = (
        math.sqrt(params.kappa * params.rho_bar)
        + (2 * params.mu + params.lam) / controls.floor(params)
        + umax * dx
    )
    return min(controls.dt_max, controls.cfl * dx**2 / scale)


# -- right-hand side ---------------------------------------------------------


def _project(grid: Grid, fh: np.ndarray, dealias: bool) -> np.ndarray:
    return fh * spectral.dealias_mask(grid) if dealias else fh


def _capillary(grid: Grid, rho: np.ndarray, rho_h: np.ndarray, kappa: float, form: CapillaryForm) -> np.ndarray:
    """Unprojected spectrum of the capillary force, shape (dim,) + spectral_shape."""
    k_odd = np.stack(grid.k_odd)
    if form is CapillaryForm.DIRECT:
        grad_lap = spectral.inverse(grid, -1j * k_odd * grid.k2 * rho_h)
        return spectral.forward(grid, kappa * rho * grad_lap)
    grad = spectral.inverse(grid, 1j * k_odd * rho_h)
    lap_rho2 = spectral.laplacian(grid, rho**2)
    iso = 0.5 * kappa * (lap_rho2 - np.sum(grad**2, axis=0))
    aniso = kappa * grad[:, None] * grad[None, :]
    iso_h = spectral.forward(grid, iso)
    aniso_h = spectral.forward(grid, aniso)
    return 1j * k_odd * iso_h - np.sum(1j * k_odd[None, :] * aniso_h, axis=1)


def capillary_force(
    grid: Grid, rho: np.ndarray, kappa: float, form: CapillaryForm = CapillaryForm.DIRECT, dealias: bool = True
) -> np.ndarray:
    """kappa rho grad Lap rho, either directly or as div K with

    K_ij = kappa/2 (Lap(rho^2) - |grad rho|^2) delta_ij - kappa d_i rho d_j rho.
    """
    form = CapillaryForm(form)
    force_h = _capillary(grid, rho, spectral.forward(grid, rho), kappa, form)
    return spectral.inverse(grid, _project(grid, force_h, dealias))


@dataclass
class _Rates:
    drho: np.ndarray
    du: np.ndarray
    dissipation: float


def _rates(grid: Grid, rho: np.ndarray, u: np.ndarray, params: PhysParams, form, dealias: bool) -> _Rates:
    dim = grid.dim
    k_odd = np.stack(grid.k_odd)
    # one batched transform: u components, mass flux rho*u, pressure, rho
    batch = np.concatenate([u, rho * u, params.pressure(rho)[None], rho[None]])
    batch_h = spectral.forward(grid, batch)
    u_h, flux_h = batch_h[:dim], batch_h[dim : 2 * dim]
    pressure_h, rho_h = batch_h[2 * dim], batch_h[2 * dim + 1]

    grad_u_h = 1j * k_odd[None, :] * u_h[:, None]
    div_h = np.sum(1j * k_odd * u_h, axis=0)
    drho_h = _project(grid, -np.sum(1j * k_odd * flux_h, axis=0), dealias)
    body_h = (
        -params.mu * grid.k2 * u_h
        + params.xi * 1j * k_odd * div_h
        - 1j * k_odd * pressure_h
        + _capillary(grid, rho, rho_h, params.kappa, form)
    )
    back = spectral.inverse(grid, np.concatenate([grad_u_h.reshape((dim * dim,) + grid.spectral_shape), body_h, drho_h[None]]))
    grad_u = back[: dim * dim].reshape((dim, dim) + grid.shape)
    body = back[dim * dim : dim * dim + dim]
    drho = back[-1]
    dissipation = fn.dissipation_from_gradient(grid, grad_u, params)

    advection = np.einsum("j...,ij...->i...", u, grad_u)
    rhs = -advection + body / rho
    du = spectral.inverse(grid, _project(grid, spectral.forward(grid, rhs), dealias))
    return _Rates(drho, du, dissipation)


def _check_floor(grid: Grid, rho: np.ndarray, t: float, floor: float | None) -> None:
    if floor is None:
        return
    m = float(rho.min())
    if not m >= floor:
        idx = tuple(int(i) for i in np.unravel_index(int(np.argmin(rho)), rho.shape))
        raise VacuumBreach(t, idx, m, floor)


def tendencies(
    state: State,
    params: PhysParams,
    form: CapillaryForm = CapillaryForm.DIRECT,
    rho_floor: float | None = None,
    dealias: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """(d rho/dt, du/dt) at ``state``; raises VacuumBreach below ``rho_floor``."""
    _check_floor(state.grid, state.rho, state.t, rho_floor)
    r = _rates(state.grid, state.rho, state.u, params, form, dealias)
    return r.drho, r.du


def _rk4(state: State, params: PhysParams, dt: float, form, floor, dealias) -> tuple[State, float]:
    """One classical RK4 step; also returns the step's dissipation integral.

    The dissipation rate is integrated with the same stage weights, which is
    Simpson's rule in time and keeps the energy budget at fourth order.
    """
    grid, t = state.grid, state.t
    rho0, u0 = state.rho, state.u
    stages = ((0.0, None), (0.5, 0), (0.5, 1), (1.0, 2))
    ks: list[_Rates] = []
    for c, prev in stages:
        if prev is None:
            rho, u = rho0, u0
        else:
            rho = rho0 + c * dt * ks[prev].drho
            u = u0 + c * dt * ks[prev].du
        _check_floor(grid, rho, t + c * dt, floor)
        ks.append(_rates(grid, rho, u, params, form, dealias))
    w = (1.0, 2.0, 2.0, 1.0)
    rho_new = rho0 + dt / 6.0 * sum(wi * k.drho for wi, k in zip(w, ks))
    u_new = u0 + dt / 6.0 * sum(wi * k.du for wi, k in zip(w, ks))
    _check_floor(grid, rho_new, t + dt, floor)
    dq = dt / 6.0 * sum(wi * k.dissipation for wi, k in zip(w, ks))
    return State(grid, rho_new, u_new, t + dt), dq


def rk4_step(
    state: State,
    params: PhysParams,
    dt: float,
    form: CapillaryForm = CapillaryForm.DIRECT,
    controls: TimeControls | None = None,
) -> State:
    """Advance ``state`` by ``dt`` with classical RK4.

    With ``controls`` given, ``dt`` is checked against the stability bound and
    every stage against the density floor.
    """
    floor = None
    dealias = True
    if controls is not None:
        bound = stable_dt(state, params, controls)
        if dt > bound * (1 + 1e-12):
            raise TimeStepError(f"dt={dt:.3e} exceeds stability bound {bound:.3e}")
        floor = controls.floor(params)
        dealias = controls.dealias_products
    new, _ = _rk4(state, params, dt, form, floor, dealias)
    return new


# -- driver --------------------------------------------------------------------------


@dataclass(frozen=True)
class DiagnosticsConfig:
    s_values: tuple = ()
    sample_every: int = 1
    cutoff: fn.CutoffSpec = field(default_factory=fn.CutoffSpec)
    orlicz: fn.OrliczSpec | None = None
    keep_trajectory: bool = True

    def __post_init__(self):
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")
        object.__setattr__(self, "s_values", tuple(float(s) for s in self.s_values))


@dataclass
class RunReport:
    records: list = field(default_factory=list)
    trajectory: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    abort: dict | None = None
    members: dict = field(default_factory=dict)
    steps: int = 0
    dt_min: float = math.inf
    dt_max: float = 0.0
    initial_mass: float = 0.0
    final_mass: float = 0.0

    @property
    def vacuum_abort(self) -> bool:
        return self.abort is not None and self.abort.get("cause") == "vacuum_abort"

    @property
    def t_final(self) -> float:
        return self.records[-1].t if self.records else 0.0

    def max_budget_drift(self, signed: bool = True) -> float:
        """max_n (E(t_n) + Q(t_n) - E(0)), relative to E(0) when it is positive."""
        if not self.records:
            return 0.0
        e0 = self.records[0].energy_gamma
        defects = np.array([r.energy_gamma + r.dissipation_cum - e0 for r in self.records])
        if not signed:
            defects = np.abs(defects)
        worst = float(defects.max())
        return worst / e0 if e0 > 0 else worst

    def summary(self) -> dict:
        return {
            "steps": self.steps,
            "t_final": self.t_final,
            "dt_min": self.dt_min if self.steps else 0.0,
            "dt_max": self.dt_max,
            "abort": self.abort,
            "max_budget_drift": self.max_budget_drift(signed=True),
            "max_abs_budget_drift": self.max_budget_drift(signed=False),
            "initial_mass": self.initial_mass,
            "final_mass": self.final_mass,
            "verdicts": self.verdicts,
        }


def _budget_drift(e: float, q: float, e0: float) -> float:
    defect = abs(e + q - e0)
    return defect / e0 if e0 > 0 else defect


def run_simulation(
    initial: State,
    params: PhysParams,
    controls: TimeControls,
    diagnostics: DiagnosticsConfig | None = None,
    form: CapillaryForm = CapillaryForm.DIRECT,
    on_sample: Callable[[int, State], None] | None = None,
) -> RunReport:
    """Integrate from ``initial`` to ``controls.t_end`` or until the density floor is breached.

    Diagnostics are sampled at t=0, every ``sample_every`` steps, and at the
    final time. ``on_sample`` receives (step, state) at each sample.
    """
    diagnostics = diagnostics or DiagnosticsConfig()
    grid = initial.grid
    check_field(grid, initial.rho)
    check_field(grid, initial.u, grid.dim)
    floor = controls.floor(params)
    report = RunReport()
    validation = validate_state(initial, floor)
    phi = diagnostics.cutoff.evaluate(grid)

    def sample(step: int, st: State, q: float) -> None:
        rec = fn.sample_diagnostics(st, params, q, diagnostics.s_values, phi, diagnostics.orlicz)
        e0 = report.records[0].energy_gamma if report.records else rec.energy_gamma
        rec.budget_drift = _budget_drift(rec.energy_gamma, q, e0)
        report.records.append(rec)
        if diagnostics.keep_trajectory:
            report.trajectory.append(st)
        if on_sample is not None:
            on_sample(step, st)

    report.initial_mass = grid.integrate(initial.rho)
    state = initial
    q = 0.0
    sample(0, state, q)
    if not validation.ok:
        report.abort = {"cause": "vacuum_abort", "t": state.t, "min_rho": validation.min_rho}
        report.final_mass = report.initial_mass
        return report

    step = 0
    t_end = controls.t_end
    while state.t < t_end * (1 - 1e-14):
        dt = stable_dt(state, params, controls)
        last = state.t + dt >= t_end * (1 - 1e-12)
        if last:
            dt = t_end - state.t
        try:
            new, dq = _rk4(state, params, dt, form, floor, controls.dealias_products)
        except VacuumBreach as breach:
            log.info("%s", breach)
            report.abort = {
                "cause": "vacuum_abort",
                "t": state.t,
                "breach_t": breach.t,
                "location": list(breach.location),
                "min_rho": breach.min_rho,
            }
            if report.records[-1].t != state.t:
                sample(step, state, q)
            break
        if last:
            new = new.with_time(t_end)
        step += 1
        q += dq
        state = new
        report.dt_min = min(report.dt_min, dt)
        report.dt_max = max(report.dt_max, dt)
        if not (np.all(np.isfinite(state.rho)) and np.all(np.isfinite(state.u))):
            report.abort = {"cause": "non_finite", "t": state.t}
            break
        if step % diagnostics.sample_every == 0 or last:
            sample(step, state, q)
    report.steps = step
    report.final_mass = grid.integrate(state.rho)
    return report


# -- renormalized density-squared equation ---------------------------------------------


def renormalized_rho2_residual(
    trajectory: list, cutoff: fn.CutoffSpec | np.ndarray | None = None
) -> list:
    """L^2 norm of d_t(phi rho^2) + div(phi rho^2 u) + phi rho^2 div u - r_phi at interior samples.

    r_phi = grad(phi) . rho^2 u. The time derivative is a three-point
    centered difference (second order, valid for uneven spacing).
    Returns a list of (t, residual_norm).
    """
    if len(trajectory) < 3:
        raise ValueError("need at least three snapshots")
    grid = trajectory[0].grid
    if cutoff is None:
        phi = np.ones(grid.shape)
    elif isinstance(cutoff, fn.CutoffSpec):
        phi = cutoff.evaluate(grid)
    else:
        phi = np.asarray(cutoff)
    grad_phi = spectral.gradient(grid, phi)
    out = []
    for prev, cur, nxt in zip(trajectory[:-2], trajectory[1:-1], trajectory[2:]):
        h1 = cur.t - prev.t
        h2 = nxt.t - cur.t
        if not (h1 > 0 and h2 > 0):
            raise ValueError("snapshot times must be strictly increasing")
        w_prev = -h2 / (h1 * (h1 + h2))
        w_next = h1 / (h2 * (h1 + h2))
        g_prev, g_cur, g_next = (phi * st.rho**2 for st in (prev, cur, nxt))
        # the three weights sum to zero; differencing against the centre keeps frozen data exact
        dt_term = w_prev * (g_prev - g_cur) + w_next * (g_next - g_cur)
        rho2 = cur.rho**2
        flux = spectral.divergence(grid, g_cur * cur.u)
        div_u = spectral.divergence(grid, cur.u)
        r_phi = rho2 * np.sum(grad_phi * cur.u, axis=0)
        res = dt_term + flux + g_cur * div_u - r_phi
        out.append((cur.t, spectral.l2_norm(grid, res)))
    return out

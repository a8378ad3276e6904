"""Scalar functionals tracked along a run.

Energies and dissipation follow the gamma-law bookkeeping

    E(t) = int rho|u|^2/2 + a/(gamma-1) j_gamma(rho) + kappa/2 |grad rho|^2 dx
    D(t) = mu int |grad u|^2 dx + xi int |div u|^2 dx,   xi = mu + lambda

with ``j_gamma(s) = s^gamma + (gamma-1) rho_bar^gamma - gamma rho_bar^(gamma-1) s``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from . import spectral
from .grid import Grid, PhysParams, State

# -- gamma-law potentials ---------------------------------------------------


def j_gamma(s, gamma: float, rho_bar: float):
    s = np.asarray(s, dtype=float)
    return s**gamma + (gamma - 1.0) * rho_bar**gamma - gamma * rho_bar ** (gamma - 1.0) * s


def gamma_potentials(s, params: PhysParams) -> dict:
    """Pressure P, potential Pi (with P = s Pi' - Pi, Pi'(rho_bar) = 0) and j_gamma at ``s``."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise ValueError("density samples must be non-negative")
    g, a, rb = params.gamma, params.a, params.rho_bar
    pressure = a * s_arr**g
    pi = a / (g - 1.0) * (s_arr**g - g * rb ** (g - 1.0) * s_arr)
    return {"P": pressure, "Pi": pi, "j": j_gamma(s_arr, g, rb)}


# -- energy and dissipation -------------------------------------------------


def energy_density(state: State, params: PhysParams) -> np.ndarray:
    grid = state.grid
    kinetic = 0.5 * state.rho * np.sum(state.u**2, axis=0)
    potential = params.a / (params.gamma - 1.0) * j_gamma(state.rho, params.gamma, params.rho_bar)
    grad_rho = spectral.gradient(grid, state.rho)
    capillary = 0.5 * params.kappa * np.sum(grad_rho**2, axis=0)
    return kinetic + potential + capillary


def total_energy(state: State, params: PhysParams) -> float:
    return state.grid.integrate(energy_density(state, params))


def velocity_gradient(grid: Grid, u: np.ndarray) -> np.ndarray:
    """Array g with g[i, j] = d_j u_i."""
    return np.stack([spectral.gradient(grid, ui) for ui in u])


def dissipation_from_gradient(grid: Grid, grad_u: np.ndarray, params: PhysParams) -> float:
    div_u = np.trace(grad_u, axis1=0, axis2=1)
    density = params.mu * np.sum(grad_u**2, axis=(0, 1)) + params.xi * div_u**2
    return grid.integrate(density)


def dissipation_rate(state: State, params: PhysParams) -> float:
    return dissipation_from_gradient(state.grid, velocity_gradient(state.grid, state.u), params)


# -- Orlicz spaces -----------------------------------------------------------


@dataclass(frozen=True)
class OrliczSpec:
    """Gauge Psi(x) = x^p on [0, 1] and (p/q) x^q + 1 - p/q beyond.

    The two pieces match in value and slope at x = 1, so Psi is C^1 and
    convex for any p, q > 1.
    """

    p: float = 2.0
    q: float = 2.0
    delta: float = 1.0

    def __post_init__(self):
        if not (self.p > 1 and self.q > 1):
            raise ValueError("Orlicz exponents must exceed 1")
        if not self.delta > 0:
            raise ValueError("delta must be positive")

    def psi(self, x):
        x = np.asarray(x, dtype=float)
        p, q = self.p, self.q
        small = np.minimum(x, 1.0) ** p
        large = (p / q) * np.maximum(x, 1.0) ** q + 1.0 - p / q
        return np.where(x <= 1.0, small, large)

    def psi_inverse(self, y: float) -> float:
        p, q = self.p, self.q
        if y <= 1.0:
            return y ** (1.0 / p)
        return ((y - 1.0 + p / q) * q / p) ** (1.0 / q)


def orlicz_modular(grid: Grid, f: np.ndarray, t: float, spec: OrliczSpec) -> float:
    return grid.integrate(spec.psi(np.abs(f) / t))


def orlicz_norm(grid: Grid, f: np.ndarray, spec: OrliczSpec, rtol: float = 1e-13) -> float:
    """Luxemburg norm inf{t > 0 : int Psi(|f|/t) dx <= 1}, by bisection on t.

    The modular is non-increasing in t, so the sign change is unique.
    """
    absf = np.abs(np.asarray(f, dtype=float))
    top = float(absf.max()) if absf.size else 0.0
    if top == 0.0:
        return 0.0
    measure = grid.volume
    lo = grid.integrate(absf) / (measure * spec.psi_inverse(1.0 / measure))
    hi = top
    lo = min(lo, hi)

    def modular(t):
        return orlicz_modular(grid, absf, t, spec)

    while modular(hi) > 1.0:
        hi *= 2.0
    while lo > 0 and modular(lo) <= 1.0:
        lo *= 0.5
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if modular(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return hi


def lp_norm(grid: Grid, f: np.ndarray, p: float) -> float:
    return grid.integrate(np.abs(f) ** p) ** (1.0 / p)


class OrliczSplit(NamedTuple):
    small: np.ndarray
    large: np.ndarray
    small_norm: float
    large_norm: float


def orlicz_split(grid: Grid, f: np.ndarray, delta: float, p: float, q: float) -> OrliczSplit:
    """Split f into its |f| <= delta and |f| > delta parts with their L^p / L^q norms."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    f = np.asarray(f, dtype=float)
    mask = np.abs(f) <= delta
    small = np.where(mask, f, 0.0)
    large = np.where(mask, 0.0, f)
    return OrliczSplit(small, large, lp_norm(grid, small, p), lp_norm(grid, large, q))


# -- vacuum and Sobolev diagnostics -----------------------------------------


class InverseDensity(NamedTuple):
    value: float
    vacuum: bool


def sup_inverse_density(rho: np.ndarray) -> InverseDensity:
    m = float(np.min(rho))
    if m <= 0:
        return InverseDensity(math.inf, True)
    return InverseDensity(1.0 / m, False)


def h1_deviation(grid: Grid, rho: np.ndarray, rho_bar: float) -> float:
    return spectral.sobolev_norm(grid, rho - rho_bar, 1.0)


class CutoffKind(str, Enum):
    ONES = "ones"
    SMOOTH_BUMP = "smooth_bump"


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        g0 = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        g1 = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return g0 / (g0 + g1)


@dataclass(frozen=True)
class CutoffSpec:
    """Localizing weight phi on the torus.

    ``smooth_bump`` equals 1 for r <= 1/2 and 0 for r >= 1, where r is the
    periodic distance to ``center`` divided by ``radius``; the transition is
    built from exp(-1/t) and is C-infinity.
    """

    kind: CutoffKind = CutoffKind.ONES
    center: tuple = ()
    radius: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", CutoffKind(self.kind))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.radius > 0:
            raise ValueError("cutoff radius must be positive")

    def evaluate(self, grid: Grid) -> np.ndarray:
        if self.kind is CutoffKind.ONES:
            return np.ones(grid.shape)
        if 2 * self.radius > grid.length:
            raise ValueError("bump radius must not exceed half the domain length")
        center = self.center or (grid.length / 2,) * grid.dim
        if len(center) != grid.dim:
            raise ValueError("cutoff center dimension does not match grid")
        r2 = 0.0
        for xj, cj in zip(grid.coordinates(), center):
            d = np.abs(xj - cj) % grid.length
            d = np.minimum(d, grid.length - d)
            r2 = r2 + d**2
        r = np.sqrt(r2) / self.radius
        return _smooth_step(2.0 * (1.0 - r))


def gain_density(rho: np.ndarray, phi: np.ndarray) -> np.ndarray:
    return phi * rho**2


def gain_sample(grid: Grid, rho: np.ndarray, phi: np.ndarray, s: float) -> float:
    """||phi rho^2||_{H^{1+s/2}} at one instant."""
    return spectral.sobolev_norm(grid, gain_density(rho, phi), 1.0 + 0.5 * s)


def trapezoid(values: Sequence[float], times: Sequence[float]) -> float:
    values = np.asarray(values, dtype=float)
    times = np.asarray(times, dtype=float)
    if values.size < 2:
        return 0.0
    return float(np.sum(0.5 * (values[1:] + values[:-1]) * np.diff(times)))


def gain_norm_series(
    grid: Grid, trajectory: Sequence[State], cutoff: CutoffSpec, s: float, T: float | None = None
) -> float:
    """(int_0^T ||phi rho^2||^2_{H^{1+s/2}} dt)^{1/2} by the trapezoidal rule on the samples."""
    if not trajectory:
        raise ValueError("empty trajectory")
    phi = cutoff.evaluate(grid)
    samples = [st for st in trajectory if T is None or st.t <= T + 1e-12]
    times = [st.t for st in samples]
    sq = [gain_sample(grid, st.rho, phi, s) ** 2 for st in samples]
    return math.sqrt(trapezoid(sq, times))


# -- per-sample record ----------------------------------------------------------


@dataclass
class DiagnosticsRecord:
    t: float
    energy_gamma: float
    dissipation_cum: float
    min_rho: float
    sup_inv_rho: float
    h1_deviation: float
    orlicz_dev: float
    j_gamma_mass: float
    gain_samples: dict = field(default_factory=dict)
    budget_drift: float = 0.0
    max_rho: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


def default_orlicz(params: PhysParams) -> OrliczSpec:
    """The L^gamma_2 gauge: quadratic near zero, gamma-power at large amplitude."""
    return OrliczSpec(p=2.0, q=params.gamma)


def sample_diagnostics(
    state: State,
    params: PhysParams,
    dissipation_cum: float,
    s_values: Sequence[float] = (),
    phi: np.ndarray | None = None,
    orlicz: OrliczSpec | None = None,
) -> DiagnosticsRecord:
    grid = state.grid
    phi = np.ones(grid.shape) if phi is None else phi
    orlicz = orlicz or default_orlicz(params)
    inv = sup_inverse_density(state.rho)
    return DiagnosticsRecord(
        t=float(state.t),
        energy_gamma=total_energy(state, params),
        dissipation_cum=float(dissipation_cum),
        min_rho=float(state.rho.min()),
        sup_inv_rho=inv.value,
        h1_deviation=h1_deviation(grid, state.rho, params.rho_bar),
        orlicz_dev=orlicz_norm(grid, state.rho - params.rho_bar, orlicz),
        j_gamma_mass=grid.integrate(j_gamma(state.rho, params.gamma, params.rho_bar)),
        gain_samples={float(s): gain_sample(grid, state.rho, phi, s) for s in s_values},
        max_rho=float(state.rho.max()),
    )

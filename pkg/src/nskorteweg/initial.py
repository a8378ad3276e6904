"""Seeded initial data: mode perturbations and mollified rough profiles."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import spectral
from .functionals import j_gamma
from .grid import Grid, PhysParams, State


class InitKind(str, Enum):
    MODE_PERTURBATION = "mode_perturbation"
    MOLLIFIED_SEQUENCE = "mollified_sequence"


def _as_mode(mode) -> tuple[int, ...]:
    if isinstance(mode, (int, np.integer)):
        return (int(mode),)
    return tuple(int(m) for m in mode)


@dataclass(frozen=True)
class InitSpec:
    """Initial density rho_bar + amplitude * pattern and velocity along grad(pattern).

    The pattern is sum_j c_j cos(k_j.x + theta_j) / sum_j |c_j|, so
    ``amplitude`` bounds |rho_0 - rho_bar| on every grid. Phases theta_j come
    from ``seed``. For ``mollified_sequence`` the modes are every wave vector
    with 1 <= max|m| <= ``profile_modes`` and coefficients (1+|m|^2)^-1 times
    seeded normals; each term is damped by exp(-(mollify_scale |k|)^2).
    The velocity is amplitude * velocity_ratio * grad(pattern) / max|grad(pattern)|.
    """

    kind: InitKind = InitKind.MODE_PERTURBATION
    amplitude: float = 0.0
    mode_list: tuple = ((1, 1.0),)
    seed: int = 0
    mollify_scale: float = 0.0
    velocity_ratio: float = 0.0
    profile_modes: int = 16

    def __post_init__(self):
        object.__setattr__(self, "kind", InitKind(self.kind))
        modes = tuple((_as_mode(m), float(c)) for m, c in self.mode_list)
        object.__setattr__(self, "mode_list", modes)
        if not self.amplitude >= 0:
            raise ValueError("amplitude must be non-negative")
        if self.mollify_scale < 0:
            raise ValueError("mollify_scale must be non-negative")
        if self.kind is InitKind.MOLLIFIED_SEQUENCE and not self.mollify_scale > 0:
            raise ValueError("mollified_sequence requires mollify_scale > 0")
        if self.profile_modes < 1:
            raise ValueError("profile_modes must be >= 1")

    def terms(self, dim: int) -> list[tuple[tuple[int, ...], float, float]]:
        """(mode, coefficient, phase) triples, deterministic in ``seed``."""
        rng = np.random.default_rng(self.seed)
        if self.kind is InitKind.MODE_PERTURBATION:
            out = []
            for mode, coef in self.mode_list:
                if len(mode) != dim:
                    raise ValueError(f"mode {mode} does not match dimension {dim}")
                if not any(mode):
                    raise ValueError("the zero mode cannot carry a perturbation")
                out.append((mode, coef, float(rng.uniform(0.0, 2 * np.pi))))
            return out
        M = self.profile_modes
        out = []
        for mode in itertools.product(range(-M, M + 1), repeat=dim):
            # one representative per +/- pair
            first = next((m for m in mode if m != 0), 0)
            if first <= 0:
                continue
            weight = 1.0 / (1.0 + sum(m * m for m in mode))
            coef = abs(float(rng.standard_normal())) * weight
            out.append((mode, coef, float(rng.uniform(0.0, 2 * np.pi))))
        return out

    def pattern(self, grid: Grid) -> np.ndarray:
        terms = self.terms(grid.dim)
        norm = sum(abs(c) for _, c, _ in terms)
        if norm == 0:
            return np.zeros(grid.shape)
        limit = grid.n // 2
        coords = grid.coordinates()
        scale = 2 * np.pi / grid.length
        out = np.zeros(grid.shape)
        for mode, coef, phase in terms:
            if max(abs(m) for m in mode) >= limit:
                raise ValueError(f"mode {mode} is not resolved on a grid with n={grid.n}")
            kvec = [scale * m for m in mode]
            damp = np.exp(-((self.mollify_scale**2) * sum(kj * kj for kj in kvec)))
            arg = sum(kj * xj for kj, xj in zip(kvec, coords)) + phase
            out += coef * damp * np.cos(arg)
        out /= norm
        return out - out.mean()

    def build(self, grid: Grid, params: PhysParams) -> State:
        pat = self.pattern(grid)
        rho = params.rho_bar + self.amplitude * pat
        u = grid.zeros(grid.dim)
        if self.velocity_ratio != 0 and self.amplitude > 0:
            g = spectral.gradient(grid, pat)
            gmax = float(np.sqrt(np.sum(g**2, axis=0)).max())
            if gmax > 0:
                u = self.amplitude * self.velocity_ratio * g / gmax
        return State(grid, rho, u, 0.0)


def hypothesis_triple(state: State, params: PhysParams) -> tuple[float, float, float]:
    """(||grad rho_0||_2, ||sqrt(rho_0)|u_0|||_2, ||j_gamma(rho_0)||_1) smallness measures."""
    grid = state.grid
    grad = spectral.gradient(grid, state.rho)
    g = np.sqrt(grid.integrate(np.sum(grad**2, axis=0)))
    kin = np.sqrt(grid.integrate(state.rho * np.sum(state.u**2, axis=0)))
    j = grid.integrate(np.abs(j_gamma(state.rho, params.gamma, params.rho_bar)))
    return float(g), float(kin), float(j)

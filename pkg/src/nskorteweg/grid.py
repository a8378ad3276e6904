"""Periodic grids, field containers and physical parameters."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


class GridError(ValueError):
    """Invalid grid construction arguments."""


class StateStructureError(ValueError):
    """Fields that do not fit the grid, or contain non-finite samples."""


class ParameterError(ValueError):
    """Physical parameters violating the model's admissibility conditions."""


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid on the torus [0, L)^dim.

    ``modes`` holds the integer Fourier modes m in FFT order, and ``k`` the
    corresponding wavenumbers 2*pi*m/L. Spectral arrays use the real-FFT
    layout (last axis halved).
    """

    dim: int
    n: int
    length: float
    modes: np.ndarray = field(repr=False, compare=False)
    k: tuple = field(repr=False, compare=False)
    k_odd: tuple = field(repr=False, compare=False)
    k2: np.ndarray = field(repr=False, compare=False)

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def spectral_shape(self) -> tuple[int, ...]:
        return (self.n,) * (self.dim - 1) + (self.n // 2 + 1,)

    @property
    def volume(self) -> float:
        return self.length**self.dim

    @property
    def cell_volume(self) -> float:
        return self.dx**self.dim

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Physical coordinates, one array of ``shape`` per axis."""
        x = np.arange(self.n) * self.dx
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))

    def integrate(self, values: np.ndarray) -> float:
        """Rectangle-rule quadrature over the torus, summed over any leading components."""
        axes = tuple(range(values.ndim - self.dim, values.ndim))
        return float(np.sum(values, axis=axes).sum() * self.cell_volume)

    def zeros(self, components: int | None = None) -> np.ndarray:
        if components is None:
            return np.zeros(self.shape)
        return np.zeros((components,) + self.shape)


def build_grid(dim: int, n: int, length: float) -> Grid:
    """Build a periodic grid with ``n`` points per axis on [0, length)^dim."""
    if dim not in (1, 2):
        raise GridError(f"dim must be 1 or 2, got {dim}")
    if not isinstance(n, (int, np.integer)) or not _is_power_of_two(int(n)) or n < 8:
        raise GridError(f"n must be a power of two >= 8, got {n}")
    if not length > 0:
        raise GridError(f"length must be positive, got {length}")
    n = int(n)
    length = float(length)

    modes = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    rmodes = np.arange(n // 2 + 1)
    scale = 2.0 * np.pi / length

    # axis j uses the full mode table except the last axis (rfft layout)
    axis_modes = [modes] * (dim - 1) + [rmodes]
    axis_k = []
    axis_k_odd = []
    for j, m in enumerate(axis_modes):
        kj = scale * m.astype(float)
        kj_odd = np.where(np.abs(m) == n // 2, 0.0, kj)
        shape = [1] * dim
        shape[j] = m.size
        axis_k.append(kj.reshape(shape))
        axis_k_odd.append(kj_odd.reshape(shape))
    spectral_shape = (n,) * (dim - 1) + (n // 2 + 1,)
    k = tuple(np.broadcast_to(kj, spectral_shape) for kj in axis_k)
    k_odd = tuple(np.broadcast_to(kj, spectral_shape) for kj in axis_k_odd)
    k2 = sum(kj**2 for kj in k)
    return Grid(dim=dim, n=n, length=length, modes=np.sort(modes), k=k, k_odd=k_odd, k2=k2)


@dataclass(frozen=True)
class PhysParams:
    """Coefficients of the isothermal capillary system with gamma-law pressure."""

    mu: float
    lam: float
    kappa: float
    a: float
    gamma: float
    rho_bar: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ParameterError("mu must be positive")
        if not 2 * self.mu + self.lam > 0:
            raise ParameterError("2*mu + lambda must be positive")
        if not self.kappa > 0:
            raise ParameterError("kappa must be positive")
        if not self.a > 0:
            raise ParameterError("a must be positive")
        if not self.gamma > 1:
            raise ParameterError("gamma must exceed 1")
        if not self.rho_bar > 0:
            raise ParameterError("rho_bar must be positive")

    @property
    def xi(self) -> float:
        return self.mu + self.lam

    def pressure(self, rho: np.ndarray) -> np.ndarray:
        return self.a * rho**self.gamma


@dataclass(frozen=True)
class State:
    """Density and velocity at one instant.

    ``rho`` has the grid shape, ``u`` has shape ``(dim,) + grid.shape``.
    """

    grid: Grid
    rho: np.ndarray
    u: np.ndarray
    t: float = 0.0

    def with_time(self, t: float) -> "State":
        return replace(self, t=t)

    def momentum(self) -> np.ndarray:
        return self.rho * self.u


def uniform_state(grid: Grid, rho_bar: float, velocity=None, t: float = 0.0) -> State:
    rho = np.full(grid.shape, float(rho_bar))
    u = grid.zeros(grid.dim)
    if velocity is not None:
        for i, ui in enumerate(np.broadcast_to(velocity, (grid.dim,))):
            u[i] = ui
    return State(grid, rho, u, t)


def check_field(grid: Grid, values: np.ndarray, components: int | None = None) -> None:
    expected = grid.shape if components is None else (components,) + grid.shape
    if np.shape(values) != expected:
        raise StateStructureError(f"field shape {np.shape(values)} does not match grid {expected}")
    if not np.all(np.isfinite(values)):
        raise StateStructureError("field contains non-finite samples")


@dataclass
class ValidationReport:
    ok: bool
    min_rho: float
    floor: float
    violations: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def validate_state(state: State, floor: float) -> ValidationReport:
    """Check structure (raises) and the density floor (reported).

    Violations are listed as grid-index tuples where ``rho < floor``.
    """
    if not floor > 0:
        raise ValueError("floor must be positive")
    check_field(state.grid, state.rho)
    check_field(state.grid, state.u, state.grid.dim)
    min_rho = float(state.rho.min())
    bad = np.argwhere(state.rho < floor)
    return ValidationReport(
        ok=bad.size == 0,
        min_rho=min_rho,
        floor=floor,
        violations=[tuple(int(i) for i in idx) for idx in bad],
    )

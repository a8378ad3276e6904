"""Fourier-multiplier operators on periodic grids.

All operators take and return real physical-space arrays. Vector fields carry
their components on the leading axis. Odd symbols (first derivatives, Riesz
transforms) vanish on the Nyquist modes so real inputs map to real outputs.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass

import numpy as np

from .grid import Grid


class ZeroModeError(ValueError):
    """A negative-order homogeneous multiplier was applied to a field with nonzero mean."""


class ZeroModeWarning(UserWarning):
    """A nonzero mean was discarded by a homogeneous negative-order multiplier."""


MEAN_TOL = 1e-12


def _axes(grid: Grid) -> tuple[int, ...]:
    return tuple(range(-grid.dim, 0))


def forward(grid: Grid, f: np.ndarray) -> np.ndarray:
    return np.fft.rfftn(f, axes=_axes(grid))


def inverse(grid: Grid, fh: np.ndarray) -> np.ndarray:
    return np.fft.irfftn(fh, s=grid.shape, axes=_axes(grid))


@dataclass(frozen=True)
class MultiplierSpec:
    """A Fourier symbol evaluated on the grid's spectral layout.

    ``symbol(grid)`` returns an array of ``grid.spectral_shape``; the value at
    the zero mode is replaced by ``zero_mode``.
    """

    symbol: object
    zero_mode: complex = 0.0

    def table(self, grid: Grid) -> np.ndarray:
        s = np.array(self.symbol(grid), dtype=complex)
        s[(0,) * grid.dim] = self.zero_mode
        return s

    def apply(self, grid: Grid, f: np.ndarray) -> np.ndarray:
        return inverse(grid, self.table(grid) * forward(grid, f))


def _abs_k(grid: Grid) -> np.ndarray:
    return np.sqrt(grid.k2)


def _mean(grid: Grid, f: np.ndarray) -> float:
    return float(np.mean(f))


def _has_mean(f: np.ndarray) -> bool:
    scale = max(float(np.max(np.abs(f))), 1.0)
    return abs(float(np.mean(f))) > MEAN_TOL * scale


# -- derivatives ---------------------------------------------------------


def partial(grid: Grid, f: np.ndarray, axis: int) -> np.ndarray:
    return inverse(grid, 1j * grid.k_odd[axis] * forward(grid, f))


def gradient(grid: Grid, f: np.ndarray) -> np.ndarray:
    fh = forward(grid, f)
    return np.stack([inverse(grid, 1j * kj * fh) for kj in grid.k_odd])


def divergence(grid: Grid, v: np.ndarray) -> np.ndarray:
    acc = 0
    for i in range(grid.dim):
        acc = acc + 1j * grid.k_odd[i] * forward(grid, v[i])
    return inverse(grid, acc)


def laplacian(grid: Grid, f: np.ndarray) -> np.ndarray:
    return inverse(grid, -grid.k2 * forward(grid, f))


def spectral_derivatives(grid: Grid, f: np.ndarray) -> dict:
    """Partials, gradient and Laplacian of a scalar field; divergence of a vector field.

    Scalar input (grid shape) yields ``partials``, ``gradient`` and
    ``laplacian``; vector input yields ``divergence`` and the componentwise
    ``laplacian``.
    """
    if not np.all(np.isfinite(f)):
        raise ValueError("field contains non-finite samples")
    if np.shape(f) == grid.shape:
        g = gradient(grid, f)
        return {"partials": list(g), "gradient": g, "laplacian": laplacian(grid, f)}
    return {
        "divergence": divergence(grid, f),
        "laplacian": np.stack([laplacian(grid, fi) for fi in f]),
    }


# -- fractional and singular operators -------------------------------------


def fractional_power(grid: Grid, f: np.ndarray, s: float) -> np.ndarray:
    """Apply Lambda^s, the multiplier |xi|^s.

    For s < 0 the input must have zero mean.
    """
    if s == 0:
        return np.array(f, dtype=float, copy=True)
    if s < 0 and _has_mean(f):
        raise ZeroModeError(f"Lambda^{s} undefined on a field with mean {_mean(grid, f):.3e}")
    return MultiplierSpec(lambda g: _safe_pow(g, s), 0.0).apply(grid, f)


def _safe_pow(grid: Grid, s: float) -> np.ndarray:
    ak = _abs_k(grid)
    out = np.zeros_like(ak)
    nz = ak > 0
    out[nz] = ak[nz] ** s
    return out


def _discard_mean(f: np.ndarray, what: str) -> None:
    if _has_mean(f):
        warnings.warn(f"{what}: discarded nonzero mean {float(np.mean(f)):.3e}", ZeroModeWarning, stacklevel=3)


def riesz_transform(grid: Grid, f: np.ndarray, axis: int) -> np.ndarray:
    """R_i = d_i Lambda^{-1}, symbol i xi_i / |xi|; the mean is sent to zero."""
    _discard_mean(f, "riesz_transform")

    def symbol(g):
        return 1j * g.k_odd[axis] * _safe_pow(g, -1.0)

    return MultiplierSpec(symbol, 0.0).apply(grid, f)


def solve_poisson(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Zero-mean solution of Laplacian(v) = f - mean(f)."""
    _discard_mean(f, "solve_poisson")
    return MultiplierSpec(lambda g: -_safe_pow(g, -2.0), 0.0).apply(grid, f)


# -- dealiasing and norms -----------------------------------------------


@functools.lru_cache(maxsize=32)
def dealias_mask(grid: Grid) -> np.ndarray:
    """True on modes kept by the 2/3 rule (every |m| <= n/3)."""
    cutoff = grid.n / 3.0
    keep = np.ones(grid.spectral_shape, dtype=bool)
    for kj in grid.k:
        m = np.rint(kj * grid.length / (2 * np.pi))
        keep &= np.abs(m) <= cutoff
    keep.flags.writeable = False
    return keep


def dealias(grid: Grid, f: np.ndarray) -> np.ndarray:
    return inverse(grid, dealias_mask(grid) * forward(grid, f))


@functools.lru_cache(maxsize=32)
def _rfft_weights(grid: Grid) -> np.ndarray:
    """Multiplicity of each rfft coefficient in the full spectrum."""
    w = np.full(grid.spectral_shape, 2.0)
    w[..., 0] = 1.0
    w[..., grid.n // 2] = 1.0
    w.flags.writeable = False
    return w


def spectral_l2_squared(grid: Grid, fh: np.ndarray, weight: np.ndarray | float = 1.0) -> float:
    """Parseval sum scaled to match the rectangle-rule integral of |f|^2."""
    npts = grid.n**grid.dim
    total = np.sum(_rfft_weights(grid) * weight * np.abs(fh) ** 2)
    return float(total) * grid.volume / npts**2


def sobolev_norm(grid: Grid, f: np.ndarray, s: float, homogeneous: bool = False) -> float:
    """H^s norm with weight (1+|xi|^2)^s, or the homogeneous |xi|^{2s} seminorm."""
    fh = forward(grid, f)
    if homogeneous:
        weight = np.zeros(grid.spectral_shape)
        nz = grid.k2 > 0
        weight[nz] = grid.k2[nz] ** s
    else:
        weight = (1.0 + grid.k2) ** s
    return float(np.sqrt(spectral_l2_squared(grid, fh, weight)))


def l2_norm(grid: Grid, f: np.ndarray) -> float:
    """Physical-space quadrature L^2 norm."""
    return float(np.sqrt(grid.integrate(np.asarray(f) ** 2)))

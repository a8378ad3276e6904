import copy

import numpy as np
import pytest

from nskorteweg import spectral
from nskorteweg.grid import PhysParams, build_grid

# the 1D reference run: rho_bar=1, amplitude 0.05, n=256, t_end=1
BASE_1D = {
    "grid": {"dim": 1, "n": 256},
    "params": {"mu": 0.1, "lambda": 0.0, "kappa": 0.01, "a": 1.0, "gamma": 2.0, "rho_bar": 1.0},
    "init": {
        "kind": "mode_perturbation",
        "amplitude": 0.05,
        "seed": 0,
        "mode_list": [[m, 1.0 / m] for m in range(1, 9)],
    },
    "time": {"t_end": 1.0, "cfl": 1.0, "rho_floor": 0.5},
    "diagnostics": {"s_values": [0.2, 0.4], "sample_every": 20},
}


def base_config(**sections):
    cfg = copy.deepcopy(BASE_1D)
    for name, patch in sections.items():
        cfg.setdefault(name, {}).update(patch)
    return cfg


def band_limited(grid, seed, band=None, mean_zero=True):
    """Seeded random real field with modes |m| <= band."""
    rng = np.random.default_rng(seed)
    band = band or grid.n // 4
    fh = rng.standard_normal(grid.spectral_shape) + 1j * rng.standard_normal(grid.spectral_shape)
    for kj in grid.k:
        m = np.rint(kj * grid.length / (2 * np.pi))
        fh = np.where(np.abs(m) <= band, fh, 0.0)
    if mean_zero:
        fh[(0,) * grid.dim] = 0.0
    f = spectral.inverse(grid, fh)
    return f / np.max(np.abs(f))


@pytest.fixture
def params():
    return PhysParams(mu=0.1, lam=0.0, kappa=0.01, a=1.0, gamma=2.0, rho_bar=1.0)


@pytest.fixture
def grid1():
    return build_grid(1, 64, 2 * np.pi)


@pytest.fixture
def grid2():
    return build_grid(2, 32, 2 * np.pi)


# filled by test_acceptance.py, printed once at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)

import math

import numpy as np
import pytest

from nskorteweg.grid import (
    GridError,
    ParameterError,
    PhysParams,
    State,
    StateStructureError,
    build_grid,
    uniform_state,
    validate_state,
)


@pytest.mark.parametrize("dim,n,length", [(3, 16, 1.0), (1, 12, 1.0), (1, 4, 1.0), (2, 16, 0.0), (1, 16, -2.0)])
def test_build_grid_rejects_bad_input(dim, n, length):
    with pytest.raises(GridError):
        build_grid(dim, n, length)


def test_grid_layout():
    g = build_grid(2, 16, 4.0)
    assert g.shape == (16, 16)
    assert g.spectral_shape == (16, 9)
    assert g.dx == pytest.approx(0.25)
    assert list(g.modes) == list(range(-8, 8))
    x, y = g.coordinates()
    assert x[1, 0] - x[0, 0] == pytest.approx(0.25)
    assert y[0, 1] - y[0, 0] == pytest.approx(0.25)
    assert g.k2.shape == g.spectral_shape
    # the Nyquist row is removed from odd symbols only
    assert g.k[0][8, 0] == pytest.approx(-8 * 2 * math.pi / 4.0)
    assert g.k_odd[0][8, 0] == 0.0


def test_integrate_constant_gives_volume():
    g = build_grid(2, 8, 3.0)
    assert g.integrate(np.ones(g.shape)) == pytest.approx(9.0)
    assert g.integrate(np.ones((2,) + g.shape)) == pytest.approx(18.0)


@pytest.mark.parametrize(
    "kwargs,message",
    [
        ({"gamma": 0.5}, "gamma must exceed 1"),
        ({"mu": 0.0}, "mu must be positive"),
        ({"mu": 0.1, "lam": -0.3}, "2*mu + lambda must be positive"),
        ({"kappa": 0.0}, "kappa must be positive"),
        ({"rho_bar": -1.0}, "rho_bar must be positive"),
    ],
)
def test_phys_params_invariants(kwargs, message):
    base = dict(mu=0.1, lam=0.0, kappa=0.01, a=1.0, gamma=2.0, rho_bar=1.0)
    base.update(kwargs)
    with pytest.raises(ParameterError, match=message.replace("*", r"\*").replace("+", r"\+")):
        PhysParams(**base)


def test_validate_state_lists_floor_violations():
    g = build_grid(1, 16, 1.0)
    rho = np.ones(16)
    rho[3] = 0.001
    report = validate_state(State(g, rho, g.zeros(1)), floor=0.01)
    assert not report
    assert report.violations == [(3,)]
    assert report.min_rho == pytest.approx(0.001)
    assert validate_state(uniform_state(g, 1.0), 0.01).ok


def test_validate_state_structure_errors():
    g = build_grid(1, 16, 1.0)
    with pytest.raises(StateStructureError):
        validate_state(State(g, np.ones(8), g.zeros(1)), 0.01)
    rho = np.ones(16)
    rho[0] = np.nan
    with pytest.raises(StateStructureError):
        validate_state(State(g, rho, g.zeros(1)), 0.01)


def test_documented_grids():
    g = build_grid(1, 16, 2 * math.pi)
    assert list(g.modes) == list(range(-8, 8))
    g2 = build_grid(2, 32, 1.0)
    assert g2.shape == (32, 32)
    assert np.allclose(np.unique(np.abs(g2.k[0])), 2 * math.pi * np.arange(17))


def test_validate_state_documented_violation():
    g = build_grid(1, 64, 2 * math.pi)
    (x,) = g.coordinates()
    report = validate_state(State(g, 1 + 1.5 * np.cos(x), g.zeros(1)), 0.01)
    assert not report.ok and report.min_rho == pytest.approx(-0.5)


def test_validate_state_monotone_in_floor():
    g = build_grid(1, 32, 2 * math.pi)
    (x,) = g.coordinates()
    state = State(g, 1 + 0.7 * np.cos(x), g.zeros(1))
    floors = np.linspace(0.01, 0.6, 40)
    oks = [validate_state(state, f).ok for f in floors]
    # once a floor fails, every higher floor fails
    assert oks == sorted(oks, reverse=True)

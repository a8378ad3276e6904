import numpy as np
import pytest

from nskorteweg import experiments as ex
from nskorteweg.config import ConfigError, parse_config
from nskorteweg.grid import build_grid
from nskorteweg.initial import InitKind, InitSpec, hypothesis_triple

from conftest import base_config


def small(**sections):
    sections.setdefault("grid", {"n": 64})
    sections.setdefault("time", {"t_end": 0.05})
    return base_config(**sections)


def test_same_seed_is_bit_identical(params):
    g = build_grid(2, 32, 2 * np.pi)
    spec = InitSpec(InitKind.MOLLIFIED_SEQUENCE, amplitude=0.1, seed=4, mollify_scale=0.2, velocity_ratio=0.5, profile_modes=6)
    a, b = spec.build(g, params), spec.build(g, params)
    assert a.rho.tobytes() == b.rho.tobytes() and a.u.tobytes() == b.u.tobytes()
    other = InitSpec(InitKind.MOLLIFIED_SEQUENCE, amplitude=0.1, seed=5, mollify_scale=0.2, profile_modes=6).build(g, params)
    assert not np.array_equal(a.rho, other.rho)


@pytest.mark.parametrize("kind", list(InitKind))
def test_initial_density_has_mean_rho_bar_and_bounded_amplitude(params, kind):
    g = build_grid(1, 128, 2 * np.pi)
    spec = InitSpec(kind, amplitude=0.3, mode_list=((2, 1.0), (5, -0.4)), mollify_scale=0.1)
    state = spec.build(g, params)
    assert np.mean(state.rho) == pytest.approx(params.rho_bar, abs=1e-14)
    assert np.max(np.abs(state.rho - params.rho_bar)) <= 0.6 + 1e-12


def test_init_spec_validation():
    with pytest.raises(ValueError):
        InitSpec(amplitude=-0.1)
    with pytest.raises(ValueError):
        InitSpec(InitKind.MOLLIFIED_SEQUENCE, amplitude=0.1)
    with pytest.raises(ValueError):
        InitSpec(mode_list=((0, 1.0),)).terms(1)
    with pytest.raises(ValueError):
        InitSpec(mode_list=(((1, 2), 1.0),)).terms(1)
    with pytest.raises(ValueError):
        InitSpec(amplitude=0.1, mode_list=((40, 1.0),)).pattern(build_grid(1, 64, 1.0))


def test_velocity_follows_pattern_gradient(params):
    g = build_grid(1, 64, 2 * np.pi)
    state = InitSpec(amplitude=0.1, velocity_ratio=2.0).build(g, params)
    assert np.max(np.abs(state.u)) == pytest.approx(0.2)


def test_hypothesis_triple_monotone_in_amplitude(params):
    g = build_grid(2, 32, 2 * np.pi)
    triples = [
        hypothesis_triple(InitSpec(amplitude=a, mode_list=(((1, 0), 1.0), ((1, 2), 0.5)), velocity_ratio=1.0).build(g, params), params)
        for a in (0.0, 0.01, 0.02, 0.04)
    ]
    assert triples[0] == (0.0, 0.0, 0.0)
    for lo, hi in zip(triples, triples[1:]):
        assert all(b > a for a, b in zip(lo, hi))


def test_mollified_initial_data_converge_in_h1():
    cfg = parse_config(small(init={"kind": "mollified_sequence", "mollify_scale": 0.4, "seed": 3}))
    d = ex.initial_h1_distances(cfg, [0.4, 0.2, 0.1, 0.05])
    assert d[-1] == 0.0
    assert all(b < a for a, b in zip(d, d[1:]))


def test_experiment_spec_validation():
    base = small()
    with pytest.raises(ex.ExperimentError, match="valid ids"):
        ex.parse_experiment({"base": base}, "no-such-experiment")
    with pytest.raises(ConfigError, match="base"):
        ex.parse_experiment({}, "energy-decay")
    with pytest.raises(ConfigError, match="extra"):
        ex.parse_experiment({"base": base, "extra": 1}, "energy-decay")
    spec = ex.parse_experiment({"base": base, "s_values": [0.4, 0.2, 0.3]}, "gain-scan-1d")
    with pytest.raises(ex.ExperimentError, match="monotone"):
        ex.run_experiment(spec)
    two_d = base_config(grid={"dim": 2, "n": 16}, init={"mode_list": [[[1, 0], 1.0]]})
    spec = ex.parse_experiment({"base": two_d, "amplitudes": [0.01, 0.02]}, "smallness-scan-2d")
    with pytest.raises(ex.ExperimentError, match="smooth_bump"):
        ex.run_experiment(spec)


def test_experiment_spec_round_trip():
    data = {"id": "gain-scan-1d", "base": small(), "amplitudes": [], "s_values": [0.2, 0.4], "mollify_scales": [],
            "beta": None, "deviation_bound": 0.3, "drift_tol": 1e-4, "refine_factor": 2}
    spec = ex.parse_experiment(data)
    assert ex.parse_experiment(ex.experiment_to_dict(spec)) == spec


def test_energy_decay_equilibrium():
    spec = ex.parse_experiment({"base": small(init={"amplitude": 0.0})}, "energy-decay")
    v = ex.run_experiment(spec).verdicts
    assert set(v) == ex.VERDICT_KEYS["energy-decay"]
    assert v["drift"] == 0.0 and v["verdict"] is True


def test_energy_decay_reports_vacuum_as_verdict():
    base = small(init={"amplitude": 0.9, "velocity_ratio": 8.0, "mode_list": [[1, 1.0]]}, time={"t_end": 0.5, "rho_floor": 0.2})
    rep = ex.run_experiment(ex.parse_experiment({"base": base}, "energy-decay"))
    assert rep.verdicts["status"] == "vacuum_abort"
    assert rep.verdicts["verdict"] is False
    assert rep.vacuum_abort


def test_gain_scan_labels():
    spec = ex.parse_experiment({"base": small(grid={"n": 32}), "s_values": [0.2, 0.4, 1.8]}, "gain-scan-1d")
    v = ex.run_experiment(spec).verdicts
    assert set(v) == ex.VERDICT_KEYS["gain-scan-1d"]
    assert [r["label"] for r in v["rows"]] == ["stabilized", "stabilized", "unguaranteed"]
    assert v["n_refined"] == 64


def test_smallness_scan_2d_rows():
    base = base_config(
        grid={"dim": 2, "n": 32},
        init={"mode_list": [[[1, 0], 1.0], [[1, 1], 0.5]], "velocity_ratio": 1.0},
        time={"t_end": 0.02},
        diagnostics={"s_values": [0.2], "cutoff": {"kind": "smooth_bump", "radius": 2.0}},
    )
    rep = ex.run_experiment(ex.parse_experiment({"base": base, "amplitudes": [0.0, 0.02, 0.04]}, "smallness-scan-2d"))
    v = rep.verdicts
    assert set(v) == ex.VERDICT_KEYS["smallness-scan-2d"]
    assert v["status"] == "completed" and v["triple_monotone"] and v["verdict"]
    assert v["rows"][0]["hypothesis_size"] == 0.0
    assert len(rep.members) == 3


def test_compactness_probe_equal_scales_give_zero():
    base = small(init={"kind": "mollified_sequence", "mollify_scale": 0.2, "profile_modes": 8})
    rep = ex.run_experiment(ex.parse_experiment({"base": base, "mollify_scales": [0.2, 0.2, 0.2]}, "compactness-probe"))
    v = rep.verdicts
    assert set(v) == ex.VERDICT_KEYS["compactness-probe"]
    assert v["d"] == [0.0, 0.0, 0.0] and v["t"] == [0.0, 0.0, 0.0]
    with pytest.raises(ex.ExperimentError):
        ex.run_experiment(ex.parse_experiment({"base": base, "mollify_scales": [0.1, 0.2]}, "compactness-probe"))


def test_compactness_probe_broken_sequence():
    base = small(init={"kind": "mollified_sequence", "mollify_scale": 0.4, "amplitude": 0.99, "velocity_ratio": 8.0},
                 time={"t_end": 0.5, "rho_floor": 0.3})
    v = ex.run_experiment(ex.parse_experiment({"base": base, "mollify_scales": [0.4, 0.1]}, "compactness-probe")).verdicts
    assert v["status"] == "sequence broken"
    assert v["broken_index"] is not None


def test_vacuum_persistence_equilibrium():
    spec = ex.parse_experiment({"base": small(init={"amplitude": 0.0}), "deviation_bound": 0.1, "beta": 0.5}, "vacuum-persistence-1d")
    v = ex.run_experiment(spec).verdicts
    assert set(v) == ex.VERDICT_KEYS["vacuum-persistence-1d"]
    assert v["t_star"] == v["t_end"] and v["completed"]
    assert v["deviation_held"] and v["beta_held"] and v["max_deviation"] == 0.0


def test_experiments_are_deterministic():
    spec = ex.parse_experiment({"base": small(), "s_values": [0.2]}, "gain-scan-1d")
    a = ex.run_experiment(spec).verdicts
    b = ex.run_experiment(spec).verdicts
    assert a == b

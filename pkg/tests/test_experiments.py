import json

import numpy as np
import pytest

from nsvlab.experiments import (
    ExperimentSpec,
    ManufacturedTarget,
    run_experiment,
    run_gronwall,
    run_kappa_sweep,
    run_manufactured,
    run_refinement,
    run_regularization_sweep,
    run_taylor_green,
)
from nsvlab.fields import multi_mode_3d, random_solenoidal, single_mode, taylor_green
from nsvlab.solver import PdeParams, SimConfig, integrate
from nsvlab.spectral import TorusGrid


# -- Taylor-Green anchor ------------------------------------------------------


def test_taylor_green_report(grid2):
    params = PdeParams(nu=0.1, kappa=0.5, p=2.0)
    cfg = SimConfig(grid=grid2, galerkin_n=15, dt=5e-3, t_end=0.25,
                    fixed_point_tol=1e-12)
    rep = run_taylor_green(cfg, params, 1.0)
    assert rep["terminal_l2_error_rel"] <= 1e-8
    assert rep["energy_rate_predicted"] == pytest.approx(0.1)
    assert rep["energy_rate_fitted"] == pytest.approx(0.1, rel=1e-5)


def test_taylor_green_zero_amplitude(grid2):
    params = PdeParams(nu=0.1, kappa=0.5, p=2.0)
    cfg = SimConfig(grid=grid2, galerkin_n=8, dt=1e-2, t_end=0.05)
    rep = run_taylor_green(cfg, params, 0.0)
    assert rep["terminal_l2_error_abs"] == 0.0
    assert rep["terminal_l2_error_rel"] == 0.0


def test_taylor_green_rejects_wrong_regime(grid2, grid3):
    cfg = SimConfig(grid=grid2, galerkin_n=8, dt=1e-2, t_end=0.05)
    with pytest.raises(ValueError):
        run_taylor_green(cfg, PdeParams(nu=0.1, kappa=0.5, p=3.0))
    cfg3 = SimConfig(grid=grid3, galerkin_n=4, dt=1e-2, t_end=0.05)
    with pytest.raises(ValueError):
        run_taylor_green(cfg3, PdeParams(nu=0.1, kappa=0.5, p=2.0))


def test_kappa_sweep_rates_shrink(grid2):
    params = PdeParams(nu=0.2, kappa=0.5, p=2.0)
    cfg = SimConfig(grid=grid2, galerkin_n=8, dt=1e-2, t_end=0.2)
    rep = run_kappa_sweep(cfg, params, [0.25, 1.0, 4.0])
    rates = [r["energy_rate_fitted"] for r in rep["rows"]]
    predicted = [r["energy_rate_predicted"] for r in rep["rows"]]
    assert rates[0] > rates[1] > rates[2] > 0
    assert np.allclose(rates, predicted, rtol=1e-4)


# -- manufactured solutions -----------------------------------------------------


def test_manufactured_zero_target(grid2):
    params = PdeParams(nu=0.3, kappa=0.5, p=2.0)
    cfg = SimConfig(grid=grid2, galerkin_n=8, dt=1e-2, t_end=0.05)
    target = ManufacturedTarget(profile=taylor_green(grid2, 0.0))
    fc = __import__("nsvlab.experiments", fromlist=["manufactured_forcing"]) \
        .manufactured_forcing(target, params)
    assert np.all(fc(0.3) == 0.0)
    rep = run_manufactured(cfg, params, target)
    assert rep["terminal_error_rel"] == 0.0


def test_manufactured_steady_single_mode_p2():
    grid = TorusGrid(2, 32)
    params = PdeParams(nu=0.3, kappa=0.5, p=2.0)
    cfg = SimConfig(grid=grid, galerkin_n=15, dt=5e-3, t_end=0.05,
                    fixed_point_tol=1e-13)
    target = ManufacturedTarget(profile=single_mode(grid, (1, 2), 0.8),
                                g=lambda t: 1.0, g_prime=lambda t: 0.0)
    rep = run_manufactured(cfg, params, target)
    assert rep["terminal_error_rel"] <= 1e-8


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_manufactured_dt_halving(grid3, p):
    params = PdeParams(nu=0.3, kappa=0.5, p=p)
    target = ManufacturedTarget(profile=multi_mode_3d(grid3, 1.0))
    errs = []
    for dt in (0.04, 0.02):
        cfg = SimConfig(grid=grid3, galerkin_n=4, dt=dt, t_end=0.4,
                        fixed_point_tol=1e-12)
        errs.append(run_manufactured(cfg, params, target)["terminal_error_rel"])
    assert 3.5 <= errs[0] / errs[1] <= 4.5


# -- Gronwall -----------------------------------------------------------------------


def gronwall_fixture():
    grid = TorusGrid(2, 16)
    params = PdeParams(nu=0.1, kappa=1.0, p=2.0)
    cfg = SimConfig(grid=grid, galerkin_n=7, dt=5e-3, t_end=0.5)
    v0 = taylor_green(grid, 0.05)
    return cfg, params, v0


def test_gronwall_zero_delta_zero_separation():
    cfg, params, v0 = gronwall_fixture()
    rep = run_gronwall(cfg, params, v0, 0.0)
    assert rep["w_grad_max"] == 0.0
    assert rep["rate"] is None


def test_gronwall_rate_independent_of_delta():
    cfg, params, v0 = gronwall_fixture()
    r1 = run_gronwall(cfg, params, v0, 1e-6, seed=3)
    r2 = run_gronwall(cfg, params, v0, 1e-8, seed=3)
    assert r1["rate"] is not None and r2["rate"] is not None
    assert abs(r1["rate"] - r2["rate"]) <= 0.1 * abs(r2["rate"])
    assert r1["line_max_excess"] <= 1e-2


def test_gronwall_label_symmetry():
    cfg, params, v0 = gronwall_fixture()
    rng = np.random.default_rng(3)
    pert = random_solenoidal(cfg.grid, 2, rng, 1.0)
    pert = pert * (1e-6 / pert.w12_norm())
    a = integrate(cfg, params, v0)
    b = integrate(cfg, params, v0 + pert)
    fwd = [(x - y).grad_norm_sq() for x, y in zip(a.snapshots, b.snapshots)]
    rev = [(y - x).grad_norm_sq() for x, y in zip(a.snapshots, b.snapshots)]
    assert fwd == rev


# -- refinement ------------------------------------------------------------------------


def test_refinement_monotone(grid2, rng):
    params = PdeParams(nu=0.3, kappa=0.5, p=3.0)
    cfg = SimConfig(grid=grid2, galerkin_n=8, dt=1e-2, t_end=0.2)
    v0 = random_solenoidal(grid2, 2, rng, 1.0)
    rep = run_refinement(cfg, params, v0, [2, 4, 8])
    diffs = [r["l2_qt"] for r in rep["rows"]]
    assert len(diffs) == 2
    assert diffs[1] < diffs[0]


def test_refinement_resolved_data_tiny_differences(grid2):
    params = PdeParams(nu=0.3, kappa=0.5, p=2.0)
    cfg = SimConfig(grid=grid2, galerkin_n=8, dt=1e-2, t_end=0.1)
    v0 = taylor_green(grid2, 1.0)   # p = 2 dynamics stay in the lowest shell
    rep = run_refinement(cfg, params, v0, [2, 4])
    assert rep["rows"][0]["l2_qt"] <= 1e-12


def test_refinement_single_shell_empty(grid2, rng):
    params = PdeParams(nu=0.3, kappa=0.5, p=2.0)
    cfg = SimConfig(grid=grid2, galerkin_n=8, dt=1e-2, t_end=0.05)
    rep = run_refinement(cfg, params, random_solenoidal(grid2, 2, rng, 1.0), [4])
    assert rep["rows"] == []
    with pytest.raises(ValueError):
        run_refinement(cfg, params, random_solenoidal(grid2, 2, rng, 1.0), [4, 4])


# -- regularization sweep -----------------------------------------------------------------


def test_regularization_sweep_slope(grid3):
    params = PdeParams(nu=0.3, kappa=0.5, p=1.4)
    cfg = SimConfig(grid=grid3, galerkin_n=4, dt=2e-2, t_end=0.2)
    beta = (3 * 3 - 4) / 3
    v0 = multi_mode_3d(grid3, 1.0)
    rep = run_regularization_sweep(cfg, params, beta, [1, 2, 4, 8], v0)
    vals = rep["stress_integrals"]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert rep["loglog_slope"] <= -1.0


# -- dispatch and reporting ------------------------------------------------------------------


def test_experiment_spec_validation(grid2):
    params = PdeParams(nu=0.1, kappa=0.5, p=2.0)
    cfg = SimConfig(grid=grid2, galerkin_n=8, dt=1e-2, t_end=0.05)
    with pytest.raises(ValueError):
        ExperimentSpec(kind="nope", config=cfg, params=params)


def test_run_experiment_writes_outputs(tmp_path, grid2):
    params = PdeParams(nu=0.1, kappa=0.5, p=2.0)
    cfg = SimConfig(grid=grid2, galerkin_n=8, dt=1e-2, t_end=0.1)
    spec = ExperimentSpec(kind="taylor_green", config=cfg, params=params,
                          options={"amplitude": 1.0}, output_path=str(tmp_path))
    manifest = run_experiment(spec)
    assert manifest["error"] is None
    assert (tmp_path / "manifest.json").exists()
    assert (tmp_path / "ledger.csv").exists()
    assert (tmp_path / "energy.png").exists()
    saved = json.loads((tmp_path / "manifest.json").read_text())
    assert saved["kind"] == "taylor_green"
    assert saved["results"]["terminal_l2_error_rel"] <= 1e-6


def test_experiment_determinism(tmp_path, grid2):
    params = PdeParams(nu=0.1, kappa=0.5, p=2.0)
    cfg = SimConfig(grid=grid2, galerkin_n=8, dt=1e-2, t_end=0.1)
    ledgers = []
    for name in ("a", "b"):
        spec = ExperimentSpec(kind="taylor_green", config=cfg, params=params,
                              options={}, output_path=str(tmp_path / name))
        run_experiment(spec)
        ledgers.append((tmp_path / name / "ledger.csv").read_bytes())
    assert ledgers[0] == ledgers[1]


def test_experiment_threads_deterministic(tmp_path, grid2, rng):
    params = PdeParams(nu=0.3, kappa=0.5, p=3.0)
    cfg = SimConfig(grid=grid2, galerkin_n=8, dt=1e-2, t_end=0.1)
    v0 = random_solenoidal(grid2, 2, rng, 1.0)
    seq = run_refinement(cfg, params, v0, [2, 4, 8], threads=1)
    par = run_refinement(cfg, params, v0, [2, 4, 8], threads=3)
    assert seq == par

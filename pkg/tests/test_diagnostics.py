import numpy as np
import pytest

from nsvlab.diagnostics import (
    EnergyLedger,
    apriori_report,
    convective_norm_report,
    energy_identity_residual,
    lebesgue_time_norm,
)
from nsvlab.fields import random_solenoidal, single_mode, taylor_green
from nsvlab.solver import PdeParams, SimConfig, Trajectory, integrate
from nsvlab.spectral import SpectralVelocity, lp_norm_pow


def short_run(grid, params, v0, dt=5e-3, t_end=0.1, n=8, tol=1e-13):
    cfg = SimConfig(grid=grid, galerkin_n=n, dt=dt, t_end=t_end,
                    fixed_point_tol=tol)
    return integrate(cfg, params, v0)


# -- ledger mechanics -------------------------------------------------------


def test_ledger_roundtrip(tmp_path, grid2, rng):
    params = PdeParams(nu=0.2, kappa=0.4, p=2.0)
    traj = short_run(grid2, params, random_solenoidal(grid2, 3, rng, 1.0))
    path = tmp_path / "ledger.csv"
    traj.ledger.to_csv(path)
    header, *rows = path.read_text().strip().split("\n")
    assert header.split(",") == list(EnergyLedger.columns)
    assert len(rows) == len(traj.ledger)
    # full round-trip precision
    t_back = np.array([float(r.split(",")[0]) for r in rows])
    assert np.array_equal(t_back, traj.ledger.t)


def test_ledger_rejects_incomplete_record():
    led = EnergyLedger()
    with pytest.raises(KeyError):
        led.append({"t": 0.0})


# -- energy identity ----------------------------------------------------------


def test_residual_zero_trajectory(grid2):
    params = PdeParams(nu=0.1, kappa=0.5, p=2.0)
    traj = short_run(grid2, params, SpectralVelocity.zero(grid2))
    assert np.all(energy_identity_residual(traj, params) == 0.0)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_residual_quarters_under_dt_halving(grid2, rng, p):
    params = PdeParams(nu=0.25, kappa=0.4, p=p)
    v0 = random_solenoidal(grid2, 3, rng, 1.0)
    d1 = abs(energy_identity_residual(
        short_run(grid2, params, v0, dt=5e-3), params)[-1])
    d2 = abs(energy_identity_residual(
        short_run(grid2, params, v0, dt=2.5e-3), params)[-1])
    assert 3.5 <= d1 / d2 <= 4.5


def test_residual_sign_matches_dissipation(grid2, rng):
    # unforced: trapezoid overestimates the convex decaying dissipation
    # history, so the defect keeps one sign and the energy decreases
    params = PdeParams(nu=0.3, kappa=0.5, p=2.0)
    traj = short_run(grid2, params, random_solenoidal(grid2, 3, rng, 1.0))
    e = traj.ledger.energy()
    assert np.all(np.diff(e) <= 0.0)


def test_residual_includes_regularizer(grid2, rng):
    params = PdeParams(nu=0.3, kappa=0.5, p=1.6, regularization=(1.8, 2.0))
    v0 = random_solenoidal(grid2, 3, rng, 1.0)
    d1 = abs(energy_identity_residual(
        short_run(grid2, params, v0, dt=5e-3), params)[-1])
    d2 = abs(energy_identity_residual(
        short_run(grid2, params, v0, dt=2.5e-3), params)[-1])
    assert 3.5 <= d1 / d2 <= 4.5


# -- a-priori constants -----------------------------------------------------------


def test_apriori_trivial_data(grid2):
    params = PdeParams(nu=0.1, kappa=0.5, p=2.0)
    traj = short_run(grid2, params, SpectralVelocity.zero(grid2))
    rep = apriori_report(traj, params)
    assert rep["constant_energy"] == 0.0
    assert rep["constant_time_derivative"] == 0.0


def test_apriori_constant_stable_under_refinement(grid2, rng):
    params = PdeParams(nu=0.3, kappa=0.5, p=1.8,
                       forcing=single_mode(grid2, (1, 2), 0.3).coeffs)
    v0 = random_solenoidal(grid2, 3, rng, 1.0)
    consts = []
    for n in (4, 8):
        traj = short_run(grid2, params, v0, dt=1e-2, t_end=0.2, n=n)
        consts.append(apriori_report(traj, params)["constant_energy"])
    spread = abs(consts[0] - consts[1]) / consts[1]
    assert spread <= 0.05


def test_apriori_ratio_does_not_explode_with_forcing(grid2, rng):
    v0 = random_solenoidal(grid2, 3, rng, 1.0)
    consts = []
    for amp in (0.2, 0.8):
        params = PdeParams(nu=0.3, kappa=0.5, p=2.0,
                           forcing=single_mode(grid2, (1, 2), amp).coeffs)
        traj = short_run(grid2, params, v0, dt=1e-2, t_end=0.2)
        consts.append(apriori_report(traj, params)["constant_energy"])
    assert consts[1] <= 2.0 * consts[0] + 1.0


# -- Lebesgue-in-time norms ---------------------------------------------------------


def test_lebesgue_norm_zero_and_separable(grid2):
    params = PdeParams(nu=0.1, kappa=0.5, p=2.0)
    traj = short_run(grid2, params, SpectralVelocity.zero(grid2))
    assert lebesgue_time_norm(traj, 4.0) == 0.0

    v = single_mode(grid2, (1, 2), 0.9)
    fake = Trajectory(grid=grid2, times=[0.0, 0.5, 1.0],
                      snapshots=[v, v, v], ledger=traj.ledger)
    per_time = lp_norm_pow(v.collocation(), 4.0, grid2, magnitude_axes=(0,))
    assert lebesgue_time_norm(fake, 4.0) == pytest.approx(1.0 * per_time, rel=1e-12)
    with pytest.raises(ValueError):
        lebesgue_time_norm(fake, 0.5)


# -- convective norms ------------------------------------------------------------------


def test_convective_report_zero_and_range(grid2):
    params = PdeParams(nu=0.1, kappa=0.5, p=2.0)
    traj = short_run(grid2, params, SpectralVelocity.zero(grid2))
    rep = convective_norm_report(traj, 1.5)
    assert rep["tensor_integral"] == 0.0
    assert rep["divergence_integral"] == 0.0
    with pytest.raises(ValueError):
        convective_norm_report(traj, 2.5)   # above d/(d-1) = 2 for d = 2


def test_convective_divergence_taylor_green_closed_form(grid2):
    # div(v x v) = -a^2/2 (sin 2x, sin 2y), so the squared L2 norm is
    # a^4/4 * (2 pi^2 + 2 pi^2) = pi^2 a^4
    a = 1.3
    v = taylor_green(grid2, a)
    fake = Trajectory(grid=grid2, times=[0.0, 1.0], snapshots=[v, v],
                      ledger=EnergyLedger())
    rep = convective_norm_report(fake, 2.0)
    assert rep["divergence_integral"] == pytest.approx(np.pi**2 * a**4, rel=1e-12)
    assert rep["tensor_integral"] == pytest.approx(
        lp_norm_pow(np.sum(v.collocation()**2, axis=0), 2.0, grid2), rel=1e-12)


def test_lebesgue_norm_bounded_across_shells_3d(grid3):
    # zeta = p d / (d - 2) = 3p for d = 3
    from nsvlab.fields import multi_mode_3d

    p = 1.6
    params = PdeParams(nu=0.3, kappa=0.5, p=p)
    v0 = multi_mode_3d(grid3, 1.0)
    vals = []
    for n in (2, 4):
        cfg = SimConfig(grid=grid3, galerkin_n=n, dt=2e-2, t_end=0.1)
        vals.append(lebesgue_time_norm(integrate(cfg, params, v0), 3.0 * p))
    assert all(np.isfinite(v) for v in vals)
    assert abs(vals[0] - vals[1]) <= 0.05 * vals[1]


def test_convective_report_bounded_across_shells(grid2, rng):
    params = PdeParams(nu=0.3, kappa=0.5, p=2.2)
    v0 = random_solenoidal(grid2, 2, rng, 1.0)
    vals = []
    for n in (4, 8):
        traj = short_run(grid2, params, v0, dt=1e-2, t_end=0.2, n=n)
        rep = convective_norm_report(traj, 2.0)
        vals.append(rep["tensor_integral"] + rep["divergence_integral"])
    assert abs(vals[0] - vals[1]) <= 0.1 * vals[1]

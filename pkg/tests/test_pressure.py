import numpy as np
import pytest

from nsvlab.fields import random_solenoidal, taylor_green
from nsvlab.pressure import (
    decompose_pressure,
    gradient_consistency_residual,
    pressure_report,
    recover_pressure,
    verify_pressure_bounds,
)
from nsvlab.solver import PdeParams, SimConfig, integrate
from nsvlab.spectral import SpectralVelocity, TorusGrid, embed_coeffs, lp_norm_pow


def l2(field, grid):
    return np.sqrt(lp_norm_pow(field, 2.0, grid))


def test_zero_state_zero_pressure(grid2):
    params = PdeParams(nu=0.3, kappa=0.4, p=1.7)
    pi = recover_pressure(SpectralVelocity.zero(grid2), 0.0, params)
    assert np.all(pi == 0.0)


def test_taylor_green_classical_pressure(grid2):
    a = 1.7
    params = PdeParams(nu=0.1, kappa=0.5, p=2.0)
    pi = recover_pressure(taylor_green(grid2, a), 0.0, params)
    x, y = grid2.meshgrid()
    exact = -(a * a / 4.0) * (np.cos(2 * x) + np.cos(2 * y))
    assert np.max(np.abs(pi - exact)) <= 1e-13 * a * a


def test_pressure_parts_trivial(grid2):
    params = PdeParams(nu=0.3, kappa=0.4, p=1.7)
    parts = decompose_pressure(SpectralVelocity.zero(grid2), 0.0, params)
    assert np.all(parts.total() == 0.0)
    assert parts.constants["pi1_ratio"] is None


def test_sum_consistency_random_snapshots(grid2, rng):
    forcing = random_solenoidal(grid2, 3, rng, 0.7).coeffs
    params = PdeParams(nu=0.3, kappa=0.2, p=1.6, forcing=forcing,
                       regularization=(1.8, 4.0))
    for i in range(10):
        v = random_solenoidal(grid2, 6, rng, 0.5 + 0.2 * i)
        parts = decompose_pressure(v, 0.0, params)
        pi = recover_pressure(v, 0.0, params)
        assert l2(parts.total() - pi, grid2) <= 1e-10 * l2(pi, grid2)
        assert abs(np.mean(parts.pi1)) <= 1e-14
        assert abs(np.mean(parts.pi2)) <= 1e-14
        assert np.all(parts.pih == 0.0)


def test_gradient_consistency(grid2, rng):
    params = PdeParams(nu=0.4, kappa=0.3, p=2.4)
    for _ in range(5):
        v = random_solenoidal(grid2, 5, rng, 1.0)
        assert gradient_consistency_residual(v, 0.0, params) <= 1e-10


def test_viscous_ratio_contraction_at_m2(grid2, rng):
    params = PdeParams(nu=0.5, kappa=0.3, p=1.8)
    for _ in range(5):
        v = random_solenoidal(grid2, 6, rng, 1.0)
        parts = decompose_pressure(v, 0.0, params, m1=2.0)
        assert parts.constants["pi1_ratio"] is not None
        assert parts.constants["pi1_ratio"] <= 1.0 + 1e-12


def test_forcing_must_have_zero_mean(grid2, rng):
    fc = random_solenoidal(grid2, 3, rng, 1.0).coeffs.copy()
    fc[(slice(None), 0, 0)] = [0.3, 0.0]
    params = PdeParams(nu=0.3, kappa=0.2, p=2.0, forcing=fc)
    with pytest.raises(ValueError):
        recover_pressure(random_solenoidal(grid2, 4, rng, 1.0), 0.0, params)


def test_verify_bounds_zero_denominator_reported(grid2):
    params = PdeParams(nu=0.3, kappa=0.4, p=1.7)
    v = SpectralVelocity.zero(grid2)
    parts = decompose_pressure(v, 0.0, params)
    zeros = np.zeros((2, 2) + grid2.shape)
    rep = verify_pressure_bounds([0.0], [parts], [zeros], [zeros], 2.0, 2.0, grid2)
    assert rep["pi1_ratio"] is None
    assert rep["pi2_ratio"] is None


def test_bound_ratios_finite_on_trajectory(grid2, rng):
    params = PdeParams(nu=0.3, kappa=0.4, p=1.7)
    v0 = random_solenoidal(grid2, 3, rng, 1.0)
    cfg = SimConfig(grid=grid2, galerkin_n=8, dt=1e-2, t_end=0.1)
    traj = integrate(cfg, params, v0)
    rep = pressure_report(traj, params, m1=2.0)
    assert rep["pi1_ratio"] is not None and rep["pi1_ratio"] <= 1.0 + 1e-12
    assert rep["pi2_ratio"] is not None and np.isfinite(rep["pi2_ratio"])
    assert rep["grad_pi2_ratio"] is not None and np.isfinite(rep["grad_pi2_ratio"])


def test_bound_ratios_stable_under_grid_refinement(rng):
    # one underlying snapshot whose quadratic terms are resolved even at
    # the coarsest resolution, measured at three resolutions
    base = TorusGrid(2, 16)
    params = PdeParams(nu=0.3, kappa=0.4, p=1.7)
    v_base = random_solenoidal(base, 3, rng, 1.0)
    ratios = []
    for m in (16, 32, 64):
        grid = TorusGrid(2, m)
        v = SpectralVelocity(grid, embed_coeffs(v_base.coeffs, base, grid))
        parts = decompose_pressure(v, 0.0, params)
        ratios.append(parts.constants["pi2_ratio"])
    spread = (max(ratios) - min(ratios)) / min(ratios)
    assert spread <= 0.10

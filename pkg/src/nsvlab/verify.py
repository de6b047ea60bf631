"""Named invariant suites behind ``nsvlab verify <suite>``.

Each suite returns ``[(check name, passed, detail), ...]``; the CLI prints
one PASS/FAIL line per check and exits nonzero if any fail.  The suites are
deterministic for a given seed.
"""

from __future__ import annotations

import numpy as np

from . import tensors
from .diagnostics import energy_identity_residual
from .fields import random_solenoidal
from .pressure import (
    decompose_pressure,
    gradient_consistency_residual,
    recover_pressure,
)
from .solver import PdeParams, SimConfig, integrate
from .spectral import (
    SpectralVelocity,
    TorusGrid,
    dealiased_product,
    leray_project,
    lp_norm_pow,
    sym_gradient,
    truncate,
)

__all__ = ["SUITES", "run_suite"]

# module-level alias so tests can inject a broken variant (mutation sanity)
check_lemma21 = tensors.check_lemma21


def _random_sym_pairs(rng, count, dim=3, scale=2.0):
    e = rng.uniform(-scale, scale, size=(count, dim, dim))
    f = rng.uniform(-scale, scale, size=(count, dim, dim))
    sym = lambda t: 0.5 * (t + np.swapaxes(t, -2, -1))
    return sym(e), sym(f)


def tensor_suite(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    checks = []

    worst_gap = 0.0
    lemma_ok = True
    for p in (1.2, 1.5, 2.0, 3.0, 4.0):
        e, f = _random_sym_pairs(rng, 10_000)
        gap = tensors.monotonicity_gap(e, f, p)
        scale = tensors.frobenius_norm(e) ** p + tensors.frobenius_norm(f) ** p
        worst_gap = min(worst_gap, float(np.min(gap / np.maximum(scale, 1e-300))))
        _, _, holds = check_lemma21(e, f, p)
        lemma_ok = lemma_ok and bool(np.all(holds))
    checks.append(("monotonicity gap >= 0, 1e4 pairs x 5 exponents",
                   worst_gap >= -1e-12, f"min gap/scale = {worst_gap:.3e}"))
    checks.append(("two-sided stress inequality holds on all pairs",
                   lemma_ok, "p in {1.2, 1.5, 2, 3, 4}"))

    worst_h = 0.0
    for p_val in (1.1, 1.5, 2.0, 2.7, 4.2):
        lam = rng.uniform(0.1, 5.0, size=200)
        d, _ = _random_sym_pairs(rng, 200)
        lhs = tensors.power_law_stress(lam[:, None, None] * d, p_val)
        rhs = lam[:, None, None] ** (p_val - 1.0) * tensors.power_law_stress(d, p_val)
        denom = np.maximum(tensors.frobenius_norm(rhs), 1e-300)
        worst_h = max(worst_h, float(np.max(tensors.frobenius_norm(lhs - rhs) / denom)))
    checks.append(("homogeneity A(lam D) = lam^(p-1) A(D)",
                   worst_h <= 1e-12, f"max rel defect = {worst_h:.3e}"))

    a = tensors.power_law_stress(_random_sym_pairs(rng, 100)[0], 2.7)
    sym_def = float(np.max(tensors.symmetry_defect(a)))
    checks.append(("stress output symmetric", sym_def == 0.0, f"defect = {sym_def:.3e}"))
    zero = tensors.power_law_stress(np.zeros((3, 3)), 1.3)
    checks.append(("A(0) = 0 for p < 2", float(np.max(np.abs(zero))) == 0.0, "continuous extension"))

    theta = rng.uniform(0, 2 * np.pi)
    q = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])

    def tg_sampler(pts):
        return np.stack([np.cos(pts[:, 0]) * np.sin(pts[:, 1]),
                         -np.sin(pts[:, 0]) * np.cos(pts[:, 1])], axis=-1)

    disc = tensors.objectivity_check(tg_sampler, q, seed=seed)
    checks.append(("strain transforms objectively under rotation",
                   disc <= 1e-8, f"max discrepancy = {disc:.3e}"))
    return checks


def spectral_suite(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    checks = []
    grid = TorusGrid(2, 32)
    u = random_solenoidal(grid, 6, rng, 1.5)

    vals = u.collocation()
    quad = grid.cell_volume * float(np.sum(vals * vals))
    rel = abs(quad / u.l2_norm_sq() - 1.0)
    checks.append(("Parseval: quadrature equals coefficient norm",
                   rel <= 1e-12, f"rel defect = {rel:.3e}"))

    raw = SpectralVelocity(grid, u.coeffs + 0.3 * np.roll(u.coeffs, 1, axis=1))
    once = leray_project(raw)
    twice = leray_project(once)
    idem = float(np.max(np.abs(twice.coeffs - once.coeffs)))
    checks.append(("Leray projection idempotent", idem <= 1e-14 * np.max(np.abs(once.coeffs)),
                   f"max coeff change = {idem:.3e}"))

    w = random_solenoidal(grid, 6, rng, 1.0)
    raw2 = SpectralVelocity(grid, w.coeffs + 0.2 * np.roll(w.coeffs, 2, axis=2))
    lhs = np.sum(leray_project(raw).coeffs * np.conj(raw2.coeffs))
    rhs = np.sum(raw.coeffs * np.conj(leray_project(raw2).coeffs))
    adj = abs(lhs - rhs)
    checks.append(("Leray projection self-adjoint", adj <= 1e-12,
                   f"pairing defect = {adj:.3e}"))

    div = once.divergence_max() / max(np.sqrt(once.grad_norm_sq()), 1e-300)
    checks.append(("projected field divergence-free", div <= 1e-12,
                   f"relative divergence = {div:.3e}"))

    tc = truncate(leray_project(raw), 4)
    ct = leray_project(truncate(raw, 4))
    comm = float(np.max(np.abs(tc.coeffs - ct.coeffs)))
    checks.append(("truncation commutes with projection", comm <= 1e-14,
                   f"max difference = {comm:.3e}"))

    d_vals = sym_gradient(u)
    korn = lp_norm_pow(d_vals, 2.0, grid, magnitude_axes=(0, 1))
    korn_rel = abs(korn / (0.5 * u.grad_norm_sq()) - 1.0)
    checks.append(("Korn identity int |D|^2 = 1/2 int |grad v|^2",
                   korn_rel <= 1e-12, f"rel defect = {korn_rel:.3e}"))

    x = grid.meshgrid()[0]
    prod = dealiased_product(np.cos(6 * x), np.cos(6 * x), grid)
    # cos^2(6x) = 1/2 + cos(12x)/2 lives exactly on modes {0, +-12}
    rest = prod.copy()
    for idx in ((0, 0), (12, 0), (-12 % grid.modes_per_axis, 0)):
        rest[idx] = 0.0
    leak = float(np.max(np.abs(rest)))
    checks.append(("quadratic product alias-free", leak <= 1e-14,
                   f"energy outside exact modes = {leak:.3e}"))
    return checks


def energy_suite(seed: int = 0) -> list:
    checks = []
    grid = TorusGrid(2, 32)
    params = PdeParams(nu=0.1, kappa=0.5, p=2.0)
    from .experiments import run_taylor_green

    cfg = SimConfig(grid=grid, galerkin_n=15, dt=5e-3, t_end=0.25,
                    fixed_point_tol=1e-12)
    rep = run_taylor_green(cfg, params, 1.0)
    checks.append(("Taylor-Green decay matches closed form",
                   rep["terminal_l2_error_rel"] <= 1e-8,
                   f"rel error = {rep['terminal_l2_error_rel']:.3e}"))

    traj = rep["trajectory"]
    e = traj.ledger.energy()
    mono = bool(np.all(np.diff(e) <= cfg.dt**2 * e[0]))
    checks.append(("energy nonincreasing without forcing", mono,
                   f"max increment = {np.max(np.diff(e)):.3e}"))

    rng = np.random.default_rng(seed)
    v0 = random_solenoidal(grid, 3, rng, 1.0)
    p3 = PdeParams(nu=0.2, kappa=0.4, p=3.0)
    defects = []
    for dt in (5e-3, 2.5e-3):
        c = SimConfig(grid=grid, galerkin_n=8, dt=dt, t_end=0.1, fixed_point_tol=1e-13)
        defects.append(abs(energy_identity_residual(integrate(c, p3, v0), p3)[-1]))
    ratio = defects[0] / max(defects[1], 1e-300)
    checks.append(("energy identity defect is O(dt^2)", 3.0 <= ratio <= 5.0,
                   f"defect ratio under halving = {ratio:.3f}"))
    return checks


def pressure_suite(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    checks = []
    grid = TorusGrid(2, 32)
    forcing = random_solenoidal(grid, 3, rng, 0.7).coeffs
    params = PdeParams(nu=0.3, kappa=0.2, p=1.6, forcing=forcing,
                       regularization=(1.8, 4.0))

    worst_sum = 0.0
    worst_mean = 0.0
    worst_grad = 0.0
    ratio_ok = True
    for _ in range(25):
        v = random_solenoidal(grid, 6, rng, 1.0)
        pi = recover_pressure(v, 0.0, params)
        parts = decompose_pressure(v, 0.0, params, m1=2.0)
        num = np.sqrt(lp_norm_pow(parts.total() - pi, 2.0, grid))
        den = max(np.sqrt(lp_norm_pow(pi, 2.0, grid)), 1e-300)
        worst_sum = max(worst_sum, num / den)
        worst_mean = max(worst_mean, abs(float(np.mean(parts.pi1))),
                         abs(float(np.mean(parts.pi2))), abs(float(np.mean(pi))))
        worst_grad = max(worst_grad, gradient_consistency_residual(v, 0.0, params))
        if parts.constants["pi1_ratio"] is not None:
            ratio_ok = ratio_ok and parts.constants["pi1_ratio"] <= 1.0 + 1e-12
    checks.append(("decomposition sums to recovered pressure",
                   worst_sum <= 1e-10, f"worst rel defect = {worst_sum:.3e}"))
    checks.append(("pressure parts have zero mean", worst_mean <= 1e-12,
                   f"worst mean = {worst_mean:.3e}"))
    checks.append(("grad pi matches Leray complement of RHS",
                   worst_grad <= 1e-10, f"worst rel defect = {worst_grad:.3e}"))
    checks.append(("viscous ratio at m1=2 is an L2 contraction", ratio_ok,
                   "|k^t G k|/|k|^2 <= |G|"))

    zero = SpectralVelocity.zero(grid)
    p0 = PdeParams(nu=0.3, kappa=0.2, p=1.6)
    parts0 = decompose_pressure(zero, 0.0, p0)
    undefined = parts0.constants["pi1_ratio"] is None
    checks.append(("zero data reports undefined ratios", undefined,
                   "0/0 flagged rather than fabricated"))
    return checks


SUITES = {
    "tensor": tensor_suite,
    "spectral": spectral_suite,
    "energy": energy_suite,
    "pressure": pressure_suite,
}


def run_suite(name: str, seed: int = 0) -> list:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name](seed)

"""Pressure recovery and three-part decomposition on the torus.

The pressure is the Lagrange multiplier of the divergence constraint: taking
the divergence of the momentum balance eliminates the inertia and Voigt
terms (both solenoidal) and leaves a Poisson problem,

    Lap pi = div( f - div(v x v) + nu div A(v) + (1/n) div B(v) ),

solved exactly in spectral space with zero mean.  The decomposition mirrors
the momentum terms: ``pi_1`` carries the viscous stress through
``Lap^{-1} div div G_1`` with ``G_1 = nu A(v)``, while ``pi_2`` carries the
convective, forcing and regularizer content through ``G_2``; the harmonic
part ``pi_h`` (harmonic, periodic, zero mean) collapses to the zero field
on the torus but is still emitted so reports keep the three-part shape.
The parts sum to the recovered pressure exactly, and the measured ratios

    int ||pi_1||_{m1}^{m1} / int ||G_1||_{m1}^{m1},
    int ||pi_2||_{m2}^{m2} / int ||G_2||_{m2}^{m2},
    int ||grad pi_2||_{m2}^{m2} / int (||G_2||^{m2} + ||div G_2||^{m2})

are the measured stand-ins for the decomposition's bound constants: they
must stay bounded and stable under grid refinement.  For ``m1 = 2`` the
first ratio is at most 1, since
``|k^t G k| / |k|^2 <= |G|`` makes ``Lap^{-1} div div`` an L^2 contraction
on mean-zero tensors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .solver import PdeParams, convective_tensor_coeffs, stress_tensor_coeffs
from .spectral import SpectralVelocity, TorusGrid, lp_norm_pow, values_from_coeffs

__all__ = [
    "PressureParts",
    "recover_pressure",
    "decompose_pressure",
    "verify_pressure_bounds",
    "pressure_report",
]


@dataclass
class PressureParts:
    """Viscous / convective+forcing / harmonic pressure parts (collocation)."""

    pi1: np.ndarray
    pi2: np.ndarray
    pih: np.ndarray
    constants: dict = field(default_factory=dict)

    def total(self) -> np.ndarray:
        return self.pi1 + self.pi2 + self.pih


def _forcing_coeffs(v: SpectralVelocity, t: float, params: PdeParams) -> np.ndarray | None:
    fc = params.forcing_at(t, v.grid)
    if fc is None:
        return None
    mean = np.abs(fc[(slice(None),) + (0,) * v.grid.dim])
    scale = max(float(np.max(np.abs(fc))), 1e-300)
    if np.max(mean) > 1e-12 * scale:
        raise ValueError("pressure recovery requires zero-mean forcing")
    return fc


def _assembled_tensors(v: SpectralVelocity, t: float, params: PdeParams):
    """Spectral tensors (G1, G2) and the forcing coefficients.

    G1 = nu A(v);  G2 = -(v x v) - grad (-Lap)^{-1} f + (1/n) B(v),
    chosen so that pi_i = Lap^{-1} div div G_i sum exactly to the recovered
    pressure.
    """
    grid = v.grid
    k = grid.k_mesh()
    ksq = grid.k_sq()
    denom = np.where(ksq > 0.0, ksq, 1.0)

    g1 = params.nu * stress_tensor_coeffs(v, params.p)
    g2 = -convective_tensor_coeffs(v)
    fc = _forcing_coeffs(v, t, params)
    if fc is not None:
        # grad (-Lap)^{-1} f : [i, j] = i k_j f_i / |k|^2
        g2 = g2 - 1j * k[None, :, ...] * (fc[:, None, ...] / denom)
    w = params.reg_weight
    if w > 0.0:
        g2 = g2 + w * stress_tensor_coeffs(v, params.beta)
    return g1, g2, fc


def _divdiv_over_ksq(tensor_coeffs: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Spectral scalar k^t T k / |k|^2 (zero mean), i.e. Lap^{-1} div div T."""
    k = grid.k_mesh()
    ksq = grid.k_sq()
    denom = np.where(ksq > 0.0, ksq, 1.0)
    quad = np.sum(k[None, :, ...] * k[:, None, ...] * tensor_coeffs, axis=(0, 1))
    out = quad / denom
    out[(0,) * grid.dim] = 0.0
    return out


def recover_pressure(v: SpectralVelocity, t: float, params: PdeParams) -> np.ndarray:
    """Zero-mean pressure field balancing the momentum equation at state v.

    Spectrally, ``pi_hat = -i k . R_hat / |k|^2`` with R the assembled
    right-hand side ``f - div(v x v) + nu div A + (1/n) div B``; the Voigt
    and inertia terms contribute nothing since their divergence vanishes.
    For the Taylor-Green state at p = 2 this returns the classical
    ``-(a^2/4)(cos 2x + cos 2y)``.
    """
    grid = v.grid
    g1, g2, _ = _assembled_tensors(v, t, params)
    pi_c = _divdiv_over_ksq(g1 + g2, grid)
    return values_from_coeffs(pi_c, grid)


def decompose_pressure(v: SpectralVelocity, t: float, params: PdeParams,
                       m1: float = 2.0, m2: float | None = None) -> PressureParts:
    """Split the pressure into viscous, convective+forcing and harmonic parts.

    Each part has zero spatial mean; ``pih`` is identically zero here
    (harmonic + periodic + zero mean).  ``constants`` carries the
    snapshot-level norm ratios at exponents (m1, m2); m2 defaults to
    d/(d-1).
    """
    grid = v.grid
    if m2 is None:
        m2 = grid.dim / (grid.dim - 1.0)
    g1, g2, _ = _assembled_tensors(v, t, params)
    pi1 = values_from_coeffs(_divdiv_over_ksq(g1, grid), grid)
    pi2 = values_from_coeffs(_divdiv_over_ksq(g2, grid), grid)
    pih = np.zeros(grid.shape)

    g1_vals = values_from_coeffs(g1, grid)
    g2_vals = values_from_coeffs(g2, grid)

    def ratio(num, den):
        return float(num / den) if den > 0.0 else None

    constants = {
        "m1": float(m1),
        "m2": float(m2),
        "pi1_ratio": ratio(lp_norm_pow(pi1, m1, grid),
                           lp_norm_pow(g1_vals, m1, grid, magnitude_axes=(0, 1))),
        "pi2_ratio": ratio(lp_norm_pow(pi2, m2, grid),
                           lp_norm_pow(g2_vals, m2, grid, magnitude_axes=(0, 1))),
    }
    return PressureParts(pi1=pi1, pi2=pi2, pih=pih, constants=constants)


def gradient_consistency_residual(v: SpectralVelocity, t: float,
                                  params: PdeParams) -> float:
    """Relative defect of grad(pi) against the Leray complement of the RHS.

    The gradient of the recovered pressure must equal the non-solenoidal
    part of the assembled momentum right-hand side; both sides are formed
    through independent routes (value-space differentiation of pi versus
    the spectral complement of the tensor divergence).
    """
    from .spectral import coeffs_from_values

    grid = v.grid
    g1, g2, _ = _assembled_tensors(v, t, params)
    k = grid.k_mesh()
    rhs = 1j * np.sum(k[None, :, ...] * (g1 + g2), axis=1)
    ksq = grid.k_sq()
    denom = np.where(ksq > 0.0, ksq, 1.0)
    complement = k * (np.sum(k * rhs, axis=0) / denom)

    pi_vals = recover_pressure(v, t, params)
    grad_pi = 1j * k * coeffs_from_values(pi_vals, grid)[None, ...]
    scale = float(np.max(np.abs(complement)))
    if scale == 0.0:
        return float(np.max(np.abs(grad_pi)))
    return float(np.max(np.abs(grad_pi - complement)) / scale)


def _grad_values(scalar_values: np.ndarray, grid: TorusGrid) -> np.ndarray:
    from .spectral import coeffs_from_values

    c = coeffs_from_values(scalar_values, grid)
    return values_from_coeffs(1j * grid.k_mesh() * c[None, ...], grid)


def _div_tensor_values(tensor_values: np.ndarray, grid: TorusGrid) -> np.ndarray:
    from .spectral import coeffs_from_values

    c = coeffs_from_values(tensor_values, grid)
    k = grid.k_mesh()
    return values_from_coeffs(1j * np.sum(k[None, :, ...] * c, axis=1), grid)


def verify_pressure_bounds(times, parts_seq, g1_seq, g2_seq, m1: float, m2: float,
                           grid: TorusGrid) -> dict:
    """Measure the decomposition bound ratios along a common trajectory.

    ``parts_seq`` holds PressureParts per sample time; ``g1_seq``/``g2_seq``
    hold the matching tensor collocation values (shape (d, d, *grid)).
    Identically zero denominators are reported as ``None`` ("undefined").
    """
    times = np.asarray(times, dtype=float)
    if not (len(times) == len(parts_seq) == len(g1_seq) == len(g2_seq)):
        raise ValueError("sample sequences must share one time grid")

    pi1_n, pi2_n, gpi2_n = [], [], []
    g1_n, g2_n, g2div_n = [], [], []
    for parts, g1v, g2v in zip(parts_seq, g1_seq, g2_seq):
        pi1_n.append(lp_norm_pow(parts.pi1, m1, grid))
        pi2_n.append(lp_norm_pow(parts.pi2, m2, grid))
        gpi2_n.append(lp_norm_pow(_grad_values(parts.pi2, grid), m2, grid,
                                  magnitude_axes=(0,)))
        g1_n.append(lp_norm_pow(g1v, m1, grid, magnitude_axes=(0, 1)))
        g2_n.append(lp_norm_pow(g2v, m2, grid, magnitude_axes=(0, 1)))
        g2div_n.append(lp_norm_pow(_div_tensor_values(g2v, grid), m2, grid,
                                   magnitude_axes=(0,)))

    def integral(series):
        if len(times) == 1:
            return float(series[0])
        return float(np.trapezoid(np.array(series), times))

    def ratio(num, den):
        return None if den == 0.0 else num / den

    int_pi1, int_g1 = integral(pi1_n), integral(g1_n)
    int_pi2, int_g2 = integral(pi2_n), integral(g2_n)
    int_gpi2, int_g2div = integral(gpi2_n), integral(g2div_n)
    return {
        "m1": float(m1),
        "m2": float(m2),
        "pi1_ratio": ratio(int_pi1, int_g1),
        "pi2_ratio": ratio(int_pi2, int_g2),
        "grad_pi2_ratio": ratio(int_gpi2, int_g2 + int_g2div),
        "integrals": {
            "pi1": int_pi1, "g1": int_g1,
            "pi2": int_pi2, "g2": int_g2,
            "grad_pi2": int_gpi2, "div_g2": int_g2div,
        },
    }


def pressure_report(traj, params: PdeParams, m1: float = 2.0,
                    m2: float | None = None, max_samples: int = 33) -> dict:
    """Convenience wrapper: sample a trajectory and measure the bound ratios."""
    grid = traj.grid
    if m2 is None:
        m2 = grid.dim / (grid.dim - 1.0)
    stride = max(1, len(traj.snapshots) // max_samples)
    idx = list(range(0, len(traj.snapshots), stride))
    times, parts_seq, g1_seq, g2_seq = [], [], [], []
    for i in idx:
        v, t = traj.snapshots[i], traj.times[i]
        g1, g2, _ = _assembled_tensors(v, t, params)
        parts_seq.append(decompose_pressure(v, t, params, m1=m1, m2=m2))
        g1_seq.append(values_from_coeffs(g1, grid))
        g2_seq.append(values_from_coeffs(g2, grid))
        times.append(t)
    return verify_pressure_bounds(times, parts_seq, g1_seq, g2_seq, m1, m2, grid)

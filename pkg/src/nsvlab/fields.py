"""Named initial fields and forcing builders.

Everything here produces exactly divergence-free, conjugate-symmetric
spectra inside the active band, so downstream code never needs to clean up.
"""

from __future__ import annotations

import numpy as np

from .spectral import (
    SpectralVelocity,
    TorusGrid,
    coeffs_from_values,
    leray_project,
    truncate,
    zero_nyquist,
)

__all__ = [
    "taylor_green",
    "taylor_green_values",
    "single_mode",
    "random_solenoidal",
    "multi_mode_3d",
]


def taylor_green(grid: TorusGrid, amplitude: float = 1.0) -> SpectralVelocity:
    """Classical 2-D Taylor-Green vortex ``a (cos x sin y, -sin x cos y)``.

    Its convective term is a pure gradient, so under Leray projection the
    p = 2 dynamics reduce to exact exponential decay; the associated
    pressure is ``-a^2/4 (cos 2x + cos 2y)``.
    """
    if grid.dim != 2:
        raise ValueError("taylor_green is a 2-D field")
    a = amplitude / 4.0
    # cos x sin y  = -(i/4) e^{i(x+y)} + (i/4) e^{i(x-y)} + c.c.
    # -sin x cos y =  (i/4) e^{i(x+y)} + (i/4) e^{i(x-y)} + c.c.
    modes = {
        (1, 1): a * np.array([-1j, 1j]),
        (1, -1): a * np.array([1j, 1j]),
    }
    return SpectralVelocity.from_modes(grid, modes)


def taylor_green_values(grid: TorusGrid, amplitude: float = 1.0) -> np.ndarray:
    x, y = grid.meshgrid()
    return amplitude * np.array([np.cos(x) * np.sin(y), -np.sin(x) * np.cos(y)])


def _polarization(mode: np.ndarray) -> np.ndarray:
    """A unit vector orthogonal to the mode (divergence-free polarization)."""
    m = np.asarray(mode, dtype=float)
    if np.all(m == 0):
        raise ValueError("mean mode has no transverse polarization")
    if m.size == 2:
        p = np.array([-m[1], m[0]])
    else:
        seed = np.zeros(3)
        seed[int(np.argmin(np.abs(m)))] = 1.0
        p = np.cross(seed, m)
    return p / np.linalg.norm(p)


def single_mode(grid: TorusGrid, mode, amplitude: float = 1.0,
                phase: float = 0.0) -> SpectralVelocity:
    """Real single-harmonic field ``a * p * cos(k.x + phase)`` with p _|_ k."""
    mode = tuple(int(q) for q in mode)
    pol = _polarization(np.array(mode))
    amp = 0.5 * amplitude * np.exp(1j * phase) * pol
    return SpectralVelocity.from_modes(grid, {mode: amp})


def random_solenoidal(grid: TorusGrid, shell: int, rng: np.random.Generator,
                      amplitude: float = 1.0) -> SpectralVelocity:
    """Seeded random divergence-free field supported on ``|m|_inf <= shell``.

    Normalized to ``||u||_2 = amplitude`` (unless the draw is null).
    """
    shape = (grid.dim,) + grid.shape
    raw = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    # realify by round trip, then band-limit and project
    vals = np.fft.ifftn(raw, axes=tuple(range(-grid.dim, 0))).real
    u = SpectralVelocity(grid, zero_nyquist(coeffs_from_values(vals, grid), grid))
    u = truncate(leray_project(u), shell)
    u.coeffs[(slice(None),) + (0,) * grid.dim] = 0.0
    norm = np.sqrt(u.l2_norm_sq())
    if norm > 0:
        u = u * (amplitude / norm)
    return u


# Shear amplitudes for the strain-positive 3-D field; a^2 > b^2 + c^2 below.
_SHEAR_3D = (1.0, 0.5, 0.3)


def multi_mode_3d(grid: TorusGrid, amplitude: float = 1.0) -> SpectralVelocity:
    """Smooth 3-D field whose strain magnitude never vanishes.

    A three-shear superposition

        v = (a sin z + c cos y,  b sin x + a cos z,  c sin y + b cos x)

    has purely off-diagonal strain, with common zeros only where
    ``b cos x = c sin y``, ``a cos z = b sin x`` and ``c cos y = a sin z``
    hold at once; for ``a^2 > b^2 + c^2`` the second and third conditions
    are incompatible, so ``|D| > 0`` on the whole box.  The power-law
    stress is then analytic in space, which the convergence studies rely
    on.  Normalized to ``||v||_2 = amplitude``.
    """
    if grid.dim != 3:
        raise ValueError("multi_mode_3d is a 3-D field")
    a, b, c = _SHEAR_3D
    x, y, z = grid.meshgrid()
    vals = np.array([
        a * np.sin(z) + c * np.cos(y),
        b * np.sin(x) + a * np.cos(z),
        c * np.sin(y) + b * np.cos(x),
    ])
    u = SpectralVelocity.from_collocation(grid, vals)
    return u * (amplitude / np.sqrt(u.l2_norm_sq()))

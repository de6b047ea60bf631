"""Divergence-free Fourier machinery on the periodic box.

Fields are stored as complex Fourier-series coefficients ``c[k]`` with

    u(x) = sum_k c[k] exp(i k . x),      k = (2*pi/L) * m,

over the integer lattice ``m`` with ``|m_i| <= M/2 - 1`` (the unpaired
Nyquist row is kept identically zero so that spectral differentiation
preserves reality).  With this band, quadratic products evaluated on the
3/2-padded collocation grid and truncated back are alias-free (2/3 rule);
the non-polynomial power-law stress is evaluated on the same padded grid
with the residual aliasing accepted and measurable.

Fourier modes are joint eigenfunctions of the Laplacian, so the Voigt mass
``1 + kappa |k|^2`` of the Galerkin system is diagonal here and exactly
invertible, and nested ``|m|_inf`` shells provide the Galerkin family.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "TorusGrid",
    "SpectralVelocity",
    "leray_project",
    "truncate",
    "sym_gradient",
    "dealiased_product",
    "lp_norm_pow",
]

TWO_PI = 2.0 * np.pi


@lru_cache(maxsize=None)
def _int_freqs(m: int) -> np.ndarray:
    """Integer frequencies in FFT storage order for an m-point axis."""
    return np.fft.fftfreq(m, d=1.0 / m).astype(np.int64)


@lru_cache(maxsize=None)
def _embed_index(src_m: int, dst_m: int) -> np.ndarray:
    """Positions of the src-axis frequencies inside a dst-axis spectrum."""
    if dst_m < src_m:
        raise ValueError("destination grid must be at least as fine")
    return _int_freqs(src_m) % dst_m


@dataclass(frozen=True)
class TorusGrid:
    """Uniform collocation grid on the d-dimensional periodic box.

    ``modes_per_axis`` is the even number M of collocation points per axis;
    the active spectral band is ``|m_i| <= M/2 - 1``.
    """

    dim: int
    modes_per_axis: int
    box_length: float = TWO_PI

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        m = self.modes_per_axis
        if m < 4 or m % 2 != 0:
            raise ValueError(f"modes_per_axis must be an even integer >= 4, got {m}")
        if not self.box_length > 0:
            raise ValueError("box_length must be positive")

    @property
    def shape(self) -> tuple:
        return (self.modes_per_axis,) * self.dim

    @property
    def n_points(self) -> int:
        return self.modes_per_axis**self.dim

    @property
    def volume(self) -> float:
        return self.box_length**self.dim

    @property
    def cell_volume(self) -> float:
        return (self.box_length / self.modes_per_axis) ** self.dim

    @property
    def band(self) -> int:
        """Largest active |m_i| (Nyquist-free)."""
        return self.modes_per_axis // 2 - 1

    def axes(self) -> np.ndarray:
        """Collocation coordinates of one axis."""
        return np.arange(self.modes_per_axis) * (self.box_length / self.modes_per_axis)

    def meshgrid(self) -> list[np.ndarray]:
        ax = self.axes()
        return list(np.meshgrid(*([ax] * self.dim), indexing="ij"))

    def mode_mesh(self) -> np.ndarray:
        """Integer wavenumber lattice, shape (dim, *shape)."""
        f = _int_freqs(self.modes_per_axis)
        return np.array(np.meshgrid(*([f] * self.dim), indexing="ij"))

    def k_mesh(self) -> np.ndarray:
        """Physical wavenumbers (2*pi/L) * m, shape (dim, *shape)."""
        return (TWO_PI / self.box_length) * self.mode_mesh()

    def k_sq(self) -> np.ndarray:
        k = self.k_mesh()
        return np.sum(k * k, axis=0)

    def band_mask(self, n: int | None = None) -> np.ndarray:
        """Boolean mask of modes with |m|_inf <= n (default: the active band)."""
        if n is None:
            n = self.band
        m = self.mode_mesh()
        return np.max(np.abs(m), axis=0) <= n

    def padded(self, factor: float = 1.5) -> "TorusGrid":
        mp = int(round(self.modes_per_axis * factor))
        mp += mp % 2
        return TorusGrid(self.dim, mp, self.box_length)


def _spatial_axes(grid: TorusGrid) -> tuple:
    return tuple(range(-grid.dim, 0))


def coeffs_from_values(values: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Fourier-series coefficients of collocation samples (any leading axes)."""
    return np.fft.fftn(values, axes=_spatial_axes(grid)) / grid.n_points


def values_from_coeffs(coeffs: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Real collocation samples of a conjugate-symmetric coefficient array."""
    return np.fft.ifftn(coeffs * grid.n_points, axes=_spatial_axes(grid)).real


def embed_coeffs(coeffs: np.ndarray, src: TorusGrid, dst: TorusGrid) -> np.ndarray:
    """Zero-pad a spectrum onto a finer grid (coefficients are unchanged)."""
    idx = [_embed_index(src.modes_per_axis, dst.modes_per_axis)] * src.dim
    out = np.zeros(coeffs.shape[: -src.dim] + dst.shape, dtype=complex)
    out[(..., *np.ix_(*idx))] = coeffs
    return out


def restrict_coeffs(coeffs: np.ndarray, src: TorusGrid, dst: TorusGrid) -> np.ndarray:
    """Restrict a spectrum to the modes representable on a coarser grid."""
    idx = [_embed_index(dst.modes_per_axis, src.modes_per_axis)] * dst.dim
    out = coeffs[(..., *np.ix_(*idx))].copy()
    # discard the coarse-grid Nyquist content picked up from the fine band
    band = dst.band_mask()
    return np.where(band, out, 0.0)


def zero_nyquist(coeffs: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Zero every mode outside the Nyquist-free band |m_i| <= M/2 - 1."""
    return np.where(grid.band_mask(), coeffs, 0.0)


class SpectralVelocity:
    """Divergence-free velocity field in spectral representation.

    Invariants maintained by the constructors and operators:
    conjugate symmetry ``c(-k) = conj(c(k))`` (the field is real), zero
    Nyquist content, and ``k . c(k) = 0`` after Leray projection.  The mean
    mode ``c(0)`` rides along unchanged by projection.
    """

    __slots__ = ("grid", "coeffs")

    def __init__(self, grid: TorusGrid, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (grid.dim,) + grid.shape:
            raise ValueError(
                f"coeffs shape {coeffs.shape} does not match grid {(grid.dim,) + grid.shape}"
            )
        self.grid = grid
        self.coeffs = coeffs

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, grid: TorusGrid) -> "SpectralVelocity":
        return cls(grid, np.zeros((grid.dim,) + grid.shape, dtype=complex))

    @classmethod
    def from_collocation(cls, grid: TorusGrid, values: np.ndarray,
                         project: bool = False) -> "SpectralVelocity":
        c = zero_nyquist(coeffs_from_values(np.asarray(values, dtype=float), grid), grid)
        u = cls(grid, c)
        return leray_project(u) if project else u

    @classmethod
    def from_modes(cls, grid: TorusGrid, modes: dict) -> "SpectralVelocity":
        """Build a real field from ``{(m1, ..): complex amplitude vector}``.

        Each entry contributes ``a exp(i k.x) + conj(a) exp(-i k.x)``.
        """
        c = np.zeros((grid.dim,) + grid.shape, dtype=complex)
        m = grid.modes_per_axis
        for mode, amp in modes.items():
            amp = np.asarray(amp, dtype=complex)
            if len(mode) != grid.dim or amp.shape != (grid.dim,):
                raise ValueError(f"mode {mode} / amplitude {amp} do not fit dim={grid.dim}")
            if max(abs(int(q)) for q in mode) > grid.band:
                raise ValueError(f"mode {mode} outside the active band |m| <= {grid.band}")
            pos = tuple(int(q) % m for q in mode)
            neg = tuple((-int(q)) % m for q in mode)
            c[(slice(None),) + pos] += amp
            if neg != pos:
                c[(slice(None),) + neg] += np.conj(amp)
        return cls(grid, c)

    # -- representation -----------------------------------------------

    def collocation(self) -> np.ndarray:
        """Real samples on the grid, shape (dim, *shape)."""
        return values_from_coeffs(self.coeffs, self.grid)

    def copy(self) -> "SpectralVelocity":
        return SpectralVelocity(self.grid, self.coeffs.copy())

    # -- linear algebra (used by the time steppers) ---------------------

    def __add__(self, other: "SpectralVelocity") -> "SpectralVelocity":
        return SpectralVelocity(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralVelocity") -> "SpectralVelocity":
        return SpectralVelocity(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralVelocity":
        return SpectralVelocity(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    # -- invariants and norms -------------------------------------------

    def conjugate_defect(self) -> float:
        """max |c(-k) - conj(c(k))| (zero for real fields)."""
        c = self.coeffs
        rev = c
        for ax in range(1, c.ndim):
            rev = np.flip(np.roll(rev, -1, axis=ax), axis=ax)
        return float(np.max(np.abs(rev - np.conj(c))))

    def divergence_max(self) -> float:
        """max_k |k . c(k)|."""
        k = self.grid.k_mesh()
        return float(np.max(np.abs(np.sum(k * self.coeffs, axis=0))))

    def l2_norm_sq(self) -> float:
        """||u||_2^2 over the box (Parseval)."""
        return float(self.grid.volume * np.sum(np.abs(self.coeffs) ** 2))

    def grad_norm_sq(self) -> float:
        """||grad u||_2^2 over the box."""
        return float(self.grid.volume
                     * np.sum(self.grid.k_sq() * np.sum(np.abs(self.coeffs) ** 2, axis=0)))

    def energy(self, kappa: float) -> float:
        """||u||_2^2 + kappa ||grad u||_2^2."""
        return self.l2_norm_sq() + kappa * self.grad_norm_sq()

    def w12_norm(self) -> float:
        return float(np.sqrt(self.l2_norm_sq() + self.grad_norm_sq()))

    def w1p_norm_pow(self, p: float) -> float:
        """int (|u|^p + |grad u|^p) dx by collocation quadrature."""
        vals = self.collocation()
        grad = gradient_values(self)
        mag_u = np.sqrt(np.sum(vals * vals, axis=0))
        mag_g = np.sqrt(np.sum(grad * grad, axis=(0, 1)))
        return float(self.grid.cell_volume * np.sum(mag_u**p + mag_g**p))


def leray_project(u: SpectralVelocity) -> SpectralVelocity:
    """Orthogonal projection onto divergence-free fields.

    Per mode, ``c(k) <- c(k) - k (k . c(k)) / |k|^2`` for ``k != 0``; the
    mean mode is untouched.  Idempotent and self-adjoint in the coefficient
    inner product.
    """
    grid = u.grid
    k = grid.k_mesh()
    ksq = grid.k_sq()
    denom = np.where(ksq > 0.0, ksq, 1.0)
    kdotc = np.sum(k * u.coeffs, axis=0)
    return SpectralVelocity(grid, u.coeffs - k * (kdotc / denom))


def truncate(u: SpectralVelocity, n: int) -> SpectralVelocity:
    """Galerkin truncation: zero all modes with ``|m|_inf > n``.

    An orthogonal projection in the L^2 and gradient inner products at once
    (the modes are joint eigenfunctions).  ``n >= M/2`` is the identity.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"shell cutoff must be a positive integer, got {n}")
    if n >= u.grid.modes_per_axis // 2:
        return u.copy()
    return SpectralVelocity(u.grid, np.where(u.grid.band_mask(n), u.coeffs, 0.0))


def gradient_coeffs(u: SpectralVelocity) -> np.ndarray:
    """Spectral coefficients of grad u, shape (dim, dim, *shape); [i, j] = d_j u_i."""
    k = u.grid.k_mesh()
    return 1j * k[None, :, ...] * u.coeffs[:, None, ...]


def gradient_values(u: SpectralVelocity, out_grid: TorusGrid | None = None) -> np.ndarray:
    """Collocation samples of grad u, optionally on a finer grid."""
    g = gradient_coeffs(u)
    if out_grid is None or out_grid is u.grid:
        return values_from_coeffs(g, u.grid)
    return values_from_coeffs(embed_coeffs(g, u.grid, out_grid), out_grid)


def sym_gradient(u: SpectralVelocity, out_grid: TorusGrid | None = None) -> np.ndarray:
    """D(u) = (grad u + grad u^t)/2 on the collocation grid, shape (d, d, *shape).

    Computed by spectral differentiation; trace-free to round-off for
    divergence-free input.
    """
    g = gradient_values(u, out_grid)
    return 0.5 * (g + np.swapaxes(g, 0, 1))


def dealiased_product(a_values: np.ndarray, b_values: np.ndarray,
                      grid: TorusGrid) -> np.ndarray:
    """Spectrum of the pointwise product of two collocation fields.

    The inputs live on ``grid``; the product is formed on the 3/2-padded
    grid and truncated back, which is exact for quadratic products of
    band-limited fields (2/3 rule).
    """
    a_values = np.asarray(a_values, dtype=float)
    b_values = np.asarray(b_values, dtype=float)
    if a_values.shape[-grid.dim:] != grid.shape or b_values.shape[-grid.dim:] != grid.shape:
        raise ValueError("operands do not live on the stated grid")
    fine = grid.padded()
    ca = embed_coeffs(zero_nyquist(coeffs_from_values(a_values, grid), grid), grid, fine)
    cb = embed_coeffs(zero_nyquist(coeffs_from_values(b_values, grid), grid), grid, fine)
    prod = values_from_coeffs(ca, fine) * values_from_coeffs(cb, fine)
    return restrict_coeffs(coeffs_from_values(prod, fine), fine, grid)


def lp_norm_pow(values: np.ndarray, p: float, grid: TorusGrid,
                magnitude_axes: tuple | None = None) -> float:
    """int |field|^p dx by collocation quadrature on the field's own grid.

    ``magnitude_axes`` are the component axes contracted into a pointwise
    Euclidean/Frobenius magnitude before raising to ``p``; the trailing
    ``grid.dim`` axes are the spatial ones.  ``grid`` supplies the cell
    volume (the values may live on a padded refinement of it).
    """
    values = np.asarray(values, dtype=float)
    if magnitude_axes:
        mag = np.sqrt(np.sum(values * values, axis=magnitude_axes))
    else:
        mag = np.abs(values)
    cell = (grid.box_length / mag.shape[-1]) ** grid.dim
    return float(cell * np.sum(mag**p))

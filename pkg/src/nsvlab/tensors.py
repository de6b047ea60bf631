"""Pointwise tensor algebra for the power-law stress and its monotonicity.

All operations accept a single ``(d, d)`` matrix or a stacked array of shape
``(..., d, d)`` and broadcast over the leading axes.  The tensor norm ``|T|``
is the Frobenius norm throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "StressParams",
    "frobenius_norm",
    "symmetry_defect",
    "power_law_stress",
    "monotonicity_gap",
    "check_lemma21",
    "objectivity_check",
]

#: symmetry / orthogonality rejection threshold, relative to the matrix scale
SYMMETRY_RTOL = 1e-10


@dataclass(frozen=True)
class StressParams:
    """Constitutive parameters of the power-law Kelvin-Voigt stress.

    ``beta``/``n_reg`` describe the optional auxiliary stress
    ``(1/n_reg) |D|^(beta-2) D`` used to regularize small power-law
    exponents; ``beta >= p`` always, and the dimension-dependent upper
    bound ``beta <= d`` is enforced where the spatial dimension is known.
    """

    nu: float
    p: float
    beta: float | None = None
    n_reg: float | None = None

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"viscosity nu must be positive, got {self.nu}")
        if not self.p > 1:
            raise ValueError(f"power-law exponent p must exceed 1, got {self.p}")
        if (self.beta is None) != (self.n_reg is None):
            raise ValueError("beta and n_reg must be given together")
        if self.beta is not None:
            if self.beta < self.p:
                raise ValueError(
                    f"regularization exponent beta={self.beta} must be >= p={self.p}"
                )
            if not self.n_reg >= 1:
                raise ValueError(f"n_reg must be >= 1, got {self.n_reg}")

    def validate_for_dim(self, dim: int) -> None:
        """Check the dimension-dependent admissible range of ``beta``."""
        if self.beta is None:
            return
        lo = max((3.0 * dim - 4.0) / dim, self.p)
        if not (lo - 1e-12 <= self.beta <= dim + 1e-12):
            raise ValueError(
                f"beta={self.beta} outside admissible range [{lo}, {dim}] for d={dim}"
            )


def frobenius_norm(t: np.ndarray) -> np.ndarray:
    """Frobenius norm over the trailing two axes."""
    t = np.asarray(t, dtype=float)
    return np.sqrt(np.sum(t * t, axis=(-2, -1)))


def symmetry_defect(t: np.ndarray) -> np.ndarray:
    """max |T - T^t| over the trailing two axes."""
    t = np.asarray(t, dtype=float)
    return np.max(np.abs(t - np.swapaxes(t, -2, -1)), axis=(-2, -1))


def _require_symmetric(t: np.ndarray, name: str) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.ndim < 2 or t.shape[-1] != t.shape[-2]:
        raise ValueError(f"{name} must have shape (..., d, d), got {t.shape}")
    scale = np.max(np.abs(t), initial=0.0)
    if np.max(symmetry_defect(t), initial=0.0) > SYMMETRY_RTOL * max(scale, 1.0):
        raise ValueError(f"{name} is not symmetric within tolerance")
    return t


def _require_p(p: float) -> float:
    p = float(p)
    if not p > 1:
        raise ValueError(f"power-law exponent must exceed 1, got p={p}")
    return p


def power_law_stress(d: np.ndarray, p: float) -> np.ndarray:
    """Evaluate ``|D|^(p-2) D`` with the continuous extension ``0`` at ``D=0``.

    For ``p < 2`` the prefactor is singular at the origin but the product
    tends to zero, so the map extends continuously; no epsilon-regularization
    is applied, which keeps the exact homogeneity
    ``A(lam*D) = lam^(p-1) A(D)``.
    """
    p = _require_p(p)
    d = _require_symmetric(d, "D")
    mag = frobenius_norm(d)
    with np.errstate(divide="ignore"):
        factor = np.where(mag > 0.0, mag, 1.0) ** (p - 2.0)
    factor = np.where(mag > 0.0, factor, 0.0)
    return factor[..., None, None] * d


def monotonicity_gap(e: np.ndarray, f: np.ndarray, p: float) -> np.ndarray:
    """Return ``(A(E) - A(F)) : (E - F)``, which is nonnegative for p > 1."""
    p = _require_p(p)
    diff = power_law_stress(e, p) - power_law_stress(f, p)
    return np.sum(diff * (np.asarray(e, dtype=float) - np.asarray(f, dtype=float)),
                  axis=(-2, -1))


def check_lemma21(e: np.ndarray, f: np.ndarray, p: float):
    """Evaluate the algebraic inequality pair behind the stress monotonicity.

    For ``p >= 2``:      (1/2^(p-1)) |E-F|^p       <= gap
    For ``p in (1,2)``:  (p-1) |E-F|^2             <= gap * (|E|^p + |F|^p)^((2-p)/p)

    Returns ``(lhs, rhs, holds)``.  The indeterminate ``0^0`` weight at
    ``E = F = 0`` in the small-p branch is resolved as "holds" (both sides
    vanish).  ``holds`` allows a 1e-12 relative slack for round-off.
    """
    p = _require_p(p)
    e = np.asarray(e, dtype=float)
    f = np.asarray(f, dtype=float)
    gap = monotonicity_gap(e, f, p)
    dn = frobenius_norm(e - f)
    if p >= 2:
        lhs = dn**p / 2 ** (p - 1.0)
        rhs = gap
        scale = frobenius_norm(e) ** p + frobenius_norm(f) ** p
    else:
        weight_base = frobenius_norm(e) ** p + frobenius_norm(f) ** p
        lhs = (p - 1.0) * dn**2
        with np.errstate(divide="ignore"):
            w = np.where(weight_base > 0.0, weight_base, 1.0) ** ((2.0 - p) / p)
        rhs = gap * np.where(weight_base > 0.0, w, 0.0)
        scale = weight_base
    holds = lhs <= rhs + 1e-12 * np.maximum(scale, 1e-300)
    return lhs, rhs, holds


def _fd_sym_gradient(sampler, x: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central-difference symmetric gradient of a callable field.

    ``sampler`` maps points of shape (n, d) to velocities of shape (n, d);
    returns D of shape (n, d, d).
    """
    x = np.asarray(x, dtype=float)
    n, dim = x.shape
    grad = np.empty((n, dim, dim))
    for j in range(dim):
        ej = np.zeros(dim)
        ej[j] = 1.0
        fp1 = np.asarray(sampler(x + h * ej))
        fm1 = np.asarray(sampler(x - h * ej))
        fp2 = np.asarray(sampler(x + 2 * h * ej))
        fm2 = np.asarray(sampler(x - 2 * h * ej))
        # grad[:, i, j] = d v_i / d x_j
        grad[:, :, j] = (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h)
    return 0.5 * (grad + np.swapaxes(grad, -2, -1))


def objectivity_check(v_sampler, q: np.ndarray, *, n_samples: int = 64,
                      h: float = 1e-3, seed: int = 0) -> float:
    """Measure how well D transforms as ``D(v*)(x) = Q D(v)(Q^t x) Q^t``.

    ``v_sampler`` is a smooth velocity field, called on point arrays of
    shape (n, d).  The rotated-frame field is ``v*(x) = Q v(Q^t x)``.  D is
    formed on both sides by central differences at ``n_samples`` points of
    the periodic box, and the max-norm discrepancy is returned; for the
    symmetric gradient (unlike its time derivative) this is zero up to
    differentiation error.
    """
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ValueError(f"Q must be a square matrix, got shape {q.shape}")
    dim = q.shape[0]
    defect = np.max(np.abs(q @ q.T - np.eye(dim)))
    if defect > SYMMETRY_RTOL:
        raise ValueError(f"Q is not orthogonal within tolerance (|QQ^t - I| = {defect:.3e})")

    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 2.0 * np.pi, size=(n_samples, dim))

    def rotated(points):
        return np.asarray(v_sampler(points @ q)) @ q.T

    d_star = _fd_sym_gradient(rotated, x, h)
    d_ref = _fd_sym_gradient(v_sampler, x @ q, h)
    d_expected = np.einsum("ab,nbc,dc->nad", q, d_ref, q)
    return float(np.max(np.abs(d_star - d_expected)))

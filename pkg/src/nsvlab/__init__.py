"""Spectral Galerkin solver and verification lab for power-law Navier-Stokes-Voigt flow.

The model is the incompressible Navier-Stokes-Voigt system with a power-law
(Ostwald-de Waele) viscous stress,

    d/dt (v - kappa*Lap v) + div(v x v) + grad pi - nu*div(|D(v)|^(p-2) D(v)) = f,
    div v = 0,

solved on a periodic box with a divergence-free Fourier basis (plus a 1-D
Dirichlet sine-basis variant).  The package couples the solver to a battery
of verification diagnostics: monotone-operator inequalities, discrete energy
identities, a-priori estimate constants, pressure recovery/decomposition and
Gronwall-type stability measurements.
"""

__version__ = "0.1.0"

from .tensors import (
    StressParams,
    power_law_stress,
    monotonicity_gap,
    check_lemma21,
    objectivity_check,
)
from .spectral import (
    TorusGrid,
    SpectralVelocity,
    leray_project,
    truncate,
    sym_gradient,
    dealiased_product,
)
from .solver import (
    PdeParams,
    SimConfig,
    Trajectory,
    FixedPointDiverged,
    project_initial,
    tendency,
    step,
    integrate,
    solve_regularized,
)
from .diagnostics import (
    EnergyLedger,
    energy_identity_residual,
    apriori_report,
    lebesgue_time_norm,
    convective_norm_report,
)
from .pressure import (
    PressureParts,
    recover_pressure,
    decompose_pressure,
    verify_pressure_bounds,
)

__all__ = [
    "StressParams",
    "power_law_stress",
    "monotonicity_gap",
    "check_lemma21",
    "objectivity_check",
    "TorusGrid",
    "SpectralVelocity",
    "leray_project",
    "truncate",
    "sym_gradient",
    "dealiased_product",
    "PdeParams",
    "SimConfig",
    "Trajectory",
    "FixedPointDiverged",
    "project_initial",
    "tendency",
    "step",
    "integrate",
    "solve_regularized",
    "EnergyLedger",
    "energy_identity_residual",
    "apriori_report",
    "lebesgue_time_norm",
    "convective_norm_report",
    "PressureParts",
    "recover_pressure",
    "decompose_pressure",
    "verify_pressure_bounds",
]

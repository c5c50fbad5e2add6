"""Numerical toolkit for the dual-charge (symmetric) representation of electrodynamics."""

from .dualcore import (
    ChargePair,
    DualAngle,
    FieldVecPair,
    PotentialPair,
    UnitSystem,
    asymmetrizing_angle,
    charge_norm,
    field_quadratic_form,
    inverse_rotate_fields,
    potential_quadratic_form,
    rotate_charge_components,
    rotate_charges,
    rotate_fields,
    rotate_potentials,
    subsidiary_residual,
)
from .fields import (
    Grid3,
    PointSource,
    ScalarField,
    VectorField,
    deposit_sources,
    fields_from_potentials,
    helmholtz_decompose,
)
from .maxwell import (
    EMState,
    cfl_limit,
    dual_covariance_residual,
    field_energy,
    gauss_residuals,
    rotate_em_state,
    step_symmetric_maxwell,
    zero_state,
)
from .dynamics import (
    GridFieldSampler,
    MonopoleSampler,
    ParticleState,
    PointChargeSampler,
    Trajectory,
    UniformFieldSampler,
    classical_lorentz_force,
    push_particle,
    quantum_lorentz_force,
)
from .modes import (
    ChargeFourier,
    ModeAmplitudeSet,
    ModeSet,
    charge_fourier,
    coulomb_energy_real,
    coulomb_mode_set,
    free_evolve_modes,
    gupta_bleuler_residual,
    noether_dual_charge,
    noether_dual_current,
    spin_observable,
    symmetric_charge_energy,
    synthesize_potentials,
    two_field_energy,
)

__all__ = [
    "ChargeFourier",
    "ChargePair",
    "DualAngle",
    "EMState",
    "FieldVecPair",
    "Grid3",
    "GridFieldSampler",
    "ModeAmplitudeSet",
    "ModeSet",
    "MonopoleSampler",
    "ParticleState",
    "PointChargeSampler",
    "PointSource",
    "PotentialPair",
    "ScalarField",
    "Trajectory",
    "UniformFieldSampler",
    "UnitSystem",
    "VectorField",
    "asymmetrizing_angle",
    "cfl_limit",
    "charge_fourier",
    "charge_norm",
    "classical_lorentz_force",
    "coulomb_energy_real",
    "coulomb_mode_set",
    "deposit_sources",
    "dual_covariance_residual",
    "field_energy",
    "field_quadratic_form",
    "fields_from_potentials",
    "free_evolve_modes",
    "gauss_residuals",
    "gupta_bleuler_residual",
    "helmholtz_decompose",
    "inverse_rotate_fields",
    "noether_dual_charge",
    "noether_dual_current",
    "potential_quadratic_form",
    "push_particle",
    "quantum_lorentz_force",
    "rotate_charge_components",
    "rotate_charges",
    "rotate_em_state",
    "rotate_fields",
    "rotate_potentials",
    "spin_observable",
    "step_symmetric_maxwell",
    "subsidiary_residual",
    "symmetric_charge_energy",
    "synthesize_potentials",
    "two_field_energy",
    "zero_state",
]

__version__ = "0.1.0"

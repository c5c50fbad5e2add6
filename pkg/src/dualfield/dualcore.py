"""Dual-rotation algebra for the two-charge representation of electrodynamics.

The representation is parameterized by an angle ``theta`` that mixes electric
and magnetic quantities.  Two directions of the rotation appear naturally and
both are exposed; each function documents the exact map it applies.

* ``rotate_fields`` mixes field vectors toward the two-charge side::

      E' = E cos(t) - c B sin(t)
      B' = B cos(t) + (E / c) sin(t)

* ``inverse_rotate_fields`` is its inverse (``rotate_fields`` at ``-t``)::

      E = E' cos(t) + c B' sin(t)
      B = B' cos(t) - (E' / c) sin(t)

* ``rotate_charges`` turns a two-charge pair back toward a purely electric
  description (the opposite direction to ``rotate_fields``)::

      qe' = qe cos(t) + c eps0 qm sin(t)
      qm' = qm cos(t) - qe sin(t) / (c eps0)

  At ``t = asymmetrizing_angle`` the magnetic component vanishes and the
  electric one equals ``charge_norm``.

* ``rotate_potentials`` follows the same direction as ``rotate_charges``::

      A' = A cos(t) + (C / c) sin(t)
      C' = C cos(t) - c A sin(t)

The pairing that leaves dynamics form-invariant is ``inverse_rotate_fields``
on (E, B) together with ``rotate_charges`` on charge pairs and
``rotate_potentials`` on potential pairs, all at the same angle.

Charge densities and currents transform componentwise with the same
coefficients as charges; use ``rotate_charge_components`` for arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteInputError, ZeroChargeNormError

TWO_PI = 2.0 * math.pi


def _require_finite(name: str, value: np.ndarray | float) -> None:
    if not np.all(np.isfinite(value)):
        raise NonFiniteInputError(f"non-finite values in component {name!r}")


@dataclass(frozen=True)
class UnitSystem:
    """Unit system fixed by the vacuum light speed and permittivity.

    The permeability is derived, so ``mu0 * eps0 * c**2 == 1`` holds exactly.
    """

    c: float = 1.0
    eps0: float = 1.0

    def __post_init__(self) -> None:
        for name in ("c", "eps0"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
            object.__setattr__(self, name, float(value))

    @property
    def mu0(self) -> float:
        return 1.0 / (self.eps0 * self.c * self.c)

    @classmethod
    def natural(cls) -> "UnitSystem":
        return cls(1.0, 1.0)

    @classmethod
    def si(cls) -> "UnitSystem":
        return cls(c=299792458.0, eps0=8.8541878128e-12)


@dataclass(frozen=True)
class DualAngle:
    """Rotation angle, stored reduced to [0, 2*pi)."""

    theta: float

    def __post_init__(self) -> None:
        value = float(self.theta)
        if not math.isfinite(value):
            raise ValueError(f"theta must be finite, got {value!r}")
        object.__setattr__(self, "theta", value % TWO_PI)


def _angle(theta: DualAngle | float) -> float:
    if isinstance(theta, DualAngle):
        return theta.theta
    value = float(theta)
    if not math.isfinite(value):
        raise ValueError(f"theta must be finite, got {value!r}")
    return value % TWO_PI


@dataclass(frozen=True)
class ChargePair:
    """Electric and magnetic charge of one carrier in the two-charge picture."""

    qe: float = 0.0
    qm: float = 0.0

    def __post_init__(self) -> None:
        for name in ("qe", "qm"):
            value = float(getattr(self, name))
            _require_finite(name, value)
            object.__setattr__(self, name, value)


@dataclass
class FieldVecPair:
    """Electric and magnetic field arrays of identical shape.

    Works for single samples of shape (3,) and for grids of shape
    (3, nx, ny, nz) alike; the rotation maps are componentwise.
    """

    E: np.ndarray
    B: np.ndarray

    def __post_init__(self) -> None:
        self.E = np.asarray(self.E, dtype=float)
        self.B = np.asarray(self.B, dtype=float)
        if self.E.shape != self.B.shape:
            raise ValueError(f"E and B shapes differ: {self.E.shape} vs {self.B.shape}")


@dataclass
class PotentialPair:
    """Four-potential pair (A for the electric side, C for the magnetic side).

    Both arrays carry the contravariant components along the first axis, so
    the shape is (4,) for a single sample or (4, nx, ny, nz) on a grid.
    """

    A: np.ndarray
    C: np.ndarray

    def __post_init__(self) -> None:
        self.A = np.asarray(self.A, dtype=float)
        self.C = np.asarray(self.C, dtype=float)
        if self.A.shape != self.C.shape:
            raise ValueError(f"A and C shapes differ: {self.A.shape} vs {self.C.shape}")
        if self.A.shape[0] != 4:
            raise ValueError(f"four-potentials need a leading axis of length 4, got {self.A.shape}")


def rotate_fields(fields: FieldVecPair, theta: DualAngle | float, units: UnitSystem) -> FieldVecPair:
    """Rotate (E, B) by theta: E' = E cos - cB sin, B' = B cos + (E/c) sin."""
    t = _angle(theta)
    _require_finite("E", fields.E)
    _require_finite("B", fields.B)
    ct, st = math.cos(t), math.sin(t)
    c = units.c
    return FieldVecPair(
        E=fields.E * ct - c * fields.B * st,
        B=fields.B * ct + fields.E * (st / c),
    )


def inverse_rotate_fields(fields: FieldVecPair, theta: DualAngle | float, units: UnitSystem) -> FieldVecPair:
    """Inverse of ``rotate_fields``: E = E' cos + cB' sin, B = B' cos - (E'/c) sin."""
    t = _angle(theta)
    _require_finite("E", fields.E)
    _require_finite("B", fields.B)
    ct, st = math.cos(t), math.sin(t)
    c = units.c
    return FieldVecPair(
        E=fields.E * ct + c * fields.B * st,
        B=fields.B * ct - fields.E * (st / c),
    )


def rotate_charge_components(qe, qm, theta: DualAngle | float, units: UnitSystem):
    """Apply the charge rotation to scalars or arrays componentwise.

    qe' = qe cos + c eps0 qm sin;  qm' = qm cos - qe sin / (c eps0).
    Densities and currents transform with the same coefficients.
    """
    t = _angle(theta)
    ct, st = math.cos(t), math.sin(t)
    ce = units.c * units.eps0
    return qe * ct + ce * qm * st, qm * ct - qe * (st / ce)


def rotate_charges(charges: ChargePair, theta: DualAngle | float, units: UnitSystem) -> ChargePair:
    """Rotate a charge pair (see ``rotate_charge_components`` for the map)."""
    qe, qm = rotate_charge_components(charges.qe, charges.qm, theta, units)
    return ChargePair(qe=qe, qm=qm)


def rotate_potentials(potentials: PotentialPair, theta: DualAngle | float, units: UnitSystem) -> PotentialPair:
    """Rotate a potential pair: A' = A cos + (C/c) sin, C' = C cos - cA sin."""
    t = _angle(theta)
    _require_finite("A", potentials.A)
    _require_finite("C", potentials.C)
    ct, st = math.cos(t), math.sin(t)
    c = units.c
    return PotentialPair(
        A=potentials.A * ct + potentials.C * (st / c),
        C=potentials.C * ct - c * potentials.A * st,
    )


def charge_norm(charges: ChargePair, units: UnitSystem) -> float:
    """Rotation-invariant charge magnitude sqrt(qe^2 + (c eps0 qm)^2)."""
    return math.hypot(charges.qe, units.c * units.eps0 * charges.qm)


def asymmetrizing_angle(charges: ChargePair, units: UnitSystem) -> DualAngle:
    """Angle whose charge rotation maps the pair to (charge_norm, 0).

    Undefined for a zero pair; that case raises ``ZeroChargeNormError``.
    """
    if charge_norm(charges, units) == 0.0:
        raise ZeroChargeNormError("asymmetrizing angle is undefined for a zero charge pair")
    return DualAngle(math.atan2(units.c * units.eps0 * charges.qm, charges.qe))


def subsidiary_residual(potentials: PotentialPair, theta: DualAngle | float, units: UnitSystem) -> float:
    """Scale-free violation of the one-field constraint C cos(t) = c A sin(t).

    Returns max|C cos - cA sin| normalized by max(max|C|, max|cA|); zero
    potentials give zero residual.
    """
    t = _angle(theta)
    _require_finite("A", potentials.A)
    _require_finite("C", potentials.C)
    cA = units.c * potentials.A
    scale = max(np.max(np.abs(potentials.C)), np.max(np.abs(cA)), 0.0)
    if scale == 0.0:
        return 0.0
    residual = np.max(np.abs(potentials.C * math.cos(t) - cA * math.sin(t)))
    return float(residual / scale)


def field_quadratic_form(fields: FieldVecPair, units: UnitSystem) -> float:
    """Rotation-invariant energy-like form eps0 |E|^2 + |B|^2 / mu0, summed."""
    return float(units.eps0 * np.sum(fields.E**2) + np.sum(fields.B**2) / units.mu0)


def potential_quadratic_form(potentials: PotentialPair, units: UnitSystem) -> float:
    """Rotation-invariant form eps0 (c^2 A_mu A^mu + C_mu C^mu), summed.

    The Lorentz square X_mu X^mu = X0^2 - |Xvec|^2 uses the (+,-,-,-) metric.
    """

    def lorentz_square(four: np.ndarray) -> float:
        return float(np.sum(four[0] ** 2) - np.sum(four[1:] ** 2))

    c2 = units.c * units.c
    return units.eps0 * (c2 * lorentz_square(potentials.A) + lorentz_square(potentials.C))

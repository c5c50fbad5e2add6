"""Test-particle motion under the classical and quantum two-charge forces.

The classical force on a carrier with charge pair (qe, qm) is

    F = qe (E + v x B) + c eps0 qm (c B - v x E / c)

with the full fields throughout.  The quantum force keeps the full fields in
the direct terms but couples the velocity-cross terms to the transverse
field parts only:

    F = qe (E + v x B_T) + c eps0 qm (c B - v x E_T / c)

Samplers provide both the full and the transverse field sample at a point;
analytic samplers declare the split exactly, grid samplers compute it
spectrally once.  The pusher is nonrelativistic, so particle speeds are
guarded at a tenth of c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dualcore import ChargePair, FieldVecPair, UnitSystem
from .errors import DecompositionMismatchError, DegeneratePlaneError
from .fields import Grid3, helmholtz_decompose, point_electric_field, point_magnetic_field, \
    tricubic_sample_vector, VectorField

SPEED_GUARD_FRACTION = 0.1


@dataclass
class ParticleState:
    """Position, velocity, charge pair and mass of one test particle."""

    position: np.ndarray
    velocity: np.ndarray
    charges: ChargePair
    mass: float

    def __post_init__(self) -> None:
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.velocity = np.asarray(self.velocity, dtype=float).reshape(3)
        self.mass = float(self.mass)
        if not (math.isfinite(self.mass) and self.mass > 0):
            raise ValueError(f"mass must be positive, got {self.mass}")

    @property
    def momentum(self) -> np.ndarray:
        return self.mass * self.velocity


def classical_lorentz_force(
    particle: ParticleState, fields: FieldVecPair, units: UnitSystem
) -> np.ndarray:
    """Classical force; full fields enter every term."""
    E, B = fields.E, fields.B
    v = particle.velocity
    c, eps0 = units.c, units.eps0
    qe, qm = particle.charges.qe, particle.charges.qm
    return qe * (E + np.cross(v, B)) + c * eps0 * qm * (c * B - np.cross(v, E) / c)


def quantum_lorentz_force(
    particle: ParticleState,
    full: FieldVecPair,
    transverse: FieldVecPair,
    units: UnitSystem,
) -> np.ndarray:
    """Quantum force; velocity-cross terms see transverse fields only.

    Whether ``transverse`` really is the transverse part of ``full`` is a
    nonlocal statement, so point samples are taken on trust here; grid-level
    inputs are validated in ``GridFieldSampler``.
    """
    v = particle.velocity
    c, eps0 = units.c, units.eps0
    qe, qm = particle.charges.qe, particle.charges.qm
    return qe * (full.E + np.cross(v, transverse.B)) + c * eps0 * qm * (
        c * full.B - np.cross(v, transverse.E) / c
    )


def canonical_momentum(
    particle: ParticleState,
    A_perp: np.ndarray,
    C_perp: np.ndarray,
    units: UnitSystem,
) -> np.ndarray:
    """Canonical momentum p + qe A_T + eps0 qm C_T of the two-charge theory."""
    return (
        particle.momentum
        + particle.charges.qe * np.asarray(A_perp, dtype=float)
        + units.eps0 * particle.charges.qm * np.asarray(C_perp, dtype=float)
    )


class UniformFieldSampler:
    """Spatially uniform fields, declared either fully transverse or not.

    A uniform field is a k = 0 mode, which the grid decomposition assigns to
    the longitudinal part; physical setups that realize a locally uniform
    transverse wave are modeled by declaring ``transverse=True``.
    """

    def __init__(self, E: np.ndarray, B: np.ndarray, *, transverse: bool = True) -> None:
        self._full = FieldVecPair(np.asarray(E, float).copy(), np.asarray(B, float).copy())
        if transverse:
            self._trans = FieldVecPair(self._full.E.copy(), self._full.B.copy())
        else:
            self._trans = FieldVecPair(np.zeros(3), np.zeros(3))

    def sample(self, x: np.ndarray, t: float) -> tuple[FieldVecPair, FieldVecPair]:
        return self._full, self._trans

    def in_domain(self, x: np.ndarray) -> bool:
        return True


class MonopoleSampler:
    """Static point magnetic charge: a radial B field.

    The radial field is a pure gradient, hence exactly longitudinal; the
    declared transverse parts vanish identically.  The singular point is
    excluded from the domain by ``r_min``.
    """

    def __init__(self, qm: float, center: np.ndarray, units: UnitSystem, r_min: float = 1e-6):
        self.qm = float(qm)
        self.center = np.asarray(center, dtype=float).reshape(3)
        self.units = units
        self.r_min = float(r_min)

    def sample(self, x: np.ndarray, t: float) -> tuple[FieldVecPair, FieldVecPair]:
        B = point_magnetic_field(self.qm, x - self.center, self.units)
        full = FieldVecPair(np.zeros(3), B)
        trans = FieldVecPair(np.zeros(3), np.zeros(3))
        return full, trans

    def in_domain(self, x: np.ndarray) -> bool:
        return float(np.linalg.norm(np.asarray(x, float) - self.center)) > self.r_min


class PointChargeSampler:
    """Static point electric charge: a radial E field, exactly longitudinal."""

    def __init__(self, qe: float, center: np.ndarray, units: UnitSystem, r_min: float = 1e-6):
        self.qe = float(qe)
        self.center = np.asarray(center, dtype=float).reshape(3)
        self.units = units
        self.r_min = float(r_min)

    def sample(self, x: np.ndarray, t: float) -> tuple[FieldVecPair, FieldVecPair]:
        E = point_electric_field(self.qe, x - self.center, self.units)
        full = FieldVecPair(E, np.zeros(3))
        trans = FieldVecPair(np.zeros(3), np.zeros(3))
        return full, trans

    def in_domain(self, x: np.ndarray) -> bool:
        return float(np.linalg.norm(np.asarray(x, float) - self.center)) > self.r_min


class GridFieldSampler:
    """Static gridded fields with a spectrally computed transverse split.

    If explicit transverse parts are supplied they are checked against the
    spectral decomposition of the full fields; a relative defect above
    ``1e-8`` raises ``DecompositionMismatchError``.  Interpolation is
    periodic tricubic.
    """

    def __init__(
        self,
        grid: Grid3,
        fields: FieldVecPair,
        units: UnitSystem,
        transverse: FieldVecPair | None = None,
    ) -> None:
        self.grid = grid
        self.units = units
        self._E = np.asarray(fields.E, dtype=float)
        self._B = np.asarray(fields.B, dtype=float)
        E_T, _ = helmholtz_decompose(VectorField(grid, self._E))
        B_T, _ = helmholtz_decompose(VectorField(grid, self._B))
        if transverse is not None:
            for name, given, computed in (
                ("E", np.asarray(transverse.E, float), E_T.data),
                ("B", np.asarray(transverse.B, float), B_T.data),
            ):
                scale = math.sqrt(float(np.sum(computed**2)))
                defect = math.sqrt(float(np.sum((given - computed) ** 2)))
                if defect > 1e-8 * max(scale, 1.0):
                    raise DecompositionMismatchError(
                        f"claimed transverse {name} differs from the spectral decomposition"
                    )
        self._E_T = E_T.data
        self._B_T = B_T.data

    def sample(self, x: np.ndarray, t: float) -> tuple[FieldVecPair, FieldVecPair]:
        full = FieldVecPair(
            tricubic_sample_vector(self._E, self.grid, x),
            tricubic_sample_vector(self._B, self.grid, x),
        )
        trans = FieldVecPair(
            tricubic_sample_vector(self._E_T, self.grid, x),
            tricubic_sample_vector(self._B_T, self.grid, x),
        )
        return full, trans

    def in_domain(self, x: np.ndarray) -> bool:
        return True


@dataclass
class Trajectory:
    """Recorded particle path: times, states and node forces.

    ``termination`` is None for a completed run, otherwise a short reason
    string; the arrays then cover the steps actually taken.
    """

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    force: np.ndarray
    charges: ChargePair
    mass: float
    termination: str | None = None

    def __len__(self) -> int:
        return len(self.t)

    def state_at(self, i: int) -> ParticleState:
        return ParticleState(self.x[i], self.v[i], self.charges, self.mass)

    def to_csv(self, path, plane_normal: np.ndarray | None = None) -> None:
        """Write t,x,y,z,vx,vy,vz,Fx,Fy,Fz,out_of_plane_displacement rows."""
        if plane_normal is None:
            out_of_plane = np.zeros(len(self.t))
        else:
            out_of_plane, _ = out_of_plane_component(self, plane_normal)
        with open(path, "w") as fh:
            fh.write("t,x,y,z,vx,vy,vz,Fx,Fy,Fz,out_of_plane_displacement\n")
            for i in range(len(self.t)):
                row = [self.t[i], *self.x[i], *self.v[i], *self.force[i], out_of_plane[i]]
                fh.write(",".join(repr(float(value)) for value in row) + "\n")


_FORCE_MODELS = ("classical", "quantum")


def push_particle(
    particle: ParticleState,
    sampler,
    model: str,
    dt: float,
    steps: int,
    units: UnitSystem,
) -> Trajectory:
    """Integrate the particle with RK4 under the chosen force model.

    Truncates (with a recorded reason) if the particle leaves the sampler
    domain or exceeds the nonrelativistic speed guard of 0.1 c.
    """
    if model not in _FORCE_MODELS:
        raise ValueError(f"unknown force model {model!r}; expected one of {_FORCE_MODELS}")
    if not (math.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be positive, got {dt}")

    def force(x: np.ndarray, v: np.ndarray, t: float) -> np.ndarray:
        probe = ParticleState(x, v, particle.charges, particle.mass)
        full, trans = sampler.sample(x, t)
        if model == "classical":
            return classical_lorentz_force(probe, full, units)
        return quantum_lorentz_force(probe, full, trans, units)

    m = particle.mass
    guard = SPEED_GUARD_FRACTION * units.c
    times = [0.0]
    xs = [particle.position.copy()]
    vs = [particle.velocity.copy()]
    forces = [force(particle.position, particle.velocity, 0.0)]
    termination = None

    x = particle.position.copy()
    p = m * particle.velocity
    t = 0.0
    for _ in range(steps):
        k1x, k1p = p / m, force(x, p / m, t)
        k2x = (p + 0.5 * dt * k1p) / m
        k2p = force(x + 0.5 * dt * k1x, k2x, t + 0.5 * dt)
        k3x = (p + 0.5 * dt * k2p) / m
        k3p = force(x + 0.5 * dt * k2x, k3x, t + 0.5 * dt)
        k4x = (p + dt * k3p) / m
        k4p = force(x + dt * k3x, k4x, t + dt)
        x = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        p = p + (dt / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        t += dt
        if not sampler.in_domain(x):
            termination = "left sampler domain"
            break
        v = p / m
        if float(np.linalg.norm(v)) > guard:
            termination = "exceeded nonrelativistic speed guard"
            break
        times.append(t)
        xs.append(x.copy())
        vs.append(v.copy())
        forces.append(force(x, v, t))

    return Trajectory(
        t=np.asarray(times),
        x=np.asarray(xs),
        v=np.asarray(vs),
        force=np.asarray(forces),
        charges=particle.charges,
        mass=m,
        termination=termination,
    )


def plane_normal(r: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Unit normal of the plane spanned by r and v; error if degenerate."""
    r = np.asarray(r, dtype=float).reshape(3)
    v = np.asarray(v, dtype=float).reshape(3)
    n = np.cross(r, v)
    scale = float(np.linalg.norm(r) * np.linalg.norm(v))
    norm = float(np.linalg.norm(n))
    if scale == 0.0 or norm <= 1e-12 * scale:
        raise DegeneratePlaneError("r and v do not span a plane")
    return n / norm


def out_of_plane_component(
    trajectory: Trajectory, normal: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Displacement (from the initial point) and force along the plane normal."""
    n = np.asarray(normal, dtype=float).reshape(3)
    length = float(np.linalg.norm(n))
    if length == 0.0:
        raise DegeneratePlaneError("plane normal must be nonzero")
    n = n / length
    displacement = (trajectory.x - trajectory.x[0]) @ n
    force = trajectory.force @ n
    return displacement, force


def in_plane_span(trajectory: Trajectory, normal: np.ndarray) -> float:
    """Largest in-plane displacement from the initial point along the path."""
    n = np.asarray(normal, dtype=float).reshape(3)
    n = n / float(np.linalg.norm(n))
    rel = trajectory.x - trajectory.x[0]
    in_plane = rel - np.outer(rel @ n, n)
    return float(np.max(np.linalg.norm(in_plane, axis=1)))

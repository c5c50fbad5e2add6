"""Periodic grids, smeared sources, spectral calculus and field construction.

All grid fields live on a uniform periodic box sampled at cell corners
``x_i = i * h``.  Derivatives are spectral (FFT), so smooth periodic data is
differentiated to near machine precision.

Sources are Gaussian-smeared point carriers.  Deposition synthesizes the
periodic image sum of the Gaussian directly from its analytic spectrum,
which makes the integrated charge exact and keeps deposition, spectral
solves and spectral source injection mutually consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .dualcore import ChargePair, FieldVecPair, PotentialPair, UnitSystem
from .errors import (
    GridMismatchError,
    SharedRatioError,
    SingularFieldPointError,
    SmearingError,
    SourcePlacementError,
)

_MAGIC = b"DFLD0001"


@dataclass(frozen=True)
class Grid3:
    """Uniform periodic grid: n cells per axis spanning a box of size L."""

    n: tuple[int, int, int]
    L: tuple[float, float, float]

    def __post_init__(self) -> None:
        if len(self.n) != 3 or len(self.L) != 3:
            raise ValueError("Grid3 needs three cell counts and three box lengths")
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        object.__setattr__(self, "L", tuple(float(v) for v in self.L))
        for v in self.n:
            if v < 4 or v % 2 != 0:
                raise ValueError(f"cell counts must be even and >= 4, got {self.n}")
        for v in self.L:
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"box lengths must be positive, got {self.L}")

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.n

    @property
    def spacing(self) -> tuple[float, float, float]:
        return tuple(L / n for L, n in zip(self.L, self.n))

    @property
    def cell_volume(self) -> float:
        hx, hy, hz = self.spacing
        return hx * hy * hz

    @property
    def volume(self) -> float:
        return self.L[0] * self.L[1] * self.L[2]

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(h * np.arange(n) for h, n in zip(self.spacing, self.n))

    def kaxes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(
            2.0 * math.pi * np.fft.fftfreq(n, d=h) for n, h in zip(self.n, self.spacing)
        )


@lru_cache(maxsize=16)
def _kgrid(grid: Grid3) -> np.ndarray:
    kx, ky, kz = grid.kaxes()
    out = np.empty((3,) + grid.shape)
    out[0] = kx[:, None, None]
    out[1] = ky[None, :, None]
    out[2] = kz[None, None, :]
    return out


@lru_cache(maxsize=16)
def _ksquared(grid: Grid3) -> np.ndarray:
    k = _kgrid(grid)
    return k[0] ** 2 + k[1] ** 2 + k[2] ** 2


@dataclass
class ScalarField:
    grid: Grid3
    data: np.ndarray

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=float)
        if self.data.shape != self.grid.shape:
            raise GridMismatchError(
                f"scalar data shape {self.data.shape} does not match grid {self.grid.shape}"
            )

    def integral(self) -> float:
        return float(np.sum(self.data) * self.grid.cell_volume)

    def l2norm(self) -> float:
        return float(math.sqrt(np.sum(self.data**2) * self.grid.cell_volume))


@dataclass
class VectorField:
    grid: Grid3
    data: np.ndarray

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=float)
        if self.data.shape != (3,) + self.grid.shape:
            raise GridMismatchError(
                f"vector data shape {self.data.shape} does not match grid {self.grid.shape}"
            )

    def integral(self) -> np.ndarray:
        return np.sum(self.data, axis=(1, 2, 3)) * self.grid.cell_volume

    def l2norm(self) -> float:
        return float(math.sqrt(np.sum(self.data**2) * self.grid.cell_volume))


@dataclass(eq=False)
class PointSource:
    """Gaussian-smeared carrier with a two-charge pair and a drift velocity."""

    position: np.ndarray
    velocity: np.ndarray
    charges: ChargePair
    sigma: float

    def __post_init__(self) -> None:
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.velocity = np.asarray(self.velocity, dtype=float).reshape(3)
        self.sigma = float(self.sigma)
        if not np.all(np.isfinite(self.position)) or not np.all(np.isfinite(self.velocity)):
            raise ValueError("source position and velocity must be finite")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def at_time(self, dt: float, box: tuple[float, float, float] | None = None) -> "PointSource":
        """Source moved ballistically by dt, optionally wrapped into the box."""
        pos = self.position + dt * self.velocity
        if box is not None:
            pos = np.mod(pos, np.asarray(box))
        return replace(self, position=pos)


def _validate_source_geometry(source: PointSource, grid: Grid3) -> None:
    for axis in range(3):
        if not (0.0 <= source.position[axis] < grid.L[axis]):
            raise SourcePlacementError(
                f"source position {source.position} lies outside the box {grid.L} on axis {axis}"
            )
    h_max = max(grid.spacing)
    if source.sigma < 2.0 * h_max:
        raise SmearingError(
            f"sigma={source.sigma} under-resolves the grid (needs >= {2.0 * h_max})"
        )
    if source.sigma > min(grid.L) / 8.0:
        raise SmearingError(
            f"sigma={source.sigma} is too wide for the box (needs <= {min(grid.L) / 8.0})"
        )


def source_spectra(
    sources: list[PointSource], grid: Grid3, *, validate: bool = True
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Analytic spectra (rho_e, rho_m, j_e, j_m) of the smeared sources.

    Entries are Fourier-series coefficients divided by the cell volume, i.e.
    ``np.fft.ifftn`` of a returned array gives the real-space samples.
    """
    shape = grid.shape
    rho_e = np.zeros(shape, dtype=complex)
    rho_m = np.zeros(shape, dtype=complex)
    j_e = np.zeros((3,) + shape, dtype=complex)
    j_m = np.zeros((3,) + shape, dtype=complex)
    kx, ky, kz = grid.kaxes()
    scale = 1.0 / grid.cell_volume
    for s in sources:
        if validate:
            _validate_source_geometry(s, grid)
        half = 0.5 * s.sigma**2
        fx = np.exp(-1j * kx * s.position[0] - half * kx**2)
        fy = np.exp(-1j * ky * s.position[1] - half * ky**2)
        fz = np.exp(-1j * kz * s.position[2] - half * kz**2)
        profile = scale * fx[:, None, None] * fy[None, :, None] * fz[None, None, :]
        rho_e += s.charges.qe * profile
        rho_m += s.charges.qm * profile
        for axis in range(3):
            j_e[axis] += s.charges.qe * s.velocity[axis] * profile
            j_m[axis] += s.charges.qm * s.velocity[axis] * profile
    return rho_e, rho_m, j_e, j_m


def check_shared_ratio(sources: list["PointSource"], rtol: float = 1e-12) -> None:
    """Raise ``SharedRatioError`` unless all charge pairs are parallel.

    Zero charge pairs are compatible with any ratio.
    """
    for i in range(len(sources)):
        for j in range(i + 1, len(sources)):
            a, b = sources[i].charges, sources[j].charges
            cross = a.qe * b.qm - b.qe * a.qm
            scale = abs(a.qe * b.qm) + abs(b.qe * a.qm)
            if scale > 0.0 and abs(cross) > rtol * scale:
                raise SharedRatioError(f"sources {i} and {j} have different qm/qe ratios")


def current_spectra(
    sources: list[PointSource], grid: Grid3
) -> tuple[np.ndarray, np.ndarray] | None:
    """Spectra (j_e, j_m) of the moving sources only, or None if none move.

    Same conventions as ``source_spectra``; geometry is not re-validated, so
    positions may sit outside the box (the spectra are periodic in them).
    """
    movers = [s for s in sources if np.any(s.velocity != 0.0)]
    if not movers:
        return None
    shape = grid.shape
    j_e = np.zeros((3,) + shape, dtype=complex)
    j_m = np.zeros((3,) + shape, dtype=complex)
    kx, ky, kz = grid.kaxes()
    scale = 1.0 / grid.cell_volume
    for s in movers:
        half = 0.5 * s.sigma**2
        fx = np.exp(-1j * kx * s.position[0] - half * kx**2)
        fy = np.exp(-1j * ky * s.position[1] - half * ky**2)
        fz = np.exp(-1j * kz * s.position[2] - half * kz**2)
        profile = scale * fx[:, None, None] * fy[None, :, None] * fz[None, None, :]
        for axis in range(3):
            j_e[axis] += s.charges.qe * s.velocity[axis] * profile
            j_m[axis] += s.charges.qm * s.velocity[axis] * profile
    return j_e, j_m


def deposit_sources(
    sources: list[PointSource], grid: Grid3
) -> tuple[ScalarField, ScalarField, VectorField, VectorField]:
    """Deposit periodic Gaussian charge and current densities on the grid.

    The deposit is the periodic image sum of each Gaussian, synthesized from
    its analytic spectrum, so the integrated charge equals the source charge
    exactly and the current is charge times velocity per source.
    """
    rho_e_hat, rho_m_hat, j_e_hat, j_m_hat = source_spectra(sources, grid)
    rho_e = np.fft.ifftn(rho_e_hat).real
    rho_m = np.fft.ifftn(rho_m_hat).real
    j_e = np.stack([np.fft.ifftn(j_e_hat[a]).real for a in range(3)])
    j_m = np.stack([np.fft.ifftn(j_m_hat[a]).real for a in range(3)])
    return (
        ScalarField(grid, rho_e),
        ScalarField(grid, rho_m),
        VectorField(grid, j_e),
        VectorField(grid, j_m),
    )


def spectral_gradient(data: np.ndarray, grid: Grid3) -> np.ndarray:
    """Gradient of a real scalar grid array, shape (3, nx, ny, nz)."""
    k = _kgrid(grid)
    hat = np.fft.fftn(data)
    return np.stack([np.fft.ifftn(1j * k[a] * hat).real for a in range(3)])


def spectral_divergence(data: np.ndarray, grid: Grid3) -> np.ndarray:
    """Divergence of a real vector grid array, shape (nx, ny, nz)."""
    k = _kgrid(grid)
    out = np.zeros(grid.shape, dtype=complex)
    for a in range(3):
        out += 1j * k[a] * np.fft.fftn(data[a])
    return np.fft.ifftn(out).real


def spectral_curl(data: np.ndarray, grid: Grid3) -> np.ndarray:
    """Curl of a real vector grid array, shape (3, nx, ny, nz)."""
    k = _kgrid(grid)
    hat = np.stack([np.fft.fftn(data[a]) for a in range(3)])
    curl_hat = 1j * np.stack(
        [
            k[1] * hat[2] - k[2] * hat[1],
            k[2] * hat[0] - k[0] * hat[2],
            k[0] * hat[1] - k[1] * hat[0],
        ]
    )
    return np.stack([np.fft.ifftn(curl_hat[a]).real for a in range(3)])


def fields_from_potentials(
    potentials: PotentialPair,
    dpotentials_dt: PotentialPair,
    grid: Grid3,
    units: UnitSystem,
) -> FieldVecPair:
    """Field strengths of a gridded potential pair and its time derivative.

    E = -(dA/dt + c grad A0 + curl C);  B = -(dC/dt / c^2 + grad C0 / c - curl A),
    with A0, C0 the time components and A, C the spatial parts.
    """
    expected = (4,) + grid.shape
    for name, arr in (("potentials", potentials.A), ("dpotentials_dt", dpotentials_dt.A)):
        if arr.shape != expected:
            raise GridMismatchError(f"{name} shape {arr.shape} does not match grid {expected}")
    c = units.c
    E = -(
        dpotentials_dt.A[1:]
        + c * spectral_gradient(potentials.A[0], grid)
        + spectral_curl(potentials.C[1:], grid)
    )
    B = -(
        dpotentials_dt.C[1:] / c**2
        + spectral_gradient(potentials.C[0], grid) / c
        - spectral_curl(potentials.A[1:], grid)
    )
    return FieldVecPair(E=E, B=B)


def helmholtz_decompose(field: VectorField) -> tuple[VectorField, VectorField]:
    """Split a vector field into (transverse, longitudinal) parts.

    The spatial mean (k = 0 component) is assigned to the longitudinal part.
    """
    grid = field.grid
    k = _kgrid(grid)
    k2 = _ksquared(grid)
    hat = np.stack([np.fft.fftn(field.data[a]) for a in range(3)])
    kdotv = k[0] * hat[0] + k[1] * hat[1] + k[2] * hat[2]
    with np.errstate(invalid="ignore", divide="ignore"):
        proj = np.where(k2 > 0, kdotv / np.where(k2 > 0, k2, 1.0), 0.0)
    long_hat = k * proj[None]
    long_hat[:, 0, 0, 0] = hat[:, 0, 0, 0]
    trans_hat = hat - long_hat
    transverse = np.stack([np.fft.ifftn(trans_hat[a]).real for a in range(3)])
    longitudinal = np.stack([np.fft.ifftn(long_hat[a]).real for a in range(3)])
    return VectorField(grid, transverse), VectorField(grid, longitudinal)


def transverse_fraction(field: VectorField) -> float:
    """L2 fraction of the field that is transverse (0 for a zero field)."""
    total = field.l2norm()
    if total == 0.0:
        return 0.0
    transverse, _ = helmholtz_decompose(field)
    return transverse.l2norm() / total


def longitudinal_fraction(field: VectorField) -> float:
    """L2 fraction of the field that is longitudinal (0 for a zero field)."""
    total = field.l2norm()
    if total == 0.0:
        return 0.0
    _, longitudinal = helmholtz_decompose(field)
    return longitudinal.l2norm() / total


def coulomb_field_from_density(density: ScalarField, prefactor: float) -> VectorField:
    """Longitudinal field F with div F = prefactor * density.

    Solved spectrally; the k = 0 component of the density (mean charge) has
    no periodic solution and is dropped, which amounts to a uniform
    neutralizing background.
    """
    grid = density.grid
    k = _kgrid(grid)
    k2 = _ksquared(grid)
    rho_hat = np.fft.fftn(density.data)
    with np.errstate(invalid="ignore", divide="ignore"):
        phi = np.where(k2 > 0, rho_hat / np.where(k2 > 0, k2, 1.0), 0.0)
    out = np.stack([np.fft.ifftn(-1j * prefactor * k[a] * phi).real for a in range(3)])
    return VectorField(grid, out)


def point_electric_field(qe: float, offset: np.ndarray, units: UnitSystem) -> np.ndarray:
    """Coulomb field of a point electric charge at displacement ``offset``."""
    r = np.asarray(offset, dtype=float).reshape(3)
    dist = float(np.linalg.norm(r))
    if dist == 0.0:
        raise SingularFieldPointError("electric point field evaluated at the charge position")
    return qe * r / (4.0 * math.pi * units.eps0 * dist**3)


def point_magnetic_field(qm: float, offset: np.ndarray, units: UnitSystem) -> np.ndarray:
    """Radial field of a point magnetic charge; div B = rho_m carries no eps0."""
    r = np.asarray(offset, dtype=float).reshape(3)
    dist = float(np.linalg.norm(r))
    if dist == 0.0:
        raise SingularFieldPointError("magnetic point field evaluated at the charge position")
    return qm * r / (4.0 * math.pi * dist**3)


_CR = np.array(
    [
        [0.0, -0.5, 1.0, -0.5],
        [1.0, 0.0, -2.5, 1.5],
        [0.0, 0.5, 2.0, -1.5],
        [0.0, 0.0, -0.5, 0.5],
    ]
)


def _cr_weights(f: float) -> np.ndarray:
    powers = np.array([1.0, f, f * f, f * f * f])
    return _CR @ powers


def tricubic_sample_vector(data: np.ndarray, grid: Grid3, x: np.ndarray) -> np.ndarray:
    """Periodic Catmull-Rom tricubic sample of a (3, nx, ny, nz) array at x."""
    x = np.asarray(x, dtype=float).reshape(3)
    idx = []
    weights = []
    for axis in range(3):
        u = x[axis] / grid.spacing[axis]
        i0 = math.floor(u)
        f = u - i0
        idx.append((i0 + np.arange(-1, 3)) % grid.n[axis])
        weights.append(_cr_weights(f))
    cube = data[:, idx[0][:, None, None], idx[1][None, :, None], idx[2][None, None, :]]
    wx, wy, wz = weights
    return np.einsum("cijk,i,j,k->c", cube, wx, wy, wz)


def save_field(path, field: ScalarField | VectorField) -> None:
    """Write a grid field: 8-byte magic, int64 ncomp/n, float64 L, then data.

    Data is stored cell-major (row-major over nx, ny, nz with the component
    index fastest), 8-byte floats, matching the documented flat layout.
    """
    if isinstance(field, ScalarField):
        data = field.data[None]
    else:
        data = field.data
    ncomp = data.shape[0]
    grid = field.grid
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        np.asarray([ncomp, *grid.n], dtype=np.int64).tofile(fh)
        np.asarray(grid.L, dtype=np.float64).tofile(fh)
        np.ascontiguousarray(np.moveaxis(data, 0, -1)).tofile(fh)


def load_field(path) -> ScalarField | VectorField:
    """Read a grid field written by ``save_field``."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError(f"not a dualfield grid file: bad magic {magic!r}")
        header = np.fromfile(fh, dtype=np.int64, count=4)
        ncomp, nx, ny, nz = (int(v) for v in header)
        L = tuple(np.fromfile(fh, dtype=np.float64, count=3))
        data = np.fromfile(fh, dtype=np.float64, count=ncomp * nx * ny * nz)
    grid = Grid3((nx, ny, nz), L)
    data = np.moveaxis(data.reshape(nx, ny, nz, ncomp), -1, 0)
    if ncomp == 1:
        return ScalarField(grid, data[0])
    if ncomp == 3:
        return VectorField(grid, data)
    raise ValueError(f"unsupported component count {ncomp}")


def save_field_csv(path, field: ScalarField | VectorField) -> None:
    """Write a small grid field as CSV with grid metadata in comment lines."""
    data = field.data[None] if isinstance(field, ScalarField) else field.data
    ncomp = data.shape[0]
    grid = field.grid
    with open(path, "w") as fh:
        fh.write(f"# n={grid.n[0]},{grid.n[1]},{grid.n[2]}\n")
        fh.write(f"# L={grid.L[0]!r},{grid.L[1]!r},{grid.L[2]!r}\n")
        fh.write("i,j,k," + ",".join(f"c{a}" for a in range(ncomp)) + "\n")
        for i in range(grid.n[0]):
            for j in range(grid.n[1]):
                for k in range(grid.n[2]):
                    values = ",".join(repr(float(data[a, i, j, k])) for a in range(ncomp))
                    fh.write(f"{i},{j},{k},{values}\n")


def load_field_csv(path) -> ScalarField | VectorField:
    """Read a grid field written by ``save_field_csv``."""
    with open(path) as fh:
        n_line = fh.readline().strip()
        L_line = fh.readline().strip()
        if not n_line.startswith("# n=") or not L_line.startswith("# L="):
            raise ValueError("missing grid metadata comments")
        n = tuple(int(v) for v in n_line[4:].split(","))
        L = tuple(float(v) for v in L_line[4:].split(","))
        header = fh.readline().strip().split(",")
        ncomp = len(header) - 3
        grid = Grid3(n, L)
        data = np.zeros((ncomp,) + grid.shape)
        for line in fh:
            parts = line.strip().split(",")
            i, j, k = int(parts[0]), int(parts[1]), int(parts[2])
            for a in range(ncomp):
                data[a, i, j, k] = float(parts[3 + a])
    if ncomp == 1:
        return ScalarField(grid, data[0])
    if ncomp == 3:
        return VectorField(grid, data)
    raise ValueError(f"unsupported component count {ncomp}")

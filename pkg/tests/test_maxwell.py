"""Evolution of the two-current field equations on periodic grids."""

import math

import numpy as np
import pytest

from dualfield.dualcore import ChargePair, FieldVecPair, UnitSystem
from dualfield.errors import CFLViolationError, GridMismatchError, SharedRatioError
from dualfield.fields import (
    Grid3,
    PointSource,
    ScalarField,
    VectorField,
    coulomb_field_from_density,
    deposit_sources,
    spectral_gradient,
)
from dualfield.maxwell import (
    EMState,
    cfl_limit,
    dual_covariance_residual,
    field_energy,
    gauss_residuals,
    rotate_em_state,
    step_symmetric_maxwell,
    superpose,
    zero_state,
)

NAT = UnitSystem.natural()
TWO_PI = 2.0 * math.pi


def cube(n, L=TWO_PI):
    return Grid3((n, n, n), (L, L, L))


def plane_wave_state(grid, kint, units, amplitude=1.0, t=0.0):
    """Traveling transverse wave; returns the state and its analytic advance."""
    k = np.asarray(kint, dtype=float) * TWO_PI / np.asarray(grid.L)
    knorm = float(np.linalg.norm(k))
    khat = k / knorm
    omega = units.c * knorm
    trial = np.array([0.0, 0.0, 1.0])
    if abs(trial @ khat) > 0.9:
        trial = np.array([0.0, 1.0, 0.0])
    eps = trial - khat * (trial @ khat)
    eps /= np.linalg.norm(eps)
    x, y, z = np.meshgrid(*grid.axes(), indexing="ij")

    def fields_at(time):
        phase = k[0] * x + k[1] * y + k[2] * z - omega * time
        E = amplitude * eps[:, None, None, None] * np.cos(phase)
        B = (amplitude / units.c) * np.cross(khat, eps)[:, None, None, None] * np.cos(phase)
        return FieldVecPair(E, B)

    return EMState(t, grid, fields_at(t), []), fields_at, omega


def moving_source(pos, v, qe, qm, sigma=0.7):
    return PointSource(np.asarray(pos), np.asarray(v), ChargePair(qe, qm), sigma)


def consistent_state(grid, units, sources, seed=0, n_waves=3):
    """Waves plus the longitudinal fields the sources require."""
    rng = np.random.default_rng(seed)
    E = np.zeros((3,) + grid.shape)
    B = np.zeros((3,) + grid.shape)
    x, y, z = np.meshgrid(*grid.axes(), indexing="ij")
    made = 0
    while made < n_waves:
        kint = rng.integers(-2, 3, size=3)
        if not np.any(kint):
            continue
        k = kint * TWO_PI / np.asarray(grid.L)
        khat = k / np.linalg.norm(k)
        pol = rng.normal(size=3)
        pol -= khat * (pol @ khat)
        if np.linalg.norm(pol) < 1e-12:
            continue
        pol /= np.linalg.norm(pol)
        phase = k[0] * x + k[1] * y + k[2] * z + rng.uniform(0, TWO_PI)
        E += pol[:, None, None, None] * np.cos(phase)
        B += np.cross(khat, pol)[:, None, None, None] * np.cos(phase) / units.c
        made += 1
    if sources:
        rho_e, rho_m, _, _ = deposit_sources(sources, grid)
        E += coulomb_field_from_density(rho_e, 1.0 / units.eps0).data
        B += coulomb_field_from_density(rho_m, 1.0).data
    return EMState(0.0, grid, FieldVecPair(E, B), sources)


# --- basic behavior -----------------------------------------------------------


def test_zero_state_stays_zero():
    grid = cube(8)
    out = step_symmetric_maxwell(zero_state(grid), 0.01, NAT, steps=5)
    assert np.max(np.abs(out.fields.E)) == 0.0
    assert np.max(np.abs(out.fields.B)) == 0.0
    assert out.t == pytest.approx(0.05)


def test_static_sources_leave_fields_untouched():
    grid = cube(16)
    source = moving_source((3.0, 3.0, 3.0), (0.0, 0.0, 0.0), 1.0, 0.5, sigma=math.pi / 4)
    out = step_symmetric_maxwell(zero_state(grid, [source]), 0.01, NAT, steps=3)
    assert np.max(np.abs(out.fields.E)) == 0.0
    assert np.max(np.abs(out.fields.B)) == 0.0


@pytest.mark.parametrize("kint", [(1, 0, 0), (1, 1, 0), (2, 1, 1)])
def test_plane_wave_advances_with_the_right_phase(kint):
    grid = cube(16)
    state, fields_at, omega = plane_wave_state(grid, kint, NAT)
    period = TWO_PI / omega
    steps = 500
    out = step_symmetric_maxwell(state, period / steps, NAT, steps=steps)
    expected = fields_at(period)
    scale = float(np.max(np.abs(expected.E)))
    assert np.max(np.abs(out.fields.E - expected.E)) / scale < 1e-8
    assert np.max(np.abs(out.fields.B - expected.B)) / scale < 1e-8


def test_plane_wave_speed_scales_with_c():
    units = UnitSystem(c=2.0, eps0=1.0)
    grid = cube(16)
    state, fields_at, omega = plane_wave_state(grid, (1, 0, 0), units)
    assert omega == pytest.approx(2.0)
    period = TWO_PI / omega
    out = step_symmetric_maxwell(state, period / 400, units, steps=400)
    expected = fields_at(period)
    assert np.max(np.abs(out.fields.E - expected.E)) < 1e-8


def test_electric_current_drives_electric_field():
    units = UnitSystem(c=1.0, eps0=2.0)
    grid = cube(16)
    v = np.array([0.05, 0.0, 0.0])
    source = moving_source((3.0, 3.0, 3.0), v, qe=1.0, qm=0.0, sigma=math.pi / 4)
    dt = 1e-3
    out = step_symmetric_maxwell(zero_state(grid, [source]), dt, units)
    _, _, j_e, _ = deposit_sources([source.at_time(0.5 * dt)], grid)
    expected = -dt * j_e.data / units.eps0
    scale = float(np.max(np.abs(expected)))
    assert np.max(np.abs(out.fields.E - expected)) / scale < 1e-4
    assert np.max(np.abs(out.fields.B)) / (scale / units.c) < 1e-3


def test_magnetic_current_drives_magnetic_field():
    grid = cube(16)
    v = np.array([0.0, 0.04, 0.0])
    source = moving_source((2.0, 2.0, 2.0), v, qe=0.0, qm=0.5, sigma=math.pi / 4)
    dt = 1e-3
    out = step_symmetric_maxwell(zero_state(grid, [source]), dt, NAT)
    _, _, _, j_m = deposit_sources([source.at_time(0.5 * dt)], grid)
    expected = -dt * j_m.data
    scale = float(np.max(np.abs(expected)))
    assert np.max(np.abs(out.fields.B - expected)) / scale < 1e-4


def test_evolution_is_linear():
    grid = cube(16)
    a = consistent_state(grid, NAT, [], seed=1)
    b = consistent_state(grid, NAT, [], seed=2)
    both = superpose(a, b)
    dt, steps = 0.01, 20
    out_both = step_symmetric_maxwell(both, dt, NAT, steps=steps)
    out_a = step_symmetric_maxwell(a, dt, NAT, steps=steps)
    out_b = step_symmetric_maxwell(b, dt, NAT, steps=steps)
    scale = np.max(np.abs(out_both.fields.E))
    assert np.max(np.abs(out_both.fields.E - out_a.fields.E - out_b.fields.E)) / scale < 1e-12
    assert np.max(np.abs(out_both.fields.B - out_a.fields.B - out_b.fields.B)) / scale < 1e-12


# --- conservation -----------------------------------------------------------------


def test_source_free_energy_is_conserved():
    grid = cube(24)
    state = consistent_state(grid, NAT, [], seed=3)
    e0 = field_energy(state, NAT)
    out = step_symmetric_maxwell(state, 0.002, NAT, steps=1000)
    e1 = field_energy(out, NAT)
    assert abs(e1 - e0) / e0 < 1e-9


def test_gauss_constraints_hold_during_sourced_evolution():
    grid = cube(24)
    sources = [
        moving_source((2.0, 3.0, 3.0), (0.05, 0.02, 0.0), 1.0, 0.5),
        moving_source((4.0, 2.5, 3.5), (-0.03, 0.0, 0.04), -0.6, -0.3),
    ]
    state = consistent_state(grid, NAT, sources, seed=4)
    rE0, rB0 = gauss_residuals(state, NAT)
    assert rE0 < 1e-12 and rB0 < 1e-12
    out = step_symmetric_maxwell(state, 0.005, NAT, steps=100)
    rE1, rB1 = gauss_residuals(out, NAT)
    assert rE1 < 1e-10 and rB1 < 1e-10


def test_gauss_residual_flags_inconsistent_fields():
    grid = cube(16)
    source = moving_source((3.0, 3.0, 3.0), (0.0, 0.0, 0.0), 1.0, 0.0, sigma=math.pi / 4)
    state = zero_state(grid, [source])
    rE, rB = gauss_residuals(state, NAT)
    assert rE > 1e-2  # charge present but no field at all
    assert rB < 1e-12  # no magnetic charge, no magnetic field
    x, _, _ = np.meshgrid(*grid.axes(), indexing="ij")
    bump = np.zeros((3,) + grid.shape)
    bump[0] = np.sin(x)
    bad = EMState(0.0, grid, FieldVecPair(bump, state.fields.B), [source])
    rE_bad, _ = gauss_residuals(bad, NAT)
    assert rE_bad > 1e-2


# --- dual covariance ----------------------------------------------------------------


def test_rotate_em_state_explicit_quarter_turn():
    grid = cube(8)
    E = np.zeros((3,) + grid.shape)
    E[0] = 1.0
    source = moving_source((3.0, 3.0, 3.0), (0.0, 0.0, 0.0), 1.0, 0.0, sigma=math.pi / 4)
    state = EMState(0.0, grid, FieldVecPair(E, np.zeros_like(E)), [source])
    out = rotate_em_state(state, math.pi / 2, NAT)
    np.testing.assert_allclose(out.fields.E, 0.0, atol=1e-15)
    np.testing.assert_allclose(out.fields.B[0], -1.0, atol=1e-15)
    assert out.sources[0].charges.qe == pytest.approx(0.0, abs=1e-15)
    assert out.sources[0].charges.qm == pytest.approx(-1.0)


def test_rotation_at_zero_angle_is_identity():
    grid = cube(16)
    state = consistent_state(grid, NAT, [], seed=5)
    assert dual_covariance_residual(state, 0.0, 10, 0.01, NAT) == 0.0


@pytest.mark.parametrize("theta", [math.pi / 6, math.pi / 2, 3 * math.pi / 2])
def test_source_free_evolution_commutes_with_rotation(theta):
    grid = cube(16)
    state = consistent_state(grid, NAT, [], seed=6)
    assert dual_covariance_residual(state, theta, 50, 0.01, NAT) < 1e-10


def test_sourced_evolution_commutes_with_rotation():
    grid = cube(16)
    sources = [
        moving_source((2.0, 3.0, 3.0), (0.05, 0.02, 0.0), 1.0, 0.5, sigma=math.pi / 4),
        moving_source((4.0, 2.5, 3.5), (-0.03, 0.0, 0.04), -0.6, -0.3, sigma=math.pi / 4),
    ]
    state = consistent_state(grid, NAT, sources, seed=7)
    assert dual_covariance_residual(state, math.pi / 4, 50, 0.01, NAT) < 1e-10


def test_covariance_with_mixed_ratio_sources_needs_the_flag():
    grid = cube(16)
    sources = [
        moving_source((2.0, 3.0, 3.0), (0.05, 0.0, 0.0), 1.0, 0.5, sigma=math.pi / 4),
        moving_source((4.0, 2.5, 3.5), (0.0, 0.04, 0.0), 1.0, -0.8, sigma=math.pi / 4),
    ]
    state = consistent_state(grid, NAT, sources, seed=8)
    with pytest.raises(SharedRatioError):
        dual_covariance_residual(state, math.pi / 4, 10, 0.01, NAT)
    residual = dual_covariance_residual(
        state, math.pi / 4, 10, 0.01, NAT, require_shared_ratio=False
    )
    assert residual < 1e-10  # independent charge pairs still transform covariantly


# --- guard rails -----------------------------------------------------------------------


def test_cfl_limit_value_and_violation():
    grid = cube(16)
    assert cfl_limit(grid, NAT) == pytest.approx(0.5 * grid.spacing[0])
    state = consistent_state(grid, NAT, [], seed=9)
    with pytest.raises(CFLViolationError):
        step_symmetric_maxwell(state, 10.0 * cfl_limit(grid, NAT), NAT)


def test_negative_time_step_is_rejected():
    grid = cube(8)
    with pytest.raises(ValueError):
        step_symmetric_maxwell(zero_state(grid), -0.01, NAT)


def test_superluminal_source_is_rejected():
    grid = cube(16)
    source = moving_source((3.0, 3.0, 3.0), (1.5, 0.0, 0.0), 1.0, 0.0, sigma=math.pi / 4)
    with pytest.raises(ValueError):
        step_symmetric_maxwell(zero_state(grid, [source]), 0.01, NAT)


def test_superpose_rejects_mismatched_states():
    a = zero_state(cube(8))
    b = zero_state(cube(16))
    with pytest.raises(GridMismatchError):
        superpose(a, b)
    c = zero_state(cube(8), t=1.0)
    with pytest.raises(ValueError):
        superpose(a, c)


def test_field_energy_of_uniform_field():
    grid = cube(8, L=1.0)
    E = np.zeros((3,) + grid.shape)
    E[0] = 2.0
    state = EMState(0.0, grid, FieldVecPair(E, np.zeros_like(E)), [])
    # eps0 E^2 / 2 * volume = 0.5 * 4 * 1
    assert field_energy(state, NAT) == pytest.approx(2.0)

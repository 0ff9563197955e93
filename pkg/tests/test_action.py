import numpy as np
import pytest

from nlgauge.action import action_evaluate, scale_transform
from nlgauge.dynamics import Snapshot, Trajectory, evolve_temporal_gauge, \
    stationary_solve
from nlgauge.errors import InsufficientDataError
from nlgauge.gaugeops import initialize_constraint
from nlgauge.grids import TensorGrid
from nlgauge.model import GaugeState, HamiltonianSpec, ModelParams, \
    WaveFunctional
from nlgauge.verify import transform_trajectory, _smooth_functional

QUARTIC = HamiltonianSpec(sites=1, potential_coeffs=(0.0, 0.0, 0.0, 0.0, 0.5))
HARMONIC = HamiltonianSpec(sites=1, potential_coeffs=(0.0, 0.0, 0.845))


def packet_traj(spec, l=1.0, steps=32, dt=0.004, count=241, half=7.0):
    grid = TensorGrid.cube(-half, half, count, 1)
    params = ModelParams.for_grid(grid, l=l)
    x = grid.axes[0].nodes
    psi = np.exp(-0.5 * (x - 1.0) ** 2) + 0j
    psi[0] = psi[-1] = 0.0
    psi /= np.sqrt(np.real(grid.integrate(np.abs(psi) ** 2)))
    pw = WaveFunctional(grid, psi)
    g0 = GaugeState.zero(grid)
    g0.f = initialize_constraint(pw, params)
    return evolve_temporal_gauge(pw, g0, spec, params, dt=dt, steps=steps)


def test_zero_state_zero_action():
    grid = TensorGrid.cube(-3.0, 3.0, 41, 1)
    spec = HamiltonianSpec(sites=1)
    params = ModelParams.for_grid(grid, l=1.0)
    z = np.zeros(grid.shape, dtype=complex)
    zf = [np.zeros(grid.shape[0] - 1)]
    snaps = [Snapshot(k * 0.1, z.copy(), [zf[0].copy()], [zf[0].copy()],
                      np.zeros(grid.shape)) for k in range(5)]
    traj = Trajectory(grid, spec, params, 0.1, snaps)
    assert action_evaluate(traj) == 0.0


def test_insufficient_slices_raises():
    grid = TensorGrid.cube(-3.0, 3.0, 41, 1)
    spec = HamiltonianSpec(sites=1)
    params = ModelParams.for_grid(grid, l=1.0)
    z = np.zeros(grid.shape, dtype=complex)
    snaps = [Snapshot(0.0, z, [np.zeros(40)], [np.zeros(40)], np.zeros(41)),
             Snapshot(0.1, z, [np.zeros(40)], [np.zeros(40)], np.zeros(41))]
    with pytest.raises(InsufficientDataError):
        action_evaluate(Trajectory(grid, spec, params, 0.1, snaps))


def test_stationary_action_scales_with_segment_length():
    grid = TensorGrid.cube(-8.0, 8.0, 241, 1)
    spec = HamiltonianSpec(sites=1, potential_coeffs=(0.0, 0.0, 0.5))
    params = ModelParams.for_grid(grid, l=1.0)
    st = stationary_solve(spec, params, grid, tol=1e-11)
    g0 = GaugeState.zero(grid)
    g0.f = initialize_constraint(st.psi, params)
    per_slice = []
    for steps in (12, 24):
        traj = evolve_temporal_gauge(st.psi, g0, spec, params, dt=0.004,
                                     steps=steps)
        gam = action_evaluate(traj)
        per_slice.append(gam / (steps - 1))
    # time-independent integrand up to the integrator's O(dt^2) drift
    assert per_slice[0] != 0.0
    assert abs(per_slice[0] - per_slice[1]) < 1e-7


def test_action_gauge_invariance_exact():
    traj = packet_traj(QUARTIC)
    rng = np.random.default_rng(3)
    lam0 = _smooth_functional(traj.grid, rng)
    mu = _smooth_functional(traj.grid, rng)
    tr2 = transform_trajectory(traj, lam0, mu)
    gam1 = action_evaluate(traj)
    gam2 = action_evaluate(tr2)
    assert abs(gam1 - gam2) < 1e-10 * max(1.0, abs(gam1))


def test_scale_invariance_quartic_and_identity():
    traj = packet_traj(QUARTIC)
    gam = action_evaluate(traj)
    assert gam != 0.0
    for c0, a in ((1.0, 0.7), (0.5, 0.0), (0.5, 1.0), (2.0, 0.0), (2.0, 1.0)):
        tr2 = scale_transform(traj, c0, a)
        gam2 = action_evaluate(tr2)
        assert abs(gam / gam2 - 1.0) < 1e-8, (c0, a)
    # c0 = 1 is the identity for any exponent a
    tr_id = scale_transform(traj, 1.0, 0.7)
    assert tr_id.grid.axes[0].upper == traj.grid.axes[0].upper
    assert np.abs(tr_id.snapshots[0].psi - traj.snapshots[0].psi).max() == 0.0


def test_scale_transform_is_nontrivial_for_c0_not_1():
    traj = packet_traj(QUARTIC, steps=8)
    tr2 = scale_transform(traj, 2.0, 1.0)
    s = 2.0 ** 0.5
    assert tr2.grid.axes[0].upper == pytest.approx(traj.grid.axes[0].upper / s)
    assert tr2.dt == pytest.approx(traj.dt * s)
    assert tr2.spec.lattice_spacing == pytest.approx(s)


def test_scale_symmetry_breaks_for_massive_potential():
    traj = packet_traj(HARMONIC)
    gam = action_evaluate(traj)
    gam2 = action_evaluate(scale_transform(traj, 2.0, 1.0))
    assert abs(gam / gam2 - 1.0) > 1e-3


def test_nonuniform_sampling_rejected():
    traj = packet_traj(QUARTIC, steps=6)
    traj.snapshots[2].time += 1e-3
    with pytest.raises(InsufficientDataError):
        action_evaluate(traj)

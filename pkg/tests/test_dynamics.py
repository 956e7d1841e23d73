import math

import numpy as np
import pytest

from cdspeed.cdrive import COLLECTIVE, DriveProtocol
from cdspeed.costspeed import density_matrix
from cdspeed.dynamics import (
    average_speed,
    initial_eigenstates,
    propagate,
    propagate_levels,
    tracking_fidelity,
)
from cdspeed.errors import InvalidState, NormDrift
from cdspeed.matcore import hermitian_eig_stack
from cdspeed.model import LZ3Params, frozen_trajectory, lz3_oracle
from cdspeed.spinops import make_spin


def test_frozen_stationary(backend):
    traj = frozen_trajectory(make_spin(1).sz)
    run = propagate(traj, COLLECTIVE, np.array([0, 1, 0]), steps=200)
    assert np.abs(run.final[:, 0]) @ np.array([0, 1, 0]) == pytest.approx(1, abs=1e-14)
    assert run.max_norm_drift() <= 1e-12
    assert np.all(np.diff(run.times) > 0)


def test_collective_tracks_all_levels(backend, lz3_traj):
    rep = tracking_fidelity(propagate_levels(lz3_traj, COLLECTIVE, steps=10_000), lz3_traj)
    assert np.all(rep.min_fidelity >= 1 - 1e-8)
    assert np.all(rep.fidelity <= 1 + 1e-10)


def test_individual_middle_coincides_with_collective(lz3_traj):
    rep = tracking_fidelity(propagate_levels(lz3_traj, DriveProtocol.individual(1), steps=10_000), lz3_traj)
    assert np.all(rep.min_fidelity >= 1 - 1e-8)


def test_individual_side_level(lz3_traj):
    rep = tracking_fidelity(propagate_levels(lz3_traj, DriveProtocol.individual(2), steps=10_000), lz3_traj)
    assert rep.for_level(2).min() >= 1 - 1e-8
    assert rep.for_level(1).min() < 0.9


def test_bare_sweep_is_diabatic(lz3_traj):
    rep = tracking_fidelity(propagate_levels(lz3_traj, None, steps=10_000), lz3_traj)
    # solve_ivp reference for the middle level at t = tau
    assert rep.final_fidelity[1] == pytest.approx(0.9785523255819912, abs=1e-8)
    assert rep.min_fidelity[1] < 0.9
    assert np.all(rep.final_fidelity[[0, 2]] < 0.02)


def test_rk4_fourth_order(lz3_traj):
    ref = propagate_levels(lz3_traj, COLLECTIVE, steps=6400).final
    errs = [np.abs(propagate_levels(lz3_traj, COLLECTIVE, steps=n).final - ref).max() for n in (200, 400, 800)]
    for a, b in zip(errs, errs[1:]):
        assert 13 < a / b < 19


def test_populations_and_energies_frozen_under_collective(lz3_traj):
    run = propagate_levels(lz3_traj, COLLECTIVE, steps=10_000)
    p = np.array([0.5, 0.3, 0.2])
    for k in (0, len(run.times) // 2, -1):
        rho = density_matrix(run.states[k], p)
        np.testing.assert_allclose(np.linalg.eigvalsh(rho), np.sort(p), atol=1e-8)
    values, _ = hermitian_eig_stack(lz3_traj.h_stack(run.times))
    h = lz3_traj.h_stack(run.times)
    energy = np.einsum("tin,tij,tjn->tn", run.states.conj(), h, run.states).real
    np.testing.assert_allclose(energy, values, atol=1e-6)


def test_norm_drift_detected(lz3_traj):
    with pytest.raises(NormDrift):
        propagate_levels(lz3_traj, COLLECTIVE, steps=100)


def test_input_validation(lz3_traj):
    with pytest.raises(InvalidState):
        propagate(lz3_traj, None, np.array([1.0, 1.0, 0.0]))
    with pytest.raises(ValueError):
        propagate(lz3_traj, None, np.array([1.0, 0, 0]), steps=10)
    run = propagate(lz3_traj, None, initial_eigenstates(lz3_traj)[:, 0])
    with pytest.raises(ValueError):
        tracking_fidelity(run, lz3_traj)


def test_propagation_deterministic(lz3_traj):
    a = propagate_levels(lz3_traj, COLLECTIVE, steps=2000)
    b = propagate_levels(lz3_traj, COLLECTIVE, steps=2000)
    assert a.states.tobytes() == b.states.tobytes()


def test_average_speed():
    ts = np.linspace(0, 2, 11)
    assert average_speed(ts, np.full(11, 3.5)) == pytest.approx(3.5)
    with pytest.raises(ValueError):
        average_speed([0.0], [1.0])
    for tau in (1.0, 2.0):
        o = lz3_oracle(LZ3Params(tau=tau))
        t = np.linspace(0, tau, 200_001)
        vbar = average_speed(t, np.abs(o.dtheta(t)))
        swept = math.pi - 2 * math.atan2(0.1, 1.0)
        assert vbar * tau == pytest.approx(swept, rel=1e-8)
        assert swept == pytest.approx(2.9422, abs=1e-4)

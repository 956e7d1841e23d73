import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdspeed.adiabatic import (
    fd_coupling_oracle,
    fd_transverse_speed_sq,
    frame_at,
    frame_from_eigensystem,
    frame_stack,
    frames,
    spectral_frame,
)
from cdspeed.errors import BranchMistracking, DegenerateSpectrum
from cdspeed.matcore import EigenSystem
from cdspeed.model import HamiltonianTrajectory, LZ3Params, frozen_trajectory, lz3_oracle
from cdspeed.spinops import make_spin


def test_lz3_center_couplings(lz3_traj):
    c = spectral_frame(lz3_traj, 0.5).couplings
    assert abs(c[0, 1]) == pytest.approx(20 / np.sqrt(2), rel=1e-12)
    assert abs(c[2, 1]) == pytest.approx(20 / np.sqrt(2), rel=1e-12)
    assert abs(c[0, 2]) <= 1e-12
    assert np.all(np.diag(c) == 0)


def test_frozen_couplings_zero():
    ops = make_spin(1)
    traj = frozen_trajectory(ops.sz + 0.3 * ops.sx)
    assert np.all(spectral_frame(traj, 0.3).couplings == 0)
    assert np.all(fd_coupling_oracle(traj, 0.5, 1e-3) == 0)


def test_lz2_center(lz2_traj):
    c = spectral_frame(lz2_traj, 0.5).couplings
    dtheta = lz3_oracle(LZ3Params()).dtheta(0.5)
    assert abs(c[0, 1]) == pytest.approx(abs(dtheta) / 2, rel=1e-12)


def test_degenerate_refused():
    with pytest.raises(DegenerateSpectrum):
        frame_at(np.diag([1.0, 1.0, 2.0]), np.ones((3, 3)))
    ops = make_spin(1)
    # delta = 0: the three levels cross at t = 1/2
    traj = HamiltonianTrajectory(
        dim=3, tau=1.0, h_at=lambda t: (2 * t - 1) * ops.sz, dh_at=lambda t: 2 * ops.sz
    )
    with pytest.raises(DegenerateSpectrum) as err:
        frame_stack(traj, [0.2, 0.5])
    assert err.value.t == 0.5


def test_fd_oracle_center_and_order(lz3_traj):
    exact = spectral_frame(lz3_traj, 0.5).couplings
    fd = fd_coupling_oracle(lz3_traj, 0.5, 1e-6)
    assert np.max(np.abs(np.abs(fd) - np.abs(exact))) <= 1e-6 * np.abs(exact).max()
    t = 0.47
    exact = spectral_frame(lz3_traj, t).couplings
    e1 = np.max(np.abs(fd_coupling_oracle(lz3_traj, t, 2e-3) - exact))
    e2 = np.max(np.abs(fd_coupling_oracle(lz3_traj, t, 1e-3) - exact))
    assert 3.5 < e1 / e2 < 4.5


def test_branch_mistracking(lz3_traj):
    with pytest.raises(BranchMistracking):
        fd_coupling_oracle(lz3_traj, 0.5, 0.2)


def test_oracle_equivalence_along_sweep(lz3_traj):
    ts = np.linspace(0.01, 0.99, 50)
    _, _, cs = frame_stack(lz3_traj, ts)
    for t, c in zip(ts, cs):
        fd = fd_coupling_oracle(lz3_traj, t, 1e-6)
        assert np.max(np.abs(fd - c)) <= 1e-6 * np.abs(c).max()
        sum_rule = np.sum(np.abs(c) ** 2, axis=0)
        np.testing.assert_allclose(fd_transverse_speed_sq(lz3_traj, t, 1e-6), sum_rule, rtol=1e-6)


def test_frames_match_stack(lz3_traj):
    ts = [0.1, 0.5, 0.9]
    fs = frames(lz3_traj, ts)
    _, _, cs = frame_stack(lz3_traj, ts)
    for f, c in zip(fs, cs):
        np.testing.assert_array_equal(f.couplings, c)
        np.testing.assert_array_equal(f.couplings, spectral_frame(lz3_traj, f.t).couplings)


def _random_pair(seed, d):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    y = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return x + x.conj().T, y + y.conj().T, rng


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_frame_invariants_and_gauge(seed, d):
    h, dh, rng = _random_pair(seed, d)
    frame = frame_at(h, dh)
    c = frame.couplings
    np.testing.assert_allclose(c, -c.conj().T, atol=1e-10 * max(1.0, np.abs(c).max()))
    assert np.all(np.diag(c) == 0)
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, d))
    rephased = EigenSystem(frame.values, frame.vectors * phases, frame.min_gap, False)
    c2 = frame_from_eigensystem(rephased, dh).couplings
    np.testing.assert_allclose(np.abs(c2), np.abs(c), atol=1e-10 * max(1.0, np.abs(c).max()))

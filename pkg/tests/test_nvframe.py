import numpy as np
import pytest
from scipy.integrate import quad

from cdspeed.errors import StepTooCoarse
from cdspeed.model import LZ3Params, lz3_counterdiabatic_field
from cdspeed.nvframe import (
    NVParams,
    drive_phase,
    effective_hamiltonian,
    exact_rotating_stack,
    frame_unitary_diag,
    nv_static_hamiltonian,
    rotating_frame_transform,
    run_lab_frame,
    rwa_residual,
    rwa_target_matches_collective,
    rwa_target_stack,
    synthesize_pulse,
    verify_lab_protocol,
)
from cdspeed.spinops import make_spin

P = LZ3Params()
NV = NVParams()
S = make_spin(1)


def test_params():
    assert NV.omega0 == pytest.approx(2 * 2.870 / 3, abs=1e-12)
    assert NV.direct_drive_field == pytest.approx(4 * NV.bias_field)


def test_static_hamiltonian():
    d = NV.zero_field_D
    np.testing.assert_allclose(nv_static_hamiltonian(NV, 0.0), np.diag([d, 0, d]), atol=1e-15)
    np.testing.assert_allclose(
        nv_static_hamiltonian(NV, NV.bias_field), np.diag([4 * d / 3, 0, 2 * d / 3]), atol=1e-12
    )
    np.testing.assert_allclose(effective_hamiltonian(NV), NV.omega0 * S.sz, atol=1e-12)


def test_pulse_examples():
    s = synthesize_pulse(NV, P, [0.0])
    assert s.epsilon[0] == 0
    assert s.delta[0] == pytest.approx(2 * P.delta)
    # lambda = 0 and V = 0: plain resonant drive
    flat = LZ3Params(kappa=1e-12)
    t = np.linspace(0, 1, 7)
    s = synthesize_pulse(NVParams(omega0_over_kappa=200e12), flat, t, counterdiabatic=False)
    np.testing.assert_allclose(s.delta, 2 * 0.1 * np.cos(200 * t), atol=1e-10)
    t = np.linspace(0, 1, 5001)
    s = synthesize_pulse(NV, P, t)
    v = lz3_counterdiabatic_field(P, t)
    assert np.all(np.abs(s.delta) <= 2 * np.sqrt(P.delta**2 + v**2) * (1 + 1e-12))
    np.testing.assert_allclose(s.bx, s.delta / NV.gamma_e)
    with pytest.raises(ValueError):
        synthesize_pulse(NVParams(omega0_over_kappa=0.0), P, t)


def test_phase_quadrature_and_derivative():
    w = 200.0
    for t in (0.0, 0.3, 0.5, 1.0):
        num, _ = quad(lambda u: w - (2 * u - 1), 0, t, epsabs=1e-14)
        assert drive_phase(w, P, t) == pytest.approx(num, abs=1e-10)
    t = np.linspace(0.01, 0.99, 25)
    h = 1e-6
    fd = (drive_phase(w, P, t + h) - drive_phase(w, P, t - h)) / (2 * h)
    s = synthesize_pulse(NV, P, t)
    np.testing.assert_allclose(fd, s.depsilon, rtol=1e-8)


def test_frame_transform_examples():
    h = 0.3 * S.sx + 0.1 * S.sz
    np.testing.assert_allclose(rotating_frame_transform(h, 0.0, 0.0), h, atol=1e-15)
    lam = 0.4
    out = rotating_frame_transform(200 * S.sz, 1.234, 200 - lam)
    np.testing.assert_allclose(out, lam * S.sz, atol=1e-12)
    u = np.diag(frame_unitary_diag(0.7))
    np.testing.assert_allclose(u, np.diag(np.exp(1j * 0.7 * np.array([1, 0, -1]))), atol=1e-15)


def test_rwa_target_after_averaging():
    # averaging the exact rotating-frame operator over one carrier period removes the 2 eps terms
    t0 = 0.3
    period = 2 * np.pi / (200 - (2 * t0 - 1))
    ts = t0 + np.linspace(0, period, 4001)[:-1]
    diff = exact_rotating_stack(NV, P, ts) - rwa_target_stack(P, ts)
    # what survives averaging is O(dV/dt / omega0), a few percent of the instantaneous remainder
    assert np.max(np.abs(diff.mean(axis=0))) < 0.05 * np.max(np.abs(diff))


def test_rwa_residual():
    flat = LZ3Params(delta=1e-300, kappa=1e-12)
    t = np.linspace(0, 1, 10)
    assert np.max(rwa_residual(NVParams(omega0_over_kappa=200e12), flat, t)) < 1e-12  # omega0 - d eps/dt cancellation floor
    t = np.linspace(0.4, 0.6, 4001)
    r = rwa_residual(NV, P, t)
    v = lz3_counterdiabatic_field(P, t)
    assert np.all(r <= 2 * np.sqrt(P.delta**2 + v**2) * 1.01)
    # the dropped entries rotate at about 2 omega0 (the norm itself only follows the envelope)
    entry = (exact_rotating_stack(NV, P, t) - rwa_target_stack(P, t))[:, 0, 1]
    power = np.abs(np.fft.fft(entry))
    freqs = np.fft.fftfreq(len(t), t[1] - t[0]) * 2 * np.pi
    assert abs(freqs[np.argmax(power)]) == pytest.approx(400, rel=0.05)


def test_rwa_target_identity():
    assert rwa_target_matches_collective(P, np.linspace(0, 1, 101)) <= 1e-12


def test_verify_lab_protocol_tracks():
    rep = verify_lab_protocol(NV, P)
    assert np.all(rep.min_fidelity >= 1 - 1e-2)


def test_deficit_decreases_with_carrier():
    deficits = [run_lab_frame(NVParams(omega0_over_kappa=w), P) for w in (100, 200, 400)]
    worst = [r.deficit for r in deficits]
    mean = [r.mean_deficit for r in deficits]
    assert worst[0] > worst[1] > worst[2]
    assert mean[0] > mean[1] > mean[2]
    # observed scaling is (kappa/omega0)^2: each doubling cuts the deficit about four times
    assert 3 < mean[1] / mean[2] < 5


def test_bare_lab_pulse_loses_middle_level():
    rep = verify_lab_protocol(NV, P, counterdiabatic=False)
    assert rep.min_fidelity[1] < 0.9


def test_resolution_checks():
    with pytest.raises(StepTooCoarse):
        run_lab_frame(NV, P, steps=500)
    with pytest.raises(ValueError):
        run_lab_frame(NVParams(omega0_over_kappa=10.0), P)

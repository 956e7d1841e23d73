"""NV-centre realisation of the driven three-level sweep in a rotating frame.

The lab-frame Hamiltonian ``delta(t) S_x + omega0 S_z`` with the envelope
``delta = 2 [Delta cos(eps) - V sin(eps)]`` and phase ``d eps/dt = omega0 - lambda``
becomes ``Delta S_x + V S_y + lambda S_z`` in the frame ``U = exp(i eps S_z)``
once the terms oscillating at ``2 eps`` are dropped.

Times and energies are in units of kappa (hbar = 1). The physical
``omega0 = 2D/3`` is about 1.9 GHz, far too fast to integrate against a
slow sweep, so simulations use a scaled ``omega0 / kappa`` (default 200).
"""

import math
from dataclasses import dataclass

import numpy as np

from .cdrive import COLLECTIVE, total_hamiltonian_stack
from .dynamics import TrackingReport, evolve_samples, half_step_grid, initial_eigenstates, overlaps_with_levels
from .errors import StepTooCoarse
from .matcore import frobenius_norm, hermitian_eig_stack
from .model import counterdiabatic_field, linear_sweep, lz3
from .spinops import make_spin

MIN_STEPS_PER_PERIOD = 40
DEFAULT_STEPS_PER_PERIOD = 512
MIN_OMEGA0_OVER_KAPPA = 20.0

SPIN1 = make_spin(1)


@dataclass(frozen=True)
class NVParams:
    """Zero-field splitting (GHz), gyromagnetic ratio (GHz/T) and the scaled carrier."""

    zero_field_D: float = 2.870
    gamma_e: float = 28.02
    omega0_over_kappa: float = 200.0

    @property
    def omega0(self):
        """Physical carrier ``2D/3`` in GHz."""
        return 2.0 * self.zero_field_D / 3.0

    @property
    def bias_field(self):
        """``B_z = D / (3 gamma_e)`` in tesla."""
        return self.zero_field_D / (3.0 * self.gamma_e)

    @property
    def direct_drive_field(self):
        """``4D / (3 gamma_e)``: field a direct lab-frame sweep would need (tesla)."""
        return 4.0 * self.zero_field_D / (3.0 * self.gamma_e)


def nv_static_hamiltonian(p, bz):
    """``D S_z^2 + gamma_e B_z S_z`` (GHz, basis m = +1, 0, -1)."""
    sz = SPIN1.sz
    return p.zero_field_D * (sz @ sz) + p.gamma_e * bz * sz


def bias_and_swap(h, shift):
    """Shift all levels down by ``shift`` and swap the |0> and |-1> populations.

    Stands in for the level bias plus the polarised pi pulse on the 0 <-> -1
    transition; ``bias_and_swap(nv_static_hamiltonian(p, p.bias_field), 2D/3)``
    equals ``omega0 S_z``.
    """
    h = np.asarray(h, dtype=np.complex128) - shift * np.eye(3)
    perm = [0, 2, 1]
    return h[np.ix_(perm, perm)]


def effective_hamiltonian(p):
    return bias_and_swap(nv_static_hamiltonian(p, p.bias_field), 2.0 * p.zero_field_D / 3.0)


# -- pulse synthesis ----------------------------------------------------------


@dataclass(frozen=True)
class PulseSchedule:
    t: np.ndarray
    lam: np.ndarray
    v: np.ndarray
    epsilon: np.ndarray
    depsilon: np.ndarray
    delta: np.ndarray
    bx: np.ndarray


def drive_phase(omega0, lz, t):
    """``eps(t) = omega0 t - kappa (t^2/tau - t)``, the integral of ``omega0 - lambda``."""
    t = np.asarray(t, dtype=float)
    return omega0 * t - lz.kappa * (t * t / lz.tau - t)


def synthesize_pulse(nv, lz, t, counterdiabatic=True):
    """Envelope, phase and field of the lab-frame drive at times ``t``.

    ``counterdiabatic=False`` leaves out the V term, i.e. a bare sweep.
    """
    omega0 = nv.omega0_over_kappa * lz.kappa
    if not omega0 > 0:
        raise ValueError("omega0 must be positive")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    lam, dlam = linear_sweep(lz, t)
    v = counterdiabatic_field(lz.delta, lam, dlam) if counterdiabatic else np.zeros_like(t)
    eps = drive_phase(omega0, lz, t)
    delta = 2.0 * (lz.delta * np.cos(eps) - v * np.sin(eps))
    return PulseSchedule(
        t=t,
        lam=lam,
        v=v,
        epsilon=eps,
        depsilon=omega0 - lam,
        delta=delta,
        bx=delta / nv.gamma_e,
    )


def lab_hamiltonian_stack(nv, lz, t, counterdiabatic=True):
    s = synthesize_pulse(nv, lz, t, counterdiabatic)
    omega0 = nv.omega0_over_kappa * lz.kappa
    return s.delta[:, None, None] * SPIN1.sx[None] + omega0 * SPIN1.sz[None], s


# -- rotating frame -----------------------------------------------------------


def frame_unitary_diag(epsilon, ops=SPIN1):
    """Diagonal of ``exp(i eps S_z)`` (stacked over ``epsilon``)."""
    m = np.diag(ops.sz).real
    return np.exp(1j * np.multiply.outer(np.asarray(epsilon, dtype=float), m))


def rotating_frame_transform(lab_h, epsilon, depsilon, ops=SPIN1):
    """Exact ``U H U^dag + i (dU/dt) U^dag`` for ``U = exp(i eps S_z)``.

    The second term equals ``-d eps/dt S_z``. Works on single operators or stacks.
    """
    u = frame_unitary_diag(epsilon, ops)
    lab_h = np.asarray(lab_h, dtype=np.complex128)
    rotated = u[..., :, None] * lab_h * u.conj()[..., None, :]
    dep = np.asarray(depsilon, dtype=float)
    return rotated - dep[..., None, None] * ops.sz


def rwa_target_stack(lz, t):
    """``Delta S_x + V S_y + lambda S_z``, the collectively driven sweep."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    lam, dlam = linear_sweep(lz, t)
    v = counterdiabatic_field(lz.delta, lam, dlam)
    return (
        lz.delta * SPIN1.sx[None]
        + v[:, None, None] * SPIN1.sy[None]
        + lam[:, None, None] * SPIN1.sz[None]
    )


def exact_rotating_stack(nv, lz, t, counterdiabatic=True):
    lab, s = lab_hamiltonian_stack(nv, lz, t, counterdiabatic)
    return rotating_frame_transform(lab, s.epsilon, s.depsilon)


def rwa_residual(nv, lz, t):
    """Frobenius norm of the counter-rotating remainder dropped by the RWA."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return frobenius_norm(exact_rotating_stack(nv, lz, t) - rwa_target_stack(lz, t))


# -- end-to-end verification --------------------------------------------------


def default_steps(nv, lz, per_period=DEFAULT_STEPS_PER_PERIOD):
    omega0 = nv.omega0_over_kappa * lz.kappa
    return int(math.ceil(per_period * omega0 * lz.tau / (2 * math.pi)))


def _check_resolution(nv, lz, steps):
    if nv.omega0_over_kappa < MIN_OMEGA0_OVER_KAPPA:
        raise ValueError(f"omega0/kappa must be >= {MIN_OMEGA0_OVER_KAPPA} for the rotating-wave regime")
    needed = default_steps(nv, lz, MIN_STEPS_PER_PERIOD)
    if steps < needed:
        raise StepTooCoarse(f"{steps} steps under-resolve the carrier; need at least {needed}")


@dataclass(frozen=True)
class LabRun:
    times: np.ndarray
    lab_states: np.ndarray
    rotated_states: np.ndarray
    tracking: TrackingReport
    schedule: PulseSchedule

    @property
    def deficit(self):
        """Worst ``1 - |<n_t|psi_n>|`` over time and levels."""
        return float(1.0 - self.tracking.fidelity.min())

    @property
    def mean_deficit(self):
        return float(np.mean(1.0 - self.tracking.fidelity))


def run_lab_frame(nv, lz, steps=None, counterdiabatic=True):
    """Propagate the three t = 0 eigenstates in the lab frame and rotate them back."""
    steps = default_steps(nv, lz) if steps is None else int(steps)
    _check_resolution(nv, lz, steps)
    model = lz3(lz)
    traj = model.trajectory()
    grid = half_step_grid(lz.tau, steps)
    hs, _ = lab_hamiltonian_stack(nv, lz, grid, counterdiabatic)
    psi0 = initial_eigenstates(traj)
    times = grid[::2]
    lab, _ = evolve_samples(hs, psi0, lz.tau, times)
    schedule = synthesize_pulse(nv, lz, times, counterdiabatic)
    rotated = frame_unitary_diag(schedule.epsilon)[:, :, None] * lab
    _, vectors = hermitian_eig_stack(traj.h_stack(times))
    levels = list(range(traj.dim))
    fid = overlaps_with_levels(rotated, vectors, levels)
    report = TrackingReport(times=times, levels=levels, fidelity=fid)
    return LabRun(times=times, lab_states=lab, rotated_states=rotated, tracking=report, schedule=schedule)


def verify_lab_protocol(nv, lz, steps=None, counterdiabatic=True):
    """Tracking fidelities of the lab-frame pulse against the instantaneous LZ3 levels."""
    return run_lab_frame(nv, lz, steps, counterdiabatic).tracking


def exact_transform_consistency(nv, lz, steps=None):
    """Final-state fidelities between rotated lab dynamics and direct rotating-frame dynamics.

    No terms are dropped, so any shortfall from 1 is integrator error.
    """
    steps = default_steps(nv, lz) if steps is None else int(steps)
    run = run_lab_frame(nv, lz, steps)
    grid = half_step_grid(lz.tau, steps)
    traj = lz3(lz).trajectory()
    direct, _ = evolve_samples(exact_rotating_stack(nv, lz, grid), initial_eigenstates(traj), lz.tau, grid[::2])
    return np.abs(np.sum(direct[-1].conj() * run.rotated_states[-1], axis=0))


def rwa_target_matches_collective(lz, t):
    """Max entrywise gap between the RWA target and ``H + H^A`` from the generic construction."""
    traj = lz3(lz).trajectory()
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return float(np.max(np.abs(rwa_target_stack(lz, t) - total_hamiltonian_stack(traj, COLLECTIVE, t))))

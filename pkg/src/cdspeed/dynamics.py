"""Schrodinger propagation under H(t) + H^A(t) and eigenstate-tracking diagnostics."""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .cdrive import total_hamiltonian_stack
from .errors import InvalidState, NormDrift
from .matcore import hermitian_eig_stack

NORM_DRIFT_LIMIT = 1e-6
DEFAULT_STEPS = 20_000


@dataclass(frozen=True)
class StateTrajectory:
    """Propagated states; ``states[k, :, j]`` is column ``j`` at ``times[k]``.

    ``levels[j]`` records which t = 0 eigenstate column ``j`` started from
    (``None`` for an arbitrary initial vector).
    """

    times: np.ndarray
    states: np.ndarray
    norms: np.ndarray
    levels: Sequence[Optional[int]]

    @property
    def final(self):
        return self.states[-1]

    def max_norm_drift(self):
        return float(np.max(np.abs(self.norms - 1.0)))


def half_step_grid(tau, steps):
    return np.linspace(0.0, tau, 2 * steps + 1)


def evolve_samples(hs, psi0, tau, times):
    """Run RK4 over precomputed half-step samples and package the result."""
    steps = (hs.shape[0] - 1) // 2
    out, norms = kernels.rk4_evolve(hs, psi0, tau / steps)
    drift = np.abs(norms - 1.0)
    if drift.max() > NORM_DRIFT_LIMIT:
        step = int(np.argmax(np.any(drift > NORM_DRIFT_LIMIT, axis=1)))
        raise NormDrift(float(drift.max()), step)
    return out, norms


def propagate_block(traj, protocol, psi0, steps=DEFAULT_STEPS, levels=None):
    """Propagate the columns of ``psi0`` together under one Hamiltonian."""
    if steps < 100:
        raise ValueError("steps must be at least 100")
    psi0 = np.asarray(psi0, dtype=np.complex128)
    norms0 = np.linalg.norm(psi0, axis=0)
    if np.any(np.abs(norms0 - 1.0) > 1e-10):
        raise InvalidState("initial states must be normalised")
    grid = half_step_grid(traj.tau, steps)
    hs = total_hamiltonian_stack(traj, protocol, grid)
    out, norms = evolve_samples(hs, psi0, traj.tau, grid[::2])
    if levels is None:
        levels = [None] * psi0.shape[1]
    return StateTrajectory(times=grid[::2], states=out, norms=norms, levels=list(levels))


def propagate(traj, protocol, psi0, steps=DEFAULT_STEPS):
    """Propagate a single state vector; ``protocol=None`` is the bare H(t)."""
    psi0 = np.asarray(psi0, dtype=np.complex128).reshape(-1, 1)
    return propagate_block(traj, protocol, psi0, steps)


def initial_eigenstates(traj):
    _, vectors = hermitian_eig_stack(traj.h_stack([0.0]))
    return vectors[0]


def propagate_levels(traj, protocol, steps=DEFAULT_STEPS, levels=None):
    """Launch every (or each listed) t = 0 eigenstate and propagate them together."""
    vecs = initial_eigenstates(traj)
    levels = list(range(traj.dim)) if levels is None else list(levels)
    return propagate_block(traj, protocol, vecs[:, levels], steps, levels=levels)


@dataclass(frozen=True)
class TrackingReport:
    times: np.ndarray
    levels: Sequence[int]
    fidelity: np.ndarray  # (T, len(levels))

    @property
    def min_fidelity(self):
        return self.fidelity.min(axis=0)

    @property
    def final_fidelity(self):
        return self.fidelity[-1]

    def for_level(self, n):
        return self.fidelity[:, list(self.levels).index(n)]


def overlaps_with_levels(states, vectors, levels):
    """``|<n_t|psi_j(t)>|`` where column ``j`` is compared with level ``levels[j]``."""
    ref = vectors[:, :, levels]
    return np.abs(np.sum(ref.conj() * states, axis=1))


def tracking_fidelity(trajectory_states, traj):
    """Overlap magnitudes of each propagated branch with its instantaneous eigenvector."""
    levels = trajectory_states.levels
    if any(n is None for n in levels):
        raise ValueError("tracking needs states launched from known levels")
    _, vectors = hermitian_eig_stack(traj.h_stack(trajectory_states.times))
    fid = overlaps_with_levels(trajectory_states.states, vectors, list(levels))
    return TrackingReport(times=trajectory_states.times, levels=list(levels), fidelity=fid)


def average_speed(times, speeds):
    """Trapezoidal time average ``(1/tau) int_0^tau v dt``."""
    times = np.asarray(times, dtype=float)
    speeds = np.asarray(getattr(speeds, "v", speeds), dtype=float)
    if times.shape[0] < 2:
        raise ValueError("need at least two samples")
    span = times[-1] - times[0]
    return float(np.trapezoid(speeds, times) / span)

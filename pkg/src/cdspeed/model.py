"""Time-dependent Hamiltonians and the Landau-Zener sweep presets.

Units: hbar = 1 and the sweep amplitude kappa sets the frequency scale, so
times are in units of 1/kappa unless a caller picks otherwise.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .errors import OutOfSpan
from .spinops import SpinOperators, make_spin, rotation_about_y

_SPAN_SLACK = 1e-12


@dataclass(frozen=True)
class HamiltonianTrajectory:
    """H(t) together with its analytic time derivative on ``[0, tau]``.

    ``h_stack``/``dh_stack`` are optional vectorised evaluators taking an
    array of times; when absent the scalar callables are looped.
    """

    dim: int
    tau: float
    h_at: Callable[[float], np.ndarray]
    dh_at: Callable[[float], np.ndarray]
    h_stack_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    dh_stack_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "custom"

    def check_time(self, t):
        t = np.asarray(t, dtype=float)
        slack = _SPAN_SLACK * max(self.tau, 1.0)
        if np.any(t < -slack) or np.any(t > self.tau + slack):
            raise OutOfSpan(f"time outside [0, {self.tau}]")

    def h_stack(self, ts):
        ts = np.asarray(ts, dtype=float)
        if self.h_stack_fn is not None:
            return self.h_stack_fn(ts)
        return np.stack([self.h_at(t) for t in ts]).astype(np.complex128)

    def dh_stack(self, ts):
        ts = np.asarray(ts, dtype=float)
        if self.dh_stack_fn is not None:
            return self.dh_stack_fn(ts)
        return np.stack([self.dh_at(t) for t in ts]).astype(np.complex128)


def derivative_consistency(traj, t, dt=None):
    """Max entry of |central difference of H - analytic dH| at ``t``."""
    if dt is None:
        dt = 1e-6 * traj.tau
    fd = (traj.h_at(t + dt) - traj.h_at(t - dt)) / (2 * dt)
    return float(np.max(np.abs(fd - traj.dh_at(t))))


def frozen_trajectory(h, tau=1.0):
    h = np.asarray(h, dtype=np.complex128)
    zero = np.zeros_like(h)
    return HamiltonianTrajectory(
        dim=h.shape[0],
        tau=float(tau),
        h_at=lambda t: h.copy(),
        dh_at=lambda t: zero.copy(),
        h_stack_fn=lambda ts: np.broadcast_to(h, (len(ts),) + h.shape).copy(),
        dh_stack_fn=lambda ts: np.zeros((len(ts),) + h.shape, dtype=np.complex128),
        name="frozen",
    )


@dataclass(frozen=True)
class LZ3Params:
    """Sweep parameters: minimum splitting, sweep amplitude, duration, cost exponent."""

    delta: float = 0.1
    kappa: float = 1.0
    tau: float = 1.0
    alpha: float = 2.0

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive (zero gives a level crossing)")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")


def linear_sweep(p, t):
    """Return ``(lambda(t), dlambda/dt)`` for ``lambda = kappa (2t/tau - 1)``."""
    t = np.asarray(t, dtype=float)
    lam = p.kappa * (2.0 * t / p.tau - 1.0)
    dlam = np.full_like(lam, 2.0 * p.kappa / p.tau)
    if lam.ndim == 0:
        return float(lam), float(dlam)
    return lam, dlam


def counterdiabatic_field(delta, lam, dlam):
    """V = -delta * dlambda / (delta^2 + lambda^2)."""
    return -delta * dlam / (delta**2 + lam**2)


def lz3_counterdiabatic_field(p, t):
    lam, dlam = linear_sweep(p, t)
    return counterdiabatic_field(p.delta, lam, dlam)


@dataclass(frozen=True)
class LandauZener:
    """``H(t) = delta S_x + lambda(t) S_z`` for an arbitrary spin, linear sweep."""

    params: LZ3Params = field(default_factory=LZ3Params)
    spin: float = 1.0

    @cached_property
    def ops(self) -> SpinOperators:
        return make_spin(self.spin)

    def hamiltonian(self, t):
        self.trajectory().check_time(t)
        return self._h(np.asarray([t], dtype=float))[0]

    def _h(self, ts):
        ops = self.ops
        lam, _ = linear_sweep(self.params, ts)
        lam = np.atleast_1d(lam)
        return self.params.delta * ops.sx[None] + lam[:, None, None] * ops.sz[None]

    def _dh(self, ts):
        ops = self.ops
        _, dlam = linear_sweep(self.params, ts)
        dlam = np.atleast_1d(dlam)
        return dlam[:, None, None] * ops.sz[None]

    def trajectory(self):
        return HamiltonianTrajectory(
            dim=self.ops.dim,
            tau=self.params.tau,
            h_at=lambda t: self._h(np.asarray([t], dtype=float))[0],
            dh_at=lambda t: self._dh(np.asarray([t], dtype=float))[0],
            h_stack_fn=self._h,
            dh_stack_fn=self._dh,
            name=f"lz-spin{self.spin}",
        )

    def oracle(self):
        return LZOracle(self.params, self.ops)

    def level_labels(self):
        """Labels of the magnetic numbers in ascending-energy order."""
        return [_label(m) for m in -np.diag(self.ops.sz).real]


def _label(m):
    if m == 0:
        return "0"
    mag = f"{abs(m):g}".replace(".", "_")
    return ("p" if m > 0 else "m") + mag


def lz3(params=None):
    return LandauZener(params or LZ3Params(), spin=1.0)


def lz2(params=None):
    return LandauZener(params or LZ3Params(), spin=0.5)


def lz3_hamiltonian(p, t):
    return lz3(p).hamiltonian(t)


@dataclass(frozen=True)
class LZOracle:
    """Closed-form diagonalisation by a rotation about y through ``theta = atan2(delta, lambda)``.

    Levels are indexed in ascending energy, i.e. magnetic number ``m = -S .. +S``
    with energy ``m * sqrt(delta^2 + lambda^2)``.
    """

    params: LZ3Params
    ops: SpinOperators

    @property
    def m_values(self):
        return np.sort(np.diag(self.ops.sz).real)

    def theta(self, t):
        lam, _ = linear_sweep(self.params, t)
        return np.arctan2(self.params.delta, lam)

    def dtheta(self, t):
        return lz3_counterdiabatic_field(self.params, t)

    def energies(self, t):
        lam, _ = linear_sweep(self.params, t)
        b = np.hypot(self.params.delta, lam)
        return np.multiply.outer(b, self.m_values)

    def eigenvectors(self, t):
        """Columns ``R_y(theta)|m>`` in ascending-energy order (no phase fixing)."""
        rot = rotation_about_y(self.ops, float(self.theta(t)))
        # basis index of m is (S - m); ascending energy reverses the basis
        return rot[:, ::-1]

    def metric(self, t):
        """Fubini-Study metric per level: ``theta'^2 (S(S+1) - m^2) / 2``."""
        s = float(self.ops.spin)
        w = 0.5 * (s * (s + 1) - self.m_values**2)
        return np.multiply.outer(np.asarray(self.dtheta(t)) ** 2, w)


def lz3_oracle(p):
    return lz3(p).oracle()

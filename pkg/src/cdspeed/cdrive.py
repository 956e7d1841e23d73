"""Counterdiabatic (transitionless) auxiliary Hamiltonians.

Collective driving keeps every eigenstate transitionless:
``H^A = i sum_{m != n} |m><m|d_t n><n|``.
Individual driving of level ``n`` only protects that one state:
``H_n^A = i (|d_t n_perp><n| - |n><d_t n_perp|)``.
Both expressions are exactly what the projector forms
``i sum_n d_t(P_n) P_n`` and ``i [d_t P_n, P_n]`` evaluate to, independent
of the eigenvector phases.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .adiabatic import frame_stack, spectral_frame
from .matcore import dagger


@dataclass(frozen=True)
class DriveProtocol:
    """``level=None`` means collective driving, otherwise individual driving of that level."""

    level: Optional[int] = None

    @classmethod
    def collective(cls):
        return cls(None)

    @classmethod
    def individual(cls, n):
        if n < 0:
            raise ValueError("level index must be non-negative")
        return cls(int(n))

    @property
    def is_collective(self):
        return self.level is None

    def validate(self, dim):
        if self.level is not None and not 0 <= self.level < dim:
            raise ValueError(f"level {self.level} outside [0, {dim})")

    def __str__(self):
        return "collective" if self.level is None else f"individual({self.level})"


COLLECTIVE = DriveProtocol.collective()


def collective_from(vectors, couplings):
    """Stacked collective operators from eigenvectors and couplings (any batch shape)."""
    return vectors @ (1j * couplings) @ dagger(vectors)


def individual_from(vectors, couplings, n):
    col = couplings[..., :, n]  # <m|d_t n>, zero at m = n
    k = np.zeros(couplings.shape, dtype=np.complex128)
    k[..., :, n] = col
    k[..., n, :] -= col.conj()
    return vectors @ (1j * k) @ dagger(vectors)


def build_collective(frame):
    return collective_from(frame.vectors, frame.couplings)


def build_individual(frame, n):
    DriveProtocol.individual(n).validate(frame.dim)
    return individual_from(frame.vectors, frame.couplings, n)


def auxiliary(frame, protocol):
    protocol.validate(frame.dim)
    if protocol.is_collective:
        return build_collective(frame)
    return build_individual(frame, protocol.level)


def total_hamiltonian(traj, protocol, t):
    frame = spectral_frame(traj, t)
    return traj.h_at(t) + auxiliary(frame, protocol)


def total_hamiltonian_stack(traj, protocol, ts):
    """``H(t) + H^A(t)`` on a grid; ``protocol=None`` gives the bare H(t)."""
    hs = traj.h_stack(ts)
    if protocol is None:
        return hs
    protocol.validate(traj.dim)
    _, vectors, couplings = frame_stack(traj, ts)
    if protocol.is_collective:
        return hs + collective_from(vectors, couplings)
    return hs + individual_from(vectors, couplings, protocol.level)

"""Angular momentum matrices in the S_z eigenbasis, ordered m = +S, ..., -S (hbar = 1)."""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .matcore import MAX_DIM, hermitian_eig


@dataclass(frozen=True)
class SpinOperators:
    spin: Fraction
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray

    @property
    def dim(self):
        return self.sz.shape[0]

    @property
    def identity(self):
        return np.eye(self.dim, dtype=np.complex128)

    def casimir(self):
        return self.sx @ self.sx + self.sy @ self.sy + self.sz @ self.sz


def _as_spin(S):
    twice = Fraction(S).limit_denominator(1000) * 2
    if twice.denominator != 1 or twice < 0 or abs(float(twice) - 2 * float(S)) > 1e-12:
        raise ValueError(f"spin must be a non-negative half-integer, got {S!r}")
    return twice / 2


def make_spin(S):
    """Build S_x, S_y, S_z for spin ``S`` from the ladder operators."""
    spin = _as_spin(S)
    dim = int(2 * spin) + 1
    if dim > MAX_DIM:
        raise ValueError(f"spin {spin} gives dimension {dim} > {MAX_DIM}")
    s = float(spin)
    m = s - np.arange(dim)
    # <m+1|S+|m> sits one row above the diagonal since m decreases down the basis.
    ladder = np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1))
    splus = np.diag(ladder, 1).astype(np.complex128)
    sminus = splus.conj().T
    sx = 0.5 * (splus + sminus)
    sy = -0.5j * (splus - sminus)
    sz = np.diag(m).astype(np.complex128)
    return SpinOperators(spin=spin, sx=sx, sy=sy, sz=sz)


def rotation_about_y(ops, theta):
    """``exp(-i theta S_y)`` via the spectral decomposition of S_y."""
    eig = hermitian_eig(ops.sy)
    # The spectrum of S_y is exactly {m}; snapping removes solver round-off.
    values = np.round(eig.values * 2) / 2
    vectors = eig.vectors
    return (vectors * np.exp(-1j * theta * values)) @ vectors.conj().T

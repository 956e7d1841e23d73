"""Instantaneous eigenframes and the tangent couplings <m_t|d_t n_t>.

Couplings use the nondegenerate identity
``<m|d_t n> = <m|d_t H|n> / (E_n - E_m)`` for ``m != n`` and the
parallel-transport gauge ``<n|d_t n> = 0`` on the diagonal, so nothing here
depends on eigenvector phases except through the trivially covariant
``conj(phi_m) phi_n`` factor.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BranchMistracking, DegenerateSpectrum
from .matcore import EigenSystem, dagger, frobenius_norm, hermitian_eig, hermitian_eig_stack

GAP_RTOL = 1e-8


@dataclass(frozen=True)
class SpectralFrame:
    t: Optional[float]
    eigs: EigenSystem
    couplings: np.ndarray
    min_gap: float

    @property
    def dim(self):
        return self.eigs.dim

    @property
    def values(self):
        return self.eigs.values

    @property
    def vectors(self):
        return self.eigs.vectors


def _coupling_matrix(values, vectors, dh):
    """Couplings for a stack: ``values (B,d)``, ``vectors (B,d,d)``, ``dh (B,d,d)``."""
    proj = dagger(vectors) @ dh @ vectors
    gaps = values[:, None, :] - values[:, :, None]  # (E_n - E_m) at [m, n]
    d = values.shape[1]
    off = ~np.eye(d, dtype=bool)
    out = np.zeros_like(proj)
    safe = np.where(off[None], gaps, 1.0)
    out[:, off] = (proj / safe)[:, off]
    return out


def _check_gaps(values, h_norms, ts=None):
    d = values.shape[1]
    if d < 2:
        return np.full(values.shape[0], np.inf)
    gaps = np.min(np.diff(values, axis=1), axis=1)
    thresh = GAP_RTOL * h_norms
    bad = ~(gaps > thresh)
    if np.any(bad):
        i = int(np.argmax(bad))
        t = None if ts is None else float(np.asarray(ts)[i])
        raise DegenerateSpectrum(float(gaps[i]), float(thresh[i]), t)
    return gaps


def frame_from_eigensystem(eigs, dh, t=None, h_norm=None):
    """Build a frame from a given eigenbasis (any phase convention)."""
    values = np.asarray(eigs.values, dtype=float)[None]
    vectors = np.asarray(eigs.vectors, dtype=np.complex128)[None]
    if h_norm is None:
        h_norm = float(np.sqrt(np.sum(values**2)))
    gaps = _check_gaps(values, np.array([h_norm]), None if t is None else [t])
    c = _coupling_matrix(values, vectors, np.asarray(dh, dtype=np.complex128)[None])[0]
    return SpectralFrame(t=t, eigs=eigs, couplings=c, min_gap=float(gaps[0]))


def frame_at(h, dh, t=None):
    """Spectral frame of a static pair (H, dH/dt)."""
    eigs = hermitian_eig(h)
    return frame_from_eigensystem(eigs, dh, t=t, h_norm=float(frobenius_norm(h)))


def spectral_frame(traj, t):
    traj.check_time(t)
    return frame_at(traj.h_at(t), traj.dh_at(t), t=float(t))


def frame_stack(traj, ts):
    """Vectorised frames along a time grid.

    Returns ``(values, vectors, couplings)`` with shapes ``(T,d)``,
    ``(T,d,d)``, ``(T,d,d)``.
    """
    ts = np.asarray(ts, dtype=float)
    traj.check_time(ts)
    hs = traj.h_stack(ts)
    dhs = traj.dh_stack(ts)
    values, vectors = hermitian_eig_stack(hs)
    _check_gaps(values, frobenius_norm(hs), ts)
    return values, vectors, _coupling_matrix(values, vectors, dhs)


def frames(traj, ts):
    values, vectors, couplings = frame_stack(traj, ts)
    gaps = np.min(np.diff(values, axis=1), axis=1) if values.shape[1] > 1 else np.full(len(ts), np.inf)
    out = []
    for i, t in enumerate(np.asarray(ts, dtype=float)):
        eigs = EigenSystem(values=values[i], vectors=vectors[i], min_gap=float(gaps[i]), degenerate=False)
        out.append(SpectralFrame(t=float(t), eigs=eigs, couplings=couplings[i], min_gap=float(gaps[i])))
    return out


def _aligned_vectors(ref, other):
    overlaps = np.sum(ref.conj() * other, axis=0)
    mags = np.abs(overlaps)
    if np.any(mags < 0.5):
        raise BranchMistracking(
            f"eigenvector overlap {mags.min():.3f} < 0.5 across the finite-difference step"
        )
    return other * (overlaps.conj() / mags)


def fd_derivative_vectors(traj, t, dt):
    """Central-difference d|n>/dt with neighbours phase-aligned to the frame at ``t``."""
    traj.check_time([t - dt, t + dt])
    center = hermitian_eig(traj.h_at(t))
    _check_gaps(center.values[None], np.array([frobenius_norm(traj.h_at(t))]), [t])
    plus = _aligned_vectors(center.vectors, hermitian_eig(traj.h_at(t + dt)).vectors)
    minus = _aligned_vectors(center.vectors, hermitian_eig(traj.h_at(t - dt)).vectors)
    return center, (plus - minus) / (2 * dt)


def fd_coupling_oracle(traj, t, dt):
    """Couplings from finite-differenced eigenvectors; diagonal zeroed.

    Independent of the perturbative identity used by :func:`spectral_frame`.
    """
    center, dvec = fd_derivative_vectors(traj, t, dt)
    c = center.vectors.conj().T @ dvec
    np.fill_diagonal(c, 0.0)
    return c


def fd_transverse_speed_sq(traj, t, dt):
    """<d n_perp | d n_perp> per level from finite-differenced eigenvectors."""
    center, dvec = fd_derivative_vectors(traj, t, dt)
    v = center.vectors
    par = np.sum(v.conj() * dvec, axis=0)
    perp = dvec - v * par
    return np.sum(np.abs(perp) ** 2, axis=0)

"""Small dense complex linear algebra: Hermitian checks, eigensystems, norms.

Operators are plain ``complex128`` numpy arrays of shape ``(n, n)`` with
``n <= MAX_DIM``; stacks of them carry a leading batch axis.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionMismatch, EigenNonConvergence, NotHermitian

MAX_DIM = 16
HERMITIAN_RTOL = 1e-12
DEGENERACY_RTOL = 1e-10


def as_matrix(a):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise DimensionMismatch(f"dimension {a.shape[0]} exceeds cap {MAX_DIM}")
    return a


def hermiticity_error(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a - np.swapaxes(a.conj(), -1, -2)), initial=0.0))


def as_hermitian(a, rtol=HERMITIAN_RTOL):
    """Validate ``a`` as a Hermitian operator and return it as complex128."""
    a = as_matrix(a)
    scale = float(np.max(np.abs(a), initial=0.0))
    err = hermiticity_error(a)
    if err > rtol * scale:
        raise NotHermitian(f"max |A - A^H| = {err:.3e} exceeds {rtol:g} * max|A|")
    return a


@dataclass(frozen=True)
class EigenSystem:
    values: np.ndarray
    vectors: np.ndarray
    min_gap: float
    degenerate: bool
    sweeps: int = 0

    @property
    def dim(self):
        return self.values.shape[0]

    def reconstruct(self):
        return (self.vectors * self.values) @ self.vectors.conj().T


def _min_gaps(values):
    if values.shape[-1] < 2:
        return np.full(values.shape[:-1], np.inf)
    return np.min(np.diff(values, axis=-1), axis=-1)


def hermitian_eig_stack(stack):
    """Batched eigendecomposition; returns ``(values, vectors)`` stacks.

    Raises
    ------
    EigenNonConvergence
        If any matrix fails to converge within the sweep budget.
    """
    stack = np.asarray(stack, dtype=np.complex128)
    if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
        raise DimensionMismatch(f"expected (B, n, n) stack, got {stack.shape}")
    if stack.shape[1] > MAX_DIM:
        raise DimensionMismatch(f"dimension {stack.shape[1]} exceeds cap {MAX_DIM}")
    values, vectors, sweeps, off = kernels.jacobi_eigh(stack)
    bad = off > kernels.JACOBI_TOL
    if np.any(bad):
        i = int(np.argmax(off))
        raise EigenNonConvergence(int(sweeps[i]), float(off[i]))
    return values, vectors


def hermitian_eig(a):
    """Eigen-decompose a Hermitian matrix.

    Eigenvalues come back ascending. Each eigenvector has its largest
    component made real and positive, so identical input gives identical
    output. ``degenerate`` is set when the smallest gap is below
    ``1e-10 * ||A||``.
    """
    a = as_hermitian(a)
    values, vectors, sweeps, off = kernels.jacobi_eigh(a[None])
    if off[0] > kernels.JACOBI_TOL:
        raise EigenNonConvergence(int(sweeps[0]), float(off[0]))
    gap = float(_min_gaps(values[0]))
    norm = frobenius_norm(a)
    return EigenSystem(
        values=values[0],
        vectors=vectors[0],
        min_gap=gap,
        degenerate=bool(gap < DEGENERACY_RTOL * norm),
        sweeps=int(sweeps[0]),
    )


def frobenius_norm(a):
    """``sqrt(tr(A^H A))``; works on a single matrix or a stack."""
    a = np.asarray(a)
    return np.sqrt(np.sum(a.real**2 + a.imag**2, axis=(-2, -1)))


def commutator(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.shape[-1] != a.shape[-2]:
        raise DimensionMismatch(f"cannot commute shapes {a.shape} and {b.shape}")
    return a @ b - b @ a


def dagger(a):
    return np.swapaxes(np.conj(a), -1, -2)

"""Hot numerical kernels: batched Hermitian Jacobi eigensolver and fixed-step RK4.

Each kernel has a numba-compiled implementation and a pure-numpy one. The
numba path is used unless the environment variable ``CDSPEED_DISABLE_NUMBA``
is set to a non-empty value other than ``0``, or numba cannot be imported.
The flag is read on every dispatch so it can be toggled at runtime (the test
suite and ``benchmarks/bench_kernels.py`` rely on that).
"""

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

ENV_FLAG = "CDSPEED_DISABLE_NUMBA"

JACOBI_TOL = 1e-15
JACOBI_MAX_SWEEPS = 60
# Components within this relative margin of the largest magnitude count as tied.
_PHASE_TIE = 1e-9


def numba_enabled():
    if not HAVE_NUMBA:
        return False
    return os.environ.get(ENV_FLAG, "") in ("", "0")


def _njit(func):
    if HAVE_NUMBA:
        return numba.njit(cache=True, nogil=True)(func)
    return func


# --------------------------------------------------------------------------
# Jacobi eigensolver
# --------------------------------------------------------------------------


@_njit
def _jacobi_numba(a, tol, max_sweeps):
    nb, n, _ = a.shape
    w = np.empty((nb, n))
    vecs = np.zeros((nb, n, n), dtype=np.complex128)
    sweeps_used = np.zeros(nb, dtype=np.int64)
    off_final = np.zeros(nb)
    for b in range(nb):
        A = a[b].copy()
        V = np.zeros((n, n), dtype=np.complex128)
        for i in range(n):
            V[i, i] = 1.0
        scale = 0.0
        for i in range(n):
            for j in range(n):
                scale += A[i, j].real ** 2 + A[i, j].imag ** 2
        scale = np.sqrt(scale)
        sweep = 0
        while True:
            off = 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    off += A[p, q].real ** 2 + A[p, q].imag ** 2
            off = np.sqrt(off)
            if off <= tol * scale or sweep >= max_sweeps:
                break
            sweep += 1
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[p, q]
                    mag = abs(apq)
                    if mag <= tol * 1e-3 * scale:
                        A[p, q] = 0.0
                        A[q, p] = 0.0
                        continue
                    ph = apq / mag
                    cph = ph.conjugate()
                    theta = (A[q, q].real - A[p, p].real) / (2.0 * mag)
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                    c = 1.0 / np.sqrt(t * t + 1.0)
                    s = t * c
                    for k in range(n):
                        akp = A[k, p]
                        akq = A[k, q]
                        A[k, p] = akp * c - akq * s * cph
                        A[k, q] = akp * s + akq * c * cph
                    for k in range(n):
                        apk = A[p, k]
                        aqk = A[q, k]
                        A[p, k] = apk * c - aqk * s * ph
                        A[q, k] = apk * s + aqk * c * ph
                    for k in range(n):
                        vkp = V[k, p]
                        vkq = V[k, q]
                        V[k, p] = vkp * c - vkq * s * cph
                        V[k, q] = vkp * s + vkq * c * cph
                    A[p, q] = 0.0
                    A[q, p] = 0.0
        sweeps_used[b] = sweep
        off_final[b] = off / scale if scale > 0.0 else 0.0
        for i in range(n):
            w[b, i] = A[i, i].real
        order = np.argsort(w[b], kind="mergesort")
        wb = w[b].copy()
        for i in range(n):
            w[b, i] = wb[order[i]]
            best = 0.0
            for k in range(n):
                m = abs(V[k, order[i]])
                if m > best:
                    best = m
            lead = 0
            for k in range(n):
                if abs(V[k, order[i]]) >= best * (1.0 - 1e-9):
                    lead = k
                    break
            x = V[lead, order[i]]
            fix = x.conjugate() / abs(x)
            for k in range(n):
                vecs[b, k, i] = V[k, order[i]] * fix
            vecs[b, lead, i] = abs(x)
    return w, vecs, sweeps_used, off_final


def _jacobi_numpy(a, tol, max_sweeps):
    A = np.array(a, dtype=np.complex128, copy=True)
    nb, n, _ = A.shape
    V = np.broadcast_to(np.eye(n, dtype=np.complex128), A.shape).copy()
    scale = np.sqrt(np.sum(np.abs(A) ** 2, axis=(1, 2)))
    iu = np.triu_indices(n, 1)
    sweeps_used = np.zeros(nb, dtype=np.int64)
    active = np.ones(nb, dtype=bool)
    off = np.zeros(nb)
    for _ in range(max_sweeps + 1):
        off = np.sqrt(np.sum(np.abs(A[:, iu[0], iu[1]]) ** 2, axis=1))
        active = off > tol * scale
        if not active.any() or sweeps_used.max(initial=0) >= max_sweeps:
            break
        sweeps_used[active] += 1
        for p, q in zip(*iu):
            apq = A[:, p, q]
            mag = np.abs(apq)
            # converged members get an exact identity rotation so results do not depend on batching
            skip = (mag <= tol * 1e-3 * scale) | ~active
            safe = np.where(skip, 1.0, mag)
            ph = np.where(skip, 1.0, apq / safe)
            cph = ph.conj()
            theta = (A[:, q, q].real - A[:, p, p].real) / (2.0 * safe)
            t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(theta == 0.0, 1.0, t)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            c = np.where(skip, 1.0, c)
            s = np.where(skip, 0.0, s)
            c_ = c[:, None]
            s_ = s[:, None]
            akp = A[:, :, p].copy()
            akq = A[:, :, q].copy()
            A[:, :, p] = akp * c_ - akq * (s * cph)[:, None]
            A[:, :, q] = akp * s_ + akq * (c * cph)[:, None]
            apk = A[:, p, :].copy()
            aqk = A[:, q, :].copy()
            A[:, p, :] = apk * c_ - aqk * (s * ph)[:, None]
            A[:, q, :] = apk * s_ + aqk * (c * ph)[:, None]
            vkp = V[:, :, p].copy()
            vkq = V[:, :, q].copy()
            V[:, :, p] = vkp * c_ - vkq * (s * cph)[:, None]
            V[:, :, q] = vkp * s_ + vkq * (c * cph)[:, None]
            A[active, p, q] = 0.0
            A[active, q, p] = 0.0
    w = np.real(np.diagonal(A, axis1=1, axis2=2)).copy()
    order = np.argsort(w, axis=1, kind="mergesort")
    w = np.take_along_axis(w, order, axis=1)
    V = np.take_along_axis(V, order[:, None, :], axis=2)
    mags = np.abs(V)
    best = mags.max(axis=1, keepdims=True)
    lead = np.argmax(mags >= best * (1.0 - _PHASE_TIE), axis=1)
    x = np.take_along_axis(V, lead[:, None, :], axis=1)
    V = V * (x.conj() / np.abs(x))
    np.put_along_axis(V, lead[:, None, :], np.abs(x).astype(np.complex128), axis=1)
    off_rel = np.where(scale > 0, off / np.where(scale > 0, scale, 1.0), 0.0)
    return w, V, sweeps_used, off_rel


def jacobi_eigh(stack, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigen-decompose a stack of Hermitian matrices by cyclic complex Jacobi.

    Parameters
    ----------
    stack : ndarray, shape (B, n, n)
        Hermitian matrices. Hermiticity is not checked here.

    Returns
    -------
    values : ndarray, shape (B, n)
        Ascending eigenvalues.
    vectors : ndarray, shape (B, n, n)
        Orthonormal eigenvectors in columns; the largest-magnitude component
        of each column (first one on ties) is real and positive.
    sweeps : ndarray of int, shape (B,)
    off : ndarray, shape (B,)
        Final relative off-diagonal norm; above ``tol`` means non-convergence.
    """
    a = np.ascontiguousarray(stack, dtype=np.complex128)
    if numba_enabled():
        return _jacobi_numba(a, tol, max_sweeps)
    return _jacobi_numpy(a, tol, max_sweeps)


# --------------------------------------------------------------------------
# RK4 propagator
# --------------------------------------------------------------------------


@_njit
def _rk4_numba(hs, psi0, h):
    nsteps = (hs.shape[0] - 1) // 2
    d, m = psi0.shape
    out = np.empty((nsteps + 1, d, m), dtype=np.complex128)
    norms = np.empty((nsteps + 1, m))
    psi = psi0.copy()
    k1 = np.empty((d, m), dtype=np.complex128)
    k2 = np.empty((d, m), dtype=np.complex128)
    k3 = np.empty((d, m), dtype=np.complex128)
    k4 = np.empty((d, m), dtype=np.complex128)
    tmp = np.empty((d, m), dtype=np.complex128)
    out[0] = psi
    for c in range(m):
        acc = 0.0
        for i in range(d):
            acc += psi[i, c].real ** 2 + psi[i, c].imag ** 2
        norms[0, c] = np.sqrt(acc)
    for step in range(nsteps):
        H0 = hs[2 * step]
        Hm = hs[2 * step + 1]
        H1 = hs[2 * step + 2]
        for i in range(d):
            for c in range(m):
                acc = 0j
                for j in range(d):
                    acc += H0[i, j] * psi[j, c]
                k1[i, c] = -1j * acc
        for i in range(d):
            for c in range(m):
                tmp[i, c] = psi[i, c] + 0.5 * h * k1[i, c]
        for i in range(d):
            for c in range(m):
                acc = 0j
                for j in range(d):
                    acc += Hm[i, j] * tmp[j, c]
                k2[i, c] = -1j * acc
        for i in range(d):
            for c in range(m):
                tmp[i, c] = psi[i, c] + 0.5 * h * k2[i, c]
        for i in range(d):
            for c in range(m):
                acc = 0j
                for j in range(d):
                    acc += Hm[i, j] * tmp[j, c]
                k3[i, c] = -1j * acc
        for i in range(d):
            for c in range(m):
                tmp[i, c] = psi[i, c] + h * k3[i, c]
        for i in range(d):
            for c in range(m):
                acc = 0j
                for j in range(d):
                    acc += H1[i, j] * tmp[j, c]
                k4[i, c] = -1j * acc
        for i in range(d):
            for c in range(m):
                psi[i, c] += h / 6.0 * (k1[i, c] + 2.0 * k2[i, c] + 2.0 * k3[i, c] + k4[i, c])
        out[step + 1] = psi
        for c in range(m):
            acc = 0.0
            for i in range(d):
                acc += psi[i, c].real ** 2 + psi[i, c].imag ** 2
            norms[step + 1, c] = np.sqrt(acc)
    return out, norms


def _rk4_numpy(hs, psi0, h):
    nsteps = (hs.shape[0] - 1) // 2
    gen = -1j * hs
    out = np.empty((nsteps + 1,) + psi0.shape, dtype=np.complex128)
    psi = psi0.copy()
    out[0] = psi
    for step in range(nsteps):
        g0, gm, g1 = gen[2 * step], gen[2 * step + 1], gen[2 * step + 2]
        k1 = g0 @ psi
        k2 = gm @ (psi + 0.5 * h * k1)
        k3 = gm @ (psi + 0.5 * h * k2)
        k4 = g1 @ (psi + h * k3)
        psi = psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[step + 1] = psi
    norms = np.sqrt(np.sum(np.abs(out) ** 2, axis=1))
    return out, norms


def rk4_evolve(hs, psi0, h):
    """Integrate ``i dpsi/dt = H(t) psi`` with classical RK4.

    ``hs`` holds the Hamiltonian on the half-step grid ``t0 + j*h/2`` for
    ``j = 0 .. 2N``; ``psi0`` is a ``(d, m)`` block of states propagated
    together. Returns the ``(N+1, d, m)`` states and ``(N+1, m)`` norms.
    """
    hs = np.ascontiguousarray(hs, dtype=np.complex128)
    psi0 = np.ascontiguousarray(psi0, dtype=np.complex128)
    if hs.shape[0] < 3 or hs.shape[0] % 2 == 0:
        raise ValueError("need an odd number (>= 3) of half-step Hamiltonian samples")
    if numba_enabled():
        return _rk4_numba(hs, psi0, float(h))
    return _rk4_numpy(hs, psi0, float(h))

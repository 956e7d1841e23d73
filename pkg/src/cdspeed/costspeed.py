"""Cost rates, geometric speeds and the relations linking them.

All quantities are in hbar = 1 units. Level indices count from the ground
state of the instantaneous spectrum.

The per-level Fubini-Study metric is evaluated in the gauge-invariant form
``g_n = sum_{m != n} |<m|d_t n>|^2``, which is what
``<d_t n|d_t n> - |<n|d_t n>|^2`` equals for any eigenvector phase.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .adiabatic import frame_stack
from .cdrive import DriveProtocol
from .errors import InvalidState, PopulationBoundary
from .matcore import frobenius_norm, hermitian_eig_stack

POPULATION_FLOOR = 1e-15
STRICT_COUPLING = 1e-12


# -- cost rates ---------------------------------------------------------------


def cost_rate_from_operator(ha, alpha=2.0):
    """``||H^A||_F ** alpha``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return frobenius_norm(ha) ** alpha


def _metric_from_couplings(couplings):
    return np.sum(np.abs(couplings) ** 2, axis=-2)


def fubini_study_metric(frame, n):
    return float(_metric_from_couplings(frame.couplings)[n])


def collective_cost_rate(frame, alpha=2.0):
    return float(np.sum(_metric_from_couplings(frame.couplings)) ** (alpha / 2))


def individual_cost_rate(frame, n, alpha=2.0):
    return float((2.0 * _metric_from_couplings(frame.couplings)[n]) ** (alpha / 2))


@dataclass(frozen=True)
class CostReport:
    t: float
    alpha: float
    collective_rate: float
    individual_rates: np.ndarray


def cost_report(frame, alpha=2.0):
    g = _metric_from_couplings(frame.couplings)
    return CostReport(
        t=frame.t,
        alpha=float(alpha),
        collective_rate=float(np.sum(g) ** (alpha / 2)),
        individual_rates=(2.0 * g) ** (alpha / 2),
    )


def cost_relation_residual(report):
    """``dC - [1/2 sum_n dC_n^(2/alpha)]^(alpha/2)``; zero for every frame."""
    a = report.alpha
    combined = (0.5 * np.sum(report.individual_rates ** (2.0 / a))) ** (a / 2)
    return float(report.collective_rate - combined)


def equality_condition_gap(report, k):
    """``dC_k - [sum_{n != k} dC_n^(2/alpha)]^(alpha/2)``.

    Zero exactly when driving level ``k`` alone costs as much as driving
    every level.
    """
    a = report.alpha
    rates = report.individual_rates
    others = np.sum(np.delete(rates, k) ** (2.0 / a)) ** (a / 2)
    return float(rates[k] - others)


def equality_condition_consistency(report, k):
    """Residual of ``dC_k^(2/a) - dC^(2/a) = (dC_k^(2/a) - sum_{n!=k} dC_n^(2/a)) / 2``.

    The identity ties the sign and zero of :func:`equality_condition_gap` to
    whether ``dC_k`` equals the collective rate.
    """
    a = report.alpha
    x = report.individual_rates ** (2.0 / a)
    lhs = x[k] - report.collective_rate ** (2.0 / a)
    rhs = 0.5 * (x[k] - (np.sum(x) - x[k]))
    return float(lhs - rhs)


# -- metrics and speeds -------------------------------------------------------


def pure_state_metric(phi, dphi, tol=1e-10):
    """``<d phi_perp|d phi_perp>`` for a normalised state and its time derivative."""
    phi = np.asarray(phi, dtype=np.complex128)
    dphi = np.asarray(dphi, dtype=np.complex128)
    norm = np.linalg.norm(phi)
    if abs(norm - 1.0) > tol:
        raise InvalidState(f"state norm {norm:.12f} is not 1")
    perp = dphi - np.vdot(phi, dphi) * phi
    return float(np.vdot(perp, perp).real)


def fisher_metric_spectral(p, dp, couplings):
    """Quantum Fisher information metric of ``rho = sum_j p_j |j><j|``.

    ``(1/4) sum_j dp_j^2 / p_j + (1/2) sum_{j != l} (p_j - p_l)^2 / (p_j + p_l) |<j|d_t l>|^2``
    Populations below ``POPULATION_FLOOR`` are dropped; doing so with a
    non-zero rate raises :class:`PopulationBoundary`.
    """
    p = np.asarray(p, dtype=float)
    dp = np.asarray(dp, dtype=float)
    keep = p > POPULATION_FLOOR
    if np.any(~keep & (np.abs(dp) > 0)):
        raise PopulationBoundary("vanishing population with non-zero rate of change")
    classical = 0.25 * np.sum(dp[keep] ** 2 / p[keep])
    pj = p[:, None]
    pl = p[None, :]
    total = pj + pl
    pair = keep[:, None] | keep[None, :]
    np.fill_diagonal(pair, False)
    weights = np.zeros_like(total)
    weights[pair] = (pj - pl)[pair] ** 2 / total[pair]
    quantum = 0.5 * np.sum(weights * np.abs(couplings) ** 2)
    return float(classical + quantum)


@dataclass(frozen=True)
class CanonicalEnsemble:
    beta_scaled: float
    populations: np.ndarray
    energies: np.ndarray


def gibbs_populations(energies, beta):
    e = np.asarray(energies, dtype=float)
    if beta == np.inf:
        w = (e == e.min()).astype(float)
    else:
        w = np.exp(-beta * (e - e.min()))
    return w / w.sum()


def canonical_populations(traj, beta_scaled, kappa=1.0):
    """Gibbs populations of the t = 0 spectrum, ascending-energy order.

    ``beta_scaled`` is ``hbar kappa / (k T)``, so level ``n`` is weighted by
    ``exp(-E_n(0) * beta_scaled / kappa)``.
    """
    if beta_scaled < 0:
        raise ValueError("beta_scaled must be non-negative")
    values, _ = hermitian_eig_stack(traj.h_stack([0.0]))
    e = values[0]
    return CanonicalEnsemble(float(beta_scaled), gibbs_populations(e, beta_scaled / kappa), e)


@dataclass(frozen=True)
class SpeedReport:
    t: float
    v: float
    v_n: np.ndarray
    populations: np.ndarray

    @property
    def chain_bound(self):
        """``sqrt(sum_n p_n v_n^2)``, the upper bound on ``v``."""
        return float(np.sqrt(np.sum(self.populations * self.v_n**2)))


def ensemble_metric(couplings, p):
    """Fisher metric with frozen populations (no classical term)."""
    return fisher_metric_spectral(p, np.zeros_like(p), couplings)


def ensemble_speed(frame, populations):
    p = np.asarray(getattr(populations, "populations", populations), dtype=float)
    if abs(p.sum() - 1.0) > 1e-12 or np.any(p < 0):
        raise InvalidState("populations must be non-negative and sum to 1")
    g = _metric_from_couplings(frame.couplings)
    return SpeedReport(
        t=frame.t,
        v=float(np.sqrt(ensemble_metric(frame.couplings, p))),
        v_n=np.sqrt(g),
        populations=p,
    )


def speed_cost_check_individual(frame, n, alpha=2.0):
    """``v_n - dC_n^(1/alpha) / sqrt(2)``; vanishes identically."""
    v_n = np.sqrt(fubini_study_metric(frame, n))
    return float(v_n - individual_cost_rate(frame, n, alpha) ** (1.0 / alpha) / np.sqrt(2.0))


def speed_cost_check_collective(frame, populations, alpha=2.0):
    """``dC^(1/alpha) - v``; strictly positive whenever the frame moves."""
    v = ensemble_speed(frame, populations).v
    return float(collective_cost_rate(frame, alpha) ** (1.0 / alpha) - v)


# -- sweeps and integrals -----------------------------------------------------


def rates_along(traj, ts, alpha=2.0):
    """Collective and per-level cost rates and per-level metrics on a grid.

    Returns ``(dC (T,), dC_n (T, d), g_n (T, d), couplings (T, d, d))``.
    """
    _, _, couplings = frame_stack(traj, ts)
    g = _metric_from_couplings(couplings)
    dc = np.sum(g, axis=1) ** (alpha / 2)
    dcn = (2.0 * g) ** (alpha / 2)
    return dc, dcn, g, couplings


def cost_integral(traj, protocol=None, alpha=2.0, steps=2001):
    """``int_0^tau ||H^A||^alpha dt`` by composite Simpson on ``steps`` nodes."""
    if steps < 2:
        raise ValueError("steps must be at least 2")
    protocol = protocol or DriveProtocol.collective()
    protocol.validate(traj.dim)
    ts = np.linspace(0.0, traj.tau, steps)
    dc, dcn, _, _ = rates_along(traj, ts, alpha)
    y = dc if protocol.is_collective else dcn[:, protocol.level]
    return float(simpson(y, x=ts))


# -- fidelity -----------------------------------------------------------------


def _psd_sqrt(rho, name):
    rho = np.asarray(rho, dtype=np.complex128)
    rho = 0.5 * (rho + rho.conj().T)
    w, v = np.linalg.eigh(rho)
    if w.min() < -1e-12:
        raise InvalidState(f"{name} has eigenvalue {w.min():.3e} < 0")
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        raise InvalidState(f"{name} trace is {np.trace(rho).real:.12f}")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def _fidelity_mp(rho, sigma, dps):
    import mpmath

    with mpmath.workdps(dps):

        def herm(a):
            m = mpmath.matrix(np.asarray(a, dtype=np.complex128).tolist())
            m = (m + m.H) / 2
            tr = sum(m[i, i] for i in range(m.rows))
            return m / tr

        r = herm(rho)
        e, q = mpmath.eighe(r)
        root = q * mpmath.diag([mpmath.sqrt(max(x, 0)) for x in e]) * q.H
        m = root * herm(sigma) * root
        w, _ = mpmath.eighe((m + m.H) / 2)
        return float(min(mpmath.mpf(1), mpmath.fsum(mpmath.sqrt(max(x, 0)) for x in w)))


def uhlmann_fidelity(rho, sigma, dps=None):
    """``tr sqrt(sqrt(rho) sigma sqrt(rho))``.

    With ``dps`` set, the evaluation runs in mpmath at that many decimal
    digits after renormalising both traces, which resolves infidelities far
    below double-precision round-off (needed when ``1 - F ~ 1e-13``).
    """
    s = _psd_sqrt(rho, "rho")
    _psd_sqrt(sigma, "sigma")
    if dps is not None:
        return _fidelity_mp(rho, sigma, dps)
    m = s @ np.asarray(sigma, dtype=np.complex128) @ s
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return float(min(1.0, np.sum(np.sqrt(np.clip(w, 0.0, None)))))


def density_matrix(vectors, p):
    """``sum_n p_n |v_n><v_n|`` from eigenvector columns."""
    return (vectors * np.asarray(p)) @ vectors.conj().T

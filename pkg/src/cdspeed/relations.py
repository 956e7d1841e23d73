"""Randomised check of the cost-cost, speed-speed and speed-cost relations.

Each sample draws a random Hermitian ``H`` and ``dH/dt`` (dimension 2-6),
an exponent ``alpha`` and random populations, builds the spectral frame
and evaluates every relation both from the closed forms and from the
explicitly constructed auxiliary operators.
"""

from dataclasses import dataclass, field

import numpy as np

from .adiabatic import frame_at
from .cdrive import build_collective, build_individual
from .costspeed import (
    STRICT_COUPLING,
    cost_relation_residual,
    cost_report,
    cost_rate_from_operator,
    ensemble_speed,
    equality_condition_consistency,
    equality_condition_gap,
    speed_cost_check_collective,
    speed_cost_check_individual,
)

RTOL = 1e-10
ALPHAS = (1.0, 2.0, 4.0)


def random_hermitian(rng, d, scale=1.0):
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (x + x.conj().T)


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def lz_pattern_pair(rng):
    """Random 3-level (H, dH) whose eigenbasis couples only the middle level to the outer two."""
    e = np.sort(rng.normal(size=3)) + np.array([-1.0, 0.0, 1.0])
    dh = random_hermitian(rng, 3)
    dh[0, 2] = dh[2, 0] = 0.0
    u = random_unitary(rng, 3)
    return u @ np.diag(e).astype(np.complex128) @ u.conj().T, u @ dh @ u.conj().T


@dataclass
class FuzzReport:
    seed: int
    samples: int
    max_residuals: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.violations

    def note(self, key, value):
        self.max_residuals[key] = max(self.max_residuals.get(key, 0.0), float(value))

    def as_dict(self):
        return {
            "seed": self.seed,
            "samples": self.samples,
            "passed": self.passed,
            "tolerance": RTOL,
            "max_residuals": dict(sorted(self.max_residuals.items())),
            "counts": dict(sorted(self.counts.items())),
            "violations": self.violations,
        }


def _rel(x, scale):
    return abs(x) / scale if scale > 0 else abs(x)


def check_frame(frame, alpha, p, report, tag, sample=None):
    """Evaluate every relation on one frame, recording residuals and violations."""
    bad = []
    cr = cost_report(frame, alpha)
    dc = cr.collective_rate
    d = frame.dim

    r6 = _rel(cost_relation_residual(cr), dc)
    report.note("cost_relation", r6)
    if r6 > RTOL:
        bad.append(("cost_relation", r6))

    op_c = _rel(cost_rate_from_operator(build_collective(frame), alpha) - dc, dc)
    report.note("operator_collective", op_c)
    if op_c > RTOL:
        bad.append(("operator_collective", op_c))

    xs = cr.individual_rates ** (2.0 / alpha)
    for k in range(d):
        r7 = _rel(equality_condition_consistency(cr, k), max(xs.sum(), dc ** (2.0 / alpha)))
        report.note("equality_condition_consistency", r7)
        if r7 > RTOL:
            bad.append((f"equality_condition_consistency[{k}]", r7))

        dck = cr.individual_rates[k]
        op_k = _rel(cost_rate_from_operator(build_individual(frame, k), alpha) - dck, dck)
        report.note("operator_individual", op_k)
        if op_k > RTOL:
            bad.append((f"operator_individual[{k}]", op_k))

        v_k = np.sqrt(np.sum(np.abs(frame.couplings[:, k]) ** 2))
        r14 = _rel(speed_cost_check_individual(frame, k, alpha), v_k)
        report.note("speed_cost_individual", r14)
        if r14 > RTOL:
            bad.append((f"speed_cost_individual[{k}]", r14))

    sp = ensemble_speed(frame, p)
    over = (sp.v - sp.chain_bound) / max(sp.chain_bound, 1e-300)
    report.note("speed_chain_excess", max(over, 0.0))
    if over > RTOL:
        bad.append(("speed_chain", over))
    if sp.chain_bound > sp.v_n.max() * (1 + RTOL):
        bad.append(("speed_chain_max", sp.chain_bound / sp.v_n.max() - 1))

    margin = speed_cost_check_collective(frame, p, alpha)
    moving = np.max(np.abs(frame.couplings)) > STRICT_COUPLING
    if moving and not margin > 0:
        bad.append(("speed_cost_collective", margin))
    report.counts["speed_cost_collective_strict"] = report.counts.get("speed_cost_collective_strict", 0) + int(moving)

    if d == 2:
        two = max(_rel(cr.individual_rates[0] - dc, dc), _rel(cr.individual_rates[1] - dc, dc))
        report.note("two_level_equality", two)
        if two > RTOL:
            bad.append(("two_level_equality", two))
        gap = _rel(equality_condition_gap(cr, 0), dc)
        report.note("two_level_condition_gap", gap)
        if gap > RTOL:
            bad.append(("two_level_condition_gap", gap))

    if tag == "lz_pattern":
        gap = _rel(equality_condition_gap(cr, 1), dc)
        report.note("lz_pattern_middle_gap", gap)
        eq = _rel(cr.individual_rates[1] - dc, dc)
        report.note("lz_pattern_middle_equals_collective", eq)
        if gap > RTOL or eq > RTOL:
            bad.append(("lz_pattern_middle", max(gap, eq)))

    for name, value in bad:
        entry = {"check": name, "value": float(value), "kind": tag, "dim": d, "alpha": alpha}
        if sample is not None:
            entry["sample"] = sample
        report.violations.append(entry)


def run_fuzz(samples=200, seed=42, lz_pattern_samples=20):
    """Run the relation suite on ``samples`` random frames plus LZ-pattern frames."""
    rng = np.random.default_rng(seed)
    report = FuzzReport(seed=seed, samples=samples)
    for i in range(samples):
        d = int(rng.integers(2, 7))
        alpha = ALPHAS[i % len(ALPHAS)]
        h = random_hermitian(rng, d)
        dh = random_hermitian(rng, d)
        p = rng.dirichlet(np.ones(d))
        frame = frame_at(h, dh)
        sample = {"h": _serial(h), "dh": _serial(dh), "p": p.tolist()}
        check_frame(frame, alpha, p, report, "random", sample)
        report.counts[f"dim{d}"] = report.counts.get(f"dim{d}", 0) + 1
    for i in range(lz_pattern_samples):
        alpha = ALPHAS[i % len(ALPHAS)]
        h, dh = lz_pattern_pair(rng)
        p = rng.dirichlet(np.ones(3))
        check_frame(frame_at(h, dh), alpha, p, report, "lz_pattern")
    report.counts["lz_pattern"] = lz_pattern_samples
    return report


def _serial(a):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(a)]

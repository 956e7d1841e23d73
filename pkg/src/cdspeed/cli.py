"""Command-line scenario runner.

    cdspeed fig1 [--config cfg.json] [--out sweep.csv] [--svg fig1.svg]
    cdspeed fig2a | fig2b | fuzz | nv-pulse | custom

Exit status: 0 on success, 2 when the relation suite finds a violation,
1 for configuration or I/O errors.
"""

import argparse
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from .cdrive import COLLECTIVE
from .costspeed import canonical_populations, ensemble_metric, rates_along
from .dynamics import propagate_levels, tracking_fidelity
from .errors import CDSpeedError
from .model import LZ3Params, linear_sweep, lz3, lz3_counterdiabatic_field
from .nvframe import NVParams, default_steps, run_lab_frame
from .output import line_plot_svg, table_to_csv, write_text
from .relations import run_fuzz

log = logging.getLogger("cdspeed")

SCENARIOS = ("fig1", "fig2a", "fig2b", "fuzz", "nv-pulse", "custom")


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    scenario: str = "fig1"
    delta_over_kappa: float = 0.1
    kappa: float = 1.0
    tau: float = 1.0
    alpha: float = 2.0
    beta_scaled: float = 0.5
    omega0_over_kappa: float = 200.0
    samples: Optional[int] = None
    rk4_steps: int = 20_000
    propagate: bool = False
    seed: int = 42
    fuzz_samples: int = 200
    tau_grid: List[float] = field(default_factory=lambda: [0.1, 1.0, 10.0, 100.0])
    delta_grid: List[float] = field(default_factory=lambda: [0.1, 1.0, 10.0, 100.0])
    fig2a_delta_over_kappa: float = 0.1
    fig2b_tau: float = 0.1
    nv_steps: Optional[int] = None
    counterdiabatic: bool = True
    precision: int = 17
    csv: Optional[str] = None
    svg: Optional[str] = None

    def resolved_samples(self):
        if self.samples is not None:
            return self.samples
        # odd counts put a row exactly on the avoided crossing
        return 400 if self.scenario == "fig1" else 401

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        positive = ["delta_over_kappa", "kappa", "tau", "alpha", "omega0_over_kappa", "fig2a_delta_over_kappa", "fig2b_tau"]
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.beta_scaled < 0:
            raise ConfigError("beta_scaled must be non-negative")
        if self.resolved_samples() < 2:
            raise ConfigError("samples must be at least 2")
        if self.rk4_steps < 100:
            raise ConfigError("rk4_steps must be at least 100")
        if self.fuzz_samples < 1:
            raise ConfigError("fuzz_samples must be positive")
        if not 1 <= self.precision <= 17:
            raise ConfigError("precision must be within 1..17")
        if any(not x > 0 for x in self.tau_grid + self.delta_grid):
            raise ConfigError("grid values must be positive")
        return self

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def lz_params(self):
        return LZ3Params(delta=self.delta_over_kappa * self.kappa, kappa=self.kappa, tau=self.tau, alpha=self.alpha)


def load_config(path, scenario, overrides):
    data = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    data = dict(data)
    data["scenario"] = scenario
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = ScenarioConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


# -- sweep tables -------------------------------------------------------------


def sweep_columns(cfg, lz, samples, with_fidelity=False):
    """Cost rates and speeds of the collectively driven sweep on a uniform grid.

    Raw columns are in internal units; ``*_norm`` columns are scaled by
    ``tau^alpha`` (cost rates) or ``tau`` (speeds) as in the figure axes.
    """
    model = lz3(lz)
    traj = model.trajectory()
    labels = model.level_labels()
    ts = np.linspace(0.0, lz.tau, samples)
    lam, _ = linear_sweep(lz, ts)
    dc, dcn, g, couplings = rates_along(traj, ts, lz.alpha)
    p = canonical_populations(traj, cfg.beta_scaled, lz.kappa).populations
    v = np.sqrt([ensemble_metric(c, p) for c in couplings])
    vn = np.sqrt(g)
    cost_scale = lz.tau**lz.alpha
    cols = {
        "t": ts,
        "t_over_tau": ts / lz.tau,
        "lambda": lam,
        "V": lz3_counterdiabatic_field(lz, ts),
        "dC": dc,
    }
    for i, lab in enumerate(labels):
        cols[f"dC_{lab}"] = dcn[:, i]
    cols["dC_norm"] = dc * cost_scale
    for i, lab in enumerate(labels):
        cols[f"dC_norm_{lab}"] = dcn[:, i] * cost_scale
    cols["v"] = v
    for i, lab in enumerate(labels):
        cols[f"v_{lab}"] = vn[:, i]
    cols["v_norm"] = v * lz.tau
    for i, lab in enumerate(labels):
        cols[f"v_norm_{lab}"] = vn[:, i] * lz.tau
    if with_fidelity:
        steps = cfg.rk4_steps
        stride = -(-steps // (samples - 1))
        steps = stride * (samples - 1)
        run = propagate_levels(traj, COLLECTIVE, steps)
        report = tracking_fidelity(run, traj)
        for i, lab in enumerate(labels):
            cols[f"fidelity_{lab}"] = report.fidelity[::stride, i]
    return cols, labels


def _validate_sweep(cols, samples):
    for name, arr in cols.items():
        arr = np.asarray(arr)
        if len(arr) != samples:
            raise ValueError(f"column {name} has {len(arr)} rows, expected {samples}")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"column {name} is not finite")
    for name, arr in cols.items():
        if name.startswith(("dC", "v")) and np.any(np.asarray(arr) < 0):
            raise ValueError(f"column {name} has negative entries")


def run_sweep(cfg, with_fidelity=False):
    lz = cfg.lz_params()
    samples = cfg.resolved_samples()
    cols, labels = sweep_columns(cfg, lz, samples, with_fidelity)
    _validate_sweep(cols, samples)
    text = table_to_csv(cols, cfg.precision)
    svg = None
    if cfg.svg:
        x = cols["t_over_tau"]
        series = [("collective", x, cols["dC_norm"])]
        series += [(f"individual {lab}", x, cols[f"dC_norm_{lab}"]) for lab in reversed(labels)]
        svg = line_plot_svg(series, "t / tau", "cost rate * tau^alpha", f"Delta/kappa = {cfg.delta_over_kappa:g}")
    summary = {
        "rows": samples,
        "peak_dC_norm": float(np.max(cols["dC_norm"])),
        "peak_v_norm": float(np.max(cols["v_norm"])),
    }
    if with_fidelity:
        summary["min_fidelity"] = {lab: float(np.min(cols[f"fidelity_{lab}"])) for lab in labels}
    return text, svg, summary


def run_fig1(cfg):
    return run_sweep(cfg)


def run_custom(cfg):
    return run_sweep(cfg, with_fidelity=cfg.propagate)


def fig2_grid(cfg):
    """``(tau, delta/kappa)`` pairs for the selected fig2 panel."""
    if cfg.scenario == "fig2a":
        return [(t, cfg.fig2a_delta_over_kappa) for t in cfg.tau_grid]
    return [(cfg.fig2b_tau, d) for d in cfg.delta_grid]


def fig2_columns(cfg):
    samples = cfg.resolved_samples()
    blocks = []
    for tau, dk in fig2_grid(cfg):
        sub = dataclasses.replace(cfg, tau=tau, delta_over_kappa=dk)
        lz = sub.lz_params()
        cols, _ = sweep_columns(sub, lz, samples)
        blocks.append(
            {
                "tau": np.full(samples, tau),
                "delta_over_kappa": np.full(samples, dk),
                "t": cols["t"],
                "t_over_tau": cols["t_over_tau"],
                "dC": cols["dC"],
                "v": cols["v"],
                "log2_sqrt_dC_norm": np.log2(np.sqrt(cols["dC_norm"])),
                "log2_v_norm": np.log2(cols["v_norm"]),
                "log2_sqrt_dC": np.log2(np.sqrt(cols["dC"])),
                "log2_v": np.log2(cols["v"]),
            }
        )
    return {k: np.concatenate([b[k] for b in blocks]) for k in blocks[0]}


def run_fig2(cfg):
    cols = fig2_columns(cfg)
    text = table_to_csv(cols, cfg.precision)
    keys = list(zip(cols["tau"], cols["delta_over_kappa"]))
    peaks = {}
    for key in dict.fromkeys(keys):
        mask = (cols["tau"] == key[0]) & (cols["delta_over_kappa"] == key[1])
        peaks[f"tau={key[0]:g},delta/kappa={key[1]:g}"] = float(np.max(cols["dC"][mask]))
    svg = None
    if cfg.svg:
        series = []
        for tau, dk in fig2_grid(cfg):
            mask = (cols["tau"] == tau) & (cols["delta_over_kappa"] == dk)
            label = f"tau={tau:g}" if cfg.scenario == "fig2a" else f"D/k={dk:g}"
            series.append((label, cols["t_over_tau"][mask], cols["log2_sqrt_dC"][mask]))
        svg = line_plot_svg(series, "t / tau", "log2 sqrt(dC)", cfg.scenario)
    return text, svg, {"peak_dC": peaks}


def run_relations_fuzz(cfg):
    report = run_fuzz(samples=cfg.fuzz_samples, seed=cfg.seed)
    text = json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n"
    return text, report.passed


def run_nv_pulse(cfg):
    lz = cfg.lz_params()
    nv = NVParams(omega0_over_kappa=cfg.omega0_over_kappa)
    steps = cfg.nv_steps or default_steps(nv, lz)
    run = run_lab_frame(nv, lz, steps, counterdiabatic=cfg.counterdiabatic)
    s = run.schedule
    schedule = table_to_csv(
        {"t": s.t, "epsilon": s.epsilon, "delta": s.delta, "bx": s.bx, "lambda": s.lam, "V": s.v},
        cfg.precision,
    )
    labels = lz3(lz).level_labels()
    fid = {"t": run.times}
    for i, lab in enumerate(labels):
        fid[f"fidelity_{lab}"] = run.tracking.fidelity[:, i]
    tracking = table_to_csv(fid, cfg.precision)
    mins = {lab: float(v) for lab, v in zip(labels, run.tracking.min_fidelity)}
    summary = {
        "steps": steps,
        "omega0_over_kappa": cfg.omega0_over_kappa,
        "counterdiabatic": cfg.counterdiabatic,
        "min_fidelity": mins,
        "deficit": run.deficit,
        "tracks_all_levels": bool(run.deficit <= 1e-2),
        "middle_level_below_0.9": bool(mins["0"] < 0.9),
    }
    svg = None
    if cfg.svg:
        series = [(f"level {lab}", run.times, run.tracking.fidelity[:, i]) for i, lab in enumerate(labels)]
        svg = line_plot_svg(series, "t", "tracking fidelity", f"omega0/kappa = {cfg.omega0_over_kappa:g}")
    return schedule, tracking, svg, summary


# -- entry point --------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="cdspeed", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in SCENARIOS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output path (CSV, or JSON for fuzz); '-' or omitted writes to stdout")
        p.add_argument("--svg", help="optional SVG plot path")
        p.add_argument("--seed", type=int, help="RNG seed (fuzz)")
        if name == "nv-pulse":
            p.add_argument("--tracking-out", help="tracking CSV path (default: <out stem>.tracking.csv)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _tracking_path(out, explicit):
    if explicit:
        return explicit
    if out is None or out == "-":
        return None
    p = Path(out)
    return str(p.with_name(p.stem + ".tracking" + (p.suffix or ".csv")))


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config, args.scenario, {"seed": args.seed, "csv": args.out, "svg": args.svg})
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    out = cfg.csv
    try:
        if cfg.scenario == "fuzz":
            text, passed = run_relations_fuzz(cfg)
            write_text(out, text)
            if not passed:
                print("relation violation detected", file=sys.stderr)
                return 2
            return 0
        if cfg.scenario == "nv-pulse":
            schedule, tracking, svg, summary = run_nv_pulse(cfg)
            write_text(out, schedule)
            track_path = _tracking_path(out, getattr(args, "tracking_out", None))
            if track_path:
                write_text(track_path, tracking)
        else:
            runner = {"fig1": run_fig1, "fig2a": run_fig2, "fig2b": run_fig2, "custom": run_custom}[cfg.scenario]
            text, svg, summary = runner(cfg)
            write_text(out, text)
        if svg is not None:
            write_text(cfg.svg, svg)
        if out not in (None, "-"):
            print(json.dumps(summary, sort_keys=True))
        else:
            log.info(json.dumps(summary, sort_keys=True))
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    except (CDSpeedError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

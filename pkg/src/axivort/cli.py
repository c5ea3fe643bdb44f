"""Command-line entry point: ``axivort <command> --config <path>``.

Commands
--------
simulate     run the configured flow, write ``timeseries.csv`` and snapshots,
             and check conservation and decay rates
semigroup    kernel, semigroup, Biot-Savart and moment checks plus refinement
asymptotics  re-analyse a previous ``simulate`` output directory
estimates    measured vs predicted decay exponents, written to ``estimates.csv``
gronwall     simulated Grönwall solutions against the explicit bound
all          every check above (the full acceptance table)

The configuration is an INI file with sections ``grid``, ``time``, ``init``,
``output`` and ``harness``; see ``configs/reference.ini`` for every key with
its default.  Every run writes ``report.txt`` with one
``CHECK <name> expected=<val> measured=<val> tol=<tol> PASS|FAIL`` line per
check.  The exit status is 0 iff every check passed.  Existing files are
never overwritten: a numeric suffix is added instead.

Numerical modules are imported lazily so that the thread count (``--threads``,
overridden by ``AXIVORT_THREADS``) reaches the BLAS runtime before it starts.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import os
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

COMMANDS = ("simulate", "semigroup", "asymptotics", "estimates", "gronwall", "all")
_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending key path."""


# --- configuration model ---------------------------------------------------------------


@dataclass(frozen=True)
class OutputSettings:
    output_every: float = 2.5
    snapshots: bool = True


@dataclass(frozen=True)
class HarnessSettings:
    fit_t_min: float = 10.0
    fit_t_max: float = 50.0
    gap_q: float = 2.0
    second_order_times: tuple = (12.5, 25.0, 50.0)
    input_dir: str = ""
    shifted_run: bool = True
    refinement: bool = True
    curl_points: int = 20
    estimate_t_min: float = 10.0
    estimate_t_max: float = 1000.0
    estimate_points: int = 9
    gronwall_cases: int = 20
    gronwall_steps: int = 1000


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a config file can set."""

    sim: object  # solver.SimConfig
    output: OutputSettings = OutputSettings()
    harness: HarnessSettings = HarnessSettings()


@dataclass
class ExperimentSpec:
    command: str
    config_path: Path
    output_dir: Path = Path("axivort-out")
    seed: int = 0
    threads: int | str = "auto"
    config: ExperimentConfig | None = field(default=None, repr=False)


_GRID_KEYS = {"nr": int, "nz": int, "rmax": float, "zmax": float}
_TIME_KEYS = {
    "t0": float,
    "t_end": float,
    "cfl": float,
    "diffusion_safety": float,
    "mode": str,
    "linear_only": bool,
    "refresh": str,
}
_INIT_KEYS = {"kind": str, "amplitude": float, "r0": float, "z0": float, "width": float, "path": str}


def _settings_keys(cls):
    return {f.name: type(f.default) for f in fields(cls)}


_SECTIONS = {
    "grid": _GRID_KEYS,
    "time": _TIME_KEYS,
    "init": _INIT_KEYS,
    "output": _settings_keys(OutputSettings),
    "harness": _settings_keys(HarnessSettings),
}


def _convert(section, key, raw, typ):
    path = f"{section}.{key}"
    raw = raw.strip()
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"expected a boolean, got {raw!r}")
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        if typ is tuple:
            return tuple(float(x) for x in raw.split(",") if x.strip())
        return raw
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _read_sections(path: Path) -> dict:
    if not path.is_file():
        raise ConfigError(f"config: file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"config: parse error in {path}: {exc}") from None
    values = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"{section}: unknown section (expected one of {', '.join(_SECTIONS)})")
        keys = _SECTIONS[section]
        values[section] = {}
        for key, raw in parser.items(section):
            if key not in keys:
                raise ConfigError(f"{section}.{key}: unknown key")
            values[section][key] = _convert(section, key, raw, keys[key])
    return values


def _build(section, factory, kwargs):
    try:
        return factory(**kwargs)
    except ValueError as exc:
        msg = str(exc)
        key = next((k for k in kwargs if k in msg), None)
        where = f"{section}.{key}" if key else section
        raise ConfigError(f"{where}: {msg}") from None


def config_from_sections(values: dict) -> ExperimentConfig:
    from .grid_fields import Grid
    from .solver import InitialData, SimConfig

    grid_kw = values.get("grid", {})
    grid = _build("grid", Grid, {**dict(nr=128, nz=256, rmax=16.0, zmax=16.0), **grid_kw})
    init = _build("init", InitialData, values.get("init", {}))
    output = _build("output", OutputSettings, values.get("output", {}))
    harness = _build("harness", HarnessSettings, values.get("harness", {}))
    if not harness.fit_t_max >= 2 * harness.fit_t_min > 0:
        raise ConfigError("harness.fit_t_max: the fit window must span at least one octave")
    if not harness.estimate_t_max >= 2 * harness.estimate_t_min > 0:
        raise ConfigError("harness.estimate_t_max: the estimate window must span at least one octave")
    if harness.estimate_points < 4:
        raise ConfigError("harness.estimate_points: at least 4 times are needed for a fit")
    if harness.gronwall_cases < 1 or harness.gronwall_steps < 2:
        raise ConfigError("harness.gronwall_steps: need gronwall_cases >= 1 and gronwall_steps >= 2")
    if harness.curl_points < 1:
        raise ConfigError("harness.curl_points: must be positive")
    sim_kw = dict(values.get("time", {}))
    sim_kw.update(grid=grid, init=init, output_every=output.output_every)
    sim = _build("time", SimConfig, sim_kw)
    return ExperimentConfig(sim, output, harness)


def parse_config(path) -> ExperimentConfig:
    """Read, validate and complete a config file; errors name the key path."""
    return config_from_sections(_read_sections(Path(path)))


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(repr(float(x)) for x in v)
    return str(v)


def serialize_config(cfg: ExperimentConfig) -> str:
    """INI text that :func:`parse_config` maps back to ``cfg``."""
    sim = cfg.sim
    out = configparser.ConfigParser(interpolation=None)
    out.optionxform = str
    out["grid"] = {k: _fmt(getattr(sim.grid, k)) for k in _GRID_KEYS}
    out["time"] = {k: _fmt(getattr(sim, k)) for k in _TIME_KEYS}
    init = {k: getattr(sim.init, k) for k in _INIT_KEYS}
    out["init"] = {k: _fmt(v) for k, v in init.items() if v is not None}
    out["output"] = {f.name: _fmt(getattr(cfg.output, f.name)) for f in fields(OutputSettings)}
    out["harness"] = {f.name: _fmt(getattr(cfg.harness, f.name)) for f in fields(HarnessSettings)}
    lines = []
    for section in out.sections():
        lines.append(f"[{section}]")
        lines.extend(f"{k} = {v}" for k, v in out[section].items())
        lines.append("")
    return "\n".join(lines)


# --- output helpers -----------------------------------------------------------------------


def unique_path(path: Path) -> Path:
    """``path`` itself if free, else ``stem-1.ext``, ``stem-2.ext``, ..."""
    path = Path(path)
    if not path.exists():
        return path
    k = 1
    while True:
        cand = path.with_name(f"{path.stem}-{k}{path.suffix}")
        if not cand.exists():
            return cand
        k += 1


def _g17(x) -> str:
    x = float(x)
    return "nan" if math.isnan(x) else f"{x:.17g}"


def write_timeseries(records, path: Path) -> Path:
    from .solver import RECORD_COLUMNS

    path = unique_path(path)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(RECORD_COLUMNS) + "\n")
        for r in records:
            fh.write(",".join(_g17(v) for v in r) + "\n")
    return path


def read_timeseries(path: Path):
    from .solver import RECORD_COLUMNS, MomentRecord

    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != RECORD_COLUMNS:
        raise ValueError(f"{path}: header must be {','.join(RECORD_COLUMNS)}")
    return [MomentRecord(*map(float, row)) for row in rows[1:] if row]


def snapshot_name(t: float) -> str:
    return f"omega_{t:.4f}.dat"


def write_snapshots(snaps, directory: Path):
    from .grid_fields import write_snapshot

    directory.mkdir(parents=True, exist_ok=True)
    return [write_snapshot(s, unique_path(directory / snapshot_name(s.time))) for s in snaps]


def write_estimates(rows, path: Path) -> Path:
    path = unique_path(path)
    with open(path, "w", newline="") as fh:
        fh.write("kind,p,q,alpha,beta,gamma,alpha_prime,datum,predicted,measured,stderr,constant\n")
        for case, datum, pred, slope, err, const in rows:
            vals = [case.p, case.q, case.alpha, case.beta, case.gamma, case.alpha_prime]
            fh.write(
                ",".join([case.kind, *(_g17(v) for v in vals), datum, _g17(pred), _g17(slope), _g17(err), _g17(const)])
                + "\n"
            )
    return path


class Report:
    def __init__(self, title):
        self.lines = [f"# axivort report: {title}"]
        self.checks = []

    def note(self, text):
        self.lines.append(f"# {text}")

    def add(self, check):
        self.checks.append(check)
        self.lines.append(check.line())

    def extend(self, checks):
        for c in checks:
            self.add(c)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def write(self, path: Path) -> Path:
        path = unique_path(path)
        n_pass = sum(c.passed for c in self.checks)
        summary = f"# summary: {n_pass}/{len(self.checks)} checks passed"
        path.write_text("\n".join(self.lines + [summary]) + "\n")
        return path


# --- analyses -----------------------------------------------------------------------------


def analyse_run(records, snapshots, velocities, hs: HarnessSettings, tag="") -> list:
    """Conservation and rate checks for one run (criteria 7 to 10)."""
    from . import harness as H
    from .asymptotics import estimate_J_infinity, fit_decay_exponent, column, omega_tilde, velocity_gap
    from .grid_fields import weighted_lp_norm

    checks = []
    pre = f"{tag}." if tag else ""
    r0 = records[0]
    nonzero = any(abs(r.l1) > 0 for r in records)
    if not nonzero:
        cols = [abs(v) for r in records for v in r[1:] if not math.isnan(v)]
        checks.append(H.check_le(f"{pre}zero_field", max(cols, default=0.0), 0.0, expected="0"))
        return checks
    scale = abs(r0.I) if r0.I != 0 else r0.w_r2_l1
    drift = max(abs(r.I - r0.I) for r in records) / scale
    checks.append(H.check_le(f"{pre}c07_impulse_drift", drift, 1e-2))
    window = (hs.fit_t_min, hs.fit_t_max)
    times = [r.t for r in records]
    if not (min(times) <= window[0] and max(times) >= window[1] * (1 - 1e-12)):
        return checks
    if r0.I != 0:
        l1 = fit_decay_exponent(column(records, "l1"), window).slope
        checks.append(H.check_close(f"{pre}c08_l1_slope", l1, -1.0, 0.1))
    rem1 = fit_decay_exponent(column(records, "rem1_l1"), window).slope
    checks.append(H.check_le(f"{pre}c08_rem1_slope", rem1, -1.35))
    uinf = fit_decay_exponent(column(records, "u_linf"), window).slope
    checks.append(H.check_le(f"{pre}c10_u_linf_slope", uinf, -1.3))
    gaps = [
        (u.time, velocity_gap(u, u.time, r0.I, 0.0, hs.gap_q))
        for u in velocities
        if window[0] - 1e-9 <= u.time <= window[1] + 1e-9
    ]
    gap = fit_decay_exponent(gaps, window).slope
    checks.append(H.check_le(f"{pre}c10_velocity_gap_slope", gap, -0.85))
    by_t = {round(s.time, 9): (s, r) for s, r in zip(snapshots, records)}
    if all(round(t, 9) in by_t for t in hs.second_order_times):
        scaled = []
        for t in hs.second_order_times:
            s, r = by_t[round(t, 9)]
            scaled.append(t**1.5 * weighted_lp_norm(omega_tilde(s, t, r0.I, r.J), 1))
        worst = max(b / a for a, b in zip(scaled, scaled[1:]))
        checks.append(H.check_lt(f"{pre}c09_second_order_ratio", worst, 1.0))
    tail = estimate_J_infinity(records).tail_slope
    if not math.isnan(tail):
        checks.append(H.check_le(f"{pre}c09_J_tail_slope", tail, -0.35))
    return checks


def linear_checks(cfg: ExperimentConfig, seed: int, report: Report) -> list:
    """Criteria 1 to 6 on the configured grid and, optionally, criterion 13."""
    from . import harness as H

    grid = cfg.sim.grid
    checks = []
    rel, tail = H.measure_kernel_identity()
    checks.append(H.check_le("c01_kernel_identity", rel, 1e-10))
    checks.append(H.check_close("c01_kernel_tail", tail, 1.0, 0.05))
    sups, change = H.measure_kernel_derivative_stability()
    report.note("kernel derivative suprema i=0..3: " + " ".join(f"{s:.6g}" for s in sups))
    finite = all(math.isfinite(s) for s in sups)
    checks.append(H.check_le("c02_kernel_derivative_refinement", change if finite else math.inf, 1e-3))
    ss = H.measure_self_similarity(grid)
    for (kind, s, t), err in ss.items():
        checks.append(H.check_le(f"c03_self_similarity_{kind}_{s:g}_{t:g}", err, 1e-3))
    comp = H.measure_composition(grid)
    checks.append(H.check_le("c04_composition", comp, 1e-3))
    bs = H.measure_biot_savart(grid)
    checks.append(H.check_le("c05_biot_savart", bs, 1e-3))
    curl = H.measure_profile_curl(cfg.harness.curl_points, seed)
    checks.append(H.check_le("c05_profile_curl", curl, 1e-4))
    mom = H.measure_moments(grid)
    tol = {"I(G1)-1": 1e-4, "J(G2)-1": 1e-4, "J(G1)": 1e-6, "I(G2)": 1e-6}
    for name, v in mom.items():
        checks.append(H.check_le(f"c06_moment_{name}", abs(v), tol[name]))
    if cfg.harness.refinement:
        fine = grid.refined(2)
        ss_f = H.measure_self_similarity(fine)
        pairs = [(f"self_similarity_{k}_{s:g}_{t:g}", ss[(k, s, t)], ss_f[(k, s, t)]) for (k, s, t) in ss]
        pairs.append(("composition", comp, H.measure_composition(fine)))
        pairs.append(("biot_savart", bs, H.measure_biot_savart(fine)))
        mom_f = H.measure_moments(fine)
        pairs.extend((f"moment_{n}", mom[n], mom_f[n]) for n in mom)
        for name, c, f in pairs:
            ratio = H.refinement_ratio(c, f)
            report.note(f"refinement {name}: {c:.3e} -> {f:.3e}")
            checks.append(H.check_ge(f"c13_refine_{name}", ratio, 3.0))
    return checks


def estimate_checks(cfg: ExperimentConfig, out_dir: Path, report: Report) -> list:
    from . import harness as H

    hs = cfg.harness
    t_list = H.estimate_times(hs.estimate_t_min, hs.estimate_t_max, hs.estimate_points)
    rows = H.measure_estimates(cfg.sim.grid, t_list)
    path = write_estimates(rows, out_dir / "estimates.csv")
    report.note(f"estimates written to {path.name}")
    checks = []
    for case, datum, pred, slope, _, _ in rows:
        name = f"c11_{case.kind}_p{case.p:g}_q{case.q:g}_a{case.alpha:g}_b{case.beta:g}_{datum}"
        checks.append(H.check_le(name, slope, pred + 0.05))
    sat = next(r for r in rows if r[0] == H.SATURATING_CASE and r[1] == "G1")
    checks.append(H.check_close("c11_saturating_G1", sat[3], -1.0, 0.05))
    return checks


def gronwall_checks(cfg: ExperimentConfig, seed: int, report: Report) -> list:
    from . import harness as H

    hs = cfg.harness
    checks = []
    for i, (p, T, bound, m1, m4) in enumerate(H.measure_gronwall(hs.gronwall_cases, seed, hs.gronwall_steps)):
        report.note(
            f"gronwall {i}: a={p.a:.6g} b={p.b:.6g} beta={p.beta:.6g} gamma={p.gamma:.6g} T={T:.6g} "
            f"bound={bound:.6g} simulated(T)={m1:.6g} simulated(4T)={m4:.6g}"
        )
        checks.append(H.check_le(f"c12_gronwall_{i}", max(m1, m4), bound))
    return checks


# --- commands -----------------------------------------------------------------------------


def _simulate(cfg: ExperimentConfig, out_dir: Path, report: Report, tag=""):
    from .solver import run

    res = run(cfg.sim)
    sub = out_dir / tag if tag else out_dir
    sub.mkdir(parents=True, exist_ok=True)
    ts = write_timeseries(res.records, sub / "timeseries.csv")
    report.note(f"{tag or 'run'}: init={cfg.sim.init.kind} records={len(res.records)} -> {ts.relative_to(out_dir)}")
    if cfg.output.snapshots:
        write_snapshots(res.snapshots, sub / "snapshots")
    if res.failure is not None:
        raise RuntimeError(f"simulation failed: {res.failure}")
    return res


def run_experiment(spec: ExperimentSpec) -> int:
    """Execute one command; returns the process exit code."""
    cfg = spec.config if spec.config is not None else parse_config(spec.config_path)
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = Report(spec.command)
    report.note(f"config={spec.config_path} seed={spec.seed} threads={spec.threads}")
    status = 0
    try:
        cmd = spec.command
        if cmd in ("semigroup", "all"):
            report.extend(linear_checks(cfg, spec.seed, report))
        if cmd in ("simulate", "all"):
            res = _simulate(cfg, out, report)
            report.extend(analyse_run(res.records, res.snapshots, res.velocities, cfg.harness))
            if cmd == "all" and cfg.harness.shifted_run:
                init = replace(cfg.sim.init, kind="shifted_ring")
                shifted = replace(cfg, sim=replace(cfg.sim, init=init))
                res = _simulate(shifted, out, report, tag="shifted")
                report.extend(analyse_run(res.records, res.snapshots, res.velocities, cfg.harness, tag="shifted"))
        if cmd == "asymptotics":
            report.extend(_asymptotics_from_files(cfg, out, report))
        if cmd in ("estimates", "all"):
            report.extend(estimate_checks(cfg, out, report))
        if cmd in ("gronwall", "all"):
            report.extend(gronwall_checks(cfg, spec.seed, report))
    except Exception as exc:  # partial outputs are kept
        report.note(f"runtime failure: {type(exc).__name__}: {exc}")
        status = 2
    path = report.write(out / "report.txt")
    print("\n".join(report.lines))
    print(f"report: {path}")
    if status:
        return status
    return 0 if report.passed else 1


def _asymptotics_from_files(cfg, out, report):
    from .biot_savart import velocity_from_vorticity
    from .grid_fields import read_snapshot

    src = Path(cfg.harness.input_dir) if cfg.harness.input_dir else out
    records = read_timeseries(src / "timeseries.csv")
    snaps = sorted((read_snapshot(p) for p in (src / "snapshots").glob("omega_*.dat")), key=lambda s: s.time)
    report.note(f"input: {src} records={len(records)} snapshots={len(snaps)}")
    if len(snaps) != len(records):
        raise ValueError("snapshot count does not match the timeseries; rerun simulate with output.snapshots = true")
    vels = [velocity_from_vorticity(s) for s in snaps]
    return analyse_run(records, snaps, vels, cfg.harness)


def resolve_threads(cli_value) -> int | str:
    env = os.environ.get("AXIVORT_THREADS")
    value = env if env not in (None, "") else cli_value
    if value in (None, "auto"):
        return "auto"
    n = int(value)
    if n < 1:
        raise ValueError("threads must be a positive integer or 'auto'")
    return n


def build_parser():
    p = argparse.ArgumentParser(prog="axivort", description="Axisymmetric vorticity lab")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, type=Path, help="INI config file")
    p.add_argument("--output", type=Path, default=Path("axivort-out"), help="output directory")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized cases")
    p.add_argument("--threads", default="auto", help="BLAS threads (integer or auto)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        threads = resolve_threads(args.threads)
    except ValueError as exc:
        print(f"axivort: {exc}", file=sys.stderr)
        return 2
    if threads != "auto":
        for var in _THREAD_VARS:
            os.environ[var] = str(threads)
    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"axivort: config error: {exc}", file=sys.stderr)
        return 2
    spec = ExperimentSpec(args.command, args.config, args.output, args.seed, threads, cfg)
    return run_experiment(spec)


if __name__ == "__main__":
    sys.exit(main())

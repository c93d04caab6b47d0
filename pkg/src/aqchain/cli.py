"""Command-line pipeline: calibrate, trace, evolve, ensembles, conditions, report.

Config files are plain key = value text with one optional [disorder]
section; unknown keys are rejected. All artifacts are CSV files laid out as
<out>/N<k>/<name>.csv with a run-level calibration.csv and config echo at
the top. Output bytes are deterministic for a fixed master seed regardless
of worker count.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .calibration import (
    CALIBRATION_HEADER,
    CalibrationError,
    CalibrationRecord,
    calibrate_tf,
    read_calibration,
    write_calibration,
)
from .conditions import write_scatter
from .csvio import read_csv, write_csv
from .ensemble import (
    DisorderSpec,
    dmin_histogram,
    ideal_instance_record,
    run_ensemble,
    write_histogram,
    write_instances,
    write_summaries,
)
from .model import EPSILON0, ChainParams, Schedule, ideal_chain
from .propagation import auto_propagate, propagate
from .spectrum import gap_trace, minimum_gap, trace_header, trace_rows

WORKERS_ENV = "AQCHAIN_WORKERS"


class ConfigError(ValueError):
    """Configuration file or value rejected."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved run configuration; defaults reproduce the reference setup."""

    n_list: tuple[int, ...] = (2, 3, 4, 5, 6, 8)
    lambda_mean: float = 1.0
    h_mean: float = 5.0
    j_mean: float = 2.5
    epsilon0: float = EPSILON0
    target_fidelity: float = 0.999975
    master_seed: int = 42
    ensemble_size: int = 1024
    grid_points: int = 1001
    ensemble_grid_points: int = 201
    tracked_levels: int = 6
    hist_bins: int = 40
    workers: int = 1
    prop_tol: float = 1e-8
    ensemble_tol: float = 1e-4
    calibration_resolution: float = 1e-3
    tf_cap: float = 1e6
    population_samples: int = 201
    conditions_n: int = 5
    conditions_sigma: float = 0.10
    conditions_target: str = "lambda"
    sigma_list: tuple[float, ...] = (0.02, 0.04, 0.06, 0.08, 0.10)
    targets: tuple[str, ...] = ("h", "j", "lambda")

    def ideal(self, n: int) -> ChainParams:
        return ChainParams(
            n_qubits=n,
            lam=np.full(n, self.lambda_mean),
            h=np.full(n, self.h_mean),
            j=np.full(max(n - 1, 0), self.j_mean),
        )

    def validate(self) -> None:
        if not self.n_list or any(not (2 <= n <= 14) for n in self.n_list):
            raise ConfigError(f"n_list entries must lie in [2, 14], got {self.n_list}")
        if not (0.0 <= self.target_fidelity < 1.0):
            raise ConfigError(f"target_fidelity must lie in [0, 1), got {self.target_fidelity}")
        if any(not (0.0 <= s <= 0.5) for s in self.sigma_list):
            raise ConfigError(f"sigma_list entries must lie in [0, 0.5], got {self.sigma_list}")
        if not (0.0 <= self.conditions_sigma <= 0.5):
            raise ConfigError(f"conditions_sigma must lie in [0, 0.5], got {self.conditions_sigma}")
        bad = [t for t in (*self.targets, self.conditions_target) if t not in ("lambda", "h", "j")]
        if bad:
            raise ConfigError(f"unknown disorder targets {bad}")
        if self.ensemble_size < 1:
            raise ConfigError(f"ensemble_size must be >= 1, got {self.ensemble_size}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.grid_points < 11 or self.ensemble_grid_points < 11:
            raise ConfigError("grid sizes must be >= 11")
        if self.tracked_levels < 2:
            raise ConfigError(f"tracked_levels must be >= 2, got {self.tracked_levels}")
        if not (2 <= self.conditions_n <= 14):
            raise ConfigError(f"conditions_n must lie in [2, 14], got {self.conditions_n}")
        if self.epsilon0 <= 0 or self.prop_tol <= 0 or self.ensemble_tol <= 0:
            raise ConfigError("epsilon0 and tolerances must be positive")
        if self.hist_bins < 1 or self.population_samples < 2:
            raise ConfigError("hist_bins must be >= 1 and population_samples >= 2")


_INT_KEYS = {
    "master_seed",
    "ensemble_size",
    "grid_points",
    "ensemble_grid_points",
    "tracked_levels",
    "hist_bins",
    "workers",
    "population_samples",
    "conditions_n",
}
_FLOAT_KEYS = {
    "lambda_mean",
    "h_mean",
    "j_mean",
    "epsilon0",
    "target_fidelity",
    "prop_tol",
    "ensemble_tol",
    "calibration_resolution",
    "tf_cap",
    "conditions_sigma",
}
_STR_KEYS = {"conditions_target"}
_TOP_LIST_KEYS = {"n_list"}
_DISORDER_KEYS = {"sigma_list", "targets"}


def _parse_scalar(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"key '{key}': cannot parse '{raw}' ({exc})") from None
    return raw


def parse_config(path) -> ExperimentConfig:
    """Parse and validate a key = value config file.

    Grammar: blank lines and '#' comments ignored; 'key = value' pairs at
    top level; lists are comma separated; the [disorder] section holds
    sigma_list and targets. Unknown keys or sections are errors.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    values: dict[str, object] = {}
    section = ""
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
            if section != "disorder":
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got '{stripped}'")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if section == "disorder":
            if key not in _DISORDER_KEYS:
                raise ConfigError(f"line {lineno}: unknown [disorder] key '{key}'")
            items = [item.strip() for item in raw.split(",") if item.strip()]
            if key == "sigma_list":
                try:
                    values[key] = tuple(float(item) for item in items)
                except ValueError as exc:
                    raise ConfigError(f"key 'sigma_list': {exc}") from None
            else:
                values[key] = tuple(items)
        elif key in _TOP_LIST_KEYS:
            try:
                values[key] = tuple(int(item.strip()) for item in raw.split(",") if item.strip())
            except ValueError as exc:
                raise ConfigError(f"key '{key}': {exc}") from None
        elif key in _INT_KEYS | _FLOAT_KEYS | _STR_KEYS:
            values[key] = _parse_scalar(key, raw)
        else:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
    config = ExperimentConfig(**values)  # type: ignore[arg-type]
    config.validate()
    return config


def serialize_config(config: ExperimentConfig) -> str:
    """Canonical text form; parse_config(serialize_config(c)) == c."""
    lines = []
    for f in fields(config):
        if f.name in _DISORDER_KEYS:
            continue
        value = getattr(config, f.name)
        if isinstance(value, tuple):
            lines.append(f"{f.name} = {', '.join(str(v) for v in value)}")
        elif isinstance(value, float):
            lines.append(f"{f.name} = {value!r}")
        else:
            lines.append(f"{f.name} = {value}")
    lines.append("")
    lines.append("[disorder]")
    lines.append(f"sigma_list = {', '.join(repr(s) for s in config.sigma_list)}")
    lines.append(f"targets = {', '.join(config.targets)}")
    return "\n".join(lines) + "\n"


def _echo_config(config: ExperimentConfig, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "config_resolved.txt").write_text(serialize_config(config))


def _ndir(out: Path, n: int) -> Path:
    path = out / f"N{n}"
    path.mkdir(parents=True, exist_ok=True)
    return path


def _sigma_tag(sigma: float) -> str:
    return f"{sigma:g}"


def _load_calibration(config: ExperimentConfig, out: Path, needed) -> dict[int, CalibrationRecord]:
    """Reuse <out>/calibration.csv where possible, calibrating what is missing."""
    path = out / "calibration.csv"
    table: dict[int, CalibrationRecord] = {}
    if path.is_file():
        for rec in read_calibration(path, target=config.target_fidelity):
            table[rec.n_qubits] = rec
    missing = [n for n in needed if n not in table]
    for n in missing:
        table[n] = calibrate_tf(
            n,
            config.target_fidelity,
            epsilon0=config.epsilon0,
            prop_tol=config.prop_tol,
            resolution=config.calibration_resolution,
            t_cap=config.tf_cap,
            grid_points=config.grid_points,
        )
    if missing:
        write_calibration([table[n] for n in sorted(table)], path)
    return table


def cmd_calibrate(config: ExperimentConfig, out: Path) -> None:
    records = [
        calibrate_tf(
            n,
            config.target_fidelity,
            epsilon0=config.epsilon0,
            prop_tol=config.prop_tol,
            resolution=config.calibration_resolution,
            t_cap=config.tf_cap,
            grid_points=config.grid_points,
        )
        for n in config.n_list
    ]
    write_calibration(records, out / "calibration.csv")
    for rec in records:
        print(
            f"N={rec.n_qubits}: t_f = {rec.t_f:.6g} ns, fidelity = {rec.achieved_fidelity:.8f},"
            f" delta_min = {rec.delta_min:.6g} rad/ns"
        )


def cmd_spectrum(config: ExperimentConfig, out: Path) -> None:
    path = out / "calibration.csv"
    table = {r.n_qubits: r for r in read_calibration(path, config.target_fidelity)} if path.is_file() else {}
    for n in config.n_list:
        t_f = table[n].t_f if n in table else 1.0
        sched = Schedule(t_f=t_f, epsilon0=config.epsilon0)
        trace = gap_trace(config.ideal(n), sched, config.grid_points, keep_states=False)
        minimum_gap(trace)
        write_csv(_ndir(out, n) / "gap_trace.csv", trace_header(trace.k), trace_rows(trace))
        print(f"N={n}: delta_min = {trace.delta_min:.6g} rad/ns at s = {trace.s_star:.6g}")


def cmd_evolve(config: ExperimentConfig, out: Path) -> None:
    table = _load_calibration(config, out, config.n_list)
    for n in config.n_list:
        sched = Schedule(t_f=table[n].t_f, epsilon0=config.epsilon0)
        ideal = config.ideal(n)
        settled = auto_propagate(ideal, sched, tol=config.prop_tol)
        k = min(config.tracked_levels, 2**n)
        samples = np.linspace(0.0, 1.0, config.population_samples)
        result = propagate(ideal, sched, settled.steps_used, sample_points=samples, k=k)
        header = ["s"] + [f"p{m}" for m in range(k)]
        rows = [[s, *row] for s, row in zip(result.sample_s, result.populations)]
        write_csv(_ndir(out, n) / "population.csv", header, rows)
        print(
            f"N={n}: P_S = {result.success_probability:.8f} at t_f = {sched.t_f:.6g} ns"
            f" ({result.steps_used} steps)"
        )


def cmd_ensemble(config: ExperimentConfig, out: Path) -> None:
    table = _load_calibration(config, out, config.n_list)
    for n in config.n_list:
        sched = Schedule(t_f=table[n].t_f, epsilon0=config.epsilon0)
        ideal = config.ideal(n)
        steps = auto_propagate(ideal, sched, tol=config.ensemble_tol).steps_used
        ndir = _ndir(out, n)
        summaries = []
        for target in config.targets:
            for sigma in config.sigma_list:
                spec = DisorderSpec(
                    sigma_rel=sigma,
                    targets=(target,),
                    master_seed=config.master_seed,
                    ensemble_size=config.ensemble_size,
                )
                summary, records = run_ensemble(
                    ideal,
                    spec,
                    sched,
                    steps=steps,
                    trace_grid=config.ensemble_grid_points,
                    k=min(config.tracked_levels, 2**n),
                    workers=config.workers,
                )
                summaries.append(summary)
                tag = f"{target}_s{_sigma_tag(sigma)}"
                write_instances(records, ndir / f"instances_{tag}.csv")
                hist = dmin_histogram(records, config.hist_bins, ideal_dmin=table[n].delta_min)
                write_histogram(hist, ndir / f"dmin_hist_{tag}.csv")
                print(
                    f"N={n} {target} sigma={_sigma_tag(sigma)}: mean P_S = {summary.mean_ps:.6f},"
                    f" gs match = {summary.gs_match_fraction:.4f}"
                )
        write_summaries(summaries, ndir / "ensemble_summary.csv")


def cmd_conditions(config: ExperimentConfig, out: Path) -> None:
    n = config.conditions_n
    table = _load_calibration(config, out, [n])
    sched = Schedule(t_f=table[n].t_f, epsilon0=config.epsilon0)
    ideal = config.ideal(n)
    steps = auto_propagate(ideal, sched, tol=config.ensemble_tol).steps_used
    k = min(config.tracked_levels, 2**n)
    spec = DisorderSpec(
        sigma_rel=config.conditions_sigma,
        targets=(config.conditions_target,),
        master_seed=config.master_seed,
        ensemble_size=config.ensemble_size,
    )
    summary, records = run_ensemble(
        ideal,
        spec,
        sched,
        with_conditions=True,
        steps=steps,
        trace_grid=config.grid_points,
        k=k,
        workers=config.workers,
    )
    ideal_rec = ideal_instance_record(ideal, sched, steps=steps, trace_grid=config.grid_points, k=k)
    ndir = _ndir(out, n)
    tag = f"{config.conditions_target}_s{_sigma_tag(config.conditions_sigma)}"
    write_instances(records, ndir / f"instances_{tag}.csv")
    write_scatter(ideal_rec, records, ndir / f"scatter_{tag}.csv")
    rep = ideal_rec.conditions
    print(
        f"N={n} {config.conditions_target} sigma={_sigma_tag(config.conditions_sigma)}:"
        f" ideal c1 = {rep.c1:.4g}, c2 = {rep.c2:.4g}, c3 = {rep.c3:.4g}, c4 = {rep.c4:.4g} ns;"
        f" mean P_S = {summary.mean_ps:.6f}"
    )


def _witness_fraction(cond: np.ndarray, ps: np.ndarray) -> float:
    """Fraction of instance pairs ordered the same way in condition and P_S.

    A perfectly informative figure of merit would order pairs oppositely
    (larger condition value, smaller success); same-way pairs witness that
    it does not rank adiabaticity here.
    """
    dc = cond[:, None] - cond[None, :]
    dp = ps[:, None] - ps[None, :]
    strict = (dc != 0) & (dp != 0)
    concordant = (dc * dp) > 0
    total = int(np.count_nonzero(strict))
    return float(np.count_nonzero(concordant & strict)) / total if total else 0.0


def cmd_report(config: ExperimentConfig, out: Path) -> None:
    """Aggregate existing CSV artifacts into report.md; no recomputation."""
    from scipy.stats import spearmanr

    lines = [f"# Run report", ""]
    calib_path = out / "calibration.csv"
    if calib_path.is_file():
        header, rows, _ = read_csv(calib_path)
        assert header == CALIBRATION_HEADER
        lines += ["## Calibration", "", "| N | t_f (ns) | fidelity | delta_min (rad/ns) |", "| - | - | - | - |"]
        lines += [f"| {r[0]} | {r[1]} | {r[2]} | {r[3]} |" for r in rows]
        dmins = [float(r[3]) for r in rows]
        tfs = [float(r[1]) for r in rows]
        lines.append("")
        lines.append(
            f"delta_min decreasing with N: {all(b < a for a, b in zip(dmins, dmins[1:]))}; "
            f"t_f increasing with N: {all(b > a for a, b in zip(tfs, tfs[1:]))}"
        )
        lines.append("")

    summary_tables = sorted(out.glob("N*/ensemble_summary.csv"))
    if summary_tables:
        lines += ["## Ensembles", ""]
        lines += ["| target | sigma | N | size | mean P_S | std P_S | mean dmin | gs match |", "| - | - | - | - | - | - | - | - |"]
        for path in summary_tables:
            _, rows, _ = read_csv(path)
            for r in rows:
                lines.append(f"| {r[0]} | {r[1]} | {r[2]} | {r[3]} | {r[4]} | {r[5]} | {r[6]} | {r[8]} |")
        lines.append("")

    instance_tables = sorted(out.glob("N*/instances_*.csv"))
    if instance_tables:
        lines += ["## Ground-state-preserving averages", ""]
        for path in instance_tables:
            _, rows, _ = read_csv(path)
            ps = np.array([float(r[2]) for r in rows])
            match = np.array([r[5] == "1" for r in rows])
            if np.any(match):
                lines.append(
                    f"- {path.parent.name}/{path.name}: mean P_S = {np.mean(ps):.8g}, "
                    f"matched-only = {np.mean(ps[match]):.8g} ({int(match.sum())}/{len(match)})"
                )
        lines.append("")

    hist_tables = sorted(out.glob("N*/dmin_hist_*.csv"))
    if hist_tables:
        lines += ["## Minimum-gap spread", ""]
        for path in hist_tables:
            _, rows, footers = read_csv(path)
            markers = dict(f.split(",", 1) for f in footers)
            lines.append(
                f"- {path.parent.name}/{path.name}: ideal = {markers.get('ideal_dmin')}, "
                f"mean = {markers.get('mean_dmin')}"
            )
        lines.append("")

    scatter_tables = sorted(out.glob("N*/scatter_*.csv"))
    if scatter_tables:
        lines += ["## Conditions against success probability", ""]
        for path in scatter_tables:
            _, rows, _ = read_csv(path)
            body = [r for r in rows if int(r[0]) >= 0]
            ps = np.array([float(r[9]) for r in body])
            lines.append(f"### {path.parent.name}/{path.name}")
            lines.append("")
            for ci, col in (("c1", 1), ("c2", 2), ("c3", 3), ("c4", 4)):
                vals = np.array([float(r[col]) for r in body])
                rho = spearmanr(vals, ps).statistic if len(body) > 2 else float("nan")
                frac = _witness_fraction(vals, ps)
                lines.append(
                    f"- {ci}: spearman(c, P_S) = {rho:.4f}, same-order pair fraction = {frac:.4f}"
                )
            high = np.array([float(r[4]) for r in body if float(r[9]) > 0.999])
            if len(high):
                lines.append(f"- c4 over P_S > 0.999 rows: max = {np.max(high):.8g} ns ({len(high)} rows)")
            lines.append("")

    figure_note = _render_figures(out)
    if figure_note:
        lines += ["## Figures", "", figure_note, ""]

    (out / "report.md").write_text("\n".join(lines))
    print(f"wrote {out / 'report.md'}")


def _render_figures(out: Path) -> str:
    """Render figures next to the CSVs when the plotting package is present."""
    try:
        from aqfigures.figures import render, FigureSpec, FIGURE_IDS
    except ImportError:
        return ""
    rendered = []
    for figure_id in FIGURE_IDS:
        target = out / "figures" / f"{figure_id}.svg"
        try:
            render(FigureSpec(figure_id=figure_id, in_dir=out, out_path=target))
            rendered.append(target.name)
        except Exception as exc:
            rendered.append(f"{figure_id} skipped ({exc})")
    return "Rendered: " + ", ".join(rendered) if rendered else ""


def run_pipeline(config: ExperimentConfig, out) -> None:
    """Run every stage in order into one artifact tree."""
    out = Path(out)
    _echo_config(config, out)
    cmd_calibrate(config, out)
    cmd_spectrum(config, out)
    cmd_evolve(config, out)
    cmd_ensemble(config, out)
    cmd_conditions(config, out)
    cmd_report(config, out)


_COMMANDS = {
    "calibrate": cmd_calibrate,
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "ensemble": cmd_ensemble,
    "conditions": cmd_conditions,
    "report": cmd_report,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aqchain",
        description="Adiabatic sweep simulation and analysis for disordered Ising chains",
    )
    parser.add_argument("--version", action="version", version=f"aqchain {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("calibrate", "find sweep durations meeting the fidelity target"),
        ("spectrum", "trace the instantaneous spectrum and minimum gap"),
        ("evolve", "propagate the ideal instance and record populations"),
        ("ensemble", "run disorder ensembles over sigma and targets"),
        ("conditions", "evaluate adiabaticity conditions on an ensemble"),
        ("report", "aggregate existing CSV artifacts into report.md"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, default=None, help="key = value config file")
        p.add_argument("--out", type=Path, default=Path("out"), help="artifact directory")
        p.add_argument("--seed", type=int, default=None, help="override master_seed")
        p.add_argument("--workers", type=int, default=None, help="worker process count")
        p.add_argument("--profile", choices=("paper", "ci"), default=None,
                       help="ci shrinks the ensemble to 128 instances")
    return parser


def _resolve_config(args) -> ExperimentConfig:
    config = parse_config(args.config) if args.config is not None else ExperimentConfig()
    if args.profile == "ci":
        config = replace(config, ensemble_size=128)
    elif args.profile == "paper":
        config = replace(config, ensemble_size=1024)
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    workers = args.workers
    if workers is None and os.environ.get(WORKERS_ENV):
        try:
            workers = int(os.environ[WORKERS_ENV])
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {os.environ[WORKERS_ENV]!r}")
    if workers is not None:
        config = replace(config, workers=workers)
    config.validate()
    return config


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    try:
        _echo_config(config, out)
        _COMMANDS[args.command](config, out)
    except (CalibrationError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())

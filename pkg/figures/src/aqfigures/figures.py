"""Draw the four standard views of a sweep-analysis artifact tree.

Everything plotted here is read back from the CSVs: the calibration table
(minimum gap and protocol duration against chain size), ensemble success
against disorder strength, minimum-gap histograms with their marker lines,
and success probability against the adiabaticity figures of merit. No
physics number is recomputed; the module only bins, scales and draws.

Output is deterministic for fixed inputs and library versions: the SVG
hash salt is pinned, glyphs are embedded as paths, and date metadata is
stripped from formats that would otherwise carry a timestamp.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

FIGURE_IDS = ("gap_vs_n", "ps_vs_sigma", "dmin_hist", "conditions_scatter")

CALIBRATION_HEADER = ["N", "t_f_ns", "fidelity", "delta_min"]
SUMMARY_HEADER = [
    "param_kind",
    "sigma_rel",
    "N",
    "size",
    "mean_ps",
    "std_ps",
    "mean_dmin",
    "std_dmin",
    "gs_match_fraction",
]
HIST_HEADER = ["bin_left", "bin_right", "count"]
SCATTER_HEADER = ["index", "c1", "c2", "c3", "c4", "c1_rel", "c2_rel", "c3_rel", "c4_rel", "ps"]

_RC = {"svg.hashsalt": "aqfigures", "svg.fonttype": "path"}
_FORMATS = {".svg": "svg", ".pdf": "pdf", ".png": "png"}


@dataclass(frozen=True)
class FigureSpec:
    """What to draw and where to put it.

    figure_id picks one of FIGURE_IDS, in_dir is the artifact tree the
    CSVs are read from, out_path decides the format by suffix (.svg, .pdf
    or .png). log_scale switches the figure-of-merit axes of the scatter
    view to log; the other views ignore it. dpi only affects raster output.
    """

    figure_id: str
    in_dir: str | Path
    out_path: str | Path
    log_scale: bool = False
    dpi: int = 150

    def __post_init__(self) -> None:
        if self.figure_id not in FIGURE_IDS:
            raise ValueError(f"unknown figure id {self.figure_id!r}, expected one of {FIGURE_IDS}")
        if self.dpi < 10:
            raise ValueError(f"dpi must be at least 10, got {self.dpi}")


def _read(path: Path) -> tuple[list[str], list[list[str]], list[str]]:
    """Read one artifact table: (header, data rows, footer lines)."""
    header: list[str] | None = None
    rows: list[list[str]] = []
    footers: list[str] = []
    with open(path, newline="\n") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                footers.append(line[1:].strip())
                continue
            if header is None:
                header = line.split(",")
            else:
                rows.append(line.split(","))
    if header is None:
        raise ValueError(f"{path} has no header line")
    return header, rows, footers


def _table(path: Path, expected: list[str]) -> tuple[list[list[str]], list[str]]:
    if not path.is_file():
        raise ValueError(f"missing input table {path}")
    header, rows, footers = _read(path)
    if header != expected:
        raise ValueError(f"{path} has header {header}, expected {expected}")
    if not rows:
        raise ValueError(f"{path} has no data rows")
    return rows, footers


def _split_tag(stem: str) -> tuple[str, float]:
    """Split a '<target>_s<sigma>' file tag into its parts."""
    target, _, sig = stem.rpartition("_s")
    if not target:
        raise ValueError(f"malformed ensemble tag {stem!r}")
    return target, float(sig)


def _chain_size(directory: Path) -> int:
    return int(directory.name[1:])


def _gap_vs_n(spec: FigureSpec):
    rows, _ = _table(Path(spec.in_dir) / "calibration.csv", CALIBRATION_HEADER)
    points = sorted((int(r[0]), float(r[3]), float(r[1])) for r in rows)
    sizes = [p[0] for p in points]
    gaps = [p[1] for p in points]
    durations = [p[2] for p in points]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(sizes, gaps, "o", color="tab:blue", markersize=7)
    ax.set_xlabel("chain size N")
    ax.set_ylabel("minimum gap (rad/ns)", color="tab:blue")
    ax.tick_params(axis="y", labelcolor="tab:blue")
    ax.set_xticks(sizes)
    twin = ax.twinx()
    twin.plot(sizes, durations, "*", color="tab:red", markersize=11)
    twin.set_ylabel("protocol duration (ns)", color="tab:red")
    twin.tick_params(axis="y", labelcolor="tab:red")
    fig.tight_layout()
    return fig


def _ps_vs_sigma(spec: FigureSpec):
    paths = sorted(Path(spec.in_dir).glob("N*/ensemble_summary.csv"))
    if not paths:
        raise ValueError(f"no ensemble summaries under {spec.in_dir}")
    rows = []
    for path in paths:
        table, _ = _table(path, SUMMARY_HEADER)
        rows.extend(table)

    # the largest chain carries the headline comparison
    n_show = max(int(r[2]) for r in rows)
    series: dict[str, list[tuple[float, float]]] = {}
    for r in rows:
        if int(r[2]) == n_show:
            series.setdefault(r[0], []).append((float(r[1]), float(r[4])))

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for kind in sorted(series):
        pts = sorted(series[kind])
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=kind)
    ax.set_xlabel("relative disorder strength")
    ax.set_ylabel("mean success probability")
    ax.set_title(f"N = {n_show}")
    ax.legend(title="disordered parameter")
    fig.tight_layout()
    return fig


def _marker_values(footers: list[str], path: Path) -> tuple[float, float]:
    values = {}
    for line in footers:
        key, _, raw = line.partition(",")
        if key in ("ideal_dmin", "mean_dmin"):
            values[key] = float(raw)
    if sorted(values) != ["ideal_dmin", "mean_dmin"]:
        raise ValueError(f"{path} lacks the ideal/mean marker footers")
    return values["ideal_dmin"], values["mean_dmin"]


def _histogram_panels(in_dir: Path) -> list[tuple[str, float, Path]]:
    """Pick, per disorder target of the largest chain, its widest-spread file."""
    best: dict[tuple[int, str], tuple[float, Path]] = {}
    for path in sorted(in_dir.glob("N*/dmin_hist_*.csv")):
        try:
            n = _chain_size(path.parent)
            target, sigma = _split_tag(path.name[len("dmin_hist_") : -len(".csv")])
        except ValueError:
            continue
        key = (n, target)
        if key not in best or sigma > best[key][0]:
            best[key] = (sigma, path)
    if not best:
        raise ValueError(f"no gap histograms under {in_dir}")
    n_show = max(n for n, _ in best)
    return [(t, s, p) for (n, t), (s, p) in sorted(best.items()) if n == n_show]


def _dmin_hist(spec: FigureSpec):
    panels = _histogram_panels(Path(spec.in_dir))
    fig, axes = plt.subplots(
        1, len(panels), figsize=(3.4 * len(panels), 3.4), sharey=True, squeeze=False
    )
    for ax, (target, sigma, path) in zip(axes[0], panels):
        rows, footers = _table(path, HIST_HEADER)
        left = [float(r[0]) for r in rows]
        right = [float(r[1]) for r in rows]
        counts = [float(r[2]) for r in rows]
        widths = [r - l for l, r in zip(left, right)]
        if max(widths) == 0.0:
            # single-value ensemble: give the lone bar a visible width
            pad = 0.02 * max(abs(left[0]), 1.0)
            ax.bar([left[0] - pad / 2], counts, width=pad, align="edge", color="0.65")
        else:
            ax.bar(left, counts, width=widths, align="edge", color="0.65", edgecolor="0.4")
        ideal, mean = _marker_values(footers, path)
        ax.axvline(ideal, color="tab:blue", linewidth=1.8, label="ideal gap")
        ax.axvline(mean, color="tab:red", linewidth=1.8, label="ensemble mean")
        ax.set_title(f"{target}, sigma = {sigma:g}")
        ax.set_xlabel("minimum gap (rad/ns)")
    axes[0][0].set_ylabel("instances")
    axes[0][0].legend()
    fig.tight_layout()
    return fig


def _conditions_scatter(spec: FigureSpec):
    paths = sorted(Path(spec.in_dir).glob("N*/scatter_*.csv"))
    if not paths:
        raise ValueError(f"no condition scatter tables under {spec.in_dir}")
    path = paths[0]
    rows, _ = _table(path, SCATTER_HEADER)
    ideal = [r for r in rows if int(r[0]) == -1]
    if len(ideal) != 1:
        raise ValueError(f"{path} needs exactly one ideal reference row, found {len(ideal)}")
    instances = [r for r in rows if int(r[0]) != -1]
    ps = [float(r[9]) for r in instances]

    n = _chain_size(path.parent)
    target, sigma = _split_tag(path.name[len("scatter_") : -len(".csv")])
    fig, axes = plt.subplots(2, 2, figsize=(7.4, 6.2), sharey=True)
    for i, ax in enumerate(axes.flat):
        col = 5 + i
        ax.plot([float(r[col]) for r in instances], ps, ".", color="tab:blue", alpha=0.7)
        ax.axvline(float(ideal[0][col]), color="0.2", linestyle="--", label="ideal instance")
        if spec.log_scale:
            ax.set_xscale("log")
        ax.set_xlabel(f"C{i + 1} relative to ideal")
    for ax in axes[:, 0]:
        ax.set_ylabel("success probability")
    axes[0][0].legend()
    fig.suptitle(f"N = {n}, {target} disorder, sigma = {sigma:g}")
    fig.tight_layout()
    return fig


_BUILDERS = {
    "gap_vs_n": _gap_vs_n,
    "ps_vs_sigma": _ps_vs_sigma,
    "dmin_hist": _dmin_hist,
    "conditions_scatter": _conditions_scatter,
}


def build_figure(spec: FigureSpec):
    """Build the matplotlib figure for spec, leaving output to the caller.

    The caller owns the figure and should close it when done.
    """
    with matplotlib.rc_context(_RC):
        return _BUILDERS[spec.figure_id](spec)


def render(spec: FigureSpec) -> Path:
    """Render spec to its output file and return the path written."""
    out = Path(spec.out_path)
    fmt = _FORMATS.get(out.suffix.lower())
    if fmt is None:
        raise ValueError(f"unsupported output format {out.suffix!r}, expected one of {sorted(_FORMATS)}")
    if fmt == "svg":
        metadata = {"Date": None}
    elif fmt == "pdf":
        metadata = {"CreationDate": None}
    else:
        metadata = None
    with matplotlib.rc_context(_RC):
        fig = _BUILDERS[spec.figure_id](spec)
        try:
            out.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(out, format=fmt, dpi=spec.dpi, metadata=metadata)
        finally:
            plt.close(fig)
    return out

"""End-to-end check against artifacts produced by the simulation CLI.

Runs the upstream pipeline once at CI scale (128 instances, small chains)
into a session directory, then renders every figure from the real CSV
tree. This is the contract the package exists for: markers come out equal
to the footer values, and rendering the same tree twice gives the same
bytes.
"""

import subprocess
import sys

import pytest

from aqfigures.figures import (
    FIGURE_IDS,
    FigureSpec,
    _histogram_panels,
    _marker_values,
    _read,
    build_figure,
    render,
)

CONFIG = """
n_list = 2, 3
grid_points = 201
ensemble_grid_points = 51
population_samples = 21
hist_bins = 10
conditions_n = 3
conditions_sigma = 0.1
conditions_target = lambda
master_seed = 7

[disorder]
sigma_list = 0.05, 0.1
targets = lambda, h, j
"""


def run_stage(stage, config, out):
    proc = subprocess.run(
        [sys.executable, "-m", "aqchain.cli", stage, "--config", str(config),
         "--out", str(out), "--profile", "ci"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, f"{stage} failed:\n{proc.stderr}"


@pytest.fixture(scope="session")
def ci_tree(tmp_path_factory):
    root = tmp_path_factory.mktemp("ci_run")
    config = root / "run.cfg"
    config.write_text(CONFIG)
    out = root / "out"
    for stage in ("calibrate", "ensemble", "conditions", "report"):
        run_stage(stage, config, out)
    return out


def test_all_figures_render_from_ci_run(ci_tree, tmp_path):
    for figure_id in FIGURE_IDS:
        path = render(FigureSpec(figure_id, ci_tree, tmp_path / f"{figure_id}.svg"))
        assert path.stat().st_size > 0


def test_histogram_markers_equal_csv_footers(ci_tree):
    panels = _histogram_panels(ci_tree)
    assert panels
    fig = build_figure(FigureSpec("dmin_hist", ci_tree, ci_tree / "unused.svg"))
    for ax, (_, _, path) in zip(fig.axes, panels):
        _, _, footers = _read(path)
        ideal, mean = _marker_values(footers, path)
        assert ax.lines[0].get_xdata()[0] == ideal
        assert ax.lines[1].get_xdata()[0] == mean


def test_rendering_is_idempotent_and_matches_report_output(ci_tree, tmp_path):
    report = (ci_tree / "report.md").read_text()
    assert "Rendered:" in report
    for figure_id in FIGURE_IDS:
        again = render(FigureSpec(figure_id, ci_tree, tmp_path / f"{figure_id}.svg"))
        pipeline_copy = ci_tree / "figures" / f"{figure_id}.svg"
        assert pipeline_copy.is_file()
        assert again.read_bytes() == pipeline_copy.read_bytes()

import pytest

from aqfigures.figures import CALIBRATION_HEADER, HIST_HEADER, SCATTER_HEADER, SUMMARY_HEADER


def table(path, header, rows, footers=()):
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    lines += [",".join(str(v) for v in row) for row in rows]
    lines += [f"# {f}" for f in footers]
    path.write_text("\n".join(lines) + "\n", newline="\n")
    return path


@pytest.fixture
def tree(tmp_path):
    """A small artifact tree with every table the figures read."""
    table(
        tmp_path / "calibration.csv",
        CALIBRATION_HEADER,
        [[4, 23.84, 0.9999751, 3.72], [2, 21.44, 0.9999752, 3.83], [3, 22.98, 0.999975, 3.75]],
    )
    table(
        tmp_path / "N2" / "ensemble_summary.csv",
        SUMMARY_HEADER,
        [
            ["lambda", 0.05, 2, 8, 0.99991, 1e-5, 3.7, 0.2, 1],
            ["lambda", 0.1, 2, 8, 0.99985, 2e-5, 3.65, 0.39, 1],
            ["h", 0.05, 2, 8, 0.999974, 4e-6, 3.82, 0.01, 1],
            ["h", 0.1, 2, 8, 0.999971, 6e-6, 3.81, 0.018, 1],
        ],
    )
    table(
        tmp_path / "N4" / "ensemble_summary.csv",
        SUMMARY_HEADER,
        [
            ["lambda", 0.05, 4, 8, 0.9998, 1e-5, 3.6, 0.25, 1],
            ["lambda", 0.1, 4, 8, 0.9994, 3e-5, 3.5, 0.45, 1],
            ["h", 0.05, 4, 8, 0.999972, 5e-6, 3.71, 0.012, 1],
            ["h", 0.1, 4, 8, 0.999969, 8e-6, 3.7, 0.02, 1],
        ],
    )
    table(
        tmp_path / "N4" / "dmin_hist_lambda_s0.05.csv",
        HIST_HEADER,
        [[3.4, 3.6, 2], [3.6, 3.8, 6]],
        footers=["ideal_dmin,3.72", "mean_dmin,3.6"],
    )
    table(
        tmp_path / "N4" / "dmin_hist_lambda_s0.1.csv",
        HIST_HEADER,
        [[3.0, 3.4, 3], [3.4, 3.8, 4], [3.8, 4.2, 1]],
        footers=["ideal_dmin,3.72", "mean_dmin,3.5"],
    )
    table(
        tmp_path / "N4" / "dmin_hist_h_s0.1.csv",
        HIST_HEADER,
        [[3.68, 3.7, 4], [3.7, 3.72, 4]],
        footers=["ideal_dmin,3.72", "mean_dmin,3.7"],
    )
    table(
        tmp_path / "N2" / "dmin_hist_lambda_s0.1.csv",
        HIST_HEADER,
        [[3.6, 3.9, 8]],
        footers=["ideal_dmin,3.83", "mean_dmin,3.75"],
    )
    rows = [[-1, 0.06, 0.12, 0.06, 2270.0, 1, 1, 1, 1, 0.9999751]]
    for i, (rel, ps) in enumerate([(0.9, 0.99998), (1.2, 0.9999), (1.5, 0.9995), (0.8, 0.99999)]):
        rows.append([i, 0.06 * rel, 0.12 * rel, 0.06 * rel, 2270.0 * rel, rel, rel, rel, rel, ps])
    table(tmp_path / "N4" / "scatter_lambda_s0.1.csv", SCATTER_HEADER, rows)
    return tmp_path

"""
Plot data of an evaluation run: the fin angle over the first five seconds in
polar form and the force with its 200-sample moving average over the first
ten seconds, as CSV files plus SVG renderings. Output is byte-for-byte
reproducible.
"""

import logging
import os
from typing import Dict

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from softfin.datagen import DataLog
from softfin.evaluation import AVERAGE_WINDOW, write_csv_rows
from softfin.metrics import moving_average
from softfin.plant import SAMPLE_PERIOD

logger = logging.getLogger(__name__)

POLAR_SECONDS = 5.0
FORCE_SECONDS = 10.0
POLAR_COLUMNS = ("t", "theta_deg")
FORCE_COLUMNS = ("t", "fx", "fy", "fx_avg", "fy_avg")
SVG_SALT = "softfin"


def _rows(seconds: float) -> int:
    return int(round(seconds / SAMPLE_PERIOD))


def polar_data(trace: DataLog) -> np.ndarray:
    """
    (500, 2) time and fin angle in degrees over the first five seconds.
    """
    n = _rows(POLAR_SECONDS)
    return np.column_stack([trace.t[:n], np.degrees(trace.theta[:n])])


def force_data(trace: DataLog, window: int = AVERAGE_WINDOW) -> np.ndarray:
    """
    (1000, 5) time, raw force and its moving average over the first ten
    seconds.
    """
    n = _rows(FORCE_SECONDS)
    fx = trace.fx[:n]
    fy = trace.fy[:n]
    return np.column_stack(
        [trace.t[:n], fx, fy, moving_average(fx, window), moving_average(fy, window)]
    )


def _save_svg(figure: Figure, path: str) -> None:
    with matplotlib.rc_context({"svg.hashsalt": SVG_SALT}):
        figure.savefig(path, format="svg", metadata={"Date": None})


def _render_polar(polar: np.ndarray, path: str) -> None:
    figure = Figure(figsize=(5, 5))
    axes = figure.add_subplot(projection="polar")
    axes.plot(np.radians(polar[:, 1]), polar[:, 0], linewidth=1.0)
    axes.set_thetamin(-90)
    axes.set_thetamax(90)
    axes.set_theta_zero_location("N")
    axes.set_title("Fin angle, first 5 s (radius: time)")
    _save_svg(figure, path)


def _exact_rows(values: np.ndarray):
    return [[repr(float(v)) for v in row] for row in values]


def _render_force(force: np.ndarray, reference, path: str) -> None:
    figure = Figure(figsize=(8, 5))
    axes = figure.subplots(2, 1, sharex=True)
    for index, (ax, name) in enumerate(zip(axes, ("x", "y"))):
        ax.plot(force[:, 0], force[:, 1 + index], linewidth=0.5, alpha=0.5, label="raw")
        ax.plot(force[:, 0], force[:, 3 + index], linewidth=1.5, label="moving average")
        if reference is not None:
            ax.axhline(
                reference[index], linestyle="--", linewidth=1.0, label="reference"
            )
        ax.set_ylabel(f"F{name} [N]")
        ax.legend(loc="upper right")
    axes[-1].set_xlabel("time [s]")
    _save_svg(figure, path)


def emit_plots(
    trace: DataLog, outdir: str, reference=None, window: int = AVERAGE_WINDOW
) -> Dict[str, str]:
    """
    Write polar.csv, force.csv, polar.svg and force.svg into ``outdir``.
    The force data carries a ``window``-sample moving average.

    :return: Paths by file name.
    :raises ValueError: If the trace is shorter than ten seconds.
    :raises OSError: If ``outdir`` cannot be written.
    """
    if len(trace) < _rows(FORCE_SECONDS):
        raise ValueError(
            f"plots need {FORCE_SECONDS:g} s of trace, "
            f"got {len(trace) * SAMPLE_PERIOD:.2f} s"
        )
    os.makedirs(outdir, exist_ok=True)
    polar = polar_data(trace)
    force = force_data(trace, window)
    paths = {
        name: os.path.join(outdir, name)
        for name in ("polar.csv", "force.csv", "polar.svg", "force.svg")
    }
    write_csv_rows(paths["polar.csv"], POLAR_COLUMNS, _exact_rows(polar))
    write_csv_rows(paths["force.csv"], FORCE_COLUMNS, _exact_rows(force))
    _render_polar(polar, paths["polar.svg"])
    _render_force(force, reference, paths["force.svg"])
    logger.info("Wrote plot data to %s", outdir)
    return paths

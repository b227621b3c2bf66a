"""
Surrogate inference metrics on held-out logs, laid out like the published
"Models Inference" table: Model, Window, Parameters, RMSE, MAE, DTW.
"""

import csv
import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Protocol, Sequence, Tuple

import numpy as np

from softfin.datagen import DataLog
from softfin.errors import ConfigurationError
from softfin.metrics import dtw, mae, rmse
from softfin.surrogate.model import LogPrediction

logger = logging.getLogger(__name__)

TABLE_COLUMNS = (
    "Model",
    "Window",
    "Parameters",
    "Reference parameters",
    "RMSE",
    "MAE",
    "DTW",
)


class SurrogatePredictor(Protocol):
    """
    Anything that can replay a log one step at a time.
    """

    window: int

    def predict_log(self, log: DataLog) -> LogPrediction:
        """
        One-step predictions over ``log`` from its logged inputs.
        """

    def parameter_counts(self) -> Dict[str, Tuple[int, int]]:
        """
        (ours, published) parameter counts keyed "PosNet" and "ForceNet".
        """


@dataclass
class MetricsRow:
    """
    One table row, averaged over the test logs.
    """

    model: str
    window: int
    parameters: int
    reference_parameters: int
    rmse: float
    mae: float
    dtw: float

    def as_row(self) -> List[str]:
        """
        Cells in TABLE_COLUMNS order.
        """
        return [
            self.model,
            str(self.window),
            str(self.parameters),
            str(self.reference_parameters),
            repr(self.rmse),
            repr(self.mae),
            repr(self.dtw),
        ]


def _signals(
    log: DataLog, prediction: LogPrediction
) -> Dict[str, Tuple[np.ndarray, np.ndarray]]:
    start = prediction.offset
    forces = log.forces[start:]
    return {
        "PosNet": (log.theta[start:], prediction.theta),
        "ForceNet": (forces, prediction.forces),
        "ForceNet x": (forces[:, 0], prediction.forces[:, 0]),
        "ForceNet y": (forces[:, 1], prediction.forces[:, 1]),
    }


def evaluate_surrogate(
    model: SurrogatePredictor, logs: Sequence[DataLog], dtw_band: int = 100
) -> List[MetricsRow]:
    """
    RMSE, MAE and path-normalized DTW of the one-step predictions, averaged
    over ``logs``. The "ForceNet" row compares both axes together, DTW on the
    2-D samples; the per-axis rows follow it.

    :raises ConfigurationError: Without test logs.
    """
    if len(logs) == 0:
        raise ConfigurationError("evaluate_surrogate needs at least one test log")
    scores: Dict[str, List[Tuple[float, float, float]]] = {}
    for index, log in enumerate(logs):
        prediction = model.predict_log(log)
        for name, (actual, predicted) in _signals(log, prediction).items():
            band = min(dtw_band, len(actual)) if dtw_band is not None else None
            scores.setdefault(name, []).append(
                (
                    rmse(actual, predicted),
                    mae(actual, predicted),
                    dtw(actual, predicted, band=band),
                )
            )
        logger.info("Evaluated surrogate on test log %d", index)

    counts = model.parameter_counts()
    rows = []
    for name, values in scores.items():
        ours, reference = counts[name.split()[0]]
        means = np.mean(np.array(values), axis=0)
        rows.append(
            MetricsRow(
                name,
                model.window,
                ours,
                reference,
                float(means[0]),
                float(means[1]),
                float(means[2]),
            )
        )
    return rows


def write_metrics_table(rows: Sequence[MetricsRow], path: str) -> None:
    """
    Write the table as comma separated text with a header row.
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TABLE_COLUMNS)
        for row in rows:
            writer.writerow(row.as_row())


def read_metrics_table(path: str) -> List[MetricsRow]:
    """
    Read a table written by ``write_metrics_table``.
    """
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        return [
            MetricsRow(
                record["Model"],
                int(record["Window"]),
                int(record["Parameters"]),
                int(record["Reference parameters"]),
                float(record["RMSE"]),
                float(record["MAE"]),
                float(record["DTW"]),
            )
            for record in reader
        ]

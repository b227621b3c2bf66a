"""
Controllers trained on the surrogate, tested on the plant.

The headline statistics of a run are taken from the 200-sample moving average
of the force: per axis the mean absolute deviation from the reference
("error") and the spread of the moving average ("std"). The spread of the raw
force is reported next to them.

Example Usage:

```python
summary, trajectory = run_evaluation(policy, PlantParams(), (2.0, 0.0), seed=1)
write_trace(trajectory, "out/eval/trace.csv")
```
"""

import csv
import logging
import os
from dataclasses import asdict, dataclass, fields
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from softfin.datagen import DataLog, read_log, write_log
from softfin.errors import EvaluationError, NonFiniteError, PlantFault
from softfin.metrics import moving_average
from softfin.plant import SAMPLE_PERIOD, PlantParams
from softfin.reward import RewardParams
from softfin.rl.environment import (
    TICK_PATTERN,
    TICKS_PER_CYCLE,
    PlantEnvironment,
    SurrogateEnvironment,
    Trajectory,
    dual_rate_rollout,
    ticks_for,
)
from softfin.rl.policy import Controller
from softfin.rl.state import DEFAULT_HISTORY
from softfin.rl.training import GridBank, grid_select
from softfin.surrogate.model import SurrogateModel

logger = logging.getLogger(__name__)

EVAL_STEPS = 90
MIN_DURATION = 2.0
AVERAGE_WINDOW = 200
EVAL_TICKS = 3000
OVERALL = "Overall mean"
COMPARE_COLUMNS = (
    "Reference",
    "Single x error",
    "Single x std",
    "Single y error",
    "Single y std",
    "Grid x error",
    "Grid x std",
    "Grid y error",
    "Grid y std",
)
TRANSFER_COLUMNS = ("Reference", "Surrogate error", "Plant error", "Ratio")

Reference = Tuple[float, float]


@dataclass
class EvalSummary:
    """
    Statistics of one evaluation run.
    """

    reference_x: float
    reference_y: float
    seed: int
    x_error: float
    x_std: float
    y_error: float
    y_std: float
    x_raw_std: float
    y_raw_std: float
    mean_reward: float
    duration: float

    @property
    def reference(self) -> Reference:
        """
        (F_ref_x, F_ref_y).
        """
        return self.reference_x, self.reference_y

    @property
    def mean_error(self) -> float:
        """
        Average of the two axis errors.
        """
        return 0.5 * (self.x_error + self.y_error)


def decisions_within(n_ticks: int) -> int:
    """
    Most decisions whose tick blocks fit in ``n_ticks``.
    """
    cycles, rest = divmod(n_ticks, TICKS_PER_CYCLE)
    decisions = cycles * len(TICK_PATTERN)
    for block in TICK_PATTERN:
        if rest < block:
            break
        rest -= block
        decisions += 1
    return decisions


def summarize_forces(
    forces: np.ndarray,
    reference: Reference,
    rewards: Sequence[float] = (),
    seed: int = 0,
    window: int = AVERAGE_WINDOW,
    max_ticks: Optional[int] = EVAL_TICKS,
) -> EvalSummary:
    """
    Summary of a (n, 2) force trace sampled at 100 Hz.

    Only the first ``max_ticks`` samples (30 s by default) and the rewards of
    the decisions inside them count; None keeps the whole run.
    """
    forces = np.asarray(forces, dtype=np.float64).reshape(-1, 2)
    if max_ticks is not None and len(forces) > max_ticks:
        forces = forces[:max_ticks]
        rewards = rewards[: decisions_within(max_ticks)]
    stats = []
    for axis in range(2):
        smoothed = moving_average(forces[:, axis], window)
        stats.append(
            (
                float(np.mean(np.abs(smoothed - reference[axis]))),
                float(np.std(smoothed)),
                float(np.std(forces[:, axis])),
            )
        )
    (x_error, x_std, x_raw), (y_error, y_std, y_raw) = stats
    return EvalSummary(
        float(reference[0]),
        float(reference[1]),
        seed,
        x_error,
        x_std,
        y_error,
        y_std,
        x_raw,
        y_raw,
        float(np.mean(rewards)) if len(rewards) else 0.0,
        len(forces) * SAMPLE_PERIOD,
    )


def run_evaluation(
    controller: Controller,
    plant_params: Optional[PlantParams],
    reference: Reference,
    seed: int,
    n_control_steps: int = EVAL_STEPS,
    reward_params: Optional[RewardParams] = None,
    k: int = DEFAULT_HISTORY,
    window: int = AVERAGE_WINDOW,
) -> Tuple[EvalSummary, Trajectory]:
    """
    Drive the plant with ``controller`` in deterministic (mean) mode.
    ``window`` is the moving-average length of the summary.

    :raises EvaluationError: If the run would be shorter than two seconds, or
        the plant or controller faults; the partial trajectory is attached.
    """
    duration = 0.0
    if n_control_steps > 0:
        duration = ticks_for(n_control_steps) * SAMPLE_PERIOD
    if duration < MIN_DURATION:
        raise EvaluationError(
            f"evaluation of {duration:.2f} s is shorter than {MIN_DURATION} s"
        )
    trajectory = Trajectory(reference)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 21]))
    try:
        dual_rate_rollout(
            controller,
            PlantEnvironment(plant_params),
            reference,
            n_control_steps,
            reward_params,
            k=k,
            mode="mean",
            rng=rng,
            seed=seed,
            trajectory=trajectory,
        )
    except (PlantFault, NonFiniteError) as e:
        raise EvaluationError(
            f"evaluation at {reference} stopped after {trajectory.duration:.2f} s: {e}",
            partial_trace=trajectory,
        ) from e
    summary = summarize_forces(
        trajectory.force_trace, reference, trajectory.rewards, seed, window
    )
    logger.info(
        "Evaluated at (%.2f, %.2f) seed %d: x error %.4f, y error %.4f",
        reference[0],
        reference[1],
        seed,
        summary.x_error,
        summary.y_error,
    )
    return summary, trajectory


def trace_log(trajectory: Trajectory) -> DataLog:
    """
    The 100 Hz trace of a run in the dataset log layout.
    """
    commands = trajectory.command_trace
    forces = trajectory.force_trace
    return DataLog(
        np.arange(len(forces)) * SAMPLE_PERIOD,
        commands[:, 0],
        commands[:, 1],
        trajectory.theta_trace,
        forces[:, 0],
        forces[:, 1],
    )


def write_trace(trajectory: Trajectory, path: str) -> None:
    """
    Write the raw trace as ``trace.csv``-style text, creating the directory.
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    write_log(trace_log(trajectory), path)


def read_trace(path: str) -> DataLog:
    """
    Read a trace written by ``write_trace``.
    """
    return read_log(path)


def write_csv_rows(
    path: str, header: Sequence[str], rows: Sequence[Sequence[str]]
) -> None:
    """
    Header plus rows, creating the directory.
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_summaries(summaries: Sequence[EvalSummary], path: str) -> None:
    """
    One row per run, exact float text.
    """
    header = [f.name for f in fields(EvalSummary)]
    rows = [[repr(v) for v in asdict(s).values()] for s in summaries]
    write_csv_rows(path, header, rows)


def read_summaries(path: str) -> List[EvalSummary]:
    """
    Inverse of ``write_summaries``.
    """
    parsers = {
        column.name: int if column.name == "seed" else float
        for column in fields(EvalSummary)
    }
    with open(path, "r", encoding="utf-8", newline="") as f:
        return [
            EvalSummary(**{key: parse(record[key]) for key, parse in parsers.items()})
            for record in csv.DictReader(f)
        ]


@dataclass
class ComparisonRow:
    """
    Seed-averaged statistics of both controllers at one reference.
    """

    label: str
    single: Tuple[float, float, float, float]
    grid: Tuple[float, float, float, float]


@dataclass
class Comparison:
    """
    The comparison table and the per-seed grid-versus-single x error check.
    """

    rows: List[ComparisonRow]
    ordering: Dict[int, bool]
    summaries: Dict[str, List[EvalSummary]]

    @property
    def overall(self) -> ComparisonRow:
        """
        The overall mean row.
        """
        return self.rows[-1]

    @property
    def ordering_holds(self) -> bool:
        """
        Seed-averaged grid x error is no larger than the single policy's.
        """
        return self.overall.grid[0] <= self.overall.single[0]


def reference_label(reference: Reference) -> str:
    """
    "(x, y)" text of a reference.
    """
    return f"({reference[0]:g}, {reference[1]:g})"


def _axis_stats(summaries: Sequence[EvalSummary]) -> Tuple[float, float, float, float]:
    values = np.array([[s.x_error, s.x_std, s.y_error, s.y_std] for s in summaries])
    return tuple(float(v) for v in values.mean(axis=0))


def compare_controllers(
    single: Controller,
    bank: GridBank,
    references: Sequence[Reference],
    seeds: Sequence[int],
    plant_params: Optional[PlantParams] = None,
    reward_params: Optional[RewardParams] = None,
    k: int = DEFAULT_HISTORY,
    n_control_steps: int = EVAL_STEPS,
    window: int = AVERAGE_WINDOW,
) -> Comparison:
    """
    Evaluate the single policy and the grid bank on the plant at every
    reference and seed. Grid runs use the policy ``grid_select`` picks.
    """
    summaries: Dict[str, List[EvalSummary]] = {"single": [], "grid": []}
    rows = []
    for reference in references:
        grid_policy = grid_select(bank, reference).policy
        per_reference = {"single": [], "grid": []}
        for seed in seeds:
            for name, controller in (("single", single), ("grid", grid_policy)):
                summary, _ = run_evaluation(
                    controller,
                    plant_params,
                    reference,
                    seed,
                    n_control_steps,
                    reward_params,
                    getattr(controller, "k", k),
                    window,
                )
                per_reference[name].append(summary)
        rows.append(
            ComparisonRow(
                reference_label(reference),
                _axis_stats(per_reference["single"]),
                _axis_stats(per_reference["grid"]),
            )
        )
        for name in summaries:
            summaries[name].extend(per_reference[name])
    rows.append(
        ComparisonRow(
            OVERALL, _axis_stats(summaries["single"]), _axis_stats(summaries["grid"])
        )
    )

    ordering = {}
    for seed in seeds:
        single_x = np.mean([s.x_error for s in summaries["single"] if s.seed == seed])
        grid_x = np.mean([s.x_error for s in summaries["grid"] if s.seed == seed])
        ordering[seed] = bool(grid_x <= single_x)
        if not ordering[seed]:
            logger.warning(
                "Seed %d: grid x error %.4f exceeds single x error %.4f",
                seed,
                grid_x,
                single_x,
            )
    return Comparison(rows, ordering, summaries)


def write_comparison(comparison: Comparison, path: str) -> None:
    """
    Reference rows, the overall mean row, then one ordering flag row per seed.
    """
    rows = [
        [row.label] + [repr(v) for v in row.single] + [repr(v) for v in row.grid]
        for row in comparison.rows
    ]
    for seed, holds in comparison.ordering.items():
        rows.append([f"Ordering seed {seed}", "grid<=single" if holds else "violated"])
    write_csv_rows(path, COMPARE_COLUMNS, rows)


def read_comparison(path: str) -> Comparison:
    """
    Inverse of ``write_comparison``; per-run summaries are not stored.
    """
    rows = []
    ordering = {}
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        next(reader)
        for record in reader:
            if record[0].startswith("Ordering seed "):
                ordering[int(record[0].rsplit(" ", 1)[1])] = record[1] == "grid<=single"
                continue
            values = [float(v) for v in record[1:]]
            rows.append(ComparisonRow(record[0], tuple(values[:4]), tuple(values[4:])))
    return Comparison(rows, ordering, {})


@dataclass
class TransferRow:
    """
    Mean axis error of one grid policy at its own reference, on both systems.
    """

    reference: Reference
    surrogate_error: float
    plant_error: float

    @property
    def ratio(self) -> float:
        """
        Plant error over surrogate error.
        """
        if self.surrogate_error == 0.0:
            return float("inf") if self.plant_error > 0.0 else 1.0
        return self.plant_error / self.surrogate_error


def transfer_report(
    bank: GridBank,
    surrogate: SurrogateModel,
    seeds: Sequence[int],
    plant_params: Optional[PlantParams] = None,
    reward_params: Optional[RewardParams] = None,
    n_control_steps: int = EVAL_STEPS,
    window: int = AVERAGE_WINDOW,
) -> List[TransferRow]:
    """
    How well each grid policy's surrogate performance carries over to the
    plant, at the reference it was trained for.
    """
    rows = []
    for point in bank.points:
        policy = bank[point].policy
        simulated = dual_rate_rollout(
            policy,
            SurrogateEnvironment(surrogate),
            point,
            n_control_steps,
            reward_params,
            k=policy.k,
            mode="mean",
        )
        surrogate_error = summarize_forces(
            simulated.force_trace, point, window=window
        ).mean_error
        plant_error = float(
            np.mean(
                [
                    run_evaluation(
                        policy,
                        plant_params,
                        point,
                        seed,
                        n_control_steps,
                        reward_params,
                        policy.k,
                        window,
                    )[0].mean_error
                    for seed in seeds
                ]
            )
        )
        rows.append(TransferRow(point, surrogate_error, plant_error))
        logger.info(
            "Transfer at %s: surrogate %.4f, plant %.4f",
            reference_label(point),
            surrogate_error,
            plant_error,
        )
    return rows


def write_transfer(rows: Sequence[TransferRow], path: str) -> None:
    """
    One row per grid point.
    """
    write_csv_rows(
        path,
        TRANSFER_COLUMNS,
        [
            [
                reference_label(r.reference),
                repr(r.surrogate_error),
                repr(r.plant_error),
                repr(r.ratio),
            ]
            for r in rows
        ],
    )

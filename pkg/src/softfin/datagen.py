"""
Data collection against the plant: random command streams, 100 Hz logs and
dataset persistence.

A dataset directory holds a ``manifest`` (INI text) and one delimited file per
log, ``log_000.csv`` onwards, with the header
``t,cmd_angle,cmd_omega,theta,fx,fy``.

Example Usage:

```python
dataset = generate_dataset(DatasetConfig(train_logs=2, test_logs=1), seed=7)
write_dataset(dataset.logs, dataset.manifest, "out/dataset")
train = read_dataset("out/dataset").split("train")
```
"""

import configparser
import csv
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from softfin.errors import ConfigurationError, DatasetError
from softfin.plant import (
    ANGLE_LIMIT,
    OMEGA_MAX,
    OMEGA_MIN,
    SAMPLE_PERIOD,
    FinPlant,
    MotorCommand,
    PlantParams,
)

logger = logging.getLogger(__name__)

COLUMNS = ("t", "cmd_angle", "cmd_omega", "theta", "fx", "fy")
MANIFEST_NAME = "manifest"
SPLITS = ("train", "test")
MIN_LOG_SAMPLES = 100


@dataclass
class DataLog:
    """
    One 100 Hz log; every column is a float64 array of the same length.
    """

    t: np.ndarray
    cmd_angle: np.ndarray
    cmd_omega: np.ndarray
    theta: np.ndarray
    fx: np.ndarray
    fy: np.ndarray

    def __post_init__(self):
        lengths = {name: len(getattr(self, name)) for name in COLUMNS}
        if len(set(lengths.values())) != 1:
            raise ConfigurationError(f"DataLog columns differ in length: {lengths}")
        for name in COLUMNS:
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))

    def __len__(self) -> int:
        return len(self.t)

    @property
    def commands(self) -> np.ndarray:
        """
        (n, 2) array of (cmd_angle, cmd_omega).
        """
        return np.stack([self.cmd_angle, self.cmd_omega], axis=1)

    @property
    def forces(self) -> np.ndarray:
        """
        (n, 2) array of (fx, fy).
        """
        return np.stack([self.fx, self.fy], axis=1)

    def command_list(self) -> List[MotorCommand]:
        """
        Logged commands, one per row.
        """
        return [MotorCommand(a, w) for a, w in zip(self.cmd_angle, self.cmd_omega)]

    def slice(self, start: int, stop: int) -> "DataLog":
        """
        Rows [start, stop), timestamps kept.
        """
        return DataLog(*(getattr(self, name)[start:stop] for name in COLUMNS))


@dataclass
class DatasetManifest:
    """
    What was generated and how: per-file split tags, the run seed and the
    plant parameter fingerprint.
    """

    seed: int
    params_hash: str
    files: Dict[str, str] = field(default_factory=dict)
    plant: Dict[str, float] = field(default_factory=dict)

    def names(self, split: Optional[str] = None) -> List[str]:
        """
        File names in order, optionally restricted to one split.
        """
        return [name for name, tag in self.files.items() if split in (None, tag)]


@dataclass
class Dataset:
    """
    Manifest plus the logs it names.
    """

    manifest: DatasetManifest
    logs: Dict[str, DataLog]

    def split(self, tag: str) -> List[DataLog]:
        """
        Logs tagged ``tag`` ("train" or "test"), in manifest order.
        """
        if tag not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}, got {tag!r}")
        return [self.logs[name] for name in self.manifest.names(tag)]


@dataclass(frozen=True)
class DatasetConfig:
    """
    Size and re-issue rule of a generated dataset.
    """

    train_logs: int = 20
    test_logs: int = 3
    log_samples: int = 2000
    command_timeout: float = 3.0
    reach_tolerance: float = 0.01

    def __post_init__(self):
        if self.train_logs < 1 or self.test_logs < 1:
            raise ConfigurationError(
                "A dataset needs at least one train and one test log"
            )
        if self.log_samples < MIN_LOG_SAMPLES:
            raise ConfigurationError(
                f"log_samples must be at least {MIN_LOG_SAMPLES}, "
                f"got {self.log_samples}"
            )


def sample_command(rng: np.random.Generator) -> MotorCommand:
    """
    Uniform random command: angle in (-pi/2, pi/2), speed in (1, pi).
    """
    angle = rng.uniform(-ANGLE_LIMIT, ANGLE_LIMIT)
    omega = rng.uniform(OMEGA_MIN, OMEGA_MAX)
    return MotorCommand(float(angle), float(omega))


def collect_log(
    plant: FinPlant,
    n_samples: int,
    rng: np.random.Generator,
    command_timeout: float = 3.0,
    reach_tolerance: float = 0.01,
) -> DataLog:
    """
    Drive ``plant`` with random commands and log every tick.

    A new command is issued when the motor is within ``reach_tolerance`` of the
    target or ``command_timeout`` seconds have passed since the last issue.

    :raises ConfigurationError: If ``n_samples`` is shorter than one window.
    :raises PlantFault: Propagated from the plant.
    """
    if n_samples < MIN_LOG_SAMPLES:
        raise ConfigurationError(
            f"n_samples must be at least {MIN_LOG_SAMPLES}, got {n_samples}"
        )
    timeout_ticks = int(round(command_timeout / SAMPLE_PERIOD))
    rows = np.empty((n_samples, len(COLUMNS)), dtype=np.float64)
    command = None
    issued_at = 0
    for k in range(n_samples):
        due = command is None or k - issued_at >= timeout_ticks
        if not due:
            due = abs(plant.state.theta_m - command.target_angle) < reach_tolerance
        if due:
            command = sample_command(rng)
            issued_at = k
        sample = plant.step(command)
        rows[k] = (
            k * SAMPLE_PERIOD,
            command.target_angle,
            command.target_angular_velocity,
            plant.state.theta_m,
            sample.fx,
            sample.fy,
        )
    return DataLog(*rows.T)


def count_commands(log: DataLog) -> int:
    """
    Number of distinct command issues in a log.
    """
    changed = np.any(np.diff(log.commands, axis=0) != 0.0, axis=1)
    return int(changed.sum()) + (1 if len(log) else 0)


def generate_dataset(
    dataset_config: DatasetConfig, seed: int, params: Optional[PlantParams] = None
) -> Dataset:
    """
    Collect train and test logs, each from its own seed spawned from ``seed``.
    The result depends only on (config, seed, params).
    """
    params = params or PlantParams()
    total = dataset_config.train_logs + dataset_config.test_logs
    children = np.random.SeedSequence(seed).spawn(total)
    manifest = DatasetManifest(
        seed=seed,
        params_hash=params.fingerprint(),
        plant={
            name: getattr(params, name)
            for name in ("c_n", "c_a", "tau", "a_max", "sigma")
        },
    )
    logs: Dict[str, DataLog] = {}
    for index, child in enumerate(children):
        name = f"log_{index:03d}.csv"
        split = "train" if index < dataset_config.train_logs else "test"
        command_seq, plant_seq = child.spawn(2)
        plant = FinPlant(params)
        plant.reset(int(plant_seq.generate_state(1)[0]))
        logs[name] = collect_log(
            plant,
            dataset_config.log_samples,
            np.random.default_rng(command_seq),
            dataset_config.command_timeout,
            dataset_config.reach_tolerance,
        )
        manifest.files[name] = split
        logger.info(
            "Collected %s (%s, %d samples, %d commands)",
            name,
            split,
            len(logs[name]),
            count_commands(logs[name]),
        )
    return Dataset(manifest, logs)


def _write_manifest(manifest: DatasetManifest, path: str) -> None:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser["dataset"] = {
        "seed": str(manifest.seed),
        "params_hash": manifest.params_hash,
    }
    parser["plant"] = {key: repr(value) for key, value in manifest.plant.items()}
    parser["files"] = dict(manifest.files)
    with open(path, "w", encoding="utf-8") as f:
        parser.write(f)


def _read_manifest(path: str) -> DatasetManifest:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        with open(path, "r", encoding="utf-8") as f:
            parser.read_file(f)
        manifest = DatasetManifest(
            seed=parser.getint("dataset", "seed"),
            params_hash=parser.get("dataset", "params_hash"),
            files=dict(parser.items("files")),
            plant={key: float(value) for key, value in parser.items("plant")},
        )
    except (configparser.Error, ValueError) as e:
        raise DatasetError(f"Malformed manifest: {e}", path) from e
    for name, split in manifest.files.items():
        if split not in SPLITS:
            raise DatasetError(f"File {name} has unknown split {split!r}", path)
    return manifest


def write_log(log: DataLog, path: str) -> None:
    """
    Write one log with a header row; floats use their shortest exact form.
    """
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in zip(*(getattr(log, name) for name in COLUMNS)):
            writer.writerow([repr(float(value)) for value in row])


def read_log(path: str) -> DataLog:
    """
    Read one log written by ``write_log``.

    :raises DatasetError: On a missing column, a short row or a bad number,
        with the offending line number.
    """
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise DatasetError("File is empty", path, 1)
        header = [name.strip() for name in header]
        for name in COLUMNS:
            if name not in header:
                raise DatasetError(f"Missing column {name!r}", path, 1)
        positions = [header.index(name) for name in COLUMNS]
        values: List[List[float]] = []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise DatasetError(
                    f"Expected {len(header)} fields, got {len(row)}", path, line
                )
            try:
                parsed = [float(row[i]) for i in positions]
            except ValueError as e:
                raise DatasetError(f"Bad number: {e}", path, line) from e
            if not all(math.isfinite(v) for v in parsed):
                raise DatasetError("Non-finite value", path, line)
            values.append(parsed)
    table = np.array(values, dtype=np.float64).reshape(-1, len(COLUMNS))
    return DataLog(*table.T)


def write_dataset(
    logs: Dict[str, DataLog], manifest: DatasetManifest, directory: str
) -> None:
    """
    Write every log named in ``manifest`` and the manifest itself.

    :raises ConfigurationError: If a manifest file has no log.
    """
    missing = [name for name in manifest.files if name not in logs]
    if missing:
        raise ConfigurationError(f"No log given for manifest entries {missing}")
    os.makedirs(directory, exist_ok=True)
    for name in manifest.files:
        write_log(logs[name], os.path.join(directory, name))
    _write_manifest(manifest, os.path.join(directory, MANIFEST_NAME))
    logger.info("Wrote %d logs to %s", len(manifest.files), directory)


def read_dataset(directory: str) -> Dataset:
    """
    Read a dataset directory.

    :raises FileNotFoundError: If the manifest or a listed log is missing.
    :raises DatasetError: If a file is malformed or breaks the log invariants.
    """
    manifest_path = os.path.join(directory, MANIFEST_NAME)
    if not os.path.isfile(manifest_path):
        raise FileNotFoundError(f"Dataset manifest {manifest_path} not found.")
    manifest = _read_manifest(manifest_path)
    logs = {}
    for name in manifest.files:
        path = os.path.join(directory, name)
        if not os.path.isfile(path):
            raise FileNotFoundError(f"Dataset file {path} not found.")
        logs[name] = read_log(path)
    validate_logs(
        list(logs.values()), [os.path.join(directory, name) for name in logs]
    )
    return Dataset(manifest, logs)


def training_logs(dataset: Dataset) -> List[DataLog]:
    """
    Logs the surrogate trainers may see; the test split is never included.
    """
    return dataset.split("train")


def held_out_logs(dataset: Dataset) -> List[DataLog]:
    """
    Held-out logs for surrogate evaluation.
    """
    return dataset.split("test")


def validate_logs(
    logs: Sequence[DataLog], names: Optional[Sequence[str]] = None
) -> None:
    """
    Check the DataLog invariants: uniform spacing and command ranges.

    :param names: Labels used in the error, e.g. file paths.
    :raises DatasetError: On the first violation.
    """
    for index, log in enumerate(logs):
        label = names[index] if names else f"log {index}"
        if len(log) > 1 and not np.allclose(np.diff(log.t), SAMPLE_PERIOD, atol=1e-9):
            raise DatasetError(f"{label}: samples are not 0.01 s apart")
        if np.any(np.abs(log.cmd_angle) > ANGLE_LIMIT):
            raise DatasetError(f"{label}: command angle out of range")
        if np.any((log.cmd_omega < OMEGA_MIN) | (log.cmd_omega > OMEGA_MAX)):
            raise DatasetError(f"{label}: command speed out of range")

"""
Fixtures shared by the softfin tests: a short plant log and a small untrained
surrogate that rolls out quickly. The desk-scale dataset and surrogate are
built once per session and only by tests marked ``slow``.
"""

import numpy as np
import pytest

from softfin.datagen import DatasetConfig, collect_log, generate_dataset, training_logs
from softfin.plant import FinPlant, PlantParams
from softfin.surrogate import (
    Normalizer,
    SurrogateModel,
    TrainConfig,
    build_forcenet,
    build_posnet,
    train_surrogate,
)

TINY_WINDOW = 10


def make_tiny_surrogate(window: int = TINY_WINDOW, seed: int = 0) -> SurrogateModel:
    return SurrogateModel(
        posnet=build_posnet(window, seed=seed),
        forcenet=build_forcenet(hidden=8, dropout=0.2, seed=seed + 1),
        window=window,
        posnet_input=Normalizer(np.zeros(3), np.ones(3)),
        posnet_output=Normalizer(np.zeros(1), np.full(1, 0.01)),
        forcenet_input=Normalizer(np.zeros(2), np.ones(2)),
        forcenet_output=Normalizer(np.zeros(2), np.ones(2)),
    )


@pytest.fixture(name="tiny_surrogate")
def fixture_tiny_surrogate():
    return make_tiny_surrogate()


@pytest.fixture(name="short_log")
def fixture_short_log():
    plant = FinPlant(PlantParams())
    plant.reset(0)
    return collect_log(plant, 400, np.random.default_rng(0))


@pytest.fixture(name="desk_dataset", scope="session")
def fixture_desk_dataset():
    return generate_dataset(DatasetConfig(), seed=0)


@pytest.fixture(name="desk_surrogate", scope="session")
def fixture_desk_surrogate(desk_dataset):
    model, _ = train_surrogate(training_logs(desk_dataset), TrainConfig())
    return model

# tests/conftest.py
import json
from pathlib import Path

import pytest

from srlora_tools.linalg import Rng, gaussian
from srlora_tools.model import Activation, SrloraNet, make_layer
from srlora_tools.trainer import ArchitectureConfig, DatasetConfig, LayerConfig, RunConfig


@pytest.fixture
def rng():
    return Rng(1234)


@pytest.fixture
def w0(rng):
    return gaussian(rng.derive(1), 12, 8)


@pytest.fixture
def two_layer_net(rng):
    """16 -> 12 (relu, adapted) -> 6 (identity, adapted), PiSSA rank 4."""
    first = make_layer(gaussian(rng.derive(2), 12, 16, 0.0, 0.25), Activation.RELU, rank=4, alpha=4.0)
    second = make_layer(gaussian(rng.derive(3), 6, 12, 0.0, 0.3), Activation.IDENTITY, rank=4, alpha=8.0)
    return SrloraNet(layers=[first, second])


def tiny_config(**overrides) -> RunConfig:
    """Single-layer teacher-student run small enough for unit tests (two switches)."""
    params = dict(
        architecture=ArchitectureConfig(input_dim=10, layers=[LayerConfig(out_dim=8)]),
        dataset=DatasetConfig(kind="teacher_student", d_in=10, d_out=8, k_star=4, n_train=96, n_eval=32),
        seed=7,
        n_all=30,
        batch_size=16,
        learning_rate=0.01,
        momentum=0.9,
        rank=4,
        alpha=4.0,
        gamma=0.5,
        r_target=8,
        eval_every=10,
    )
    params.update(overrides)
    return RunConfig(**params)


TINY_DOCUMENT = {
    "architecture": {"input_dim": 10, "layers": [{"out_dim": 8}]},
    "dataset": {"kind": "teacher_student", "d_in": 10, "d_out": 8, "k_star": 4, "n_train": 96, "n_eval": 32},
    "seed": 7,
    "n_all": 30,
    "batch_size": 16,
    "learning_rate": 0.01,
    "rank": 4,
    "alpha": 4.0,
    "gamma": 0.5,
    "r_target": 8,
    "eval_every": 10,
}


@pytest.fixture
def tiny_document():
    return json.loads(json.dumps(TINY_DOCUMENT))


@pytest.fixture
def config_file(tmp_path, tiny_document):
    def write(name: str = "run.json", **overrides) -> Path:
        path = tmp_path / name
        path.write_text(json.dumps({**tiny_document, **overrides}), encoding="utf-8")
        return path
    return write

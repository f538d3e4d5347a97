# tests/test_run_config.py
import json

import pytest

from srlora_tools.errors import ConfigError
from srlora_tools.model import LossKind
from srlora_tools.recompose import ResetScope
from srlora_tools.trainer import DatasetKind, TrainMode, load_run_config, parse_run_config, save_run_config

from .conftest import tiny_config


def test_defaults_are_resolved(tiny_document):
    config = parse_run_config(tiny_document)
    assert config.mode is TrainMode.SRLORA
    assert config.momentum == 0.9
    assert config.reset_scope is ResetScope.RECYCLED
    assert config.dataset.seed == 7
    assert config.dataset.loss_kind is LossKind.MSE
    assert config.schedule().switch_steps == (15, 30)


def test_r_target_defaults_to_rank(tiny_document):
    del tiny_document["r_target"]
    config = parse_run_config(tiny_document)
    assert config.r_target == 4
    assert config.schedule().n_switch == 0


@pytest.mark.parametrize(
    "patch",
    [
        {"learning_rat": 0.1},
        {"gamma": 0.3},
        {"r_target": 7},
        {"rank": 9},
        {"mode": "adalora"},
        {"reset_scope": "some"},
        {"n_all": 1},
        {"beta1": 1.0},
    ],
)
def test_invalid_documents_raise_config_error(tiny_document, patch):
    tiny_document.update(patch)
    with pytest.raises(ConfigError):
        parse_run_config(tiny_document)


def test_dataset_block_is_validated_by_kind(tiny_document):
    bad_kind = {**tiny_document, "dataset": {**tiny_document["dataset"], "kind": "imagenet"}}
    with pytest.raises(ConfigError, match="kind"):
        parse_run_config(bad_kind)
    stray = {**tiny_document, "dataset": {**tiny_document["dataset"], "n_classes": 3}}
    with pytest.raises(ConfigError):
        parse_run_config(stray)
    mismatched = {**tiny_document, "dataset": {**tiny_document["dataset"], "d_in": 11}}
    with pytest.raises(ConfigError, match="input_dim"):
        parse_run_config(mismatched)


def test_static_modes_skip_schedule_checks(tiny_document):
    tiny_document.update({"mode": "pissa_static", "gamma": 0.3})
    del tiny_document["r_target"]
    config = parse_run_config(tiny_document)
    assert config.schedule().switch_steps == ()


def test_per_layer_rank_must_fit_and_divide():
    with pytest.raises(ConfigError):
        parse_run_config({
            "architecture": {"input_dim": 6, "layers": [{"out_dim": 6, "rank": 3}]},
            "dataset": {"kind": "teacher_student", "d_in": 6, "d_out": 6, "k_star": 2},
            "rank": 2, "gamma": 0.5, "r_target": 4, "n_all": 10,
        })


def test_load_applies_overrides(config_file, tmp_path):
    config = load_run_config(config_file(), seed=11, output_dir=str(tmp_path / "out"))
    assert config.seed == 11
    assert config.dataset.seed == 11
    assert config.output_dir == str(tmp_path / "out")


def test_load_resolves_csv_paths_against_the_config(tmp_path):
    (tmp_path / "sub").mkdir()
    document = {
        "architecture": {"input_dim": 2, "layers": [{"out_dim": 2, "rank": 1, "alpha": 1.0}]},
        "dataset": {"kind": "csv", "path": "rows.csv", "feature_columns": ["x0", "x1"], "label_column": "y"},
        "rank": 1, "gamma": 1.0, "r_target": 2, "n_all": 4,
    }
    path = tmp_path / "sub" / "run.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    config = load_run_config(path)
    assert config.dataset.path == str((tmp_path / "sub" / "rows.csv").resolve())
    assert config.dataset.loss_kind is LossKind.SOFTMAX_CROSS_ENTROPY


def test_load_errors(tmp_path):
    with pytest.raises(FileNotFoundError, match="absent.json"):
        load_run_config(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_run_config(broken)
    listed = tmp_path / "list.json"
    listed.write_text("[]", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(listed)


def test_saved_config_loads_back(tmp_path):
    config = tiny_config(mode="lora_static", lora_init_std=0.05)
    path = save_run_config(config, tmp_path / "resolved.json")
    assert load_run_config(path).to_dict() == config.to_dict()
    document = json.loads(path.read_text(encoding="utf-8"))
    assert document["mode"] == "lora_static"
    assert document["reset_scope"] == "recycled"
    assert document["dataset"]["kind"] == "teacher_student"


def test_enum_fields_accept_members_or_values():
    config = tiny_config(mode="lora_static", reset_scope="all")
    assert config.mode is TrainMode.LORA_STATIC
    assert config.reset_scope is ResetScope.ALL
    assert config.dataset.kind is DatasetKind.TEACHER_STUDENT
    assert tiny_config(mode=TrainMode.PISSA_STATIC).mode is TrainMode.PISSA_STATIC
    with pytest.raises(ConfigError, match="mode"):
        tiny_config(mode="adalora")
    with pytest.raises(ConfigError, match="reset_scope"):
        tiny_config(reset_scope="some")

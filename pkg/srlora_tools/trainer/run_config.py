# srlora_tools/trainer/run_config.py
"""
Run configuration: a JSON document validated by marshmallow schemas and
materialized as frozen dataclasses that check cross-field invariants.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Type, TypeVar, Union

from marshmallow import RAISE, Schema, fields, post_load, validate
from marshmallow import ValidationError as SchemaValidationError

from ..errors import ConfigError, ScheduleError
from ..model import LossKind
from ..recompose import ResetScope, SwitchSchedule, build_schedule, recycled_per_switch

E = TypeVar("E", bound=Enum)


class TrainMode(Enum):
    LORA_STATIC = "lora_static"
    PISSA_STATIC = "pissa_static"
    SRLORA = "srlora"


class DatasetKind(Enum):
    TEACHER_STUDENT = "teacher_student"
    TEACHER_CLASSIFICATION = "teacher_classification"
    CSV = "csv"


def _coerce(enum_cls: Type[E], value: Any, name: str) -> E:
    """Member of ``enum_cls`` from a member or its value."""
    try:
        return enum_cls(value)
    except ValueError as exc:
        raise ConfigError(f"{name} must be one of {[m.value for m in enum_cls]}, got {value!r}") from exc


@dataclass(frozen=True)
class LayerConfig:
    out_dim: int
    activation: str = "identity"
    adapted: bool = True
    rank: Optional[int] = None
    alpha: Optional[float] = None


@dataclass(frozen=True)
class ArchitectureConfig:
    input_dim: int
    layers: List[LayerConfig] = field(default_factory=list)

    def __post_init__(self):
        if not self.layers:
            raise ConfigError("architecture needs at least one layer")

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    def layer_dims(self) -> List[tuple]:
        """``(out_dim, in_dim)`` per layer."""
        dims, previous = [], self.input_dim
        for layer in self.layers:
            dims.append((layer.out_dim, previous))
            previous = layer.out_dim
        return dims


@dataclass(frozen=True)
class DatasetConfig:
    """One of the three dataset kinds; fields not used by ``kind`` stay at their defaults."""
    kind: DatasetKind
    # synthetic tasks
    d_in: int = 0
    d_out: int = 0
    n_classes: int = 0
    k_star: int = 0
    noise_std: float = 0.0
    n_train: int = 1024
    n_eval: int = 256
    w0_scale: float = 1.0
    delta_scale: float = 1.0
    seed: Optional[int] = None
    # csv
    path: str = ""
    feature_columns: List[str] = field(default_factory=list)
    label_column: str = "label"
    labels: Optional[List[str]] = None
    eval_fraction: float = 0.2

    def __post_init__(self):
        object.__setattr__(self, "kind", _coerce(DatasetKind, self.kind, "dataset kind"))

    @property
    def is_synthetic(self) -> bool:
        return self.kind is not DatasetKind.CSV

    @property
    def target_dim(self) -> Optional[int]:
        if self.kind is DatasetKind.TEACHER_STUDENT:
            return self.d_out
        if self.kind is DatasetKind.TEACHER_CLASSIFICATION:
            return self.n_classes
        return len(self.labels) if self.labels else None

    @property
    def input_dim(self) -> Optional[int]:
        return self.d_in if self.is_synthetic else len(self.feature_columns)

    @property
    def loss_kind(self) -> LossKind:
        if self.kind is DatasetKind.TEACHER_STUDENT:
            return LossKind.MSE
        return LossKind.SOFTMAX_CROSS_ENTROPY


@dataclass(frozen=True)
class RunConfig:
    """Everything one training run depends on."""
    architecture: ArchitectureConfig
    dataset: DatasetConfig
    seed: int = 0
    n_all: int = 1000
    batch_size: int = 32
    learning_rate: float = 0.01
    momentum: float = 0.9
    rank: int = 8
    alpha: float = 8.0
    gamma: float = 0.5
    r_target: Optional[int] = None
    beta1: float = 0.85
    beta2: float = 0.85
    reset_scope: ResetScope = ResetScope.RECYCLED
    mode: TrainMode = TrainMode.SRLORA
    lora_init_std: Optional[float] = None
    eval_every: int = 50
    output_dir: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", _coerce(TrainMode, self.mode, "mode"))
        object.__setattr__(self, "reset_scope", _coerce(ResetScope, self.reset_scope, "reset_scope"))
        if self.r_target is None:
            object.__setattr__(self, "r_target", self.rank)
        if self.dataset.seed is None:
            object.__setattr__(self, "dataset", replace(self.dataset, seed=self.seed))
        self._validate_dims()
        if self.mode is TrainMode.SRLORA:
            self._validate_schedule()

    def _validate_dims(self) -> None:
        arch, ds = self.architecture, self.dataset
        if ds.input_dim is not None and ds.input_dim != arch.input_dim:
            raise ConfigError(f"architecture input_dim {arch.input_dim} != dataset input dim {ds.input_dim}")
        if ds.target_dim is not None and ds.target_dim != arch.output_dim:
            raise ConfigError(f"architecture output dim {arch.output_dim} != dataset target dim {ds.target_dim}")
        if ds.kind is DatasetKind.TEACHER_STUDENT and ds.k_star > min(ds.d_in, ds.d_out):
            raise ConfigError(f"k_star {ds.k_star} exceeds min(d_in, d_out) = {min(ds.d_in, ds.d_out)}")
        if ds.kind is DatasetKind.TEACHER_CLASSIFICATION and ds.k_star > min(ds.d_in, ds.n_classes):
            raise ConfigError(f"k_star {ds.k_star} exceeds min(d_in, n_classes) = {min(ds.d_in, ds.n_classes)}")
        for layer_id, (out_dim, in_dim) in enumerate(arch.layer_dims()):
            if not arch.layers[layer_id].adapted:
                continue
            rank = self.layer_rank(layer_id)
            if rank > min(out_dim, in_dim):
                raise ConfigError(f"layer {layer_id}: rank {rank} exceeds min({out_dim}, {in_dim})")

    def _validate_schedule(self) -> None:
        try:
            build_schedule(self.rank, self.gamma, self.r_target, self.n_all)
            for layer_id, layer in enumerate(self.architecture.layers):
                if layer.adapted:
                    recycled_per_switch(self.layer_rank(layer_id), self.gamma)
        except ScheduleError as exc:
            raise ConfigError(str(exc)) from exc

    def layer_rank(self, layer_id: int) -> int:
        layer = self.architecture.layers[layer_id]
        return self.rank if layer.rank is None else layer.rank

    def layer_alpha(self, layer_id: int) -> float:
        layer = self.architecture.layers[layer_id]
        return self.alpha if layer.alpha is None else layer.alpha

    def schedule(self) -> SwitchSchedule:
        """Switch schedule; static modes never switch."""
        if self.mode is not TrainMode.SRLORA:
            return SwitchSchedule(
                r=self.rank, r_prime=0, r_target=self.rank, n_all=self.n_all,
                n_switch=0, t_interval=0, switch_steps=(),
            )
        return build_schedule(self.rank, self.gamma, self.r_target, self.n_all)

    def to_dict(self) -> Dict[str, Any]:
        """Resolved configuration, loadable by ``RunConfigSchema``."""
        data = asdict(self)
        data["mode"] = self.mode.value
        data["reset_scope"] = self.reset_scope.value
        data["dataset"] = _dataset_dict(self.dataset)
        return data


def _dataset_dict(ds: DatasetConfig) -> Dict[str, Any]:
    full = {**asdict(ds), "kind": ds.kind.value}
    keys = DATASET_SCHEMAS[ds.kind]().fields.keys()
    return {key: full[key] for key in keys}


# Schemas

class LayerSchema(Schema):
    out_dim = fields.Integer(required=True, validate=validate.Range(min=1))
    activation = fields.String(load_default="identity", validate=validate.OneOf(["relu", "identity"]))
    adapted = fields.Boolean(load_default=True)
    rank = fields.Integer(load_default=None, allow_none=True, validate=validate.Range(min=1))
    alpha = fields.Float(load_default=None, allow_none=True, validate=validate.Range(min=0, min_inclusive=False))

    class Meta:
        unknown = RAISE

    @post_load
    def make_layer(self, data, **kwargs):
        return LayerConfig(**data)


class ArchitectureSchema(Schema):
    input_dim = fields.Integer(required=True, validate=validate.Range(min=1))
    layers = fields.List(fields.Nested(LayerSchema), required=True, validate=validate.Length(min=1))

    class Meta:
        unknown = RAISE

    @post_load
    def make_architecture(self, data, **kwargs):
        return ArchitectureConfig(**data)


class _SyntheticSchema(Schema):
    kind = fields.Enum(DatasetKind, by_value=True, required=True)
    d_in = fields.Integer(required=True, validate=validate.Range(min=1))
    k_star = fields.Integer(required=True, validate=validate.Range(min=0))
    n_train = fields.Integer(load_default=1024, validate=validate.Range(min=1))
    n_eval = fields.Integer(load_default=256, validate=validate.Range(min=1))
    w0_scale = fields.Float(load_default=1.0, validate=validate.Range(min=0))
    delta_scale = fields.Float(load_default=1.0, validate=validate.Range(min=0))
    seed = fields.Integer(load_default=None, allow_none=True, validate=validate.Range(min=0))

    class Meta:
        unknown = RAISE

    @post_load
    def make_dataset(self, data, **kwargs):
        return DatasetConfig(**data)


class TeacherStudentSchema(_SyntheticSchema):
    d_out = fields.Integer(required=True, validate=validate.Range(min=1))
    noise_std = fields.Float(load_default=0.0, validate=validate.Range(min=0))


class TeacherClassificationSchema(_SyntheticSchema):
    n_classes = fields.Integer(required=True, validate=validate.Range(min=2))


class CsvDatasetSchema(Schema):
    kind = fields.Enum(DatasetKind, by_value=True, required=True)
    path = fields.String(required=True)
    feature_columns = fields.List(fields.String(), required=True, validate=validate.Length(min=1))
    label_column = fields.String(required=True)
    labels = fields.List(fields.String(), load_default=None, allow_none=True)
    eval_fraction = fields.Float(
        load_default=0.2, validate=validate.Range(min=0, max=1, min_inclusive=False, max_inclusive=False)
    )

    class Meta:
        unknown = RAISE

    @post_load
    def make_dataset(self, data, **kwargs):
        return DatasetConfig(**data)


DATASET_SCHEMAS = {
    DatasetKind.TEACHER_STUDENT: TeacherStudentSchema,
    DatasetKind.TEACHER_CLASSIFICATION: TeacherClassificationSchema,
    DatasetKind.CSV: CsvDatasetSchema,
}


class RunConfigSchema(Schema):
    architecture = fields.Nested(ArchitectureSchema, required=True)
    dataset = fields.Dict(required=True)
    seed = fields.Integer(load_default=0, validate=validate.Range(min=0, max=(1 << 64) - 1))
    n_all = fields.Integer(load_default=1000, validate=validate.Range(min=0))
    batch_size = fields.Integer(load_default=32, validate=validate.Range(min=1))
    learning_rate = fields.Float(load_default=0.01, validate=validate.Range(min=0, min_inclusive=False))
    momentum = fields.Float(load_default=0.9, validate=validate.Range(min=0, max=1, max_inclusive=False))
    rank = fields.Integer(load_default=8, validate=validate.Range(min=1))
    alpha = fields.Float(load_default=8.0, validate=validate.Range(min=0, min_inclusive=False))
    gamma = fields.Float(load_default=0.5, validate=validate.Range(min=0, max=1, min_inclusive=False))
    r_target = fields.Integer(load_default=None, allow_none=True, validate=validate.Range(min=1))
    beta1 = fields.Float(
        load_default=0.85, validate=validate.Range(min=0, max=1, min_inclusive=False, max_inclusive=False)
    )
    beta2 = fields.Float(
        load_default=0.85, validate=validate.Range(min=0, max=1, min_inclusive=False, max_inclusive=False)
    )
    reset_scope = fields.Enum(ResetScope, by_value=True, load_default=ResetScope.RECYCLED)
    mode = fields.Enum(TrainMode, by_value=True, load_default=TrainMode.SRLORA)
    lora_init_std = fields.Float(load_default=None, allow_none=True, validate=validate.Range(min=0))
    eval_every = fields.Integer(load_default=50, validate=validate.Range(min=1))
    output_dir = fields.String(load_default=None, allow_none=True)

    class Meta:
        unknown = RAISE

    @post_load
    def make_run_config(self, data, **kwargs):
        raw = dict(data["dataset"])
        try:
            kind = DatasetKind(raw.get("kind"))
        except ValueError:
            choices = ", ".join(m.value for m in DatasetKind)
            raise SchemaValidationError({"dataset": {"kind": [f"Must be one of: {choices}."]}}) from None
        try:
            data["dataset"] = DATASET_SCHEMAS[kind]().load(raw)
        except SchemaValidationError as exc:
            raise SchemaValidationError({"dataset": exc.messages}) from exc
        return RunConfig(**data)


def parse_run_config(document: Dict[str, Any]) -> RunConfig:
    """Validate a decoded JSON document."""
    try:
        return RunConfigSchema().load(document)
    except SchemaValidationError as exc:
        raise ConfigError(f"invalid run config: {exc.messages}") from exc
    except TypeError as exc:
        raise ConfigError(f"invalid run config: {exc}") from exc


def load_run_config(
    path: Union[str, Path],
    seed: Optional[int] = None,
    output_dir: Optional[str] = None,
) -> RunConfig:
    """Read and validate a JSON run config; ``seed`` and ``output_dir`` override the file."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(document, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    if seed is not None:
        document["seed"] = seed
    if output_dir is not None:
        document["output_dir"] = str(output_dir)
    dataset = document.get("dataset")
    is_csv = isinstance(dataset, dict) and dataset.get("kind") == DatasetKind.CSV.value
    if is_csv and isinstance(dataset.get("path"), str):
        # relative dataset paths are resolved against the config file
        csv_path = Path(dataset["path"])
        if not csv_path.is_absolute():
            document["dataset"] = {**dataset, "path": str((path.parent / csv_path).resolve())}
    return parse_run_config(document)


def save_run_config(config: RunConfig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path

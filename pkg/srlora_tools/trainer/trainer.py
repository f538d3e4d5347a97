# srlora_tools/trainer/trainer.py
"""
Training driver.

Steps run from 1 to ``n_all``. A step in the switch schedule recomposes
every adapted layer and takes no gradient step; every other step samples a
batch, folds the gradients into the importance state and moves the
trainables with SGD + momentum. A metric row is logged at every multiple of
``eval_every`` (including step 0) and at ``n_all``.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from ..adapter import InitKind
from ..data import (
    EVAL_SPLIT, TRAIN_SPLIT, BatchStream, CsvSchema, Dataset, TaskKind, TeacherSpec,
    gen_teacher_classification, gen_teacher_student, load_csv, make_teacher_spec,
    population_mse, train_eval_split,
)
from ..errors import CheckpointError, ConfigError, DivergenceError
from ..importance import ema_update, slot_scores
from ..linalg import Matrix, Rng, gaussian, relative_error
from ..logging import get_logger
from ..metrics import MetricLog, MetricRow, RunClock, SlotScoreRow, SwitchRecord
from ..model import (
    Activation, LossKind, SrloraNet, accuracy, loss_and_grad, make_layer, net_backward, net_forward,
)
from ..recompose import SlotLedger, recompose_step, recycled_per_switch, register_layer, write_ledger_csv
from .checkpoint import net_from_records, net_to_records, read_container, write_container
from .optimizer import SgdMomentum, apply_step, net_gradients, net_parameters, zero_slots
from .run_config import DatasetKind, RunConfig, TrainMode, parse_run_config, save_run_config

# Stream keys under the run seed.
PRETRAINED_STREAM = 21
ADAPTER_STREAM = 22

METRICS_FILE = "metrics.csv"
LEDGER_FILE = "ledger.csv"
SCORES_FILE = "scores.csv"
CHECKPOINT_FILE = "checkpoint.srlc"
CONFIG_FILE = "resolved-config.json"
SWITCHES_FILE = "switches.csv"
SUMMARY_FILE = "summary.json"


class TrainResult(NamedTuple):
    net: SrloraNet
    log: MetricLog
    ledger: SlotLedger


def build_datasets(config: RunConfig) -> Tuple[Dataset, Dataset, Optional[TeacherSpec]]:
    """Train split, eval split and (for synthetic tasks) the hidden teacher."""
    ds = config.dataset
    if ds.kind is DatasetKind.CSV:
        schema = CsvSchema(
            path=ds.path, feature_columns=list(ds.feature_columns),
            label_column=ds.label_column, labels=ds.labels,
        )
        full = load_csv(ds.path, schema)
        if full.target_dim != config.architecture.output_dim:
            raise ConfigError(
                f"dataset has {full.target_dim} classes but the network outputs {config.architecture.output_dim}"
            )
        train_set, eval_set = train_eval_split(full, ds.eval_fraction, ds.seed)
        return train_set, eval_set, None

    d_out = ds.d_out if ds.kind is DatasetKind.TEACHER_STUDENT else ds.n_classes
    teacher = make_teacher_spec(
        ds.d_in, d_out, ds.k_star, ds.seed,
        noise_std=ds.noise_std, w0_scale=ds.w0_scale, delta_scale=ds.delta_scale,
    )
    generate = gen_teacher_student if ds.kind is DatasetKind.TEACHER_STUDENT else gen_teacher_classification
    return generate(teacher, ds.n_train, TRAIN_SPLIT), generate(teacher, ds.n_eval, EVAL_SPLIT), teacher


def pretrained_weight(config: RunConfig, layer_id: int, teacher: Optional[TeacherSpec]) -> Matrix:
    """The teacher's ``w0`` for single-layer synthetic tasks, otherwise ``N(0, 1/fan_in)``."""
    out_dim, in_dim = config.architecture.layer_dims()[layer_id]
    if teacher is not None and len(config.architecture.layers) == 1:
        return teacher.w0
    rng = Rng(config.seed).derive(PRETRAINED_STREAM, layer_id)
    return gaussian(rng, out_dim, in_dim, 0.0, 1.0 / np.sqrt(in_dim))


def build_net(config: RunConfig, teacher: Optional[TeacherSpec] = None) -> SrloraNet:
    init_kind = InitKind.LORA if config.mode is TrainMode.LORA_STATIC else InitKind.PISSA
    layers = []
    for layer_id, layer_config in enumerate(config.architecture.layers):
        layers.append(make_layer(
            pretrained_weight(config, layer_id, teacher),
            Activation(layer_config.activation),
            adapted=layer_config.adapted,
            rank=config.layer_rank(layer_id),
            alpha=config.layer_alpha(layer_id),
            init_kind=init_kind,
            rng=Rng(config.seed).derive(ADAPTER_STREAM, layer_id),
            a_std=config.lora_init_std,
            beta1=config.beta1,
            beta2=config.beta2,
        ))
    return SrloraNet(layers=layers)


class SrloraTrainer:
    """Runs one training session; resumable from a session checkpoint."""

    def __init__(self, config: RunConfig, net: Optional[SrloraNet] = None):
        self.logger = get_logger("trainer")
        self.config = config
        self.schedule = config.schedule()
        self.loss_kind: LossKind = config.dataset.loss_kind
        self.train_set, self.eval_set, self.teacher = build_datasets(config)
        self.net = build_net(config, self.teacher) if net is None else net
        self.optimizer = SgdMomentum(config.learning_rate, config.momentum)
        self.stream = BatchStream(self.train_set, config.batch_size, config.seed)
        self.ledger = SlotLedger()
        self.log = MetricLog()
        self.step = 0
        self.clock = RunClock()
        self._window_loss = 0.0
        self._window_batches = 0
        self._window_switched = 0
        if net is None:
            for layer_id, layer in self.net.adapted_layers():
                register_layer(layer.lora, self.ledger, layer_id, step=0)

    # Core loop

    def run(self, until: Optional[int] = None) -> TrainResult:
        """Train up to step ``until`` (default ``n_all``)."""
        stop = self.config.n_all if until is None else min(until, self.config.n_all)
        if self.step == 0 and not self.log.rows:
            self.logger.info(
                f"Run start: mode={self.config.mode.value} seed={self.config.seed} n_all={self.config.n_all} "
                f"switches={list(self.schedule.switch_steps)} r_explored={self.schedule.r_explored} "
                f"trainable={self.net.trainable_parameter_count()}"
            )
            self._record(0)
        for step in range(self.step + 1, stop + 1):
            if self.schedule.is_switch_step(step):
                self._switch(step)
            else:
                self._train_step()
            self.step = step
            if step % self.config.eval_every == 0 or step == self.config.n_all:
                self._record(step)
        if self.step == self.config.n_all:
            final = self.log.final_row()
            self.logger.info(
                f"Run end: step {self.step}, eval_loss={final.eval_loss:.6g}, "
                f"{len(self.ledger)} ledger episodes"
            )
        return TrainResult(self.net, self.log, self.ledger)

    def _train_step(self) -> None:
        x, y = self.stream.next_batch()
        y_hat, cache = net_forward(self.net, x)
        loss, d_out = loss_and_grad(self.loss_kind, y_hat, y)
        grads = net_backward(self.net, cache, d_out)
        if not np.isfinite(loss) or not np.isfinite(grads.max_abs()):
            raise DivergenceError(self.step + 1, loss)
        for layer_id, layer in self.net.adapted_layers():
            layer.importance = ema_update(layer.importance, grads.adapter[layer_id], layer.lora)
        apply_step(self.optimizer, net_parameters(self.net), net_gradients(grads))
        self.net.touch()
        self._window_loss += loss
        self._window_batches += 1

    def _switch(self, step: int) -> None:
        for layer_id, layer in self.net.adapted_layers():
            before, _ = net_forward(self.net, self.eval_set.inputs)
            loss_before, _ = loss_and_grad(self.loss_kind, before, self.eval_set.targets)
            outcome = recompose_step(
                layer.lora, layer.importance, self.schedule, self.ledger, step,
                layer_id=layer_id,
                reset_scope=self.config.reset_scope,
                r_prime=recycled_per_switch(layer.lora.rank, self.config.gamma),
            )
            layer.importance = outcome.state
            zero_slots(self.optimizer, layer_id, outcome.slots)
            self.net.touch()
            after, _ = net_forward(self.net, self.eval_set.inputs)
            loss_after, _ = loss_and_grad(self.loss_kind, after, self.eval_set.targets)
            self.log.record_switch(SwitchRecord(
                step=step,
                layer_id=layer_id,
                slots=outcome.slots,
                new_indices=outcome.new_indices,
                skipped=outcome.skipped,
                probe_loss_before=loss_before,
                probe_loss_after=loss_after,
                max_output_rel_diff=relative_error(after, before),
            ))
        self._window_switched = 1
        self.logger.info(f"Trainable parameters after switch at step {step}: {self.net.trainable_parameter_count()}")

    def evaluate(self) -> Tuple[float, Optional[float]]:
        y_hat, _ = net_forward(self.net, self.eval_set.inputs)
        loss, _ = loss_and_grad(self.loss_kind, y_hat, self.eval_set.targets)
        acc = accuracy(y_hat, self.eval_set.targets) if self.eval_set.kind is TaskKind.CLASSIFICATION else None
        return loss, acc

    def _record(self, step: int) -> None:
        eval_loss, eval_acc = self.evaluate()
        train_loss = self._window_loss / self._window_batches if self._window_batches else None
        self.log.append(MetricRow(
            step=step,
            train_loss=train_loss,
            eval_loss=eval_loss,
            eval_accuracy=eval_acc,
            switch_flag=self._window_switched,
            wall_time=self.clock.elapsed(),
        ))
        for layer_id, layer in self.net.adapted_layers():
            scores = slot_scores(layer.importance).scores
            self.log.record_scores(
                SlotScoreRow(step, layer_id, slot, layer.lora.slot_meta[slot], float(score))
                for slot, score in enumerate(scores)
            )
        self._window_loss = 0.0
        self._window_batches = 0
        self._window_switched = 0

    def population_loss(self) -> float:
        """Expected per-sample loss of a single-layer teacher-student net."""
        if self.teacher is None or len(self.net.layers) != 1 or self.loss_kind is not LossKind.MSE:
            raise ConfigError("population loss needs a single-layer teacher-student run")
        layer = self.net.layers[0]
        return population_mse(self.teacher, layer.weight(), layer.bias)

    # Persistence

    def save_session(self, path: Union[str, Path]) -> Path:
        net_manifest, records = net_to_records(self.net)
        names = sorted(self.optimizer.velocities)
        records.extend((f"opt.{name}", self.optimizer.velocities[name]) for name in names)
        manifest: Dict[str, Any] = {
            "kind": "session",
            "config": self.config.to_dict(),
            "step": self.step,
            "net": net_manifest,
            "optimizer": {
                "learning_rate": self.optimizer.learning_rate,
                "momentum": self.optimizer.momentum,
                "velocities": names,
            },
            "ledger": self.ledger.to_records(),
            "metrics": [row.as_record() for row in self.log.rows],
            "switches": [
                [r.step, r.layer_id, list(r.slots), list(r.new_indices), r.skipped,
                 r.probe_loss_before, r.probe_loss_after, r.max_output_rel_diff]
                for r in self.log.switches
            ],
            "scores": [row.as_record() for row in self.log.scores],
            "stream": self.stream.get_state(),
            "window": [self._window_loss, self._window_batches, self._window_switched],
        }
        out = write_container(path, manifest, records)
        self.logger.info(f"Saved session at step {self.step} to {out}")
        return out

    @classmethod
    def restore(cls, path: Union[str, Path]) -> "SrloraTrainer":
        manifest, records = read_container(path)
        if manifest.get("kind") != "session":
            raise CheckpointError(f"{path}: not a training session checkpoint")
        try:
            config = parse_run_config(manifest["config"])
            trainer = cls(config, net=net_from_records(manifest["net"], records))
            opt = manifest["optimizer"]
            trainer.optimizer = SgdMomentum(
                float(opt["learning_rate"]), float(opt["momentum"]),
                velocities={name: records[f"opt.{name}"] for name in opt["velocities"]},
            )
            trainer.step = int(manifest["step"])
            trainer.ledger = SlotLedger.from_records(manifest["ledger"])
            trainer.log = MetricLog(
                rows=[MetricRow(*row) for row in manifest["metrics"]],
                switches=[
                    SwitchRecord(s[0], s[1], tuple(s[2]), tuple(s[3]), bool(s[4]), s[5], s[6], s[7])
                    for s in manifest["switches"]
                ],
                scores=[SlotScoreRow(*row) for row in manifest["scores"]],
            )
            trainer.stream.set_state(manifest["stream"])
            trainer._window_loss, trainer._window_batches, trainer._window_switched = manifest["window"]
        except (KeyError, TypeError, ValueError) as exc:
            raise CheckpointError(f"{path}: incomplete session checkpoint ({exc})") from exc
        trainer.logger.info(f"Restored session at step {trainer.step} from {path}")
        return trainer

    def write_artifacts(self, out_dir: Union[str, Path]) -> List[Path]:
        """Metric, ledger, score and switch CSVs, the run summary, the session checkpoint and the resolved config."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = [
            self.log.write_csv(out / METRICS_FILE),
            write_ledger_csv(self.ledger, out / LEDGER_FILE),
            self.log.write_scores_csv(out / SCORES_FILE),
            self.log.write_switches_csv(out / SWITCHES_FILE),
            self.log.export_summary(out / SUMMARY_FILE),
            self.save_session(out / CHECKPOINT_FILE),
            save_run_config(self.config, out / CONFIG_FILE),
        ]
        self.logger.info(f"Wrote artifacts to {out}")
        return paths


def train(config: RunConfig) -> TrainResult:
    """Run a full session and, when ``output_dir`` is set, write its artifacts."""
    trainer = SrloraTrainer(config)
    result = trainer.run()
    if config.output_dir:
        trainer.write_artifacts(config.output_dir)
    return result

# srlora_tools/verify/suites.py
"""
Property suites run by ``srlora-tools verify``.

Every property draws its inputs from seeded streams under the suite seed
and compares against numpy or hand-derived oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ..adapter import effective_weight, pissa_init
from ..config import get_config
from ..errors import ScheduleError, ValidationError
from ..linalg import Rng, best_rank_k_error, gaussian, relative_error, svd, truncate
from ..logging import get_logger
from ..model import Activation, LossKind, SrloraNet, make_layer
from ..recompose import Episode, SlotLedger, build_schedule, fuse_slots, interval_variance, reinit_slots
from ..trainer import (
    ArchitectureConfig, DatasetConfig, DatasetKind, LayerConfig, RunConfig, SrloraTrainer, TrainMode,
)
from .gradcheck import check_adapter_gradients, check_loss_gradient, check_net_gradients
from .registry import PropertyResult, registry, verification_property

logger = get_logger("verify")

SVD_SHAPES = [(1, 1), (5, 5), (8, 3), (3, 8), (20, 12), (32, 32)]


def _fmt(value: float) -> str:
    return f"{value:.3e}"


def small_srlora_config(seed: int, n_all: int = 120) -> RunConfig:
    """Two-layer relu net on a teacher-student task with two switches."""
    return RunConfig(
        architecture=ArchitectureConfig(
            input_dim=16,
            layers=[LayerConfig(out_dim=16, activation="relu"), LayerConfig(out_dim=8, activation="identity")],
        ),
        dataset=DatasetConfig(
            kind=DatasetKind.TEACHER_STUDENT, d_in=16, d_out=8, k_star=4, n_train=256, n_eval=64, seed=seed,
        ),
        seed=seed,
        n_all=n_all,
        batch_size=32,
        learning_rate=0.01,
        momentum=0.9,
        rank=4,
        alpha=4.0,
        gamma=0.5,
        r_target=8,
        mode=TrainMode.SRLORA,
        eval_every=40,
    )


# svd

@verification_property("svd")
def svd_reconstruction(seed: int) -> PropertyResult:
    """Factors reconstruct the input, are orthonormal and match numpy's singular values."""
    worst = 0.0
    cases = [gaussian(Rng(seed).derive(1, i), m, n) for i, (m, n) in enumerate(SVD_SHAPES)]
    low = Rng(seed).derive(2)
    cases.append(gaussian(low, 10, 3) @ gaussian(low, 3, 10))
    cases.append(np.zeros((3, 4)))
    for w in cases:
        f = svd(w)
        d = min(w.shape)
        worst = max(
            worst,
            relative_error(f.reconstruct(), w),
            float(np.linalg.norm(f.u.T @ f.u - np.eye(d))),
            float(np.linalg.norm(f.v.T @ f.v - np.eye(d))),
            float(np.max(np.abs(f.s - np.linalg.svd(w, compute_uv=False)))) / max(1.0, float(f.s[0])),
        )
        if np.any(np.diff(f.s) > 0) or np.any(f.s < 0):
            return PropertyResult("svd_reconstruction", False, f"singular values not sorted for shape {w.shape}")
    return PropertyResult("svd_reconstruction", worst <= 1e-10, f"worst error {_fmt(worst)}")


@verification_property("svd")
def svd_sign_convention(seed: int) -> PropertyResult:
    """The largest-magnitude entry of every left singular vector is positive."""
    for i, (m, n) in enumerate(SVD_SHAPES):
        u = svd(gaussian(Rng(seed).derive(3, i), m, n)).u
        pivots = u[np.argmax(np.abs(u), axis=0), np.arange(u.shape[1])]
        if np.any(pivots <= 0):
            return PropertyResult("svd_sign_convention", False, f"negative pivot for shape {(m, n)}")
    return PropertyResult("svd_sign_convention", True)


@verification_property("svd")
def eckart_young(seed: int) -> PropertyResult:
    """Truncation error equals the singular value tail."""
    w = gaussian(Rng(seed).derive(4), 12, 9)
    reference = np.linalg.svd(w, compute_uv=False)
    worst = 0.0
    for k in range(0, 10):
        tail = float(np.sqrt(np.sum(reference[k:] ** 2)))
        got = best_rank_k_error(w, k)
        achieved = float(np.linalg.norm(w - truncate(svd(w), k)))
        worst = max(worst, abs(got - tail), abs(achieved - tail))
    return PropertyResult("eckart_young", worst <= 1e-10, f"worst error {_fmt(worst)}")


# gradients

@verification_property("gradients")
def adapter_gradients(seed: int) -> PropertyResult:
    """Adapter backward matches central differences."""
    rng = Rng(seed).derive(5)
    layer = pissa_init(gaussian(rng, 6, 5), 3, 6.0)
    results = check_adapter_gradients(layer, gaussian(rng, 5, 4), gaussian(rng, 6, 4))
    worst = max(r.max_rel_error for r in results)
    return PropertyResult("adapter_gradients", all(r.passed for r in results), f"worst rel error {_fmt(worst)}")


def _relu_net(seed: int) -> SrloraNet:
    rng = Rng(seed).derive(6)
    layers = [
        make_layer(gaussian(rng, 6, 8, 0.0, 0.5), Activation.RELU, rank=3, alpha=3.0),
        make_layer(gaussian(rng, 4, 6, 0.0, 0.5), Activation.IDENTITY, rank=2, alpha=4.0),
    ]
    for layer in layers:
        layer.bias[:] = gaussian(rng, layer.out_features, 1, 0.0, 0.1)
    return SrloraNet(layers=layers)


@verification_property("gradients")
def net_gradients(seed: int) -> PropertyResult:
    """End-to-end backward of a two-layer relu net matches central differences (mse and cross-entropy)."""
    rng = Rng(seed).derive(7)
    x = gaussian(rng, 8, 5)
    y = gaussian(rng, 4, 5)
    onehot = np.eye(4)[:, [0, 3, 1, 1, 2]]
    results = check_net_gradients(_relu_net(seed), x, y, LossKind.MSE)
    results += check_net_gradients(_relu_net(seed), x, onehot, LossKind.SOFTMAX_CROSS_ENTROPY)
    worst = max(r.max_rel_error for r in results)
    failed = [r.name for r in results if not r.passed]
    return PropertyResult("net_gradients", not failed, f"worst rel error {_fmt(worst)} failed={failed}")


@verification_property("gradients")
def loss_gradients(seed: int) -> PropertyResult:
    """Loss gradients w.r.t. the outputs match central differences."""
    rng = Rng(seed).derive(8)
    logits = gaussian(rng, 5, 6)
    onehot = np.eye(5)[:, [0, 4, 2, 2, 1, 3]]
    results = [
        check_loss_gradient(LossKind.MSE, logits, gaussian(rng, 5, 6)),
        check_loss_gradient(LossKind.SOFTMAX_CROSS_ENTROPY, logits, onehot),
    ]
    worst = max(r.max_rel_error for r in results)
    return PropertyResult("loss_gradients", all(r.passed for r in results), f"worst rel error {_fmt(worst)}")


# preservation

@verification_property("preservation")
def pissa_identity(seed: int) -> PropertyResult:
    """Residual plus adapter reproduces the pretrained weight for 20 seeded shapes."""
    worst = 0.0
    for i in range(20):
        stream = Rng(seed).derive(9, i)
        m, n = (int(v) for v in stream.generator.integers(2, 13, size=2))
        r = int(stream.generator.integers(1, min(m, n) + 1))
        w0 = gaussian(stream, m, n)
        worst = max(worst, relative_error(effective_weight(pissa_init(w0, r, float(r))), w0))
    return PropertyResult("pissa_identity", worst <= 1e-8, f"worst rel error {_fmt(worst)}")


@verification_property("preservation")
def fuse_reinit_preservation(seed: int) -> PropertyResult:
    """Fusing slots and refilling them from unused directions keeps the effective weight."""
    rng = Rng(seed).derive(10)
    layer = pissa_init(gaussian(rng, 10, 8), 4, 8.0)
    layer.b += gaussian(rng, 10, 4, 0.0, 0.1)
    layer.a += gaussian(rng, 4, 8, 0.0, 0.1)
    before = effective_weight(layer)
    fuse_slots(layer, [0, 2])
    reinit_slots(layer, [0, 2], step=1)
    err = relative_error(effective_weight(layer), before)
    return PropertyResult("fuse_reinit_preservation", err <= 1e-9 and layer.p_r == 6, f"rel error {_fmt(err)}")


@verification_property("preservation")
def switch_preservation(seed: int) -> PropertyResult:
    """Every switch of a short run leaves eval-split outputs and trainable count unchanged."""
    trainer = SrloraTrainer(small_srlora_config(seed))
    count = trainer.net.trainable_parameter_count()
    trainer.run()
    records = [r for r in trainer.log.switches if not r.skipped]
    worst = max((r.max_output_rel_diff for r in records), default=0.0)
    ok = (
        len(records) == 2 * len(trainer.net.layers)
        and worst <= 1e-6
        and all(r.probe_loss_rel_diff <= 1e-6 for r in records)
        and trainer.net.trainable_parameter_count() == count
    )
    return PropertyResult("switch_preservation", ok, f"{len(records)} switches, worst rel diff {_fmt(worst)}")


# schedule

@verification_property("schedule")
def schedule_arithmetic(seed: int) -> PropertyResult:
    """Switch counts and steps follow the schedule formulas."""
    big = build_schedule(8, 0.5, 512, 100_000)
    small = build_schedule(8, 0.5, 16, 1000)
    none = build_schedule(8, 0.5, 8, 1000)
    ok = (
        big.r_prime == 4 and big.n_switch == 126
        and small.switch_steps == (500, 1000) and small.t_interval == 500
        and none.n_switch == 0 and none.switch_steps == ()
    )
    return PropertyResult("schedule_arithmetic", ok)


@verification_property("schedule")
def schedule_divisibility(seed: int) -> PropertyResult:
    """Indivisible rank growth and non-integral ``gamma * r`` are rejected."""
    rejected = 0
    for args in ((8, 0.5, 15, 1000), (3, 0.5, 5, 1000), (8, 0.5, 4, 1000), (8, 0.5, 16, 1)):
        try:
            build_schedule(*args)
        except ScheduleError:
            rejected += 1
    return PropertyResult("schedule_divisibility", rejected == 4, f"{rejected}/4 rejected")


@verification_property("schedule")
def ledger_invariants(seed: int) -> PropertyResult:
    """Each direction is activated once, episodes never overlap, and coverage is contiguous."""
    config = small_srlora_config(seed)
    trainer = SrloraTrainer(config)
    trainer.run()
    schedule = trainer.schedule
    for layer_id, layer in trainer.net.adapted_layers():
        r = layer.lora.rank
        expected = list(range(r + schedule.n_switch * (r // 2)))
        if trainer.ledger.activated_indices(layer_id) != expected:
            return PropertyResult("ledger_invariants", False, f"layer {layer_id} coverage mismatch")
        for slot in range(r):
            history = trainer.ledger.episodes.get((layer_id, slot), [])
            for prev, cur in zip(history, history[1:]):
                if prev.retired_step is None or cur.activated_step < prev.retired_step:
                    return PropertyResult("ledger_invariants", False, f"layer {layer_id} slot {slot} overlaps")
    return PropertyResult("ledger_invariants", True, f"{len(trainer.ledger)} episodes")


@verification_property("schedule")
def interval_variance_oracle(seed: int) -> PropertyResult:
    """Interval variance equals a two-pass population variance."""
    gen = Rng(seed).derive(11).generator
    ledger = SlotLedger()
    n_all = 1000
    expected = {}
    for layer_id in range(2):
        durations = []
        for slot in range(4):
            start = 0
            history = []
            for _ in range(int(gen.integers(1, 4))):
                end = min(n_all, start + int(gen.integers(1, 400)))
                history.append(Episode(len(ledger) + len(history), start, end))
                durations.append(end - start)
                start = end
            ledger.episodes[(layer_id, slot)] = history
        mean = sum(durations) / len(durations)
        expected[layer_id] = sum((d - mean) ** 2 for d in durations) / len(durations)
    got = interval_variance(ledger, n_all)
    worst = max(abs(got[k] - v) for k, v in expected.items())
    return PropertyResult("interval_variance_oracle", worst <= 1e-12 * max(1.0, max(expected.values())),
                          f"worst error {_fmt(worst)}")


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    results: List[PropertyResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)


def run_suite(suite: str, seed: Optional[int] = None) -> SuiteReport:
    """Run every property of ``suite`` (``all`` for everything)."""
    if suite not in registry.get_suite_names():
        raise ValidationError(f"unknown suite {suite!r}; choose from {', '.join(registry.get_suite_names())}")
    seed = get_config().get("VERIFY_SEED") if seed is None else seed
    results: List[PropertyResult] = []
    for check in registry.get_by_suite(suite):
        try:
            result = check.run(seed)
        except Exception as exc:  # crashes count as failures
            result = PropertyResult(check.name, False, f"{type(exc).__name__}: {exc}")
        if result.passed:
            logger.info(f"PASS {result.name} {result.detail}".rstrip())
        else:
            logger.error(f"FAIL {result.name} {result.detail}".rstrip())
        results.append(result)
    return SuiteReport(suite=suite, results=results)

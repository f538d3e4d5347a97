"""
Training: run configuration, optimizer, the training driver and checkpoints.
"""

from .run_config import (
    ArchitectureConfig, DatasetConfig, DatasetKind, LayerConfig, RunConfig, RunConfigSchema, TrainMode,
    load_run_config, parse_run_config, save_run_config,
)
from .optimizer import SgdMomentum, apply_step, net_gradients, net_parameters, param_name, zero_slots
from .checkpoint import checkpoint, read_container, restore, write_container
from .trainer import (
    CHECKPOINT_FILE, CONFIG_FILE, LEDGER_FILE, METRICS_FILE, SCORES_FILE, SUMMARY_FILE, SWITCHES_FILE,
    SrloraTrainer, TrainResult,
    build_datasets, build_net, pretrained_weight, train,
)

__all__ = [
    "ArchitectureConfig", "DatasetConfig", "DatasetKind", "LayerConfig", "RunConfig", "RunConfigSchema",
    "TrainMode", "load_run_config", "parse_run_config", "save_run_config",
    "SgdMomentum", "apply_step", "net_gradients", "net_parameters", "param_name", "zero_slots",
    "checkpoint", "read_container", "restore", "write_container",
    "CHECKPOINT_FILE", "CONFIG_FILE", "LEDGER_FILE", "METRICS_FILE", "SCORES_FILE", "SUMMARY_FILE", "SWITCHES_FILE",
    "SrloraTrainer", "TrainResult",
    "build_datasets", "build_net", "pretrained_weight", "train",
]

# srlora_tools/trainer/checkpoint.py
"""
Checkpoint container ("SRLC").

Layout: magic ``b"SRLC"``, u32 format version, u32 manifest length, the
UTF-8 JSON manifest (sorted keys), then the SRLM matrix records named by
``manifest["records"]`` back to back. Anything left over, or missing, is
corruption.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np

from ..adapter import InitKind, LoraLinear
from ..errors import CheckpointError
from ..importance import ImportanceState
from ..linalg import Matrix, SvdFactors, decode_matrix, encode_matrix
from ..logging import get_logger
from ..model import Activation, NetLayer, SrloraNet

logger = get_logger("checkpoint")

MAGIC = b"SRLC"
FORMAT_VERSION = 1
_PREAMBLE = struct.Struct("<4sII")


def write_container(path: Union[str, Path], manifest: Dict[str, Any], records: List[Tuple[str, Matrix]]) -> Path:
    names = [name for name, _ in records]
    if len(set(names)) != len(names):
        raise CheckpointError("duplicate record names")
    manifest = {**manifest, "records": names}
    header = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    body = b"".join(encode_matrix(matrix) for _, matrix in records)
    path = Path(path)
    path.write_bytes(_PREAMBLE.pack(MAGIC, FORMAT_VERSION, len(header)) + header + body)
    return path


def read_container(path: Union[str, Path]) -> Tuple[Dict[str, Any], Dict[str, Matrix]]:
    data = Path(path).read_bytes()
    if len(data) < _PREAMBLE.size:
        raise CheckpointError(f"{path}: truncated preamble")
    magic, version, manifest_len = _PREAMBLE.unpack_from(data, 0)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported format version {version}")
    offset = _PREAMBLE.size
    if offset + manifest_len > len(data):
        raise CheckpointError(f"{path}: truncated manifest")
    try:
        manifest = json.loads(data[offset:offset + manifest_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: unreadable manifest") from exc
    offset += manifest_len

    records: Dict[str, Matrix] = {}
    for name in manifest.get("records", []):
        matrix, offset = decode_matrix(data, offset)
        records[name] = matrix
    if offset != len(data):
        raise CheckpointError(f"{path}: {len(data) - offset} trailing bytes")
    return manifest, records


# Network <-> records

def _row(vector: np.ndarray) -> Matrix:
    return np.asarray(vector, dtype=np.float64).reshape(1, -1)


def net_to_records(net: SrloraNet) -> Tuple[Dict[str, Any], List[Tuple[str, Matrix]]]:
    layers_meta: List[Dict[str, Any]] = []
    records: List[Tuple[str, Matrix]] = []
    for i, layer in enumerate(net.layers):
        meta: Dict[str, Any] = {"activation": layer.activation.value, "adapted": layer.adapted}
        records.append((f"layer{i}.bias", layer.bias))
        if layer.lora is None:
            records.append((f"layer{i}.dense", layer.dense))
        else:
            lora, state = layer.lora, layer.importance
            meta.update({
                "rank": lora.rank,
                "alpha": lora.alpha,
                "p_r": lora.p_r,
                "slot_meta": list(lora.slot_meta),
                "init": lora.init_kind.value,
                "beta1": state.beta1,
                "beta2": state.beta2,
                "importance_step": state.step,
            })
            records.extend([
                (f"layer{i}.w", lora.w),
                (f"layer{i}.b", lora.b),
                (f"layer{i}.a", lora.a),
                (f"layer{i}.svd0.u", lora.svd0.u),
                (f"layer{i}.svd0.s", _row(lora.svd0.s)),
                (f"layer{i}.svd0.v", lora.svd0.v),
                (f"layer{i}.i_bar_b", state.i_bar_b),
                (f"layer{i}.u_bar_b", state.u_bar_b),
                (f"layer{i}.i_bar_a", state.i_bar_a),
                (f"layer{i}.u_bar_a", state.u_bar_a),
            ])
        layers_meta.append(meta)
    return {"layers": layers_meta, "version": net.version}, records


def net_from_records(manifest: Dict[str, Any], records: Dict[str, Matrix]) -> SrloraNet:
    try:
        layers: List[NetLayer] = []
        for i, meta in enumerate(manifest["layers"]):
            activation = Activation(meta["activation"])
            bias = records[f"layer{i}.bias"]
            if not meta["adapted"]:
                layers.append(NetLayer(bias=bias, activation=activation, dense=records[f"layer{i}.dense"]))
                continue
            factors = SvdFactors(
                u=records[f"layer{i}.svd0.u"],
                s=np.ascontiguousarray(records[f"layer{i}.svd0.s"][0]),
                v=records[f"layer{i}.svd0.v"],
            )
            lora = LoraLinear(
                w=records[f"layer{i}.w"],
                svd0=factors,
                b=records[f"layer{i}.b"],
                a=records[f"layer{i}.a"],
                rank=int(meta["rank"]),
                alpha=float(meta["alpha"]),
                p_r=int(meta["p_r"]),
                slot_meta=[int(k) for k in meta["slot_meta"]],
                init_kind=InitKind(meta["init"]),
            )
            state = ImportanceState(
                i_bar_b=records[f"layer{i}.i_bar_b"],
                u_bar_b=records[f"layer{i}.u_bar_b"],
                i_bar_a=records[f"layer{i}.i_bar_a"],
                u_bar_a=records[f"layer{i}.u_bar_a"],
                beta1=float(meta["beta1"]),
                beta2=float(meta["beta2"]),
                step=int(meta["importance_step"]),
            )
            layers.append(NetLayer(bias=bias, activation=activation, lora=lora, importance=state))
        return SrloraNet(layers=layers, version=int(manifest.get("version", 0)))
    except (KeyError, ValueError, TypeError) as exc:
        raise CheckpointError(f"checkpoint does not describe a network: {exc}") from exc


def checkpoint(net: SrloraNet, path: Union[str, Path]) -> Path:
    """Save just the network."""
    manifest, records = net_to_records(net)
    out = write_container(path, {"kind": "net", "net": manifest}, records)
    logger.info(f"Saved network checkpoint to {out}")
    return out


def restore(path: Union[str, Path]) -> SrloraNet:
    manifest, records = read_container(path)
    if "net" not in manifest:
        raise CheckpointError(f"{path}: no network in checkpoint")
    net = net_from_records(manifest["net"], records)
    logger.info(f"Restored network from {path}")
    return net

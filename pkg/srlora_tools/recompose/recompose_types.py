# srlora_tools/recompose/recompose_types.py
"""
Types for subspace recomposition: the switch schedule, the slot ledger and
per-switch outcomes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

from ..errors import ValidationError
from ..importance import ImportanceState


class ResetScope(Enum):
    """Which slots get their importance statistics cleared at a switch."""
    RECYCLED = "recycled"
    ALL = "all"


@dataclass(frozen=True)
class SwitchSchedule:
    """When switches happen and how many slots each recycles."""
    r: int
    r_prime: int
    r_target: int
    n_all: int
    n_switch: int
    t_interval: int
    switch_steps: Tuple[int, ...]

    def is_switch_step(self, step: int) -> bool:
        return step in self.switch_steps

    @property
    def r_explored(self) -> int:
        """Singular directions activated once every switch has run."""
        return self.r + self.n_switch * self.r_prime

    def to_dict(self) -> Dict[str, object]:
        return {
            "r": self.r,
            "r_prime": self.r_prime,
            "r_target": self.r_target,
            "n_all": self.n_all,
            "n_switch": self.n_switch,
            "t_interval": self.t_interval,
            "switch_steps": list(self.switch_steps),
        }


@dataclass
class Episode:
    """One singular direction occupying one slot over ``[activated_step, retired_step)``."""
    singular_index: int
    activated_step: int
    retired_step: Optional[int] = None

    @property
    def is_open(self) -> bool:
        return self.retired_step is None

    def duration(self, n_all: int) -> int:
        end = n_all if self.retired_step is None else self.retired_step
        return end - self.activated_step


@dataclass
class SlotLedger:
    """Activation history per ``(layer_id, slot)``."""
    episodes: Dict[Tuple[int, int], List[Episode]] = field(default_factory=dict)

    def open(self, layer_id: int, slot: int, singular_index: int, step: int) -> None:
        history = self.episodes.setdefault((layer_id, slot), [])
        if history and history[-1].is_open:
            raise ValidationError(f"layer {layer_id} slot {slot} already holds an open episode")
        if history and step < history[-1].retired_step:
            raise ValidationError(f"layer {layer_id} slot {slot}: episode at step {step} overlaps the previous one")
        if singular_index in self.activated_indices(layer_id):
            raise ValidationError(f"layer {layer_id}: singular index {singular_index} was already activated")
        history.append(Episode(singular_index=singular_index, activated_step=step))

    def retire(self, layer_id: int, slot: int, step: int) -> None:
        history = self.episodes.get((layer_id, slot))
        if not history or not history[-1].is_open:
            return
        if step < history[-1].activated_step:
            raise ValidationError(f"layer {layer_id} slot {slot}: retire step {step} precedes activation")
        history[-1].retired_step = step

    def activated_indices(self, layer_id: int) -> List[int]:
        return sorted(
            episode.singular_index
            for (lid, _), history in self.episodes.items() if lid == layer_id
            for episode in history
        )

    def layer_ids(self) -> List[int]:
        return sorted({lid for lid, _ in self.episodes})

    def iter_rows(self) -> Iterator[Tuple[int, int, Episode]]:
        """``(layer_id, slot, episode)`` in layer, slot, time order."""
        for (layer_id, slot) in sorted(self.episodes):
            for episode in self.episodes[(layer_id, slot)]:
                yield layer_id, slot, episode

    def __len__(self) -> int:
        return sum(len(history) for history in self.episodes.values())

    def to_records(self) -> List[List[Optional[int]]]:
        return [
            [layer_id, slot, e.singular_index, e.activated_step, e.retired_step]
            for layer_id, slot, e in self.iter_rows()
        ]

    @classmethod
    def from_records(cls, records: List[List[Optional[int]]]) -> "SlotLedger":
        ledger = cls()
        for layer_id, slot, index, activated, retired in records:
            ledger.episodes.setdefault((int(layer_id), int(slot)), []).append(
                Episode(int(index), int(activated), None if retired is None else int(retired))
            )
        return ledger


@dataclass(frozen=True)
class SwitchOutcome:
    """Result of one ``recompose_step`` on one layer."""
    slots: Tuple[int, ...]
    new_indices: Tuple[int, ...]
    state: ImportanceState
    skipped: bool = False

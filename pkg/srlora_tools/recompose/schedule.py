# srlora_tools/recompose/schedule.py
"""
Switch schedule arithmetic.

``n_switch = (r_target - r) / r'`` with ``r' = gamma * r``; switches fire at
multiples of ``t_interval = n_all // n_switch``.
"""

from __future__ import annotations

import math

from ..errors import ScheduleError
from ..logging import get_logger
from .recompose_types import SwitchSchedule

logger = get_logger("schedule")

_INTEGRAL_TOL = 1e-9


def recycled_per_switch(r: int, gamma: float) -> int:
    """``r' = gamma * r``, which must be a positive integer."""
    if not 0.0 < gamma <= 1.0:
        raise ScheduleError(f"gamma must be in (0, 1], got {gamma}")
    if r < 1:
        raise ScheduleError(f"rank must be >= 1, got {r}")
    product = gamma * r
    r_prime = int(round(product))
    if r_prime < 1 or not math.isclose(product, r_prime, rel_tol=0.0, abs_tol=_INTEGRAL_TOL):
        raise ScheduleError(f"gamma * r must be a positive integer, got {gamma} * {r} = {product:g}")
    return r_prime


def build_schedule(r: int, gamma: float, r_target: int, n_all: int) -> SwitchSchedule:
    """Validate the schedule inputs and lay out the switch steps."""
    r_prime = recycled_per_switch(r, gamma)
    if r_target < r:
        raise ScheduleError(f"r_target must be >= r ({r}), got {r_target}")
    if n_all < 0:
        raise ScheduleError(f"n_all must be >= 0, got {n_all}")
    growth = r_target - r
    if growth % r_prime:
        raise ScheduleError(
            f"r_target - r = {growth} is not divisible by gamma * r = {r_prime}"
        )
    n_switch = growth // r_prime
    if n_all < n_switch:
        raise ScheduleError(f"n_all = {n_all} is smaller than the {n_switch} switches required")

    if n_switch == 0:
        t_interval = 0
        steps: tuple = ()
    else:
        t_interval = n_all // n_switch
        steps = tuple(k * t_interval for k in range(1, n_switch + 1))

    schedule = SwitchSchedule(
        r=r,
        r_prime=r_prime,
        r_target=r_target,
        n_all=n_all,
        n_switch=n_switch,
        t_interval=t_interval,
        switch_steps=steps,
    )
    logger.debug(
        f"Schedule: r={r} r'={r_prime} r_target={r_target} n_switch={n_switch} t_interval={t_interval}"
    )
    return schedule

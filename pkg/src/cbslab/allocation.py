"""Measurement schedules: how the budget m splits across bisection steps.

Two built-in allocations. The "original" one spends half the adjustable
budget on the first step and halves it every step, which roughly equalizes
the per-step SNR. The "modified" one weights step s by s * 2**-(s+1), so
later (already higher-SNR) steps keep enough measurements that the
per-step error probability decays geometrically instead of staying flat.
Both use exact integer arithmetic for the floors; an off-by-one here would
silently shift every downstream error figure.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .model import is_power_of_two

__all__ = [
    "Schedule",
    "ScheduleKind",
    "original_schedule",
    "modified_schedule",
    "custom_schedule",
    "validate_schedule",
]


class ScheduleKind(str, Enum):
    ORIGINAL = "original"
    MODIFIED = "modified"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Schedule:
    """Per-step measurement counts for dimension n under total budget m.

    Construction is permissive so that invalid schedules can be inspected;
    validate_schedule reports violations as data. Schedules produced by
    original_schedule / modified_schedule always satisfy the invariants:
    len(counts) == log2(n), every count >= 1, sum(counts) <= budget.
    """

    counts: tuple[int, ...]
    budget: int
    n: int
    kind: ScheduleKind = ScheduleKind.CUSTOM

    @property
    def num_steps(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def rows(self) -> list[tuple[int, int]]:
        """(step, count) pairs, steps numbered from 1."""
        return list(enumerate(self.counts, start=1))

    def to_csv(self) -> str:
        lines = ["s,m_s"]
        lines += [f"{s},{c}" for s, c in self.rows()]
        return "\n".join(lines) + "\n"


def _check_dimensions(n: int, m: int) -> int:
    if not is_power_of_two(n) or n < 2:
        raise ValueError(f"n must be a power of two >= 2, got {n}")
    num_steps = n.bit_length() - 1
    if m < num_steps:
        raise ValueError(
            f"budget m={m} is infeasible for n={n}: every one of the "
            f"{num_steps} steps needs at least one measurement"
        )
    return num_steps


def original_schedule(n: int, m: int) -> Schedule:
    """Uniform-SNR allocation: count at step s is floor((m - s0) / 2**s) + 1."""
    num_steps = _check_dimensions(n, m)
    counts = tuple((m - num_steps) // 2**s + 1 for s in range(1, num_steps + 1))
    return Schedule(counts, m, n, ScheduleKind.ORIGINAL)


def modified_schedule(n: int, m: int) -> Schedule:
    """Decaying-error allocation: count at step s is floor((m - s0) * s / 2**(s+1)) + 1.

    The error guarantee attached to this allocation assumes m >= 2 * log2(n);
    smaller budgets still produce a well-formed schedule, and reporting code
    flags them as outside the guaranteed regime.
    """
    num_steps = _check_dimensions(n, m)
    counts = tuple(
        (m - num_steps) * s // 2 ** (s + 1) + 1 for s in range(1, num_steps + 1)
    )
    return Schedule(counts, m, n, ScheduleKind.MODIFIED)


def custom_schedule(counts, n: int, m: int) -> Schedule:
    """Wrap user-supplied counts, rejecting anything that violates the invariants."""
    sched = Schedule(tuple(int(c) for c in counts), int(m), int(n))
    problems = validate_schedule(sched)
    if problems:
        raise ValueError(f"invalid custom schedule: {', '.join(problems)}")
    return sched


def validate_schedule(sched: Schedule) -> list[str]:
    """Check the schedule invariants; violations come back as short slugs.

    Possible entries: dimension-not-dyadic, wrong-length, nonpositive-count,
    budget-exceeded. An empty list means the schedule is valid.
    """
    if not is_power_of_two(sched.n) or sched.n < 2:
        return ["dimension-not-dyadic"]
    problems = []
    if len(sched.counts) != sched.n.bit_length() - 1:
        problems.append("wrong-length")
    if any(c < 1 for c in sched.counts):
        problems.append("nonpositive-count")
    if sum(sched.counts) > sched.budget:
        problems.append("budget-exceeded")
    return problems

"""The compressive binary search loop: split, sense, sum, halve.

Starting from the full index range, each step measures the current support
with a sign-balanced sensing vector and keeps the half the test statistic
points to. After log2(n) steps a single index remains.
"""
from __future__ import annotations

from dataclasses import dataclass

from .allocation import Schedule, validate_schedule
from .model import (
    DyadicInterval,
    NoiseSource,
    ProblemInstance,
    ZeroNoise,
    measure_step,
)

__all__ = ["StepRecord", "RunTrace", "run_cbs", "run_cbs_noiseless"]


@dataclass(frozen=True)
class StepRecord:
    """One step of a run: the support measured, the statistic, the decision.

    interval is the support before the split; spike_still_inside reports
    whether the chosen half still contains the spike after the decision.
    """

    step: int
    interval: DyadicInterval
    statistic: float
    chose_left: bool
    spike_still_inside: bool


@dataclass(frozen=True)
class RunTrace:
    """Complete record of one search: per-step decisions and the outcome."""

    instance: ProblemInstance
    schedule: Schedule
    steps: tuple[StepRecord, ...]
    estimated_index: int
    success: bool

    def to_dict(self) -> dict:
        """JSON-ready form: instance, schedule kind, step records, outcome."""
        return {
            "instance": {
                "n": self.instance.n,
                "spike_index": self.instance.spike_index,
                "mu": self.instance.mu,
            },
            "schedule": {
                "kind": self.schedule.kind.value,
                "budget": self.schedule.budget,
                "counts": list(self.schedule.counts),
            },
            "steps": [
                {
                    "step": rec.step,
                    "start": rec.interval.start,
                    "length": rec.interval.length,
                    "statistic": rec.statistic,
                    "chose_left": rec.chose_left,
                    "spike_still_inside": rec.spike_still_inside,
                }
                for rec in self.steps
            ],
            "estimated_index": self.estimated_index,
            "success": self.success,
        }


def run_cbs(
    inst: ProblemInstance,
    sched: Schedule,
    noise: NoiseSource | ZeroNoise,
) -> RunTrace:
    """Run the full search and return its trace.

    Each step halves the current support: the statistic from measure_step
    selects the left half when positive and the right half otherwise (an
    exact zero, a probability-zero event under noise, goes right). Exactly
    sum(sched.counts) noise draws are consumed.
    """
    problems = validate_schedule(sched)
    if problems:
        raise ValueError(f"invalid schedule: {', '.join(problems)}")
    if sched.n != inst.n:
        raise ValueError(f"schedule is for n={sched.n}, instance has n={inst.n}")

    current = DyadicInterval(0, inst.n)
    records = []
    for step, count in sched.rows():
        left, right = current.halves()
        statistic = measure_step(inst, current, step, count, noise)
        chose_left = statistic > 0.0
        chosen = left if chose_left else right
        records.append(
            StepRecord(
                step=step,
                interval=current,
                statistic=statistic,
                chose_left=chose_left,
                spike_still_inside=chosen.contains(inst.spike_index),
            )
        )
        current = chosen

    estimated_index = current.start
    return RunTrace(
        instance=inst,
        schedule=sched,
        steps=tuple(records),
        estimated_index=estimated_index,
        success=estimated_index == inst.spike_index,
    )


def run_cbs_noiseless(inst: ProblemInstance, sched: Schedule) -> RunTrace:
    """Run with all noise draws forced to zero; exact binary search.

    Succeeds for any mu > 0 regardless of the schedule. mu = 0 is rejected:
    the statistic would be identically zero and every decision degenerate.
    """
    if inst.mu <= 0:
        raise ValueError("noiseless run requires mu > 0")
    return run_cbs(inst, sched, ZeroNoise())

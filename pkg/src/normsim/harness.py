"""Experiment runner: single runs, parameter sweeps, CSV emission.

A sweep runs one independent world per parameter value over the same
trace and seed; rows are ordered by parameter, so the output is
identical no matter how many workers executed the points.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .config import (
    CBP_SWEEP,
    DBP_SWEEP,
    TBP_SWEEP,
    ConfigError,
    ExperimentConfig,
    build_trace,
    build_world,
)
from .kernel import SimReport
from .trace import VoltageTrace

SWEEP_CSV_COLUMNS = (
    "param",
    "counter1_val",
    "counters_energy_fj",
    "norm_energy_fj",
    "cycles_compute",
    "cycles_backup",
    "cycles_restore",
    "cycles_stall",
    "cycles_off",
    "backups_committed",
)


@dataclass(frozen=True)
class SweepRow:
    param: int
    report: SimReport

    def csv_values(self) -> tuple[int, ...]:
        r = self.report
        c = r.categories
        return (
            self.param,
            r.counter1_val,
            r.counters_energy_fj,
            r.norm_energy_fj,
            c["compute"],
            c["backup"],
            c["restore"],
            c["stall"],
            c["off"],
            r.backups_committed,
        )


@dataclass(frozen=True)
class SweepReport:
    policy: str
    rows: tuple[SweepRow, ...]


def run_experiment(config: ExperimentConfig, trace: VoltageTrace | None = None) -> SimReport:
    """Build a world from the config and run it for total_cycles."""
    world = build_world(config, trace)
    return world.run(config.total_cycles)


def sweep_values(config: ExperimentConfig, policy: str | None = None) -> list[int]:
    """The parameter values a sweep visits, per the standard ranges."""
    policy = policy or config.policy
    start, stop, step = {"dbp": DBP_SWEEP, "cbp": CBP_SWEEP, "tbp": TBP_SWEEP}[policy]
    return list(range(start, stop + 1, step))


def _sweep_point(args: tuple[ExperimentConfig, int]) -> SweepRow:
    config, value = args
    return SweepRow(value, run_experiment(config.with_policy_parameter(value)))


def sweep(config: ExperimentConfig, policy: str | None = None,
          values: list[int] | None = None, jobs: int = 1) -> SweepReport:
    """One independent run per parameter value, identical trace and seed.

    ``jobs`` > 1 fans the points out over worker processes; row order is
    by parameter either way.
    """
    if policy is not None:
        if policy not in ("dbp", "cbp", "tbp"):
            raise ConfigError(f"policy must be dbp, cbp or tbp, got {policy!r}")
        config = dataclasses.replace(config, policy=policy)
    config.validate()
    if values is None:
        values = sweep_values(config)
    if not values:
        raise ConfigError("sweep range is empty")

    points = [(config, v) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, points, chunksize=8))
    else:
        rows = [_sweep_point(p) for p in points]
    return SweepReport(policy=config.policy, rows=tuple(rows))


def sweep_csv(report: SweepReport) -> str:
    lines = [",".join(SWEEP_CSV_COLUMNS)]
    for row in report.rows:
        lines.append(",".join(str(v) for v in row.csv_values()))
    return "\n".join(lines) + "\n"


def run_csv(report: SimReport) -> str:
    """Single-run report as metric,value rows (includes per-entity energy)."""
    pairs: list[tuple[str, object]] = [
        ("cycles_run", report.cycles_run),
        ("counter1_val", report.counter_values[0]),
        ("counter2_val", report.counter_values[1]),
        ("counter3_val", report.counter_values[2]),
        ("counters_energy_fj", report.counters_energy_fj),
        ("norm_energy_fj", report.norm_energy_fj),
    ]
    pairs.extend((f"energy_fj_{name}", fj) for name, fj in report.energy_fj.items())
    pairs.extend((f"cycles_{cat}", n) for cat, n in report.categories.items())
    pairs.extend([
        ("backups_attempted", report.backups_attempted),
        ("backups_committed", report.backups_committed),
        ("nvr_hold_warnings", report.nvr_hold_warnings),
        ("final_mode", report.final_mode),
    ])
    lines = ["metric,value"]
    lines.extend(f"{k},{v}" for k, v in pairs)
    return "\n".join(lines) + "\n"


def emit_csv(text: str, path: str) -> None:
    """Write CSV text with fixed newlines so reruns are byte-identical."""
    with open(path, "w", newline="") as fh:
        fh.write(text)


def energy_per_increment(total_energy: int, increments: int) -> Decimal | None:
    """Energy per counter increment, exact rational rounded to 2 decimals.

    Returns None for zero increments (the ratio is undefined).
    """
    if increments < 0 or total_energy < 0:
        raise ValueError("total_energy and increments must be non-negative")
    if increments == 0:
        return None
    ratio = Decimal(total_energy) / Decimal(increments)
    return ratio.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)


def compute_eligible_cycles(trace: VoltageTrace, threshold_mv: int,
                            reset_threshold_mv: int, total_cycles: int) -> int:
    """Cycles whose sample keeps the device powered and at/above a threshold.

    Brute-force per-cycle recount over the prescaled trace; monotone
    non-increasing in the threshold by construction.  This is the
    structural upper bound on compute time for the dynamic policy.
    """
    samples = trace.samples
    period = trace.sample_period_cycles
    length = len(samples)
    count = 0
    for t in range(total_cycles):
        mv = samples[(t // period) % length]
        if mv >= threshold_mv and mv >= reset_threshold_mv:
            count += 1
    return count


def baseline_trace(config: ExperimentConfig) -> VoltageTrace:
    """The trace a run of this config would use (handy for analysis)."""
    return build_trace(config)

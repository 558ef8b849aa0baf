"""Voltage traces feeding the intermittency emulator's ROM.

A trace is a sequence of non-negative millivolt samples plus a prescaler
value (clock cycles per sample).  Voltages are integer millivolts
throughout the simulator so threshold comparisons are bit-exact; the
comparators everywhere use strict less-than ("below threshold" means
sample < threshold, a sample equal to its threshold does not fire).

Real harvesting traces can be supplied as CSV; a deterministic synthetic
generator stands in when no measured trace is available.  It produces a
charge/discharge sawtooth with seeded jitter: the capacitor voltage ramps
up while the load is off and drops quickly while the load runs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

MAX_MILLIVOLTS = 65535  # 16-bit unsigned comparator width


class TraceError(ValueError):
    """Raised for malformed trace files or invalid synthesis parameters."""


@dataclass(frozen=True)
class VoltageTrace:
    """Immutable millivolt sample sequence with its prescaler value."""

    samples: tuple[int, ...]
    sample_period_cycles: int = 1

    def __post_init__(self):
        if not self.samples:
            raise TraceError("trace must contain at least one sample")
        if self.sample_period_cycles < 1:
            raise TraceError("sample_period_cycles must be >= 1")
        for i, mv in enumerate(self.samples):
            if not (0 <= mv <= MAX_MILLIVOLTS):
                raise TraceError(
                    f"sample {i} = {mv} mV outside [0, {MAX_MILLIVOLTS}]"
                )

    def __len__(self) -> int:
        return len(self.samples)

    def with_period(self, period: int) -> "VoltageTrace":
        return VoltageTrace(self.samples, period)


@dataclass(frozen=True)
class TraceSynthParams:
    """Parameters of the synthetic charge/discharge trace.

    Rates are mV per sample.  ``jitter_mv`` is the half-width of the
    uniform per-sample rate perturbation; 0 disables jitter and yields a
    strictly periodic sawtooth.  ``jitter_seed`` makes jittered traces
    reproducible; None means "not resolved yet" (the experiment seed is
    substituted at world-build time) and is rejected by the generator.
    """

    charge_rate: int
    discharge_rate: int
    on_voltage: int
    off_voltage: int
    jitter_seed: int | None = None
    length: int = 400
    jitter_mv: int = 0
    start_voltage: int | None = None

    def validate(self) -> None:
        if self.jitter_seed is None:
            raise TraceError("jitter_seed is unresolved; set it explicitly")
        if self.charge_rate <= 0 or self.discharge_rate <= 0:
            raise TraceError("charge/discharge rates must be positive")
        if self.off_voltage >= self.on_voltage:
            raise TraceError("off_voltage must be below on_voltage")
        if self.length < 1:
            raise TraceError("length must be >= 1")
        if self.jitter_mv < 0:
            raise TraceError("jitter_mv must be non-negative")
        # Jitter below both rates keeps every charge step rising and every
        # discharge step falling, so phases always terminate.
        if self.jitter_mv >= min(self.charge_rate, self.discharge_rate):
            raise TraceError("jitter_mv must be smaller than both rates")


def load_trace_csv(source_bytes: bytes, period_override: int | None = None) -> VoltageTrace:
    """Parse a trace CSV: header ``index,millivolts``, one sample per row.

    A comment line ``# sample_period_cycles=<N>`` before the header sets
    the prescaler; ``period_override`` wins over it.  Malformed rows
    raise TraceError naming the 1-based line number.
    """
    try:
        text = source_bytes.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise TraceError(f"trace file is not valid UTF-8: {exc}") from None

    period = 1
    samples: list[int] = []
    saw_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("sample_period_cycles"):
                _, _, value = body.partition("=")
                try:
                    period = int(value.strip())
                except ValueError:
                    raise TraceError(
                        f"line {lineno}: bad sample_period_cycles value {value.strip()!r}"
                    ) from None
            continue
        if not saw_header:
            cols = [c.strip().lower() for c in line.split(",")]
            if cols[:2] != ["index", "millivolts"]:
                raise TraceError(
                    f"line {lineno}: expected header 'index,millivolts', got {line!r}"
                )
            saw_header = True
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise TraceError(f"line {lineno}: expected 'index,millivolts', got {line!r}")
        try:
            mv = int(parts[1].strip())
        except ValueError:
            raise TraceError(
                f"line {lineno}: non-numeric voltage {parts[1].strip()!r}"
            ) from None
        if not (0 <= mv <= MAX_MILLIVOLTS):
            raise TraceError(f"line {lineno}: voltage {mv} outside [0, {MAX_MILLIVOLTS}]")
        samples.append(mv)

    if not samples:
        raise TraceError("trace file contains no samples")
    if period_override is not None:
        period = period_override
    return VoltageTrace(tuple(samples), period)


def dump_trace_csv(trace: VoltageTrace) -> str:
    """Inverse of load_trace_csv (used by the trace export helper)."""
    lines = [f"# sample_period_cycles={trace.sample_period_cycles}", "index,millivolts"]
    lines.extend(f"{i},{mv}" for i, mv in enumerate(trace.samples))
    return "\n".join(lines) + "\n"


def downsample_mean(trace: VoltageTrace, group_size: int) -> VoltageTrace:
    """Average consecutive groups of samples (integer mean, round half up).

    A final partial group is averaged over its actual length.  Output
    length is ceil(len/group_size); the prescaler is left unchanged.
    """
    if group_size < 1:
        raise TraceError("group_size must be >= 1")
    if group_size == 1:
        return trace
    src = trace.samples
    out = []
    for start in range(0, len(src), group_size):
        group = src[start:start + group_size]
        n = len(group)
        out.append((sum(group) + n // 2) // n)
    return VoltageTrace(tuple(out), trace.sample_period_cycles)


def synth_harvest_trace(params: TraceSynthParams) -> VoltageTrace:
    """Generate the deterministic charge/discharge sawtooth trace.

    The voltage ramps from ``off_voltage`` toward ``on_voltage`` at
    ``charge_rate`` per sample, then falls back at ``discharge_rate``;
    direction flips when either turnaround voltage is crossed.  Jitter
    perturbs each step by a seeded uniform integer in [-jitter_mv,
    +jitter_mv], so peaks and valleys vary slightly between humps.
    """
    params.validate()
    rng = random.Random(params.jitter_seed)
    v = params.off_voltage if params.start_voltage is None else params.start_voltage
    v = max(0, min(MAX_MILLIVOLTS, v))
    charging = True
    samples = [v]
    for _ in range(params.length - 1):
        jit = rng.randint(-params.jitter_mv, params.jitter_mv) if params.jitter_mv else 0
        if charging:
            v += params.charge_rate + jit
            if v >= params.on_voltage:
                charging = False
        else:
            v -= params.discharge_rate + jit
            if v <= params.off_voltage:
                charging = True
        v = max(0, min(MAX_MILLIVOLTS, v))
        samples.append(v)
    return VoltageTrace(tuple(samples), 1)


def shutdown_fraction(trace: VoltageTrace, threshold_mv: int) -> float:
    """Fraction of samples strictly below the threshold."""
    below = sum(1 for mv in trace.samples if mv < threshold_mv)
    return below / len(trace.samples)

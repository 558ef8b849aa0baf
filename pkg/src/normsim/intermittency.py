"""Intermittency emulator: trace ROM walker, comparators, power-reset mux.

Every clock cycle the emulator exposes the current trace sample through a
bank of strict less-than comparators (one bit per configured threshold)
and drives the power-reset line from the bit selected by the threshold
mux.  A prescaler (the clock divider) stretches each ROM entry over a
configurable number of cycles; the ROM index wraps at the trace end so
short traces repeat.

An optional wake-up threshold adds hysteresis: once the selected
comparator fires, the device stays off until a sample at or above the
wake-up voltage arrives.  With hysteresis disabled (the default), the
power-reset line is a pure function of the cycle index, configuration
and trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .trace import VoltageTrace


@dataclass(frozen=True)
class IeConfig:
    thresholds_mv: tuple[int, ...] = (2800,)
    select_threshold: int = 0
    prescale: int = 1
    wakeup_threshold_mv: int | None = None

    def validate(self) -> None:
        if not self.thresholds_mv:
            raise ValueError("at least one threshold is required")
        if not (0 <= self.select_threshold < len(self.thresholds_mv)):
            raise ValueError(
                f"select_threshold {self.select_threshold} out of range "
                f"for {len(self.thresholds_mv)} thresholds"
            )
        if self.prescale < 1:
            raise ValueError("prescale must be >= 1")
        if self.wakeup_threshold_mv is not None:
            if self.wakeup_threshold_mv < self.thresholds_mv[self.select_threshold]:
                raise ValueError("wake-up threshold must not be below the reset threshold")


@dataclass
class IeState:
    rom_index: int = 0
    divider_count: int = 0
    latched_off: bool = False


@dataclass(frozen=True)
class IeOutputs:
    power_reset: bool
    threshold_comp: tuple[bool, ...]


def ie_step(state: IeState, config: IeConfig, trace: VoltageTrace) -> IeOutputs:
    """Advance the emulator one clock cycle and return this cycle's outputs.

    The outputs reflect the sample pointed to by the ROM index *before*
    the divider advances, so at cycle t the compared sample is
    ``trace[floor(t / prescale) mod len(trace)]``.
    """
    sample = trace.samples[state.rom_index]
    comp = tuple(sample < thr for thr in config.thresholds_mv)
    selected = comp[config.select_threshold]

    if config.wakeup_threshold_mv is None:
        power_reset = selected
    else:
        # Hysteresis latch: set when the reset comparator fires, cleared
        # only by a sample at or above the wake-up voltage.
        if selected:
            state.latched_off = True
        elif sample >= config.wakeup_threshold_mv:
            state.latched_off = False
        power_reset = state.latched_off

    state.divider_count += 1
    if state.divider_count >= config.prescale:
        state.divider_count = 0
        state.rom_index += 1
        if state.rom_index >= len(trace.samples):
            state.rom_index = 0  # trace wraps and restarts

    return IeOutputs(power_reset, comp)


def default_prescale(trace_len: int, total_cycles: int) -> int:
    """Divider value that stretches one trace pass over roughly the run."""
    if trace_len < 1 or total_cycles < 1:
        raise ValueError("trace_len and total_cycles must be >= 1")
    return max(1, total_cycles // trace_len)


@dataclass
class IntermittencyEmulator:
    """Stateful wrapper pairing a config with its running state."""

    config: IeConfig
    trace: VoltageTrace
    state: IeState = field(default_factory=IeState)

    def __post_init__(self):
        self.config.validate()

    def step(self) -> IeOutputs:
        return ie_step(self.state, self.config, self.trace)

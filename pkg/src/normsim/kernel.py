"""Deterministic clock-stepped simulation engine.

One step is one clock edge.  Within a cycle the components evaluate in
a fixed order — intermittency emulator, workload/policy, non-volatile
register, energy counters — so every run of the same configuration is
bit-identical.  The workload observes the NVR outputs registered from
the previous cycle, the standard synchronous pattern.

Two reset lines exist: the emulated power failure (driven per cycle by
the intermittency emulator) clears only volatile state, while the
hardware reset additionally engages the NVR reset block and wipes the
persistent words.  When the hardware reset is held, that behavior wins
regardless of the power line.

Every cycle lands in exactly one accounting category (compute, backup,
restore, stall, off), so the category counts always partition the total
cycle count.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .energy import EnergyLedger, ea_step, sample_and_reset
from .intermittency import IntermittencyEmulator
from .nvmem import IDLE_OUTPUTS, NonVolatileRegister, nvr_step
from .trace import VoltageTrace
from .workload import CounterWorkload, Mode


@dataclass(frozen=True)
class ClockConfig:
    frequency_hz: int = 100_000_000
    total_cycles: int = 10_000

    def validate(self) -> None:
        if self.frequency_hz <= 0:
            raise ValueError("frequency_hz must be positive")
        if self.total_cycles < 0:
            raise ValueError("total_cycles must be non-negative")

    @property
    def simulated_seconds(self) -> float:
        return self.total_cycles / self.frequency_hz


@dataclass
class ResetLines:
    hw_reset: bool = False
    power_reset: bool = False


class CycleCategory(enum.Enum):
    COMPUTE = "compute"
    BACKUP = "backup"
    RESTORE = "restore"
    STALL = "stall"
    OFF = "off"


_MODE_CATEGORY = {
    Mode.COMPUTING: CycleCategory.COMPUTE,
    Mode.BACKING_UP: CycleCategory.BACKUP,
    Mode.RECOVERING: CycleCategory.RESTORE,
    Mode.STALLED: CycleCategory.STALL,
    Mode.OFF: CycleCategory.OFF,
}

# Fixed roster of monitored entities; indices are shared between the
# workload activity reports and the energy ledger.
ENTITIES = ("counter1", "counter2", "counter3", "backup_logic", "nvr", "ie")


@dataclass(frozen=True)
class SimReport:
    """Snapshot of a run: metrics, energies and cycle accounting."""

    cycles_run: int
    counter_values: tuple[int, int, int]
    energy_fj: dict[str, int]
    categories: dict[str, int]
    backups_attempted: int
    backups_committed: int
    nvr_hold_warnings: int
    final_mode: str

    @property
    def counter1_val(self) -> int:
        return self.counter_values[0]

    @property
    def counters_energy_fj(self) -> int:
        """Energy of the simulated architecture: counters + backup logic."""
        return sum(self.energy_fj[n] for n in
                   ("counter1", "counter2", "counter3", "backup_logic"))

    @property
    def norm_energy_fj(self) -> int:
        """Energy of the emulation framework's own blocks."""
        return self.energy_fj["nvr"] + self.energy_fj["ie"]


class World:
    """Owns one instance of every component and steps them in lockstep.

    A world is single-threaded; independent worlds may run in parallel.
    """

    def __init__(self, clock: ClockConfig, ie: IntermittencyEmulator,
                 nvr: NonVolatileRegister, workload: CounterWorkload,
                 ledger: EnergyLedger):
        clock.validate()
        if tuple(ledger.entities) != ENTITIES:
            raise ValueError(f"energy ledger must cover the roster {ENTITIES}")
        self.clock = clock
        self.ie = ie
        self.nvr = nvr
        self.workload = workload
        self.ledger = ledger
        self.resets = ResetLines()
        self.cycle = 0
        self.halted = False
        self._prev_nvr = IDLE_OUTPUTS
        self._mask = [False] * len(ENTITIES)

    @property
    def trace(self) -> VoltageTrace:
        return self.ie.trace

    def step(self) -> CycleCategory:
        """Advance everything by one clock cycle."""
        if self.halted:
            return CycleCategory.OFF

        ie_out = self.ie.step()
        power_down = ie_out.power_reset or self.resets.power_reset
        hw_reset = self.resets.hw_reset

        tick = self.workload.step(power_down, hw_reset, ie_out.threshold_comp,
                                  self._prev_nvr)
        self._prev_nvr = nvr_step(self.nvr.state, tick.nvr_inputs,
                                  self.nvr.config, self.clock.frequency_hz)

        mask = self._mask
        mask[0] = mask[1] = mask[2] = False
        if tick.active_counter is not None:
            mask[tick.active_counter] = True
        mask[3] = tick.mode in (Mode.BACKING_UP, Mode.RECOVERING)
        mask[4] = self._prev_nvr.busy
        mask[5] = True  # the intermittency emulator never stops
        ea_step(self.ledger, mask)

        self.cycle += 1
        if self.cycle % self.ledger.sample_interval == 0:
            sample_and_reset(self.ledger)

        if hw_reset:
            # Reset block wins over the power line for accounting too:
            # the device is held down either way.
            return CycleCategory.OFF
        return _MODE_CATEGORY[tick.mode]

    def run(self, total_cycles: int) -> SimReport:
        """Step ``total_cycles`` cycles and report; the world stays resumable."""
        if total_cycles < 0:
            raise ValueError("total_cycles must be non-negative")
        counts = {cat: 0 for cat in CycleCategory}
        for _ in range(total_cycles):
            counts[self.step()] += 1
        sample_and_reset(self.ledger)  # fold the tail into the totals
        return SimReport(
            cycles_run=total_cycles,
            counter_values=self.workload.effective_values(self.nvr.state.words),
            energy_fj={name: self.ledger.accumulated[i]
                       for i, name in enumerate(ENTITIES)},
            categories={cat.value: counts[cat] for cat in CycleCategory},
            backups_attempted=self.workload.backups_attempted,
            backups_committed=self.workload.backups_committed,
            nvr_hold_warnings=self.nvr.state.hold_warnings,
            final_mode=self.workload.mode.value,
        )

"""Activity-counter energy approximation.

One counter per monitored entity increments on every clock cycle the
entity is active; a per-entity energy-per-cycle table (integer
femtojoules) converts counts to energy.  Because both factors are
integers, sampling the counters at any interval and accumulating the
products is exactly lossless: the accumulated total always equals the
one-shot product of total active cycles and the per-cycle energy.

Counters are modeled as 32-bit registers; the default sampling interval
of 2^16 cycles keeps them far from overflow on any schedule.
"""

from __future__ import annotations

from dataclasses import dataclass

COUNTER_BITS = 32
DEFAULT_SAMPLE_INTERVAL = 1 << 16


@dataclass(frozen=True)
class IecResult:
    energy: int  # femtojoules
    evaluation_ready: bool


@dataclass
class EnergyLedger:
    entities: tuple[str, ...]
    e3c: tuple[int, ...]  # fJ per active cycle, one per entity
    counters: list[int] | None = None
    accumulated: list[int] | None = None
    sample_interval: int = DEFAULT_SAMPLE_INTERVAL

    def __post_init__(self):
        if len(self.e3c) != len(self.entities):
            raise ValueError("one energy rate per entity is required")
        if any(v < 0 for v in self.e3c):
            raise ValueError("energy rates must be non-negative")
        if not (1 <= self.sample_interval <= (1 << COUNTER_BITS) - 1):
            raise ValueError("sample_interval must fit the counter width")
        if self.counters is None:
            self.counters = [0] * len(self.entities)
        if self.accumulated is None:
            self.accumulated = [0] * len(self.entities)

    @property
    def n_entities(self) -> int:
        return len(self.entities)

    def index_of(self, entity: str) -> int:
        return self.entities.index(entity)

    def totals(self) -> dict[str, int]:
        """Accumulated plus not-yet-sampled energy, per entity."""
        return {
            name: self.accumulated[i] + self.counters[i] * self.e3c[i]
            for i, name in enumerate(self.entities)
        }


def ea_step(ledger: EnergyLedger, active_mask: list[bool] | tuple[bool, ...]) -> None:
    """Increment the counter of every active entity by one."""
    if len(active_mask) != ledger.n_entities:
        raise ValueError("active_mask width must match the entity roster")
    counters = ledger.counters
    for i, active in enumerate(active_mask):
        if active:
            counters[i] += 1


def iec_calc(ledger: EnergyLedger, index: int) -> IecResult:
    """Convert one entity's cycle count to energy (exact integer product)."""
    if not (0 <= index < ledger.n_entities):
        raise IndexError(f"entity index {index} out of range for {ledger.n_entities}")
    return IecResult(energy=ledger.counters[index] * ledger.e3c[index],
                     evaluation_ready=True)


def sample_and_reset(ledger: EnergyLedger) -> None:
    """Fold current counts into the accumulated totals and clear counters."""
    counters = ledger.counters
    accumulated = ledger.accumulated
    e3c = ledger.e3c
    for i in range(ledger.n_entities):
        accumulated[i] += counters[i] * e3c[i]
        counters[i] = 0

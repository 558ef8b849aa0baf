"""Non-volatile register (NVR) model and memory-technology catalog.

The NVR is persistent word storage wrapped in the delayed-access
handshake that emulates slow non-volatile memory on top of a volatile
register file:

* an access is accepted when the block is idle and ``en`` is sampled
  high; the address, data-in and write-enable are latched at acceptance;
* ``busy`` stays high for the scaled access delay; while busy all
  memory-related inputs are ignored (clients must hold them constant —
  deviations are counted as warnings but have no effect);
* ``busy_sig`` mirrors ``busy`` but falls one clock cycle earlier so
  synchronous clients can pipeline back-to-back requests;
* data out can be captured once ``busy`` is low again;
* an accepted write always completes, even if the emulated power fails
  mid-access (word-level write atomicity);
* data out is forced to zero while the emulated power is down (power
  reset high, hardware reset low) — the stored words are untouched;
* the hardware reset line engages the reset block, which zeroes one word
  per cycle starting from address zero, wrapping; a full wipe needs the
  line held for at least ``depth`` cycles.

All energies are integer femtojoules so the catalog values are exact.
"""

from __future__ import annotations

from dataclasses import dataclass


class SimulationFault(RuntimeError):
    """Configuration error detected while stepping (halts the run)."""


NANOS_PER_SECOND = 10**9
SECONDS_PER_YEAR = 365 * 24 * 3600  # 31,536,000


def busy_cycles(delay_ns: int, clock_hz: int) -> int:
    """Clock cycles covering an access delay: ceil(delay_ns * clock_hz / 1e9).

    Computed in exact integer arithmetic; 80 ns at 100 MHz gives 8.
    """
    if clock_hz <= 0:
        raise ValueError("clock_hz must be positive")
    if delay_ns < 0:
        raise ValueError("delay_ns must be non-negative")
    return -(-delay_ns * clock_hz // NANOS_PER_SECOND)


@dataclass(frozen=True)
class MemTechParams:
    """Datasheet parameters of one non-volatile memory technology.

    Currents are in mA (resolved internally to whole microamps),
    access times in ns, supply in mV.  ``endurance_cycles`` of None
    means unlimited; a None sleep current falls back to the standby
    current and is flagged via ``sleep_defaulted``.
    """

    name: str
    read_ns: int
    write_ns: int
    read_ma: float
    write_ma: float
    standby_ua: float
    sleep_ua: float | None
    retention_years: int
    endurance_cycles: int | None
    size_nm: int | None = None  # informational only, no role in the model
    vdd_mv: int = 3300

    @property
    def sleep_defaulted(self) -> bool:
        return self.sleep_ua is None

    @property
    def effective_sleep_ua(self) -> float:
        return self.standby_ua if self.sleep_ua is None else self.sleep_ua

    @property
    def max_access_ns(self) -> int:
        return max(self.read_ns, self.write_ns)


TECH_CATALOG: dict[str, MemTechParams] = {
    tech.name: tech
    for tech in (
        MemTechParams("FeRAM", read_ns=55, write_ns=55, read_ma=8, write_ma=8,
                      standby_ua=90, sleep_ua=5, retention_years=10,
                      endurance_cycles=10**15, size_nm=130),
        MemTechParams("MRAM", read_ns=35, write_ns=35, read_ma=55, write_ma=105,
                      standby_ua=18000, sleep_ua=None, retention_years=20,
                      endurance_cycles=10**8, size_nm=14),
        MemTechParams("nvSRAM", read_ns=10, write_ns=10, read_ma=3, write_ma=3,
                      standby_ua=250, sleep_ua=8, retention_years=20,
                      endurance_cycles=None, size_nm=None),
        MemTechParams("ReRAM", read_ns=10, write_ns=50, read_ma=1.5, write_ma=0.15,
                      standby_ua=60, sleep_ua=6, retention_years=10,
                      endurance_cycles=10**6, size_nm=28),
        MemTechParams("PRAM", read_ns=115, write_ns=115, read_ma=30, write_ma=15,
                      standby_ua=80, sleep_ua=None, retention_years=10,
                      endurance_cycles=10**6, size_nm=90),
    )
}


def tech_params(technology: str) -> MemTechParams:
    """Catalog lookup; unknown names raise with the valid choices listed."""
    try:
        return TECH_CATALOG[technology]
    except KeyError:
        valid = ", ".join(sorted(TECH_CATALOG))
        raise KeyError(f"unknown memory technology {technology!r}; valid: {valid}") from None


def access_energy(params: MemTechParams, op_kind: str) -> int:
    """Energy of one access in integer femtojoules: current * time * vdd.

    mA * ns * mV resolves to attojoules exactly once the current is
    expressed in whole microamps; the final scale to femtojoules rounds
    half up, which is exact for every catalog entry (all are multiples
    of 250 fJ).
    """
    if op_kind == "read":
        ma, ns = params.read_ma, params.read_ns
    elif op_kind == "write":
        ma, ns = params.write_ma, params.write_ns
    else:
        raise ValueError(f"op_kind must be 'read' or 'write', got {op_kind!r}")
    ua = round(ma * 1000)  # datasheet currents carry at most 1 uA resolution
    attojoules = ua * ns * params.vdd_mv
    return (attojoules + 500) // 1000


def endurance_lifetime_years(endurance_cycles: float, writes_per_second: float) -> float:
    """Years until the write endurance budget is spent at a constant rate."""
    if writes_per_second <= 0:
        raise ValueError("writes_per_second must be positive")
    return endurance_cycles / writes_per_second / SECONDS_PER_YEAR


def catalog_csv() -> str:
    """The technology catalog as CSV, one feature per row."""
    names = list(TECH_CATALOG)
    rows: list[tuple[str, list[str]]] = [
        ("retention_years", [str(TECH_CATALOG[n].retention_years) for n in names]),
        ("endurance_cycles",
         ["unlimited" if TECH_CATALOG[n].endurance_cycles is None
          else str(TECH_CATALOG[n].endurance_cycles) for n in names]),
        ("read_ns", [str(TECH_CATALOG[n].read_ns) for n in names]),
        ("write_ns", [str(TECH_CATALOG[n].write_ns) for n in names]),
        ("size_nm", ["" if TECH_CATALOG[n].size_nm is None
                     else str(TECH_CATALOG[n].size_nm) for n in names]),
        ("read_ma", [f"{TECH_CATALOG[n].read_ma:g}" for n in names]),
        ("write_ma", [f"{TECH_CATALOG[n].write_ma:g}" for n in names]),
        ("standby_ua", [f"{TECH_CATALOG[n].standby_ua:g}" for n in names]),
        ("sleep_ua", [f"{TECH_CATALOG[n].effective_sleep_ua:g}" for n in names]),
        ("sleep_ua_defaulted",
         [str(TECH_CATALOG[n].sleep_defaulted).lower() for n in names]),
        ("read_energy_fj", [str(access_energy(TECH_CATALOG[n], "read")) for n in names]),
        ("write_energy_fj", [str(access_energy(TECH_CATALOG[n], "write")) for n in names]),
        ("vdd_mv", [str(TECH_CATALOG[n].vdd_mv) for n in names]),
    ]
    lines = ["feature," + ",".join(names)]
    lines.extend(f"{feature}," + ",".join(values) for feature, values in rows)
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class NvrConfig:
    depth: int = 8
    word_bits: int = 32
    access_delay_ns: int | None = None  # None: slower of read/write from catalog
    technology: str = "FeRAM"

    def validate(self) -> None:
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if not (1 <= self.word_bits <= 64):
            raise ValueError("word_bits must be in [1, 64]")
        if self.access_delay_ns is not None and self.access_delay_ns < 0:
            raise ValueError("access_delay_ns must be non-negative")
        if self.technology != "custom":
            tech_params(self.technology)
        elif self.access_delay_ns is None:
            raise ValueError("custom technology requires an explicit access_delay_ns")

    def resolved_delay_ns(self) -> int:
        if self.access_delay_ns is not None:
            return self.access_delay_ns
        return tech_params(self.technology).max_access_ns


@dataclass
class PendingAccess:
    addr: int
    din: int
    we: bool


@dataclass
class NvrState:
    words: list[int]
    busy_remaining: int = 0
    pending: PendingAccess | None = None
    reset_fill_index: int | None = None
    dout_reg: int = 0
    hold_warnings: int = 0

    @classmethod
    def initial(cls, config: NvrConfig) -> "NvrState":
        return cls(words=[0] * config.depth)


@dataclass(frozen=True)
class NvrInputs:
    addr: int = 0
    din: int = 0
    we: bool = False
    en: bool = False
    reset: bool = False
    power_reset: bool = False


IDLE_INPUTS = NvrInputs()


@dataclass(frozen=True)
class NvrOutputs:
    dout: int = 0
    busy: bool = False
    busy_sig: bool = False


IDLE_OUTPUTS = NvrOutputs()


def _complete(state: NvrState, word_mask: int) -> None:
    acc = state.pending
    if acc.we:
        state.words[acc.addr] = acc.din & word_mask
    state.dout_reg = state.words[acc.addr]
    state.pending = None


def nvr_step(state: NvrState, inputs: NvrInputs, config: NvrConfig,
             clock_hz: int = 100_000_000) -> NvrOutputs:
    """Advance the NVR one clock cycle; returns this cycle's outputs.

    An access accepted at cycle t holds ``busy`` through cycles
    t..t+N-1 (N = busy_cycles of the configured delay) and commits at
    the end of cycle t+N-1, so the result is on ``dout`` from cycle
    t+N with ``busy`` low.  A zero delay completes in the accept cycle
    with no busy period.
    """
    word_mask = (1 << config.word_bits) - 1

    if inputs.reset:
        # Hardware reset: abort any in-flight access and run the reset
        # block, one zeroed word per cycle, wrapping through the array.
        state.pending = None
        state.busy_remaining = 0
        state.dout_reg = 0
        idx = state.reset_fill_index if state.reset_fill_index is not None else 0
        state.words[idx] = 0
        state.reset_fill_index = (idx + 1) % config.depth
        return NvrOutputs(dout=0, busy=False, busy_sig=False)
    state.reset_fill_index = None

    accepted_now = False
    if state.busy_remaining == 0 and inputs.en and not inputs.power_reset:
        if not (0 <= inputs.addr < config.depth):
            raise SimulationFault(
                f"NVR access to address {inputs.addr} outside depth {config.depth}"
            )
        n = busy_cycles(config.resolved_delay_ns(), clock_hz)
        state.pending = PendingAccess(inputs.addr, inputs.din & word_mask, inputs.we)
        if n == 0:
            _complete(state, word_mask)
        else:
            state.busy_remaining = n
            accepted_now = True

    # dout holds the previous value through the busy window; a completion
    # at the end of this cycle becomes visible only once busy is low
    dout_now = state.dout_reg

    if state.busy_remaining > 0:
        if inputs.en and not accepted_now and not inputs.power_reset:
            acc = state.pending
            if (inputs.addr, inputs.din & word_mask, inputs.we) != (acc.addr, acc.din, acc.we):
                state.hold_warnings += 1  # inputs must stay constant while busy
        busy = True
        busy_sig = state.busy_remaining > 1
        state.busy_remaining -= 1
        if state.busy_remaining == 0:
            _complete(state, word_mask)  # accepted accesses always finish
    else:
        busy = False
        busy_sig = False

    dout = 0 if inputs.power_reset else dout_now
    return NvrOutputs(dout=dout, busy=busy, busy_sig=busy_sig)


@dataclass
class NonVolatileRegister:
    """Config + state pair with the per-cycle step bound to one clock."""

    config: NvrConfig
    clock_hz: int = 100_000_000
    state: NvrState | None = None

    def __post_init__(self):
        self.config.validate()
        if self.state is None:
            self.state = NvrState.initial(self.config)
        self.n_busy = busy_cycles(self.config.resolved_delay_ns(), self.clock_hz)

    def step(self, inputs: NvrInputs) -> NvrOutputs:
        return nvr_step(self.state, inputs, self.config, self.clock_hz)


def default_nvr_e3c_fj(config: NvrConfig, clock_hz: int) -> int:
    """Per-busy-cycle energy derived from the catalog access energies.

    The mean of the read and write access energies spread over the busy
    window, so a full access accumulates roughly its catalog energy.
    Custom technologies have no catalog entry and must configure the
    value explicitly.
    """
    if config.technology == "custom":
        raise ValueError("custom technology requires an explicit NVR energy rate")
    params = tech_params(config.technology)
    per_access = (access_energy(params, "read") + access_energy(params, "write") + 1) // 2
    n = busy_cycles(config.resolved_delay_ns(), clock_hz)
    if n == 0:
        return per_access
    return (per_access + n // 2) // n

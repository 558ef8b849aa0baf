"""Simulated volatile architecture: three counters plus backup logic.

The workload mirrors a small transiently-powered design: three counter
words held in volatile flip-flop arrays, updated by a micro-step FSM
(fetch, increment, store — eight cycles per counter, so a full rotation
takes 24 cycles), and a backup-logic FSM that stores/recovers those
words through the non-volatile register.

The rotation is arranged so the first counter's store lands on the
final cycle of the 24-cycle rotation; its externally observed rate is
therefore exactly one increment per 24 enabled cycles (4.16 MHz at a
100 MHz clock) measured from any phase origin.

Backup policies:

* dynamic (``dbp``): a comparator bit from the intermittency emulator
  marks the supply dropping below the backup threshold; the falling
  crossing triggers an immediate snapshot, after which computation
  stalls while the voltage stays below the threshold (configurable);
* constant-time (``cbp``): a free-running timer triggers a snapshot
  every ``parameter`` microseconds of powered time;
* task-based (``tbp``): a snapshot triggers whenever counter1 reaches a
  fresh multiple of ``parameter``.

Snapshots are double-buffered: the four words (three counter values
plus a sequence/commit word, written last) go to the half not currently
live.  The NVR guarantees only word-level atomicity, so the commit word
is what makes a snapshot recoverable; a power failure before the commit
word is accepted voids the attempt and recovery returns the previous
snapshot.  All backup-logic registers are volatile: after every power-on
edge the FSM runs the recovery procedure before anything else.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

from .nvmem import IDLE_INPUTS, NonVolatileRegister, NvrInputs, NvrOutputs

COUNTER_WORD_MASK = (1 << 32) - 1
ROTATION_CYCLES = 24
SNAPSHOT_WORDS = 4  # three counter words + commit/sequence word
MIN_NVR_DEPTH = 2 * SNAPSHOT_WORDS

# Which counter's store lands on which micro-step phase.  Counter1 closes
# the rotation (phase 23); counters 2 and 3 commit at phases 7 and 15.
_COMMIT_PHASE_TO_COUNTER = {7: 1, 15: 2, 23: 0}
# Entity index of the counter being processed per 8-cycle slot.
_SLOT_ENTITY = (1, 2, 0)


class Mode(enum.Enum):
    OFF = "off"
    RECOVERING = "recovering"
    COMPUTING = "computing"
    BACKING_UP = "backing_up"
    STALLED = "stalled"


@dataclass
class CountersState:
    values: list[int] = field(default_factory=lambda: [0, 0, 0])
    fsm_phase: int = 0  # 0..23
    initial_values: tuple[int, int, int] = (0, 0, 0)

    def clear(self) -> None:
        """Power failure: the flip-flop arrays and the FSM phase reset."""
        self.values = [0, 0, 0]
        self.fsm_phase = 0

    def load(self, values: Sequence[int]) -> None:
        self.values = [v & COUNTER_WORD_MASK for v in values]
        self.fsm_phase = 0


def counters_step(state: CountersState, enable: bool = True) -> None:
    """One micro-step of the counter FSM; increments land at slot ends."""
    if not enable:
        return
    counter = _COMMIT_PHASE_TO_COUNTER.get(state.fsm_phase)
    if counter is not None:
        state.values[counter] = (state.values[counter] + 1) & COUNTER_WORD_MASK
    state.fsm_phase = (state.fsm_phase + 1) % ROTATION_CYCLES


@dataclass(frozen=True)
class BackupPolicy:
    """Policy kind plus its tuning parameter.

    Parameter meaning: millivolts for dbp (backup threshold),
    microseconds for cbp (backup period), counter1 milestones for tbp
    (backup task count).
    """

    kind: str
    parameter: int

    def validate(self) -> None:
        if self.kind not in ("dbp", "cbp", "tbp"):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.parameter <= 0:
            raise ValueError("policy parameter must be positive")


def cbp_period_cycles(period_us: int, clock_hz: int) -> int:
    """Backup period in clock cycles (exact for whole-us periods at 100 MHz)."""
    return max(1, period_us * clock_hz // 10**6)


_WAIT_IDLE = 0
_ISSUED = 1
_CAPTURE = 2


@dataclass
class NvrScript:
    """Drives a fixed list of NVR accesses through the busy handshake.

    Writes pipeline back-to-back using the early-falling busy mirror;
    reads insert one capture cycle per access because data-out becomes
    valid only once busy has dropped.  ``tick`` is called once per
    powered cycle with the previous cycle's NVR outputs and returns the
    inputs to drive this cycle (None for enable-low).
    """

    ops: list[tuple[int, int, bool]]  # (addr, din, we)
    capture: bool = False
    idx: int = 0
    phase: int = _WAIT_IDLE
    results: list[int] = field(default_factory=list)
    done: bool = False
    issued_index: int | None = None

    def tick(self, prev_out: NvrOutputs) -> NvrInputs | None:
        self.issued_index = None
        if self.done:
            return None
        if self.phase == _WAIT_IDLE:
            if prev_out.busy or prev_out.busy_sig:
                return None
            return self._issue()
        if self.phase == _ISSUED:
            if prev_out.busy_sig:
                addr, din, we = self.ops[self.idx]
                return NvrInputs(addr=addr, din=din, we=we, en=True)  # hold constant
            # Access finished at the end of the previous cycle.
            if self.capture:
                if prev_out.busy:
                    self.phase = _CAPTURE  # data-out valid next cycle
                    return None
                self.results.append(prev_out.dout)  # zero-delay access
            return self._advance()
        self.results.append(prev_out.dout)
        return self._advance()

    def _advance(self) -> NvrInputs | None:
        self.idx += 1
        if self.idx >= len(self.ops):
            self.done = True
            return None
        return self._issue()

    def _issue(self) -> NvrInputs:
        addr, din, we = self.ops[self.idx]
        self.phase = _ISSUED
        self.issued_index = self.idx
        return NvrInputs(addr=addr, din=din, we=we, en=True)


def _snapshot_ops(half: int, values: Sequence[int], seq: int) -> list[tuple[int, int, bool]]:
    base = half * SNAPSHOT_WORDS
    ops = [(base + i, values[i] & COUNTER_WORD_MASK, True) for i in range(3)]
    ops.append((base + 3, seq & COUNTER_WORD_MASK, True))  # commit word last
    return ops


@dataclass
class _RecoveryMachine:
    """Reads both commit words, then the counter words of the newest snapshot."""

    initial_values: tuple[int, int, int]
    stage: str = "seqs"
    script: NvrScript = None
    seq: int = 0
    half: int | None = None

    def __post_init__(self):
        if self.script is None:
            self.script = NvrScript(
                [(0 * SNAPSHOT_WORDS + 3, 0, False), (1 * SNAPSHOT_WORDS + 3, 0, False)],
                capture=True,
            )

    def tick(self, prev_out: NvrOutputs):
        """Returns (nvr_inputs, loaded) where loaded is (values, seq, half)
        once recovery finishes, else None."""
        inputs = self.script.tick(prev_out)
        if not self.script.done:
            return inputs, None
        if self.stage == "seqs":
            s0, s1 = self.script.results
            if s0 == 0 and s1 == 0:
                return inputs, (tuple(self.initial_values), 0, None)
            self.half = 0 if s0 >= s1 else 1
            self.seq = max(s0, s1)
            base = self.half * SNAPSHOT_WORDS
            self.stage = "values"
            self.script = NvrScript([(base + i, 0, False) for i in range(3)], capture=True)
            return self.script.tick(prev_out), None
        values = tuple(self.script.results)
        return inputs, (values, self.seq, self.half)


def peek_committed(nvr_words: Sequence[int]) -> tuple[tuple[int, int, int], int, int] | None:
    """Newest committed snapshot straight from the word array (metrics only)."""
    s0, s1 = nvr_words[0 * SNAPSHOT_WORDS + 3], nvr_words[1 * SNAPSHOT_WORDS + 3]
    if s0 == 0 and s1 == 0:
        return None
    half = 0 if s0 >= s1 else 1
    base = half * SNAPSHOT_WORDS
    return tuple(nvr_words[base:base + 3]), max(s0, s1), half


@dataclass
class WorkloadTick:
    nvr_inputs: NvrInputs
    mode: Mode
    active_counter: int | None  # entity index 0..2 of the counter slot in use


class CounterWorkload:
    """Per-cycle model of the counters plus backup-logic FSM."""

    def __init__(self, policy: BackupPolicy, clock_hz: int,
                 initial_values: tuple[int, int, int] = (0, 0, 0),
                 dbp_bit: int | None = None,
                 dbp_stall_below_threshold: bool = True,
                 nvr_depth: int = MIN_NVR_DEPTH):
        policy.validate()
        if nvr_depth < MIN_NVR_DEPTH:
            raise ValueError(
                f"snapshot double-buffering needs NVR depth >= {MIN_NVR_DEPTH}"
            )
        if policy.kind == "dbp" and dbp_bit is None:
            raise ValueError("dbp needs the index of its comparator bit")
        self.policy = policy
        self.clock_hz = clock_hz
        self.counters = CountersState(initial_values=tuple(initial_values))
        self.dbp_bit = dbp_bit
        self.dbp_stall = dbp_stall_below_threshold
        self.cbp_period = (
            cbp_period_cycles(policy.parameter, clock_hz) if policy.kind == "cbp" else 0
        )
        self.mode = Mode.OFF
        self.backups_attempted = 0
        self.backups_committed = 0
        self._recovery: _RecoveryMachine | None = None
        self._backup: NvrScript | None = None
        self._pending: tuple[int, int] | None = None  # (target half, seq)
        self._live_half: int | None = None
        self._known_seq = 0
        self._cbp_timer = 0
        self._tbp_last = 0
        self._dbp_armed = False

    def _clear_volatile(self) -> None:
        self.counters.clear()
        self._recovery = None
        self._backup = None
        self._pending = None
        self._live_half = None
        self._known_seq = 0
        self._cbp_timer = 0
        self._tbp_last = 0
        self._dbp_armed = False
        self.mode = Mode.OFF

    def _start_backup(self) -> NvrScript:
        self.backups_attempted += 1
        target = 0 if self._live_half is None else 1 - self._live_half
        seq = self._known_seq + 1
        self._backup = NvrScript(_snapshot_ops(target, self.counters.values, seq))
        self._pending = (target, seq)
        self.mode = Mode.BACKING_UP
        return self._backup

    def _tick_backup(self, prev_nvr: NvrOutputs) -> NvrInputs | None:
        inputs = self._backup.tick(prev_nvr)
        if self._backup.issued_index == SNAPSHOT_WORDS - 1:
            # Commit word accepted this cycle; the write is guaranteed to
            # finish even if power drops mid-busy.
            target, seq = self._pending
            self._live_half = target
            self._known_seq = seq
            self.backups_committed += 1
        return inputs

    def step(self, power_down: bool, hw_reset: bool,
             comps: tuple[bool, ...], prev_nvr: NvrOutputs) -> WorkloadTick:
        if hw_reset or power_down:
            self._clear_volatile()
            return WorkloadTick(
                NvrInputs(reset=hw_reset, power_reset=power_down), Mode.OFF, None
            )

        if self.mode is Mode.OFF:
            # Power-on edge: recovery always precedes computation.
            self.mode = Mode.RECOVERING
            self._recovery = _RecoveryMachine(self.counters.initial_values)
            if self.policy.kind == "cbp":
                self._cbp_timer = self.cbp_period

        if self.policy.kind == "cbp" and self._cbp_timer > 0:
            self._cbp_timer -= 1  # free-running on every powered cycle

        nvr_inputs: NvrInputs | None = None

        if self.mode is Mode.RECOVERING:
            nvr_inputs, loaded = self._recovery.tick(prev_nvr)
            if loaded is None:
                return WorkloadTick(nvr_inputs or IDLE_INPUTS, Mode.RECOVERING, None)
            values, seq, half = loaded
            self.counters.load(values)
            self._known_seq = seq
            self._live_half = half
            self._recovery = None
            self._tbp_last = self.counters.values[0]
            if self.policy.kind == "dbp":
                bit = comps[self.dbp_bit]
                self._dbp_armed = not bit
                self.mode = Mode.STALLED if (self.dbp_stall and bit) else Mode.COMPUTING
            else:
                self.mode = Mode.COMPUTING
            # fall through: this cycle already runs in the new mode

        if self.mode is Mode.BACKING_UP:
            nvr_inputs = self._tick_backup(prev_nvr)
            if not self._backup.done:
                return WorkloadTick(nvr_inputs or IDLE_INPUTS, Mode.BACKING_UP, None)
            self._backup = None
            if self.policy.kind == "dbp" and self.dbp_stall and comps[self.dbp_bit]:
                self.mode = Mode.STALLED
            else:
                self.mode = Mode.COMPUTING
            # fall through

        trigger = False
        if self.policy.kind == "dbp":
            bit = comps[self.dbp_bit]
            if self.mode is Mode.STALLED:
                if bit:
                    return WorkloadTick(IDLE_INPUTS, Mode.STALLED, None)
                self.mode = Mode.COMPUTING
                self._dbp_armed = True
            if bit and self._dbp_armed:
                trigger = True
                self._dbp_armed = False
            elif not bit:
                self._dbp_armed = True
        elif self.policy.kind == "cbp":
            if self._cbp_timer <= 0:
                trigger = True
                self._cbp_timer = self.cbp_period
        else:  # tbp
            c1 = self.counters.values[0]
            if c1 % self.policy.parameter == 0 and c1 != self._tbp_last:
                trigger = True
                self._tbp_last = c1

        if trigger:
            self._start_backup()
            nvr_inputs = self._tick_backup(prev_nvr)
            return WorkloadTick(nvr_inputs or IDLE_INPUTS, Mode.BACKING_UP, None)

        slot = _SLOT_ENTITY[self.counters.fsm_phase // 8]
        counters_step(self.counters, enable=True)
        return WorkloadTick(nvr_inputs or IDLE_INPUTS, Mode.COMPUTING, slot)

    def effective_values(self, nvr_words: Sequence[int]) -> tuple[int, int, int]:
        """Counter values as established progress.

        While the counters hold valid state (computing, stalled or
        backing up) that live state is the answer; while off or still
        recovering, the newest committed snapshot is what any future
        recovery would restore.
        """
        if self.mode in (Mode.COMPUTING, Mode.STALLED, Mode.BACKING_UP):
            return tuple(self.counters.values)
        committed = peek_committed(nvr_words)
        if committed is None:
            return tuple(self.counters.initial_values)
        return committed[0]


@dataclass(frozen=True)
class BackupOutcome:
    cycles: int
    committed: bool
    seq: int
    half: int


@dataclass(frozen=True)
class RecoverOutcome:
    values: tuple[int, int, int]
    seq: int
    half: int | None
    cycles: int


def backup(nvr: NonVolatileRegister, values: Sequence[int], seq: int = 1,
           target_half: int = 0, fail_after: int | None = None) -> BackupOutcome:
    """Write one full snapshot through the NVR handshake, cycle by cycle.

    ``fail_after`` injects a power failure after that many cycles: the
    client stops driving the bus while the NVR finishes any accepted
    access under power-reset (word atomicity).  The snapshot counts as
    committed once the commit word is accepted.
    """
    if nvr.config.depth < MIN_NVR_DEPTH:
        raise ValueError(f"NVR depth must be >= {MIN_NVR_DEPTH} for snapshots")
    script = NvrScript(_snapshot_ops(target_half, list(values), seq))
    committed = False
    cycles = 1
    prev = nvr.step(IDLE_INPUTS)  # observe: never issue against a busy block
    while not script.done and (fail_after is None or cycles < fail_after):
        inputs = script.tick(prev)
        if script.done:
            break
        if script.issued_index == SNAPSHOT_WORDS - 1:
            committed = True
        prev = nvr.step(inputs or IDLE_INPUTS)
        cycles += 1
    while nvr.state.busy_remaining > 0:
        nvr.step(NvrInputs(power_reset=True))
        cycles += 1
    return BackupOutcome(cycles=cycles, committed=committed, seq=seq, half=target_half)


def recover(nvr: NonVolatileRegister,
            initial_values: tuple[int, int, int] = (0, 0, 0)) -> RecoverOutcome:
    """Run the recovery procedure against the NVR and return the snapshot.

    An all-zero NVR (never backed up) is the defined cold start and
    yields the configured initial values with no committed half.
    """
    if nvr.config.depth < MIN_NVR_DEPTH:
        raise ValueError(f"NVR depth must be >= {MIN_NVR_DEPTH} for snapshots")
    machine = _RecoveryMachine(tuple(initial_values))
    cycles = 1
    prev = nvr.step(IDLE_INPUTS)
    while True:
        inputs, loaded = machine.tick(prev)
        if loaded is not None:
            values, seq, half = loaded
            return RecoverOutcome(values=values, seq=seq, half=half, cycles=cycles)
        prev = nvr.step(inputs or IDLE_INPUTS)
        cycles += 1

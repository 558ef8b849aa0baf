import random

import pytest

from normsim.intermittency import (
    IeConfig,
    IeState,
    IntermittencyEmulator,
    default_prescale,
    ie_step,
)
from normsim.trace import VoltageTrace


def test_below_selected_threshold_asserts_power_reset():
    trace = VoltageTrace((2700,))
    out = ie_step(IeState(), IeConfig(thresholds_mv=(2800,)), trace)
    assert out.power_reset is True
    assert out.threshold_comp == (True,)


def test_equal_sample_does_not_fire():
    # comparator is strict less-than
    trace = VoltageTrace((2800,))
    out = ie_step(IeState(), IeConfig(thresholds_mv=(2800,)), trace)
    assert out.power_reset is False


def test_rom_wraps_after_length_times_prescale_steps():
    rng = random.Random(11)
    for _ in range(20):
        length = rng.randint(1, 17)
        prescale = rng.randint(1, 9)
        trace = VoltageTrace(tuple(rng.randint(0, 4000) for _ in range(length)))
        state = IeState()
        config = IeConfig(thresholds_mv=(2800,), prescale=prescale)
        for _ in range(length * prescale):
            ie_step(state, config, trace)
        assert state.rom_index == 0
        assert state.divider_count == 0


def test_outputs_match_bruteforce_recomputation():
    rng = random.Random(5)
    trace = VoltageTrace(tuple(rng.randint(2000, 4000) for _ in range(37)))
    thresholds = (2500, 2800, 3333)
    config = IeConfig(thresholds_mv=thresholds, select_threshold=1, prescale=4)
    state = IeState()
    for t in range(2000):
        out = ie_step(state, config, trace)
        sample = trace.samples[(t // 4) % 37]
        expected = tuple(sample < thr for thr in thresholds)
        assert out.threshold_comp == expected, f"cycle {t}"
        assert out.power_reset == expected[1]


def test_hysteresis_latch_behavior():
    # reset at <2800, wake only at >=3100
    trace = VoltageTrace((3300, 2700, 2900, 3000, 3099, 3100, 2900, 2700))
    config = IeConfig(thresholds_mv=(2800,), wakeup_threshold_mv=3100)
    state = IeState()
    got = [ie_step(state, config, trace).power_reset for _ in range(8)]
    # off from the 2700 sample until the 3100 sample arrives
    assert got == [False, True, True, True, True, False, False, True]


def test_hysteresis_only_falls_at_or_above_wakeup():
    rng = random.Random(13)
    trace = VoltageTrace(tuple(rng.randint(2500, 3400) for _ in range(200)))
    config = IeConfig(thresholds_mv=(2800,), wakeup_threshold_mv=3100)
    state = IeState()
    prev = False
    for t in range(400):
        out = ie_step(state, config, trace)
        sample = trace.samples[t % 200]
        if prev and not out.power_reset:
            assert sample >= 3100
        prev = out.power_reset


def test_default_prescale():
    assert default_prescale(400, 10_000) == 25
    assert default_prescale(10_000, 10_000) == 1
    assert default_prescale(20_000, 10_000) == 1  # floor clamps to 1
    with pytest.raises(ValueError):
        default_prescale(0, 10)


def test_config_validation():
    IeConfig().validate()
    with pytest.raises(ValueError):
        IeConfig(thresholds_mv=()).validate()
    with pytest.raises(ValueError):
        IeConfig(thresholds_mv=(2800,), select_threshold=1).validate()
    with pytest.raises(ValueError):
        IeConfig(prescale=0).validate()
    with pytest.raises(ValueError):
        IeConfig(thresholds_mv=(2800,), wakeup_threshold_mv=2700).validate()


def test_emulator_wrapper_steps():
    ie = IntermittencyEmulator(IeConfig(thresholds_mv=(2800,)), VoltageTrace((2700, 3300)))
    assert ie.step().power_reset is True
    assert ie.step().power_reset is False
    assert ie.step().power_reset is True  # wrapped

import random

import pytest

from normsim.trace import (
    TraceError,
    TraceSynthParams,
    VoltageTrace,
    downsample_mean,
    dump_trace_csv,
    load_trace_csv,
    shutdown_fraction,
    synth_harvest_trace,
)


def test_load_csv_direct_parse():
    data = b"index,millivolts\n0,3300\n1,2700\n"
    trace = load_trace_csv(data)
    assert trace.samples == (3300, 2700)
    assert trace.sample_period_cycles == 1


def test_load_csv_period_comment_and_override():
    data = b"# sample_period_cycles=25\nindex,millivolts\n0,3300\n"
    assert load_trace_csv(data).sample_period_cycles == 25
    assert load_trace_csv(data, period_override=7).sample_period_cycles == 7


def test_load_csv_non_numeric_names_line():
    data = b"index,millivolts\n0,3300\n1,abc\n"
    with pytest.raises(TraceError, match="line 3"):
        load_trace_csv(data)


def test_load_csv_malformed_row_names_line():
    data = b"index,millivolts\n0,3300\n1\n"
    with pytest.raises(TraceError, match="line 3"):
        load_trace_csv(data)


def test_load_csv_empty_file_rejected():
    with pytest.raises(TraceError):
        load_trace_csv(b"")
    with pytest.raises(TraceError):
        load_trace_csv(b"index,millivolts\n")


def test_load_csv_bad_header():
    with pytest.raises(TraceError, match="header"):
        load_trace_csv(b"time,volts\n0,3300\n")


def test_csv_round_trip():
    trace = VoltageTrace((1, 2, 3, 65535), 13)
    assert load_trace_csv(dump_trace_csv(trace).encode()) == trace


def test_trace_validation():
    with pytest.raises(TraceError):
        VoltageTrace(())
    with pytest.raises(TraceError):
        VoltageTrace((70000,))
    with pytest.raises(TraceError):
        VoltageTrace((100,), 0)


def test_downsample_identity():
    trace = VoltageTrace((100, 200, 300), 4)
    assert downsample_mean(trace, 1) is trace


def test_downsample_exact_mean():
    trace = VoltageTrace((1000, 2000, 3000))
    assert downsample_mean(trace, 3).samples == (2000,)


def test_downsample_round_half_up():
    # 100,101 -> mean 100.5 rounds up to 101
    assert downsample_mean(VoltageTrace((100, 101)), 2).samples == (101,)
    # 100,101,101 -> mean 100.67 rounds to 101; 100,100,101 -> 100.33 -> 100
    assert downsample_mean(VoltageTrace((100, 101, 101)), 3).samples == (101,)
    assert downsample_mean(VoltageTrace((100, 100, 101)), 3).samples == (100,)


def test_downsample_partial_group_uses_actual_length():
    trace = VoltageTrace((10, 20, 30, 40, 99))
    assert downsample_mean(trace, 2).samples == (15, 35, 99)


def test_downsample_matches_bruteforce_oracle():
    rng = random.Random(42)
    samples = tuple(rng.randint(0, 5000) for _ in range(1000))
    trace = VoltageTrace(samples)
    out = downsample_mean(trace, 25)
    assert len(out) == 40
    for i in range(40):
        group = samples[i * 25:(i + 1) * 25]
        mean = sum(group) / len(group)
        # round half up, recomputed the slow way
        expected = int(mean) + (1 if mean - int(mean) >= 0.5 else 0)
        assert out.samples[i] == expected


def test_downsample_length_and_bounds_properties():
    rng = random.Random(7)
    for _ in range(50):
        n = rng.randint(1, 200)
        g = rng.randint(1, 40)
        samples = tuple(rng.randint(0, 4000) for _ in range(n))
        out = downsample_mean(VoltageTrace(samples), g)
        assert len(out) == -(-n // g)
        assert min(out.samples) >= min(samples)
        assert max(out.samples) <= max(samples)


def test_downsample_zero_group_rejected():
    with pytest.raises(TraceError):
        downsample_mean(VoltageTrace((1,)), 0)


def test_synth_zero_jitter_symmetric_rates_strictly_periodic():
    params = TraceSynthParams(charge_rate=10, discharge_rate=10, on_voltage=3000,
                              off_voltage=2200, jitter_seed=0, length=500)
    trace = synth_harvest_trace(params)
    period = 80 + 80  # 800/10 each way, turnarounds land exactly
    for i in range(len(trace) - period):
        assert trace.samples[i] == trace.samples[i + period]


def test_synth_zero_jitter_asymmetric_rates_periodic_after_first_turnaround():
    # 800 is not divisible by 30, so the descent undershoots; the pattern
    # locks into an exact period once past the first ascent
    params = TraceSynthParams(charge_rate=10, discharge_rate=30, on_voltage=3000,
                              off_voltage=2200, jitter_seed=0, length=500)
    trace = synth_harvest_trace(params)
    period = 81 + 27
    for i in range(81, len(trace) - period):
        assert trace.samples[i] == trace.samples[i + period]


def test_synth_same_seed_same_trace():
    params = TraceSynthParams(charge_rate=15, discharge_rate=60, on_voltage=3300,
                              off_voltage=2200, jitter_seed=99, length=400, jitter_mv=10)
    assert synth_harvest_trace(params) == synth_harvest_trace(params)
    other = TraceSynthParams(charge_rate=15, discharge_rate=60, on_voltage=3300,
                             off_voltage=2200, jitter_seed=100, length=400, jitter_mv=10)
    assert synth_harvest_trace(other) != synth_harvest_trace(params)


def test_synth_shutdown_fraction_by_construction():
    # turnarounds at 2200/3000 put 75% of the excursion below 2.8 V
    params = TraceSynthParams(charge_rate=10, discharge_rate=30, on_voltage=3000,
                              off_voltage=2200, jitter_seed=0, length=2000)
    frac = shutdown_fraction(synth_harvest_trace(params), 2800)
    assert abs(frac - 0.75) <= 0.02


def test_synth_param_validation():
    good = dict(charge_rate=10, discharge_rate=30, on_voltage=3000,
                off_voltage=2200, jitter_seed=0)
    synth_harvest_trace(TraceSynthParams(**good))
    with pytest.raises(TraceError):
        synth_harvest_trace(TraceSynthParams(**{**good, "off_voltage": 3200}))
    with pytest.raises(TraceError):
        synth_harvest_trace(TraceSynthParams(**{**good, "charge_rate": 0}))
    with pytest.raises(TraceError):
        synth_harvest_trace(TraceSynthParams(**{**good, "jitter_mv": 10}))
    with pytest.raises(TraceError, match="unresolved"):
        synth_harvest_trace(TraceSynthParams(**{**good, "jitter_seed": None}))


def test_shutdown_fraction_trivial_cases():
    assert shutdown_fraction(VoltageTrace((3300,) * 10), 2800) == 0.0
    assert shutdown_fraction(VoltageTrace((1000,) * 10), 2800) == 1.0
    assert shutdown_fraction(VoltageTrace((2700, 2900, 2700, 2900)), 2800) == 0.5
    # boundary: a sample equal to the threshold is not below it
    assert shutdown_fraction(VoltageTrace((2800,)), 2800) == 0.0


def test_shutdown_fraction_monotone_in_threshold():
    rng = random.Random(3)
    for _ in range(20):
        trace = VoltageTrace(tuple(rng.randint(0, 5000) for _ in range(100)))
        fractions = [shutdown_fraction(trace, thr) for thr in range(0, 5200, 100)]
        assert fractions == sorted(fractions)

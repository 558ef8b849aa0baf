import dataclasses
from decimal import Decimal

import pytest

from normsim.config import (
    BASELINE_SYNTH,
    ConfigError,
    ExperimentConfig,
    build_world,
    parse_config,
)
from normsim.harness import (
    SWEEP_CSV_COLUMNS,
    compute_eligible_cycles,
    energy_per_increment,
    run_csv,
    run_experiment,
    sweep,
    sweep_csv,
    sweep_values,
)
from normsim.trace import VoltageTrace


def test_continuous_power_counter1_near_cadence_value():
    cfg = ExperimentConfig(policy="cbp", cbp_period_us=398)
    report = run_experiment(cfg, VoltageTrace((3300,) * 100, 1))
    # cold recovery eats a handful of cycles off the ideal 10000/24 = 416
    restore = report.categories["restore"]
    assert report.counter1_val == (10_000 - restore) // 24
    assert abs(report.counter1_val - 416) <= 1


def test_trace_below_threshold_means_all_off():
    cfg = ExperimentConfig()
    report = run_experiment(cfg, VoltageTrace((1000,) * 100, 1))
    assert report.counter1_val == 0
    assert report.categories["off"] == 10_000
    assert report.backups_attempted == 0


def test_rerun_yields_identical_csv():
    cfg = ExperimentConfig(policy="tbp", tbp_task_count=7)
    a = run_csv(run_experiment(cfg))
    b = run_csv(run_experiment(cfg))
    assert a == b


def test_sweep_cardinalities_match_standard_ranges():
    cfg = ExperimentConfig()
    assert len(sweep_values(cfg, "dbp")) == 202
    assert len(sweep_values(cfg, "cbp")) == 199
    assert len(sweep_values(cfg, "tbp")) == 55
    assert sweep_values(cfg, "dbp")[0] == 3000
    assert sweep_values(cfg, "dbp")[-1] == 5010
    assert sweep_values(cfg, "cbp")[-1] == 398
    assert sweep_values(cfg, "tbp") == list(range(1, 56))


def test_sweep_rows_equal_standalone_runs():
    cfg = ExperimentConfig()
    report = sweep(cfg, policy="tbp", values=[3, 10, 41])
    for row in report.rows:
        standalone = run_experiment(cfg.with_policy_parameter(row.param)
                                    if cfg.policy == "tbp" else
                                    dataclasses.replace(cfg, policy="tbp",
                                                        tbp_task_count=row.param))
        assert row.report == standalone


def test_sweep_empty_range_rejected():
    with pytest.raises(ConfigError, match="empty"):
        sweep(ExperimentConfig(), policy="tbp", values=[])


def test_sweep_csv_shape_and_determinism():
    cfg = ExperimentConfig()
    report = sweep(cfg, policy="tbp", values=[1, 2, 3])
    text = sweep_csv(report)
    lines = text.strip().split("\n")
    assert lines[0] == ",".join(SWEEP_CSV_COLUMNS)
    assert len(lines) == 4  # header + one row per point
    assert text == sweep_csv(sweep(cfg, policy="tbp", values=[1, 2, 3]))


def test_energy_per_increment_reference_ratios():
    assert energy_per_increment(1981, 223) == Decimal("8.88")
    assert energy_per_increment(1768, 191) == Decimal("9.26")
    assert energy_per_increment(1626, 184) == Decimal("8.84")
    assert energy_per_increment(0, 5) == Decimal("0.00")
    assert energy_per_increment(100, 0) is None
    with pytest.raises(ValueError):
        energy_per_increment(-1, 2)


def test_compute_eligible_monotone_in_threshold():
    trace = VoltageTrace((2700, 2900, 3100, 3300, 2500), 3)
    counts = [compute_eligible_cycles(trace, thr, 2800, 15)
              for thr in range(2800, 3500, 100)]
    assert counts[0] == 9  # samples 2900/3100/3300, 3 cycles each
    assert counts == sorted(counts, reverse=True)


def test_config_validation_diagnostics():
    with pytest.raises(ConfigError, match="policy"):
        ExperimentConfig(policy="nope").validate()
    with pytest.raises(ConfigError, match="trace source"):
        ExperimentConfig(trace_file="x.csv", synth=BASELINE_SYNTH).validate()
    with pytest.raises(ConfigError, match="select_threshold"):
        ExperimentConfig(select_threshold=3).validate()
    with pytest.raises(ConfigError, match="nvr_depth"):
        ExperimentConfig(nvr_depth=4).validate()
    with pytest.raises(ConfigError, match="e3c_fj"):
        ExperimentConfig(e3c_fj={"bogus": 1}).validate()
    with pytest.raises(ConfigError, match="prescale"):
        ExperimentConfig(prescale="fast").validate()


def test_parse_config_happy_path():
    cfg = parse_config({
        "clock_hz": 100_000_000,
        "total_cycles": 5000,
        "policy": "cbp",
        "cbp_period_us": 10,
        "thresholds_mv": [2800],
        "prescale": "auto",
        "e3c_fj": {"counter1": 7},
        "counter_initial_values": [1, 2, 3],
    })
    assert cfg.total_cycles == 5000
    assert cfg.policy == "cbp"
    assert cfg.counter_initial_values == (1, 2, 3)
    assert cfg.e3c_fj == {"counter1": 7}


def test_parse_config_diagnostics_name_fields():
    with pytest.raises(ConfigError, match="unknown config key"):
        parse_config({"clck_hz": 1})
    with pytest.raises(ConfigError, match="total_cycles"):
        parse_config({"total_cycles": "many"})
    with pytest.raises(ConfigError, match="counter_initial_values"):
        parse_config({"counter_initial_values": [1, 2]})
    with pytest.raises(ConfigError, match="synth_on_mv"):
        parse_config({"synth_charge_rate": 10})
    with pytest.raises(ConfigError, match="e3c_fj"):
        parse_config({"e3c_fj": {"counter1": "big"}})


def test_custom_technology_config():
    cfg = parse_config({
        "nvr_technology": "custom",
        "nvr_access_delay_ns": 40,
        "custom_technology": {
            "read_ns": 40, "write_ns": 40, "read_ma": 2, "write_ma": 2,
            "standby_ua": 10, "sleep_ua": 1, "retention_years": 5,
            "endurance_cycles": 1000,
        },
        "e3c_fj": {"nvr": 123},
    })
    world = build_world(cfg, VoltageTrace((3300,) * 100, 1))
    assert world.nvr.n_busy == 4
    # without an explicit nvr energy rate the custom tech must be rejected
    bad = dataclasses.replace(cfg, e3c_fj={})
    with pytest.raises(ConfigError, match="nvr"):
        build_world(bad, VoltageTrace((3300,) * 100, 1))


def test_handshake_clean_across_access_delays():
    # whole worlds at the delay extremes: the backup FSM must stay
    # protocol-clean (no input-hold warnings) and keep committing
    for delay_ns in (0, 10, 80, 130):
        cfg = ExperimentConfig(policy="tbp", tbp_task_count=5,
                               nvr_access_delay_ns=delay_ns, total_cycles=3000)
        report = run_experiment(cfg, VoltageTrace((3300,) * 100, 1))
        assert report.nvr_hold_warnings == 0, f"delay {delay_ns}"
        assert report.backups_committed > 0
        assert sum(report.categories.values()) == 3000


def test_wakeup_hysteresis_through_config():
    # device dies below 2800 and must not restart before 3100
    samples = [3300] * 50 + [2700] * 50 + [2900] * 100 + [3150] * 100
    cfg = ExperimentConfig(policy="cbp", cbp_period_us=398, total_cycles=300,
                           wakeup_mv=3100)
    report = run_experiment(cfg, VoltageTrace(tuple(samples), 1))
    # 2900 mV stretch stays off; on again only for the 3150 stretch
    assert report.categories["off"] == 150
    plain = ExperimentConfig(policy="cbp", cbp_period_us=398, total_cycles=300)
    report2 = run_experiment(plain, VoltageTrace(tuple(samples), 1))
    assert report2.categories["off"] == 50


def test_auto_prescale_honors_trace_declared_period():
    cfg = ExperimentConfig(total_cycles=1000)
    world = build_world(cfg, VoltageTrace((3300,) * 10, 25))
    assert world.ie.config.prescale == 25
    # a plain trace (period 1) stretches over the run instead
    world = build_world(cfg, VoltageTrace((3300,) * 10, 1))
    assert world.ie.config.prescale == 100
    # an explicit prescale always wins
    world = build_world(dataclasses.replace(cfg, prescale=4),
                        VoltageTrace((3300,) * 10, 25))
    assert world.ie.config.prescale == 4


def test_initial_values_survive_to_cold_start():
    cfg = ExperimentConfig(policy="cbp", cbp_period_us=398,
                           counter_initial_values=(100, 200, 300))
    report = run_experiment(cfg, VoltageTrace((3300,) * 100, 1))
    assert report.counter_values[1] >= 200
    assert report.counter_values[2] >= 300
    assert report.counter_values[0] >= 100 + 400  # base plus real progress

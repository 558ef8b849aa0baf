"""Cycle-accurate simulator of an FPGA framework that emulates
intermittent (transiently-powered) systems with non-volatile registers:
trace-driven power-failure injection, the delayed non-volatile access
protocol, activity-counter energy approximation, and the three backup
policies with full parameter sweeps.
"""

from .config import BASELINE_SYNTH, ConfigError, ExperimentConfig, build_world, load_config
from .energy import EnergyLedger, IecResult, ea_step, iec_calc, sample_and_reset
from .harness import (
    SweepReport,
    SweepRow,
    compute_eligible_cycles,
    energy_per_increment,
    run_experiment,
    sweep,
    sweep_csv,
)
from .intermittency import (
    IeConfig,
    IeOutputs,
    IeState,
    IntermittencyEmulator,
    default_prescale,
    ie_step,
)
from .kernel import ENTITIES, ClockConfig, CycleCategory, ResetLines, SimReport, World
from .nvmem import (
    MemTechParams,
    NonVolatileRegister,
    NvrConfig,
    NvrInputs,
    NvrOutputs,
    NvrState,
    SimulationFault,
    TECH_CATALOG,
    access_energy,
    busy_cycles,
    catalog_csv,
    endurance_lifetime_years,
    nvr_step,
    tech_params,
)
from .trace import (
    TraceError,
    TraceSynthParams,
    VoltageTrace,
    downsample_mean,
    load_trace_csv,
    shutdown_fraction,
    synth_harvest_trace,
)
from .workload import (
    BackupPolicy,
    CounterWorkload,
    CountersState,
    Mode,
    backup,
    counters_step,
    peek_committed,
    recover,
)

__version__ = "0.1.0"

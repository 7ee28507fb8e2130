"""Optimal spectrum contracts between a base station and UAV operators.

The package splits into five layers:

* :mod:`~spectrum_contracts.stochastic`: Poisson tails, operator
  utility, base-station opportunity cost.
* :mod:`~spectrum_contracts.contract`: contract data model, feasibility
  screening, optimal pricing, evaluators.
* :mod:`~spectrum_contracts.solver`: channel-assignment search (layered
  DP plus an exhaustive oracle).
* :mod:`~spectrum_contracts.geometry`: air-to-ground channel model,
  SNR coverage partition, type derivation, height sweeps.
* :mod:`~spectrum_contracts.config` / :mod:`~spectrum_contracts.runner`
  / :mod:`~spectrum_contracts.cli`: scenario files, experiment
  orchestration, CSV emission.
"""

from ._version import __version__
from .config import (
    ConfigError,
    GeometryScenario,
    ScenarioConfig,
    SweepSpec,
    canonical_dump,
    config_hash,
    load_config,
    loads_config,
    parse_config,
    watts_to_dbm,
)
from .contract import (
    Contract,
    FeasibilityReport,
    Lemma2Report,
    MbsLoad,
    PriceSchedule,
    QualityAssignment,
    TypeLadder,
    gain,
    ladder_from_lambdas,
    lemma2_conditions,
    operator_surpluses,
    optimal_prices,
    revenue,
    social_welfare,
    total_weight,
    validate_feasibility,
)
from .geometry import (
    DensityMap,
    DerivedTypes,
    HeightRecord,
    Placement,
    RadioParams,
    RegionGrid,
    TerrainParams,
    derive_types,
    height_sweep,
    p_los,
    partition_regions,
    pathloss_mbs,
    pathloss_uav,
    snr,
)
from .runner import (
    OracleReport,
    ResultTable,
    RunReport,
    run_oracle_check,
    run_solve,
    run_sweep,
    sample_instance,
    strip_timestamp,
)
from .solver import (
    Objective,
    SolverResult,
    TieBreak,
    TracePoint,
    brute_force_solve,
    count_monotone_assignments,
    dp_inner,
    saturation_cap,
    solve,
)
from .stochastic import (
    mbs_cost,
    poisson_pmf,
    poisson_tail,
    saturation_channels,
    uav_utility,
)

__all__ = [
    "__version__",
    "ConfigError",
    "Contract",
    "DensityMap",
    "DerivedTypes",
    "FeasibilityReport",
    "GeometryScenario",
    "HeightRecord",
    "Lemma2Report",
    "MbsLoad",
    "Objective",
    "OracleReport",
    "Placement",
    "PriceSchedule",
    "QualityAssignment",
    "RadioParams",
    "RegionGrid",
    "ResultTable",
    "RunReport",
    "ScenarioConfig",
    "SolverResult",
    "SweepSpec",
    "TerrainParams",
    "TieBreak",
    "TracePoint",
    "TypeLadder",
    "brute_force_solve",
    "canonical_dump",
    "config_hash",
    "count_monotone_assignments",
    "derive_types",
    "dp_inner",
    "gain",
    "height_sweep",
    "ladder_from_lambdas",
    "lemma2_conditions",
    "load_config",
    "loads_config",
    "mbs_cost",
    "operator_surpluses",
    "optimal_prices",
    "p_los",
    "parse_config",
    "partition_regions",
    "pathloss_mbs",
    "pathloss_uav",
    "poisson_pmf",
    "poisson_tail",
    "revenue",
    "run_oracle_check",
    "run_solve",
    "run_sweep",
    "sample_instance",
    "saturation_cap",
    "saturation_channels",
    "snr",
    "social_welfare",
    "solve",
    "strip_timestamp",
    "total_weight",
    "uav_utility",
    "validate_feasibility",
    "watts_to_dbm",
]

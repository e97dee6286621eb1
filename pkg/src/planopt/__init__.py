"""Monte-Carlo project planning and mitigation-control optimization.

Per random realization of an uncertain project, the engine searches the
decision space (vessel fleets or binary mitigation allocations) for the
alternative with the highest aggregated stakeholder preference, then reports
percentile statistics and criticality indexes across all realizations.
"""

__version__ = "0.1.0"

from .engine import (
    CriticalityIndex,
    PercentileSummary,
    Scenario,
    SimulationRecord,
    criticality,
    percentiles,
    run,
)
from .network import (
    Activity,
    NetworkRealization,
    ProjectNetwork,
    RiskEvent,
    SharedUncertaintyFactor,
    ValidationReport,
    apply_measures,
    forward_pass,
    realize_durations,
    validate_network,
)
from .objectives import (
    ControlMeasure,
    ControlObjectiveParams,
    completion_deltas,
    control_cost,
    control_nuisance,
    offshore_objectives,
    sample_measure_impacts,
)
from .offshore import (
    FleetRealization,
    OffshoreParams,
    OperationRisk,
    VesselSpec,
    simulate_fleet,
)
from .optimizer import (
    DecisionSpace,
    GaConfig,
    OptimizationMode,
    OptimizationResult,
    check_constraints,
    optimize,
)
from .preference import (
    Criterion,
    PreferenceCurve,
    PreferenceModel,
    WeightScheme,
    aggregate,
    imap_fitness,
    normalize_scores,
)
from .sampling import (
    RngHandle,
    ThreePointEstimate,
    ValidationError,
    sample_beta_pert,
    sample_risk_occurrence,
)
from .scenario_io import load_scenario


def bundled_scenario(name: str):
    """Filesystem path of a bundled scenario file (``saa-highway`` or ``offshore-wind``)."""
    from importlib.resources import files

    mapping = {
        "saa-highway": "saa_highway.yaml",
        "offshore-wind": "offshore_wind.yaml",
    }
    if name not in mapping:
        raise ValidationError(f"unknown bundled scenario {name!r}; choose from {sorted(mapping)}")
    return files("planopt.data").joinpath(mapping[name])

"""Deterministic simulator of grid-scale processing campaigns.

Tasks split into jobs, jobs fail stage-wise (setup / compute / stage-out)
and are retried under a configurable checkpoint granularity; the ledger
feeds defect-rate / sigma-level reports, CPU and time overheads, and a
Weibull mixture fitter for per-task recovery costs.
"""

__version__ = "0.1.0"

from .core import (
    Attempt,
    CheckpointGranularity,
    DatasetSpec,
    FailureStage,
    Job,
    JobState,
    Outcome,
    OutcomeKind,
    RetryPolicy,
    Task,
    TaskState,
    apply_outcome,
    split_task,
    task_state,
)
from .engine import Scenario, SimResult, ideal_makespan, run
from .errors import (
    ConfigurationError,
    DegenerateRunError,
    DomainError,
    FitError,
    GridsimError,
    ScenarioFormatError,
)
from .failures import (
    AttemptDraft,
    FailureModel,
    RngStream,
    SiteProfile,
    effective_probs,
    overall_failure_prob,
    sample_attempt,
)
from .metrics import (
    DefectReport,
    OverheadReport,
    RecoverySamples,
    SigmaConvention,
    defect_report,
    overhead_report,
    rate_from_sigma,
    recovery_cost_samples,
    sigma_from_rate,
)
from .scenario_io import (
    load_bundled_scenario,
    load_scenario,
    parse_scenario,
    serialize_scenario,
)
from .weibull import (
    FitOptions,
    MixtureFit,
    MixtureModel,
    WeibullParams,
    fit_mixture,
    fit_mle,
    ks_statistic,
    log_likelihood,
)

__all__ = [
    "__version__",
    # core
    "Attempt", "CheckpointGranularity", "DatasetSpec", "FailureStage",
    "Job", "JobState", "Outcome", "OutcomeKind", "RetryPolicy",
    "Task", "TaskState", "apply_outcome", "split_task", "task_state",
    # engine
    "Scenario", "SimResult", "ideal_makespan", "run",
    # errors
    "ConfigurationError", "DegenerateRunError", "DomainError",
    "FitError", "GridsimError", "ScenarioFormatError",
    # failures
    "AttemptDraft", "FailureModel", "RngStream", "SiteProfile",
    "effective_probs", "overall_failure_prob", "sample_attempt",
    # metrics
    "DefectReport", "OverheadReport", "RecoverySamples", "SigmaConvention",
    "defect_report", "overhead_report", "rate_from_sigma",
    "recovery_cost_samples", "sigma_from_rate",
    # scenario io
    "load_bundled_scenario", "load_scenario", "parse_scenario",
    "serialize_scenario",
    # weibull
    "FitOptions", "MixtureFit", "MixtureModel", "WeibullParams",
    "fit_mixture", "fit_mle", "ks_statistic", "log_likelihood",
]

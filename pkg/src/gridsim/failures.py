"""Seeded stochastic generation of attempt outcomes and costs.

Attempts pass through three stages in order, Setup -> Compute -> StageOut,
each failing with its own probability (scaled per site, clamped to 1).
Every failure is permanent with probability permanent_fraction, otherwise
transient and tagged with the stage. Successful attempts draw a binomial
number of silently corrupted events; corruption never fails an attempt.

Sampling is driven by counter-based RNG streams keyed by (seed, job_id,
attempt_index), so a draft depends only on those keys and the model
inputs, never on scheduling order. That is what makes whole simulations
reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import kernels
from .core import FailureStage, Outcome
from .errors import ConfigurationError, DomainError

__all__ = [
    "FailureModel",
    "SiteProfile",
    "RngStream",
    "AttemptDraft",
    "sample_attempt",
    "overall_failure_prob",
    "effective_probs",
]

_STAGE_BY_CODE = {
    kernels.STAGE_SETUP: FailureStage.SETUP,
    kernels.STAGE_COMPUTE: FailureStage.COMPUTE,
    kernels.STAGE_STAGEOUT: FailureStage.STAGEOUT,
}


def _check_prob(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ConfigurationError(f"{name} must be in [0, 1] (got {value!r})")


@dataclass(frozen=True)
class FailureModel:
    """Per-attempt failure probabilities and cost shape.

    p_setup/p_compute/p_stageout are conditional on reaching the stage.
    permanent_fraction splits failures into permanent vs transient.
    corruption_per_event applies per event on successful attempts only.
    c_setup is the fraction of an attempt's nominal CPU burned by a
    setup-stage failure (the stage-cost profile is a modeling choice:
    setup fails cheap, compute fails partway, stage-out fails at full
    cost).
    """

    p_setup: float = 0.0
    p_compute: float = 0.0
    p_stageout: float = 0.0
    permanent_fraction: float = 0.0
    corruption_per_event: float = 0.0
    c_setup: float = 0.01

    def __post_init__(self):
        _check_prob("p_setup", self.p_setup)
        _check_prob("p_compute", self.p_compute)
        _check_prob("p_stageout", self.p_stageout)
        _check_prob("permanent_fraction", self.permanent_fraction)
        _check_prob("corruption_per_event", self.corruption_per_event)
        _check_prob("c_setup", self.c_setup)

    def zeroed(self) -> "FailureModel":
        """Copy with every failure and corruption probability at zero."""
        return FailureModel(c_setup=self.c_setup)


@dataclass(frozen=True)
class SiteProfile:
    """One computing site: capacity, relative speed, relative flakiness.

    speed_factor multiplies the rate work is done, so wall time is
    cpu / speed_factor. failure_multiplier scales every stage probability
    (clamped to 1), modeling heterogeneous site quality.
    """

    site_id: str
    slots: int
    speed_factor: float = 1.0
    failure_multiplier: float = 1.0

    def __post_init__(self):
        if not self.site_id:
            raise ConfigurationError("site_id must be non-empty")
        if not isinstance(self.slots, int) or isinstance(self.slots, bool):
            raise ConfigurationError(f"slots must be an integer (got {self.slots!r})")
        if self.slots < 1:
            raise ConfigurationError(f"slots must be >= 1 (got {self.slots})")
        if not self.speed_factor > 0:
            raise ConfigurationError(
                f"speed_factor must be > 0 (got {self.speed_factor!r})"
            )
        if self.failure_multiplier < 0:
            raise ConfigurationError(
                f"failure_multiplier must be >= 0 (got {self.failure_multiplier!r})"
            )


@dataclass(frozen=True)
class RngStream:
    """Key of one deterministic draw sequence: (seed, job_id, attempt_index)."""

    seed: int
    job_id: int
    attempt_index: int

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")
        if self.job_id < 0 or self.attempt_index < 0:
            raise ConfigurationError("job_id and attempt_index must be >= 0")


@dataclass(frozen=True)
class AttemptDraft:
    """What sampling decides about an attempt, before the engine places it
    on the timeline: outcome, CPU cost, wall duration, and the per-attempt
    event bookkeeping."""

    outcome: Outcome
    cpu_consumed: float
    wall_duration: float
    events_checkpointed: int
    events_corrupted: int


def effective_probs(model: FailureModel, site: SiteProfile) -> tuple:
    """Per-stage probabilities after the site multiplier, clamped to 1."""
    m = site.failure_multiplier
    return (
        min(1.0, model.p_setup * m),
        min(1.0, model.p_compute * m),
        min(1.0, model.p_stageout * m),
    )


def overall_failure_prob(model: FailureModel, site: SiteProfile) -> float:
    """Probability an attempt fails in any stage: 1 - prod(1 - p_eff)."""
    ps, pc, po = effective_probs(model, site)
    return 1.0 - (1.0 - ps) * (1.0 - pc) * (1.0 - po)


def _outcome_from_codes(code: int, stage_code: int) -> Outcome:
    if code == kernels.OUTCOME_SUCCESS:
        return Outcome.success()
    if code == kernels.OUTCOME_PERMANENT:
        return Outcome.permanent()
    return Outcome.transient(_STAGE_BY_CODE[stage_code])


def sample_attempt(model: FailureModel, site: SiteProfile,
                   events_to_process: int, cpu_per_event: float,
                   rng: RngStream) -> AttemptDraft:
    """Draw one attempt draft for `events_to_process` events at a site.

    Identical inputs give a bit-identical draft. cpu_consumed is quantized
    to the ledger grid (multiples of 2^-10 core-seconds); wall_duration is
    cpu_consumed / site.speed_factor.
    """
    if events_to_process < 1:
        raise DomainError("events_to_process must be >= 1")
    if not cpu_per_event > 0:
        raise DomainError("cpu_per_event must be > 0")
    ps, pc, po = effective_probs(model, site)
    code, stage_code, cpu, checkpointed, corrupted = kernels.sample_attempt_raw(
        rng.seed, rng.job_id, rng.attempt_index,
        events_to_process, cpu_per_event,
        ps, pc, po,
        model.permanent_fraction, model.corruption_per_event, model.c_setup,
    )
    return AttemptDraft(
        outcome=_outcome_from_codes(code, stage_code),
        cpu_consumed=cpu,
        wall_duration=cpu / site.speed_factor,
        events_checkpointed=checkpointed,
        events_corrupted=corrupted,
    )

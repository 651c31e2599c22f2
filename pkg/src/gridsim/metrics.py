"""Reliability metrics: defect rates, sigma levels, overheads, recovery costs.

Sigma levels use the one-sided Gaussian tail Q(z) = P(X > z), the local
p-value convention of particle physics (5 sigma ~ 3e-7). Six Sigma
literature often quotes the industrial convention instead, which adds a
fixed 1.5 sigma allowance for process drift: industrial 6 sigma is
mathematical 4.5 sigma, a 3.4e-6 defect rate. Both conventions are
exposed; the shift is exactly 1.5 everywhere.

Tail probabilities are computed through the complementary error
function, never through 1 - CDF, so rates near 1e-9 (the regime this
tool reports on) keep full relative precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .engine import SimResult
from .errors import DegenerateRunError, DomainError

__all__ = [
    "SigmaConvention",
    "DefectReport",
    "OverheadReport",
    "RecoverySamples",
    "sigma_from_rate",
    "rate_from_sigma",
    "defect_report",
    "overhead_report",
    "recovery_cost_samples",
]

_SQRT2 = math.sqrt(2.0)
INDUSTRIAL_SHIFT = 1.5


class SigmaConvention(Enum):
    """Mathematical: plain one-sided tail. Industrial: +1.5 drift shift."""

    MATHEMATICAL = "math"
    INDUSTRIAL = "industrial"


def _tail(z: float) -> float:
    """One-sided upper Gaussian tail Q(z), accurate far into the tail."""
    return 0.5 * math.erfc(z / _SQRT2)


def sigma_from_rate(rate: float, convention: SigmaConvention = SigmaConvention.MATHEMATICAL) -> float:
    """Sigma level whose one-sided tail probability equals `rate`.

    Solves Q(z) = rate by bisection on z in [-38, 38], then applies the
    convention shift. Strictly decreasing in rate; inverse of
    rate_from_sigma to better than 1e-6 relative.
    """
    if not 0.0 < rate < 1.0:
        raise DomainError(f"rate must be in (0, 1), got {rate!r}")
    lo, hi = -38.0, 38.0
    if rate <= _tail(hi):
        raise DomainError(f"rate {rate!r} is below the invertible tail range")
    z = None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        q = _tail(mid)
        if q == rate:
            z = mid
            break
        if q > rate:
            lo = mid
        else:
            hi = mid
    if z is None:
        z = 0.5 * (lo + hi)
    if convention is SigmaConvention.INDUSTRIAL:
        return z + INDUSTRIAL_SHIFT
    return z


def rate_from_sigma(sigma: float, convention: SigmaConvention = SigmaConvention.MATHEMATICAL) -> float:
    """One-sided tail probability of a sigma level under a convention.

    The industrial convention subtracts its 1.5 shift first. The
    effective mathematical sigma must be non-negative (0 maps to 0.5).
    """
    z = sigma - INDUSTRIAL_SHIFT if convention is SigmaConvention.INDUSTRIAL else sigma
    if z < 0.0:
        raise DomainError(
            f"effective mathematical sigma must be >= 0 (got {z!r})"
        )
    rate = _tail(z)
    if rate <= 0.0:
        raise DomainError(f"sigma {sigma!r} is beyond the representable tail")
    return rate


@dataclass(frozen=True)
class DefectReport:
    """Event-loss accounting of a run, with sigma levels of the rate.

    defect_rate counts lost, silently corrupted, and recovery-queued
    events; defect_rate_after_recovery drops the recovery queue, the
    state of affairs once the dedicated recovery pass has reprocessed
    those jobs. Zero defects give +inf sigmas.
    """

    events_total: int
    events_lost: int
    events_corrupted: int
    events_recovery_queue: int
    defect_rate: float
    defect_rate_after_recovery: float
    sigma_math: float
    sigma_industrial: float


def _sigma_or_limit(rate: float) -> float:
    if rate <= 0.0:
        return math.inf
    if rate >= 1.0:
        return -math.inf
    return sigma_from_rate(rate, SigmaConvention.MATHEMATICAL)


def defect_report(result: SimResult) -> DefectReport:
    """Defect rate and sigma levels of a completed run."""
    total = result.events_total
    if total < 1:
        raise DomainError("events_total must be >= 1")
    defects = result.events_lost + result.events_corrupted + result.events_recovery_queue
    rate = defects / total
    after = (result.events_lost + result.events_corrupted) / total
    sigma_math = _sigma_or_limit(rate)
    return DefectReport(
        events_total=total,
        events_lost=result.events_lost,
        events_corrupted=result.events_corrupted,
        events_recovery_queue=result.events_recovery_queue,
        defect_rate=rate,
        defect_rate_after_recovery=after,
        sigma_math=sigma_math,
        sigma_industrial=sigma_math + INDUSTRIAL_SHIFT,
    )


@dataclass(frozen=True)
class OverheadReport:
    """CPU and time overhead of a run against its failure-free baseline."""

    cpu_overhead: float
    time_overhead: float

    def __post_init__(self):
        if self.cpu_overhead < 0 or self.time_overhead < 0:
            raise DomainError("overheads cannot be negative")


def overhead_report(result: SimResult, ideal: float) -> OverheadReport:
    """cpu_wasted / cpu_successful and (makespan - ideal) / ideal."""
    if not result.cpu_successful > 0:
        raise DegenerateRunError(
            "run has no successful CPU; cpu_overhead is undefined"
        )
    if not ideal > 0:
        raise DegenerateRunError(f"ideal makespan must be > 0 (got {ideal!r})")
    return OverheadReport(
        cpu_overhead=result.cpu_wasted / result.cpu_successful,
        time_overhead=(result.makespan - ideal) / ideal,
    )


@dataclass(frozen=True)
class RecoverySamples:
    """Per-task recovery CPU, in core-hours, zero-cost tasks included.

    values_seconds is the exact ledger twin: it sums to cpu_wasted with
    no rounding. positive() is what a distribution fit should consume,
    since zero-cost tasks lie outside Weibull support.
    """

    values: tuple
    values_seconds: tuple

    def positive(self) -> list:
        return [v for v in self.values if v > 0.0]

    @property
    def zero_count(self) -> int:
        return sum(1 for v in self.values if v == 0.0)

    @property
    def zero_fraction(self) -> float:
        return self.zero_count / len(self.values) if self.values else 0.0


def recovery_cost_samples(result: SimResult) -> RecoverySamples:
    """One recovery-cost sample per task: CPU its failures burned."""
    return RecoverySamples(
        values=tuple(result.per_task_recovery_cpu),
        values_seconds=tuple(result.per_task_recovery_cpu_seconds),
    )

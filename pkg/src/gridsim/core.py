"""Domain types and state-machine logic for campaign processing units.

A campaign processes a dataset of independent events. The dataset is split
into a task; the task is split into jobs; each execution of a job is an
attempt. Attempts either succeed or fail in one of three stages, and failed
jobs are retried under a retry policy. Checkpoint granularity controls how
much finished work survives a failed attempt.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import ConfigurationError

__all__ = [
    "DatasetSpec",
    "CheckpointGranularity",
    "FailureStage",
    "Outcome",
    "OutcomeKind",
    "Attempt",
    "Job",
    "JobState",
    "Task",
    "TaskState",
    "RetryPolicy",
    "split_task",
    "apply_outcome",
    "task_state",
]


class CheckpointGranularity(Enum):
    """Unit of work lost when an attempt fails.

    TASK_LEVEL:  any permanent job loss forfeits the whole task's output.
    JOB_LEVEL:   a failed attempt restarts its job from scratch.
    EVENT_LEVEL: events finished before a compute-stage failure are kept.
    """

    TASK_LEVEL = "task"
    JOB_LEVEL = "job"
    EVENT_LEVEL = "event"


class FailureStage(Enum):
    """Where in an attempt's lifecycle the failure occurred."""

    SETUP = "setup"
    COMPUTE = "compute"
    STAGEOUT = "stageout"


class OutcomeKind(Enum):
    SUCCESS = "success"
    TRANSIENT = "transient"
    PERMANENT = "permanent"


@dataclass(frozen=True)
class Outcome:
    """Result of one attempt. Only transient failures carry a stage."""

    kind: OutcomeKind
    stage: FailureStage | None = None

    def __post_init__(self):
        if self.kind is OutcomeKind.TRANSIENT and self.stage is None:
            raise ConfigurationError("transient failure requires a stage")
        if self.kind is not OutcomeKind.TRANSIENT and self.stage is not None:
            raise ConfigurationError(f"{self.kind.value} outcome carries no stage")

    @staticmethod
    def success() -> "Outcome":
        return _SUCCESS

    @staticmethod
    def transient(stage: FailureStage) -> "Outcome":
        return _TRANSIENT[stage]

    @staticmethod
    def permanent() -> "Outcome":
        return _PERMANENT

    @property
    def is_failure(self) -> bool:
        return self.kind is not OutcomeKind.SUCCESS


_SUCCESS = Outcome(OutcomeKind.SUCCESS)
_PERMANENT = Outcome(OutcomeKind.PERMANENT)
_TRANSIENT = {s: Outcome(OutcomeKind.TRANSIENT, s) for s in FailureStage}


@dataclass(frozen=True)
class DatasetSpec:
    """Size and cost of the dataset a task processes.

    total_events: number of independent events in the dataset.
    events_per_job: split size; the last job absorbs the remainder.
    nominal_cpu_per_event: core-seconds one event costs at speed 1.0.
    """

    total_events: int
    events_per_job: int
    nominal_cpu_per_event: float

    def __post_init__(self):
        if self.total_events < 1:
            raise ConfigurationError("total_events must be >= 1")
        if self.events_per_job < 1:
            raise ConfigurationError("events_per_job must be >= 1")
        if not self.nominal_cpu_per_event > 0:
            raise ConfigurationError("nominal_cpu_per_event must be > 0")

    @property
    def n_jobs(self) -> int:
        return -(-self.total_events // self.events_per_job)


@dataclass(frozen=True)
class RetryPolicy:
    """How transient failures are retried.

    max_retries: re-tries allowed after the first attempt (so a job makes
        at most max_retries + 1 attempts).
    requeue_delay: simulated seconds a failed job waits before it is
        eligible for dispatch again.
    dedicated_recovery: exhausted/permanently-failed jobs go to a recovery
        queue for a later dedicated pass instead of being lost outright.
    """

    max_retries: int = 3
    requeue_delay: float = 0.0
    dedicated_recovery: bool = False

    def __post_init__(self):
        if not 0 <= self.max_retries <= 100:
            raise ConfigurationError("max_retries must be in [0, 100]")
        if self.requeue_delay < 0:
            raise ConfigurationError("requeue_delay must be >= 0")


@dataclass(slots=True)
class Attempt:
    """One execution of a job on a site.

    events_corrupted can be nonzero only on success: silent corruption is
    by definition undetected, so it never fails the attempt.
    events_checkpointed is the number of events this attempt finished and
    checkpointed before failing (compute-stage failures only).
    """

    attempt_index: int
    site_id: str
    outcome: Outcome
    cpu_consumed: float
    wall_start: float
    wall_end: float
    events_corrupted: int = 0
    events_checkpointed: int = 0

    def validate(self) -> None:
        if self.wall_end < self.wall_start:
            raise ConfigurationError("wall_end must be >= wall_start")
        if self.cpu_consumed < 0:
            raise ConfigurationError("cpu_consumed must be >= 0")
        if self.events_corrupted > 0 and self.outcome.is_failure:
            raise ConfigurationError("corruption is only observable on success")


class JobState(Enum):
    PENDING = "pending"
    RUNNING = "running"
    SUCCEEDED = "succeeded"
    FAILED_TRANSIENT = "failed_transient"
    LOST_PERMANENT = "lost_permanent"
    RECOVERY_QUEUE = "recovery_queue"


# States from which no further attempt may be applied.
TERMINAL_STATES = frozenset(
    {JobState.SUCCEEDED, JobState.LOST_PERMANENT, JobState.RECOVERY_QUEUE}
)


@dataclass(slots=True)
class Job:
    """Unit of scheduling and checkpointing; owns its retry history."""

    job_id: int
    task_id: int
    n_events: int
    events_done: int = 0
    state: JobState = JobState.PENDING
    attempts: list = field(default_factory=list)

    @property
    def is_terminal(self) -> bool:
        return self.state in TERMINAL_STATES


class TaskState(Enum):
    OPEN = "open"
    COMPLETE = "complete"
    COMPLETE_WITH_LOSS = "complete_with_loss"


@dataclass(slots=True)
class Task:
    """Unit of campaign processing; owns an ordered list of jobs."""

    task_id: int
    jobs: list
    granularity: CheckpointGranularity
    state: TaskState = TaskState.OPEN


def split_task(
    spec: DatasetSpec,
    granularity: CheckpointGranularity,
    task_id: int = 0,
    job_id_base: int = 0,
) -> Task:
    """Split a dataset into ceil(total/events_per_job) pending jobs.

    All jobs except possibly the last hold exactly events_per_job events;
    the last absorbs the remainder. Job ids are consecutive starting at
    job_id_base (lets multi-task campaigns keep globally unique ids).
    """
    n_jobs = spec.n_jobs
    last = spec.total_events - (n_jobs - 1) * spec.events_per_job
    jobs = [
        Job(job_id=job_id_base + i, task_id=task_id,
            n_events=spec.events_per_job if i < n_jobs - 1 else last)
        for i in range(n_jobs)
    ]
    return Task(task_id=task_id, jobs=jobs, granularity=granularity)


def apply_outcome(
    job: Job,
    attempt: Attempt,
    policy: RetryPolicy,
    granularity: CheckpointGranularity,
) -> Job:
    """Append an attempt to a running job and advance its state machine.

    Success completes the job. A transient failure keeps the job
    re-queueable while retries remain, otherwise it ends in the recovery
    queue (if the policy has a dedicated recovery step) or is lost. A
    permanent failure ends the job immediately. Under EVENT_LEVEL
    granularity a compute-stage transient failure banks the attempt's
    checkpointed events into events_done and other stages leave the bank
    alone; under JOB_LEVEL/TASK_LEVEL any failure resets events_done to
    zero.

    Mutates and returns `job`. Raises if the job is not running or the
    attempt index does not continue the attempt list (engine bug).
    """
    if job.state is not JobState.RUNNING:
        raise RuntimeError(
            f"job {job.job_id}: cannot apply outcome in state {job.state.value}"
        )
    if attempt.attempt_index != len(job.attempts):
        raise RuntimeError(
            f"job {job.job_id}: attempt_index {attempt.attempt_index} "
            f"does not follow {len(job.attempts)} recorded attempts"
        )
    if attempt.attempt_index > policy.max_retries:
        raise RuntimeError(
            f"job {job.job_id}: attempt {attempt.attempt_index} exceeds "
            f"max_retries={policy.max_retries}"
        )
    job.attempts.append(attempt)

    kind = attempt.outcome.kind
    if kind is OutcomeKind.SUCCESS:
        job.state = JobState.SUCCEEDED
        job.events_done = job.n_events
        return job

    if kind is OutcomeKind.TRANSIENT and len(job.attempts) <= policy.max_retries:
        job.state = JobState.FAILED_TRANSIENT
        if granularity is CheckpointGranularity.EVENT_LEVEL:
            # Checkpoints live on storage: a compute failure banks this
            # attempt's checkpointed slice on top of earlier banks, and a
            # setup/stage-out failure leaves the bank untouched.
            if attempt.outcome.stage is FailureStage.COMPUTE:
                job.events_done += attempt.events_checkpointed
                if job.events_done >= job.n_events:
                    raise RuntimeError(
                        f"job {job.job_id}: checkpointed past its event count"
                    )
        else:
            job.events_done = 0
        return job

    # Permanent failure, or transient with retries exhausted.
    job.state = (JobState.RECOVERY_QUEUE if policy.dedicated_recovery
                 else JobState.LOST_PERMANENT)
    job.events_done = 0
    return job


def task_state(task: Task) -> TaskState:
    """OPEN if any job can still run; COMPLETE iff every job succeeded."""
    all_succeeded = True
    for job in task.jobs:
        if not job.is_terminal:
            return TaskState.OPEN
        if job.state is not JobState.SUCCEEDED:
            all_succeeded = False
    return TaskState.COMPLETE if all_succeeded else TaskState.COMPLETE_WITH_LOSS

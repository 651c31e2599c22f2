"""Discrete-event simulation of a campaign: dispatch, retries, ledgers.

The loop keeps two priority queues: pending jobs keyed by
(eligible_time, job_id) and in-flight attempts keyed by
(finish_time, site_index, job_id), with sites held in site_id order.
At every instant, finished attempts are drained first, then free slots
are filled from the eligible pending queue. All keys are totally
ordered, so a scenario (seed included) maps to exactly one timeline.

CPU accounting uses the quantized ledger from the kernels module: every
attempt cost is a multiple of 2^-10 core-seconds, so the conservation
identities (successful + wasted = attempt-log sum, per-task waste sums
to the total) hold as exact float equalities, not approximations.

Checkpoint credit: under event-level granularity, the work bound into a
compute-failure checkpoint is not wasted; the next attempt resumes
after it. Its CPU is credited to the successful ledger when the failure
happens and clawed back to wasted if the job is ultimately lost. Under
task-level granularity the reverse move happens at the end: a task with
any permanently lost job forfeits its whole output, so the CPU its
succeeded jobs consumed is reclassified as wasted.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from heapq import heappop, heappush

from . import kernels
from .core import (
    Attempt,
    CheckpointGranularity,
    DatasetSpec,
    FailureStage,
    JobState,
    Outcome,
    RetryPolicy,
    Task,
    apply_outcome,
    split_task,
    task_state,
)
from .errors import ConfigurationError, GridsimError
from .failures import FailureModel, SiteProfile, effective_probs

__all__ = ["Scenario", "SimResult", "run", "ideal_makespan"]


@dataclass(frozen=True)
class Scenario:
    """Everything a run needs: dataset, sites, failure model, retry policy,
    checkpoint granularity, seed. n_tasks > 1 simulates that many
    independent copies of the dataset sharing the same sites, which is how
    a distribution of per-task recovery costs is produced."""

    dataset: DatasetSpec
    sites: tuple
    failure_model: FailureModel
    retry_policy: RetryPolicy
    granularity: CheckpointGranularity
    seed: int
    n_tasks: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(self.sites))
        if not self.sites:
            raise ConfigurationError("scenario needs at least one site")
        ids = [s.site_id for s in self.sites]
        if len(set(ids)) != len(ids):
            raise ConfigurationError(f"duplicate site_id in {ids}")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")
        if self.n_tasks < 1:
            raise ConfigurationError("n_tasks must be >= 1")


@dataclass
class SimResult:
    """Complete accounting of one run.

    The CPU ledgers satisfy, exactly:
      cpu_successful + cpu_wasted == sum of attempt cpu_consumed
      sum(per_task_recovery_cpu_seconds) == cpu_wasted
    and the event ledger satisfies
      events_succeeded + events_lost + events_recovery_queue == events_total.
    per_task_recovery_cpu is the core-hour view of the per-task waste
    (the exact core-second twin is kept alongside, since dividing by 3600
    is not exact in binary). attempt_log holds (job_id, Attempt) pairs in
    completion order.
    """

    tasks: list
    makespan: float
    cpu_successful: float
    cpu_wasted: float
    events_total: int
    events_succeeded: int
    events_lost: int
    events_corrupted: int
    events_recovery_queue: int
    per_task_recovery_cpu: list = field(default_factory=list)
    per_task_recovery_cpu_seconds: list = field(default_factory=list)
    attempt_log: list = field(default_factory=list)

    @property
    def task(self) -> Task:
        """The single task of a one-task run."""
        if len(self.tasks) != 1:
            raise GridsimError(f"run has {len(self.tasks)} tasks, not one")
        return self.tasks[0]

    def check(self) -> "SimResult":
        """Verify the conservation identities; raises on any violation."""
        cpu_total = 0.0
        for _job_id, attempt in self.attempt_log:
            cpu_total += attempt.cpu_consumed
        if self.cpu_successful + self.cpu_wasted != cpu_total:
            raise GridsimError(
                "CPU ledger broken: successful + wasted = "
                f"{self.cpu_successful + self.cpu_wasted!r}, attempt log sums "
                f"to {cpu_total!r}"
            )
        waste_sum = 0.0
        for w in self.per_task_recovery_cpu_seconds:
            waste_sum += w
        if waste_sum != self.cpu_wasted:
            raise GridsimError(
                f"per-task waste {waste_sum!r} != cpu_wasted {self.cpu_wasted!r}"
            )
        accounted = self.events_succeeded + self.events_lost + self.events_recovery_queue
        if accounted != self.events_total:
            raise GridsimError(
                f"event ledger broken: {accounted} accounted of {self.events_total}"
            )
        return self


_OUTCOME_TABLE = {
    (kernels.OUTCOME_SUCCESS, kernels.STAGE_NONE): Outcome.success(),
    (kernels.OUTCOME_TRANSIENT, kernels.STAGE_SETUP): Outcome.transient(FailureStage.SETUP),
    (kernels.OUTCOME_TRANSIENT, kernels.STAGE_COMPUTE): Outcome.transient(FailureStage.COMPUTE),
    (kernels.OUTCOME_TRANSIENT, kernels.STAGE_STAGEOUT): Outcome.transient(FailureStage.STAGEOUT),
    (kernels.OUTCOME_PERMANENT, kernels.STAGE_SETUP): Outcome.permanent(),
    (kernels.OUTCOME_PERMANENT, kernels.STAGE_COMPUTE): Outcome.permanent(),
    (kernels.OUTCOME_PERMANENT, kernels.STAGE_STAGEOUT): Outcome.permanent(),
}


def run(scenario: Scenario) -> SimResult:
    """Simulate the scenario until every job is terminal.

    Deterministic by construction: pending jobs dispatch in
    (eligible_time, job_id) order onto the first free site in site_id
    order, and finishes are processed in (time, site, job_id) order.
    """
    sc = scenario
    dataset = sc.dataset
    policy = sc.retry_policy
    gran = sc.granularity
    model = sc.failure_model
    seed = sc.seed

    sites = sorted(sc.sites, key=lambda s: s.site_id)
    site_ids = [s.site_id for s in sites]
    speed = [s.speed_factor for s in sites]
    probs = [effective_probs(model, s) for s in sites]
    n_sites = len(sites)
    free = [s.slots for s in sites]
    free_total = sum(free)

    jobs_per_task = dataset.n_jobs
    tasks = [
        split_task(dataset, gran, task_id=t, job_id_base=t * jobs_per_task)
        for t in range(sc.n_tasks)
    ]
    jobs = [job for task in tasks for job in task.jobs]
    n_tasks = sc.n_tasks

    # Per-task ledgers; global totals are formed at the end.
    successful = [0.0] * n_tasks
    wasted = [0.0] * n_tasks
    succeeded_events = [0] * n_tasks
    lost_events = [0] * n_tasks
    rq_events = [0] * n_tasks
    corrupted_events = [0] * n_tasks
    credits = [0.0] * len(jobs)  # event-level checkpoint credit per job

    pending = [(0.0, job.job_id) for job in jobs]  # already heap-ordered
    running = []  # (finish_time, site_index, job_id, Attempt)
    attempt_log = []
    now = 0.0
    makespan = 0.0

    cpe = dataset.nominal_cpu_per_event
    pf = model.permanent_fraction
    corr = model.corruption_per_event
    c_setup = model.c_setup
    requeue_delay = policy.requeue_delay
    event_level = gran is CheckpointGranularity.EVENT_LEVEL
    sample_raw = kernels.sample_attempt_raw
    quantize = kernels.quantize
    outcome_table = _OUTCOME_TABLE
    compute_stage = FailureStage.COMPUTE
    running_state = JobState.RUNNING

    while True:
        # Fill free slots with eligible jobs, cheapest key first.
        while pending and free_total > 0 and pending[0][0] <= now:
            _eligible, jid = heappop(pending)
            job = jobs[jid]
            i = 0
            while free[i] == 0:
                i += 1
            free[i] -= 1
            free_total -= 1
            job.state = running_state
            remaining = job.n_events - job.events_done
            a_idx = len(job.attempts)
            ps, pc, po = probs[i]
            code, scode, cpu, ckpt, ncorr = sample_raw(
                seed, jid, a_idx, remaining, cpe, ps, pc, po, pf, corr, c_setup
            )
            t_end = now + cpu / speed[i]
            attempt = Attempt(a_idx, site_ids[i], outcome_table[code, scode],
                              cpu, now, t_end, ncorr, ckpt)
            heappush(running, (t_end, i, jid, attempt))

        if running:
            if pending and free_total > 0 and pending[0][0] < running[0][0]:
                now = pending[0][0]
                continue
            t = running[0][0]
            now = t
            while running and running[0][0] == t:
                _t, i, jid, attempt = heappop(running)
                free[i] += 1
                free_total += 1
                job = jobs[jid]
                apply_outcome(job, attempt, policy, gran)
                attempt_log.append((jid, attempt))
                tid = job.task_id
                cpu = attempt.cpu_consumed
                state = job.state
                if state is JobState.SUCCEEDED:
                    successful[tid] += cpu
                    succeeded_events[tid] += job.n_events
                    corrupted_events[tid] += attempt.events_corrupted
                elif state is JobState.FAILED_TRANSIENT:
                    if (event_level and attempt.events_checkpointed > 0
                            and attempt.outcome.stage is compute_stage):
                        credit = quantize(attempt.events_checkpointed * cpe)
                        if credit > cpu:
                            credit = cpu
                        credits[jid] += credit
                        successful[tid] += credit
                        wasted[tid] += cpu - credit
                    else:
                        wasted[tid] += cpu
                    heappush(pending, (t + requeue_delay, jid))
                else:  # LOST_PERMANENT or RECOVERY_QUEUE
                    wasted[tid] += cpu
                    claw = credits[jid]
                    if claw:
                        successful[tid] -= claw
                        wasted[tid] += claw
                        credits[jid] = 0.0
                    if state is JobState.LOST_PERMANENT:
                        lost_events[tid] += job.n_events
                    else:
                        rq_events[tid] += job.n_events
            makespan = t
            continue

        if pending:
            # Nothing in flight, so every slot is free; jump to the next
            # eligibility instant (requeue backoff gaps land here).
            now = pending[0][0]
            continue
        break

    if gran is CheckpointGranularity.TASK_LEVEL:
        # A permanently lost job forfeits its whole task's output.
        for task in tasks:
            tid = task.task_id
            if any(j.state is JobState.LOST_PERMANENT for j in task.jobs):
                lost_events[tid] += succeeded_events[tid] + rq_events[tid]
                succeeded_events[tid] = 0
                rq_events[tid] = 0
                corrupted_events[tid] = 0  # corrupted subset of lost; not double-counted
                wasted[tid] += successful[tid]
                successful[tid] = 0.0

    for task in tasks:
        task.state = task_state(task)

    cpu_successful = 0.0
    cpu_wasted = 0.0
    for v in successful:
        cpu_successful += v
    for v in wasted:
        cpu_wasted += v

    return SimResult(
        tasks=tasks,
        makespan=makespan,
        cpu_successful=cpu_successful,
        cpu_wasted=cpu_wasted,
        events_total=dataset.total_events * n_tasks,
        events_succeeded=sum(succeeded_events),
        events_lost=sum(lost_events),
        events_corrupted=sum(corrupted_events),
        events_recovery_queue=sum(rq_events),
        per_task_recovery_cpu=[w / 3600.0 for w in wasted],
        per_task_recovery_cpu_seconds=wasted,
        attempt_log=attempt_log,
    )


def ideal_makespan(scenario: Scenario) -> float:
    """Makespan of the same scenario with all failure probabilities zeroed.

    Baseline for the time-overhead metric. The zeroed run follows the
    same dispatch rules, so it equals run() on the failure-free scenario.
    """
    ideal = replace(scenario, failure_model=scenario.failure_model.zeroed())
    return run(ideal).makespan

"""Failure model and attempt sampling tests."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridsim.core import FailureStage, OutcomeKind
from gridsim.errors import ConfigurationError, DomainError
from gridsim.failures import (
    AttemptDraft,
    FailureModel,
    RngStream,
    SiteProfile,
    effective_probs,
    overall_failure_prob,
    sample_attempt,
)
from gridsim.kernels import quantize

SITE = SiteProfile(site_id="s1", slots=10)


def draft(model, events=100, cpe=1.0, site=SITE, seed=1, job=0, att=0):
    return sample_attempt(model, site, events, cpe,
                          RngStream(seed=seed, job_id=job, attempt_index=att))


# --- probability plumbing ----------------------------------------------

def test_effective_probs_scale_and_clamp():
    model = FailureModel(p_setup=0.2, p_compute=0.4, p_stageout=0.9)
    site = SiteProfile(site_id="x", slots=1, failure_multiplier=3.0)
    assert effective_probs(model, site) == pytest.approx((0.6, 1.0, 1.0))
    assert effective_probs(model, site)[1:] == (1.0, 1.0)
    calm = SiteProfile(site_id="y", slots=1, failure_multiplier=0.0)
    assert effective_probs(model, calm) == (0.0, 0.0, 0.0)


def test_overall_failure_prob_examples():
    assert overall_failure_prob(FailureModel(), SITE) == 0.0
    sure = FailureModel(p_setup=1.0)
    assert overall_failure_prob(sure, SITE) == 1.0
    m = FailureModel(p_setup=0.02, p_compute=0.02, p_stageout=0.02)
    assert overall_failure_prob(m, SITE) == pytest.approx(1 - 0.98**3)


def test_model_rejects_out_of_range():
    for field in ("p_setup", "p_compute", "p_stageout",
                  "permanent_fraction", "corruption_per_event", "c_setup"):
        with pytest.raises(ConfigurationError):
            FailureModel(**{field: -0.1})
        with pytest.raises(ConfigurationError):
            FailureModel(**{field: 1.5})


def test_zeroed_keeps_cost_shape():
    model = FailureModel(p_setup=0.5, corruption_per_event=0.1, c_setup=0.25)
    z = model.zeroed()
    assert z.c_setup == 0.25
    assert overall_failure_prob(z, SITE) == 0.0
    assert z.corruption_per_event == 0.0


def test_site_profile_guards():
    with pytest.raises(ConfigurationError):
        SiteProfile(site_id="", slots=1)
    with pytest.raises(ConfigurationError):
        SiteProfile(site_id="a", slots=0)
    with pytest.raises(ConfigurationError):
        SiteProfile(site_id="a", slots=True)
    with pytest.raises(ConfigurationError):
        SiteProfile(site_id="a", slots=1, speed_factor=0.0)
    with pytest.raises(ConfigurationError):
        SiteProfile(site_id="a", slots=1, failure_multiplier=-1.0)


def test_rng_stream_guards():
    RngStream(seed=2**64 - 1, job_id=0, attempt_index=0)
    with pytest.raises(ConfigurationError):
        RngStream(seed=2**64, job_id=0, attempt_index=0)
    with pytest.raises(ConfigurationError):
        RngStream(seed=-1, job_id=0, attempt_index=0)
    with pytest.raises(ConfigurationError):
        RngStream(seed=0, job_id=-1, attempt_index=0)


def test_sample_attempt_argument_guards():
    with pytest.raises(DomainError):
        draft(FailureModel(), events=0)
    with pytest.raises(DomainError):
        sample_attempt(FailureModel(), SITE, 10, 0.0,
                       RngStream(seed=0, job_id=0, attempt_index=0))


# --- deterministic cost examples ----------------------------------------

def test_failure_free_attempt_costs_nominal():
    d = draft(FailureModel(), events=100, cpe=20.0)
    assert d.outcome.kind is OutcomeKind.SUCCESS
    assert d.cpu_consumed == 2000.0
    assert d.wall_duration == 2000.0
    assert d.events_checkpointed == 0
    assert d.events_corrupted == 0


def test_wall_time_scales_with_speed():
    fast = SiteProfile(site_id="f", slots=1, speed_factor=2.5)
    d = draft(FailureModel(), events=100, cpe=20.0, site=fast)
    assert d.cpu_consumed == 2000.0
    assert d.wall_duration == 800.0


def test_setup_failure_costs_setup_fraction():
    d = draft(FailureModel(p_setup=1.0, c_setup=0.25), events=100, cpe=20.0)
    assert d.outcome.kind is OutcomeKind.TRANSIENT
    assert d.outcome.stage is FailureStage.SETUP
    assert d.cpu_consumed == 500.0
    assert d.events_checkpointed == 0


def test_stageout_failure_costs_full_nominal():
    d = draft(FailureModel(p_stageout=1.0), events=100, cpe=20.0)
    assert d.outcome.stage is FailureStage.STAGEOUT
    assert d.cpu_consumed == 2000.0
    assert d.events_checkpointed == 0


def test_compute_failure_costs_partial():
    d = draft(FailureModel(p_compute=1.0), events=1000, cpe=2.0)
    assert d.outcome.stage is FailureStage.COMPUTE
    nominal = 2000.0
    assert 0.0 <= d.cpu_consumed < nominal
    assert 0 <= d.events_checkpointed < 1000
    # checkpointed slice never exceeds the CPU actually burned
    assert quantize(d.events_checkpointed * 2.0) <= d.cpu_consumed


def test_permanent_failure_tagged():
    d = draft(FailureModel(p_setup=1.0, permanent_fraction=1.0))
    assert d.outcome.kind is OutcomeKind.PERMANENT
    assert d.outcome.stage is None


def test_corruption_disabled_by_default():
    for job in range(200):
        d = draft(FailureModel(), job=job)
        assert d.events_corrupted == 0


def test_corruption_only_on_success():
    model = FailureModel(p_compute=0.5, corruption_per_event=1.0)
    for job in range(100):
        d = draft(model, events=10, job=job)
        if d.outcome.is_failure:
            assert d.events_corrupted == 0
        else:
            assert d.events_corrupted == 10


def test_determinism_and_stream_sensitivity():
    model = FailureModel(p_setup=0.1, p_compute=0.3, p_stageout=0.1,
                         corruption_per_event=0.01)
    a = draft(model, seed=42, job=7, att=2)
    b = draft(model, seed=42, job=7, att=2)
    assert a == b
    assert isinstance(a, AttemptDraft)
    variants = {draft(model, seed=43, job=7, att=2),
                draft(model, seed=42, job=8, att=2),
                draft(model, seed=42, job=7, att=3)}
    assert any(v != a for v in variants)


@settings(max_examples=300, deadline=None)
@given(ps=st.floats(0, 1), pc=st.floats(0, 1), po=st.floats(0, 1),
       pf=st.floats(0, 1), corr=st.floats(0, 0.01),
       events=st.integers(1, 5000), cpe=st.floats(0.01, 100),
       seed=st.integers(0, 2**64 - 1))
def test_cpu_bound_property(ps, pc, po, pf, corr, events, cpe, seed):
    model = FailureModel(p_setup=ps, p_compute=pc, p_stageout=po,
                         permanent_fraction=pf, corruption_per_event=corr,
                         c_setup=0.01)
    d = draft(model, events=events, cpe=cpe, seed=seed)
    assert 0.0 <= d.cpu_consumed <= events * cpe * 1.01 + 2**-10
    assert d.cpu_consumed == quantize(d.cpu_consumed)
    assert 0 <= d.events_checkpointed <= events
    assert 0 <= d.events_corrupted <= events
    # only compute-stage failures checkpoint; permanent ones keep the count
    # even though their outcome drops the stage tag
    if d.events_checkpointed > 0:
        assert (d.outcome.stage is FailureStage.COMPUTE
                or d.outcome.kind is OutcomeKind.PERMANENT)


# --- statistical agreement with the model -------------------------------

def test_stage_frequencies_match_model():
    # stage probabilities are conditional on reaching the stage
    p = 0.1
    model = FailureModel(p_setup=p, p_compute=p, p_stageout=p)
    n = 20000
    counts = {FailureStage.SETUP: 0, FailureStage.COMPUTE: 0,
              FailureStage.STAGEOUT: 0, None: 0}
    for job in range(n):
        d = draft(model, events=10, job=job, seed=99)
        counts[d.outcome.stage if d.outcome.is_failure else None] += 1
    expected = {FailureStage.SETUP: p,
                FailureStage.COMPUTE: (1 - p) * p,
                FailureStage.STAGEOUT: (1 - p) * (1 - p) * p}
    for stage, pe in expected.items():
        se = math.sqrt(pe * (1 - pe) / n)
        assert abs(counts[stage] / n - pe) < 3 * se, stage


def test_permanent_fraction_split():
    model = FailureModel(p_setup=1.0, permanent_fraction=0.3)
    n = 20000
    perm = sum(draft(model, job=j).outcome.kind is OutcomeKind.PERMANENT
               for j in range(n))
    se = math.sqrt(0.3 * 0.7 / n)
    assert abs(perm / n - 0.3) < 3 * se


def test_failure_multiplier_shifts_rate():
    model = FailureModel(p_stageout=0.05)
    flaky = SiteProfile(site_id="flaky", slots=1, failure_multiplier=4.0)
    n = 10000
    fails = sum(draft(model, site=flaky, job=j).outcome.is_failure
                for j in range(n))
    se = math.sqrt(0.2 * 0.8 / n)
    assert abs(fails / n - 0.2) < 3 * se


def test_compute_failure_fraction_uniform_mean():
    # partial cost of a compute failure is uniform on (0, 1) of nominal
    model = FailureModel(p_compute=1.0)
    n = 20000
    total = 0.0
    for job in range(n):
        d = draft(model, events=1000, cpe=1.0, job=job)
        total += d.cpu_consumed / 1000.0
    se = 1.0 / math.sqrt(12 * n)
    assert abs(total / n - 0.5) < 3 * se

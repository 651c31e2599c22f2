"""Scenario files: parsing, validation, serialization, bundled lookups.

A scenario is a TOML document with four fixed tables plus repeated site
tables. Every key is validated with a full "section.key" name in error
messages, unknown keys are rejected, and omitted optional keys take the
documented defaults:

    [dataset]            required
      total_events         (required, >= 1)
      events_per_job       (required, >= 1)
      nominal_cpu_per_event(required, > 0, core-seconds)
    [[site]]             one or more
      site_id              (required, unique)
      slots                (required, >= 1)
      speed_factor         (1.0)
      failure_multiplier   (1.0)
    [failure]
      p_setup, p_compute, p_stageout      (0.0, each in [0, 1])
      permanent_fraction                  (0.0)
      corruption_per_event                (0.0)
      c_setup                             (0.01)
    [retry]
      max_retries          (3, in [0, 100])
      requeue_delay        (0.0 seconds)
      dedicated_recovery   (false)
    [run]
      granularity          ("job"; one of task/job/event)
      seed                 (0; 64-bit unsigned, ints or "0x..." strings)
      n_tasks              (1)

Serialization writes the same shape back with stable ordering, so
parse(serialize(s)) == s.
"""

from __future__ import annotations

from importlib import resources

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from .core import CheckpointGranularity, DatasetSpec, RetryPolicy
from .engine import Scenario
from .errors import ScenarioFormatError
from .failures import FailureModel, SiteProfile

__all__ = [
    "parse_scenario",
    "serialize_scenario",
    "load_scenario",
    "scenario_to_dict",
    "bundled_scenario_names",
    "load_bundled_scenario",
]

_GRANULARITY = {
    "task": CheckpointGranularity.TASK_LEVEL,
    "job": CheckpointGranularity.JOB_LEVEL,
    "event": CheckpointGranularity.EVENT_LEVEL,
}

_REQUIRED = object()


def _fail(message: str):
    raise ScenarioFormatError(message)


def _get(table: dict, section: str, key: str, default=_REQUIRED):
    if key not in table:
        if default is _REQUIRED:
            _fail(f"missing required key {section}.{key}")
        return default
    return table.pop(key)


def _int(section, key, raw, lo=None, hi=None):
    if isinstance(raw, bool) or not isinstance(raw, int):
        _fail(f"{section}.{key} must be an integer (got {raw!r})")
    if lo is not None and raw < lo:
        _fail(f"{section}.{key} must be >= {lo} (got {raw})")
    if hi is not None and raw > hi:
        _fail(f"{section}.{key} must be <= {hi} (got {raw})")
    return raw


def _float(section, key, raw, lo=None, hi=None, strict_lo=False):
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        _fail(f"{section}.{key} must be a number (got {raw!r})")
    value = float(raw)
    if strict_lo and lo is not None and value <= lo:
        _fail(f"{section}.{key} must be > {lo} (got {value})")
    if not strict_lo and lo is not None and value < lo:
        _fail(f"{section}.{key} must be >= {lo} (got {value})")
    if hi is not None and value > hi:
        if lo is not None:
            _fail(f"{section}.{key} must be in [{lo}, {hi}] (got {value})")
        _fail(f"{section}.{key} must be <= {hi} (got {value})")
    return value


def _bool(section, key, raw):
    if not isinstance(raw, bool):
        _fail(f"{section}.{key} must be true or false (got {raw!r})")
    return raw


def _str(section, key, raw):
    if not isinstance(raw, str) or not raw:
        _fail(f"{section}.{key} must be a non-empty string (got {raw!r})")
    return raw


def _reject_unknown(table: dict, section: str):
    if table:
        key = sorted(table)[0]
        _fail(f"unknown key {section}.{key}")


def _parse_seed(raw):
    if isinstance(raw, bool):
        _fail(f"run.seed must be an integer (got {raw!r})")
    if isinstance(raw, str):
        try:
            raw = int(raw, 0)
        except ValueError:
            _fail(f"run.seed string must be a decimal or 0x integer (got {raw!r})")
    if not isinstance(raw, int):
        _fail(f"run.seed must be an integer (got {raw!r})")
    if not 0 <= raw < 2**64:
        _fail(f"run.seed must be in [0, 2^64) (got {raw})")
    return raw


def parse_scenario(text: str) -> Scenario:
    """Parse and validate scenario text; errors name the offending key."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioFormatError(f"invalid scenario syntax: {exc}") from exc

    def table(name):
        value = data.pop(name, {})
        if not isinstance(value, dict):
            _fail(f"[{name}] must be a table")
        return dict(value)

    dataset_tbl = table("dataset")
    failure_tbl = table("failure")
    retry_tbl = table("retry")
    run_tbl = table("run")

    sites_raw = data.pop("site", None)
    if data:
        _fail(f"unknown section [{sorted(data)[0]}]")
    if not isinstance(sites_raw, list) or not sites_raw:
        _fail("at least one [[site]] table is required")

    dataset = DatasetSpec(
        total_events=_int("dataset", "total_events",
                          _get(dataset_tbl, "dataset", "total_events"), lo=1),
        events_per_job=_int("dataset", "events_per_job",
                            _get(dataset_tbl, "dataset", "events_per_job"), lo=1),
        nominal_cpu_per_event=_float(
            "dataset", "nominal_cpu_per_event",
            _get(dataset_tbl, "dataset", "nominal_cpu_per_event"),
            lo=0.0, strict_lo=True),
    )
    _reject_unknown(dataset_tbl, "dataset")

    sites = []
    seen_ids = set()
    for idx, raw in enumerate(sites_raw):
        section = f"site[{idx}]"
        if not isinstance(raw, dict):
            _fail(f"{section} must be a table")
        tbl = dict(raw)
        site_id = _str(section, "site_id", _get(tbl, section, "site_id"))
        if site_id in seen_ids:
            _fail(f"{section}.site_id duplicates {site_id!r}")
        seen_ids.add(site_id)
        sites.append(SiteProfile(
            site_id=site_id,
            slots=_int(section, "slots", _get(tbl, section, "slots"), lo=1),
            speed_factor=_float(section, "speed_factor",
                                _get(tbl, section, "speed_factor", 1.0),
                                lo=0.0, strict_lo=True),
            failure_multiplier=_float(section, "failure_multiplier",
                                      _get(tbl, section, "failure_multiplier", 1.0),
                                      lo=0.0),
        ))
        _reject_unknown(tbl, section)

    failure = FailureModel(
        p_setup=_float("failure", "p_setup",
                       _get(failure_tbl, "failure", "p_setup", 0.0), 0.0, 1.0),
        p_compute=_float("failure", "p_compute",
                         _get(failure_tbl, "failure", "p_compute", 0.0), 0.0, 1.0),
        p_stageout=_float("failure", "p_stageout",
                          _get(failure_tbl, "failure", "p_stageout", 0.0), 0.0, 1.0),
        permanent_fraction=_float(
            "failure", "permanent_fraction",
            _get(failure_tbl, "failure", "permanent_fraction", 0.0), 0.0, 1.0),
        corruption_per_event=_float(
            "failure", "corruption_per_event",
            _get(failure_tbl, "failure", "corruption_per_event", 0.0), 0.0, 1.0),
        c_setup=_float("failure", "c_setup",
                       _get(failure_tbl, "failure", "c_setup", 0.01), 0.0, 1.0),
    )
    _reject_unknown(failure_tbl, "failure")

    retry = RetryPolicy(
        max_retries=_int("retry", "max_retries",
                         _get(retry_tbl, "retry", "max_retries", 3), lo=0, hi=100),
        requeue_delay=_float("retry", "requeue_delay",
                             _get(retry_tbl, "retry", "requeue_delay", 0.0), lo=0.0),
        dedicated_recovery=_bool("retry", "dedicated_recovery",
                                 _get(retry_tbl, "retry", "dedicated_recovery", False)),
    )
    _reject_unknown(retry_tbl, "retry")

    gran_name = _str("run", "granularity", _get(run_tbl, "run", "granularity", "job"))
    if gran_name not in _GRANULARITY:
        _fail(f"run.granularity must be one of task/job/event (got {gran_name!r})")
    seed = _parse_seed(_get(run_tbl, "run", "seed", 0))
    n_tasks = _int("run", "n_tasks", _get(run_tbl, "run", "n_tasks", 1), lo=1)
    _reject_unknown(run_tbl, "run")

    return Scenario(
        dataset=dataset,
        sites=tuple(sites),
        failure_model=failure,
        retry_policy=retry,
        granularity=_GRANULARITY[gran_name],
        seed=seed,
        n_tasks=n_tasks,
    )


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)  # repr always keeps a '.' or exponent
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    raise TypeError(f"cannot serialize {value!r}")


def scenario_to_dict(sc: Scenario) -> dict:
    """Canonical nested-dict form (applied defaults included)."""
    gran = {v: k for k, v in _GRANULARITY.items()}[sc.granularity]
    return {
        "dataset": {
            "total_events": sc.dataset.total_events,
            "events_per_job": sc.dataset.events_per_job,
            "nominal_cpu_per_event": sc.dataset.nominal_cpu_per_event,
        },
        "site": [
            {
                "site_id": s.site_id,
                "slots": s.slots,
                "speed_factor": s.speed_factor,
                "failure_multiplier": s.failure_multiplier,
            }
            for s in sc.sites
        ],
        "failure": {
            "p_setup": sc.failure_model.p_setup,
            "p_compute": sc.failure_model.p_compute,
            "p_stageout": sc.failure_model.p_stageout,
            "permanent_fraction": sc.failure_model.permanent_fraction,
            "corruption_per_event": sc.failure_model.corruption_per_event,
            "c_setup": sc.failure_model.c_setup,
        },
        "retry": {
            "max_retries": sc.retry_policy.max_retries,
            "requeue_delay": sc.retry_policy.requeue_delay,
            "dedicated_recovery": sc.retry_policy.dedicated_recovery,
        },
        "run": {
            "granularity": gran,
            "seed": sc.seed,
            "n_tasks": sc.n_tasks,
        },
    }


def serialize_scenario(sc: Scenario) -> str:
    """Write a scenario back to TOML text; parse() of it round-trips."""
    doc = scenario_to_dict(sc)
    lines = []
    for section in ("dataset", "failure", "retry", "run"):
        lines.append(f"[{section}]")
        for key, value in doc[section].items():
            if section == "run" and key == "seed" and value >= 2**63:
                # TOML integers are signed 64-bit; big seeds go as hex strings.
                lines.append(f'seed = "0x{value:x}"')
            else:
                lines.append(f"{key} = {_fmt(value)}")
        lines.append("")
    for site in doc["site"]:
        lines.append("[[site]]")
        for key, value in site.items():
            lines.append(f"{key} = {_fmt(value)}")
        lines.append("")
    return "\n".join(lines)


def load_scenario(path) -> Scenario:
    """Parse a scenario file; errors are prefixed with the path."""
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    try:
        return parse_scenario(text)
    except ScenarioFormatError as exc:
        raise ScenarioFormatError(f"{path}: {exc}") from exc


def _bundled_dir():
    return resources.files("gridsim").joinpath("scenarios")


def bundled_scenario_names() -> list:
    """Names of scenario files shipped inside the package."""
    return sorted(
        entry.name for entry in _bundled_dir().iterdir()
        if entry.name.endswith(".cfg")
    )


def load_bundled_scenario(name: str) -> Scenario:
    """Load a shipped scenario (e.g. "scenario_2011.cfg") by name."""
    candidate = _bundled_dir().joinpath(name)
    if not candidate.is_file():
        raise ScenarioFormatError(
            f"no bundled scenario {name!r} (have: {', '.join(bundled_scenario_names())})"
        )
    try:
        return parse_scenario(candidate.read_text(encoding="utf-8"))
    except ScenarioFormatError as exc:
        raise ScenarioFormatError(f"{name}: {exc}") from exc

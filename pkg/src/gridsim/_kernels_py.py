"""Pure-Python attempt-sampling kernel.

Reference implementation of the counter-based RNG and the per-attempt
outcome/cost sampler. The compiled extension (_speedups) implements the
exact same IEEE-754 operation sequence; both backends must produce
bit-identical results, which the test suite asserts.

RNG: SplitMix64. A stream is keyed by (seed, job_id, attempt_index), so a
draw sequence depends only on those three values, never on dispatch
interleaving. Every attempt gets a fresh stream; variable-length draws
(the corruption binomial) therefore cannot leak into other attempts.

CPU ledger: all cpu_consumed values are quantized down to multiples of
2^-10 core-seconds. Sums and differences of such multiples are exact in
double precision up to 2^53 quanta (~8.8e15 core-seconds), which is what
makes the simulator's conservation checks hold exactly.
"""

import math

BACKEND = "pure-python"

MASK = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# 1/2^53 and 1/2^52; exact powers of two.
_INV53 = 1.0 / 9007199254740992.0
_INV52 = 1.0 / 4503599627370496.0

QUANTUM = 0.0009765625  # 2^-10 core-seconds

# Outcome / stage codes shared with the compiled backend.
OUTCOME_SUCCESS = 0
OUTCOME_TRANSIENT = 1
OUTCOME_PERMANENT = 2
STAGE_NONE = -1
STAGE_SETUP = 0
STAGE_COMPUTE = 1
STAGE_STAGEOUT = 2


def mix64(z):
    """SplitMix64 finalizer: avalanche a 64-bit value."""
    z &= MASK
    z ^= z >> 30
    z = (z * _MIX1) & MASK
    z ^= z >> 27
    z = (z * _MIX2) & MASK
    z ^= z >> 31
    return z


def stream_state(seed, job_id, attempt_index):
    """Initial generator state for the (seed, job_id, attempt_index) stream."""
    s = mix64((seed + GOLDEN) & MASK)
    s = mix64(((s ^ (job_id & MASK)) + GOLDEN) & MASK)
    s = mix64(((s ^ (attempt_index & MASK)) + GOLDEN) & MASK)
    return s


def next_u64(state):
    """Advance one step; returns (value, new_state)."""
    state = (state + GOLDEN) & MASK
    return mix64(state), state


def u64_sequence(seed, job_id, attempt_index, n):
    """First n raw 64-bit draws of a stream (test hook)."""
    state = stream_state(seed, job_id, attempt_index)
    out = []
    for _ in range(n):
        v, state = next_u64(state)
        out.append(v)
    return out


def uniform(value):
    """Map a raw draw to [0, 1): 53-bit mantissa, exact arithmetic."""
    return (value >> 11) * _INV53


def uniform_open(value):
    """Map a raw draw to (0, 1): midpoints of 2^52 equal cells."""
    return ((value >> 12) + 0.5) * _INV52


def quantize(x):
    """Round a CPU amount down to a multiple of 2^-10 core-seconds."""
    return math.floor(x * 1024.0) * QUANTUM


def binomial(state, n, p):
    """Binomial(n, p) draw by geometric gap skipping; returns (k, state).

    Cost is O(n·p + 1) draws, which keeps per-event corruption sampling
    cheap at the ~1e-9 rates this simulator cares about.
    """
    if n <= 0 or p <= 0.0:
        return 0, state
    if p >= 1.0:
        return n, state
    lq = math.log1p(-p)
    count = 0
    i = -1
    while True:
        v, state = next_u64(state)
        r = math.log(uniform_open(v)) / lq
        # Compare before flooring: r can exceed 2^63 at tiny p.
        if r >= float(n - i - 1):
            return count, state
        i += int(math.floor(r)) + 1
        count += 1


def sample_attempt_raw(seed, job_id, attempt_index, events, cpu_per_event,
                       p_setup, p_compute, p_stageout, permanent_fraction,
                       corruption_per_event, c_setup):
    """Sample one attempt; returns (outcome, stage, cpu, checkpointed, corrupted).

    Stages are tested in order with the given effective probabilities.
    Draw order is frozen: setup-u, [perm-u] | compute-u, [frac-u, perm-u] |
    stageout-u, [perm-u] | corruption binomial. Costs, with
    nominal = events * cpu_per_event:
      setup failure     c_setup * nominal, nothing checkpointed
      compute failure   u * nominal, floor(u * events) checkpointed
      stage-out failure full nominal
      success           full nominal, corruption ~ Binomial(events, rate)
    All costs pass through quantize().
    """
    state = stream_state(seed, job_id, attempt_index)
    nominal = events * cpu_per_event

    v, state = next_u64(state)
    if uniform(v) < p_setup:
        cpu = quantize(c_setup * nominal)
        v, state = next_u64(state)
        if uniform(v) < permanent_fraction:
            return OUTCOME_PERMANENT, STAGE_SETUP, cpu, 0, 0
        return OUTCOME_TRANSIENT, STAGE_SETUP, cpu, 0, 0

    v, state = next_u64(state)
    if uniform(v) < p_compute:
        v, state = next_u64(state)
        frac = uniform_open(v)
        cpu = quantize(frac * nominal)
        checkpointed = int(math.floor(frac * events))
        v, state = next_u64(state)
        if uniform(v) < permanent_fraction:
            return OUTCOME_PERMANENT, STAGE_COMPUTE, cpu, checkpointed, 0
        return OUTCOME_TRANSIENT, STAGE_COMPUTE, cpu, checkpointed, 0

    v, state = next_u64(state)
    if uniform(v) < p_stageout:
        cpu = quantize(nominal)
        v, state = next_u64(state)
        if uniform(v) < permanent_fraction:
            return OUTCOME_PERMANENT, STAGE_STAGEOUT, cpu, 0, 0
        return OUTCOME_TRANSIENT, STAGE_STAGEOUT, cpu, 0, 0

    cpu = quantize(nominal)
    corrupted, state = binomial(state, events, corruption_per_event)
    return OUTCOME_SUCCESS, STAGE_NONE, cpu, 0, corrupted

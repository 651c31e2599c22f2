# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled attempt-sampling kernel.

Mirror of _kernels_py: same SplitMix64 streams, same draw order, and the
same IEEE-754 double operations in the same sequence, so results are
bit-identical to the pure-Python backend (asserted by the test suite).
Keep the two files in lockstep when changing either.
"""

from libc.math cimport floor, log, log1p

ctypedef unsigned long long u64

BACKEND = "compiled"

MASK = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
QUANTUM = 0.0009765625

OUTCOME_SUCCESS = 0
OUTCOME_TRANSIENT = 1
OUTCOME_PERMANENT = 2
STAGE_NONE = -1
STAGE_SETUP = 0
STAGE_COMPUTE = 1
STAGE_STAGEOUT = 2

cdef u64 _GOLDEN = 0x9E3779B97F4A7C15ULL
cdef u64 _MIX1 = 0xBF58476D1CE4E5B9ULL
cdef u64 _MIX2 = 0x94D049BB133111EBULL

# 1/2^53 and 1/2^52; exact powers of two.
cdef double _INV53 = 1.0 / 9007199254740992.0
cdef double _INV52 = 1.0 / 4503599627370496.0
cdef double _QUANTUM = 0.0009765625


cdef inline u64 _mix64(u64 z) nogil:
    z ^= z >> 30
    z *= _MIX1
    z ^= z >> 27
    z *= _MIX2
    z ^= z >> 31
    return z


cdef inline u64 _stream_state(u64 seed, u64 job_id, u64 attempt_index) nogil:
    cdef u64 s = _mix64(seed + _GOLDEN)
    s = _mix64((s ^ job_id) + _GOLDEN)
    s = _mix64((s ^ attempt_index) + _GOLDEN)
    return s


cdef inline u64 _next(u64* state) nogil:
    state[0] += _GOLDEN
    return _mix64(state[0])


cdef inline double _uniform(u64 value) nogil:
    return <double>(value >> 11) * _INV53


cdef inline double _uniform_open(u64 value) nogil:
    return (<double>(value >> 12) + 0.5) * _INV52


cdef inline double _quantize(double x) nogil:
    return floor(x * 1024.0) * _QUANTUM


cdef inline long long _binomial(u64* state, long long n, double p) nogil:
    cdef long long count = 0
    cdef long long i = -1
    cdef double lq, r
    if n <= 0 or p <= 0.0:
        return 0
    if p >= 1.0:
        return n
    lq = log1p(-p)
    while True:
        r = log(_uniform_open(_next(state))) / lq
        # Compare before flooring: r can exceed 2^63 at tiny p.
        if r >= <double>(n - i - 1):
            return count
        i += <long long>floor(r) + 1
        count += 1


def mix64(u64 z):
    """SplitMix64 finalizer: avalanche a 64-bit value."""
    return _mix64(z)


def stream_state(u64 seed, u64 job_id, u64 attempt_index):
    """Initial generator state for the (seed, job_id, attempt_index) stream."""
    return _stream_state(seed, job_id, attempt_index)


def next_u64(u64 state):
    """Advance one step; returns (value, new_state)."""
    cdef u64 s = state
    cdef u64 v = _next(&s)
    return v, s


def u64_sequence(u64 seed, u64 job_id, u64 attempt_index, long long n):
    """First n raw 64-bit draws of a stream (test hook)."""
    cdef u64 state = _stream_state(seed, job_id, attempt_index)
    cdef long long k
    out = []
    for k in range(n):
        out.append(_next(&state))
    return out


def uniform(u64 value):
    """Map a raw draw to [0, 1): 53-bit mantissa, exact arithmetic."""
    return _uniform(value)


def uniform_open(u64 value):
    """Map a raw draw to (0, 1): midpoints of 2^52 equal cells."""
    return _uniform_open(value)


def quantize(double x):
    """Round a CPU amount down to a multiple of 2^-10 core-seconds."""
    return _quantize(x)


def binomial(u64 state, long long n, double p):
    """Binomial(n, p) draw by geometric gap skipping; returns (k, state)."""
    cdef u64 s = state
    cdef long long count = _binomial(&s, n, p)
    return count, s


def sample_attempt_raw(u64 seed, u64 job_id, u64 attempt_index,
                       long long events, double cpu_per_event,
                       double p_setup, double p_compute, double p_stageout,
                       double permanent_fraction, double corruption_per_event,
                       double c_setup):
    """Sample one attempt; returns (outcome, stage, cpu, checkpointed, corrupted).

    Semantics documented on the pure-Python twin (_kernels_py).
    """
    cdef u64 state = _stream_state(seed, job_id, attempt_index)
    cdef double nominal = <double>events * cpu_per_event
    cdef double cpu, frac
    cdef long long checkpointed, corrupted
    cdef int permanent

    if _uniform(_next(&state)) < p_setup:
        cpu = _quantize(c_setup * nominal)
        permanent = _uniform(_next(&state)) < permanent_fraction
        return (OUTCOME_PERMANENT if permanent else OUTCOME_TRANSIENT,
                STAGE_SETUP, cpu, 0, 0)

    if _uniform(_next(&state)) < p_compute:
        frac = _uniform_open(_next(&state))
        cpu = _quantize(frac * nominal)
        checkpointed = <long long>floor(frac * <double>events)
        permanent = _uniform(_next(&state)) < permanent_fraction
        return (OUTCOME_PERMANENT if permanent else OUTCOME_TRANSIENT,
                STAGE_COMPUTE, cpu, checkpointed, 0)

    if _uniform(_next(&state)) < p_stageout:
        cpu = _quantize(nominal)
        permanent = _uniform(_next(&state)) < permanent_fraction
        return (OUTCOME_PERMANENT if permanent else OUTCOME_TRANSIENT,
                STAGE_STAGEOUT, cpu, 0, 0)

    cpu = _quantize(nominal)
    corrupted = _binomial(&state, events, corruption_per_event)
    return OUTCOME_SUCCESS, STAGE_NONE, cpu, 0, corrupted

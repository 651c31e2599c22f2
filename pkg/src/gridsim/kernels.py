"""Backend selection for the attempt-sampling kernel.

Imports the compiled extension when available, otherwise the pure-Python
reference implementation. Both expose the same names and produce
bit-identical results. Set GRIDSIM_PURE_PYTHON=1 to force the fallback
(used by the parity tests and the benchmark).
"""

import os

if os.environ.get("GRIDSIM_PURE_PYTHON") == "1":
    from . import _kernels_py as _impl
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND
MASK = _impl.MASK
GOLDEN = _impl.GOLDEN
QUANTUM = _impl.QUANTUM

OUTCOME_SUCCESS = _impl.OUTCOME_SUCCESS
OUTCOME_TRANSIENT = _impl.OUTCOME_TRANSIENT
OUTCOME_PERMANENT = _impl.OUTCOME_PERMANENT
STAGE_NONE = _impl.STAGE_NONE
STAGE_SETUP = _impl.STAGE_SETUP
STAGE_COMPUTE = _impl.STAGE_COMPUTE
STAGE_STAGEOUT = _impl.STAGE_STAGEOUT

mix64 = _impl.mix64
stream_state = _impl.stream_state
next_u64 = _impl.next_u64
u64_sequence = _impl.u64_sequence
uniform = _impl.uniform
uniform_open = _impl.uniform_open
quantize = _impl.quantize
binomial = _impl.binomial
sample_attempt_raw = _impl.sample_attempt_raw

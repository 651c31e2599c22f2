"""Compare the compiled sampling kernel against the pure-Python fallback.

Two measurements:
  * raw kernel throughput: sample_attempt_raw calls per second
  * end-to-end: the bundled 2011 campaign (~160k attempts)

Run as `python3 benchmarks/bench_kernels.py`. The pure backend is loaded
directly from its module, so no env var juggling is needed; the compiled
one is skipped (with a note) when the extension is not built.
"""

import time

import gridsim._kernels_py as pure_kernels

try:
    import gridsim._speedups as fast_kernels
except ImportError:
    fast_kernels = None

ARGS = (2024, 0, 0, 6000, 18.0, 0.01, 0.02, 0.0285, 0.0, 3e-9, 0.01)


def bench_raw(mod, n_calls=200_000):
    fn = mod.sample_attempt_raw
    seed, _, _, events, cpe, ps, pc, po, pf, corr, cs = ARGS
    start = time.perf_counter()
    for jid in range(n_calls):
        fn(seed, jid, 0, events, cpe, ps, pc, po, pf, corr, cs)
    elapsed = time.perf_counter() - start
    return n_calls / elapsed


def bench_campaign():
    from gridsim.engine import run
    from gridsim.scenario_io import load_bundled_scenario

    scenario = load_bundled_scenario("scenario_2011.cfg")
    start = time.perf_counter()
    result = run(scenario)
    elapsed = time.perf_counter() - start
    return elapsed, len(result.attempt_log)


def main():
    rate_pure = bench_raw(pure_kernels)
    print(f"pure-python  sample_attempt_raw: {rate_pure:12,.0f} calls/s")
    if fast_kernels is None:
        print("compiled     sample_attempt_raw: extension not built, skipped")
    else:
        rate_fast = bench_raw(fast_kernels)
        print(f"compiled     sample_attempt_raw: {rate_fast:12,.0f} calls/s "
              f"({rate_fast / rate_pure:.1f}x)")
        # Spot-check agreement on the benchmark workload.
        for jid in (0, 1, 99_999):
            a = pure_kernels.sample_attempt_raw(ARGS[0], jid, 0, *ARGS[3:])
            b = fast_kernels.sample_attempt_raw(ARGS[0], jid, 0, *ARGS[3:])
            assert a == b, f"backend mismatch at job {jid}: {a} != {b}"

    elapsed, attempts = bench_campaign()
    from gridsim.kernels import BACKEND
    print(f"2011 campaign ({attempts:,} attempts) with {BACKEND} backend: "
          f"{elapsed:.2f} s")


if __name__ == "__main__":
    main()

"""Time the compiled and numpy kernels on the same batch of states.

    python benchmarks/bench_backends.py [--n 20000] [--repeat 3]
"""
import argparse
import time

import numpy as np

from mixedent import _backend
from mixedent.sampling import split_stream, zhsl_states


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20_000, help="states per batch")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    rho = zhsl_states(args.n, split_stream(1))
    print(f"{'backend':<8} {'kernel':<18} {'total s':>9} {'us/state':>9}")
    results = {}
    for name in _backend.available():
        k = _backend.get(name)
        for label, fn in (("eigvalsh_batch", lambda: k.eigvalsh_batch(rho)),
                          ("state_core_batch", lambda: k.state_core_batch(rho))):
            t = best_of(fn, args.repeat)
            results[name, label] = t
            print(f"{name:<8} {label:<18} {t:9.3f} {1e6 * t / args.n:9.2f}")
    if "cython" in _backend.available():
        for label in ("eigvalsh_batch", "state_core_batch"):
            print(f"speed-up {label}: {results['python', label] / results['cython', label]:.1f}x")
        a = _backend.get("cython").state_core_batch(rho)[-1]
        b = _backend.get("python").state_core_batch(rho)[-1]
        print(f"max |C_cython - C_python| = {np.max(np.abs(a - b)):.2e}")


if __name__ == "__main__":
    main()

"""Benchmark the hot kernels on both backends.

Measures the raw kernel cost (barrier evaluation, QP, RK4 step) per
backend, plus the public-API per-step cost (3 obstacle evaluations +
one filter pass) on the active backend, which is what the real-time
budget is stated against.

Usage: python benchmarks/bench_step.py [N]
"""

import sys
import time

import conecbf
import conecbf._pykernel as pk
from conecbf import FilterConfig, ModelParams, Obstacle, UnicycleState, c3bf_eval, filter_qp

try:
    import conecbf._speedups as sp
except ImportError:
    sp = None

N = int(sys.argv[1]) if len(sys.argv) > 1 else 100_000


def bench(fn, n=N):
    t0 = time.perf_counter()
    for _ in range(n):
        fn()
    return (time.perf_counter() - t0) / n * 1e6


def kernel_row(kern):
    eval_us = bench(lambda: kern.c3bf_unicycle(0.0, 0.0, 0.3, 1.4, 0.1, 0.35, 5.0, 0.4, 0.0, 0.0, 1.3))
    qp_us = bench(lambda: kern.solve_qp2(0.4, -0.1, [1.0, -0.3, 0.2], [0.2, 1.1, -0.9], [0.8, 0.3, -0.5]))
    rk4_us = bench(lambda: kern.rk4_unicycle(0.0, 0.0, 0.3, 1.4, 0.1, 0.4, -0.1, 0.01))
    return eval_us, qp_us, rk4_us


def api_step_us():
    p = ModelParams(l=0.35, w=0.6)
    cfg = FilterConfig(gamma=1.0)
    s = UnicycleState(0, 0, 0.3, 1.4, 0.1)
    obstacles = [Obstacle(5, 0.4), Obstacle(8, -1.0, vx=-0.5), Obstacle(12, 2.0, vy=0.3)]
    u_ref = (0.4, -0.1)

    def step():
        evals = [c3bf_eval("unicycle", s, o, p) for o in obstacles]
        filter_qp(u_ref, evals, cfg)

    return bench(step)


def main():
    print(f"iterations per measurement: {N}")
    print(f"{'kernel':10s} {'cone eval':>12s} {'qp (3 cons)':>12s} {'rk4 step':>12s}")
    for name, kern in (("pure", pk), ("compiled", sp)):
        if kern is None:
            print(f"{name:10s} {'(not built)':>12s}")
            continue
        e, q, r = kernel_row(kern)
        print(f"{name:10s} {e:>10.3f}us {q:>10.3f}us {r:>10.3f}us")
    print()
    print(f"public API step (3 obstacles, eval + filter) on "
          f"'{conecbf.kernel_backend()}' backend: {api_step_us():.2f} us "
          f"(real-time budget: 50 us)")


if __name__ == "__main__":
    main()

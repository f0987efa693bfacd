"""Time the compiled and pure-Python run loops on the same workloads.

    python3 benchmarks/bench_kernels.py [--iters N] [--repeat R]

Prints steps per second for each (benchmark, algorithm, backend) and the
speedup of the compiled loop; also checks that both backends agree bit for bit.
"""

import argparse
import time

import numpy as np

from perturbed_td import RunConfig, StepSchedule, get_benchmark, run_experiment
from perturbed_td.kernels import available_backends

CASES = [
    ("theta2theta", "perturbed", 1.0, 0.01),
    ("chain3", "perturbed", 0.5, 1e-4),
    ("chain3", "tdc", 0.0, 1e-4),
    ("baird", "perturbed", 6.0, 1e-4),
    ("baird", "etd", 0.0, 1e-5),
]


def time_case(benchmark, config, backend, repeat):
    best, log = np.inf, None
    for _ in range(repeat):
        start = time.perf_counter()
        log = run_experiment(benchmark, config, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best, log


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--iters", type=int, default=200_000, help="iterations per run")
    parser.add_argument("--runs", type=int, default=2)
    parser.add_argument("--repeat", type=int, default=3, help="keep the best of R timings")
    args = parser.parse_args(argv)

    backends = available_backends()
    if "compiled" not in backends:
        print("compiled extension not built; timing the pure-Python loop only")
    steps = args.iters * args.runs
    header = f"{'benchmark':<12} {'algo':<10} " + " ".join(f"{b + ' steps/s':>18}" for b in backends)
    print(header + ("    speedup  identical" if len(backends) == 2 else ""))
    for name, algo, eta, alpha in CASES:
        config = RunConfig(algorithm=algo, eta=eta, schedule=StepSchedule("constant", alpha),
                           iterations=args.iters, num_runs=args.runs, eval_stride=1000)
        bench = get_benchmark(name)
        results = {b: time_case(bench, config, b, args.repeat) for b in backends}
        row = f"{name:<12} {algo:<10} " + " ".join(f"{steps / results[b][0]:>18,.0f}" for b in backends)
        if len(backends) == 2:
            fast, slow = results["compiled"], results["python"]
            same = np.array_equal(fast[1].rmse, slow[1].rmse) and np.array_equal(fast[1].final_theta, slow[1].final_theta)
            row += f" {slow[0] / fast[0]:>9.1f}x  {same}"
        print(row)


if __name__ == "__main__":
    main()

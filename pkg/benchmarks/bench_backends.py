#!/usr/bin/env python3
"""Benchmark the compiled jet kernel against the numpy fallback.

Times the expression-tape evaluator at several batch sizes and two
end-to-end workloads (a curvature sweep and a Chern-Simons quadrature),
once per available lane.  Run after an editable install:

    python benchmarks/bench_backends.py [--order 16] [--repeat 3]
"""

import argparse
import importlib
import os
import subprocess
import sys
import time

import numpy as np


def _worker_source(order, repeat):
    return f"""
import time
import numpy as np
import cottonlab
from cottonlab import charts, jets, quad
from cottonlab.geometry import MetricData

lane = cottonlab.backend_name()
expr = jets.parse("exp(x1)*sin(x2*x3) + sqrt(1.5 + x3^2)/(2 + cos(x1)) + x1^3*x2")
rng = np.random.default_rng(0)

def best(fn, repeat={repeat}):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)

rows = []
for n in (1, 64, 4096):
    pts = rng.uniform(-1, 1, (n, 3))
    loops = max(1, 4096 // n)
    dt = best(lambda: [jets.eval_jet_many(expr, pts) for _ in range(loops)])
    rows.append(("tape jets n=%d" % n, dt / loops / n * 1e6, "us/point"))

pert = charts.perturbed_metric()
pts = pert.domain.sample(rng, 2000, margin=0.05)
dt = best(lambda: MetricData(pert, pts).cotton_tensor)
rows.append(("cotton sweep 2000 pts", dt * 1e3, "ms"))

so3 = charts.so3_euler_chart()
dt = best(lambda: quad.cs_invariant_chart(so3, order={order}))
rows.append(("CS(SO3) quadrature order {order}", dt * 1e3, "ms"))

print("lane:", lane)
for name, value, unit in rows:
    print("  %-34s %10.3f %s" % (name, value, unit))
"""


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--order", type=int, default=16)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    src = _worker_source(args.order, args.repeat)
    for lane in ("cython", "python"):
        env = dict(os.environ, COTTONLAB_JET_BACKEND=lane)
        proc = subprocess.run([sys.executable, "-c", src], env=env)
        if proc.returncode != 0 and lane == "cython":
            print("(compiled lane unavailable; numpy fallback only)")


if __name__ == "__main__":
    main()

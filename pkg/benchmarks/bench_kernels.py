"""Compare the numba and numpy torque kernels.

Run from the repository root:

    python benchmarks/bench_kernels.py [--repeat 20]

Part 1 times the batch torque kernel directly for several batch sizes.
Part 2 times a full 0-75 N ramp and a 160-sample stiffness fit in a fresh
interpreter per backend, since the backend is fixed at import.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from tendonhand.geometry import reference_geometry
from tendonhand.kernels import _numba, _numpy

PIPELINE = """
import time
import numpy as np
from tendonhand import kernels, reference_geometry, force_ramp, generate_synthetic_dataset, fit_stiffness
g = reference_geometry(1.5)
k = np.array([28.48, 4.05, 4.05])
kernels.load_torques_batch(np.ones(2), np.tile(g.rest(), (2, 1)), *g.arrays())
t0 = time.perf_counter()
for _ in range({repeat}):
    force_ramp(g, k, np.arange(0.0, 76.0))
t1 = time.perf_counter()
data = generate_synthetic_dataset(g, k, np.linspace(0, 75, 10), noise_std_deg=1.0, seed=0, cycles=16)
t2 = time.perf_counter()
for _ in range({repeat}):
    fit_stiffness(data, g, 5 * k)
t3 = time.perf_counter()
print(kernels.BACKEND, (t1 - t0) / {repeat}, (t3 - t2) / {repeat})
"""


def bench_batch(repeat):
    g = reference_geometry(1.5)
    rng = np.random.default_rng(0)
    print(f"{'N':>8} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for n in (1, 16, 160, 1600, 16000):
        f = rng.uniform(0, 75, n)
        q = g.rest() + rng.uniform(0, 1, (n, 3))
        args = (f, q, *g.arrays())
        _numba.load_torques_batch(*args)  # compile
        t_np = min(timeit.repeat(lambda: _numpy.load_torques_batch(*args), number=10, repeat=repeat)) / 10
        t_nb = min(timeit.repeat(lambda: _numba.load_torques_batch(*args), number=10, repeat=repeat)) / 10
        print(f"{n:>8} {t_np * 1e3:>10.4f} {t_nb * 1e3:>10.4f} {t_np / t_nb:>8.1f}")


def bench_pipeline(repeat):
    print(f"\n{'backend':>8} {'ramp ms':>10} {'fit ms':>10}")
    for flag in ("0", "1"):
        env = dict(os.environ, TENDONHAND_NO_NUMBA=flag)
        out = subprocess.run(
            [sys.executable, "-c", PIPELINE.format(repeat=repeat)], env=env, capture_output=True, text=True, check=True
        )
        name, ramp, fit = out.stdout.split()
        print(f"{name:>8} {float(ramp) * 1e3:>10.2f} {float(fit) * 1e3:>10.2f}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()
    bench_batch(args.repeat)
    bench_pipeline(max(1, args.repeat // 4))


if __name__ == "__main__":
    main()

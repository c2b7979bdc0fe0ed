"""Compare the numba kernels with their numpy fallbacks on representative workloads.

    python benchmarks/bench_kernels.py [--repeat 3] [--json]

Each workload is run once per backend to warm up (numba compiles on first
call), then timed; the best of ``--repeat`` runs is reported.
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from qbench import _accel
from qbench.apps.maxcut import make_instance, solve_maxcut_annealing
from qbench.circuits.circuit import Circuit
from qbench.circuits.devices import NoiseProfile
from qbench.circuits.graphs import complete_edges
from qbench.sim.sampler import sample_bits
from qbench.system.eplg import drb_circuit, sublayers

NOISE = NoiseProfile(p1=1e-3, p2=1e-2, readout_eps=1e-2)


def trajectories_workload():
    rng = np.random.default_rng(0)
    c = Circuit(12)
    for _ in range(20):
        for q in range(12):
            c.rx(float(rng.uniform(0, np.pi)), q)
        for q in range(0, 11, 2):
            c.cz(q, q + 1)
    return lambda: sample_bits(c, 200, NOISE, seed=1, method="statevector")


def stabilizer_workload():
    pairs, idles = sublayers(list(range(30)))[0]
    c = drb_circuit(30, pairs, idles, 100, np.random.default_rng(0))
    return lambda: sample_bits(c, 2000, NOISE, seed=1, method="stabilizer")


def annealing_workload():
    rng = np.random.default_rng(0)
    inst = make_instance(16, complete_edges(16), rng)
    return lambda: solve_maxcut_annealing(16, inst.edges, inst.weights, seed=3)


WORKLOADS = {
    "statevector trajectories (12q, 200 shots)": trajectories_workload,
    "tableau + Pauli frames (30q DRB, 2000 shots)": stabilizer_workload,
    "simulated annealing (K16 MaxCut)": annealing_workload,
}


def best_time(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true", help="print results as JSON")
    args = ap.parse_args(argv)

    backends = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA and not _accel.DISABLED else [])
    results = {}
    try:
        for label, build in WORKLOADS.items():
            fn = build()
            row = {}
            for backend in backends:
                _accel.set_backend(backend)
                fn()
                row[backend] = best_time(fn, args.repeat)
            results[label] = row
    finally:
        _accel.set_backend("numba" if _accel.USE_NUMBA else "numpy")

    if args.json:
        print(json.dumps(results, indent=2))
        return 0
    print(f"{'workload':48s}" + "".join(f"{b:>10s}" for b in backends) + ("   speedup" if len(backends) == 2 else ""))
    for label, row in results.items():
        line = f"{label:48s}" + "".join(f"{row[b]:9.3f}s" for b in backends)
        if len(backends) == 2:
            line += f"{row['numpy'] / row['numba']:9.1f}x"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

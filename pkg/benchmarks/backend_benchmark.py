#!/usr/bin/env python3
"""Compare the compiled (numba) and pure-numpy field-update backends.

Runs an identical FDTD workload in a subprocess per backend (the backend
is chosen at import time via PATCHSIM_BACKEND), reports steps/second,
and checks that both backends produce the same port record.

Usage: python3 benchmarks/backend_benchmark.py [--steps N] [--cells N]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import tempfile

_WORKER = r"""
import json, os, sys, time, warnings
warnings.filterwarnings("ignore")
import numpy as np
from patchsim.kernels import BACKEND
from patchsim.fdtd import CpmlSpec, SourceSpec, init_grid, run
from patchsim.geometry import build_scene, voxelize

steps = int(sys.argv[1])
cell = float(sys.argv[2])
out = sys.argv[3]

mat = voxelize(build_scene(), cell)
grid = init_grid(mat, air_margin_cells=4, cpml=CpmlSpec(depth=8),
                 dtype=np.float32)
src = SourceSpec()

# warm-up (JIT compilation for the numba path)
grid.step()
t0 = time.perf_counter()
rec = run(grid, src, steps, decay_threshold=0.0)
elapsed = time.perf_counter() - t0

with open(out, "w") as fh:
    json.dump({"backend": BACKEND, "steps": steps, "seconds": elapsed,
               "steps_per_second": steps / elapsed,
               "voltage": rec.voltage[:steps].tolist()}, fh)
"""


def run_backend(backend: str, steps: int, cell: float) -> dict:
    env = dict(os.environ, PATCHSIM_BACKEND=backend)
    with tempfile.NamedTemporaryFile(suffix=".json", delete=False) as fh:
        out = fh.name
    try:
        subprocess.run([sys.executable, "-c", _WORKER, str(steps),
                        str(cell), out], env=env, check=True)
        with open(out) as fh:
            return json.load(fh)
    finally:
        os.unlink(out)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=400)
    ap.add_argument("--cell-size-mm", type=float, default=0.4)
    args = ap.parse_args()

    results = {}
    for backend in ("numpy", "numba"):
        print(f"running {backend} backend ({args.steps} steps, "
              f"{args.cell_size_mm} mm cells) ...", flush=True)
        results[backend] = run_backend(backend, args.steps,
                                       args.cell_size_mm)

    import numpy as np
    v_np = np.array(results["numpy"]["voltage"])
    v_nb = np.array(results["numba"]["voltage"])
    scale = max(float(np.sqrt(np.mean(v_np ** 2))), 1e-300)
    rel_rms = float(np.sqrt(np.mean((v_np - v_nb) ** 2))) / scale

    print()
    print(f"{'backend':<10}{'steps/s':>12}{'seconds':>12}")
    for backend in ("numpy", "numba"):
        r = results[backend]
        print(f"{backend:<10}{r['steps_per_second']:>12.1f}"
              f"{r['seconds']:>12.2f}")
    speedup = (results["numba"]["steps_per_second"]
               / results["numpy"]["steps_per_second"])
    print(f"\nspeedup (numba / numpy): {speedup:.2f}x")
    print(f"port-voltage agreement: relative RMS {rel_rms:.3e}")
    if rel_rms > 1e-4:
        print("ERROR: backends disagree beyond single-precision tolerance")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

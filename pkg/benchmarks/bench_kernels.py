"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from stylediv import _kernels_py

try:
    from stylediv import _kernels as _compiled
except ImportError:
    _compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--tokens", type=int, default=400)
    ap.add_argument("--rows", type=int, default=5000)
    ap.add_argument("--pipeline", action="store_true",
                    help="also time featurize+train on a 200+200 synthetic corpus under each backend")
    args = ap.parse_args()
    rng = np.random.default_rng(0)

    a = rng.integers(0, 50, args.tokens).astype(np.int64)
    b = rng.integers(0, 50, args.tokens).astype(np.int64)
    xs = np.sort(rng.normal(size=args.rows))
    g = rng.normal(size=args.rows)
    h = rng.uniform(0.01, 0.25, size=args.rows)
    G, H = float(g.sum()), float(h.sum())

    cases = {
        f"levenshtein {args.tokens}x{args.tokens}": lambda k: k.levenshtein(a, b),
        f"best_split_sorted n={args.rows}": lambda k: k.best_split_sorted(xs, g, h, G, H, 1.0, 0.0, 2),
    }
    print(f"{'kernel':<32}{'python (s)':>12}{'cython (s)':>12}{'speedup':>10}")
    for name, call in cases.items():
        t_py = best_of(lambda: call(_kernels_py), args.repeat)
        if _compiled is None:
            print(f"{name:<32}{t_py:>12.5f}{'n/a':>12}{'':>10}")
            continue
        t_c = best_of(lambda: call(_compiled), args.repeat)
        assert call(_kernels_py) == call(_compiled)
        print(f"{name:<32}{t_py:>12.5f}{t_c:>12.5f}{t_py / t_c:>9.1f}x")
    if args.pipeline:
        for backend, env in (("python", {"STYLEDIV_PURE_PYTHON": "1"}), ("cython", {})):
            out = subprocess.run([sys.executable, "-c", PIPELINE_SNIPPET], env={**os.environ, **env},
                                 check=True, capture_output=True, text=True).stdout.strip()
            print(f"pipeline featurize+train [{backend}]: {out}")


PIPELINE_SNIPPET = """
import time
from stylediv import BACKEND, synthetic
from stylediv.pipeline import Pipeline
docs = synthetic.make_corpus(200, 200, seed=0)
t0 = time.perf_counter()
pl = Pipeline()
pl.fit(docs)
print(f"{time.perf_counter() - t0:.2f}s (backend={BACKEND})")
"""


if __name__ == "__main__":
    main()

"""Time the numba kernels against their pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5] [--json]
"""

import argparse
import json
import time

import numpy as np

from fracap import _kernels


def _best(fn, repeat):
    fn()  # warm-up (and JIT compile)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def _ray_case(n, boxes, rays, seed=0):
    rng = np.random.default_rng(seed)
    lo = rng.uniform(0, 4, (boxes, n))
    lo[:, 0] = np.arange(boxes) * 1.5
    hi = lo + rng.uniform(0.2, 1.0, (boxes, n))
    dirs = rng.normal(size=(rays, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    vol = float(np.prod(hi - lo, axis=1).sum())
    R = float(np.linalg.norm(hi.max(0) - lo.min(0)))
    return dirs, lo, hi, vol, 0.5, R


def cases():
    for n, boxes, rays in ((1, 1, 2), (2, 1, 1024), (2, 4, 256), (3, 2, 256)):
        args = _ray_case(n, boxes, rays)
        yield (f"ray n={n} boxes={boxes} rays={rays}",
               lambda a=args: _kernels._ray_near_numba(*a),
               lambda a=args: _kernels._ray_near_numpy(*a))
    rng = np.random.default_rng(1)
    for shape in ((4096,), (48, 48), (12, 12, 12)):
        f = rng.random(shape)
        yield (f"diff sums grid={'x'.join(map(str, shape))}",
               lambda f=f: _kernels._diff_sums_numba(f),
               lambda f=f: _kernels._diff_sums_numpy(f))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    args = ap.parse_args(argv)

    rows = []
    for name, jit, ref in cases():
        a, b = jit(), ref()
        err = float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
        tj, tr = _best(jit, args.repeat), _best(ref, args.repeat)
        rows.append({"case": name, "numba_s": tj, "numpy_s": tr, "speedup": tr / tj,
                     "max_rel_diff": err})
    if args.json:
        print(json.dumps(rows, indent=1))
        return
    print(f"{'case':36s} {'numba [s]':>11s} {'numpy [s]':>11s} {'speedup':>8s} {'rel diff':>9s}")
    for r in rows:
        print(f"{r['case']:36s} {r['numba_s']:11.3e} {r['numpy_s']:11.3e} "
              f"{r['speedup']:8.1f} {r['max_rel_diff']:9.1e}")


if __name__ == "__main__":
    main()

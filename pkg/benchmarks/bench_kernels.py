"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Both backends are imported directly, so one run compares them side by side
and checks that they agree bit for bit on every input.
"""
import argparse
import timeit

import numpy as np

from meshprint import _pykernels, expr, heightfield, mesh, slicer

try:
    from meshprint import _ckernels
except ImportError:
    _ckernels = None


def _cases():
    e = expr.parse_expression("10*sqrt(max(0,1-(x/10)^2-(y/10)^2))")
    hemi = mesh.tessellate_heightfield(heightfield.from_function(e, -10, 10, -10, 10, 5))
    rng = np.random.default_rng(1)
    terrain = mesh.tessellate_heightfield(heightfield.HeightField(rng.uniform(1, 20, size=(120, 120))))
    ring = slicer.slice_at(hemi, 3.0).contours[0].vertices
    return [
        ("slice_facets hemisphere z=3", "slice_facets", (hemi.vertices, 3.0)),
        ("slice_facets terrain z=10", "slice_facets", (terrain.vertices, 10.0)),
        (f"first_crossing {len(ring)}-gon", "first_crossing", (ring,)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled kernels not built; only the Python timings are shown")
    print(f"{'case':34} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for label, name, call_args in _cases():
        py = getattr(_pykernels, name)
        t_py = min(timeit.repeat(lambda: py(*call_args), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print(f"{label:34} {t_py:10.2f} {'-':>10} {'-':>8}")
            continue
        cy = getattr(_ckernels, name)
        a, b = np.asarray(py(*call_args)), np.asarray(cy(*call_args))
        if a.shape != b.shape or not np.array_equal(a.view(np.uint8), b.view(np.uint8)):
            raise SystemExit(f"{label}: backends disagree")
        t_cy = min(timeit.repeat(lambda: cy(*call_args), number=1, repeat=args.repeat)) * 1e3
        print(f"{label:34} {t_py:10.2f} {t_cy:10.2f} {t_py / t_cy:7.1f}x")


if __name__ == "__main__":
    main()

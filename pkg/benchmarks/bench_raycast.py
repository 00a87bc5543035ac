#!/usr/bin/env python3
"""Benchmark the compiled raycast kernel against the pure-NumPy fallback.

Usage: python benchmarks/bench_raycast.py [--triangles N] [--rays M] [--repeat K]
"""

import argparse
import time

import numpy as np

import infralidar._kernels_py as kernels_py

try:
    import infralidar._kernels as kernels_cy
except ImportError:
    kernels_cy = None

from infralidar.scene import MaterialSurface, Label, scene_from_triangles


def build_inputs(n_triangles: int, n_rays: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    anchor = rng.uniform(-50, 50, size=(n_triangles, 1, 3))
    jitter = rng.uniform(-4, 4, size=(n_triangles, 3, 3))
    jitter[:, 0, :] = 0.0
    verts = anchor + jitter
    mats = [MaterialSurface(0.2, 0.5, Label.OTHER, "m")]
    scene = scene_from_triangles(verts, np.zeros(n_triangles, dtype=int), mats)
    origins = np.ascontiguousarray(rng.uniform(-60, 60, size=(n_rays, 3)))
    dirs = rng.normal(size=(n_rays, 3))
    dirs = np.ascontiguousarray(dirs / np.linalg.norm(dirs, axis=1)[:, None])
    return scene, origins, dirs


def run(kernel, scene, origins, dirs):
    b = scene.accel
    return kernel.bvh_cast(b.node_min, b.node_max, b.node_left, b.node_right,
                           b.node_start, b.node_count, b.order,
                           scene.tri_v0, scene.tri_e1, scene.tri_e2,
                           origins, dirs, 0.0, np.inf)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--triangles", type=int, default=2000)
    ap.add_argument("--rays", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    scene, origins, dirs = build_inputs(args.triangles, args.rays)
    print(f"scene: {args.triangles} triangles, {scene.accel.n_nodes} BVH nodes; "
          f"{args.rays} rays, best of {args.repeat}")

    results = {}
    for name, kernel in [("cython", kernels_cy), ("python", kernels_py)]:
        if kernel is None:
            print(f"{name:8s} unavailable (extension not built)")
            continue
        run(kernel, scene, origins[:100], dirs[:100])  # warm up
        best = np.inf
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            tri, t = run(kernel, scene, origins, dirs)
            best = min(best, time.perf_counter() - t0)
        results[name] = (best, tri, t)
        print(f"{name:8s} {best * 1e3:9.1f} ms   {args.rays / best / 1e6:7.2f} Mray/s   "
              f"hits: {(tri >= 0).sum()}")

    if len(results) == 2:
        (tc, tri_c, t_c), (tp, tri_p, t_p) = results["cython"], results["python"]
        assert np.array_equal(tri_c, tri_p), "backends disagree on hit triangles"
        hits = tri_c >= 0
        assert np.allclose(t_c[hits], t_p[hits], rtol=1e-12), "backends disagree on distances"
        print(f"speedup: {tp / tc:.1f}x (outputs agree)")


if __name__ == "__main__":
    main()

"""Bounding volume hierarchy over triangle soups.

The tree is stored as flat arrays so both the compiled and the pure-NumPy
traversal kernels can consume it without touching Python objects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEAF_SIZE = 4


@dataclass(frozen=True)
class Bvh:
    """Flat-array BVH. Leaves reference a contiguous range of ``order``."""

    node_min: np.ndarray  # (m, 3) float64
    node_max: np.ndarray  # (m, 3) float64
    node_left: np.ndarray  # (m,) int32, -1 for leaves
    node_right: np.ndarray  # (m,) int32, -1 for leaves
    node_start: np.ndarray  # (m,) int32, first index into order (leaves)
    node_count: np.ndarray  # (m,) int32, triangle count (leaves)
    order: np.ndarray  # (n,) int32 permutation of triangle indices

    @property
    def n_nodes(self) -> int:
        return self.node_min.shape[0]


def build_bvh(centroids: np.ndarray, bounds_min: np.ndarray, bounds_max: np.ndarray,
              leaf_size: int = LEAF_SIZE) -> Bvh:
    """Top-down median-split build over per-triangle centroids and bounds.

    Handles the empty scene with a single empty leaf whose inverted bounds
    reject every ray.
    """
    n = centroids.shape[0]
    node_min: list[np.ndarray] = []
    node_max: list[np.ndarray] = []
    node_left: list[int] = []
    node_right: list[int] = []
    node_start: list[int] = []
    node_count: list[int] = []

    if n == 0:
        order = np.empty(0, dtype=np.int32)
        node_min.append(np.full(3, np.inf))
        node_max.append(np.full(3, -np.inf))
        node_left.append(-1)
        node_right.append(-1)
        node_start.append(0)
        node_count.append(0)
    else:
        order = np.arange(n, dtype=np.int32)
        # Stack of (start, stop, slot). Slot is the node index reserved for
        # the range before its children are known.
        def reserve() -> int:
            node_min.append(np.zeros(3))
            node_max.append(np.zeros(3))
            node_left.append(-1)
            node_right.append(-1)
            node_start.append(0)
            node_count.append(0)
            return len(node_left) - 1

        stack = [(0, n, reserve())]
        while stack:
            start, stop, slot = stack.pop()
            idx = order[start:stop]
            node_min[slot] = bounds_min[idx].min(axis=0)
            node_max[slot] = bounds_max[idx].max(axis=0)
            if stop - start <= leaf_size:
                node_start[slot] = start
                node_count[slot] = stop - start
                continue
            cent = centroids[idx]
            axis = int(np.argmax(cent.max(axis=0) - cent.min(axis=0)))
            local = np.argsort(cent[:, axis], kind="stable")
            order[start:stop] = idx[local]
            mid = start + (stop - start) // 2
            left = reserve()
            right = reserve()
            node_left[slot] = left
            node_right[slot] = right
            stack.append((start, mid, left))
            stack.append((mid, stop, right))

    def pack(arr, dtype):
        return np.ascontiguousarray(np.asarray(arr, dtype=dtype))

    return Bvh(
        node_min=pack(node_min, np.float64),
        node_max=pack(node_max, np.float64),
        node_left=pack(node_left, np.int32),
        node_right=pack(node_right, np.int32),
        node_start=pack(node_start, np.int32),
        node_count=pack(node_count, np.int32),
        order=np.ascontiguousarray(order),
    )

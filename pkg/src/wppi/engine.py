"""Deterministic shared-memory parallelism over network edges.

Work is split by assigning each edge to exactly one partition while vertices
may appear in several (their edges can land in different partitions); a
routing table records where each vertex's edges live. All maps scatter
results back into the canonical edge order and all reductions use a fixed
tree shape, so outputs are identical for any worker count.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import WeightedNetwork

_NO_IDENTITY = object()


class EdgeMapError(RuntimeError):
    """Raised when a per-edge function fails; carries the first failing edge."""

    def __init__(self, edge_index: int, cause: BaseException):
        super().__init__(f"edge map failed at edge {edge_index}: {cause!r}")
        self.edge_index = edge_index


@dataclass
class EdgePartitioning:
    """Disjoint edge partitions over a network's canonical edge order."""

    network: WeightedNetwork
    num_partitions: int
    members: list[np.ndarray]
    partition_of_edge: np.ndarray
    routing_table: dict[int, tuple[int, ...]]


def _hash_edge(i: int, j: int, k: int) -> int:
    # Explicit integer mix; Python's salted hash would break run-to-run determinism.
    return ((i * 2654435761 + j * 40503) & 0xFFFFFFFF) % k


def partition_edges(network: WeightedNetwork, k: int,
                    strategy: str = "range") -> EdgePartitioning:
    """Split edges into k partitions (range: contiguous over sorted order)."""
    if k < 1:
        raise ValueError("partition count must be >= 1")
    m = network.edge_count
    if k > m:
        warnings.warn(f"{k} partitions for {m} edges leaves some empty", stacklevel=2)
    partition_of_edge = np.empty(m, dtype=np.int64)
    if strategy == "range":
        base, extra = divmod(m, k)
        members = []
        start = 0
        for p in range(k):
            size = base + (1 if p < extra else 0)
            idx = np.arange(start, start + size, dtype=np.int64)
            members.append(idx)
            partition_of_edge[start:start + size] = p
            start += size
    elif strategy == "hash":
        for e in range(m):
            partition_of_edge[e] = _hash_edge(int(network.edge_src[e]),
                                              int(network.edge_dst[e]), k)
        members = [np.flatnonzero(partition_of_edge == p).astype(np.int64)
                   for p in range(k)]
    else:
        raise ValueError(f"unknown partition strategy: {strategy!r}")

    vertices = np.concatenate([network.edge_src, network.edge_dst])
    parts = np.concatenate([partition_of_edge, partition_of_edge])
    pair_keys = np.unique(vertices * np.int64(k) + parts)
    routing_table: dict[int, tuple[int, ...]] = {}
    for v, group in zip(*_split_by(pair_keys // k, pair_keys % k)):
        routing_table[int(v)] = tuple(int(p) for p in group)
    return EdgePartitioning(network, k, members, partition_of_edge, routing_table)


def _split_by(keys: np.ndarray, values: np.ndarray):
    """Group sorted-by-key values into per-key arrays."""
    if keys.size == 0:
        return [], []
    boundaries = np.flatnonzero(keys[1:] != keys[:-1]) + 1
    groups = np.split(values, boundaries)
    uniques = keys[np.concatenate([[0], boundaries])]
    return uniques, groups


def parallel_edge_map(partitioning: EdgePartitioning,
                      f: Callable[[int, int, float], object],
                      max_workers: int | None = None) -> list:
    """Apply a pure per-edge function, returning results in canonical edge order.

    Partitions run concurrently; on failure the error for the lowest global
    edge index wins.
    """
    net = partitioning.network
    results: list = [None] * net.edge_count
    failures: list[tuple[int, BaseException]] = []

    def run(idx: np.ndarray) -> None:
        for e in idx:
            e = int(e)
            try:
                results[e] = f(int(net.edge_src[e]), int(net.edge_dst[e]),
                               float(net.edge_weight[e]))
            except Exception as exc:  # noqa: BLE001 - reported with edge context
                failures.append((e, exc))
                return

    workers = max_workers or min(partitioning.num_partitions, os.cpu_count() or 1)
    if workers <= 1:
        for idx in partitioning.members:
            run(idx)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, partitioning.members))
    if failures:
        edge, cause = min(failures, key=lambda t: t[0])
        raise EdgeMapError(edge, cause) from cause
    return results


def parallel_batch_map(partitioning: EdgePartitioning,
                       kernel: Callable[[np.ndarray], np.ndarray],
                       max_workers: int | None = None) -> np.ndarray:
    """Apply a vectorized kernel to each partition's edge indices.

    The kernel must be row-independent (element e of its output depends only
    on edge e), which makes the scatter-by-index result identical to a
    single serial call.
    """
    net = partitioning.network
    out = np.empty(net.edge_count, dtype=np.float64)

    def run(idx: np.ndarray) -> None:
        if idx.size:
            out[idx] = kernel(idx)

    workers = max_workers or min(partitioning.num_partitions, os.cpu_count() or 1)
    if workers <= 1:
        for idx in partitioning.members:
            run(idx)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, partitioning.members))
    return out


def deterministic_reduce(values: Sequence, op: Callable,
                         identity=_NO_IDENTITY,
                         block_size: int = 1024,
                         max_workers: int = 1):
    """Reduce with a fixed two-level left-to-right tree.

    Values are folded in blocks of ``block_size`` and the block results are
    folded left to right, so the combination tree depends only on the input
    length. Blocks may be evaluated concurrently without changing the result.
    """
    n = len(values)
    if n == 0:
        if identity is _NO_IDENTITY:
            raise ValueError("empty reduction with no identity")
        return identity
    starts = range(0, n, block_size)

    def fold(start: int):
        acc = values[start]
        for i in range(start + 1, min(start + block_size, n)):
            acc = op(acc, values[i])
        return acc

    if max_workers > 1 and n > block_size:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            partials = list(pool.map(fold, starts))
    else:
        partials = [fold(s) for s in starts]
    acc = partials[0]
    for p in partials[1:]:
        acc = op(acc, p)
    return acc


def resolve_threads(requested: int | None) -> int:
    """Thread count from the request, WPPI_THREADS, or the hardware default."""
    if requested is not None:
        if requested < 1:
            raise ValueError("thread count must be >= 1")
        return requested
    env = os.environ.get("WPPI_THREADS")
    if env:
        value = int(env)
        if value < 1:
            raise ValueError("WPPI_THREADS must be >= 1")
        return value
    return os.cpu_count() or 1

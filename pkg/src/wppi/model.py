"""Core graph model: interned protein identifiers, interaction networks, partitions.

Networks are immutable once constructed and safe to share across threads.
A Partition is mutated only by a single writer (the detector); it keeps
per-community weight sums incrementally so modularity queries are O(1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np


@dataclass(frozen=True)
class ProteinId:
    """A protein with its dense vertex index and original label."""

    index: int
    label: str


class ProteinIndex:
    """Bijective label <-> index map, indices assigned by first appearance."""

    def __init__(self, labels: Iterable[str]):
        self._labels: list[str] = []
        self._index: dict[str, int] = {}
        for label in labels:
            if label not in self._index:
                self._index[label] = len(self._labels)
                self._labels.append(label)
        if not self._labels:
            raise ValueError("no proteins")

    def __len__(self) -> int:
        return len(self._labels)

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def __iter__(self) -> Iterator[str]:
        return iter(self._labels)

    @property
    def labels(self) -> list[str]:
        return list(self._labels)

    def index_of(self, label: str) -> int:
        return self._index[label]

    def label_of(self, index: int) -> str:
        return self._labels[index]

    def id_of(self, label: str) -> ProteinId:
        return ProteinId(self._index[label], label)


def intern_proteins(labels: Iterable[str]) -> ProteinIndex:
    """Intern protein labels into dense indices (duplicates collapse to the first)."""
    return ProteinIndex(labels)


class PpiNetwork:
    """Undirected, unweighted interaction network over interned vertices.

    Duplicate edges are ignored (first occurrence kept) and self-loops are
    dropped with a counted warning; both counters stay available on the
    instance for reporting.
    """

    def __init__(self, num_vertices: int):
        if num_vertices < 1:
            raise ValueError("empty network")
        self.num_vertices = num_vertices
        self._adjacency: list[set[int]] = [set() for _ in range(num_vertices)]
        self._edges: set[tuple[int, int]] = set()
        self.self_loops_dropped = 0
        self.duplicates_dropped = 0

    def add_edge(self, i: int, j: int) -> bool:
        """Record an undirected edge. Returns True if the edge is new."""
        if i == j:
            self.self_loops_dropped += 1
            return False
        if not (0 <= i < self.num_vertices and 0 <= j < self.num_vertices):
            raise ValueError(f"vertex out of range: ({i}, {j})")
        key = (i, j) if i < j else (j, i)
        if key in self._edges:
            self.duplicates_dropped += 1
            return False
        self._edges.add(key)
        self._adjacency[i].add(j)
        self._adjacency[j].add(i)
        return True

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Canonical (src, dst) index arrays, i < j, sorted lexicographically."""
        if not self._edges:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
        arr = np.fromiter((v for pair in self._edges for v in pair),
                          dtype=np.int64, count=2 * len(self._edges))
        src = arr[0::2]
        dst = arr[1::2]
        order = np.argsort(src * np.int64(self.num_vertices) + dst, kind="stable")
        return src[order], dst[order]

    def edges(self) -> list[tuple[int, int]]:
        """Edges as (i, j) with i < j, sorted lexicographically."""
        src, dst = self.edge_arrays()
        return list(zip(src.tolist(), dst.tolist()))

    def has_edge(self, i: int, j: int) -> bool:
        key = (i, j) if i < j else (j, i)
        return key in self._edges

    def neighbors(self, v: int) -> list[int]:
        return sorted(self._adjacency[v])

    def degree(self, v: int) -> int:
        return len(self._adjacency[v])


class WeightedNetwork:
    """Undirected network whose edges carry co-expression weights in [0, 1].

    Edges are held in canonical order (i < j, sorted lexicographically) with
    a CSR-style adjacency sorted by neighbor index, so per-vertex sums are
    reproducible bit for bit.
    """

    def __init__(self, num_vertices: int, weighted_edges: Iterable[tuple[int, int, float]]):
        rows = list(weighted_edges)
        if rows:
            arr = np.array(rows, dtype=np.float64)
            src = arr[:, 0].astype(np.int64)
            dst = arr[:, 1].astype(np.int64)
            wgt = arr[:, 2]
        else:
            src = np.empty(0, dtype=np.int64)
            dst = np.empty(0, dtype=np.int64)
            wgt = np.empty(0, dtype=np.float64)
        self._init_from_arrays(num_vertices, src, dst, wgt)

    @classmethod
    def from_arrays(cls, num_vertices: int, src: np.ndarray, dst: np.ndarray,
                    weights: np.ndarray) -> "WeightedNetwork":
        net = cls.__new__(cls)
        net._init_from_arrays(num_vertices, np.asarray(src, dtype=np.int64),
                              np.asarray(dst, dtype=np.int64),
                              np.asarray(weights, dtype=np.float64))
        return net

    def _init_from_arrays(self, num_vertices: int, src: np.ndarray,
                          dst: np.ndarray, wgt: np.ndarray) -> None:
        if num_vertices < 1:
            raise ValueError("empty network")
        if np.any(src == dst):
            v = int(src[np.argmax(src == dst)])
            raise ValueError(f"self-loop not allowed: ({v}, {v})")
        if src.size and (int(min(src.min(), dst.min())) < 0
                         or int(max(src.max(), dst.max())) >= num_vertices):
            raise ValueError("vertex out of range")
        if wgt.size and (float(wgt.min()) < 0.0 or float(wgt.max()) > 1.0):
            bad = wgt[(wgt < 0.0) | (wgt > 1.0)][0]
            raise ValueError(f"weight out of range [0, 1]: {bad!r}")

        # canonical order: i < j, sorted lexicographically, duplicates collapsed
        lo = np.minimum(src, dst)
        hi = np.maximum(src, dst)
        key = lo * np.int64(num_vertices) + hi
        order = np.argsort(key, kind="stable")
        key = key[order]
        wgt = wgt[order]
        if key.size:
            dup = key[1:] == key[:-1]
            if np.any(dup):
                if np.any(wgt[1:][dup] != wgt[:-1][dup]):
                    raise ValueError("conflicting duplicate edge")
                keep = np.concatenate([[True], ~dup])
                key = key[keep]
                wgt = wgt[keep]
        self.num_vertices = num_vertices
        self.edge_src = key // num_vertices
        self.edge_dst = key % num_vertices
        self.edge_weight = wgt
        self.edge_count = int(key.size)

        # CSR adjacency over both directions, neighbors ascending per vertex.
        adj_src = np.concatenate([self.edge_src, self.edge_dst])
        adj_dst = np.concatenate([self.edge_dst, self.edge_src])
        adj_w = np.concatenate([self.edge_weight, self.edge_weight])
        order = np.lexsort((adj_dst, adj_src))
        self._adj_src = adj_src[order]
        self._adj_dst = adj_dst[order]
        self._adj_w = adj_w[order]
        self._indptr = np.zeros(num_vertices + 1, dtype=np.int64)
        counts = np.bincount(self._adj_src, minlength=num_vertices)
        np.cumsum(counts, out=self._indptr[1:])
        self._degrees = np.zeros(num_vertices, dtype=np.float64)
        nonempty = counts > 0
        if np.any(nonempty):
            starts = self._indptr[:-1][nonempty]
            self._degrees[nonempty] = np.add.reduceat(self._adj_w, starts)

    def edges(self) -> list[tuple[int, int, float]]:
        return [
            (int(i), int(j), float(w))
            for i, j, w in zip(self.edge_src, self.edge_dst, self.edge_weight)
        ]

    def neighbors(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        """(neighbor indices, weights), ascending by neighbor."""
        s, e = self._indptr[v], self._indptr[v + 1]
        return self._adj_dst[s:e], self._adj_w[s:e]

    def weighted_degree(self, v: int) -> float:
        return float(self._degrees[v])

    @property
    def degrees(self) -> np.ndarray:
        return self._degrees

    def scaled(self, alpha: float) -> "WeightedNetwork":
        """Copy with every edge weight multiplied by alpha (result must stay in [0, 1])."""
        return WeightedNetwork(
            self.num_vertices,
            [(int(i), int(j), float(w) * alpha)
             for i, j, w in zip(self.edge_src, self.edge_dst, self.edge_weight)],
        )


class Partition:
    """Disjoint vertex -> community assignment with cached weight sums.

    ``internal_sum[k]`` is the sum over members of their weight to other
    members (each internal edge counted from both endpoints);
    ``external_sum[k]`` is the total weight crossing the community boundary.
    Vertices not yet assigned carry the sentinel ``UNASSIGNED``.
    """

    UNASSIGNED = -1

    def __init__(self, network: WeightedNetwork):
        self.network = network
        self.assignment: list[int] = [self.UNASSIGNED] * network.num_vertices
        self.communities: dict[int, set[int]] = {}
        self.internal_sum: dict[int, float] = {}
        self.external_sum: dict[int, float] = {}
        self._next_id = 0

    def copy(self) -> "Partition":
        dup = Partition.__new__(Partition)
        dup.network = self.network
        dup.assignment = list(self.assignment)
        dup.communities = {k: set(v) for k, v in self.communities.items()}
        dup.internal_sum = dict(self.internal_sum)
        dup.external_sum = dict(self.external_sum)
        dup._next_id = self._next_id
        return dup

    def community_ids(self) -> list[int]:
        return sorted(self.communities)

    def community_of(self, v: int) -> int:
        return self.assignment[v]

    def vertices_of(self, k: int) -> set[int]:
        return self.communities[k]

    def is_total(self) -> bool:
        return all(a != self.UNASSIGNED for a in self.assignment)

    def weight_to(self, v: int, k: int) -> float:
        """Total edge weight from v into community k (ascending-neighbor order)."""
        idx, wgt = self.network.neighbors(v)
        assign = self.assignment
        total = 0.0
        for u, w in zip(idx, wgt):
            if assign[u] == k:
                total += float(w)
        return total

    def new_community(self, v: int) -> int:
        """Start a fresh singleton community holding v (v must be unassigned)."""
        if self.assignment[v] != self.UNASSIGNED:
            raise ValueError(f"vertex {v} already assigned")
        k = self._next_id
        self._next_id += 1
        self.assignment[v] = k
        self.communities[k] = {v}
        self.internal_sum[k] = 0.0
        self.external_sum[k] = self.network.weighted_degree(v)
        return k

    def move(self, v: int, k: int) -> None:
        """Assign v to community k, detaching it from its current community."""
        if k not in self.communities:
            raise ValueError(f"unknown community {k}")
        src = self.assignment[v]
        if src == k:
            return
        deg = self.network.weighted_degree(v)
        if src != self.UNASSIGNED:
            w_src = self.weight_to(v, src)
            self.communities[src].discard(v)
            self.internal_sum[src] -= 2.0 * w_src
            self.external_sum[src] += 2.0 * w_src - deg
            if not self.communities[src]:
                del self.communities[src]
                del self.internal_sum[src]
                del self.external_sum[src]
            self.assignment[v] = self.UNASSIGNED
        w_dst = self.weight_to(v, k)
        self.assignment[v] = k
        self.communities[k].add(v)
        self.internal_sum[k] += 2.0 * w_dst
        self.external_sum[k] += deg - 2.0 * w_dst

    def recomputed_sums(self, k: int) -> tuple[float, float]:
        """Brute-force (internal, external) sums for community k, for validation."""
        members = self.communities[k]
        internal = 0.0
        external = 0.0
        for v in sorted(members):
            idx, wgt = self.network.neighbors(v)
            for u, w in zip(idx, wgt):
                if u in members:
                    internal += float(w)
                else:
                    external += float(w)
        return internal, external

    def cache_drift(self) -> float:
        """Max absolute difference between cached and recomputed sums."""
        worst = 0.0
        for k in self.communities:
            internal, external = self.recomputed_sums(k)
            worst = max(worst, abs(internal - self.internal_sum[k]),
                        abs(external - self.external_sum[k]))
        return worst

    @classmethod
    def from_communities(cls, network: WeightedNetwork,
                         groups: Sequence[Iterable[int]]) -> "Partition":
        """Build a total partition from explicit vertex groups (sums recomputed exactly)."""
        part = cls(network)
        for members in groups:
            members = sorted(members)
            if not members:
                continue
            k = part.new_community(members[0])
            for v in members[1:]:
                if part.assignment[v] != cls.UNASSIGNED:
                    raise ValueError(f"vertex {v} listed in two groups")
                part.assignment[v] = k
                part.communities[k].add(v)
        for k in part.communities:
            internal, external = part.recomputed_sums(k)
            part.internal_sum[k] = internal
            part.external_sum[k] = external
        if not part.is_total():
            raise ValueError("groups do not cover every vertex")
        return part

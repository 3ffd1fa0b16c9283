"""Two-stage agglomerative community detection on weighted networks.

Stage 1 seeds communities at hub vertices (weighted degree above a
threshold, mean degree by default) and grows them greedily: each sweep, a
community appends the adjacent vertex whose move raises the summed
community modularity the most. A move that pulls a vertex out of another
community is accepted only if the target's gain exceeds the source's loss,
which makes the total modularity strictly increasing and guarantees
termination on a partition where no single appendable vertex improves it.

Stage 2 compresses stage-1 communities into super-vertices and merges them
whenever the merged group's functional cohesion (interaction intensity
times connectivity) stays at or above the configured threshold.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import Partition, WeightedNetwork

SATURATION_EPS = 1e-12
STAGE1_SWEEP_CAP = 10_000


@dataclass
class HubConfig:
    """Detector thresholds.

    ``hub_threshold`` is the weighted-degree cutoff for seeding (mean
    weighted degree when None). ``cohesion_threshold`` is the stage-2
    acceptance bound; values in (1.0, 3.0) work well in practice.
    """

    hub_threshold: float | None = None
    cohesion_threshold: float = 2.0
    max_stage2_passes: int = 32

    def __post_init__(self):
        if self.hub_threshold is not None and self.hub_threshold < 0:
            raise ValueError("hub threshold must be >= 0")
        if self.cohesion_threshold <= 0:
            raise ValueError("cohesion threshold must be > 0")
        if self.max_stage2_passes < 1:
            raise ValueError("stage-2 pass cap must be >= 1")


def _q(internal: float, external: float) -> float:
    # Isolated communities (no boundary weight) saturate instead of dividing by
    # zero; the clamp also absorbs sub-epsilon drift in the incremental sums.
    return internal / max(external, SATURATION_EPS)


def weighted_degree(network: WeightedNetwork, v: int) -> float:
    """Sum of incident edge weights."""
    return network.weighted_degree(v)


def mean_weighted_degree(network: WeightedNetwork) -> float:
    total = 0.0
    for v in range(network.num_vertices):
        total += network.weighted_degree(v)
    return total / network.num_vertices


def select_hubs(network: WeightedNetwork, config: HubConfig | None = None) -> Partition:
    """Seed a partition with one singleton community per hub vertex.

    Hubs are vertices whose weighted degree strictly exceeds the threshold.
    If nothing qualifies (all degrees equal, or the threshold sits above the
    maximum), every vertex is seeded instead.
    """
    if network.num_vertices < 1:
        raise ValueError("empty network")
    config = config or HubConfig()
    threshold = config.hub_threshold
    if threshold is None:
        threshold = mean_weighted_degree(network)
    hubs = [v for v in range(network.num_vertices)
            if network.weighted_degree(v) > threshold]
    if not hubs:
        hubs = list(range(network.num_vertices))
    seeds = Partition(network)
    for v in hubs:
        seeds.new_community(v)
    return seeds


def community_modularity(partition: Partition, k: int) -> float:
    """Ratio of a community's internal weight sum to its boundary weight sum."""
    if k not in partition.communities or not partition.communities[k]:
        raise ValueError("empty community")
    return _q(partition.internal_sum[k], partition.external_sum[k])


def delta_modularity(partition: Partition, k: int, v: int) -> float:
    """Modularity change of community k if vertex v were appended."""
    if k not in partition.communities:
        raise ValueError("empty community")
    if partition.assignment[v] == k:
        raise ValueError(f"vertex {v} already in community {k}")
    idx, _ = partition.network.neighbors(v)
    members = partition.communities[k]
    if not any(int(u) in members for u in idx):
        raise ValueError(f"vertex {v} is not adjacent to community {k}")
    w_in = partition.weight_to(v, k)
    deg = partition.network.weighted_degree(v)
    before = _q(partition.internal_sum[k], partition.external_sum[k])
    after = _q(partition.internal_sum[k] + 2.0 * w_in,
               partition.external_sum[k] + deg - 2.0 * w_in)
    return after - before


def move_gain(partition: Partition, k: int, v: int) -> float:
    """Summed-modularity change of moving v into k (source loss included)."""
    gain = delta_modularity(partition, k, v)
    src = partition.assignment[v]
    if src != Partition.UNASSIGNED:
        q_old = _q(partition.internal_sum[src], partition.external_sum[src])
        if len(partition.communities[src]) == 1:
            q_new = 0.0
        else:
            w_src = partition.weight_to(v, src)
            deg = partition.network.weighted_degree(v)
            q_new = _q(partition.internal_sum[src] - 2.0 * w_src,
                       partition.external_sum[src] - (deg - 2.0 * w_src))
        gain += q_new - q_old
    return gain


@dataclass
class Stage1Result:
    partition: Partition
    seeded_ids: tuple[int, ...]
    promoted_vertices: tuple[int, ...]
    sweeps: int
    hit_cap: bool


def _gather_candidates(partition: Partition, k: int) -> list[int]:
    members = partition.communities[k]
    seen: set[int] = set()
    for m in members:
        idx, _ = partition.network.neighbors(m)
        seen.update(int(u) for u in idx)
    seen -= members
    return sorted(seen)


def _best_move(partition: Partition, k: int, candidates: Sequence[int],
               pool: ThreadPoolExecutor | None = None) -> tuple[int, float] | None:
    """Candidate with the largest positive gain; ties go to the lowest index."""
    if not candidates:
        return None
    if pool is not None and len(candidates) >= 64:
        gains = list(pool.map(lambda v: move_gain(partition, k, v), candidates))
    else:
        gains = [move_gain(partition, k, v) for v in candidates]
    best_v = None
    best_gain = 0.0
    for v, g in zip(candidates, gains):
        if g > best_gain:
            best_v, best_gain = v, g
    if best_v is None:
        return None
    return best_v, best_gain


def stage1_agglomerate(network: WeightedNetwork, seeds: Partition,
                       config: HubConfig | None = None,
                       threads: int = 1) -> Stage1Result:
    """Grow seed communities until no single vertex move improves modularity.

    Communities are visited in ascending id order each sweep and append at
    most one vertex per visit. After convergence (or the sweep cap), any
    vertex still unassigned becomes its own singleton community so the
    returned partition is total.
    """
    partition = seeds.copy()
    sweeps = 0
    hit_cap = False
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        while True:
            if sweeps >= STAGE1_SWEEP_CAP:
                warnings.warn("stage-1 sweep cap reached; returning current partition",
                              stacklevel=2)
                hit_cap = True
                break
            sweeps += 1
            changed = False
            for k in partition.community_ids():
                if k not in partition.communities:
                    continue  # emptied by a steal earlier in this sweep
                best = _best_move(partition, k, _gather_candidates(partition, k), pool)
                if best is not None:
                    partition.move(best[0], k)
                    changed = True
            if not changed:
                break
    finally:
        if pool is not None:
            pool.shutdown()
    seeded = tuple(partition.community_ids())
    promoted = tuple(v for v in range(network.num_vertices)
                     if partition.assignment[v] == Partition.UNASSIGNED)
    for v in promoted:
        partition.new_community(v)
    return Stage1Result(partition=partition, seeded_ids=seeded,
                        promoted_vertices=promoted, sweeps=sweeps, hit_cap=hit_cap)


@dataclass
class CompressedNetwork:
    """Stage-1 communities folded into super-vertices.

    ``degrees`` aggregates the members' original weighted degrees;
    super-edges aggregate the original weights crossing two communities,
    while weights internal to a community are kept in ``self_weights``
    (they never count as super-edges).
    """

    members: list[list[int]]
    degrees: np.ndarray
    self_weights: np.ndarray
    edges: list[tuple[int, int, float]]
    neighbors: list[dict[int, float]]
    mean_neighbor_weight: np.ndarray

    @property
    def num_vertices(self) -> int:
        return len(self.members)


def compress(network: WeightedNetwork, partition: Partition) -> CompressedNetwork:
    """Fold each community of a total partition into one super-vertex."""
    if not partition.is_total():
        raise ValueError("partition must be total before compression")
    ids = partition.community_ids()
    remap = {cid: i for i, cid in enumerate(ids)}
    members = [sorted(partition.communities[cid]) for cid in ids]
    k = len(ids)

    degrees = np.zeros(k, dtype=np.float64)
    for sv, group in enumerate(members):
        total = 0.0
        for v in group:
            total += network.weighted_degree(v)
        degrees[sv] = total

    self_weights = np.zeros(k, dtype=np.float64)
    cross: dict[tuple[int, int], float] = {}
    for i, j, w in network.edges():
        a = remap[partition.assignment[i]]
        b = remap[partition.assignment[j]]
        if a == b:
            self_weights[a] += w
        else:
            key = (a, b) if a < b else (b, a)
            cross[key] = cross.get(key, 0.0) + w

    edges = [(a, b, w) for (a, b), w in sorted(cross.items())]
    neighbors: list[dict[int, float]] = [dict() for _ in range(k)]
    for a, b, w in edges:
        neighbors[a][b] = w
        neighbors[b][a] = w
    mnw = np.zeros(k, dtype=np.float64)
    for sv in range(k):
        if neighbors[sv]:
            total = 0.0
            for u in sorted(neighbors[sv]):
                total += neighbors[sv][u]
            mnw[sv] = total / len(neighbors[sv])
    return CompressedNetwork(members=members, degrees=degrees,
                             self_weights=self_weights, edges=edges,
                             neighbors=neighbors, mean_neighbor_weight=mnw)


def connectivity(member_count: int, internal_edge_count: int) -> float:
    """Realized fraction of the possible edges among a group's members."""
    if member_count < 2:
        raise ValueError("connectivity undefined for singleton")
    if internal_edge_count < 0:
        raise ValueError("edge count must be >= 0")
    return 2.0 * internal_edge_count / (member_count * (member_count - 1))


def _internal_stats(compressed: CompressedNetwork,
                    members: Sequence[int]) -> tuple[int, float]:
    group = sorted(set(members))
    count = 0
    weight = 0.0
    for pos, a in enumerate(group):
        row = compressed.neighbors[a]
        for b in group[pos + 1:]:
            if b in row:
                count += 1
                weight += row[b]
    return count, weight


def interaction_intensity(compressed: CompressedNetwork,
                          members: Iterable[int]) -> float:
    """Internal super-edge weight relative to the members' mean neighbor weights."""
    group = sorted(set(members))
    if len(group) < 2:
        raise ValueError("interaction intensity needs at least 2 members")
    denom = 0.0
    for sv in group:
        if not compressed.neighbors[sv]:
            raise ValueError("isolated super-vertex")
        denom += float(compressed.mean_neighbor_weight[sv])
    count, weight = _internal_stats(compressed, group)
    if count == 0:
        raise ValueError("no internal edges")
    return 2.0 * weight / denom


def functional_cohesion(compressed: CompressedNetwork,
                        members: Iterable[int]) -> float:
    """Interaction intensity times connectivity of a super-vertex group."""
    group = sorted(set(members))
    count, _ = _internal_stats(compressed, group)
    return interaction_intensity(compressed, group) * connectivity(len(group), count)


@dataclass
class _GroupState:
    """Incrementally maintained cohesion inputs for one stage-2 community."""

    members: set[int]
    edge_count: int = 0
    internal_weight: float = 0.0
    mnw_sum: float = 0.0

    def cohesion_with(self, compressed: CompressedNetwork, sv: int) -> float | None:
        links = 0
        weight = 0.0
        for u, w in compressed.neighbors[sv].items():
            if u in self.members:
                links += 1
                weight += w
        n = len(self.members) + 1
        e = self.edge_count + links
        if e == 0:
            return None
        ii = 2.0 * (self.internal_weight + weight) / (self.mnw_sum
                                                      + float(compressed.mean_neighbor_weight[sv]))
        return ii * (2.0 * e / (n * (n - 1)))

    def add(self, compressed: CompressedNetwork, sv: int) -> None:
        for u, w in compressed.neighbors[sv].items():
            if u in self.members:
                self.edge_count += 1
                self.internal_weight += w
        self.members.add(sv)
        self.mnw_sum += float(compressed.mean_neighbor_weight[sv])

    def remove(self, compressed: CompressedNetwork, sv: int) -> None:
        self.members.discard(sv)
        for u, w in compressed.neighbors[sv].items():
            if u in self.members:
                self.edge_count -= 1
                self.internal_weight -= w
        self.mnw_sum -= float(compressed.mean_neighbor_weight[sv])


@dataclass
class Stage2Result:
    groups: dict[int, set[int]]
    passes: int
    hit_cap: bool


def stage2_refine(compressed: CompressedNetwork,
                  config: HubConfig | None = None) -> Stage2Result:
    """Merge super-vertices while the grown group's cohesion clears the threshold.

    Super-vertices start as singleton groups and are visited in descending
    aggregated-degree order (ties to the lower index); each neighbor is
    tentatively appended to the visited vertex's group and kept only if the
    group's functional cohesion is still >= the threshold.
    """
    config = config or HubConfig()
    lam = config.cohesion_threshold
    k = compressed.num_vertices
    assign = list(range(k))
    states: dict[int, _GroupState] = {}
    for sv in range(k):
        state = _GroupState(members=set())
        state.add(compressed, sv)
        states[sv] = state
    order = sorted(range(k), key=lambda sv: (-float(compressed.degrees[sv]), sv))

    passes = 0
    hit_cap = False
    while True:
        if passes >= config.max_stage2_passes:
            warnings.warn("stage-2 pass cap reached; returning current grouping",
                          stacklevel=2)
            hit_cap = True
            break
        passes += 1
        changed = False
        for sv in order:
            home = assign[sv]
            for u in sorted(compressed.neighbors[sv]):
                if assign[u] == home:
                    continue
                value = states[home].cohesion_with(compressed, u)
                if value is not None and value >= lam:
                    old = assign[u]
                    states[old].remove(compressed, u)
                    if not states[old].members:
                        del states[old]
                    states[home].add(compressed, u)
                    assign[u] = home
                    changed = True
        if not changed:
            break
    groups = {gid: set(state.members) for gid, state in states.items()}
    return Stage2Result(groups=groups, passes=passes, hit_cap=hit_cap)


@dataclass
class CommunityReport:
    community_id: int
    vertices: list[int]
    modularity: float
    functional_cohesion: float | None


@dataclass
class DetectionResult:
    partition: Partition
    communities: list[CommunityReport]
    hub_threshold: float
    hub_count: int
    stage1_communities: int
    stage1_sweeps: int
    stage1_hit_cap: bool
    stage2_passes: int
    stage2_hit_cap: bool


def detect(network: WeightedNetwork, config: HubConfig | None = None,
           threads: int = 1) -> DetectionResult:
    """Run the full two-stage detection and report per-community metrics."""
    if network.num_vertices < 1:
        raise ValueError("empty network")
    config = config or HubConfig()
    threshold = config.hub_threshold
    if threshold is None:
        threshold = mean_weighted_degree(network)
    effective = HubConfig(hub_threshold=threshold,
                          cohesion_threshold=config.cohesion_threshold,
                          max_stage2_passes=config.max_stage2_passes)
    seeds = select_hubs(network, effective)
    hub_count = len(seeds.communities)
    stage1 = stage1_agglomerate(network, seeds, effective, threads=threads)
    compressed = compress(network, stage1.partition)
    stage2 = stage2_refine(compressed, effective)

    expanded: list[tuple[list[int], list[int]]] = []
    for gid in stage2.groups:
        supers = sorted(stage2.groups[gid])
        vertices: list[int] = []
        for sv in supers:
            vertices.extend(compressed.members[sv])
        expanded.append((sorted(vertices), supers))
    expanded.sort(key=lambda pair: pair[0][0])

    final = Partition.from_communities(network, [vs for vs, _ in expanded])
    reports: list[CommunityReport] = []
    for cid, (vertices, supers) in enumerate(expanded):
        fc = functional_cohesion(compressed, supers) if len(supers) >= 2 else None
        reports.append(CommunityReport(
            community_id=cid,
            vertices=vertices,
            modularity=community_modularity(final, final.assignment[vertices[0]]),
            functional_cohesion=fc,
        ))
    return DetectionResult(
        partition=final,
        communities=reports,
        hub_threshold=threshold,
        hub_count=hub_count,
        stage1_communities=len(stage1.partition.communities),
        stage1_sweeps=stage1.sweeps,
        stage1_hit_cap=stage1.hit_cap,
        stage2_passes=stage2.passes,
        stage2_hit_cap=stage2.hit_cap,
    )

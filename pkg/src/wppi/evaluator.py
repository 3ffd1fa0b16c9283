"""Scoring detected communities against complex catalogues and annotations.

Two matching conventions are reported side by side because published tables
mix them: the squared-overlap score |A∩B|^2 / (|A|·|B|) and the plain
recall |A∩B| / |B| against the catalogue entry. Enrichment uses the exact
hypergeometric upper tail computed in log-gamma space.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping

DEFAULT_MATCH_THRESHOLD = 0.10


@dataclass
class ComplexCatalogue:
    """Named reference complexes, each a set of protein labels."""

    entries: list[tuple[str, frozenset[str]]]

    def __post_init__(self):
        names = set()
        for name, members in self.entries:
            if name in names:
                raise ValueError(f"duplicate complex name: {name!r}")
            names.add(name)
            if len(members) < 2:
                raise ValueError(f"complex {name!r} has fewer than 2 proteins")

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class AnnotationSet:
    """Annotation term -> set of protein labels carrying it."""

    terms: dict[str, frozenset[str]]

    def __post_init__(self):
        for term, members in self.terms.items():
            if not members:
                raise ValueError(f"annotation term {term!r} has no proteins")

    def annotated_proteins(self) -> frozenset[str]:
        out: set[str] = set()
        for members in self.terms.values():
            out |= members
        return frozenset(out)


def overlap_score(pc: Iterable[str], kc: Iterable[str]) -> float:
    """Squared intersection over the size product; 1.0 only for identical sets."""
    a = set(pc)
    b = set(kc)
    if not a or not b:
        raise ValueError("overlap score undefined for empty sets")
    inter = len(a & b)
    return (inter * inter) / (len(a) * len(b))


def recall_ratio(pc: Iterable[str], kc: Iterable[str]) -> float:
    """Fraction of the reference set recovered by the detected community."""
    a = set(pc)
    b = set(kc)
    if not b:
        raise ValueError("recall undefined for an empty reference set")
    return len(a & b) / len(b)


@dataclass
class ComplexMatch:
    community_id: int
    community_size: int
    complex_name: str
    complex_size: int
    overlap: int
    score: float
    recall: float
    matched: bool


@dataclass
class MatchReport:
    threshold: float
    matches: list[ComplexMatch]
    matched_count: int
    total: int


def match_complexes(communities: Mapping[int, Iterable[str]],
                    catalogue: ComplexCatalogue,
                    threshold: float = DEFAULT_MATCH_THRESHOLD) -> MatchReport:
    """Best catalogue entry per community; matched when the score clears the threshold.

    A catalogue complex may be the best match of several communities. Ties on
    the score go to the earlier catalogue entry.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must lie in (0, 1]")
    matches: list[ComplexMatch] = []
    if not catalogue.entries:
        warnings.warn("empty catalogue; nothing to match", stacklevel=2)
        return MatchReport(threshold, [], 0, len(communities))
    for cid in sorted(communities):
        members = set(communities[cid])
        if not members:
            continue
        best = None
        for name, reference in catalogue.entries:
            score = overlap_score(members, reference)
            if best is None or score > best[0]:
                best = (score, name, reference)
        score, name, reference = best
        matches.append(ComplexMatch(
            community_id=cid,
            community_size=len(members),
            complex_name=name,
            complex_size=len(reference),
            overlap=len(members & reference),
            score=score,
            recall=recall_ratio(members, reference),
            matched=score >= threshold,
        ))
    matched = sum(1 for m in matches if m.matched)
    return MatchReport(threshold, matches, matched, len(matches))


def _log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def hypergeom_pvalue(population: int, community_size: int,
                     group_size: int, overlap: int) -> float:
    """Upper-tail probability of drawing at least ``overlap`` annotated proteins.

    Computed as 1 minus the lower tail, with each term exponentiated from
    log-binomials and accumulated by compensated summation; the result is
    clamped into [0, 1].
    """
    if population < 0:
        raise ValueError("population must be >= 0")
    if not 0 <= community_size <= population:
        raise ValueError("community size must satisfy 0 <= size <= population")
    if not 0 <= group_size <= population:
        raise ValueError("group size must satisfy 0 <= size <= population")
    if not 0 <= overlap <= min(community_size, group_size):
        raise ValueError("overlap must satisfy 0 <= overlap <= min(community, group)")
    if overlap == 0:
        return 1.0
    log_denom = _log_comb(population, community_size)
    total = 0.0
    carry = 0.0
    for i in range(overlap):
        remaining = community_size - i
        if remaining > population - group_size:
            continue  # impossible draw, zero term
        term = math.exp(_log_comb(group_size, i)
                        + _log_comb(population - group_size, remaining)
                        - log_denom)
        y = term - carry
        t = total + y
        carry = (t - total) - y
        total = t
    return min(1.0, max(0.0, 1.0 - total))


@dataclass
class EnrichmentRecord:
    community_id: int
    community_size: int
    term: str
    group_size: int
    overlap: int
    p_value: float


def enrich(communities: Mapping[int, Iterable[str]],
           annotations: AnnotationSet,
           population: int) -> list[EnrichmentRecord]:
    """Best-enriched annotation term per community, sorted by p-value.

    Communities without any annotated member are reported under the term
    ``unannotated`` with p = 1.0.
    """
    records: list[EnrichmentRecord] = []
    for cid in sorted(communities):
        members = set(communities[cid])
        if population < len(members):
            raise ValueError("population smaller than a community")
        best: tuple[float, str, int, int] | None = None
        for term in sorted(annotations.terms):
            group = annotations.terms[term]
            overlap = len(members & group)
            if overlap == 0:
                continue
            p = hypergeom_pvalue(population, len(members), len(group), overlap)
            if best is None or (p, term) < (best[0], best[1]):
                best = (p, term, len(group), overlap)
        if best is None:
            records.append(EnrichmentRecord(cid, len(members), "unannotated", 0, 0, 1.0))
        else:
            p, term, group_size, overlap = best
            records.append(EnrichmentRecord(cid, len(members), term, group_size,
                                            overlap, p))
    records.sort(key=lambda r: (r.p_value, r.community_id))
    return records

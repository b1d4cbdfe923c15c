"""Lexicographical acyclic partial matching and critical-simplex counts.

Each simplex s with a vertex j < min(s) such that s + {j} is present is
paired with s + {min such j}.  A simplex in no pair is critical; vertex
{1} always is.  Counting uses the closed-form membership test below
rather than materialising the matching, which only the tooling and the
test suite need.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from .complexes import (
    SimplicialComplex,
    iter_bits,
    mask_of,
    min_vertex,
    vertices_of,
)


class Classification(enum.Enum):
    MATCHED_UP = "matched_up"       # paired with a coface
    MATCHED_DOWN = "matched_down"   # paired with its face
    CRITICAL = "critical"


@dataclass(frozen=True)
class Matching:
    """Partial matching as (face, coface) pairs of sorted vertex tuples."""

    pairs: frozenset[tuple[tuple[int, ...], tuple[int, ...]]]

    def __len__(self) -> int:
        return len(self.pairs)

    def matched_simplices(self) -> set[tuple[int, ...]]:
        out: set[tuple[int, ...]] = set()
        for face, coface in self.pairs:
            out.add(face)
            out.add(coface)
        return out


@dataclass(frozen=True)
class CriticalCounts:
    """by_size[k-1] = number of critical simplices on k vertices."""

    by_size: tuple[int, ...]

    def alternating_sum(self) -> int:
        return sum((-1) ** i * c for i, c in enumerate(self.by_size))


def _classify_mask(K: SimplicialComplex, m: int, size: int) -> Classification:
    mn = min_vertex(m)
    up_set = K.masks_of_size(size + 1)
    for j in range(mn - 1):
        if m | (1 << j) in up_set:
            return Classification.MATCHED_UP
    if size >= 2:
        rest = m ^ (1 << (mn - 1))
        same_set = K.masks_of_size(size)
        for j in range(mn - 1):
            if rest | (1 << j) in same_set:
                return Classification.CRITICAL
        return Classification.MATCHED_DOWN
    return Classification.CRITICAL


def classify_simplex(K: SimplicialComplex, t: Iterable[int]) -> Classification:
    """Match status of a simplex under the lexicographical matching.

    Raises ValueError if t is not a simplex of K.  A vertex is never
    matched with a face, so any unmatched vertex is critical.
    """
    vs = tuple(sorted(set(t)))
    m = mask_of(vs)
    if not K.has_mask(m, len(vs)):
        raise ValueError(f"{vs} is not a simplex of the complex")
    return _classify_mask(K, m, len(vs))


def lexicographic_matching(K: SimplicialComplex) -> Matching:
    """Construct the full matching; each simplex occurs in at most one pair."""
    pairs = []
    used: set[tuple[int, int]] = set()
    for size in range(1, K.dimension + 2):
        up_set = K.masks_of_size(size + 1)
        for m in K.masks_of_size(size):
            mn = min_vertex(m)
            for j in range(mn - 1):
                cof = m | (1 << j)
                if cof in up_set:
                    pairs.append((vertices_of(m), vertices_of(cof)))
                    key_face = (size, m)
                    key_cof = (size + 1, cof)
                    assert key_face not in used and key_cof not in used, (
                        "simplex would appear in two pairs")
                    used.add(key_face)
                    used.add(key_cof)
                    break  # j is min I(m); first hit wins
    return Matching(frozenset(pairs))


def critical_counts(K: SimplicialComplex, max_size: int) -> CriticalCounts:
    """Critical-simplex tally by size, for sizes 1..max_size."""
    if max_size < 1:
        raise ValueError(f"max_size must be >= 1, got {max_size}")
    counts = []
    for size in range(1, max_size + 1):
        c = 0
        faces = K.masks_of_size(size)
        if faces:
            up_set = K.masks_of_size(size + 1)
            same_set = faces
            for m in faces:
                mn = min_vertex(m)
                matched = False
                for j in range(mn - 1):
                    if m | (1 << j) in up_set:
                        matched = True
                        break
                if matched:
                    continue
                if size >= 2:
                    rest = m ^ (1 << (mn - 1))
                    down = True
                    for j in range(mn - 1):
                        if rest | (1 << j) in same_set:
                            down = False
                            break
                    if down:
                        continue
                c += 1
        counts.append(c)
    return CriticalCounts(tuple(counts))


def _validate_matching(K: SimplicialComplex, V: Matching) -> None:
    seen: set[tuple[int, ...]] = set()
    for face, coface in V.pairs:
        if len(coface) - len(face) != 1 or not set(face) <= set(coface):
            raise ValueError(f"pair {face} <-> {coface} is not a codimension-1 incidence")
        if not (K.contains(face) and K.contains(coface)):
            raise ValueError(f"pair {face} <-> {coface} not contained in the complex")
        for s in (face, coface):
            if s in seen:
                raise ValueError(f"simplex {s} appears in two pairs")
            seen.add(s)


def verify_acyclic(K: SimplicialComplex, V: Matching) -> bool:
    """True iff no V-path returns to its start.

    Checks the modified face digraph: matched incidences point upward,
    all other codimension-1 incidences point downward; the matching is
    acyclic iff this digraph has no directed cycle.  Raises ValueError
    for structurally invalid matchings.
    """
    _validate_matching(K, V)
    matched_up: dict[tuple[int, ...], tuple[int, ...]] = {f: c for f, c in V.pairs}
    edges: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
    for size in range(2, K.dimension + 2):
        for m in K.masks_of_size(size):
            t = vertices_of(m)
            for i in range(size):
                face = t[:i] + t[i + 1:]
                if matched_up.get(face) == t:
                    edges.setdefault(face, []).append(t)
                else:
                    edges.setdefault(t, []).append(face)
    # iterative DFS three-colour cycle detection
    WHITE, GREY, BLACK = 0, 1, 2
    colour: dict[tuple[int, ...], int] = {}
    for start in list(edges):
        if colour.get(start, WHITE) != WHITE:
            continue
        stack: list[tuple[tuple[int, ...], int]] = [(start, 0)]
        colour[start] = GREY
        while stack:
            node, idx = stack[-1]
            nbrs = edges.get(node, ())
            if idx < len(nbrs):
                stack[-1] = (node, idx + 1)
                nxt = nbrs[idx]
                c = colour.get(nxt, WHITE)
                if c == GREY:
                    return False
                if c == WHITE:
                    colour[nxt] = GREY
                    stack.append((nxt, 0))
            else:
                colour[node] = BLACK
                stack.pop()
    return True

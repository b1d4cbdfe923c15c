"""Counting copies of a small pattern complex and their exact moments.

A copy of L in K is an order-preserving placement of a member of the
isomorphism class of L onto an m-subset of [n]; summing the indicator over
all subsets and members gives the count statistic.  Its expectation and
exact covariance under the multiparameter model follow from independence
of the underlying inclusion draws: only placements sharing at least
k'+2 vertices are correlated, and the per-overlap kernel is independent
of n, so it is enumerated once and cached.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterable

from .complexes import SimplicialComplex, mask_of, vertices_of
from .models import ModelParams

MAX_PATTERN_VERTICES = 8


def _canonical(masks_by_size: dict[int, frozenset[int]]) -> frozenset[int]:
    out: set[int] = set()
    for masks in masks_by_size.values():
        out |= set(masks)
    return frozenset(out)


def _is_connected(K: SimplicialComplex) -> bool:
    if K.n == 1:
        return True
    adj = K.adjacency_masks()
    seen = 1  # vertex 1
    frontier = [1]
    while frontier:
        v = frontier.pop()
        nbrs = adj[v] & ~seen
        seen |= nbrs
        while nbrs:
            low = nbrs & -nbrs
            frontier.append(low.bit_length())
            nbrs ^= low
    return seen == (1 << K.n) - 1


@dataclass(frozen=True)
class PatternComplex:
    """Connected pattern on the vertex set [m], m <= MAX_PATTERN_VERTICES."""

    base: SimplicialComplex

    def __post_init__(self):
        if self.base.n > MAX_PATTERN_VERTICES:
            raise ValueError(
                f"pattern has {self.base.n} vertices; cap is {MAX_PATTERN_VERTICES}")
        if not _is_connected(self.base):
            raise ValueError("pattern complex must be connected")

    @property
    def m(self) -> int:
        return self.base.n

    @property
    def dim(self) -> int:
        return self.base.dimension

    def simplex_counts(self) -> tuple[int, ...]:
        """e[i] = number of i-simplices, i = 1..dim."""
        counts = self.base.size_counts()
        return tuple(counts[1:])

    def canonical_key(self) -> frozenset[int]:
        return frozenset(mask_of(s) for s in self.base.simplices() if len(s) >= 2)

    def __hash__(self):
        return hash((self.m, self.canonical_key()))

    def __eq__(self, other):
        if not isinstance(other, PatternComplex):
            return NotImplemented
        return self.m == other.m and self.canonical_key() == other.canonical_key()


def pattern_from_facets(m: int, facets: Iterable[Iterable[int]]) -> PatternComplex:
    return PatternComplex(SimplicialComplex.from_facets(m, facets))


# common patterns
def edge_pattern() -> PatternComplex:
    return pattern_from_facets(2, [(1, 2)])


def path_pattern() -> PatternComplex:
    return pattern_from_facets(3, [(1, 2), (2, 3)])


def triangle_pattern() -> PatternComplex:
    """A filled 2-simplex."""
    return pattern_from_facets(3, [(1, 2, 3)])


def double_triangle_pattern() -> PatternComplex:
    """Two filled 2-simplices sharing an edge."""
    return pattern_from_facets(4, [(1, 2, 3), (2, 3, 4)])


@dataclass(frozen=True)
class IsoClass:
    """All distinct relabelings of a pattern on its own vertex set."""

    members: tuple[frozenset[int], ...]  # each member as a set of simplex masks

    def __len__(self) -> int:
        return len(self.members)

    def member_simplices(self) -> tuple[tuple[tuple[int, ...], ...], ...]:
        """Per member: simplices as position tuples (0-based, size >= 2),
        largest first so containment tests fail fast."""
        out = []
        for member in self.members:
            sims = sorted((vertices_of(m) for m in member), key=len, reverse=True)
            out.append(tuple(tuple(v - 1 for v in s) for s in sims))
        return tuple(out)


def iso_class(L: PatternComplex) -> IsoClass:
    """Distinct complexes on [m] isomorphic to L, deduplicated as set families."""
    m = L.m
    base_masks = [tuple(s) for s in L.base.simplices() if len(s) >= 2]
    seen: set[frozenset[int]] = set()
    for perm in itertools.permutations(range(1, m + 1)):
        relabeled = frozenset(
            mask_of(perm[v - 1] for v in s) for s in base_masks)
        seen.add(relabeled)
    return IsoClass(tuple(sorted(seen, key=sorted)))


def count_subcomplexes(K: SimplicialComplex, L: PatternComplex) -> int:
    """Number of order-preserving placements of members of [L] into K."""
    m = L.m
    if m > K.n:
        return 0
    members = iso_class(L).member_simplices()
    if not members[0]:
        # pattern with no simplices of size >= 2: every m-subset hosts one copy
        return comb(K.n, m) * len(members)
    total = 0
    for subset in itertools.combinations(range(1, K.n + 1), m):
        for member in members:
            ok = True
            for positions in member:
                size = len(positions)
                msk = 0
                for p in positions:
                    msk |= 1 << (subset[p] - 1)
                if not K.has_mask(msk, size):
                    ok = False
                    break
            if ok:
                total += 1
    return total


def expected_count(L: PatternComplex, params: ModelParams) -> float:
    """C(n, m) * |[L]| * prod_i p_i^{e_i(L)} under independence."""
    if L.dim > params.d:
        raise ValueError(
            f"pattern dimension {L.dim} exceeds model dimension {params.d}")
    value = float(comb(params.n, L.m) * len(iso_class(L)))
    for i, e in enumerate(L.simplex_counts(), start=1):
        if e:
            value *= params.prob(i) ** e
    return value


def _member_masks_on(member: frozenset[int], src_vertices: tuple[int, ...]) -> frozenset[int]:
    """Relabel a member (on [m]) order-preservingly onto given vertices."""
    out = set()
    for msk in member:
        new = 0
        for v in vertices_of(msk):
            new |= 1 << (src_vertices[v - 1] - 1)
        out.add(new)
    return frozenset(out)


_overlap_cache: dict[tuple, float] = {}


def _overlap_kernel(L: PatternComplex, M: PatternComplex, a: int,
                    p: tuple[float, ...], k_prime: int) -> float:
    """Covariance of two placement indicators whose subsets share `a` vertices.

    Placements go on a ground set of m_L + m_M - a vertices with a fixed
    intersection; the value does not depend on n or on which subsets are
    chosen, so it is cached per (patterns, a, parameters).
    """
    key = (L.canonical_key(), M.canonical_key(), L.m, M.m, a, p, k_prime)
    if key in _overlap_cache:
        return _overlap_cache[key]

    def prob_of(dim: int) -> float:
        return p[dim - 1] if 1 <= dim <= len(p) else 0.0

    def family_prob(masks: Iterable[int]) -> float:
        out = 1.0
        for msk in masks:
            size = msk.bit_count()
            if size - 1 > k_prime:
                out *= prob_of(size - 1)
        return out

    s_vertices = tuple(range(1, L.m + 1))
    u_vertices = tuple(range(L.m - a + 1, L.m + M.m - a + 1))
    members_L = [_member_masks_on(mem, s_vertices) for mem in iso_class(L).members]
    members_M = [_member_masks_on(mem, u_vertices) for mem in iso_class(M).members]
    joint = 0.0
    for C in members_L:
        pc = family_prob(C)
        for D in members_M:
            joint += pc * family_prob(D - C)
    mean_L = sum(family_prob(C) for C in members_L)
    mean_M = sum(family_prob(D) for D in members_M)
    value = joint - mean_L * mean_M
    _overlap_cache[key] = value
    return value


def exact_covariance(L: PatternComplex, M: PatternComplex, params: ModelParams) -> float:
    """Cov of the two pattern counts under the model, exactly, for finite n.

    Sums the cached overlap kernel over the number of subset pairs at each
    intersection size; intersections of at most k'+1 vertices contribute
    nothing since the placements are then independent.
    """
    n, kp = params.n, params.k_prime
    total = 0.0
    for a in range(kp + 2, min(L.m, M.m) + 1):
        if M.m - a > n - L.m or L.m > n:
            continue
        npairs = comb(n, L.m) * comb(L.m, a) * comb(n - L.m, M.m - a)
        if npairs == 0:
            continue
        f = _overlap_kernel(L, M, a, params.p, kp)
        total += npairs * f
    return total

"""Finite simplicial complexes on the vertex set {1, ..., n}.

A complex is a downward-closed family of non-empty subsets of [n] that
contains every singleton.  Simplices are stored as integer bitmasks
(vertex v <-> bit v-1), grouped by size; membership tests in the hot
combinatorial loops are single set lookups on ints, which also works for
n > 64 since Python ints are unbounded.
"""

from __future__ import annotations

import itertools
from math import comb
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


def mask_of(vertices: Iterable[int]) -> int:
    """Bitmask of a vertex set (1-based vertices)."""
    m = 0
    for v in vertices:
        m |= 1 << (v - 1)
    return m


def vertices_of(mask: int) -> tuple[int, ...]:
    """Sorted 1-based vertex tuple of a bitmask."""
    out = []
    v = 1
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return tuple(out)


def min_vertex(mask: int) -> int:
    """Smallest vertex of a non-empty mask."""
    return (mask & -mask).bit_length()


def max_vertex(mask: int) -> int:
    return mask.bit_length()


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the set bits of `mask` as 1-based vertex labels, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length()
        mask ^= low


@dataclass(frozen=True)
class SkeletonCounts:
    """Simplex and hollow-simplex counts by dimension.

    ``s[i]`` is the number of i-simplices and ``h[i]`` the number of hollow
    i-simplices, i.e. (i+1)-subsets of [n] all of whose proper subsets are
    simplices (the filled face may or may not be present, so s[i] <= h[i]).
    Index 0 holds the vertex counts; ``i_max`` is the largest i in [1, d]
    with h[i] != 0.
    """

    s: tuple[int, ...]
    h: tuple[int, ...]
    i_max: int


class SimplicialComplex:
    """Immutable simplicial complex on [n]; all n singletons always present."""

    __slots__ = ("n", "_by_size")

    def __init__(self, n: int, masks_by_size: dict[int, frozenset[int]] | None = None):
        if n < 1:
            raise ValueError(f"vertex count must be positive, got {n}")
        self.n = n
        by_size: dict[int, set[int]] = {1: {1 << v for v in range(n)}}
        if masks_by_size:
            for k, masks in masks_by_size.items():
                if k == 1:
                    continue
                if masks:
                    by_size[k] = set(masks)
        self._by_size = by_size

    # -- construction ---------------------------------------------------

    @classmethod
    def from_facets(cls, n: int, facets: Iterable[Iterable[int]]) -> "SimplicialComplex":
        """Build the smallest complex on [n] containing every given facet.

        Every face of every facet is added (downward closure), along with
        all singletons.  Raises ValueError on empty facets or vertices
        outside [1, n].
        """
        by_size: dict[int, set[int]] = {}
        seen: set[int] = set()
        for facet in facets:
            vs = tuple(facet)
            if not vs:
                raise ValueError("empty facet")
            for v in vs:
                if not isinstance(v, int) or not (1 <= v <= n):
                    raise ValueError(f"vertex {v!r} outside [1, {n}]")
            m = mask_of(vs)
            if m in seen:
                continue
            # enumerate all non-empty submasks of m
            sub = m
            while sub:
                if sub not in seen:
                    seen.add(sub)
                    by_size.setdefault(sub.bit_count(), set()).add(sub)
                sub = (sub - 1) & m
        return cls(n, {k: frozenset(v) for k, v in by_size.items()})

    @classmethod
    def _from_closed_masks(cls, n: int, by_size: dict[int, set[int]]) -> "SimplicialComplex":
        """Internal constructor taking ownership of an already-closed family."""
        obj = cls.__new__(cls)
        obj.n = n
        obj._by_size = {1: {1 << v for v in range(n)}}
        for k, masks in by_size.items():
            if k != 1 and masks:
                obj._by_size[k] = masks
        return obj

    # -- queries ----------------------------------------------------------

    def masks_of_size(self, k: int) -> frozenset[int] | set[int]:
        return self._by_size.get(k, frozenset())

    def has_mask(self, mask: int, size: int | None = None) -> bool:
        k = size if size is not None else mask.bit_count()
        s = self._by_size.get(k)
        return s is not None and mask in s

    def contains(self, simplex: Iterable[int]) -> bool:
        """True iff the given vertex set is a simplex of the complex."""
        vs = tuple(simplex)
        for v in vs:
            if not (1 <= v <= self.n):
                raise ValueError(f"vertex {v!r} outside [1, {self.n}]")
        return self.has_mask(mask_of(vs), len(set(vs)))

    def size_counts(self) -> tuple[int, ...]:
        """Number of simplices of each size; entry k-1 counts size-k simplices."""
        top = max(self._by_size)
        return tuple(len(self._by_size.get(k, ())) for k in range(1, top + 1))

    @property
    def dimension(self) -> int:
        return max(self._by_size) - 1

    def num_simplices(self) -> int:
        return sum(len(v) for v in self._by_size.values())

    def simplices(self, size: int | None = None) -> Iterator[tuple[int, ...]]:
        """Yield simplices as sorted vertex tuples (all sizes, or one size)."""
        sizes = [size] if size is not None else sorted(self._by_size)
        for k in sizes:
            for m in sorted(self._by_size.get(k, ())):
                yield vertices_of(m)

    def euler_characteristic(self) -> int:
        """Alternating sum over dimensions of the simplex counts."""
        return sum((-1) ** (k - 1) * len(v) for k, v in self._by_size.items())

    def adjacency_masks(self) -> list[int]:
        """adj[v] = bitmask of neighbours of v in the 1-skeleton (index 0 unused)."""
        adj = [0] * (self.n + 1)
        for m in self._by_size.get(2, ()):
            a = min_vertex(m)
            b = max_vertex(m)
            adj[a] |= 1 << (b - 1)
            adj[b] |= 1 << (a - 1)
        return adj

    def skeleton_counts(self, d: int) -> SkeletonCounts:
        """Simplex/hollow counts for dimensions 1..d (index 0 holds vertices).

        A dimension above the complex dimension yields zero counts, not an
        error.  h[1] is always C(n, 2).
        """
        if d < 1:
            raise ValueError(f"dimension bound must be >= 1, got {d}")
        n = self.n
        s = [n] + [len(self._by_size.get(i + 1, ())) for i in range(1, d + 1)]
        h = [n] + [0] * d
        h[1] = comb(n, 2)
        adj = self.adjacency_masks()
        for i in range(2, d + 1):
            faces = self._by_size.get(i, ())
            if not faces:
                break
            face_set = self._by_size[i]
            count = 0
            for m in faces:
                common = ~0
                for v in iter_bits(m):
                    common &= adj[v]
                common &= -(1 << m.bit_length())  # only u > max(m)
                for u in iter_bits(common & ((1 << n) - 1)):
                    ubit = 1 << (u - 1)
                    ok = True
                    for w in iter_bits(m):
                        if (m ^ (1 << (w - 1))) | ubit not in face_set:
                            ok = False
                            break
                    if ok:
                        count += 1
            h[i] = count
        i_max = 0
        for i in range(1, d + 1):
            if h[i] != 0:
                i_max = i
        return SkeletonCounts(tuple(s), tuple(h), i_max)

    def maximal_faces(self) -> list[tuple[int, ...]]:
        """Facets (inclusion-maximal simplices), sorted lexicographically."""
        non_max: set[int] = set()
        for k in sorted(self._by_size):
            if k == 1:
                continue
            for m in self._by_size[k]:
                for w in iter_bits(m):
                    non_max.add(m ^ (1 << (w - 1)))
        out = []
        for k, masks in self._by_size.items():
            for m in masks:
                if m not in non_max:
                    out.append(vertices_of(m))
        return sorted(out)

    def validate_closure(self) -> None:
        """Raise AssertionError unless the stored family is downward closed."""
        for k in self._by_size:
            if k == 1:
                continue
            lower = self._by_size.get(k - 1, set())
            for m in self._by_size[k]:
                for w in iter_bits(m):
                    assert m ^ (1 << (w - 1)) in lower, (
                        f"missing face of {vertices_of(m)}")

    # -- dunder -----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimplicialComplex):
            return NotImplemented
        if self.n != other.n:
            return False
        keys = set(self._by_size) | set(other._by_size)
        return all(self._by_size.get(k, set()) == other._by_size.get(k, set())
                   for k in keys)

    def __hash__(self):
        return hash((self.n, frozenset((k, frozenset(v)) for k, v in self._by_size.items())))

    def __repr__(self):
        counts = ",".join(str(c) for c in self.size_counts())
        return f"SimplicialComplex(n={self.n}, sizes=[{counts}])"


def build_from_facets(n: int, facets: Iterable[Iterable[int]]) -> SimplicialComplex:
    """Functional alias of :meth:`SimplicialComplex.from_facets`."""
    return SimplicialComplex.from_facets(n, facets)


def complete_complex(n: int, dim: int | None = None) -> SimplicialComplex:
    """Full simplex on [n], optionally truncated to the given dimension."""
    top = n if dim is None else min(n, dim + 1)
    by_size = {
        k: {mask_of(c) for c in itertools.combinations(range(1, n + 1), k)}
        for k in range(2, top + 1)
    }
    return SimplicialComplex(n, {k: frozenset(v) for k, v in by_size.items()})

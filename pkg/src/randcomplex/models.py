"""Samplers for the multiparameter random complex and its soft geometric variants.

Sampling is inductive by dimension: only subsets whose full boundary is
already present are Bernoulli-tested, which is equivalent in law to
intersecting a random hypergraph with downward closure but avoids touching
the 2^n hyperedges that can never enter.  Candidates of size k+1 are found
by extending each size-k simplex by a common neighbour above its largest
vertex, so each candidate is tested exactly once, in a deterministic order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .complexes import SimplicialComplex, iter_bits, max_vertex

# Radius at which a ball in R^3 has volume 1/2, i.e. (3/(8*pi))^(1/3): the
# hard edge model's distance threshold, chosen so that the edge density of
# the geometric graph on the unit cube is 0.5 when boundary truncation is
# ignored.  Use calibrate_edge_threshold for an empirical recalibration.
EDGE_MODEL_THRESHOLD = 0.4923725109


class KernelMissingError(KeyError):
    """A candidate simplex arose in a dimension with no inclusion function."""


@dataclass(frozen=True)
class ModelParams:
    """Inclusion probabilities p[0]=p_1, p[1]=p_2, ... of the null model.

    k_prime is the number of leading entries equal to 1 (the complete low
    skeleton); d the largest index with p_d > 0.  Interior zeros (a zero
    followed by a positive entry) are outside the model and rejected.
    """

    n: int
    p: tuple[float, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"vertex count must be positive, got {self.n}")
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        for i, x in enumerate(self.p, start=1):
            if not (0.0 <= x <= 1.0) or math.isnan(x):
                raise ValueError(f"p_{i}={x} outside [0, 1]")
        d = 0
        for i, x in enumerate(self.p, start=1):
            if x > 0.0:
                d = i
        for i, x in enumerate(self.p[:d], start=1):
            if x == 0.0:
                raise ValueError(
                    f"p_{i}=0 with a later positive entry: interior zeros are not a valid model")
        if d > self.n - 1:
            raise ValueError(f"p_{d}>0 needs at least {d + 1} vertices, got n={self.n}")

    @property
    def k_prime(self) -> int:
        k = 0
        for x in self.p:
            if x == 1.0:
                k += 1
            else:
                break
        return k

    @property
    def d(self) -> int:
        d = 0
        for i, x in enumerate(self.p, start=1):
            if x > 0.0:
                d = i
        return d

    def prob(self, dim: int) -> float:
        """p_dim, zero above the stored vector."""
        return self.p[dim - 1] if 1 <= dim <= len(self.p) else 0.0


@dataclass(frozen=True)
class Seed:
    """Reproducible stream root: replicate streams are pairwise independent."""

    master: int
    replicate_index: int = 0

    def stream(self, *subkey: int) -> np.random.Generator:
        """Independent generator keyed by (master, replicate_index, *subkey)."""
        ss = np.random.SeedSequence([self.master, self.replicate_index, *subkey])
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray  # (n, dim), coordinates in [0, 1]
    dim: int

    def coords(self, vertices: Sequence[int]) -> np.ndarray:
        return self.points[[v - 1 for v in vertices]]


# -- geometric measures -------------------------------------------------------


def _gram_volume(vectors: np.ndarray) -> float:
    g = vectors @ vectors.T
    det = float(np.linalg.det(g))
    return math.sqrt(max(det, 0.0))


def triangle_area(a, b, c) -> float:
    """Area of the triangle spanned by three points of equal dimension."""
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    if not (a.shape == b.shape == c.shape):
        raise ValueError("points must have equal dimension")
    return _gram_volume(np.stack([b - a, c - a])) / 2.0


def simplex_volume(points) -> float:
    """k-dimensional volume of the simplex on k+1 points in dimension >= k."""
    pts = np.asarray(points, dtype=float)
    k = pts.shape[0] - 1
    if k < 1:
        raise ValueError("need at least two points")
    if pts.shape[1] < k:
        raise ValueError(f"{k + 1} points need ambient dimension >= {k}, got {pts.shape[1]}")
    return _gram_volume(pts[1:] - pts[0]) / math.factorial(k)


# -- inclusion kernels --------------------------------------------------------


@dataclass(frozen=True)
class ConstantKernel:
    value: float

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise ValueError(f"probability {self.value} outside [0, 1]")

    def probabilities(self, pts: np.ndarray) -> np.ndarray:
        return np.full(pts.shape[0], self.value)


_MEASURES: dict[str, Callable[[np.ndarray], np.ndarray]] = {}


def _measure_distance(pts: np.ndarray) -> np.ndarray:
    return np.linalg.norm(pts[:, 1] - pts[:, 0], axis=1)


def _measure_area(pts: np.ndarray) -> np.ndarray:
    u = pts[:, 1] - pts[:, 0]
    v = pts[:, 2] - pts[:, 0]
    uu = np.einsum("ij,ij->i", u, u)
    vv = np.einsum("ij,ij->i", v, v)
    uv = np.einsum("ij,ij->i", u, v)
    return np.sqrt(np.maximum(uu * vv - uv * uv, 0.0)) / 2.0


def _measure_volume(pts: np.ndarray) -> np.ndarray:
    k = pts.shape[1] - 1
    edges = pts[:, 1:] - pts[:, :1]
    gram = np.einsum("nik,njk->nij", edges, edges)
    det = np.linalg.det(gram)
    return np.sqrt(np.maximum(det, 0.0)) / math.factorial(k)


_MEASURES["distance"] = _measure_distance
_MEASURES["area"] = _measure_area
_MEASURES["volume"] = _measure_volume

_MEASURE_ARITY = {"distance": 2, "area": 3, "volume": None}


@dataclass(frozen=True)
class ThresholdKernel:
    """Two-step inclusion: 1 below eps1, 1/2 strictly between eps1 and eps2, else 0."""

    measure: str
    eps1: float
    eps2: float

    def __post_init__(self):
        if self.measure not in _MEASURES:
            raise ValueError(f"unknown measure {self.measure!r}; choose from {sorted(_MEASURES)}")
        if not (0.0 <= self.eps1 <= self.eps2):
            raise ValueError(f"need 0 <= eps1 <= eps2, got ({self.eps1}, {self.eps2})")

    def probabilities(self, pts: np.ndarray) -> np.ndarray:
        arity = _MEASURE_ARITY[self.measure]
        if arity is not None and pts.shape[1] != arity:
            raise ValueError(
                f"measure {self.measure!r} needs {arity} points per simplex, got {pts.shape[1]}")
        vals = _MEASURES[self.measure](pts)
        return np.where(vals <= self.eps1, 1.0,
                        np.where(vals < self.eps2, 0.5, 0.0))


Kernel = ConstantKernel | ThresholdKernel


@dataclass(frozen=True)
class GeometricKernel:
    """Per-dimension inclusion functions; `rest` covers unlisted dimensions."""

    phis: Mapping[int, Kernel] = field(default_factory=dict)
    rest: Kernel | None = None

    def phi(self, dim: int) -> Kernel:
        k = self.phis.get(dim, self.rest)
        if k is None:
            raise KernelMissingError(f"no inclusion function for dimension {dim}")
        return k


# -- sampling core ------------------------------------------------------------


def _edge_candidates(n: int) -> list[int]:
    out = []
    for a in range(n - 1):
        for b in range(a + 1, n):
            out.append((1 << a) | (1 << b))
    return out


def _extend_candidates(n: int, prev: set[int], adj: list[int]) -> list[int]:
    """Size-(k+1) subsets whose full size-k boundary lies in `prev` (k >= 2)."""
    out = []
    top = (1 << n) - 1
    for m in sorted(prev):
        common = top
        for v in iter_bits(m):
            common &= adj[v]
        common &= -(1 << m.bit_length())
        if not common:
            continue
        if m.bit_count() == 2:
            # boundary check for triangles is exactly the adjacency prefilter
            out.extend(m | (1 << (u - 1)) for u in iter_bits(common))
            continue
        for u in iter_bits(common):
            ubit = 1 << (u - 1)
            ok = True
            for w in iter_bits(m):
                if (m ^ (1 << (w - 1))) | ubit not in prev:
                    ok = False
                    break
            if ok:
                out.append(m | ubit)
    return out


def _sample_levels(n: int, seed: Seed, level_probs) -> SimplicialComplex:
    """Generic inductive sampler.

    level_probs(dim, candidate_masks) returns inclusion probabilities, one
    per candidate, or None meaning "this and all higher dimensions are
    impossible".  Uniform draws are keyed by (seed, dimension, candidate
    rank), so results do not depend on scheduling.
    """
    by_size: dict[int, set[int]] = {}
    candidates: list[int] = _edge_candidates(n)
    adj = [0] * (n + 1)
    dim = 1
    while candidates:
        probs = level_probs(dim, candidates)
        if probs is None:
            break
        probs = np.asarray(probs, dtype=float)
        if np.all(probs >= 1.0):
            keep = candidates
        elif np.all(probs <= 0.0):
            keep = []
        else:
            u = seed.stream(dim).random(len(candidates))
            keep = [m for m, take in zip(candidates, u < probs) if take]
        if not keep:
            break
        by_size[dim + 1] = set(keep)
        if dim == 1:
            for m in keep:
                a = (m & -m).bit_length()
                b = m.bit_length()
                adj[a] |= 1 << (b - 1)
                adj[b] |= 1 << (a - 1)
        candidates = _extend_candidates(n, by_size[dim + 1], adj)
        dim += 1
    return SimplicialComplex._from_closed_masks(n, by_size)


def sample_multiparameter(params: ModelParams, seed: Seed) -> SimplicialComplex:
    """One draw of the multiparameter model: a size-(k+1) subset with its
    boundary fully present is included independently with probability p_k."""

    def level_probs(dim: int, candidates: list[int]):
        p = params.prob(dim)
        if p == 0.0:
            return None
        return np.full(len(candidates), p)

    return _sample_levels(params.n, seed, level_probs)


def sample_soft_geometric(
    cloud_size: int,
    ambient_dim: int,
    kernel: GeometricKernel,
    seed: Seed,
) -> tuple[PointCloud, SimplicialComplex]:
    """Uniform points on the unit cube plus location-dependent inclusion.

    A candidate i-simplex (boundary already present) enters with probability
    phi_i evaluated at its vertices' coordinates.  Constant kernels for every
    dimension reduce to the multiparameter model.
    """
    points = seed.stream(0).random((cloud_size, ambient_dim))
    cloud = PointCloud(points, ambient_dim)

    def level_probs(dim: int, candidates: list[int]):
        phi = kernel.phi(dim)
        if isinstance(phi, ConstantKernel):
            if phi.value == 0.0:
                return None
            return np.full(len(candidates), phi.value)
        idx = np.array([[v - 1 for v in iter_bits(m)] for m in candidates], dtype=int)
        return phi.probabilities(points[idx])

    return cloud, _sample_levels(cloud_size, seed, level_probs)


def calibrate_edge_threshold(
    ambient_dim: int = 3,
    target_density: float = 0.5,
    pairs: int = 2_000_000,
    seed: Seed = Seed(0),
) -> float:
    """Monte-Carlo distance threshold giving the target expected edge density."""
    rng = seed.stream(99)
    a = rng.random((pairs, ambient_dim))
    b = rng.random((pairs, ambient_dim))
    d = np.linalg.norm(a - b, axis=1)
    return float(np.quantile(d, target_density))


def tetrahedron_model_kernel(eps1: float, eps2: float) -> GeometricKernel:
    """Dims 1-2 constant 1/2; dim 3 volume-thresholded; nothing higher."""
    return GeometricKernel(
        phis={1: ConstantKernel(0.5), 2: ConstantKernel(0.5),
              3: ThresholdKernel("volume", eps1, eps2)},
        rest=ConstantKernel(0.0),
    )


def triangle_model_kernel(eps1: float, eps2: float) -> GeometricKernel:
    """Dim 1 constant 1/2; dim 2 area-thresholded; nothing higher."""
    return GeometricKernel(
        phis={1: ConstantKernel(0.5), 2: ThresholdKernel("area", eps1, eps2)},
        rest=ConstantKernel(0.0),
    )


def edge_model_kernel(eps1: float, eps2: float) -> GeometricKernel:
    """Dim 1 distance-thresholded; every higher dimension constant 1/2."""
    return GeometricKernel(
        phis={1: ThresholdKernel("distance", eps1, eps2)},
        rest=ConstantKernel(0.5),
    )

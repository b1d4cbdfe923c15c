import itertools
import random

import pytest

from randcomplex import ModelParams, Seed, SimplicialComplex, sample_multiparameter


@pytest.fixture
def fig1():
    """Five vertices, six edges, one filled triangle on {3,4,5}."""
    return SimplicialComplex.from_facets(
        5, [(1, 2), (2, 3), (1, 4), (3, 5), (3, 4, 5)])


def random_params(rng: random.Random, n: int, max_d: int = 3) -> ModelParams:
    """A valid random parameter vector, possibly with a complete low skeleton."""
    d = rng.randint(1, min(max_d, n - 1))
    p = []
    k_prime = rng.choice([0, 0, 0, 1])
    for i in range(d):
        if i < k_prime:
            p.append(1.0)
        else:
            p.append(rng.uniform(0.15, 0.9))
    return ModelParams(n, tuple(p))


def random_complex(rng: random.Random, n: int, max_d: int = 3) -> SimplicialComplex:
    params = random_params(rng, n, max_d)
    return sample_multiparameter(params, Seed(rng.getrandbits(32)))


def brute_force_faces(K: SimplicialComplex) -> set[frozenset[int]]:
    """All simplices as frozensets, via the public iterator."""
    return {frozenset(s) for s in K.simplices()}


def powerset_nonempty(vertices):
    vs = list(vertices)
    for r in range(1, len(vs) + 1):
        yield from itertools.combinations(vs, r)

"""Shared Gram matrices and random basis changes for the tests."""

import pytest

from shadowlat.exact import identity, matmul

# acceptance summary lines, keyed by criterion number
ACCEPTANCE = pytest.StashKey[dict]()

A2 = [[2, 1], [1, 2]]
D4 = [[2, -1, 0, 0], [-1, 2, -1, -1], [0, -1, 2, 0], [0, -1, 0, 2]]
E8 = [
    [2, -1, 0, 0, 0, 0, 0, 0],
    [-1, 2, -1, 0, 0, 0, 0, 0],
    [0, -1, 2, -1, 0, 0, 0, -1],
    [0, 0, -1, 2, -1, 0, 0, 0],
    [0, 0, 0, -1, 2, -1, 0, 0],
    [0, 0, 0, 0, -1, 2, -1, 0],
    [0, 0, 0, 0, 0, -1, 2, 0],
    [0, 0, -1, 0, 0, 0, 0, 2],
]


def random_unimodular(n, rng, steps=None):
    """Product of random signed permutations and elementary shears."""
    U = identity(n)
    for _ in range(steps if steps is not None else 3 * n):
        if n > 1 and rng.random() < 0.7:
            i, j = rng.sample(range(n), 2)
            c = rng.choice([-2, -1, 1, 2])
            E = identity(n)
            E[i][j] = c
        else:
            perm = list(range(n))
            rng.shuffle(perm)
            E = [[(rng.choice([-1, 1]) if perm[i] == j else 0) for j in range(n)] for i in range(n)]
        U = matmul(U, E)
    return U


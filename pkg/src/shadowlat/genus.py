"""Kneser p-neighbours, genus exploration and the long-shadow classification.

Isotropic lines of ``L/pL`` are enumerated as normalized vectors over F_p
with numpy.  Lines in the same orbit under ``Aut(L)`` give isometric
neighbours, so only one line per isotropic orbit is lifted.  Classes are
kept under an invariant fingerprint and compared by an isometry test only
when fingerprints collide.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from sympy import isprime

from . import exact
from .enumeration import coset_minimum, minimum, theta_counts
from .isometry import automorphism_group, isometric
from .lattice import (Lattice, c_n, even_sublattice_basis, is_even, is_rationally_equivalent,
                      is_strongly_modular, mod_params, power, shadow)
from .qseries import M


class NoNeighbors(ValueError):
    """No isotropic line mod p, so no p-neighbours exist."""


class GenusTooLarge(ValueError):
    def __init__(self, msg, estimate=None):
        super().__init__(msg)
        self.estimate = estimate


@dataclass
class Limits:
    max_classes: int = 5000
    max_lines: int = 3 * 10 ** 6
    max_dim: int = 12
    fingerprint_norm: int = 3
    node_cap: int = 10 ** 9


@dataclass
class GenusRun:
    seeds: list
    p: int
    classes: list = field(default_factory=list)
    complete: bool = True
    neighbors_built: int = 0
    assumption: str = "the p-neighbour graph of the genus is connected"

    def __len__(self):
        return len(self.classes)


# --- single neighbours ------------------------------------------------------

def _check_prime(L, p):
    if p == 2 or not isprime(p):
        raise ValueError(f"p = {p} must be an odd prime")
    if (2 * L.det) % p == 0:
        raise ValueError(f"p = {p} divides 2·det = {2 * L.det}")


def lift_isotropic(G, v0, p):
    """Lift ``v0`` with ``(v0,v0) ≡ 0 mod p`` to ``v ≡ v0`` with ``(v,v) ≡ 0 mod p²``."""
    v = [int(x) % p for x in v0]
    Gv = exact.matvec(G, v)
    nv = sum(a * b for a, b in zip(v, Gv))
    if nv % p:
        raise ValueError("vector is not isotropic mod p")
    i = next((j for j in range(len(v)) if Gv[j] % p), None)
    if i is None:
        raise ValueError("vector lies in pL")
    t = (-(nv // p) * pow(2 * Gv[i], -1, p)) % p
    v[i] += p * t
    return v


def neighbor(L, p, v):
    """The p-neighbour ``{x ∈ L : (x,v) ≡ 0 mod p} + Z·v/p``, LLL-reduced."""
    _check_prime(L, p)
    G = [list(r) for r in L.gram]
    n = L.dim
    v = [int(x) for x in v]
    if all(x % p == 0 for x in v):
        raise ValueError("v must not lie in pL")
    if exact.quad(G, v) % (p * p):
        raise ValueError("(v,v) must be divisible by p²")
    Gv = exact.matvec(G, v)
    i = next(j for j in range(n) if Gv[j] % p)
    inv = pow(Gv[i], -1, p)
    rows = []
    for j in range(n):
        r = [0] * n
        if j == i:
            r[i] = p * p
        else:
            r[j] = p
            r[i] = -p * ((Gv[j] * inv) % p)
        rows.append(r)
    rows.append(v)
    # rows are p·(generators); the HNF gives p·(basis)
    H = exact.row_basis(rows)
    P2 = exact.congruent(G, exact.transpose(H))
    if any(x % (p * p) for r in P2 for x in r):
        raise AssertionError("neighbour is not integral")
    G2 = [[x // (p * p) for x in r] for r in P2]
    if exact.det(G2) != L.det:
        raise AssertionError("neighbour changed the determinant")
    R, _ = exact.lll_reduce(G2)
    return Lattice.from_gram(R)


# --- lines mod p ------------------------------------------------------------

def line_count(n, p):
    return (p ** n - 1) // (p - 1)


def _normalized_vectors(n, p):
    """All vectors of F_p^n whose first nonzero entry is 1, one per line."""
    blocks = []
    for lead in range(n):
        m = n - 1 - lead
        codes = np.arange(p ** m, dtype=np.int64)
        tail = np.empty((len(codes), m), dtype=np.int64)
        for j in range(m):
            tail[:, j] = codes % p
            codes //= p
        blk = np.zeros((len(tail), n), dtype=np.int64)
        blk[:, lead] = 1
        blk[:, lead + 1:] = tail
        blocks.append(blk)
    return np.concatenate(blocks)


def _normalize(W, p):
    nz = W != 0
    lead = np.argmax(nz, axis=1)
    a = W[np.arange(len(W)), lead]
    inv = np.array([0] + [pow(x, -1, p) for x in range(1, p)], dtype=np.int64)
    return (W * inv[a][:, None]) % p


def _codes(W, p):
    weights = p ** np.arange(W.shape[1], dtype=np.int64)
    return W @ weights


def isotropic_line_orbits(L, p, gens=None, max_lines=Limits.max_lines):
    """One representative per ``Aut(L)``-orbit of isotropic lines in ``L/pL``."""
    n = L.dim
    cnt = line_count(n, p)
    if cnt > max_lines:
        raise GenusTooLarge(f"{cnt} lines mod {p} in dimension {n}", estimate=cnt)
    V = _normalized_vectors(n, p)
    G = np.array(L.gram, dtype=np.int64)
    iso = (np.einsum("ij,jk,ik->i", V, G, V) % p) == 0
    V = V[iso]
    if len(V) == 0:
        return []
    codes = _codes(V, p)
    order = np.argsort(codes)
    sorted_codes = codes[order]
    if gens is None:
        gens = automorphism_group(L, verify=False).generators
    src, dst = [], []
    for g in gens:
        Wg = _normalize((V @ np.array(g, dtype=np.int64).T) % p, p)
        pos = np.searchsorted(sorted_codes, _codes(Wg, p))
        src.append(np.arange(len(V)))
        dst.append(order[pos])
    m = len(V)
    if src:
        src = np.concatenate(src)
        dst = np.concatenate(dst)
    else:
        src = dst = np.zeros(0, dtype=np.int64)
    graph = coo_matrix((np.ones(len(src)), (src, dst)), shape=(m, m))
    _, labels = connected_components(graph, directed=True, connection="weak")
    _, first = np.unique(labels, return_index=True)
    return [V[i].tolist() for i in sorted(first)]


def neighbors(L, p, max_lines=Limits.max_lines, gens=None):
    """One neighbour per Aut-orbit of isotropic lines."""
    _check_prime(L, p)
    G = [list(r) for r in L.gram]
    lines = isotropic_line_orbits(L, p, gens, max_lines)
    if not lines:
        raise NoNeighbors(f"no isotropic line mod {p}")
    return [neighbor(L, p, lift_isotropic(G, v0, p)) for v0 in lines]


def default_prime(L, max_lines=Limits.max_lines, exclude=()):
    """Smallest admissible odd prime with an isotropic line mod p."""
    p = 3
    while True:
        if isprime(p) and (2 * L.det) % p and p not in exclude:
            if line_count(L.dim, p) > max_lines:
                raise GenusTooLarge(f"no admissible prime keeps the line count below {max_lines}")
            V = _normalized_vectors(L.dim, p)
            G = np.array(L.gram, dtype=np.int64)
            if ((np.einsum("ij,jk,ik->i", V, G, V) % p) == 0).any():
                return p
        p += 2


# --- class bookkeeping ------------------------------------------------------

def fingerprint(L, norm=Limits.fingerprint_norm):
    counts = theta_counts(L, norm)
    return (L.det, L.dim, is_even(L), tuple(sorted(counts.items())))


class ClassStore:
    """Isometry classes bucketed by fingerprint."""

    def __init__(self, norm=Limits.fingerprint_norm, node_cap=Limits.node_cap):
        self.norm = norm
        self.node_cap = node_cap
        self.buckets = {}
        self.classes = []

    def add(self, L):
        """Insert ``L``; returns ``(index, is_new)``."""
        key = fingerprint(L, self.norm)
        bucket = self.buckets.setdefault(key, [])
        for idx in bucket:
            if isometric(self.classes[idx], L, node_cap=self.node_cap):
                return idx, False
        self.classes.append(L)
        bucket.append(len(self.classes) - 1)
        return len(self.classes) - 1, True


def enumerate_genus(seed, p=None, limits=None, store=None, progress=None):
    """Breadth-first closure of the p-neighbour graph from ``seed`` (one lattice or a list)."""
    limits = limits or Limits()
    seeds = list(seed) if isinstance(seed, (list, tuple)) else [seed]
    seeds = [Lattice.from_gram(exact.lll_reduce([list(r) for r in s.gram])[0]) for s in seeds]
    if p is None:
        p = default_prime(seeds[0], limits.max_lines)
    for s in seeds:
        _check_prime(s, p)
    store = store or ClassStore(limits.fingerprint_norm, limits.node_cap)
    run = GenusRun(seeds, p)
    queue = []
    mine = []
    for s in seeds:
        idx, new = store.add(s)
        if idx not in mine:
            mine.append(idx)
            queue.append(idx)
    head = 0
    while head < len(queue):
        L = store.classes[queue[head]]
        head += 1
        if progress:
            progress(head, len(queue), run.neighbors_built)
        try:
            found = neighbors(L, p, limits.max_lines)
        except NoNeighbors:
            # isotropy mod p is a genus invariant, so nothing can be reached
            run.complete = False
            run.assumption = f"no isotropic lines mod {p}; only the seeds are known"
            break
        for nb in found:
            run.neighbors_built += 1
            idx, _ = store.add(nb)
            if idx not in mine:
                if len(mine) >= limits.max_classes:
                    run.complete = False
                    continue
                mine.append(idx)
                queue.append(idx)
    run.classes = [store.classes[i] for i in mine]
    return run


# --- long-shadow classification --------------------------------------------

@dataclass
class Classification:
    N: int
    k: int
    target_min0: Fraction
    lattices: list
    runs: list
    notes: list = field(default_factory=list)

    @property
    def complete(self):
        return all(r.complete for r in self.runs)

    @property
    def genus_size(self):
        return sum(len(r) for r in self.runs)


def even_overlattice_seeds(L):
    """Even lattices ``L0 + Z·y/2`` of the same determinant, ``L0`` the even sublattice of ``L``."""
    B = even_sublattice_basis(L)
    G0 = exact.congruent([list(r) for r in L.gram], B)
    n = len(G0)
    kernel = []
    for y in product((0, 1), repeat=n):
        if not any(y):
            continue
        if any(sum(G0[i][j] * y[j] for j in range(n)) % 2 for i in range(n)):
            continue
        q = exact.quad(G0, list(y))
        if q % 8 == 0:
            kernel.append(list(y))
    out = []
    store = ClassStore()
    for y in kernel:
        rows = [[2 * x for x in r] for r in exact.identity(n)] + [y]
        H = exact.row_basis(rows)
        Bm = [[Fraction(x, 2) for x in r] for r in H]
        Gm = exact.congruent(G0, exact.transpose(Bm))
        Gm = [[int(x) for x in r] for r in Gm]
        Lm = Lattice.from_gram(exact.lll_reduce(Gm)[0])
        if store.add(Lm)[1]:
            out.append(Lm)
    return out


def estimate_cost(N, k, p=None):
    n = k * mod_params(N).sigma0
    p = p or 3
    return n, line_count(n, p)


def classify_long_shadow(N, k, limits=None, p=None, cross_check=False):
    """All strongly N-modular lattices rationally equivalent to ``C_N^k`` with
    minimum at least 2 and shadow minimum ``M(N,1,k)``, found by exploring genera."""
    limits = limits or Limits()
    params = mod_params(N)
    if not 1 <= k <= params.kmax:
        raise ValueError(f"k = {k} outside 1..kmax({N}) = {params.kmax}")
    C = power(c_n(N), k)
    n = C.dim
    if n > limits.max_dim:
        raise GenusTooLarge(f"dimension {n} exceeds the limit {limits.max_dim}", estimate=estimate_cost(N, k, p))
    target = M(N, 1, k)
    notes = []
    if target == 0:
        seeds = even_overlattice_seeds(C)
        notes.append("shadow minimum 0 forces an even lattice; genera seeded from the even overlattices of the even sublattice of C_N^k")
    else:
        seeds = [C]
    runs = []
    store = ClassStore(limits.fingerprint_norm, limits.node_cap)
    primes = []
    for s in seeds:
        q = p or default_prime(s, limits.max_lines)
        primes.append(q)
        runs.append(enumerate_genus(s, q, limits, store))
    if cross_check:
        for s, q in zip(seeds, primes):
            try:
                q2 = default_prime(s, limits.max_lines, exclude=(q,))
            except GenusTooLarge:
                notes.append("second prime too expensive; cross-check skipped")
                continue
            before = len(store.classes)
            runs.append(enumerate_genus(s, q2, limits, store))
            if len(store.classes) != before:
                notes.append(f"prime {q2} found {len(store.classes) - before} classes missed by {q}")
    survivors = []
    seen = set()
    for run in runs:
        for L in run.classes:
            if id(L) in seen:
                continue
            seen.add(id(L))
            if long_shadow_filter(L, N, target, C):
                survivors.append(L)
    return Classification(N, k, target, survivors, runs, notes)


def long_shadow_filter(L, N, target, C=None):
    if minimum(L) < 2:
        return False
    if coset_minimum(shadow(L), start=max(target, Fraction(1, 4))) != target:
        return False
    if C is not None and not is_rationally_equivalent(L, C):
        return False
    return is_strongly_modular(L, N).ok

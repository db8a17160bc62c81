"""Integral lattices given by Gram matrices, and the constructions built on them.

Vectors are written in coordinates with respect to the basis whose Gram
matrix is stored.  Derived lattices (duals, partial duals) carry a
``transition`` matrix whose columns are their basis vectors expressed in the
parent's coordinates.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import prod

import numpy as np
from sympy import divisors, factorint, isprime

from . import exact
from .enumeration import short_vectors

LEVELS = (1, 2, 3, 5, 6, 7, 11, 14, 15, 23)


class LatticeError(ValueError):
    pass


def _freeze(M):
    return tuple(tuple(r) for r in M)


@dataclass(frozen=True)
class Lattice:
    """Positive definite integral lattice.

    >>> Lattice.from_gram([[2, 1], [1, 2]]).det
    3
    """

    gram: tuple

    def __post_init__(self):
        G = self.gram
        if not exact.is_symmetric(G):
            raise LatticeError("Gram matrix is not symmetric")
        if not all(isinstance(x, int) for r in G for x in r):
            raise LatticeError("Gram matrix is not integral")
        if G and not exact.is_positive_definite(G):
            raise LatticeError("Gram matrix is not positive definite")

    @classmethod
    def from_gram(cls, gram):
        G = []
        for r in gram:
            row = []
            for x in r:
                if isinstance(x, bool) or not isinstance(x, (int, Fraction)):
                    raise LatticeError(f"non-integer Gram entry {x!r}")
                if Fraction(x).denominator != 1:
                    raise LatticeError("Gram matrix is not integral")
                row.append(int(x))
            G.append(row)
        return cls(_freeze(G))

    @property
    def dim(self):
        return len(self.gram)

    @property
    def det(self):
        return exact.det(self.gram)

    def as_list(self):
        return [list(r) for r in self.gram]

    def __repr__(self):
        return f"Lattice({self.as_list()})"


def make_lattice(gram):
    return Lattice.from_gram(gram)


@dataclass(frozen=True)
class RatLattice:
    gram: tuple
    transition: tuple = None
    parent: Lattice = field(default=None, compare=False, repr=False)

    @property
    def dim(self):
        return len(self.gram)


@dataclass(frozen=True)
class Coset:
    """``base + shift``; ``shift`` is in the coordinates of the base lattice.

    ``transition`` (columns = base vectors in the parent frame) lets
    :attr:`parent_shift` express the representative in the parent's basis.
    """

    gram: tuple
    shift: tuple
    transition: tuple = None

    @property
    def parent_shift(self):
        if self.transition is None:
            return self.shift
        return tuple(exact.matvec(self.transition, self.shift))


# --- level constants -----------------------------------------------------

def sigma0(n):
    return len(divisors(n))


def sigma1(n):
    return sum(divisors(n))


@dataclass(frozen=True)
class ModParams:
    N: int
    sigma0: int
    sigma1: int
    s: int
    ev: int
    lN: Fraction
    kmax: int
    nmax: int


def check_level(N):
    if N not in LEVELS:
        raise LatticeError(f"N={N} is not one of {LEVELS}")


def mod_params(N):
    check_level(N)
    s0, s1 = sigma0(N), sigma1(N)
    assert 24 % s1 == 0
    s = 24 // s1
    ev = int(N % 2 == 0)
    lN = Fraction(s1, 6) if ev else Fraction(s1, 8)
    kmax = s - 1 + ev
    return ModParams(N, s0, s1, s, ev, lN, kmax, s0 * kmax)


# --- constructions -------------------------------------------------------

def c_n(N):
    """``C_N``: orthogonal sum of ``√d·Z`` over the divisors of ``N``."""
    check_level(N)
    ds = divisors(N)
    return Lattice.from_gram([[d if i == j else 0 for j in range(len(ds))] for i, d in enumerate(ds)])


def direct_sum(*lattices):
    return Lattice.from_gram(exact.block_diag(*[L.as_list() for L in lattices]))


def power(L, k):
    return direct_sum(*([L] * k)) if k else Lattice(())


def rescale(L, d):
    if d <= 0 or Fraction(d).denominator != 1:
        raise LatticeError("rescaling factor must be a positive integer")
    return Lattice.from_gram([[d * x for x in r] for r in L.gram])


def transform(L, U):
    """Lattice with basis given by the columns of unimodular ``U``."""
    return Lattice.from_gram(exact.congruent(L.as_list(), U))


def dual(L):
    Gi = exact.inverse(L.as_list())
    return RatLattice(_freeze(Gi), _freeze(Gi), L)


def partial_dual(L, m):
    """``L^{*,m} = L* ∩ (1/m)L`` with its transition into ``L``-coordinates."""
    G = L.as_list()
    n = L.dim
    Gi = exact.inverse(G)
    d, H = exact.lattice_intersect(Gi, [[Fraction(int(i == j), m) for j in range(n)] for i in range(n)])
    T = exact.transpose([[Fraction(x, d) for x in r] for r in H])
    return RatLattice(_freeze(exact.congruent(G, T)), _freeze(T), L)


def rescaled_partial_dual(L, m):
    """``√m·L^{*,m}`` as an integral lattice; raises if not integral."""
    P = partial_dual(L, m)
    G = [[m * x for x in r] for r in P.gram]
    if not exact.is_integral(G):
        raise LatticeError(f"√{m}·L^(*,{m}) is not integral")
    return Lattice.from_gram(G)


def is_even(L):
    return all(L.gram[i][i] % 2 == 0 for i in range(L.dim))


def even_sublattice_basis(L):
    """Columns span ``L_0 = {x : (x,x) even}`` (kernel of ``x ↦ Σ G_ii x_i mod 2``)."""
    n = L.dim
    odd = [i for i in range(n) if L.gram[i][i] % 2]
    if not odd:
        return exact.identity(n)
    i0 = odd[0]
    cols = []
    for j in range(n):
        v = [0] * n
        if j == i0:
            v[j] = 2
        else:
            v[j] = 1
            if j in odd:
                v[i0] = -1
        cols.append(v)
    return exact.transpose(cols)


def even_sublattice(L):
    return transform(L, even_sublattice_basis(L))


def _parity_shift(L):
    return tuple(Fraction(L.gram[i][i] % 2, 2) for i in range(L.dim))


def characteristic_coset(L):
    """Characteristic vectors ``diag(G) + 2L*``, as a coset of ``2L*``.

    In dual-basis coordinates ``c`` the condition ``(v,x) ≡ (x,x) mod 2`` for
    all ``x`` reads ``c_i ≡ G_ii (mod 2)``; the canonical representative has
    dual coordinates in ``{0, 1}``.
    """
    Gi = exact.inverse(L.as_list())
    return Coset(_freeze([[4 * x for x in r] for r in Gi]), _parity_shift(L), _freeze([[2 * x for x in r] for r in Gi]))


def shadow(L):
    """``S(L)`` = half the characteristic coset: a coset of ``L*``, equal to ``L*`` for even ``L``."""
    Gi = exact.inverse(L.as_list())
    return Coset(_freeze(Gi), _parity_shift(L), _freeze(Gi))


# --- strong modularity ---------------------------------------------------

@dataclass
class ModularityReport:
    N: int
    verdicts: dict  # divisor -> bool
    reasons: dict

    @property
    def ok(self):
        return all(self.verdicts.values())


def is_strongly_modular(L, N, **iso_kw):
    from .isometry import isometric

    check_level(N)
    verdicts, reasons = {}, {}
    for m in divisors(N):
        try:
            M = rescaled_partial_dual(L, m)
        except LatticeError as exc:
            verdicts[m] = False
            reasons[m] = str(exc)
            continue
        cert = isometric(L, M, **iso_kw)
        verdicts[m] = cert.isometric
        reasons[m] = "isometric" if cert.isometric else cert.witness
    return ModularityReport(N, verdicts, reasons)


# --- rational invariants -------------------------------------------------

def _squarefree_int(x):
    """Squarefree integer in the square class of the nonzero rational ``x``."""
    x = Fraction(x)
    a = x.numerator * x.denominator
    sign = -1 if a < 0 else 1
    return sign * prod(p for p, e in factorint(abs(a)).items() if e % 2)


def _split(a, p):
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v, a


def hilbert_symbol(a, b, p):
    """Hilbert symbol ``(a, b)_p`` for nonzero rationals; ``p`` a prime or ``"inf"``/``-1``.

    >>> hilbert_symbol(2, 11, 11)
    -1
    """
    a, b = _squarefree_int(a), _squarefree_int(b)
    if p in ("inf", -1, 0):
        return -1 if a < 0 and b < 0 else 1
    if not isprime(p):
        raise ValueError(f"{p} is not a prime")
    al, u = _split(a, p)
    be, v = _split(b, p)
    if p == 2:
        eps = lambda t: ((t - 1) // 2) % 2
        omg = lambda t: ((t * t - 1) // 8) % 2
        e = eps(u) * eps(v) + al * omg(v) + be * omg(u)
        return -1 if e % 2 else 1

    def leg(t):
        return 1 if pow(t % p, (p - 1) // 2, p) == 1 else -1

    r = (-1) ** (al * be * ((p - 1) // 2))
    if be % 2:
        r *= leg(u)
    if al % 2:
        r *= leg(v)
    return r


def diagonalize(G):
    """Rational diagonal entries of a congruent form (symmetric Gaussian elimination)."""
    A = [[Fraction(x) for x in r] for r in G]
    n = len(A)
    diag = []
    for i in range(n):
        if A[i][i] == 0:
            j = next((j for j in range(i + 1, n) if A[j][j] != 0), None)
            if j is not None:
                A[i], A[j] = A[j], A[i]
                for r in A:
                    r[i], r[j] = r[j], r[i]
            else:
                j = next((j for j in range(i + 1, n) if A[i][j] != 0), None)
                if j is None:
                    raise LatticeError("degenerate form")
                # e_i <- e_i + e_j makes the pivot 2 A_ij != 0
                for r in A:
                    r[i] += r[j]
                A[i] = [x + y for x, y in zip(A[i], A[j])]
        p = A[i][i]
        diag.append(p)
        for j in range(i + 1, n):
            f = A[j][i] / p
            if f:
                A[j] = [x - f * y for x, y in zip(A[j], A[i])]
                for k in range(n):
                    A[k][j] = A[j][k]
    return diag


@dataclass(frozen=True)
class RationalClass:
    dim: int
    det_class: int
    hasse: tuple  # sorted (p, ±1) pairs, only the -1 entries matter

    def invariant(self, p):
        return dict(self.hasse).get(p, 1)


def rational_class(L):
    G = L.gram if hasattr(L, "gram") else L
    diag = diagonalize(G)
    primes = {2}
    for a in diag:
        for x in (a.numerator, a.denominator):
            primes.update(factorint(abs(x)))
    hasse = []
    for p in sorted(primes):
        c = 1
        for i in range(len(diag)):
            for j in range(i + 1, len(diag)):
                c *= hilbert_symbol(diag[i], diag[j], p)
        hasse.append((p, c))
    real = 1
    for i in range(len(diag)):
        for j in range(i + 1, len(diag)):
            real *= hilbert_symbol(diag[i], diag[j], "inf")
    # product formula over all places
    assert real * prod(c for _, c in hasse) == 1
    d = prod(diag) if diag else Fraction(1)
    return RationalClass(len(diag), _squarefree_int(d), tuple(hasse))


def is_rationally_equivalent(A, B):
    """Hasse-Minkowski test for two positive definite forms."""
    ca, cb = rational_class(A), rational_class(B)
    if ca.dim != cb.dim or ca.det_class != cb.det_class:
        return False
    primes = {p for p, _ in ca.hasse} | {p for p, _ in cb.hasse}
    return all(ca.invariant(p) == cb.invariant(p) for p in primes)


# --- orthogonal decomposition --------------------------------------------

def _components(G):
    """Indecomposable short vectors grouped by connectivity of the inner-product graph."""
    G2, U = exact.lll_reduce(G)
    bound = max(G2[i][i] for i in range(len(G2)))
    vecs = short_vectors(G2, bound).all_vectors()
    V = np.array(vecs, dtype=np.int64)
    Gm = np.array(G2, dtype=np.int64)
    IP = V @ Gm @ V.T
    norms = np.diag(IP)
    # v decomposes orthogonally iff some w with 0 < (w,w) < (v,v) has (v,w) = (w,w)
    hit = (IP == norms[None, :]) & (norms[None, :] < norms[:, None])
    keep = ~hit.any(axis=1)
    idx = np.flatnonzero(keep)
    sub = IP[np.ix_(idx, idx)] != 0
    from scipy.sparse.csgraph import connected_components

    ncomp, labels = connected_components(sub, directed=False)
    comps = []
    for c in range(ncomp):
        members = V[idx[labels == c]].tolist()
        comps.append(members)
    return G2, U, comps


def decompose_orthogonal(L):
    """Indecomposable orthogonal summands of ``L`` (as lattices), largest first."""
    if L.dim == 0:
        return []
    G2, U, comps = _components(L.as_list())
    bases = [exact.row_basis(c) for c in comps]
    if sum(len(b) for b in bases) != L.dim or abs(exact.det([r for b in bases for r in b])) != 1:
        return [L]
    parts = [Lattice.from_gram(exact.matmul(exact.matmul(b, G2), exact.transpose(b))) for b in bases]
    parts = [Lattice.from_gram(exact.lll_reduce(p.as_list())[0]) for p in parts]
    parts.sort(key=lambda p: (-p.dim, p.gram))
    return parts


def split_cn_summands(L, N):
    """Write ``L = C_N^a ⊥ L'`` with ``min(L') > 1``; returns ``(a, L')``."""
    parts = decompose_orthogonal(L)
    ones = [p for p in parts if p.dim == 1]
    rest = [p for p in parts if p.dim > 1]
    counts = {}
    for p in ones:
        counts[p.gram[0][0]] = counts.get(p.gram[0][0], 0) + 1
    a = counts.get(1, 0)
    for d in divisors(N):
        if counts.get(d, 0) < a:
            raise LatticeError(
                f"{a} unit summands but only {counts.get(d, 0)} summands √{d}Z: not strongly {N}-modular"
            )
        counts[d] = counts.get(d, 0) - a
    leftover = [Lattice.from_gram([[d]]) for d in sorted(counts) for _ in range(counts[d])]
    pieces = rest + leftover
    Lp = direct_sum(*pieces) if pieces else Lattice(())
    return a, Lp

"""Short vectors, minima, theta series and root systems.

The core is a Fincke-Pohst enumerator on the LLL-reduced Gram matrix.  The
rational LDL decomposition is rescaled once so that every level of the
search is plain integer arithmetic: the interval for a coordinate comes from
an exact ``isqrt``, never from floating point.
"""

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import isqrt, lcm

import numpy as np

from .exact import inverse, ldl, lll_reduce, matvec

DEFAULT_CAP = 10 ** 8
# the vectorized counter is used while every quantity stays far inside int64
_NP_LIMIT = 1 << 52
_CHUNK = 1 << 19


class EnumerationOverflow(RuntimeError):
    def __init__(self, bound, cap):
        super().__init__(f"more than {cap} vectors of norm <= {bound}")
        self.bound = bound
        self.cap = cap


def _gram_of(obj):
    return obj.gram if hasattr(obj, "gram") else obj


class _Prepared:
    """LLL-reduced, integerized data for enumerating ``t + Zⁿ`` under a Gram matrix."""

    def __init__(self, gram, shift=None):
        n = len(gram)
        self.n = n
        G2, U = lll_reduce(gram)
        self.U = U
        if shift is None or not any(shift):
            t = [Fraction(0)] * n
        else:
            t = matvec(inverse(U), [Fraction(x) for x in shift])
        t = [x - (x.numerator // x.denominator) for x in t]
        e = 1
        for x in t:
            e = lcm(e, x.denominator)
        self.e = e
        self.tau = [int(x * e) for x in t]
        A = [[Fraction(x) / (e * e) for x in row] for row in G2]
        d, r = ldl(A)
        K = []
        R = []
        for i in range(n):
            k = 1
            for j in range(i + 1, n):
                k = lcm(k, r[i][j].denominator)
            K.append(k)
            R.append([(j, int(r[i][j] * k)) for j in range(i + 1, n) if r[i][j]])
        delta = 1
        for i in range(n):
            delta = lcm(delta, (d[i] / (K[i] * K[i])).denominator)
        self.K = K
        self.R = R
        self.W = [int(d[i] * delta / (K[i] * K[i])) for i in range(n)]
        self.delta = delta

    def _run(self, bound, cap, want_vectors):
        n, e, tau, K, R, W = self.n, self.e, self.tau, self.K, self.R, self.W
        bound = Fraction(bound)
        if bound < 0:
            return Counter(), []
        total = (bound * self.delta).numerator // (bound * self.delta).denominator
        hist = Counter()
        vecs = []
        u = [0] * n
        count = 0

        def level(i, T):
            nonlocal count
            c = 0
            for j, rij in R[i]:
                c -= rij * u[j]
            k = K[i]
            w = W[i]
            rad = isqrt(T // w)
            lo = -((rad - c) // k)  # ceil((c - rad)/k)
            hi = (c + rad) // k
            # first value >= lo congruent to tau[i] mod e
            lo += (tau[i] - lo) % e
            if i == 0:
                base = total - T
                for x in range(lo, hi + 1, e):
                    y = k * x - c
                    key = base + w * y * y
                    hist[key] += 1
                    if want_vectors:
                        u[0] = x
                        vecs.append((key, tuple(u)))
                count += (hi - lo) // e + 1 if hi >= lo else 0
                if count > cap:
                    raise EnumerationOverflow(bound, cap)
                return
            for x in range(lo, hi + 1, e):
                y = k * x - c
                u[i] = x
                level(i - 1, T - w * y * y)
            u[i] = 0

        if n == 0:
            hist[0] += 1
            if want_vectors:
                vecs.append((0, ()))
        else:
            level(n - 1, total)
        return hist, vecs

    def _total(self, bound):
        b = Fraction(bound) * self.delta
        return b.numerator // b.denominator

    def _run_np(self, bound, cap, want_vectors=False):
        """Same histogram as ``_run`` but level-by-level over numpy frontiers."""
        n, e = self.n, self.e
        total = self._total(bound)
        hist = Counter()
        found = []
        seen = [0]
        cols = [(np.array([j for j, _ in self.R[i]], dtype=np.int64),
                 np.array([r for _, r in self.R[i]], dtype=np.int64)) for i in range(n)]

        def expand(i, T, U):
            k, w = self.K[i], self.W[i]
            js, rs = cols[i]
            c = -(U[:, js] @ rs) if len(js) else np.zeros(len(T), dtype=np.int64)
            rad = _isqrt_np(T // w)
            lo = -((rad - c) // k)
            hi = (c + rad) // k
            lo = lo + (self.tau[i] - lo) % e
            cnt = np.where(hi >= lo, (hi - lo) // e + 1, 0)
            if i == 0:
                seen[0] += int(cnt.sum())
                if seen[0] > cap:
                    raise EnumerationOverflow(bound, cap)
            csum = np.cumsum(cnt)
            if len(csum) and csum[-1] > _CHUNK and len(T) > 1:
                # split the frontier so no child array exceeds the chunk size
                cuts = np.searchsorted(csum, np.arange(_CHUNK, csum[-1], _CHUNK), side="left")
                cuts = np.unique(np.concatenate(([0], np.maximum(cuts, 1), [len(T)])))
                for a, b in zip(cuts[:-1], cuts[1:]):
                    if b > a:
                        expand_part(i, T[a:b], U[a:b], c[a:b], lo[a:b], cnt[a:b])
                return
            expand_part(i, T, U, c, lo, cnt)

        def expand_part(i, T, U, c, lo, cnt):
            k, w = self.K[i], self.W[i]
            m = int(cnt.sum())
            if m == 0:
                return
            idx = np.repeat(np.arange(len(T)), cnt)
            start = np.repeat(np.cumsum(cnt) - cnt, cnt)
            x = lo[idx] + e * (np.arange(m) - start)
            y = k * x - c[idx]
            T2 = T[idx] - w * y * y
            if i == 0 and not want_vectors:
                keys, mult = np.unique(total - T2, return_counts=True)
                for a, b in zip(keys.tolist(), mult.tolist()):
                    hist[a] += b
                return
            U2 = U[idx]
            U2[:, i] = x
            if i == 0:
                found.append((total - T2, U2))
                return
            expand(i - 1, T2, U2)

        if n == 0:
            hist[0] += 1
            found.append((np.zeros(1, dtype=np.int64), np.zeros((1, 0), dtype=np.int64)))
        else:
            expand(n - 1, np.array([total], dtype=np.int64), np.zeros((1, n), dtype=np.int64))
        if want_vectors:
            if found:
                keys = np.concatenate([f[0] for f in found])
                coords = np.concatenate([f[1] for f in found])
            else:
                keys = np.zeros(0, dtype=np.int64)
                coords = np.zeros((0, n), dtype=np.int64)
            return keys, coords
        return hist

    def vector_arrays(self, bound, cap=DEFAULT_CAP):
        """``(keys, X)``: norms times ``delta`` and coordinates times ``e`` in the
        original basis, sorted by norm then lexicographically.  Needs the int64 path."""
        if Fraction(bound) < 0:
            return np.zeros(0, dtype=np.int64), np.zeros((0, self.n), dtype=np.int64)
        if not self._np_safe(bound):
            raise OverflowError("bound too large for the vectorized enumerator")
        keys, u = self._run_np(bound, cap, want_vectors=True)
        X = u @ np.array(self.U, dtype=np.int64).T if self.n else u
        if len(X):
            order = np.lexsort(tuple(X[:, j] for j in range(self.n - 1, -1, -1)) + (keys,))
            keys, X = keys[order], X[order]
        return keys, X

    def _np_safe(self, bound):
        t = self._total(bound)
        big = max([t] + [w * k * k for w, k in zip(self.W, self.K)])
        return t * big < _NP_LIMIT * _NP_LIMIT and t < _NP_LIMIT

    def counts(self, bound, cap=DEFAULT_CAP):
        if Fraction(bound) < 0:
            return {}
        if self._np_safe(bound):
            hist = self._run_np(bound, cap)
        else:
            hist, _ = self._run(bound, cap, False)
        return {Fraction(k, self.delta): v for k, v in hist.items()}

    def vectors(self, bound, cap=DEFAULT_CAP):
        """All vectors of norm <= bound as ``(norm, coords)`` in the original basis."""
        if self._np_safe(bound) and Fraction(bound) >= 0:
            keys, X = self.vector_arrays(bound, cap)
            e, dl = self.e, self.delta
            if e == 1:
                return [(Fraction(k, dl), tuple(r)) for k, r in zip(keys.tolist(), X.tolist())]
            return [(Fraction(k, dl), tuple(Fraction(a, e) for a in r)) for k, r in zip(keys.tolist(), X.tolist())]
        _, raw = self._run(bound, cap, True)
        out = []
        U, e = self.U, self.e
        for key, u in raw:
            y = matvec(U, u)
            if e != 1:
                y = tuple(Fraction(a, e) for a in y)
            else:
                y = tuple(y)
            out.append((Fraction(key, self.delta), y))
        out.sort()
        return out


def _isqrt_np(v):
    r = np.floor(np.sqrt(v.astype(np.float64))).astype(np.int64)
    while True:
        up = (r + 1) * (r + 1) <= v
        if not up.any():
            break
        r = r + up
    while True:
        down = r * r > v
        if not down.any():
            break
        r = r - down
    return r


@lru_cache(maxsize=512)
def _prepared_cached(gram, shift):
    return _Prepared([list(r) for r in gram], list(shift) if shift is not None else None)


def prepared(gram, shift=None):
    """Shared ``_Prepared`` for a Gram matrix (and coset shift)."""
    g = tuple(tuple(r) for r in gram)
    t = tuple(Fraction(x) for x in shift) if shift is not None and any(shift) else None
    return _prepared_cached(g, t)


@dataclass
class VectorList:
    """Vectors bucketed by norm; ``vectors`` is filled only on request."""

    counts: dict
    vectors: dict = field(default_factory=dict)

    def norms(self):
        return sorted(self.counts)

    def total(self):
        return sum(self.counts.values())

    def all_vectors(self):
        return [v for nrm in sorted(self.vectors) for v in self.vectors[nrm]]


def _collect(prep, bound, include_zero, explicit, cap):
    if explicit:
        vl = VectorList({}, {})
        for nrm, v in prep.vectors(bound, cap):
            if nrm == 0 and not include_zero:
                continue
            vl.vectors.setdefault(nrm, []).append(v)
        vl.counts = {k: len(v) for k, v in vl.vectors.items()}
        return vl
    counts = prep.counts(bound, cap)
    if not include_zero:
        counts.pop(Fraction(0), None)
    return VectorList(dict(sorted(counts.items())))


def short_vectors(L, bound, include_zero=False, explicit=True, cap=DEFAULT_CAP):
    """All lattice vectors of norm at most ``bound``, in basis coordinates.

    >>> short_vectors([[1, 0], [0, 1]], 1).counts
    {Fraction(1, 1): 4}
    """
    return _collect(prepared(_gram_of(L)), bound, include_zero, explicit, cap)


def coset_short_vectors(C, bound, explicit=True, cap=DEFAULT_CAP):
    """Vectors of ``C.base + C.shift`` with norm <= bound.

    ``C`` needs ``gram`` (the Gram of the base lattice) and ``shift`` (rational
    coordinates with respect to that base).
    """
    return _collect(prepared(C.gram, C.shift), bound, True, explicit, cap)


def minimum(L, cap=DEFAULT_CAP):
    """Least nonzero norm of the lattice."""
    G = _gram_of(L)
    G2, _ = lll_reduce(G)
    b = min(G2[i][i] for i in range(len(G2)))
    return min(short_vectors(G2, b, explicit=False, cap=cap).counts)


def coset_minimum(C, start=1, cap=DEFAULT_CAP):
    """Least norm occurring in a coset, by doubling the search bound."""
    prep = prepared(C.gram, C.shift)
    b = Fraction(start)
    while True:
        c = prep.counts(b, cap)
        if c:
            return min(c)
        b *= 2


def min0_shadow(L, N=None, k=None, cap=DEFAULT_CAP):
    """Least norm in the shadow of ``L``, zero included (so 0 for even L).

    With ``N`` and ``k`` the search starts at ``M(N, 0, k)``, which bounds the
    answer from above, so the doubling loop finishes in one round.
    """
    from .lattice import Lattice, shadow
    from .qseries import M

    if not isinstance(L, Lattice):
        L = Lattice.from_gram(L)
    start = Fraction(1, 4)
    if N is not None and k is not None:
        start = max(start, M(N, 0, k))
    return coset_minimum(shadow(L), start=start, cap=cap)


def theta_counts(L, bound, cap=DEFAULT_CAP):
    """Norm histogram (including the zero vector) up to ``bound``."""
    return prepared(_gram_of(L)).counts(bound, cap)


def coset_theta_counts(C, bound, cap=DEFAULT_CAP):
    return prepared(C.gram, C.shift).counts(bound, cap)


def theta_series(L, prec, cap=DEFAULT_CAP):
    """Theta series ``Σ q^{(v,v)}`` with grid precision ``prec`` (units of q^(1/24))."""
    from .qseries import QSeries

    bound = Fraction(prec - 1, 24)
    counts = theta_counts(L, bound, cap)
    return QSeries.from_exponents(counts, prec)


def coset_theta(C, prec, scale=1, cap=DEFAULT_CAP):
    """Theta series of a coset with exponents ``scale·(v,v)``, i.e. of the coset rescaled by √scale."""
    from .qseries import QSeries

    bound = Fraction(prec - 1, 24 * scale)
    counts = coset_theta_counts(C, bound, cap)
    return QSeries.from_exponents({k * scale: v for k, v in counts.items()}, prec)


# --- roots -----------------------------------------------------------------

_FAMILY_ORDER = {"E": 0, "D": 1, "A": 2}
_SUPERSCRIPT = str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹")


class RootSystemError(ValueError):
    pass


def ade_count(family, rank):
    if family == "A":
        return rank * (rank + 1)
    if family == "D":
        return 2 * rank * (rank - 1)
    return {6: 72, 7: 126, 8: 240}[rank]


def _classify_component(rank, count):
    if count == rank * (rank + 1):
        return "A"
    if rank >= 4 and count == 2 * rank * (rank - 1):
        return "D"
    if (rank, count) in {(6, 72), (7, 126), (8, 240)}:
        return "E"
    raise RootSystemError(f"no ADE component of rank {rank} with {count} roots")


@dataclass(frozen=True)
class RootSystem:
    components: tuple  # of (family, rank, root_count)

    @property
    def total_rank(self):
        return sum(c[1] for c in self.components)

    @property
    def total_roots(self):
        return sum(c[2] for c in self.components)

    def __str__(self):
        if not self.components:
            return "0"
        grouped = Counter((f, r) for f, r, _ in self.components)
        parts = []
        for (f, r), mult in sorted(grouped.items(), key=lambda t: (_FAMILY_ORDER[t[0][0]], -t[0][1])):
            s = f"{f}{r}"
            if mult > 1:
                s += str(mult).translate(_SUPERSCRIPT)
            parts.append(s)
        return " ⊥ ".join(parts)


def root_vectors(L, cap=DEFAULT_CAP):
    vl = short_vectors(L, 2, cap=cap)
    return vl.vectors.get(Fraction(2), [])


def root_count(L):
    return len(root_vectors(L))


def root_system(L):
    """ADE type of the sublattice spanned by the norm-2 vectors."""
    from .exact import rank as mat_rank

    G = _gram_of(L)
    roots = root_vectors(G)
    n = len(roots)
    if n == 0:
        return RootSystem(())
    Gr = [matvec(G, r) for r in roots]
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            if sum(a * b for a, b in zip(Gr[i], roots[j])):
                pi, pj = find(i), find(j)
                if pi != pj:
                    parent[pi] = pj
    comps = {}
    for i in range(n):
        comps.setdefault(find(i), []).append(roots[i])
    out = []
    for members in comps.values():
        rk = mat_rank([list(v) for v in members])
        out.append((_classify_component(rk, len(members)), rk, len(members)))
    out.sort(key=lambda c: (_FAMILY_ORDER[c[0]], -c[1]))
    return RootSystem(tuple(out))

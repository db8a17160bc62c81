"""Isometry testing and automorphism groups by short-vector backtracking.

A map of lattices is fixed by the images of an LLL-reduced basis.  Images
are searched among the vectors of the target with the same norm and the
same inner-product histogram against all short vectors (a cheap
fingerprint), and candidate lists for the remaining basis vectors are
filtered against every image chosen so far.  Automorphism groups are built
level by level as a stabilizer chain over that basis.
"""

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import exact
from .enumeration import prepared, short_vectors

DEFAULT_NODE_CAP = 10 ** 9


class Undecided(RuntimeError):
    """The backtrack hit its node cap before reaching a verdict."""


@dataclass
class IsoCertificate:
    isometric: bool
    U: list = None  # columns: images of A's basis in B-coordinates; Uᵀ·G_B·U = G_A
    witness: str = ""

    def __bool__(self):
        return self.isometric


@dataclass
class AutGroup:
    generators: list
    order: int
    orbit_lengths: list = field(default_factory=list)
    verified_order: int = None


def _gram(L):
    G = L.gram if hasattr(L, "gram") else L
    return [list(r) for r in G]


class _Shell:
    """Short vectors of a reduced Gram together with their inner products."""

    def __init__(self, G, bound):
        self.G = G
        prep = prepared(G)
        try:
            keys, X = prep.vector_arrays(bound)
            keep = keys != 0
            self.V = np.ascontiguousarray(X[keep])
        except OverflowError:
            vecs = short_vectors(G, bound).all_vectors()
            self.V = np.array(vecs, dtype=np.int64).reshape(len(vecs), len(G))
        Gm = np.array(G, dtype=np.int64)
        self.IP = self.V @ Gm @ self.V.T
        self.norms = np.diag(self.IP).copy()
        self.index = {v.tobytes(): i for i, v in enumerate(self.V)}
        vals, cnt = np.unique(self.norms, return_counts=True)
        self.counts = dict(zip(vals.tolist(), cnt.tolist()))

    def fingerprints(self, values, norm_values):
        """Per-vector histogram of (norm of partner, |inner product|)."""
        m = len(self.V)
        nidx = np.searchsorted(norm_values, self.norms)
        span = int(np.abs(self.IP).max()) + 1 if m else 1
        nn = len(norm_values)
        C = nn * span
        out = np.zeros((m, C), dtype=np.int32)
        step = max(1, 4_000_000 // max(m, 1))
        for s in range(0, m, step):
            block = np.abs(self.IP[s:s + step]) + span * nidx[None, :]
            rows = np.arange(block.shape[0])[:, None] * C
            out[s:s + step] = np.bincount((block + rows).ravel(), minlength=block.shape[0] * C).reshape(-1, C)
        return out, span

    def lookup(self, rows):
        return np.array([self.index.get(r.tobytes(), -1) for r in rows], dtype=np.int64)


def _key(G):
    return tuple(tuple(int(x) for x in r) for r in G)


@lru_cache(maxsize=4096)
def _reduced(key):
    R, U = exact.lll_reduce([list(r) for r in key])
    return R, U


@lru_cache(maxsize=256)
def _shell(key, bound):
    return _Shell([list(r) for r in key], bound)


def _prepare_pair(GA, GB):
    """Reduced Grams, shells and fingerprint classes for a search A -> B."""
    RA, UA = _reduced(_key(GA))
    RB, UB = _reduced(_key(GB))
    bound = max(RA[i][i] for i in range(len(RA)))
    SA = _shell(_key(RA), bound)
    SB = SA if GA is GB else _shell(_key(RB), bound)
    return RA, UA, SA, RB, UB, SB


def _fingerprint_classes(SA, SB):
    norm_values = np.unique(np.concatenate([SA.norms, SB.norms]))
    FA, spanA = SA.fingerprints(None, norm_values)
    if SB is SA:
        FB, spanB = FA, spanA
    else:
        FB, spanB = SB.fingerprints(None, norm_values)
    span = max(spanA, spanB)
    # fingerprints must be compared on a common layout
    def widen(F, s):
        if s == span:
            return F
        nn = len(norm_values)
        out = np.zeros((F.shape[0], nn * span), dtype=F.dtype)
        for k in range(nn):
            out[:, k * span:k * span + s] = F[:, k * s:(k + 1) * s]
        return out
    FA, FB = widen(FA, spanA), widen(FB, spanB)
    table = {}
    ca = np.array([table.setdefault((int(SA.norms[i]), FA[i].tobytes()), len(table)) for i in range(len(FA))], dtype=np.int64)
    if SB is SA:
        cb = ca
    else:
        cb = np.array([table.get((int(SB.norms[i]), FB[i].tobytes()), -1) for i in range(len(FB))], dtype=np.int64)
    return ca, cb


class _Search:
    """Backtracking for maps sending the base vectors of A into the shell of B."""

    def __init__(self, SA, SB, base, ca, cb, node_cap):
        self.SA, self.SB = SA, SB
        self.base = base  # indices into SA, in search order
        self.n = len(base)
        self.GA = SA.IP[np.ix_(base, base)]
        self.node_cap = node_cap
        self.nodes = 0
        self.root = [np.flatnonzero(cb == ca[b]) for b in base]

    def initial(self, fixed):
        """Candidate lists for all levels after fixing the first ``len(fixed)`` images."""
        cands = list(self.root)
        for l, w in enumerate(fixed):
            row = self.SB.IP[w]
            for j in range(l + 1, self.n):
                c = cands[j]
                cands[j] = c[row[c] == self.GA[j, l]]
        return cands

    def extend(self, fixed, cands, level, first_only=True, visit=None):
        """Depth-first completion of ``fixed``; yields full image lists."""
        n = self.n
        if level == n:
            yield list(fixed)
            return
        IP = self.SB.IP
        GA = self.GA
        for w in cands[level]:
            self.nodes += 1
            if self.nodes > self.node_cap:
                raise Undecided(f"node cap {self.node_cap} exceeded")
            row = IP[w]
            nxt = cands[:level + 1]
            ok = True
            for j in range(level + 1, n):
                c = cands[j]
                c = c[row[c] == GA[j, level]]
                if not len(c):
                    ok = False
                    break
                nxt.append(c)
            if not ok:
                continue
            fixed.append(int(w))
            yield from self.extend(fixed, nxt, level + 1)
            fixed.pop()


def _order_base(S, ca, basis_idx):
    """Greedy ordering: fewest candidates first, then most constrained by previous choices."""
    n = len(basis_idx)
    chosen = []
    remaining = list(range(n))
    class_members = {}
    for j in remaining:
        b = basis_idx[j]
        class_members[j] = np.flatnonzero(ca == ca[b])
    while remaining:
        best, best_key = None, None
        for j in remaining:
            c = class_members[j]
            b = basis_idx[j]
            for l in chosen:
                bl = basis_idx[l]
                c = c[S.IP[c, bl] == S.IP[b, bl]]
            key = (len(c), -sum(1 for l in chosen if S.IP[b, basis_idx[l]] != 0), j)
            if best_key is None or key < best_key:
                best, best_key = j, key
        chosen.append(best)
        remaining.remove(best)
    return [basis_idx[j] for j in chosen]


def _basis_indices(S):
    n = len(S.G)
    eye = np.eye(n, dtype=np.int64)
    idx = S.lookup(eye)
    assert (idx >= 0).all()
    return [int(i) for i in idx]


def _images_to_matrix(SA, SB, base, images):
    """Row-convention matrix M with (base rows of A) · M = (image rows in B)."""
    Bm = SA.V[base]
    Wm = SB.V[images]
    # Bm is a signed permutation of the identity (base = reduced basis vectors)
    Binv = np.rint(np.linalg.inv(Bm)).astype(np.int64)
    assert (Binv @ Bm == np.eye(len(base), dtype=np.int64)).all()
    return Binv @ Wm


def _screen(GA, GB, SA=None, SB=None):
    if len(GA) != len(GB):
        raise ValueError("dimension mismatch")
    if exact.det(GA) != exact.det(GB):
        return "determinant"
    RA, RB = _reduced(_key(GA))[0], _reduced(_key(GB))[0]
    # the minimum is among the diagonal entries' range; compare it by a short count
    ba = min(RA[i][i] for i in range(len(RA)))
    bb = min(RB[i][i] for i in range(len(RB)))
    b = min(ba, bb)
    ca, cb = _shell(_key(RA), b).counts, _shell(_key(RB), b).counts
    if min(ca, default=None) != min(cb, default=None):
        return "minimum"
    return None


def isometric(A, B, node_cap=DEFAULT_NODE_CAP):
    """Decide whether ``A ≅ B``; a certificate ``U`` satisfies ``Uᵀ G_B U = G_A``."""
    GA, GB = _gram(A), _gram(B)
    if len(GA) != len(GB):
        raise ValueError("dimension mismatch")
    if not GA:
        return IsoCertificate(True, [])
    why = _screen(GA, GB)
    if why:
        return IsoCertificate(False, witness=why)
    RA, UA, SA, RB, UB, SB = _prepare_pair(GA, GB)
    if SA.counts != SB.counts:
        return IsoCertificate(False, witness="theta prefix")
    ca, cb = _fingerprint_classes(SA, SB)
    if sorted(ca.tolist()) != sorted(cb.tolist()):
        return IsoCertificate(False, witness="vector fingerprints")
    base = _order_base(SA, ca, _basis_indices(SA))
    search = _Search(SA, SB, base, ca, cb, node_cap)
    for images in search.extend([], search.initial([]), 0):
        M = _images_to_matrix(SA, SB, base, images)
        # rows of M: reduced A basis in reduced B coordinates -> original frames
        return IsoCertificate(True, _lift_iso(M.tolist(), UA, UB, GA, GB))
    return IsoCertificate(False, witness="exhausted backtrack")


def _lift_iso(M, UA, UB, GA, GB):
    """Column-convention ``U`` with ``Uᵀ G_B U = G_A`` from a reduced-frame row map."""
    # reduced A basis vector i (orig A coords: column i of UA) -> B vector with
    # reduced coords M[i] -> orig B coords UB·M[i]
    X = exact.matmul(UB, exact.transpose(M))  # columns: images of reduced-A basis in B coords
    U = exact.matmul(X, [[int(x) for x in r] for r in exact.inverse(UA)])
    assert exact.congruent(GB, U) == GA
    return U


def _perm_of(S, M):
    img = S.V @ np.asarray(M, dtype=np.int64)
    p = S.lookup(img)
    assert (p >= 0).all()
    return p


def _orbit(point, perms):
    seen = {point}
    stack = [point]
    while stack:
        x = stack.pop()
        for p in perms:
            y = int(p[x])
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def automorphism_group(L, node_cap=DEFAULT_NODE_CAP, verify=True, seed=0):
    """Generators and order of ``Aut(L)``.

    Generators ``g`` act on column coordinate vectors and satisfy
    ``gᵀ G g = G``.  With ``verify`` the order is recomputed from the
    generators by a randomized Schreier-Sims run and the two must agree.
    """
    G = _gram(L)
    n = len(G)
    if n == 0:
        return AutGroup([], 1, [])
    R, U = _reduced(_key(G))
    bound = max(R[i][i] for i in range(n))
    S = _shell(_key(R), bound)
    ca, _ = _fingerprint_classes(S, S)
    base = _order_base(S, ca, _basis_indices(S))
    search = _Search(S, S, base, ca, ca, node_cap)
    gens_M, gens_P = [], []
    orbit_lengths = [0] * n
    for i in range(n - 1, -1, -1):
        fixed = base[:i]
        cands = search.initial(fixed)
        orbit = _orbit(base[i], gens_P)
        failed = set()
        for w in cands[i]:
            w = int(w)
            if w in orbit or w in failed:
                continue
            trial = fixed + [w]
            c2 = search.initial(trial)
            if any(len(c) == 0 for c in c2[i + 1:]):
                failed |= _orbit(w, gens_P)
                continue
            found = next(search.extend(trial, c2, i + 1), None)
            if found is None:
                failed |= _orbit(w, gens_P)
                continue
            M = _images_to_matrix(S, S, base, found)
            gens_M.append(M)
            gens_P.append(_perm_of(S, M))
            orbit = _orbit(base[i], gens_P)
        orbit_lengths[i] = len(orbit)
    order = 1
    for o in orbit_lengths:
        order *= o
    Uinv = [[int(x) for x in r] for r in exact.inverse(U)]
    gens = []
    for M in gens_M:
        # reduced row map x -> x M; in original column coordinates y -> U Mᵀ U⁻¹ y
        g = exact.matmul(exact.matmul(U, exact.transpose(M.tolist())), Uinv)
        assert exact.congruent(G, g) == G
        gens.append(g)
    grp = AutGroup(gens, order, orbit_lengths)
    if verify:
        grp.verified_order = schreier_sims_order(gens_P, base, seed=seed)
        if grp.verified_order != order:
            raise AssertionError(f"backtrack order {order} != Schreier-Sims order {grp.verified_order}")
    return grp


def aut_order(L, **kw):
    return automorphism_group(L, **kw)


# --- randomized Schreier-Sims on the permutation action on short vectors ------

def _compose(a, b):
    """Apply ``a`` then ``b``."""
    return b[a]


def _inv(a):
    r = np.empty_like(a)
    r[a] = np.arange(len(a))
    return r


class _Level:
    def __init__(self, point):
        self.point = point
        self.gens = []
        self.tree = {point: None}  # point -> (parent, generator index)

    def rebuild(self):
        self.tree = {self.point: None}
        frontier = [self.point]
        while frontier:
            nxt = []
            for x in frontier:
                for k, g in enumerate(self.gens):
                    y = int(g[x])
                    if y not in self.tree:
                        self.tree[y] = (x, k)
                        nxt.append(y)
            frontier = nxt
        self.invs = [_inv(g) for g in self.gens]

    def strip(self, g):
        """Multiply ``g`` by inverse transversal elements until it fixes ``point``; None if off-orbit."""
        y = int(g[self.point])
        if y not in self.tree:
            return None
        while self.tree[y] is not None:
            x, k = self.tree[y]
            g = _compose(g, self.invs[k])
            y = x
        return g


def schreier_sims_order(perms, base, seed=0, patience=40):
    """Order of the group generated by ``perms`` (random Schreier-Sims, fixed seed)."""
    if not perms:
        return 1
    rng = random.Random(seed)
    m = len(perms[0])
    ident = np.arange(m)
    levels = [_Level(b) for b in base]
    for g in perms:
        levels[0].gens.append(g)
    for lv in levels:
        lv.rebuild()

    def sift(g):
        for i, lv in enumerate(levels):
            h = lv.strip(g)
            if h is None:
                return i, g
            g = h
        return len(levels), g

    # product replacement for random elements
    pool = [p.copy() for p in perms] + [ident.copy()]
    while len(pool) < 10:
        pool.append(pool[rng.randrange(len(pool))].copy())
    acc = ident.copy()
    for _ in range(50):
        i, j = rng.sample(range(len(pool)), 2)
        pool[i] = _compose(pool[i], pool[j])
    streak = 0
    while streak < patience:
        i, j = rng.sample(range(len(pool)), 2)
        pool[i] = _compose(pool[i], pool[j])
        acc = _compose(acc, pool[i])
        lvl, h = sift(acc)
        if lvl == len(levels) and (h == ident).all():
            streak += 1
            continue
        streak = 0
        # h fixes the first lvl base points; add it to levels 0..lvl
        top = min(lvl, len(levels) - 1)
        for t in range(top + 1):
            levels[t].gens.append(h)
            levels[t].rebuild()
    order = 1
    for lv in levels:
        order *= len(lv.tree)
    return order

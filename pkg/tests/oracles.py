"""Slow, independent reference computations used by the tests.

Nothing here calls into the package: norms come from brute force over a
coordinate box, determinants from cofactor expansion, Hilbert symbols from
searching for solutions of z² = ax² + by² modulo a prime power, and eta
coefficients from the pentagonal number theorem.
"""

from collections import Counter
from fractions import Fraction
from itertools import product
from math import ceil, floor, isqrt, lcm

import numpy as np


def cofactor_det(A):
    n = len(A)
    if n == 0:
        return 1
    if n == 1:
        return A[0][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in A[1:]]
        total += (-1) ** j * A[0][j] * cofactor_det(minor)
    return total


def _box(G, bound, shift):
    """Integer ranges covering every z with (z+shift)ᵀG(z+shift) <= bound."""
    Gi = np.linalg.inv(np.array(G, dtype=float))
    ranges = []
    for i in range(len(G)):
        r = (float(bound) * Gi[i][i]) ** 0.5 + 1e-6
        t = float(shift[i])
        ranges.append(range(ceil(-r - t) - 1, floor(r - t) + 2))
    return ranges


def box_counts(G, bound, shift=None):
    """Norm -> count for all vectors of ``shift + Zⁿ`` with norm <= bound (zero included)."""
    n = len(G)
    shift = [Fraction(0)] * n if shift is None else [Fraction(s) for s in shift]
    e = lcm(1, *(s.denominator for s in shift))
    ranges = _box(G, bound, shift)
    Z = np.array(list(product(*ranges)), dtype=np.int64).reshape(-1, n)
    X = Z * e + np.array([int(s * e) for s in shift], dtype=np.int64)
    # clear the denominators of a rational Gram as well
    g = lcm(1, *(Fraction(x).denominator for r in G for x in r))
    Gi = np.array([[int(Fraction(x) * g) for x in r] for r in G], dtype=np.int64)
    q = np.einsum("ij,jk,ik->i", X, Gi, X)
    out = Counter()
    lim = Fraction(bound) * e * e * g
    for val, cnt in zip(*np.unique(q, return_counts=True)):
        if val <= lim:
            out[Fraction(int(val), e * e * g)] += int(cnt)
    return dict(out)


def box_vectors(G, bound):
    """Explicit nonzero lattice vectors of norm <= bound, as tuples."""
    ranges = _box(G, bound, [0] * len(G))
    out = []
    for z in product(*ranges):
        if any(z):
            nrm = sum(G[i][j] * z[i] * z[j] for i in range(len(G)) for j in range(len(G)))
            if nrm <= bound:
                out.append(z)
    return out


def brute_aut_order(G):
    """Count matrices U (columns among vectors of norm G_ii) with UᵀGU = G."""
    n = len(G)
    cand = {}
    for i in range(n):
        cand[i] = [v for v in box_vectors(G, G[i][i])
                   if sum(G[a][b] * v[a] * v[b] for a in range(n) for b in range(n)) == G[i][i]]

    def ip(u, v):
        return sum(G[a][b] * u[a] * v[b] for a in range(n) for b in range(n))

    count = 0

    def extend(cols):
        nonlocal count
        i = len(cols)
        if i == n:
            if abs(cofactor_det([[c[r] for c in cols] for r in range(n)])) == 1:
                count += 1
            return
        for v in cand[i]:
            if all(ip(cols[j], v) == G[j][i] for j in range(i)):
                extend(cols + [v])

    extend([])
    return count


def gauss_reduce(G):
    """Lagrange-Gauss reduction of a binary form; returns the reduced Gram."""
    a, b, c = G[0][0], G[0][1], G[1][1]
    while True:
        if a > c:
            a, c = c, a
        m = round(Fraction(b, a))
        if m == 0:
            break
        c = c - 2 * m * b + m * m * a
        b = b - m * a
        if a <= c:
            if abs(2 * b) <= a:
                break
    if a > c:
        a, c = c, a
    return [[a, b], [b, c]]


def _has_conic_point(a, b, p):
    """Whether z² = ax² + by² has a nonzero solution in Q_p.

    ``a`` and ``b`` must have p-adic valuation at most 1.  A primitive
    solution mod p^k with some partial derivative of valuation t, 2t < k,
    lifts by Hensel; every p-adic primitive solution has such a derivative
    with t <= v(2) + 1, so k = 2(v(2) + 1) + 1 decides the question.
    """
    v2 = 1 if p == 2 else 0
    k = 2 * (v2 + 1) + 1
    m = p ** k
    r = np.arange(m, dtype=np.int64)
    x = r[:, None, None]
    y = r[None, :, None]
    z = r[None, None, :]
    f = (z * z - a * x * x - b * y * y) % m
    prim = (x % p != 0) | (y % p != 0) | (z % p != 0)
    mask = (f == 0) & prim

    def val(t):
        t = t % m
        out = np.full(t.shape, k, dtype=np.int64)
        cur = t.copy()
        cnt = np.zeros(t.shape, dtype=np.int64)
        for _ in range(k):
            nz = (cur % p == 0) & (cur != 0)
            cnt = cnt + nz
            cur = np.where(nz, cur // p, cur)
        return np.where(t == 0, out, cnt)

    idx = np.nonzero(mask)
    if len(idx[0]) == 0:
        return False
    xs, ys, zs = r[idx[0]], r[idx[1]], r[idx[2]]
    t = np.minimum(np.minimum(val(2 * zs), val(2 * a * xs)), val(2 * b * ys))
    return bool(np.any(2 * t < k))


def hilbert_brute(a, b, p):
    """Hilbert symbol from the definition (p in {2, 3, 5}; a, b squarefree integers)."""
    return 1 if _has_conic_point(a, b, p) else -1


def eta_pentagonal(nmax):
    """Coefficients of ∏(1 - x^m) up to x^nmax via Euler's pentagonal theorem."""
    c = [0] * (nmax + 1)
    j = 0
    while True:
        done = True
        for s in ((j * (3 * j - 1)) // 2, (j * (3 * j + 1)) // 2):
            if s <= nmax:
                c[s] = (-1) ** j
                done = False
        if done and j > 0:
            break
        j += 1
    return c


def is_square(n):
    return n >= 0 and isqrt(n) ** 2 == n

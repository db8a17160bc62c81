"""Exact integer and rational linear algebra.

Matrices are plain lists of row lists holding ``int`` or ``fractions.Fraction``.
Nothing in here ever touches floating point.
"""

from fractions import Fraction
from math import gcd, lcm


class NotPositiveDefinite(ValueError):
    pass


class RankDeficient(ValueError):
    pass


def identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def transpose(A):
    return [list(r) for r in zip(*A)]


def matmul(A, B):
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def matvec(A, v):
    return [sum(a * b for a, b in zip(row, v)) for row in A]


def vecmat(v, A):
    n = len(A[0]) if A else 0
    out = [0] * n
    for c, row in zip(v, A):
        if c:
            for j, a in enumerate(row):
                out[j] += c * a
    return out


def quad(G, v):
    """``vᵀ G v``."""
    return sum(a * b for a, b in zip(v, matvec(G, v)))


def congruent(G, U):
    """``Uᵀ G U`` where the columns of ``U`` are the new basis vectors."""
    return matmul(matmul(transpose(U), G), U)


def block_diag(*blocks):
    n = sum(len(b) for b in blocks)
    out = [[0] * n for _ in range(n)]
    o = 0
    for b in blocks:
        for i, row in enumerate(b):
            out[o + i][o:o + len(row)] = list(row)
        o += len(b)
    return out


def common_denominator(A):
    d = 1
    for row in A:
        for x in row:
            d = lcm(d, Fraction(x).denominator)
    return d


def to_integer(A):
    """Split a rational matrix as ``(d, M)`` with ``A = M / d``."""
    if all(type(x) is int for row in A for x in row):
        return 1, [list(row) for row in A]
    d = common_denominator(A)
    return d, [[int(Fraction(x) * d) for x in row] for row in A]


def is_integral(A):
    return all(Fraction(x).denominator == 1 for row in A for x in row)


def is_symmetric(A):
    n = len(A)
    return all(len(r) == n for r in A) and all(A[i][j] == A[j][i] for i in range(n) for j in range(i))


def det(A):
    """Determinant by fraction-free Bareiss elimination (exact for ``int`` and ``Fraction``)."""
    n = len(A)
    if n == 0:
        return 1
    d, M = to_integer(A)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k]:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    r = sign * M[n - 1][n - 1]
    return r if d == 1 else Fraction(r, d ** n)


def inverse(A):
    """Exact inverse over the rationals; raises ``ZeroDivisionError`` if singular."""
    n = len(A)
    M = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            raise ZeroDivisionError("singular matrix")
        M[c], M[p] = M[p], M[c]
        inv = 1 / M[c][c]
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [row[n:] for row in M]


def solve_left(x, B):
    """Rational coordinates ``y`` with ``y B = x`` for a square nonsingular ``B``."""
    return vecmat(x, inverse(B))


def rank(A):
    M = [[Fraction(x) for x in row] for row in A]
    r = 0
    cols = len(M[0]) if M else 0
    for c in range(cols):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        for i in range(r + 1, len(M)):
            if M[i][c]:
                f = M[i][c] / M[r][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        r += 1
    return r


def _hnf_upper(A):
    """Upper row HNF with transform: ``U A = H``, pivots increasing, zero rows last."""
    m = len(A)
    n = len(A[0]) if m else 0
    H = [list(map(int, r)) for r in A]
    U = identity(m)
    r = 0
    for c in range(n):
        if r == m:
            break
        rows = [i for i in range(r, m) if H[i][c]]
        if not rows:
            continue
        # gcd-reduce column c into row r
        while True:
            rows = [i for i in range(r, m) if H[i][c]]
            piv = min(rows, key=lambda i: abs(H[i][c]))
            if piv != r:
                H[r], H[piv] = H[piv], H[r]
                U[r], U[piv] = U[piv], U[r]
            done = True
            for i in range(r + 1, m):
                if H[i][c]:
                    q = H[i][c] // H[r][c]
                    H[i] = [a - q * b for a, b in zip(H[i], H[r])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[r])]
                    if H[i][c]:
                        done = False
            if done:
                break
        if H[r][c] < 0:
            H[r] = [-a for a in H[r]]
            U[r] = [-a for a in U[r]]
        p = H[r][c]
        for i in range(r):
            q = H[i][c] // p
            if q:
                H[i] = [a - q * b for a, b in zip(H[i], H[r])]
                U[i] = [a - q * b for a, b in zip(U[i], U[r])]
        r += 1
    return H, U


def hnf(A):
    """Row-style Hermite normal form.

    Returns ``(H, U)`` with ``U`` unimodular and ``U A = H``.  ``H`` is lower
    triangular in the staircase sense: each nonzero row ends in a positive
    pivot, entries below a pivot lie in ``[0, pivot)``, and zero rows come
    first.
    """
    m = len(A)
    if m == 0:
        return [], []
    n = len(A[0])
    B = [list(reversed(A[m - 1 - i])) for i in range(m)]
    T, V = _hnf_upper(B)
    H = [list(reversed(T[m - 1 - i])) for i in range(m)]
    U = [list(reversed(V[m - 1 - i])) for i in range(m)]
    assert len(H[0]) == n
    return H, U


def row_basis(A):
    """Integer basis (nonzero HNF rows) of the row lattice of ``A``."""
    H, _ = hnf(A)
    return [r for r in H if any(r)]


def _full_rank(A, n):
    if len(A) != n or rank(A) != n:
        raise RankDeficient(f"generators span rank {rank(A) if A else 0}, expected {n}")


def lattice_sum(A, B):
    """Sum of two full-rank rational lattices given by generator rows.

    Returns ``(d, H)``: the sum is ``H / d`` with ``H`` in HNF.
    """
    n = len((A or B)[0])
    gens = [list(r) for r in A] + [list(r) for r in B]
    if rank(gens) != n:
        raise RankDeficient("lattice sum is not full rank")
    d, M = to_integer(gens)
    return d, row_basis(M)


def dual_basis(A):
    """Basis of the dual (standard inner product) of the full-rank lattice with rows ``A``."""
    return transpose(inverse(A))


def lattice_intersect(A, B):
    """Intersection of two full-rank rational lattices, via ``(A* + B*)*``.

    Returns ``(d, H)`` as for :func:`lattice_sum`.
    """
    n = len(A[0])
    da, Ha = lattice_sum(A, [])
    db, Hb = lattice_sum(B, [])
    _full_rank(Ha, n)
    _full_rank(Hb, n)
    A_ = [[Fraction(x, da) for x in r] for r in Ha]
    B_ = [[Fraction(x, db) for x in r] for r in Hb]
    ds, S = lattice_sum(dual_basis(A_), dual_basis(B_))
    back = dual_basis([[Fraction(x, ds) for x in r] for r in S])
    return lattice_sum(back, [])


def contains(basis, x):
    """Whether the rational vector ``x`` lies in the row lattice of a square ``basis``."""
    return all(Fraction(c).denominator == 1 for c in solve_left(x, basis))


def is_unimodular(U):
    return all(Fraction(x).denominator == 1 for r in U for x in r) and abs(det(U)) == 1


def _round_div(a, b):
    """Nearest integer to ``a / b`` for ``b > 0``, ties toward +inf."""
    return (2 * a + b) // (2 * b)


def lll_reduce(G, delta=Fraction(3, 4)):
    """LLL-reduce a positive definite Gram matrix in exact integer arithmetic.

    Returns ``(G2, U)`` with ``G2 = Uᵀ G U`` and ``U`` unimodular (columns
    are the new basis vectors in the old coordinates).  Rational input is
    scaled to an integer Gram first.  This is the integral Gram-matrix LLL
    (Cohen, Algorithm 2.6.7) with the usual ``delta = 3/4``.
    """
    n = len(G)
    if not is_symmetric(G):
        raise ValueError("Gram matrix not symmetric")
    scale, B = to_integer(G)
    B = [list(r) for r in B]
    H = identity(n)
    if n == 0:
        return [], []
    dn, dd = Fraction(delta).numerator, Fraction(delta).denominator
    lam = [[0] * n for _ in range(n)]
    d = [0] * (n + 1)  # d[i+1] = d_i of Cohen, d[0] = 1
    d[0] = 1
    d[1] = B[0][0]
    if d[1] <= 0:
        raise NotPositiveDefinite("Cholesky pivot <= 0")

    def redi(k, l):
        if 2 * abs(lam[k][l]) <= d[l + 1]:
            return
        q = _round_div(lam[k][l], d[l + 1])
        H[k] = [a - q * b for a, b in zip(H[k], H[l])]
        # b_k <- b_k - q b_l on the Gram matrix
        Bkl = B[k][l]
        Bll = B[l][l]
        for j in range(n):
            B[k][j] -= q * B[l][j]
        for j in range(n):
            B[j][k] = B[k][j]
        B[k][k] = B[k][k] + q * q * Bll - q * Bkl  # fix diagonal (row update already subtracted q*B[l][k])
        lam[k][l] -= q * d[l + 1]
        for i in range(l):
            lam[k][i] -= q * lam[l][i]

    def swapi(k, kmax):
        H[k], H[k - 1] = H[k - 1], H[k]
        B[k], B[k - 1] = B[k - 1], B[k]
        for row in B:
            row[k], row[k - 1] = row[k - 1], row[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        la = lam[k][k - 1]
        Bn = (d[k - 1] * d[k + 1] + la * la) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - la * t) // d[k]
            lam[i][k - 1] = (Bn * t + la * lam[i][k]) // d[k + 1]
        d[k] = Bn

    k, kmax = 1, 0
    while k < n:
        if k > kmax:
            kmax = k
            for j in range(k + 1):
                u = B[k][j]
                for i in range(j):
                    u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
                if j < k:
                    lam[k][j] = u
                else:
                    if u <= 0:
                        raise NotPositiveDefinite("Cholesky pivot <= 0")
                    d[k + 1] = u
        redi(k, k - 1)
        # Lovász: dd*d_k*d_{k-2} < dn*d_{k-1}^2 - dd*lam^2  (scaled by d_{k-1})
        if dd * d[k + 1] * d[k - 1] < dn * d[k] * d[k] - dd * lam[k][k - 1] ** 2:
            swapi(k, kmax)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                redi(k, l)
            k += 1
    U = transpose(H)
    G2 = [[Fraction(x, scale) if scale != 1 else x for x in r] for r in B]
    return G2, U


def is_lll_reduced(G, delta=Fraction(3, 4)):
    """Check size reduction and the Lovász condition from a rational Gram-Schmidt."""
    n = len(G)
    mu = [[Fraction(0)] * n for _ in range(n)]
    bstar = [Fraction(0)] * n
    for i in range(n):
        for j in range(i):
            mu[i][j] = (Fraction(G[i][j]) - sum(mu[j][t] * mu[i][t] * bstar[t] for t in range(j))) / bstar[j]
        bstar[i] = Fraction(G[i][i]) - sum(mu[i][t] ** 2 * bstar[t] for t in range(i))
    for i in range(n):
        for j in range(i):
            if abs(mu[i][j]) > Fraction(1, 2):
                return False
    for k in range(1, n):
        if bstar[k] < (delta - mu[k][k - 1] ** 2) * bstar[k - 1]:
            return False
    return True


def ldl(G):
    """Rational ``Q(x) = Σ d_i (x_i + Σ_{j>i} r_ij x_j)²`` decomposition.

    Returns ``(d, r)``; raises :class:`NotPositiveDefinite` on a pivot <= 0.
    """
    n = len(G)
    A = [[Fraction(x) for x in row] for row in G]
    d = [Fraction(0)] * n
    r = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        if A[i][i] <= 0:
            raise NotPositiveDefinite("Cholesky pivot <= 0")
        d[i] = A[i][i]
        for j in range(i + 1, n):
            r[i][j] = A[i][j] / d[i]
        for j in range(i + 1, n):
            for l in range(j, n):
                A[j][l] -= d[i] * r[i][j] * r[i][l]
                A[l][j] = A[j][l]
    return d, r


def is_positive_definite(G):
    try:
        ldl(G)
    except NotPositiveDefinite:
        return False
    return True

"""Exact truncated q-series, eta quotients and the theta/shadow bases.

Every series lives on the grid of exponents ``j/24``.  A :class:`QSeries`
stores nonzero coefficients by grid index together with ``prec``: the
coefficients at grid indices ``>= prec`` are unknown.  The variable is
``q = exp(πiz)``, so ``Θ_L = Σ q^{(v,v)}`` has integral exponents for
integral ``L``.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from sympy import divisors, integer_nthroot

from .lattice import LatticeError, c_n, check_level, mod_params, sigma1

GRID = 24
DEFAULT_PREC = 480


class PrecisionError(ValueError):
    pass


class QSeries:
    __slots__ = ("coeffs", "prec")

    def __init__(self, coeffs, prec):
        self.prec = prec
        self.coeffs = {int(k): Fraction(v) for k, v in coeffs.items() if v and k < prec}

    @classmethod
    def from_exponents(cls, counts, prec):
        """Build from a mapping ``true exponent (rational) -> coefficient``."""
        out = {}
        for e, c in counts.items():
            g = Fraction(e) * GRID
            if g.denominator != 1:
                raise PrecisionError(f"exponent {e} is not on the 1/{GRID} grid")
            out[int(g)] = out.get(int(g), 0) + c
        return cls(out, prec)

    @classmethod
    def one(cls, prec):
        return cls({0: 1}, prec)

    def valuation(self):
        """Least grid index with a nonzero coefficient (``prec`` for a series known to vanish)."""
        return min(self.coeffs) if self.coeffs else self.prec

    def leading(self):
        """``(grid exponent, coefficient)`` of the lowest term."""
        if not self.coeffs:
            raise PrecisionError("series vanishes to its precision")
        v = min(self.coeffs)
        return v, self.coeffs[v]

    def __getitem__(self, grid):
        if grid >= self.prec:
            raise PrecisionError(f"coefficient at grid {grid} beyond precision {self.prec}")
        return self.coeffs.get(grid, Fraction(0))

    def coefficient(self, exponent):
        g = Fraction(exponent) * GRID
        if g.denominator != 1:
            return Fraction(0)
        return self[int(g)]

    def terms(self):
        return sorted(self.coeffs.items())

    def truncate(self, prec):
        return QSeries(self.coeffs, min(prec, self.prec))

    def __add__(self, other):
        if not isinstance(other, QSeries):
            other = QSeries({0: other}, self.prec)
        p = min(self.prec, other.prec)
        c = dict(self.coeffs)
        for k, v in other.coeffs.items():
            c[k] = c.get(k, 0) + v
        return QSeries(c, p)

    __radd__ = __add__

    def __neg__(self):
        return QSeries({k: -v for k, v in self.coeffs.items()}, self.prec)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = Fraction(c)
        return QSeries({k: c * v for k, v in self.coeffs.items()}, self.prec)

    def shift(self, grid):
        """Multiply by ``q^(grid/24)``."""
        return QSeries({k + grid: v for k, v in self.coeffs.items()}, self.prec + grid)

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            return self.scale(other)
        va, vb = self.valuation(), other.valuation()
        p = min(self.prec + vb, other.prec + va)
        out = {}
        for i, a in self.coeffs.items():
            lim = p - i
            for j, b in other.coeffs.items():
                if j < lim:
                    out[i + j] = out.get(i + j, 0) + a * b
        return QSeries(out, p)

    __rmul__ = __mul__

    def __pow__(self, e):
        e = Fraction(e)
        if e.denominator == 1 and e >= 0:
            n = int(e)
            result = QSeries.one(self.prec - self.valuation())
            base = self
            first = True
            while n:
                if n & 1:
                    result = base if first else result * base
                    first = False
                n >>= 1
                if n:
                    base = base * base
            return result
        return self.rpow(e)

    def rpow(self, r):
        """``f^r`` for rational ``r``; needs ``c^r`` rational for the leading coefficient ``c``."""
        r = Fraction(r)
        v, c = self.leading()
        vr = v * r
        if vr.denominator != 1:
            raise PrecisionError(f"q^({v}/24)^{r} is off the grid")
        cr = _rational_power(c, r)
        rel = self.prec - v
        a = {k - v: x / c for k, x in self.coeffs.items()}
        # g = (Σ a_k x^k)^r with a_0 = 1 (J.C.P. Miller recurrence)
        g = [Fraction(0)] * rel
        if rel > 0:
            g[0] = Fraction(1)
        items = sorted((k, x) for k, x in a.items() if k > 0)
        for n in range(1, rel):
            s = Fraction(0)
            for k, x in items:
                if k > n:
                    break
                if g[n - k]:
                    s += ((r + 1) * k - n) * x * g[n - k]
            g[n] = s / n
        return QSeries({k + int(vr): cr * x for k, x in enumerate(g) if x}, rel + int(vr))

    def inverse(self):
        return self.rpow(-1)

    def __truediv__(self, other):
        if isinstance(other, QSeries):
            return self * other.inverse()
        return self.scale(1 / Fraction(other))

    def substitute(self, m):
        """``f(m·z)``: exponents scaled by the positive rational ``m``."""
        m = Fraction(m)
        out = {}
        for k, x in self.coeffs.items():
            g = k * m
            if g.denominator != 1:
                raise PrecisionError("substitution leaves the grid")
            out[int(g)] = x
        p = self.prec * m
        return QSeries(out, -((-p.numerator) // p.denominator))

    def equal_to(self, other, prec=None):
        p = min(self.prec, other.prec) if prec is None else prec
        if p > min(self.prec, other.prec):
            raise PrecisionError("comparison beyond known precision")
        keys = {k for k in self.coeffs if k < p} | {k for k in other.coeffs if k < p}
        return all(self.coeffs.get(k, 0) == other.coeffs.get(k, 0) for k in keys)

    def __eq__(self, other):
        return isinstance(other, QSeries) and self.equal_to(other)

    __hash__ = None

    def __repr__(self):
        return f"QSeries({format_series(self)})"

    def __str__(self):
        return format_series(self)


def _rational_power(c, r):
    c, r = Fraction(c), Fraction(r)
    if r.denominator == 1:
        return c ** int(r)
    root = r.denominator
    sign = 1
    if c < 0:
        if root % 2 == 0:
            raise PrecisionError(f"even root of negative coefficient {c}")
        sign = -1
    num, ok1 = integer_nthroot(abs(c.numerator), root)
    den, ok2 = integer_nthroot(c.denominator, root)
    if not (ok1 and ok2):
        raise PrecisionError(f"{c}^(1/{root}) is irrational")
    return (sign * Fraction(num, den)) ** r.numerator


_SUP = str.maketrans("0123456789-", "⁰¹²³⁴⁵⁶⁷⁸⁹⁻")


def format_exponent(grid):
    e = Fraction(grid, GRID)
    if e == 0:
        return ""
    if e == 1:
        return "q"
    if e.denominator == 1:
        return "q" + str(e.numerator).translate(_SUP)
    return f"q^({e})"


def format_series(f, upto=None):
    """Render as ``1 + 24q² + …`` with exponents as reduced fractions."""
    parts = []
    for k, c in f.terms():
        if upto is not None and k > upto:
            break
        mon = format_exponent(k)
        if mon and abs(c) == 1:
            body = mon
        else:
            body = f"{abs(c)}{mon}"
        parts.append(("- " if c < 0 else "+ ") + body)
    s = " ".join(parts)
    if s.startswith("+ "):
        s = s[2:]
    elif s.startswith("- "):
        s = "-" + s[2:]
    tail = f"O({format_exponent(f.prec) or '1'})"
    return (s + " + " if s else "") + tail


# --- eta -----------------------------------------------------------------

def euler_product(step, prec):
    """``Π_{m>=1} (1 - q^{step·m})`` (grid units) expanded below ``prec`` by direct multiplication."""
    c = [0] * max(prec, 1)
    c[0] = 1
    m = 1
    while step * m < prec:
        s = step * m
        for i in range(prec - 1, s - 1, -1):
            c[i] -= c[i - s]
        m += 1
    return QSeries({i: x for i, x in enumerate(c) if x}, prec)


def pentagonal_product(step, prec):
    """Same product via Euler's pentagonal number theorem (independent check)."""
    out = {}
    k = 0
    while True:
        hit = False
        for kk in ((k,) if k == 0 else (k, -k)):
            e = kk * (3 * kk - 1) // 2 * step
            if e < prec:
                out[e] = out.get(e, 0) + (-1) ** abs(kk)
                hit = True
        if not hit and k > 0:
            break
        k += 1
    return QSeries(out, prec)


def _eta_grid_valuation(mult):
    v = Fraction(mult) * 2  # q^{mult/12} = grid 2·mult
    if v.denominator != 1:
        raise PrecisionError(f"η({mult}z) has valuation off the grid")
    return int(v)


def eta_expansion(mult, prec=DEFAULT_PREC):
    """``η(mult·z) = q^{mult/12} Π (1 - q^{2·mult·m})`` below grid ``prec``."""
    mult = Fraction(mult)
    v = _eta_grid_valuation(mult)
    if prec <= v:
        raise PrecisionError("precision does not exceed the valuation")
    step = mult * 2 * GRID
    assert step.denominator == 1
    return euler_product(int(step), prec - v).shift(v)


@dataclass(frozen=True)
class EtaQuotient:
    """``prefactor · Π η(mult·z)^exp``."""

    factors: tuple  # (mult: Fraction, exp: int)
    prefactor: Fraction = Fraction(1)

    def valuation(self):
        return sum(_eta_grid_valuation(m) * e for m, e in self.factors)

    def expand(self, prec=DEFAULT_PREC):
        v = self.valuation()
        rel = prec - v
        if rel <= 0:
            return QSeries({}, prec)
        f = QSeries.one(rel)
        for m, e in self.factors:
            step = Fraction(m) * 2 * GRID
            unit = euler_product(int(step), rel)
            f = f * (unit ** e)
        out = f.shift(v).scale(self.prefactor)
        assert out.valuation() == v
        return out

    def __mul__(self, other):
        acc = {}
        for m, e in self.factors + other.factors:
            acc[Fraction(m)] = acc.get(Fraction(m), 0) + e
        return EtaQuotient(tuple(sorted((m, e) for m, e in acc.items() if e)), self.prefactor * other.prefactor)

    def __pow__(self, n):
        return EtaQuotient(tuple((m, e * n) for m, e in self.factors), self.prefactor ** n)


def eta_level(N, mult=1, exp=1):
    """``η^{(N)}(mult·z)^exp = Π_{d|N} η(d·mult·z)^exp``."""
    return EtaQuotient(tuple((Fraction(d) * mult, exp) for d in divisors(N)))


def g2_quotient(N):
    p = mod_params(N)
    if p.ev:
        M = N // 2
        q = eta_level(M, Fraction(1, 2)) * eta_level(M, 4) * eta_level(M, 1, -1) * eta_level(M, 2, -1)
    else:
        q = eta_level(N, Fraction(1, 2)) * eta_level(N, 2) * eta_level(N, 1, -2)
    return q ** p.s


def s1_quotient(N):
    p = mod_params(N)
    if not p.ev:
        return EtaQuotient((), Fraction(2) ** p.sigma0) * eta_level(N, 2, 2) * eta_level(N, 1, -1)
    base = EtaQuotient(((Fraction(1), 5), (Fraction(4), 2), (Fraction(1, 2), -2), (Fraction(2), -3)), Fraction(2))
    if N == 2:
        return base
    M = N // 2
    scaled = EtaQuotient(tuple((m * M, e) for m, e in base.factors), base.prefactor)
    return base * scaled


def s2_quotient_odd(N):
    p = mod_params(N)
    assert not p.ev
    pre = -Fraction(1, 2 ** (p.s * p.sigma0 // 2)) if (p.s * p.sigma0) % 2 == 0 else None
    if pre is None:
        raise LatticeError("odd exponent in the s2 prefactor")
    return EtaQuotient((), pre) * eta_level(N, 1, p.s) * eta_level(N, 2, -p.s)


S2_OF_2 = EtaQuotient(((Fraction(1, 2), 8), (Fraction(2), 16), (Fraction(1), -16), (Fraction(4), -8)), Fraction(-1, 16))


# --- the bases g1, g2, s1, s2 ----------------------------------------------

def _check_leading(f, grid, coeff, what):
    v, c = f.leading()
    if v != grid or (coeff is not None and c != coeff):
        raise AssertionError(f"{what}: leading term {c}·q^({Fraction(v, GRID)}), expected q^({Fraction(grid, GRID)})")


def g1(N, prec=DEFAULT_PREC):
    """Theta series of ``C_N``, by enumeration."""
    from .enumeration import theta_series

    f = theta_series(c_n(N), prec)
    ev = mod_params(N).ev
    if prec > 2 * GRID:
        assert f[0] == 1 and f[GRID] == 2 and f[2 * GRID] == 2 * ev
    return f


def g2(N, prec=DEFAULT_PREC):
    """The hauptmodul-type eta quotient, ``q - s·q² + …``."""
    f = g2_quotient(N).expand(prec)
    if prec > 2 * GRID:
        assert f[GRID] == 1 and f[2 * GRID] == -mod_params(N).s, f"g2({N}) leading terms wrong"
    return f


def s1(N, prec=DEFAULT_PREC):
    p = mod_params(N)
    f = s1_quotient(N).expand(prec)
    lead = Fraction(p.sigma1, 4) if not p.ev else Fraction(sigma1(N // 2), 2)
    _check_leading(f, int(lead * GRID), None, f"s1({N})")
    return f


def s2(N, prec=DEFAULT_PREC):
    p = mod_params(N)
    if not p.ev:
        f = s2_quotient_odd(N).expand(prec)
        _check_leading(f, -2 * GRID, None, f"s2({N})")
        return f
    if N == 2:
        f = S2_OF_2.expand(prec)
    else:
        M = N // 2
        # product has valuation -(1+M) in q; ask for enough room for the root
        r = Fraction(p.s, 8)
        inner_prec = int((prec + GRID) / r) + 2 * GRID
        a = S2_OF_2.expand(inner_prec)
        b = S2_OF_2.expand(inner_prec // M + GRID).substitute(M)
        # the product has positive leading coefficient; the root is taken on the
        # branch that keeps s2's sign as for N = 2 (checked against real shadows)
        f = -((a * b).rpow(r))
    _check_leading(f, -GRID, None, f"s2({N})")
    return f.truncate(prec)


# --- decomposition ---------------------------------------------------------

@dataclass
class DecompResult:
    N: int
    k: int
    c: list
    m_structural: int
    m_shadow: object = None

    @property
    def degree(self):
        return len(self.c) - 1


class DecompositionError(ValueError):
    pass


def degree_bound(N, k):
    lN = mod_params(N).lN
    return (k * lN.numerator) // lN.denominator


def min_decomp_prec(N, k):
    return GRID * (degree_bound(N, k) + 2)


def solve_coefficients(theta, N, k, prec=None):
    """Triangular solve of ``Θ = g1^k Σ c_i g2^i``; returns ``(c, residual)``."""
    prec = theta.prec if prec is None else min(prec, theta.prec)
    d = degree_bound(N, k)
    if prec < min_decomp_prec(N, k):
        raise PrecisionError(f"need grid precision >= {min_decomp_prec(N, k)}")
    G1 = g1(N, prec)
    G2 = g2(N, prec)
    F = theta.truncate(prec) / (G1 ** k)
    c = []
    rest = F
    powi = QSeries.one(prec)
    for i in range(d + 1):
        ci = rest[i * GRID]
        c.append(ci)
        rest = rest - powi.scale(ci)
        powi = powi * G2
    return c, rest


def decompose_theta(L, N, k=None, prec=DEFAULT_PREC, theta=None):
    """Coefficients ``c_i`` with ``Θ_L = g1^k Σ c_i g2^i`` and the shadow level they predict."""
    from .enumeration import theta_series

    p = mod_params(N)
    if k is None:
        if L.dim % p.sigma0:
            raise DecompositionError(f"dimension {L.dim} is not a multiple of σ0({N})")
        k = L.dim // p.sigma0
    prec = max(prec, min_decomp_prec(N, k))
    if theta is None:
        theta = theta_series(L, prec)
    c, residual = solve_coefficients(theta, N, k, prec)
    if residual.coeffs:
        g = min(residual.coeffs)
        raise DecompositionError(f"Θ_L not in the span of g1^k g2^i: residual at q^({Fraction(g, GRID)})")
    ms = max((i for i, x in enumerate(c) if x), default=0)
    dr = DecompResult(N, k, c, ms)
    # the shadow leading exponent is at most N·M(0,k)
    top = int(N * M(N, 0, k) * GRID) + GRID
    pred = shadow_prediction(dr, N, k, prec=top)
    if pred.coeffs:
        dr.m_shadow = level_from_leading(N, k, Fraction(pred.leading()[0], GRID))
    return dr


def shadow_prediction(dr, N, k, prec=DEFAULT_PREC):
    """``s1^k Σ c_i s2^i`` to grid precision ``prec``."""
    c = dr.c if isinstance(dr, DecompResult) else list(dr)
    d = len(c) - 1
    p = mod_params(N)
    v1 = (Fraction(p.sigma1, 4) if not p.ev else Fraction(sigma1(N // 2), 2)) * GRID * k
    v2 = (-2 if not p.ev else -1) * GRID
    # absolute precision needed for s1 and s2 so that the result is good to prec
    need = prec - int(v1) - v2 * d
    S1 = s1(N, need + int(v1 // k) + GRID)
    S2 = s2(N, need + v2 + GRID)
    S1k = S1 ** k
    out = QSeries({}, 10 ** 9)
    powi = QSeries.one(need + GRID)
    for i, ci in enumerate(c):
        if ci:
            out = out + (S1k * powi).scale(ci)
        if i < d:
            powi = powi * S2
    if out.prec < prec:
        raise PrecisionError(f"shadow prediction only known to grid {out.prec} < {prec}")
    return out.truncate(prec)


def level_from_leading(N, k, lead):
    """Invert ``N·M(m,k) = lead`` for ``m``; returns a Fraction (integer if consistent)."""
    p = mod_params(N)
    if not p.ev:
        return (Fraction(k * p.sigma1, 4) - lead) / 2
    return Fraction(k * sigma1(N // 2), 2) - lead


# --- closed forms ----------------------------------------------------------

def M(N, m, k):
    """Possible shadow minima ``M^(N)(m,k)``."""
    p = mod_params(N)
    if not p.ev:
        return (Fraction(k * p.sigma1, 4) - 2 * m) / N
    return (Fraction(k * sigma1(N // 2), 2) - m) / N


class ShadowLevelError(ValueError):
    pass


def shadow_level(N, k, min0):
    m = level_from_leading(N, k, Fraction(min0) * N)
    if m.denominator != 1 or m < 0:
        raise ShadowLevelError(f"min0 = {min0} is not M^({N})(m,{k}) for any integer m >= 0 (got m = {m})")
    return int(m)


def extremal_bound(N, n):
    p = mod_params(N)
    return 2 + 2 * ((n * p.sigma1) // (24 * p.sigma0))


def root_count_formula(N, k):
    p = mod_params(N)
    return 2 * k * (p.s + p.ev - (k + 1))


def kmax(N):
    return mod_params(N).kmax


def nmax(N):
    return mod_params(N).nmax


# --- hypothetical shadows ------------------------------------------------

@dataclass
class Obstruction:
    where: str  # "theta" or "shadow"
    exponent: Fraction
    coefficient: Fraction
    kind: str  # non-integral, odd, negative, negative-norm, zero-norm


def long_shadow_obstructions(N, k, prec=DEFAULT_PREC):
    """Problems with ``c = (1, -2k)``: coefficients of Θ or the predicted shadow that no lattice can have."""
    c = [Fraction(1), Fraction(-2 * k)]
    theta = g1(N, prec) ** k * (QSeries.one(prec) - g2(N, prec).scale(2 * k))
    shad = shadow_prediction(c, N, k, prec)
    found = []
    for where, f in (("theta", theta), ("shadow", shad)):
        for g, x in f.terms():
            e = Fraction(g, GRID)
            if g < 0:
                found.append(Obstruction(where, e, x, "negative-norm"))
            elif x.denominator != 1:
                found.append(Obstruction(where, e, x, "non-integral"))
            elif x < 0:
                found.append(Obstruction(where, e, x, "negative"))
            elif g == 0:
                # only the zero vector has norm 0
                if x != 1:
                    found.append(Obstruction(where, e, x, "zero-norm"))
            elif x % 2:
                found.append(Obstruction(where, e, x, "odd"))
    return found

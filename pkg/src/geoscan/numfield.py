"""Exact arithmetic in Q(alpha) and certified questions about one embedding.

Polynomials are lists of :class:`fractions.Fraction` in ascending order.  A
:class:`NumberField` fixes the complex embedding by an interval box that is
certified (Krawczyk test) to contain exactly one root of the defining
polynomial.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import sympy
from mpmath import iv, mp

INTERVAL_PREC = 128
DEFAULT_IM_THRESHOLD = 0.01


class FieldError(ValueError):
    pass


def parse_rational(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise FieldError(f"expected a rational given as 'num/den', got {value!r}")


# ----------------------------------------------------------------- polynomials


def ptrim(p):
    p = [Fraction(c) for c in p]
    while p and p[-1] == 0:
        p.pop()
    return p


def pdeg(p):
    return len(ptrim(p)) - 1


def padd(p, q):
    n = max(len(p), len(q))
    return ptrim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def psub(p, q):
    return padd(p, [-c for c in q])


def pmul(p, q):
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return ptrim(out)


def pdivmod(p, q):
    p, q = ptrim(p), ptrim(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    quot = [Fraction(0)] * max(len(p) - len(q) + 1, 1)
    rem = p[:]
    lead = q[-1]
    while len(rem) >= len(q) and rem:
        shift = len(rem) - len(q)
        c = rem[-1] / lead
        quot[shift] = c
        for i, b in enumerate(q):
            rem[i + shift] -= c * b
        rem = ptrim(rem)
    return ptrim(quot), rem


def pmonic(p):
    p = ptrim(p)
    if not p:
        return p
    return [c / p[-1] for c in p]


def pgcd(p, q):
    p, q = ptrim(p), ptrim(q)
    while q:
        p, q = q, pdivmod(p, q)[1]
    return pmonic(p)


def pderiv(p):
    return ptrim([i * c for i, c in enumerate(p)][1:])


def psquarefree(p):
    p = ptrim(p)
    if not p:
        raise FieldError("zero polynomial")
    g = pgcd(p, pderiv(p))
    return pmonic(pdivmod(p, g)[0]) if pdeg(g) > 0 else pmonic(p)


def peval(p, x):
    acc = x * 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _sign_at(p, x):
    """Sign of ``p`` at a rational ``x``, or at +/-infinity for ``x`` = +/-1j."""
    if x == 1j or x == -1j:
        lead = p[-1]
        s = 1 if lead > 0 else -1
        if x == -1j and pdeg(p) % 2 == 1:
            s = -s
        return s
    v = peval(p, x)
    return (v > 0) - (v < 0)


def sturm_sequence(p):
    p = psquarefree(p)
    seq = [p, pderiv(p)]
    while seq[-1]:
        r = pdivmod(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append([-c for c in r])
    return [s for s in seq if s]


def _variations(seq, x):
    signs = [s for s in (_sign_at(q, x) for q in seq) if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def sturm_real_root_count(p, interval=None):
    """Number of distinct real roots of ``p``, in the open ``interval`` if given.

    ``interval`` is ``(lo, hi)`` with rational (or float, taken exactly)
    endpoints; ``None`` for either end means unbounded.
    """
    p = ptrim(p)
    if not p:
        raise FieldError("zero polynomial")
    if pdeg(p) == 0:
        return 0
    seq = sturm_sequence(p)
    lo, hi = (None, None) if interval is None else interval
    a = -1j if lo is None else Fraction(lo)
    b = 1j if hi is None else Fraction(hi)
    count = _variations(seq, a) - _variations(seq, b)
    if b != 1j and peval(seq[0], b) == 0:
        count -= 1
    return count


# ------------------------------------------------------------- interval tools


def _ivq(x):
    x = Fraction(x)
    return iv.mpf(x.numerator) / iv.mpf(x.denominator)


def _box(center, radius):
    r = mpmath.mpf(radius)
    c = mpmath.mpc(center)
    return iv.mpc(iv.mpf([c.real - r, c.real + r]), iv.mpf([c.imag - r, c.imag + r]))


def _strictly_inside(inner, outer):
    return (
        inner.real.a > outer.real.a
        and inner.real.b < outer.real.b
        and inner.imag.a > outer.imag.a
        and inner.imag.b < outer.imag.b
    )


def _iv_eval(p, X):
    acc = iv.mpc(0)
    for c in reversed(p):
        acc = acc * X + _ivq(c)
    return acc


def krawczyk_certifies(p, center, radius):
    """True if the box around ``center`` provably holds exactly one root of ``p``."""
    iv.prec = max(iv.prec, INTERVAL_PREC)
    with mp.workprec(INTERVAL_PREC):
        c = mpmath.mpc(center)
        dp_c = peval([mpmath.mpf(x.numerator) / x.denominator for x in pderiv(p)], c)
        if dp_c == 0:
            return False
        Y = 1 / dp_c
    X = _box(center, radius)
    C = iv.mpc(iv.mpf(c.real), iv.mpf(c.imag))
    Yi = iv.mpc(iv.mpf(Y.real), iv.mpf(Y.imag))
    K = C - Yi * _iv_eval(p, C) + (1 - Yi * _iv_eval(pderiv(p), X)) * (X - C)
    return _strictly_inside(K, X)


def newton_refine(p, z, steps=60):
    with mp.workprec(2 * INTERVAL_PREC):
        pf = [mpmath.mpf(x.numerator) / x.denominator for x in p]
        dpf = [mpmath.mpf(x.numerator) / x.denominator for x in pderiv(p)]
        z = mpmath.mpc(z)
        for _ in range(steps):
            d = peval(dpf, z)
            if d == 0:
                break
            step = peval(pf, z) / d
            z -= step
            if abs(step) < mpmath.mpf(2) ** (-2 * INTERVAL_PREC + 8):
                break
        return +z


# ----------------------------------------------------------------- fields


class NumberField:
    """``Q(alpha)`` with ``alpha`` the root of ``min_poly`` near ``root``."""

    def __init__(self, min_poly, root, radius=1e-6, check_irreducible=True):
        p = pmonic([parse_rational(c) for c in min_poly])
        if pdeg(p) < 1:
            raise FieldError("defining polynomial must have degree >= 1")
        self.min_poly = tuple(p)
        self.degree = pdeg(p)
        if check_irreducible and not is_irreducible(p):
            raise FieldError(f"defining polynomial {p} is reducible over Q")
        self.root = complex(root)
        self.radius = float(radius)
        self._center, self._radius = self._certify(self.root, self.radius)

    def _certify(self, guess, radius):
        p = list(self.min_poly)
        if self.degree == 1:
            return mpmath.mpc(-p[0]), mpmath.mpf(0)
        z = newton_refine(p, guess)
        if abs(complex(z) - guess) > radius:
            raise FieldError("root enclosure does not contain a root of the polynomial")
        r = mpmath.mpf(radius)
        while r > mpmath.mpf(2) ** (-INTERVAL_PREC + 16):
            if krawczyk_certifies(p, z, r):
                return z, r
            r /= 16
        raise FieldError("could not certify an isolated root in the given enclosure")

    @property
    def enclosure(self):
        if self.degree == 1:
            v = _ivq(-self.min_poly[0])
            return iv.mpc(v, iv.mpf(0))
        return _box(self._center, self._radius)

    def refine(self):
        """Shrink the certified enclosure by a factor of 2**16."""
        if self.degree == 1:
            return
        r = self._radius / 2 ** 16
        if krawczyk_certifies(list(self.min_poly), self._center, r):
            self._radius = r

    @property
    def root_approx(self):
        return complex(self._center)

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.min_poly == other.min_poly and (
            abs(self.root_approx - other.root_approx) < 1e-9
        )

    def __hash__(self):
        return hash(self.min_poly)

    def __repr__(self):
        return f"NumberField({[str(c) for c in self.min_poly]}, root~{self.root_approx:.6g})"

    def element(self, coeffs):
        return FieldElement(self, coeffs)

    def gen(self):
        if self.degree == 1:
            return FieldElement(self, [-self.min_poly[0]])
        return FieldElement(self, [0, 1])

    def rational(self, q):
        return FieldElement(self, [q])


def is_irreducible(p):
    x = sympy.Symbol("x")
    poly = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(p)], x, domain="QQ")
    return poly.is_irreducible


def factor_over_q(p):
    x = sympy.Symbol("x")
    poly = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(p)], x, domain="QQ")
    _, factors = poly.factor_list()
    out = []
    for f, _mult in factors:
        coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(f.all_coeffs())]
        out.append(pmonic(coeffs))
    return out


class FieldElement:
    """``c0 + c1 alpha + ... + c_{n-1} alpha^{n-1}`` with rational ``ci``."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs):
        coeffs = [parse_rational(c) for c in coeffs]
        n = field.degree
        if len(coeffs) > n:
            coeffs = pdivmod(coeffs, list(field.min_poly))[1]
        coeffs = list(coeffs) + [Fraction(0)] * (n - len(coeffs))
        self.field = field
        self.coeffs = tuple(coeffs)

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.field is not self.field and other.field != self.field:
                raise FieldError("field mismatch")
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.field, [other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, [-a for a in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prod = pmul(list(self.coeffs), list(other.coeffs))
        return FieldElement(self.field, pdivmod(prod, list(self.field.min_poly))[1])

    __rmul__ = __mul__

    def inverse(self):
        a = ptrim(list(self.coeffs))
        if not a:
            raise ZeroDivisionError("inversion of zero in a number field")
        # extended Euclid: s*a + t*p = 1
        r0, r1 = list(self.field.min_poly), a
        s0, s1 = [], [Fraction(1)]
        while r1:
            q, r = pdivmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, psub(s0, pmul(q, s1))
        if pdeg(r0) != 0:
            raise FieldError("element not invertible: defining polynomial is reducible")
        return FieldElement(self.field, [c / r0[0] for c in s0])

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = FieldElement(self.field, [1])
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def is_zero(self):
        return not any(self.coeffs)

    def is_rational(self):
        return not any(self.coeffs[1:])

    def __repr__(self):
        return f"FieldElement({[str(c) for c in self.coeffs]})"

    def interval(self):
        return _iv_eval(list(self.coeffs), self.field.enclosure)

    def approx(self):
        with mp.workprec(INTERVAL_PREC):
            return complex(peval([mpmath.mpf(c.numerator) / c.denominator for c in self.coeffs],
                                 mpmath.mpc(self.field._center)))

    def multiplication_matrix(self):
        """Matrix of ``x -> self * x`` in the basis 1, alpha, ..., alpha^(n-1)."""
        n = self.field.degree
        cols = []
        for j in range(n):
            basis = [0] * n
            basis[j] = 1
            cols.append((self * FieldElement(self.field, basis)).coeffs)
        return [[cols[j][i] for j in range(n)] for i in range(n)]

    def conjugate_approx(self):
        return self.approx().conjugate()


def field_add(a, b):
    return a + b


def field_mul(a, b):
    return a * b


def field_inv(a):
    return a.inverse()


def characteristic_polynomial(matrix):
    n = len(matrix)
    m = sympy.Matrix(n, n, lambda i, j: sympy.Rational(matrix[i][j].numerator, matrix[i][j].denominator))
    x = sympy.Symbol("x")
    cp = m.charpoly(x)
    return [Fraction(int(c.p), int(c.q)) for c in reversed(cp.all_coeffs())]


def minimal_polynomial(e, max_refine=8):
    """Monic minimal polynomial of ``e`` over Q."""
    if e.is_rational():
        return [-e.coeffs[0], Fraction(1)]
    cp = characteristic_polynomial(e.multiplication_matrix())
    sqf = psquarefree(cp)
    factors = factor_over_q(sqf)
    if len(factors) == 1:
        return factors[0]
    for _ in range(max_refine + 1):
        val = e.interval()
        hits = [f for f in factors if _contains_zero(_iv_eval(f, val))]
        if len(hits) == 1:
            return hits[0]
        e.field.refine()
    raise FieldError("could not separate minimal polynomial candidates")


def _contains_zero(z):
    return z.real.a <= 0 <= z.real.b and z.imag.a <= 0 <= z.imag.b


class Realness(enum.Enum):
    CERTIFIED_NOT_REAL = "CertifiedNotReal"
    NUMERICALLY_REAL = "NumericallyReal"
    INCONCLUSIVE = "Inconclusive"


def embedding_is_real(e, refine_limit=8, threshold=DEFAULT_IM_THRESHOLD):
    """Decide whether ``e`` is real under the field's embedding.

    The imaginary part is bounded with interval arithmetic; the root enclosure
    is tightened up to ``refine_limit`` times while the answer is open.
    """
    for attempt in range(refine_limit + 1):
        im = e.interval().imag
        if im.a > 0 or im.b < 0:
            return Realness.CERTIFIED_NOT_REAL
        mid = abs(float(im.mid))
        if mid < threshold:
            return Realness.NUMERICALLY_REAL
        if attempt < refine_limit:
            e.field.refine()
    return Realness.INCONCLUSIVE


def certified_nonreal_pairs(p):
    """Number of conjugate pairs of non-real roots of ``p`` certified by Krawczyk boxes."""
    p = psquarefree(p)
    with mp.workprec(INTERVAL_PREC):
        roots = mpmath.polyroots(
            [mpmath.mpf(c.numerator) / c.denominator for c in reversed(p)],
            maxsteps=200, extraprec=2 * INTERVAL_PREC,
        )
    count = 0
    for z in roots:
        z = mpmath.mpc(z)
        if z.imag <= 0:
            continue
        z = newton_refine(p, z)
        r = abs(z.imag) / 4
        while r > mpmath.mpf(2) ** (-INTERVAL_PREC + 16):
            if krawczyk_certifies(p, z, r):
                count += 1
                break
            r /= 16
    return count


def root_accounting(p):
    """``(real roots by Sturm, certified non-real pairs, squarefree degree)``."""
    sqf = psquarefree(p)
    return sturm_real_root_count(sqf), certified_nonreal_pairs(sqf), pdeg(sqf)

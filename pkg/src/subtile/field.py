"""Exact arithmetic in cyclotomic fields Q(zeta_n).

Elements are stored in the power basis ``1, zeta, ..., zeta^(d-1)`` modulo the
n-th cyclotomic polynomial, as a tuple of integer numerators over one positive
common denominator.  The complex embedding ``zeta -> exp(2*pi*i/n)`` turns an
element into a point of the plane, so the same type serves as scalar and as
planar coordinate.

Signs of real and imaginary parts are decided by a floating-point filter with a
rigorous error bound, falling back to mpmath interval evaluation with
increasing precision.  Zero is always decided exactly, so refinement only runs
on nonzero values and terminates unless the precision budget is exhausted.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import mpmath
from mpmath import iv
from mpmath.libmp import to_rational

from .errors import UndecidableComparison

DEFAULT_PRECISION_BITS = 512
_precision_budget = max(64, int(os.environ.get("SUBTILE_PRECISION_BITS", DEFAULT_PRECISION_BITS)))


def precision_budget() -> int:
    return _precision_budget


def set_precision_budget(bits: int) -> None:
    global _precision_budget
    if bits < 64:
        raise ValueError("precision budget must be at least 64 bits")
    _precision_budget = int(bits)


def parse_rational(text) -> Fraction:
    """Exact parse of ``"num/den"``, decimal strings, ints and Fractions."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        raise TypeError("floats are not accepted as exact rationals")
    return Fraction(str(text).strip())


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _cyclotomic_poly(n: int) -> list[int]:
    """Coefficients (low to high) of the n-th cyclotomic polynomial."""
    poly = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            poly = _poly_exact_div(poly, _cyclotomic_poly(d))
    return poly


def _poly_exact_div(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    lead = den[-1]
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1] // lead
        out[i] = c
        for j, dj in enumerate(den):
            num[i + j] -= c * dj
    assert not any(num), "non-exact polynomial division"
    return out


class CyclotomicField:
    """The field Q(zeta_n); instances are cached per order."""

    _instances: dict[int, "CyclotomicField"] = {}

    def __new__(cls, n: int):
        if n < 3:
            raise ValueError("cyclotomic order must be at least 3 for planar geometry")
        inst = cls._instances.get(n)
        if inst is not None:
            return inst
        inst = super().__new__(cls)
        inst._setup(n)
        cls._instances[n] = inst
        return inst

    def _setup(self, n: int) -> None:
        self.n = n
        self.modulus = _cyclotomic_poly(n)
        d = self.degree = len(self.modulus) - 1
        # x^k mod Phi_n for k < 2d - 1
        red = []
        cur = [0] * d
        cur[0] = 1
        for _k in range(2 * d - 1):
            red.append(tuple(cur))
            top = cur[-1]
            cur = [0] + cur[:-1]
            if top:
                for i in range(d):
                    cur[i] -= top * self.modulus[i]
        self._red = red
        self._zero = FieldElement(self, (0,) * d, 1)
        self._one = FieldElement(self, (1,) + (0,) * (d - 1), 1)
        self.units = [k for k in range(1, n) if math.gcd(k, n) == 1]
        self._galois = {k: self._power_images(k) for k in self.units}
        self._conj = self._galois[n - 1]
        with mpmath.workprec(200):
            self._cos = [float(mpmath.cos(2 * mpmath.pi * k / n)) for k in range(d)]
            self._sin = [float(mpmath.sin(2 * mpmath.pi * k / n)) for k in range(d)]
        self._iv_tables: dict[int, tuple] = {}
        self._zeta_pows = [FieldElement(self, self._red_power(k), 1) for k in range(n)]
        self._point_maps: dict[tuple[int, bool], list] = {}

    def point_map(self, rotation: int, reflect: bool) -> list[tuple[int, ...]]:
        """Images of the basis vectors under x -> zeta^rotation * (conj x if reflect)."""
        key = (rotation % self.n, bool(reflect))
        m = self._point_maps.get(key)
        if m is None:
            sgn = -1 if reflect else 1
            m = self._point_maps[key] = [self._red_power((key[0] + sgn * j) % self.n) for j in range(self.degree)]
        return m

    def _power_images(self, k: int):
        """Coefficient vectors of sigma_k(zeta^j) = zeta^(jk) for j < d."""
        return [self._red_power(j * k % self.n) for j in range(self.degree)]

    def _red_power(self, e: int) -> tuple[int, ...]:
        d = self.degree
        cur = [0] * d
        cur[0] = 1
        for _ in range(e):
            top = cur[-1]
            cur = [0] + cur[:-1]
            if top:
                for i in range(d):
                    cur[i] -= top * self.modulus[i]
        return tuple(cur)

    def __repr__(self) -> str:
        return f"CyclotomicField({self.n})"

    def __reduce__(self):
        return (CyclotomicField, (self.n,))

    # constructors -------------------------------------------------------
    def zero(self) -> "FieldElement":
        return self._zero

    def one(self) -> "FieldElement":
        return self._one

    def zeta(self, k: int = 1) -> "FieldElement":
        return self._zeta_pows[k % self.n]

    def rational(self, q) -> "FieldElement":
        q = parse_rational(q)
        return FieldElement(self, (q.numerator,) + (0,) * (self.degree - 1), q.denominator)

    def element(self, coeffs: Sequence) -> "FieldElement":
        """Build from power-basis coefficients (ints, Fractions or 'a/b' strings)."""
        if len(coeffs) != self.degree:
            raise ValueError(f"expected {self.degree} coefficients, got {len(coeffs)}")
        qs = [parse_rational(c) for c in coeffs]
        den = 1
        for q in qs:
            den = den * q.denominator // math.gcd(den, q.denominator)
        return FieldElement(self, tuple(q.numerator * (den // q.denominator) for q in qs), den)

    def from_exponents(self, terms: dict[int, object]) -> "FieldElement":
        """Sum of c * zeta^k for {k: c}; exponents may exceed the degree."""
        acc = self._zero
        for k, c in terms.items():
            acc = acc + self.zeta(k) * parse_rational(c)
        return acc

    @property
    def golden_ratio(self) -> "FieldElement":
        if self.n % 5:
            raise ValueError("golden ratio lies in Q(zeta_n) only for 5 | n")
        k = self.n // 5
        # 2 cos(pi/5) = zeta_10 + zeta_10^-1
        if self.n % 10 == 0:
            k = self.n // 10
            return self.zeta(k) + self.zeta(-k)
        # n = 5m with m odd: -(zeta_5^2 + zeta_5^-2)
        return -(self.zeta(2 * k) + self.zeta(-2 * k))

    def iv_tables(self, bits: int):
        tab = self._iv_tables.get(bits)
        if tab is None:
            old = iv.prec
            iv.prec = bits + 16
            try:
                two_pi = 2 * iv.pi
                cos = [iv.cos(two_pi * k / self.n) for k in range(self.degree)]
                sin = [iv.sin(two_pi * k / self.n) for k in range(self.degree)]
            finally:
                iv.prec = old
            tab = (cos, sin)
            self._iv_tables[bits] = tab
        return tab


_EPS = 2.0 ** -50


class FieldElement:
    """Immutable element of a cyclotomic field."""

    __slots__ = ("field", "num", "den", "_hash", "_approx")

    def __init__(self, field: CyclotomicField, num: tuple[int, ...], den: int = 1):
        if den != 1:
            if den < 0:
                num = tuple(-c for c in num)
                den = -den
            g = math.gcd(den, *num)
            if g != 1:
                num = tuple(c // g for c in num)
                den //= g
        self.field = field
        self.num = num
        self.den = den
        self._hash = None
        self._approx = None

    # structural ---------------------------------------------------------
    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = self._hash = hash((self.num, self.den))
        return h

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElement):
            return self.num == other.num and self.den == other.den and self.field is other.field
        if isinstance(other, (int, Fraction)):
            return self == self.field.rational(other)
        return NotImplemented

    def __ne__(self, other) -> bool:
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __bool__(self) -> bool:
        return any(self.num)

    def is_zero(self) -> bool:
        return not any(self.num)

    def coefficients(self) -> list[Fraction]:
        return [Fraction(c, self.den) for c in self.num]

    def to_strings(self) -> list[str]:
        return [format_rational(q) for q in self.coefficients()]

    def __repr__(self) -> str:
        terms = []
        for k, q in enumerate(self.coefficients()):
            if q:
                terms.append(format_rational(q) + ("" if k == 0 else f"*z^{k}"))
        body = " + ".join(terms) if terms else "0"
        return f"<Q(z{self.field.n}): {body}>"

    def is_rational(self) -> bool:
        return not any(self.num[1:])

    def to_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self!r} is not rational")
        return Fraction(self.num[0], self.den)

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field is not self.field:
                raise ValueError("mixing elements of different cyclotomic fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.rational(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return FieldElement(self.field, tuple(a + b for a, b in zip(self.num, other.num)), self.den)
        da, db = self.den, other.den
        return FieldElement(self.field, tuple(a * db + b * da for a, b in zip(self.num, other.num)), da * db)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.num), self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return FieldElement(self.field, tuple(a - b for a, b in zip(self.num, other.num)), self.den)
        da, db = self.den, other.den
        return FieldElement(self.field, tuple(a * db - b * da for a, b in zip(self.num, other.num)), da * db)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, int):
            return FieldElement(self.field, tuple(a * other for a in self.num), self.den)
        if isinstance(other, Fraction):
            return FieldElement(self.field, tuple(a * other.numerator for a in self.num), self.den * other.denominator)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.num, other.num
        d = len(a)
        prod = [0] * (2 * d - 1)
        for i in range(d):
            ai = a[i]
            if ai:
                for j in range(d):
                    bj = b[j]
                    if bj:
                        prod[i + j] += ai * bj
        out = prod[:d]
        red = self.field._red
        for k in range(d, 2 * d - 1):
            c = prod[k]
            if c:
                rk = red[k]
                for i in range(d):
                    if rk[i]:
                        out[i] += c * rk[i]
        return FieldElement(self.field, tuple(out), self.den * other.den)

    __rmul__ = __mul__

    def galois(self, k: int) -> "FieldElement":
        """Image under the automorphism zeta -> zeta^k (k coprime to n)."""
        return self._apply_unimodular(self.field._galois[k % self.field.n])

    def _apply_unimodular(self, images) -> "FieldElement":
        # images lie in GL(d, Z), so the content of num is unchanged and no
        # renormalisation is needed
        d = len(self.num)
        out = [0] * d
        for j, c in enumerate(self.num):
            if c:
                img = images[j]
                for i in range(d):
                    if img[i]:
                        out[i] += c * img[i]
        res = object.__new__(FieldElement)
        res.field = self.field
        res.num = tuple(out)
        res.den = self.den
        res._hash = None
        res._approx = None
        return res

    def rotate(self, rotation: int, reflect: bool = False) -> "FieldElement":
        """zeta^rotation * x, or zeta^rotation * conj(x) when reflect."""
        return self._apply_unimodular(self.field.point_map(rotation, reflect))

    def conj(self) -> "FieldElement":
        return self.galois(self.field.n - 1)

    def norm(self) -> Fraction:
        """Field norm to Q: product of all Galois conjugates."""
        acc = self
        for k in self.field.units[1:]:
            acc = acc * self.galois(k)
        return acc.to_rational()

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroDivisionError("division by zero in cyclotomic field")
        others = self.field.one()
        for k in self.field.units[1:]:
            others = others * self.galois(k)
        n = (self * others).to_rational()
        return others * (1 / n)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero in cyclotomic field")
            return self * (1 / Fraction(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.field.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def re(self) -> "FieldElement":
        """Real part as a field element: (z + conj z) / 2."""
        return (self + self.conj()) * Fraction(1, 2)

    def abs2(self) -> "FieldElement":
        return self * self.conj()

    def is_real(self) -> bool:
        return self == self.conj()

    # embedding ----------------------------------------------------------
    def approx(self) -> complex:
        a = self._approx
        if a is None:
            f = self.field
            try:
                re = sum(c * ck for c, ck in zip(self.num, f._cos) if c)
                im = sum(c * sk for c, sk in zip(self.num, f._sin) if c)
                a = complex(re / self.den, im / self.den)
            except OverflowError:
                a = complex(self._mp_embed(120))
            self._approx = a
        return a

    def approx_error(self) -> float:
        """Upper bound on |approx() - true embedding| per coordinate."""
        try:
            return sum(abs(c) for c in self.num) * (len(self.num) + 4) * _EPS / self.den + 1e-300
        except OverflowError:
            return math.inf

    def _mp_embed(self, bits: int):
        with mpmath.workprec(bits):
            z = mpmath.mpc(0)
            for k, c in enumerate(self.num):
                if c:
                    z += c * mpmath.expjpi(mpmath.mpf(2 * k) / self.field.n)
            return z / self.den

    def _part_interval(self, part: int, bits: int):
        cos, sin = self.field.iv_tables(bits)
        tab = cos if part == 0 else sin
        old = iv.prec
        iv.prec = bits
        try:
            acc = iv.mpf(0)
            for c, t in zip(self.num, tab):
                if c:
                    acc += iv.mpf(c) * t
            acc = acc / self.den
        finally:
            iv.prec = old
        lo, hi = acc._mpi_
        p1, q1 = to_rational(lo)
        p2, q2 = to_rational(hi)
        return Fraction(int(p1), int(q1)), Fraction(int(p2), int(q2))

    def embed_interval(self, bits: int = 128):
        """Rational boxes containing the real and imaginary parts of the embedding."""
        return self._part_interval(0, bits), self._part_interval(1, bits)

    def real_interval(self, width=None, bits: int = 64):
        """Rational interval containing the real part, refined below ``width``."""
        width = None if width is None else parse_rational(width)
        while True:
            lo, hi = self._part_interval(0, bits)
            if width is None or hi - lo <= width:
                return lo, hi
            bits *= 2
            if bits > _precision_budget:
                raise UndecidableComparison(
                    f"interval width {float(hi - lo):.3g} above requested {float(width):.3g} at precision budget"
                )

    def _part_sign(self, part: int) -> int:
        num = self.num
        f = self.field
        tab = f._cos if part == 0 else f._sin
        try:
            s = 0.0
            mag = 0.0
            for c, t in zip(num, tab):
                if c:
                    s += c * t
                    mag += abs(c)
            bound = mag * (len(num) + 4) * _EPS
            if s > bound:
                return 1
            if s < -bound:
                return -1
        except OverflowError:
            pass
        # exact zero test
        if part == 0:
            if (self + self.conj()).is_zero():
                return 0
        else:
            if (self - self.conj()).is_zero():
                return 0
        bits = 64
        while bits <= _precision_budget:
            lo, hi = self._part_interval(part, bits)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            bits *= 2
        raise UndecidableComparison(f"sign of {'real' if part == 0 else 'imaginary'} part undecided at {_precision_budget} bits")

    def re_sign(self) -> int:
        return self._part_sign(0)

    def im_sign(self) -> int:
        return self._part_sign(1)

    def sign(self) -> int:
        """Sign of a real element."""
        if not self.is_real():
            raise ValueError(f"sign() needs a real element, got {self!r}")
        return self._part_sign(0)

    def __lt__(self, other) -> bool:
        return (self - other).sign() < 0

    def __le__(self, other) -> bool:
        return (self - other).sign() <= 0

    def __gt__(self, other) -> bool:
        return (self - other).sign() > 0

    def __ge__(self, other) -> bool:
        return (self - other).sign() >= 0

    def __float__(self) -> float:
        return self.approx().real


def fsum(items: Iterable[FieldElement], field: CyclotomicField) -> FieldElement:
    acc = field.zero()
    for x in items:
        acc = acc + x
    return acc


@lru_cache(maxsize=None)
def golden(n: int = 10) -> FieldElement:
    return CyclotomicField(n).golden_ratio

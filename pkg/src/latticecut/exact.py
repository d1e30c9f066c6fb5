"""Exact arithmetic for lattice geometry over integer normal vectors.

Membership tests for tilted cylinders and slabs reduce to sign decisions on
numbers of the form a + b*sqrt(m) with a, b rational and m a fixed positive
integer (m is the squared norm of the direction's normal vector).  QuadExt
implements that quadratic extension exactly; the remaining helpers are
Fraction plumbing shared by the geometry and solver modules.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt


def as_fraction(x) -> Fraction:
    """Convert int/Fraction/float/str to an exact Fraction.

    Floats convert exactly (binary value, no rounding); strings accept
    "p/q" and decimal literals.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def dot(u, v):
    return sum(a * b for a, b in zip(u, v, strict=True))


def vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v, strict=True))


def primitive(vec):
    """Scale a rational vector to a primitive integer vector (gcd 1).

    Sign is kept as given.  Raises on the zero vector.
    """
    fracs = [as_fraction(x) for x in vec]
    if all(f == 0 for f in fracs):
        raise ValueError("zero vector has no primitive form")
    denom = 1
    for f in fracs:
        denom = denom * f.denominator // gcd(denom, f.denominator)
    ints = [int(f * denom) for f in fracs]
    g = 0
    for k in ints:
        g = gcd(g, abs(k))
    return tuple(k // g for k in ints)


def is_perfect_square(m: int) -> bool:
    return m >= 0 and isqrt(m) ** 2 == m


class QuadExt:
    """An element a + b*sqrt(m) of Q[sqrt(m)], compared exactly.

    m is a positive integer fixed per direction.  When m is a perfect
    square the representation collapses to the rational a + b*isqrt(m).
    Mixed arithmetic with int/Fraction promotes the rational side.
    """

    __slots__ = ("a", "b", "m")

    def __init__(self, a, b, m: int):
        if m <= 0:
            raise ValueError("radicand must be positive")
        a = as_fraction(a)
        b = as_fraction(b)
        if b != 0 and is_perfect_square(m):
            a, b = a + b * isqrt(m), Fraction(0)
        self.a = a
        self.b = b
        self.m = m

    @classmethod
    def rational(cls, x, m: int) -> "QuadExt":
        return cls(x, 0, m)

    @classmethod
    def sqrt_scaled(cls, coeff, m: int) -> "QuadExt":
        """coeff * sqrt(m)."""
        return cls(0, coeff, m)

    def _coerce(self, other) -> "QuadExt":
        if isinstance(other, QuadExt):
            if other.m != self.m and other.b != 0 and self.b != 0:
                raise ValueError("mixed radicands are not supported")
            return other
        return QuadExt(other, 0, self.m)

    def __add__(self, other):
        o = self._coerce(other)
        m = self.m if self.b != 0 or o.b == 0 else o.m
        return QuadExt(self.a + o.a, self.b + o.b, m)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(-self.a, -self.b, self.m)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        m = self.m if self.b != 0 or o.b == 0 else o.m
        return QuadExt(self.a * o.a + self.b * o.b * m,
                       self.a * o.b + self.b * o.a, m)

    __rmul__ = __mul__

    def __truediv__(self, other):
        q = as_fraction(other)
        return QuadExt(self.a / q, self.b / q, self.m)

    def sign(self) -> int:
        a, b = self.a, self.b
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return (b > 0) - (b < 0)
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # opposite signs: compare |a| to |b|*sqrt(m) by squaring
        lhs, rhs = a * a, b * b * self.m
        if a > 0:
            return 1 if lhs > rhs else (-1 if lhs < rhs else 0)
        return -1 if lhs > rhs else (1 if lhs < rhs else 0)

    def __eq__(self, other):
        try:
            return (self - other).sign() == 0
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __hash__(self):
        return hash((self.a, self.b if self.b == 0 else (self.b, self.m)))

    def __float__(self):
        return float(self.a) + float(self.b) * self.m ** 0.5

    def __repr__(self):
        if self.b == 0:
            return f"QuadExt({self.a})"
        return f"QuadExt({self.a} + {self.b}*sqrt({self.m}))"


def le_scaled(x, c, m: int) -> bool:
    """Decide x <= c*sqrt(m) exactly for rational x, c and integer m > 0."""
    x = as_fraction(x)
    c = as_fraction(c)
    if c >= 0:
        if x <= 0:
            return True
        return x * x <= c * c * m
    if x > 0:
        return False
    return x * x >= c * c * m


def quad_le_scaled(x, c, m: int) -> bool:
    """Decide x <= c*sqrt(m) for x in some Q[sqrt(m')], rational c, int m > 0.

    Works across different radicands because only x's sign and x**2
    (which lives in the same field as x) are consulted.
    """
    if not isinstance(x, QuadExt):
        return le_scaled(x, c, m)
    c = as_fraction(c)
    sx = x.sign()
    if c >= 0:
        if sx <= 0:
            return True
        return ((x * x) - c * c * m).sign() <= 0
    if sx > 0:
        return False
    return ((x * x) - c * c * m).sign() >= 0

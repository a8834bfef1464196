"""Exact complex numbers of the form (sum_r (a_r + i b_r) sqrt(r)) / d.

Every ``r`` is a squarefree positive integer, so the radicals are linearly
independent over the Gaussian rationals and equality/zero tests are exact.
The set is a field (Q(i) adjoined with square roots of primes), which covers
all amplitudes met in the Dicke circuits: 1/sqrt(n), sqrt((n-k)/n), 1/sqrt(2)
and the d-th roots of unity for every d dividing 24.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

__all__ = ["Surd", "squarefree_split", "root_of_unity"]


def squarefree_split(n: int) -> tuple[int, int]:
    """Return ``(s, r)`` with ``n == s*s*r`` and ``r`` squarefree."""
    if n <= 0:
        raise ValueError(f"expected a positive integer, got {n}")
    s, r = 1, 1
    p = 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            r *= p
        p += 1
    return s, r * n


def _prime_factors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


class Surd:
    """Immutable exact scalar; see module docstring."""

    __slots__ = ("_num", "_den", "_hash")

    def __init__(self, num: dict[int, tuple[int, int]] | None = None, den: int = 1):
        num = {r: c for r, c in (num or {}).items() if c[0] or c[1]}
        if den <= 0:
            raise ValueError("denominator must be positive")
        g = den
        for a, b in num.values():
            g = math.gcd(g, a, b)
        if not num:
            den, g = 1, 1
        if g > 1:
            num = {r: (a // g, b // g) for r, (a, b) in num.items()}
            den //= g
        self._num = num
        self._den = den
        self._hash = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def coerce(cls, x) -> "Surd":
        if isinstance(x, Surd):
            return x
        if isinstance(x, bool):
            x = int(x)
        if isinstance(x, int):
            return cls({1: (x, 0)})
        if isinstance(x, Rational):
            return cls({1: (x.numerator, 0)}, x.denominator)
        raise TypeError(f"cannot represent {x!r} exactly")

    @classmethod
    def gaussian(cls, re, im=0) -> "Surd":
        re, im = Fraction(re), Fraction(im)
        den = re.denominator * im.denominator // math.gcd(re.denominator, im.denominator)
        return cls({1: (int(re * den), int(im * den))}, den)

    @classmethod
    def sqrt(cls, x) -> "Surd":
        """Principal square root of a non-negative rational."""
        x = Fraction(x)
        if x < 0:
            raise ValueError("sqrt of a negative rational")
        if x == 0:
            return cls()
        p, q = x.numerator, x.denominator
        s, r = squarefree_split(p * q)
        return cls({r: (s, 0)}, q)

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, complex | float):
            return complex(self) + other
        try:
            o = Surd.coerce(other)
        except TypeError:
            return NotImplemented
        d1, d2 = self._den, o._den
        num = {r: (a * d2, b * d2) for r, (a, b) in self._num.items()}
        for r, (a, b) in o._num.items():
            a0, b0 = num.get(r, (0, 0))
            num[r] = (a0 + a * d1, b0 + b * d1)
        return Surd(num, d1 * d2)

    __radd__ = __add__

    def __neg__(self):
        s = object.__new__(Surd)
        s._num = {r: (-a, -b) for r, (a, b) in self._num.items()}
        s._den = self._den
        s._hash = None
        return s

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, complex | float):
            return complex(self) - other
        try:
            return self + (-Surd.coerce(other))
        except TypeError:
            return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, complex | float):
            return complex(self) * other
        try:
            o = Surd.coerce(other)
        except TypeError:
            return NotImplemented
        num: dict[int, tuple[int, int]] = {}
        for r1, (a1, b1) in self._num.items():
            for r2, (a2, b2) in o._num.items():
                g = math.gcd(r1, r2)
                r = (r1 // g) * (r2 // g)
                re = (a1 * a2 - b1 * b2) * g
                im = (a1 * b2 + a2 * b1) * g
                a0, b0 = num.get(r, (0, 0))
                num[r] = (a0 + re, b0 + im)
        return Surd(num, self._den * o._den)

    __rmul__ = __mul__

    def conjugate(self) -> "Surd":
        s = object.__new__(Surd)
        s._num = {r: (a, -b) for r, (a, b) in self._num.items()}
        s._den = self._den
        s._hash = None
        return s

    def abs2(self) -> "Surd":
        return self * self.conjugate()

    def _galois(self, p: int) -> "Surd":
        s = object.__new__(Surd)
        s._num = {r: ((-a, -b) if r % p == 0 else (a, b)) for r, (a, b) in self._num.items()}
        s._den = self._den
        s._hash = None
        return s

    def inverse(self) -> "Surd":
        if not self:
            raise ZeroDivisionError("inverse of zero")
        acc = Surd({1: (1, 0)})
        x = self
        primes = sorted({p for r in x._num for p in _prime_factors(r)})
        for p in primes:
            c = x._galois(p)
            acc = acc * c
            x = x * c
        # x is now a Gaussian rational
        a, b = x._num.get(1, (0, 0))
        d = x._den
        n2 = a * a + b * b
        # 1/((a+ib)/d) = d (a - ib) / (a^2+b^2)
        return acc * Surd({1: (d * a, -d * b)}, n2)

    def __truediv__(self, other):
        if isinstance(other, complex | float):
            return complex(self) / other
        try:
            o = Surd.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        if isinstance(other, complex | float):
            return other / complex(self)
        return Surd.coerce(other) * self.inverse()

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return self.inverse() ** (-e)
        out = Surd({1: (1, 0)})
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    # -- comparison / conversion -------------------------------------------
    def __bool__(self):
        return bool(self._num)

    def __eq__(self, other):
        if isinstance(other, Surd):
            return self._den == other._den and self._num == other._num
        if isinstance(other, int | Rational):
            return self == Surd.coerce(other)
        if isinstance(other, complex | float):
            return complex(self) == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._den, frozenset(self._num.items())))
        return self._hash

    def __complex__(self):
        re = sum(a * math.sqrt(r) for r, (a, _) in self._num.items())
        im = sum(b * math.sqrt(r) for r, (_, b) in self._num.items())
        return complex(re / self._den, im / self._den)

    def __float__(self):
        if not self.is_real():
            raise TypeError("complex Surd has no float value")
        return complex(self).real

    def is_real(self) -> bool:
        return all(b == 0 for _, b in self._num.values())

    def is_rational(self) -> bool:
        return set(self._num) <= {1} and self.is_real()

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return Fraction(self._num.get(1, (0, 0))[0], self._den)

    def to_json(self) -> dict:
        return {"den": self._den, "terms": [[r, a, b] for r, (a, b) in sorted(self._num.items())]}

    @classmethod
    def from_json(cls, data: dict) -> "Surd":
        return cls({int(r): (int(a), int(b)) for r, a, b in data["terms"]}, int(data["den"]))

    def __repr__(self):
        return f"Surd({self})"

    def __str__(self):
        if not self._num:
            return "0"
        parts = []
        for r, (a, b) in sorted(self._num.items()):
            if b == 0:
                c = str(a)
            elif a == 0:
                c = f"{b}i"
            else:
                c = f"({a}{b:+d}i)"
            parts.append(c if r == 1 else f"{c}*sqrt({r})")
        s = " + ".join(parts)
        if self._den != 1:
            s = f"({s})/{self._den}" if len(parts) > 1 or "*" in s else f"{s}/{self._den}"
        return s


def _cos15(m: int) -> Surd:
    """cos(m * 15 degrees), exact."""
    m %= 24
    table = {
        0: Surd({1: (1, 0)}),
        1: Surd({6: (1, 0), 2: (1, 0)}, 4),
        2: Surd({3: (1, 0)}, 2),
        3: Surd({2: (1, 0)}, 2),
        4: Surd({1: (1, 0)}, 2),
        5: Surd({6: (1, 0), 2: (-1, 0)}, 4),
        6: Surd(),
    }
    if m <= 6:
        return table[m]
    if m <= 12:
        return -table[12 - m]
    return _cos15(24 - m)


def root_of_unity(num: int, den: int) -> Surd | None:
    """exp(2 pi i num/den) as a Surd, or None when den does not divide 24."""
    if den <= 0:
        raise ValueError("den must be positive")
    if 24 % den:
        return None
    m = (num * (24 // den)) % 24
    c = _cos15(m)
    s = _cos15(6 - m)
    return c + s * Surd({1: (0, 1)})

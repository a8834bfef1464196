"""Coefficient backends shared by the symbolic and circuit code.

Two backends implement the same duck-typed scalar interface (``+``, ``*``,
``conjugate``): :class:`~dicke_lqg.surd.Surd` for exact work and the builtin
``complex`` for large float scans.
"""

from __future__ import annotations

import cmath
import math
import re
from fractions import Fraction

from .surd import Surd, root_of_unity

EXACT = "exact"
FLOAT = "float"
BACKENDS = (EXACT, FLOAT)

# float coefficients below this magnitude are treated as cancelled
ZERO_TOL = 1e-15


def check_backend(backend: str) -> str:
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    return backend


def is_zero(c) -> bool:
    if isinstance(c, Surd):
        return not c
    return abs(c) <= ZERO_TOL


def one(backend: str):
    return Surd.coerce(1) if backend == EXACT else 1.0 + 0j


def scalar(x, backend: str):
    """Convert ``x`` into the backend's scalar type."""
    if backend == EXACT:
        return Surd.coerce(x)
    return complex(x)


def sqrt(x, backend: str):
    """Square root of a non-negative rational (or float for the float backend)."""
    if backend == EXACT:
        return Surd.sqrt(Fraction(x))
    return complex(math.sqrt(float(x)))


def unit_root(num: int, den: int, backend: str):
    """exp(2 pi i num/den); raises if the exact backend cannot represent it."""
    if backend == EXACT:
        w = root_of_unity(num, den)
        if w is None:
            raise ValueError(f"{den}-th roots of unity are not exactly representable")
        return w
    return cmath.exp(2j * math.pi * num / den)


def exact_dft_supported(d: int) -> bool:
    return 24 % d == 0


def to_complex(c) -> complex:
    return complex(c)


def abs2(c):
    """|c|^2 in the scalar's own type (a real Surd or a float)."""
    if isinstance(c, Surd):
        return c.abs2()
    return abs(c) ** 2


def to_real(c) -> float:
    return complex(c).real


_SQRT = re.compile(r"^sqrt\((.+)\)$")


def parse_amplitude(text: str, backend: str):
    """Parse ``"1/2"``, ``"0.5"`` or ``"sqrt(2/3)"`` into a backend scalar."""
    t = text.strip().replace(" ", "")
    m = _SQRT.match(t)
    try:
        if m:
            x = Fraction(m.group(1))
            if x < 0:
                raise ValueError
            return sqrt(x, backend)
        return scalar(Fraction(t), backend)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"cannot parse amplitude {text!r}; use a rational, decimal or sqrt(p/q)") from None

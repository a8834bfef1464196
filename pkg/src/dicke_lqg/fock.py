"""Symbolic algebra of bosonic creation operators acting on the vacuum.

A state is a polynomial in creation operators; the vacuum is implicit, so the
constant polynomial ``1`` is ``|vac>``.  Modes are any hashable, totally
ordered keys: :class:`ModeLabel` for sculpting-level modes that carry an
internal state, plain integers for circuit modes.
"""

from __future__ import annotations

import enum
import math
from fractions import Fraction
from collections.abc import Callable, Hashable, Iterable, Mapping
from itertools import combinations
from typing import Any, NamedTuple

from . import scalars
from .scalars import EXACT, is_zero
from .surd import Surd

Mode = Hashable
Monomial = tuple  # sorted tuple of (mode, exponent) pairs, exponents > 0


class TermBudgetExceeded(RuntimeError):
    """Raised when an expansion would hold more monomials than allowed."""


DEFAULT_TERM_BUDGET = 10**8


class InternalBasis(enum.Enum):
    ZONE = "ZOne"
    PLUS_MINUS = "PlusMinus"


_BASIS_OF = {"0": InternalBasis.ZONE, "1": InternalBasis.ZONE,
             "+": InternalBasis.PLUS_MINUS, "-": InternalBasis.PLUS_MINUS}
INTERNAL_STATES = tuple(_BASIS_OF)


class ModeLabel(NamedTuple):
    """A spatial site plus an optional internal state tag.

    ``site`` is a tuple such as ``("sys", j)``, ``("S", j)``, ``("T", l)`` or a
    dual-rail path ``("rail", m, b)``.  ``internal`` is one of ``"0"``,
    ``"1"``, ``"+"``, ``"-"`` for sculpting-level modes and ``None`` for
    single-rail optical modes.
    """

    site: tuple
    internal: str | None = None

    def __str__(self):
        name = site_name(self.site)
        return name if self.internal is None else f"{name},{self.internal}"


def site_name(site: tuple) -> str:
    kind, *idx = site
    if kind == "sys":
        return str(idx[0])
    if kind == "rail":
        return "".join(str(i) for i in idx)
    return kind + ",".join(str(i) for i in idx)


def basis_of(internal: str) -> InternalBasis:
    return _BASIS_OF[internal]


# -- monomials ---------------------------------------------------------------

def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        ma, ea = a[i]
        mb, eb = b[j]
        if ma == mb:
            out.append((ma, ea + eb))
            i += 1
            j += 1
        elif ma < mb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_norm2(m: Monomial) -> int:
    """<vac| (a^r)^dag a^r |vac> = prod r!."""
    out = 1
    for _, e in m:
        out *= math.factorial(e)
    return out


def mono_occupation(m: Monomial) -> dict:
    return dict(m)


def make_monomial(modes: Iterable[Mode] | Mapping[Mode, int]) -> Monomial:
    """Monomial from a multiset of modes (iterable) or an occupation mapping."""
    if isinstance(modes, Mapping):
        items = modes.items()
    else:
        counts: dict = {}
        for m in modes:
            counts[m] = counts.get(m, 0) + 1
        items = counts.items()
    return tuple(sorted((m, e) for m, e in items if e > 0))


# -- polynomials -------------------------------------------------------------

class FockPolynomial:
    """Immutable map ``Monomial -> coefficient`` in canonical form."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Any] | None = None):
        clean = {}
        for mono, c in (terms or {}).items():
            if not _is_canonical(mono):
                mono = make_monomial(dict(mono))
            clean[mono] = clean[mono] + c if mono in clean else c
        self.terms = {m: c for m, c in clean.items() if not is_zero(c)}

    @classmethod
    def _raw(cls, terms: dict) -> "FockPolynomial":
        p = object.__new__(cls)
        p.terms = terms
        return p

    # -- constructors
    @classmethod
    def zero(cls) -> "FockPolynomial":
        return cls._raw({})

    @classmethod
    def constant(cls, c) -> "FockPolynomial":
        return cls._raw({} if is_zero(c) else {(): c})

    @classmethod
    def vacuum(cls, backend: str = EXACT) -> "FockPolynomial":
        return cls.constant(scalars.one(backend))

    @classmethod
    def creation(cls, mode: Mode, coeff=None, power: int = 1) -> "FockPolynomial":
        c = Surd.coerce(1) if coeff is None else coeff
        return cls._raw({((mode, power),): c})

    @classmethod
    def linear(cls, pairs: Iterable[tuple[Mode, Any]]) -> "FockPolynomial":
        """sum_i c_i a^dag_{m_i} from ``(mode, coeff)`` pairs."""
        return cls({((m, 1),): c for m, c in _merge_pairs(pairs).items()})

    # -- basic queries
    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, mono: Monomial, default=0):
        return self.terms.get(mono, default)

    def degree(self) -> int:
        """Maximum total degree (photon number); -1 for the zero polynomial."""
        return max((mono_degree(m) for m in self.terms), default=-1)

    def degrees(self) -> set[int]:
        return {mono_degree(m) for m in self.terms}

    def modes(self) -> set:
        return {mode for mono in self.terms for mode, _ in mono}

    def sorted_terms(self) -> list[tuple[Monomial, Any]]:
        return sorted(self.terms.items(), key=lambda t: t[0])

    # -- arithmetic
    def __add__(self, other: "FockPolynomial") -> "FockPolynomial":
        if not isinstance(other, FockPolynomial):
            other = FockPolynomial.constant(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            if m in out:
                s = out[m] + c
                if is_zero(s):
                    del out[m]
                else:
                    out[m] = s
            else:
                out[m] = c
        return FockPolynomial._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return FockPolynomial._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, FockPolynomial):
            other = FockPolynomial.constant(other)
        return self + (-other)

    def scale(self, c) -> "FockPolynomial":
        if is_zero(c):
            return FockPolynomial.zero()
        out = {}
        for m, v in self.terms.items():
            vc = v * c
            if not is_zero(vc):
                out[m] = vc
        return FockPolynomial._raw(out)

    def __mul__(self, other):
        if isinstance(other, FockPolynomial):
            return mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, e: int):
        out = FockPolynomial.constant(_unit_like(self))
        for _ in range(e):
            out = mul(out, self)
        return out

    def __eq__(self, other):
        if not isinstance(other, FockPolynomial):
            return NotImplemented
        return self.terms == other.terms

    __hash__ = None

    def allclose(self, other: "FockPolynomial", atol: float = 1e-10) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(abs(complex(self.terms.get(m, 0)) - complex(other.terms.get(m, 0))) <= atol
                   for m in keys)

    def map_coefficients(self, f: Callable) -> "FockPolynomial":
        return FockPolynomial({m: f(c) for m, c in self.terms.items()})

    def to_float(self) -> "FockPolynomial":
        return FockPolynomial({m: complex(c) for m, c in self.terms.items()})

    def relabel(self, f: Callable[[Mode], Mode]) -> "FockPolynomial":
        out: dict = {}
        for mono, c in self.terms.items():
            nm = make_monomial({f(m): e for m, e in mono})
            out[nm] = out[nm] + c if nm in out else c
        return FockPolynomial._raw({m: c for m, c in out.items() if not is_zero(c)})

    def filter(self, keep: Callable[[Monomial], bool]) -> "FockPolynomial":
        return FockPolynomial._raw({m: c for m, c in self.terms.items() if keep(m)})

    def __repr__(self):
        if not self.terms:
            return "FockPolynomial(0)"
        parts = []
        for mono, c in self.sorted_terms()[:8]:
            ops = " ".join(f"a+[{m}]" + (f"^{e}" if e > 1 else "") for m, e in mono) or "1"
            parts.append(f"({c})*{ops}")
        more = "" if len(self.terms) <= 8 else f" + ... ({len(self.terms)} terms)"
        return "FockPolynomial(" + " + ".join(parts) + more + ")"

    def to_json(self) -> list[dict]:
        """Term dump: one record per monomial, sorted canonically."""
        out = []
        for mono, c in self.sorted_terms():
            rec = {"modes": [[_mode_json(m), e] for m, e in mono]}
            z = complex(c)
            rec["re"], rec["im"] = z.real, z.imag
            if isinstance(c, Surd):
                rec["exact"] = c.to_json()
            out.append(rec)
        return out


def _mode_json(m):
    if isinstance(m, ModeLabel):
        return {"site": list(m.site), "internal": m.internal}
    return m


def _is_canonical(mono) -> bool:
    if not isinstance(mono, tuple):
        return False
    prev = None
    for item in mono:
        if not (isinstance(item, tuple) and len(item) == 2 and item[1] > 0):
            return False
        if prev is not None and not prev < item[0]:
            return False
        prev = item[0]
    return True


def _merge_pairs(pairs):
    out: dict = {}
    for m, c in pairs:
        out[m] = out[m] + c if m in out else c
    return out


def _unit_like(p: FockPolynomial):
    for c in p.terms.values():
        return Surd.coerce(1) if isinstance(c, Surd) else 1.0 + 0j
    return Surd.coerce(1)


# -- core operations ---------------------------------------------------------

def mul(p: FockPolynomial, q: FockPolynomial, *, budget: int | None = None,
        keep: Callable[[Monomial], bool] | None = None) -> FockPolynomial:
    """Distributive product in canonical form.

    ``keep`` prunes monomials of the product (used to project during large
    expansions); ``budget`` caps the number of stored monomials.
    """
    if len(p.terms) < len(q.terms):
        p, q = q, p
    out: dict = {}
    limit = budget or DEFAULT_TERM_BUDGET
    for mq, cq in q.terms.items():
        for mp, cp in p.terms.items():
            m = mono_mul(mp, mq)
            if keep is not None and not keep(m):
                continue
            c = cp * cq
            if m in out:
                out[m] = out[m] + c
            else:
                out[m] = c
                if len(out) > limit:
                    raise TermBudgetExceeded(f"expansion exceeded {limit} monomials")
    return FockPolynomial._raw({m: c for m, c in out.items() if not is_zero(c)})


def expand_product(factors: Iterable[FockPolynomial], *, budget: int | None = None,
                   keep: Callable[[Monomial], bool] | None = None,
                   backend: str = EXACT) -> FockPolynomial:
    out = FockPolynomial.vacuum(backend)
    for f in factors:
        out = mul(out, f, budget=budget, keep=keep)
    return out


def annihilate(p: FockPolynomial, mode: Mode) -> FockPolynomial:
    """a_mode applied to p|vac>: formal derivative d/d(a^dag_mode)."""
    out: dict = {}
    for mono, c in p.terms.items():
        for i, (m, e) in enumerate(mono):
            if m == mode:
                nm = mono[:i] + (((m, e - 1),) if e > 1 else ()) + mono[i + 1:]
                out[nm] = out[nm] + c * e if nm in out else c * e
                break
    return FockPolynomial._raw({m: c for m, c in out.items() if not is_zero(c)})


def annihilate_linear(p: FockPolynomial, pairs: Iterable[tuple[Mode, Any]]) -> FockPolynomial:
    """(sum_i w_i a_{m_i}) p|vac>."""
    out = FockPolynomial.zero()
    for mode, w in pairs:
        out = out + annihilate(p, mode).scale(w)
    return out


def substitute(p: FockPolynomial, mapping: Mapping[Mode, FockPolynomial], *,
               budget: int | None = None) -> FockPolynomial:
    """Replace each a^dag_m by ``mapping[m]`` (modes absent from mapping are kept)."""
    powers: dict = {}

    def power(m, e):
        key = (m, e)
        if key not in powers:
            powers[key] = mapping[m] ** e
        return powers[key]

    out = FockPolynomial.zero()
    for mono, c in p.terms.items():
        term = FockPolynomial._raw({(): c})
        rest = []
        for m, e in mono:
            if m in mapping:
                term = mul(term, power(m, e), budget=budget)
            else:
                rest.append((m, e))
        if rest:
            term = mul(term, FockPolynomial._raw({tuple(rest): _unit(c)}))
        out = out + term
    return out


def _unit(c):
    return Surd.coerce(1) if isinstance(c, Surd) else 1.0 + 0j


# -- internal-state bases ----------------------------------------------------

def site_bases(p: FockPolynomial) -> dict[tuple, InternalBasis]:
    """Basis used at each internally-tagged site; mixed sites raise ValueError."""
    out: dict = {}
    for mono in p.terms:
        for m, _ in mono:
            if isinstance(m, ModeLabel) and m.internal is not None:
                b = basis_of(m.internal)
                if out.setdefault(m.site, b) is not b:
                    raise ValueError(f"site {site_name(m.site)} mixes internal bases")
    return out


def _basis_map(site, target: InternalBasis, backend: str) -> dict:
    h = scalars.sqrt(Fraction(1, 2), backend)
    if target is InternalBasis.ZONE:
        src = ("+", "-")
        new = ("0", "1")
    else:
        src = ("0", "1")
        new = ("+", "-")
    a, b = (ModeLabel(site, s) for s in new)
    return {
        ModeLabel(site, src[0]): FockPolynomial.linear([(a, h), (b, h)]),
        ModeLabel(site, src[1]): FockPolynomial.linear([(a, h), (b, -h)]),
    }


def change_internal_basis(p: FockPolynomial, target: InternalBasis,
                          sites: Iterable[tuple] | None = None) -> FockPolynomial:
    """Rewrite internally-tagged modes in ``target`` basis.

    a^dag_{+-} = (a^dag_0 +- a^dag_1)/sqrt 2 and its inverse (the same matrix).
    Only ``sites`` are converted when given; sites already in ``target`` are
    left alone.
    """
    bases = site_bases(p)
    wanted = set(bases) if sites is None else set(sites)
    backend = _backend_of(p)
    mapping: dict = {}
    for site, b in bases.items():
        if site in wanted and b is not target:
            mapping.update(_basis_map(site, target, backend))
    if not mapping:
        return p
    return substitute(p, mapping)


def _backend_of(p: FockPolynomial) -> str:
    for c in p.terms.values():
        return EXACT if isinstance(c, Surd) else scalars.FLOAT
    return EXACT


def inner_product(p: FockPolynomial, q: FockPolynomial):
    """<vac| P^dag Q |vac> with <(a^dag)^r|(a^dag)^r> = r!."""
    bp, bq = site_bases(p), site_bases(q)
    for site in set(bp) & set(bq):
        if bp[site] is not bq[site]:
            raise ValueError(f"basis mismatch at site {site_name(site)}")
    small, big = (p, q) if len(p.terms) <= len(q.terms) else (q, p)
    total = 0
    for mono, c in small.terms.items():
        d = big.terms.get(mono)
        if d is None:
            continue
        cp, cq = (c, d) if small is p else (d, c)
        total = total + cp.conjugate() * cq * mono_norm2(mono)
    if isinstance(total, int):
        backend = _backend_of(p) if p.terms else _backend_of(q)
        total = scalars.scalar(0, backend)
    return total


def norm2(p: FockPolynomial):
    return inner_product(p, p)


# -- Dicke reference ---------------------------------------------------------

def system_label(j: int, state: str) -> ModeLabel:
    return ModeLabel(("sys", j), state)


def rail_label(m: int, bit: int) -> ModeLabel:
    return ModeLabel(("rail", m, bit))


def qubit_label(m: int, bit: int, encoding: str) -> ModeLabel:
    if encoding == "internal":
        return system_label(m, str(bit))
    if encoding == "dual-rail":
        return rail_label(m, bit)
    raise ValueError(f"unknown encoding {encoding!r}")


def dicke_reference(n: int, k: int, encoding: str = "internal",
                    backend: str = EXACT) -> FockPolynomial:
    """Normalized |D_n^k> as a creation polynomial (qubits numbered 1..n)."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    c = scalars.sqrt(Fraction(1, math.comb(n, k)), backend)
    terms = {}
    for ones in combinations(range(1, n + 1), k):
        mono = make_monomial(qubit_label(m, int(m in ones), encoding) for m in range(1, n + 1))
        terms[mono] = c
    return FockPolynomial(terms)


def bitstring_of(mono: Monomial, n: int) -> tuple[int, ...] | None:
    """Read a qubit bitstring from a one-photon-per-qubit monomial, else None."""
    bits: dict[int, int] = {}
    for mode, e in mono:
        if e != 1 or not isinstance(mode, ModeLabel):
            return None
        site = mode.site
        if site[0] == "sys" and mode.internal in ("0", "1"):
            q, b = site[1], int(mode.internal)
        elif site[0] == "rail":
            q, b = site[1], site[2]
        else:
            return None
        if q in bits:
            return None
        bits[q] = b
    if sorted(bits) != list(range(1, n + 1)):
        return None
    return tuple(bits[q] for q in range(1, n + 1))

"""Sculpting operators built from LQG graphs, applied to the boson initial state."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from . import scalars
from .fock import (
    FockPolynomial,
    InternalBasis,
    ModeLabel,
    annihilate_linear,
    basis_of,
    change_internal_basis,
    dicke_reference,
    inner_product,
    make_monomial,
    norm2,
    qubit_label,
    site_bases,
)
from .graphs import (
    CycleCover,
    SculptingBigraph,
    build_dicke_digraph,
    dcc_count_formula,
    digraph_to_bigraph,
    enumerate_dccs,
    enumerate_perfect_matchings,
    epm_violations,
    is_epm_bigraph,
)
from .scalars import EXACT
from .surd import Surd

Factor = tuple  # ((ModeLabel, weight), ...): sum_i w_i a_{mode_i}


@dataclass(frozen=True)
class SculptingOperator:
    factors: tuple
    sources: tuple = ()

    def __len__(self):
        return len(self.factors)

    def factor_norms(self) -> list:
        return [sum((scalars.abs2(w) for _, w in f), 0) for f in self.factors]


@dataclass(frozen=True)
class InitialState:
    systems: tuple
    ancillas: tuple
    polynomial: FockPolynomial

    @property
    def n(self) -> int:
        return len(self.systems)

    @property
    def k_anc(self) -> int:
        return len(self.ancillas)

    def photon_number(self) -> int:
        return 2 * len(self.systems) + len(self.ancillas)


def initial_state(systems: Sequence[tuple], ancillas: Sequence[tuple],
                  backend: str = EXACT) -> InitialState:
    """prod_j a^dag_{j,+} a^dag_{j,-} prod_l a^dag_{l,+} |vac>."""
    labels = []
    for s in systems:
        labels += [ModeLabel(s, "+"), ModeLabel(s, "-")]
    labels += [ModeLabel(a, "+") for a in ancillas]
    poly = FockPolynomial({make_monomial(labels): scalars.one(backend)})
    return InitialState(tuple(systems), tuple(ancillas), poly)


def dicke_initial_state(n: int, k: int, backend: str = EXACT) -> InitialState:
    """The 3n+k boson input: n systems, ancillas S_1..S_n and T_1..T_k."""
    return initial_state([("sys", j) for j in range(1, n + 1)],
                         [("S", j) for j in range(1, n + 1)] + [("T", l) for l in range(1, k + 1)],
                         backend)


def operator_from_bigraph(g: SculptingBigraph) -> SculptingOperator:
    """One factor per dot; each edge adds ``weight * a_{circle, colour}``."""
    if not is_epm_bigraph(g):
        raise ValueError("operator_from_bigraph needs an EPM bigraph")
    factors = []
    for d in g.dots:
        factors.append(tuple((ModeLabel(e.circle, e.color.state), e.weight) for e in g.dot_edges(d)))
    return SculptingOperator(tuple(factors), tuple(d[1] for d in g.dots))


# -- application --------------------------------------------------------------

_EXPAND = {
    # annihilator a_c rewritten in the other basis (real coefficients)
    "+": (("0", 1), ("1", 1)),
    "-": (("0", 1), ("1", -1)),
    "0": (("+", 1), ("-", 1)),
    "1": (("+", 1), ("-", -1)),
}


def _align(state: FockPolynomial, labels: Iterable[ModeLabel]) -> FockPolynomial:
    """Convert each site of ``state`` to the basis the operator uses there, when unique."""
    wanted: dict = {}
    for lab in labels:
        if lab.internal is None:
            continue
        wanted.setdefault(lab.site, set()).add(basis_of(lab.internal))
    current = site_bases(state)
    for target in InternalBasis:
        sites = [s for s, bs in wanted.items() if bs == {target} and current.get(s, target) is not target]
        if sites:
            state = change_internal_basis(state, target, sites)
    return state


def _rewrite(pairs, bases: dict, backend: str):
    """Express each annihilator in the basis the state uses at its site."""
    h = scalars.sqrt(Fraction(1, 2), backend)
    out = []
    for lab, w in pairs:
        b = bases.get(lab.site)
        if lab.internal is None or b is None or basis_of(lab.internal) is b:
            out.append((lab, w))
            continue
        for s, sign in _EXPAND[lab.internal]:
            out.append((ModeLabel(lab.site, s), w * h * sign))
    return out


def _apply_factors(state: FockPolynomial, factors: Sequence[Factor]) -> FockPolynomial:
    backend = EXACT if all(isinstance(c, Surd) for c in state.terms.values()) else scalars.FLOAT
    state = _align(state, (lab for f in factors for lab, _ in f))
    bases = site_bases(state)
    for f in factors:
        state = annihilate_linear(state, _rewrite(f, bases, backend))
        if state.is_zero():
            break
    return state


def apply_sculpting(op: SculptingOperator, init: InitialState) -> FockPolynomial:
    """Apply the factors left to right; returns the unnormalized final state."""
    return _apply_factors(init.polynomial, op.factors)


def project_no_bunching(state: FockPolynomial, init: InitialState) -> FockPolynomial:
    """Keep terms with at most one photon per system site and empty ancillas."""
    systems, ancillas = set(init.systems), set(init.ancillas)

    def ok(mono):
        per_site: dict = {}
        for m, e in mono:
            site = m.site
            if site in ancillas:
                return False
            if site in systems:
                per_site[site] = per_site.get(site, 0) + e
                if per_site[site] > 1:
                    return False
        return True

    return state.filter(ok)


def no_bunching_check(op: SculptingOperator, init: InitialState) -> bool:
    """True iff the sculpted state lies entirely in the no-bunching subspace."""
    out = apply_sculpting(op, init)
    return project_no_bunching(out, init) == out


def cover_operator(cover: CycleCover) -> tuple:
    """(weight, annihilation labels) of the operator monomial picked by a cover."""
    w = None
    labels = []
    for e in cover.edges:
        w = e.weight if w is None else w * e.weight
        labels.append(ModeLabel(e.target, e.color.state))
    return w, tuple(sorted(labels))


def dcc_expansion_state(covers: Sequence[CycleCover], init: InitialState) -> FockPolynomial:
    """Sum over covers of each cover's operator monomial applied to ``init``.

    Covers that share an operator monomial are merged before application.
    """
    grouped: dict = {}
    for c in covers:
        w, labels = cover_operator(c)
        grouped[labels] = grouped[labels] + w if labels in grouped else w
    out = FockPolynomial.zero()
    for labels, w in sorted(grouped.items()):
        if scalars.is_zero(w):
            continue
        factors = [((lab, scalars.one(EXACT) if isinstance(w, Surd) else 1.0),) for lab in labels]
        out = out + _apply_factors(init.polynomial, factors).scale(w)
    return out


def operator_monomial_classes(covers: Sequence[CycleCover]) -> dict:
    """Map each distinct operator monomial to the covers producing it."""
    out: dict = {}
    for c in covers:
        out.setdefault(cover_operator(c)[1], []).append(c)
    return out


# -- fidelity ----------------------------------------------------------------

def _encoding_of(state: FockPolynomial) -> str:
    for mono in state.terms:
        for m, _ in mono:
            if isinstance(m, ModeLabel) and m.site[0] == "rail":
                return "dual-rail"
    return "internal"


def fidelity_with_dicke(state: FockPolynomial, n: int, k: int):
    """|<D_n^k|state>|^2 / <state|state>; exact (a Surd) for exact input."""
    if state.is_zero():
        raise ValueError("fidelity of the zero state is undefined")
    enc = _encoding_of(state)
    backend = EXACT if all(isinstance(c, Surd) for c in state.terms.values()) else scalars.FLOAT
    if enc == "internal":
        state = change_internal_basis(state, InternalBasis.ZONE)
    ref = dicke_reference(n, k, enc, backend)
    ov = inner_product(ref, state)
    num = scalars.abs2(ov)
    den = norm2(state)
    if backend == EXACT:
        return num / den
    return float(complex(num).real / complex(den).real)


def canonical_phase(state: FockPolynomial, n: int, k: int) -> FockPolynomial:
    """Rescale so the |1..10..0> coefficient is real positive."""
    enc = _encoding_of(state)
    if enc == "internal":
        state = change_internal_basis(state, InternalBasis.ZONE)
    lead = make_monomial(qubit_label(m, int(m <= k), enc) for m in range(1, n + 1))
    c = state.coefficient(lead)
    if scalars.is_zero(c):
        raise ValueError("leading weight-k string has zero amplitude")
    return state.scale(c.conjugate())


# -- graph-side verification --------------------------------------------------

@dataclass
class GraphSideResult:
    n: int
    k: int
    dcc_count: int
    dcc_formula: int
    matching_count: int
    epm: bool
    no_bunching_filter_noop: bool
    two_path_agree: bool
    monomial_classes: int
    fidelity: Any

    @property
    def passed(self) -> bool:
        return (self.epm and self.no_bunching_filter_noop and self.two_path_agree
                and self.dcc_count == self.dcc_formula == self.matching_count
                and self.fidelity == 1)

    def to_json(self) -> dict:
        return {
            "n": self.n, "k": self.k, "dcc_count": self.dcc_count,
            "dcc_formula": self.dcc_formula, "matching_count": self.matching_count,
            "epm": self.epm, "no_bunching_filter_noop": self.no_bunching_filter_noop,
            "two_path_agree": self.two_path_agree, "monomial_classes": self.monomial_classes,
            "graph_fidelity": float(complex(self.fidelity).real),
            "graph_fidelity_exact": str(self.fidelity), "passed": self.passed,
        }


def verify_graph_side(n: int, k: int, backend: str = EXACT) -> GraphSideResult:
    """Digraph -> bigraph -> operator -> final state, checked two ways."""
    g = build_dicke_digraph(n, k, backend=backend)
    covers = enumerate_dccs(g)
    b = digraph_to_bigraph(g)
    matchings = enumerate_perfect_matchings(b)
    op = operator_from_bigraph(b)
    init = dicke_initial_state(n, k, backend)
    raw = apply_sculpting(op, init)
    projected = project_no_bunching(raw, init)
    via_dcc = dcc_expansion_state(covers, init)
    if backend == EXACT:
        agree = projected == via_dcc
    else:
        agree = projected.allclose(via_dcc, 1e-12)
    fid = fidelity_with_dicke(projected, n, k) if projected else scalars.scalar(0, backend)
    return GraphSideResult(
        n, k, len(covers), dcc_count_formula(n, k), len(matchings), not epm_violations(g),
        projected == raw, agree, len(operator_monomial_classes(covers)), fid)

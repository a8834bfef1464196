"""Sculpting digraphs and bigraphs, and the Dicke digraph D_n^k.

Vertices are site tuples: ``("sys", j)`` for system qubits (two bosons in
|+>|->), ``("S", j)`` and ``("T", l)`` for ancillas (one boson in |+>).  In a
digraph every vertex is both a mode and an operator factor; an edge ``u -> v``
of colour ``c`` and weight ``w`` puts ``w a_{v,c}`` into the factor of ``u``.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from . import scalars
from .fock import site_name
from .scalars import EXACT
from .surd import Surd

SYSTEM = "system"
ANCILLA = "ancilla"


class EdgeColor(enum.Enum):
    SOLID_BLACK = "+"
    DASHED_BLACK = "-"
    RED = "0"
    BLUE = "1"

    @property
    def state(self) -> str:
        return self.value

    @classmethod
    def from_state(cls, s: str) -> "EdgeColor":
        return cls(s)

    @property
    def title(self) -> str:
        return {"+": "SolidBlack", "-": "DashedBlack", "0": "Red", "1": "Blue"}[self.value]

    @classmethod
    def from_title(cls, t: str) -> "EdgeColor":
        return {c.title: c for c in cls}[t]


@dataclass(frozen=True)
class Edge:
    source: tuple
    target: tuple
    color: EdgeColor
    weight: Any


@dataclass(frozen=True)
class SculptingDigraph:
    vertices: tuple
    kinds: Mapping[tuple, str]
    edges: tuple

    def out_edges(self, v) -> list[Edge]:
        return [e for e in self.edges if e.source == v]

    def in_edges(self, v) -> list[Edge]:
        return [e for e in self.edges if e.target == v]

    def edge_set(self) -> set:
        return {(e.source, e.target, e.color, e.weight) for e in self.edges}

    def relabel(self, f: Callable[[tuple], tuple]) -> "SculptingDigraph":
        return SculptingDigraph(
            tuple(f(v) for v in self.vertices),
            {f(v): k for v, k in self.kinds.items()},
            tuple(Edge(f(e.source), f(e.target), e.color, e.weight) for e in self.edges),
        )

    def without_edge(self, source, target) -> "SculptingDigraph":
        return SculptingDigraph(self.vertices, self.kinds,
                                tuple(e for e in self.edges if (e.source, e.target) != (source, target)))

    def to_json(self) -> dict:
        return {
            "vertices": [{"site": list(v), "name": site_name(v), "kind": self.kinds[v]}
                         for v in self.vertices],
            "edges": [{"source": list(e.source), "target": list(e.target),
                       "color": e.color.title, "weight": weight_json(e.weight)}
                      for e in self.edges],
        }

    @classmethod
    def from_json(cls, data: dict) -> "SculptingDigraph":
        verts = tuple(tuple(v["site"]) for v in data["vertices"])
        kinds = {tuple(v["site"]): v["kind"] for v in data["vertices"]}
        edges = tuple(Edge(tuple(e["source"]), tuple(e["target"]),
                           EdgeColor.from_title(e["color"]), weight_from_json(e["weight"]))
                      for e in data["edges"])
        return cls(verts, kinds, edges)

    def to_dot(self) -> str:
        lines = ["digraph sculpting {"]
        for v in self.vertices:
            shape = "doublecircle" if self.kinds[v] == SYSTEM else "circle"
            lines.append(f'  "{site_name(v)}" [shape={shape}];')
        for e in self.edges:
            lines.append(f'  "{site_name(e.source)}" -> "{site_name(e.target)}" '
                         f"[{_dot_style(e.color)}, label=\"{_weight_label(e.weight)}\"];")
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class BiEdge:
    dot: tuple
    circle: tuple
    color: EdgeColor
    weight: Any


@dataclass(frozen=True)
class SculptingBigraph:
    """Circles are modes, dots are operator factors (``("dot", origin)``)."""

    circles: tuple
    kinds: Mapping[tuple, str]
    dots: tuple
    edges: tuple

    def is_balanced(self) -> bool:
        return len(self.circles) == len(self.dots)

    def dot_edges(self, d) -> list[BiEdge]:
        return [e for e in self.edges if e.dot == d]

    def circle_edges(self, c) -> list[BiEdge]:
        return [e for e in self.edges if e.circle == c]

    def to_json(self) -> dict:
        return {
            "circles": [{"site": list(c), "name": site_name(c), "kind": self.kinds[c]}
                        for c in self.circles],
            "dots": [list(d[1]) for d in self.dots],
            "edges": [{"dot": list(e.dot[1]), "circle": list(e.circle), "color": e.color.title,
                       "weight": weight_json(e.weight)} for e in self.edges],
        }

    def to_dot(self) -> str:
        lines = ["graph sculpting {"]
        for c in self.circles:
            lines.append(f'  "{site_name(c)}" [shape=circle];')
        for d in self.dots:
            lines.append(f'  "dot:{site_name(d[1])}" [shape=point, width=0.12];')
        for e in self.edges:
            lines.append(f'  "dot:{site_name(e.dot[1])}" -- "{site_name(e.circle)}" '
                         f"[{_dot_style(e.color)}, label=\"{_weight_label(e.weight)}\"];")
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CycleCover:
    """One chosen out-edge per vertex, with every vertex hit exactly once."""

    edges: tuple
    cycles: tuple = field(init=False, compare=False)

    def __post_init__(self):
        succ = {e.source: e.target for e in self.edges}
        seen, cycles = set(), []
        for v in sorted(succ):
            if v in seen:
                continue
            cyc = [v]
            seen.add(v)
            w = succ[v]
            while w != v:
                cyc.append(w)
                seen.add(w)
                w = succ[w]
            cycles.append(tuple(cyc))
        object.__setattr__(self, "cycles", tuple(cycles))

    @property
    def successor(self) -> dict:
        return {e.source: e.target for e in self.edges}

    def self_loops(self) -> list:
        return [c[0] for c in self.cycles if len(c) == 1]

    def system_self_loops(self) -> list:
        return [v for v in self.self_loops() if v[0] == "sys"]

    def key(self) -> frozenset:
        return frozenset((e.source, e.target) for e in self.edges)


@dataclass(frozen=True)
class Matching:
    edges: tuple

    def key(self) -> frozenset:
        return frozenset((e.dot, e.circle) for e in self.edges)


def _default_kind(v) -> str:
    return SYSTEM if v[0] == "sys" else ANCILLA


def _dot_style(color: EdgeColor) -> str:
    return {
        EdgeColor.SOLID_BLACK: "color=black, style=solid",
        EdgeColor.DASHED_BLACK: "color=black, style=dashed",
        EdgeColor.RED: "color=red, style=solid",
        EdgeColor.BLUE: "color=blue, style=solid",
    }[color]


def _weight_label(w) -> str:
    return str(w) if isinstance(w, Surd) else f"{complex(w):.4g}"


def weight_json(w) -> dict:
    z = complex(w)
    out = {"re": z.real, "im": z.imag}
    if isinstance(w, Surd):
        out["exact"] = w.to_json()
    return out


def weight_from_json(data: dict):
    if "exact" in data:
        return Surd.from_json(data["exact"])
    return complex(data["re"], data["im"])


# -- construction ------------------------------------------------------------

def validate_nk(n: int, k: int, degenerate: bool = False) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if degenerate and not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    if not degenerate and not 1 <= k <= n - 1:
        raise ValueError(f"need 1 <= k <= n-1 (k = 0 or n only with the degenerate flag), got n={n}, k={k}")


def check_splitting(k: int, alpha, beta, tol: float = 1e-12) -> None:
    """Raise unless k*alpha^2 + beta^2 == 1 (exactly for Surds)."""
    total = k * alpha * alpha + beta * beta
    if isinstance(total, Surd):
        if total != 1:
            raise ValueError(f"k*alpha^2 + beta^2 = {total}, expected 1")
    elif abs(complex(total) - 1) > tol:
        raise ValueError(f"k*alpha^2 + beta^2 = {complex(total).real:.15g}, expected 1")


def build_dicke_digraph(n: int, k: int, alpha=None, beta=None, *,
                        backend: str = EXACT, degenerate: bool = False) -> SculptingDigraph:
    """The Dicke digraph D_n^k.

    System vertex j: self-loop (Blue, weight -1/sqrt 2) and j -> S_j
    (SolidBlack, 1/sqrt 2).  S_j: S_j -> j (Red, ``beta``) and S_j -> T_l
    (SolidBlack, ``alpha``).  T_l: T_l -> S_j (SolidBlack, 1/sqrt n).  With
    alpha = beta = 1/sqrt(k+1) all out-weights of a vertex are equal.
    """
    validate_nk(n, k, degenerate)
    if alpha is None and beta is None:
        if k == n:
            alpha, beta = scalars.sqrt(Fraction(1, n), backend), scalars.scalar(0, backend)
        else:
            alpha = beta = scalars.sqrt(Fraction(1, k + 1), backend)
    elif alpha is None or beta is None:
        raise ValueError("give both alpha and beta or neither")
    else:
        alpha, beta = _as_weight(alpha, backend), _as_weight(beta, backend)
    check_splitting(k, alpha, beta)

    h = scalars.sqrt(Fraction(1, 2), backend)
    t_w = scalars.sqrt(Fraction(1, n), backend)
    systems = [("sys", j) for j in range(1, n + 1)]
    s_anc = [("S", j) for j in range(1, n + 1)]
    t_anc = [("T", l) for l in range(1, k + 1)]
    edges = []
    for j in range(1, n + 1):
        edges.append(Edge(("sys", j), ("sys", j), EdgeColor.BLUE, -h))
        edges.append(Edge(("sys", j), ("S", j), EdgeColor.SOLID_BLACK, h))
    for j in range(1, n + 1):
        if not scalars.is_zero(beta):
            edges.append(Edge(("S", j), ("sys", j), EdgeColor.RED, beta))
        for l in range(1, k + 1):
            edges.append(Edge(("S", j), ("T", l), EdgeColor.SOLID_BLACK, alpha))
    for l in range(1, k + 1):
        for j in range(1, n + 1):
            edges.append(Edge(("T", l), ("S", j), EdgeColor.SOLID_BLACK, t_w))
    verts = tuple(systems + s_anc + t_anc)
    kinds = {v: _default_kind(v) for v in verts}
    return SculptingDigraph(verts, kinds, tuple(edges))


def _as_weight(x, backend):
    if backend == EXACT and not isinstance(x, Surd | int | Fraction):
        raise TypeError("exact backend needs Surd/Fraction weights; use backend='float'")
    return scalars.scalar(x, backend)


def out_weight_norms(g: SculptingDigraph) -> dict:
    """sum |w|^2 over the out-edges of each vertex."""
    out = {}
    for v in g.vertices:
        tot = 0
        for e in g.out_edges(v):
            tot = tot + scalars.abs2(e.weight)
        out[v] = tot
    return out


# -- EPM checks --------------------------------------------------------------

def _incoming_ok(kind: str, colors: Counter) -> bool:
    if not colors:
        return False
    if kind == ANCILLA:
        return set(colors) == {EdgeColor.SOLID_BLACK}
    # two bosons in |+>|->: two annihilations must always cancel
    if set(colors) <= {EdgeColor.RED, EdgeColor.BLUE}:
        return colors[EdgeColor.RED] <= 1 and colors[EdgeColor.BLUE] <= 1
    return len(colors) == 1


def epm_violations(g: SculptingDigraph) -> list[str]:
    """Reasons why ``g`` is not an EPM digraph (empty when it is)."""
    bad = []
    for v in g.vertices:
        incoming = Counter(e.color for e in {(e.source, e.color): e for e in g.in_edges(v)}.values())
        if not _incoming_ok(g.kinds[v], incoming):
            bad.append(f"{site_name(v)}: incoming pattern {dict((c.title, n) for c, n in incoming.items())} "
                       "matches no allowed configuration")
        if not g.out_edges(v):
            bad.append(f"{site_name(v)}: no outgoing edge")
    return bad


def is_epm_digraph(g: SculptingDigraph) -> bool:
    """True iff every vertex's edge attachment is an allowed EPM configuration.

    Allowed patterns at a circle holding one boson |+>: only SolidBlack edges.
    At a circle holding |+>|->: at most one Red plus at most one Blue edge, or
    only SolidBlack, or only DashedBlack.  These are exactly the patterns for
    which any two annihilations of the same circle vanish
    (a_0 a_1 a^dag_+ a^dag_- |vac> = 0, a_+ a_+ a^dag_+ a^dag_- |vac> = 0, ...),
    so each surviving term removes one boson per circle.
    """
    return not epm_violations(g)


def is_epm_bigraph(b: SculptingBigraph) -> bool:
    if not b.is_balanced():
        return False
    for c in b.circles:
        colors = Counter(e.color for e in {(e.dot, e.color): e for e in b.circle_edges(c)}.values())
        if not _incoming_ok(b.kinds[c], colors):
            return False
    return all(b.dot_edges(d) for d in b.dots)


# -- enumeration -------------------------------------------------------------

def _backtrack_assignments(sources: list, options: Mapping[Any, list], target_of: Callable):
    """Yield injective choices ``{source: option}`` (one option per source)."""
    chosen: dict = {}
    used: set = set()
    remaining = set(sources)

    def rec():
        if not remaining:
            yield dict(chosen)
            return
        # most constrained source first
        best, best_opts = None, None
        for s in remaining:
            opts = [o for o in options[s] if target_of(o) not in used]
            if best_opts is None or len(opts) < len(best_opts) or (
                    len(opts) == len(best_opts) and s < best):
                best, best_opts = s, opts
                if not opts:
                    return
        remaining.discard(best)
        for o in best_opts:
            t = target_of(o)
            used.add(t)
            chosen[best] = o
            yield from rec()
            used.discard(t)
            del chosen[best]
        remaining.add(best)

    yield from rec()


def enumerate_dccs(g: SculptingDigraph) -> list[CycleCover]:
    """All disjoint cycle covers (permutations along edges), without duplicates."""
    options: dict = {v: [] for v in g.vertices}
    for e in g.edges:
        options[e.source].append(e)
    covers = []
    for choice in _backtrack_assignments(list(g.vertices), options, lambda e: e.target):
        covers.append(CycleCover(tuple(choice[v] for v in g.vertices)))
    covers.sort(key=lambda c: sorted((e.source, e.target, e.color.value) for e in c.edges))
    return covers


def dcc_count_formula(n: int, k: int) -> int:
    """C(n,k) self-loop placements times (k!)^2 alternating S<->T covers."""
    return math.comb(n, k) * math.factorial(k) ** 2


def digraph_to_bigraph(g: SculptingDigraph) -> SculptingBigraph:
    """Replace each vertex's out-star by a dot wired to the same circles.

    Indices, colours and weights (signs included) carry over unchanged.
    """
    bad = epm_violations(g)
    if bad:
        raise ValueError("unrecognized local pattern: " + "; ".join(bad))
    dots = tuple(("dot", v) for v in g.vertices)
    edges = tuple(BiEdge(("dot", e.source), e.target, e.color, e.weight) for e in g.edges)
    return SculptingBigraph(tuple(g.vertices), dict(g.kinds), dots, edges)


def enumerate_perfect_matchings(b: SculptingBigraph) -> list[Matching]:
    if not b.is_balanced():
        raise ValueError("perfect matchings need a balanced bigraph")
    options: dict = {d: [] for d in b.dots}
    for e in b.edges:
        options[e.dot].append(e)
    out = [Matching(tuple(choice[d] for d in b.dots))
           for choice in _backtrack_assignments(list(b.dots), options, lambda e: e.circle)]
    out.sort(key=lambda m: sorted((e.dot, e.circle, e.color.value) for e in m.edges))
    return out


def simple_bigraph(left: Iterable, right: Iterable, pairs: Iterable[tuple]) -> SculptingBigraph:
    """Uncoloured bigraph helper: circles ``left``, dots ``right``, unit weights."""
    circles = tuple(("c", x) for x in left)
    dots = tuple(("dot", ("d", y)) for y in right)
    edges = tuple(BiEdge(("dot", ("d", y)), ("c", x), EdgeColor.SOLID_BLACK, Surd.coerce(1))
                  for x, y in pairs)
    return SculptingBigraph(circles, {c: ANCILLA for c in circles}, dots, edges)


# -- symmetry ----------------------------------------------------------------

def dicke_relabeling(pair_perm: Mapping[int, int], t_perm: Mapping[int, int]) -> Callable:
    """Vertex map permuting the (j, S_j) pairs and the T_l labels."""
    def f(v):
        kind, i = v
        if kind in ("sys", "S"):
            return (kind, pair_perm.get(i, i))
        return (kind, t_perm.get(i, i))
    return f


def is_symmetry(g: SculptingDigraph, relabel: Callable) -> bool:
    return g.relabel(relabel).edge_set() == g.edge_set()

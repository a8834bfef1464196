"""Heralded simulation of the compiled D_n^k circuit.

Two independent routes to output amplitudes:

* polynomial evolution: each input photon becomes a linear form in output
  creation operators and the forms are multiplied out (optionally pruning
  monomials that can never belong to a wanted pattern);
* permanents of sub-matrices of the transfer matrix (Ryser, Gray code).
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from . import scalars
from .circuit import (
    OpticalCircuit,
    apply_element,
    circuit_unitary,
    column_polynomial,
    compile_circuit,
    dft_matrix,
)
from .fock import (
    FockPolynomial,
    TermBudgetExceeded,
    make_monomial,
    mono_norm2,
    mul,
    rail_label,
)
from .graphs import validate_nk
from .scalars import EXACT, FLOAT
from .sculpting import fidelity_with_dicke
from .surd import Surd

SCHEMA_VERSION = 1
FLOAT_TOL = 1e-10

# -- closed forms ------------------------------------------------------------


def _pow0(base: int, e: int) -> int:
    return 1 if e == 0 else base ** e  # 0**0 = 1 convention


def success_probability_closed_form(n: int, k: int) -> Fraction:
    """C(n,k) (k!)^4 (n-k)^(n-k) / (2^(2n) n^(n+2k-1) (k+1)^(n-1)), exactly."""
    validate_nk(n, k, degenerate=True)
    if k == 0:
        raise ValueError("the scheme needs k >= 1")
    num = math.comb(n, k) * math.factorial(k) ** 4 * _pow0(n - k, n - k)
    den = 2 ** (2 * n) * n ** (n + 2 * k - 1) * (k + 1) ** (n - 1)
    return Fraction(num, den)


def optimal_splitting(n: int, k: int, backend: str = EXACT):
    """(alpha, beta) = (sqrt(1/n), sqrt((n-k)/n))."""
    validate_nk(n, k, degenerate=True)
    return (scalars.sqrt(Fraction(1, n), backend), scalars.sqrt(Fraction(n - k, n), backend))


def canonical_amplitude(n: int, k: int, alpha=None, beta=None):
    """C(n,k)^(1/2) k!^2 / (2^(3n/2) n^k (k+1)^(n/2)) * beta^(n-k) alpha^k.

    Exact (a Surd) when alpha and beta are Surds, otherwise a float.
    """
    if alpha is None or beta is None:
        da, db = optimal_splitting(n, k)
        alpha = da if alpha is None else alpha
        beta = db if beta is None else beta
    pre2 = Fraction(math.comb(n, k), 2 ** (3 * n) * (k + 1) ** n)
    rest = Fraction(math.factorial(k) ** 2, n ** k)
    if isinstance(alpha, Surd) and isinstance(beta, Surd):
        b = Surd.coerce(1) if n == k else beta ** (n - k)
        return Surd.sqrt(pre2) * rest * b * alpha ** k
    a, b = complex(alpha).real, complex(beta).real
    b = 1.0 if n == k else b ** (n - k)
    return math.sqrt(pre2) * float(rest) * b * a ** k


def feedforward_factor(n: int, k: int) -> int:
    return 2 ** n * n * (k + 1)


def splitting_objective(n: int, k: int, beta: float) -> float:
    """beta^(n-k) alpha^k on the constraint k alpha^2 + beta^2 = 1."""
    alpha = math.sqrt(max(0.0, (1 - beta * beta) / k))
    return beta ** (n - k) * alpha ** k


def numeric_optimal_splitting(n: int, k: int, grid: int = 4001, tol: float = 1e-13):
    """Maximize the splitting objective by a dense grid then golden-section search."""
    betas = np.linspace(0.0, 1.0, grid)
    vals = [splitting_objective(n, k, b) for b in betas]
    i = int(np.argmax(vals))
    lo, hi = betas[max(i - 1, 0)], betas[min(i + 1, grid - 1)]
    g = (math.sqrt(5) - 1) / 2
    while hi - lo > tol:
        a, b = hi - g * (hi - lo), lo + g * (hi - lo)
        if splitting_objective(n, k, a) < splitting_objective(n, k, b):
            lo = a
        else:
            hi = b
    beta = (lo + hi) / 2
    return math.sqrt((1 - beta * beta) / k), beta


# -- permanents --------------------------------------------------------------

MAX_PERMANENT_DIM = 24


def permanent(m) -> complex:
    """Ryser's formula with Gray-code subset updates, O(2^d d)."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("permanent needs a square matrix")
    d = a.shape[0]
    if d > MAX_PERMANENT_DIM:
        raise ValueError(f"permanent of a {d}x{d} matrix is too large (limit {MAX_PERMANENT_DIM})")
    if d == 0:
        return 1 + 0j
    row_sums = np.zeros(d, dtype=complex)
    total = 0j
    gray_prev = 0
    for i in range(1, 2 ** d):
        gray = i ^ (i >> 1)
        j = (gray ^ gray_prev).bit_length() - 1
        if gray & (1 << j):
            row_sums += a[:, j]
        else:
            row_sums -= a[:, j]
        gray_prev = gray
        size = bin(gray).count("1")
        total += (-1) ** size * np.prod(row_sums)
    return (-1) ** d * total


def naive_permanent(m) -> complex:
    a = np.asarray(m, dtype=complex)
    d = a.shape[0]
    return sum((np.prod([a[i, p[i]] for i in range(d)]) for p in itertools.permutations(range(d))), 0j)


def _occupation_list(pattern, size: int) -> list[int]:
    if isinstance(pattern, dict):
        occ = [0] * size
        for m, e in pattern.items():
            occ[m] = e
        return occ
    occ = list(pattern)
    if len(occ) != size:
        raise ValueError(f"occupation vector has length {len(occ)}, expected {size}")
    return occ


def amplitude_by_permanent(circuit_or_matrix, input_pattern, output_pattern) -> complex:
    """<out| U |in> = per(U_sub) / sqrt(prod in! prod out!)."""
    if isinstance(circuit_or_matrix, OpticalCircuit):
        U = np.asarray(circuit_unitary(circuit_or_matrix), dtype=complex)
    else:
        U = np.asarray(circuit_or_matrix, dtype=complex)
    size = U.shape[0]
    occ_in = _occupation_list(input_pattern, size)
    occ_out = _occupation_list(output_pattern, size)
    if sum(occ_in) != sum(occ_out):
        raise ValueError(f"photon numbers differ: {sum(occ_in)} in, {sum(occ_out)} out")
    cols = [i for i, e in enumerate(occ_in) for _ in range(e)]
    rows = [i for i, e in enumerate(occ_out) for _ in range(e)]
    sub = U[np.ix_(rows, cols)]
    norm = math.prod(math.factorial(e) for e in occ_in) * math.prod(math.factorial(e) for e in occ_out)
    return permanent(sub) / math.sqrt(norm)


# -- polynomial evolution ----------------------------------------------------


def evolve_factors(c: OpticalCircuit, upto_step: int = 5) -> dict:
    """Each input photon's linear form after the elements of steps <= ``upto_step``.

    Substitution is multiplicative, so the state stays the product of these
    factors; the result maps input mode id -> FockPolynomial.
    """
    one = scalars.one(c.backend)
    factors = {m: FockPolynomial.creation(m, one) for m in c.inputs}
    for e in c.layers:
        if e.step > upto_step:
            break
        factors = {m: apply_element(f, e, c) for m, f in factors.items()}
    return factors


def evolve_steps(c: OpticalCircuit) -> dict:
    """Factored state after every step (1..5)."""
    return {s: evolve_factors(c, s) for s in range(1, 6)}


def evolve(c: OpticalCircuit, input_state: FockPolynomial | None = None, *,
           keep: Callable | None = None, budget: int | None = None,
           elementwise: bool = False) -> FockPolynomial:
    """Output polynomial of the circuit.

    ``keep`` prunes monomials during the expansion; it must be monotone
    (once false for a monomial, false for every multiple of it).  With
    ``elementwise`` the input is pushed through each element in turn instead
    of through the composed transfer matrix.
    """
    if input_state is None:
        input_state = c.input_state()
    for m in input_state.modes():
        if not (isinstance(m, int) and 0 <= m < c.num_modes):
            raise ValueError(f"mode {m!r} is not a circuit mode")
    if elementwise:
        state = input_state
        for e in c.layers:
            state = apply_element(state, e, c, budget=budget)
        return state.filter(keep) if keep else state
    U = circuit_unitary(c)
    cols: dict = {}
    out = FockPolynomial.zero()
    for mono, coeff in input_state.sorted_terms():
        term = FockPolynomial._raw({(): coeff})
        for m, e in mono:
            if m not in cols:
                cols[m] = column_polynomial(U, m)
            for _ in range(e):
                term = mul(term, cols[m], budget=budget, keep=keep)
        out = out + term
    return out


def mode_groups(c: OpticalCircuit) -> dict:
    """Named detector/output groups of the circuit."""
    n, k = c.n, c.k
    g = {}
    for m in range(1, n + 1):
        g[("out", m)] = (c.mode("rail", m, 0, 0), c.mode("rail", m, 1, 1))
        g[("rail", m)] = (c.mode("rail", m, 0, 1), c.mode("rail", m, 1, 0))
        g[("S", m)] = tuple(c.mode("S", m, s) for s in range(1, k + 2))
    for l in range(1, k + 1):
        g[("T", l)] = tuple(c.mode("T", l, t) for t in range(1, n + 1))
    return g


def group_cap_filter(c: OpticalCircuit, which: Iterable[str]) -> Callable:
    """Monotone filter: at most one photon in each group of the listed types."""
    which = set(which)
    owner = {}
    for name, modes in mode_groups(c).items():
        if name[0] in which:
            for m in modes:
                owner[m] = name

    def keep(mono) -> bool:
        seen = set()
        for m, e in mono:
            g = owner.get(m)
            if g is None:
                continue
            if e > 1 or g in seen:
                return False
            seen.add(g)
        return True

    return keep


RESTRICTIONS = ("none", "outputs", "groups")


def restriction_filter(c: OpticalCircuit, restriction: str) -> Callable | None:
    """none: full expansion; outputs: one photon per output pair at most;
    groups: additionally one photon per rail pair, S group and T group."""
    if restriction == "none":
        return None
    if restriction == "outputs":
        return group_cap_filter(c, ["out"])
    if restriction == "groups":
        return group_cap_filter(c, ["out", "rail", "S", "T"])
    raise ValueError(f"unknown restriction {restriction!r}; expected one of {RESTRICTIONS}")


# -- reference states for the intermediate steps -----------------------------

STEP_PREFACTOR_LABEL = {2: "1/(2^n n^(k/2))", 3: "1/(2^(2n) n^(k/2))",
                        4: "1/(2^(2n) n^(k/2))", 5: "1/(2^(2n) n^(k/2))"}


def reference_prefactor(n: int, k: int, step: int, backend: str = EXACT):
    p = 1 if step == 2 else 2
    return scalars.sqrt(Fraction(1, 2 ** (2 * p * n) * n ** k), backend)


def _lin(pairs) -> FockPolynomial:
    return FockPolynomial.linear(pairs)


def reference_groups(c: OpticalCircuit, step: int) -> dict:
    """Closed-form grouped factors of the state after ``step`` (2..5), unnormalized.

    Groups: ("S", j) and ("T", l) are linear forms, ("sys", m) the quadratic
    two-photon form of qubit m.
    """
    if step not in (2, 3, 4, 5):
        raise ValueError("reference states exist for steps 2..5")
    n, k, bk = c.n, c.k, c.backend
    a, b = c.alpha, c.beta
    one = scalars.one(bk)
    h = scalars.sqrt(Fraction(1, 2), bk)
    M = c.mode
    out = {}
    un = dft_matrix(n, bk)
    uk = dft_matrix(k + 1, bk)
    for j in range(1, n + 1):
        if step in (2, 3):
            f = _lin([(M("S", j, s), a) for s in range(1, k + 1)] + [(M("S", j, k + 1), b)])
        elif step == 4:
            f = _lin([(M("T", l, j), a) for l in range(1, k + 1)] + [(M("rail", j, 0, 1), b)])
        else:
            pairs = [(M("T", l, p), a * un[p - 1][j - 1]) for l in range(1, k + 1) for p in range(1, n + 1)]
            pairs += [(M("rail", j, 0, 1), b * h), (M("rail", j, 1, 0), b * h)]
            f = _lin(pairs)
        out[("S", j)] = f
    for l in range(1, k + 1):
        if step in (2, 3):
            f = _lin([(M("T", l, t), one) for t in range(1, n + 1)])
        elif step == 4:
            f = _lin([(M("S", t, l), one) for t in range(1, n + 1)])
        else:
            f = _lin([(M("S", t, q), uk[q - 1][l - 1]) for t in range(1, n + 1) for q in range(1, k + 2)])
        out[("T", l)] = f
    for m in range(1, n + 1):
        if step == 2:
            x = _lin([(M("rail", m, 0, 0), one)])
            y = _lin([(M("rail", m, 1, 1), one)])
        elif step == 3:
            x = _lin([(M("rail", m, 0, 0), one), (M("rail", m, 0, 1), one)])
            y = _lin([(M("rail", m, 1, 0), one), (M("rail", m, 1, 1), -one)])
        elif step == 4:
            x = _lin([(M("rail", m, 0, 0), one), (M("S", m, k + 1), one)])
            y = _lin([(M("rail", m, 1, 0), one), (M("rail", m, 1, 1), -one)])
        else:
            x = _lin([(M("rail", m, 0, 0), one)] + [(M("S", m, q), uk[q - 1][k]) for q in range(1, k + 2)])
            y = _lin([(M("rail", m, 0, 1), h), (M("rail", m, 1, 0), -h), (M("rail", m, 1, 1), -one)])
        out[("sys", m)] = x * x - y * y
    return out


def evolved_groups(c: OpticalCircuit, step: int, factors: dict | None = None) -> dict:
    """Group the evolved photon factors the way :func:`reference_groups` does."""
    if factors is None:
        factors = evolve_factors(c, step)
    M = c.mode
    out = {}
    for j in range(1, c.n + 1):
        out[("S", j)] = factors[M("S", j, 1)]
    for l in range(1, c.k + 1):
        out[("T", l)] = factors[M("T", l, 1)]
    for m in range(1, c.n + 1):
        out[("sys", m)] = factors[M("rail", m, 0, 0)] * factors[M("rail", m, 1, 1)]
    return out


def proportionality(p: FockPolynomial, q: FockPolynomial, tol: float = FLOAT_TOL):
    """Scalar c with p == c*q, or None."""
    if set(p.terms) != set(q.terms) or not q.terms:
        return None
    mono = min(q.terms)
    c = p.terms[mono] / q.terms[mono]
    scaled = q.scale(c)
    if isinstance(c, Surd):
        return c if scaled == p else None
    return c if scaled.allclose(p, tol) else None


@dataclass
class StepCheck:
    step: int
    group_scales: dict
    prefactor: Any
    expected_prefactor: Any
    mismatched_groups: list

    @property
    def passed(self) -> bool:
        if self.mismatched_groups:
            return False
        if isinstance(self.prefactor, Surd):
            return self.prefactor == self.expected_prefactor
        return abs(complex(self.prefactor) - complex(self.expected_prefactor)) < FLOAT_TOL


def check_step(c: OpticalCircuit, step: int, factors: dict | None = None) -> StepCheck:
    """Compare the evolved state after ``step`` against its closed form.

    Each group must match its reference up to a scalar, and the product of
    those scalars must equal the stated global prefactor; together this is
    term-for-term equality of the full expanded product.
    """
    ev = evolved_groups(c, step, factors)
    ref = reference_groups(c, step)
    scales = {}
    bad = []
    pref = scalars.one(c.backend)
    for g in sorted(ref):
        s = proportionality(ev[g], ref[g])
        if s is None:
            bad.append(g)
            continue
        scales[g] = s
        pref = pref * s
    return StepCheck(step, scales, pref, reference_prefactor(c.n, c.k, step, c.backend), bad)


def expanded_reference(c: OpticalCircuit, step: int, *, budget: int | None = None) -> FockPolynomial:
    """Fully multiplied-out closed form of the state after ``step``."""
    ref = reference_groups(c, step)
    out = FockPolynomial.constant(reference_prefactor(c.n, c.k, step, c.backend))
    for g in sorted(ref):
        out = mul(out, ref[g], budget=budget)
    return out


def expanded_evolution(c: OpticalCircuit, step: int, *, budget: int | None = None) -> FockPolynomial:
    factors = evolve_factors(c, step)
    out = FockPolynomial.vacuum(c.backend)
    for m in sorted(factors):
        out = mul(out, factors[m], budget=budget)
    return out


# -- heralding ---------------------------------------------------------------


@dataclass
class FeedForward:
    """Rail swaps then per-qubit phases that map a conditional state onto |D_n^k>.

    ``phases[m]`` is the factor carried by logical |1> of qubit m (after the
    swap); the correction multiplies that component by its inverse.
    """

    swaps: tuple
    phases: tuple
    global_factor: Any

    def to_json(self) -> dict:
        return {"swaps": list(self.swaps),
                "phases_over_pi": [_phase_over_pi(w) for w in self.phases],
                "global_abs": abs(complex(self.global_factor))}


def _phase_over_pi(w) -> float:
    return round(math.atan2(complex(w).imag, complex(w).real) / math.pi, 12) + 0.0


@dataclass
class HeraldOutcome:
    pattern: tuple                 # detector monomial: ((mode, count), ...)
    conditional_state: FockPolynomial  # valid dual-rail part, rail labels, bosonic-norm weights
    weight: Any                    # probability of the pattern with valid dual-rail output
    total_probability: Any         # probability of the pattern, any output
    designed: bool = False
    feedforward: FeedForward | None = None
    fidelity: Any = None

    @property
    def correctable(self) -> bool:
        return self.feedforward is not None

    @property
    def accepted(self) -> bool:
        return self.designed and self.correctable

    def occupation(self, c: OpticalCircuit) -> list[int]:
        d = dict(self.pattern)
        return [d.get(m, 0) for m in c.detectors]


def bits_of_state(state: FockPolynomial, n: int) -> dict:
    """Map bitstring -> coefficient for a dual-rail polynomial."""
    out = {}
    for mono, c in state.terms.items():
        bits = tuple(0 for _ in range(n))
        for lab, e in mono:
            m, b = lab.site[1], lab.site[2]
            bits = bits[:m - 1] + (b,) + bits[m:]
        out[bits] = c
    return out


def _close(a, b, tol=FLOAT_TOL) -> bool:
    if isinstance(a, Surd) and isinstance(b, Surd):
        return a == b
    return abs(complex(a) - complex(b)) <= tol * max(1.0, abs(complex(b)))


def find_feedforward(bits: dict, n: int, k: int) -> FeedForward | None:
    """Search rail swaps x phases taking ``bits`` to a multiple of |D_n^k>."""
    if not bits:
        return None
    target = {tuple(int(i in ones) for i in range(n)) for ones in itertools.combinations(range(n), k)}
    mags = [scalars.abs2(c) for c in bits.values()]
    if not all(_close(m, mags[0]) for m in mags):
        return None
    for swaps in itertools.product((0, 1), repeat=n):
        moved = {tuple(b ^ s for b, s in zip(key, swaps)): c for key, c in bits.items()}
        if set(moved) != target:
            continue
        w = _solve_phases(moved, n, k)
        if w is not None:
            return FeedForward(swaps, w[0], w[1])
    return None


def _solve_phases(coeffs: dict, n: int, k: int):
    """Find w_1..w_n, lam with coeffs[b] = lam * prod_{b_m=1} w_m, if possible."""
    x0 = min(coeffs)
    c0 = coeffs[x0]
    ones = [i for i in range(n) if x0[i]]
    zeros = [i for i in range(n) if not x0[i]]
    one = Surd.coerce(1) if isinstance(c0, Surd) else 1.0 + 0j
    w = [one] * n
    if ones and zeros:
        i0, z0 = ones[0], zeros[0]
        for m in zeros:
            y = list(x0)
            y[i0], y[m] = 0, 1
            w[m] = coeffs[tuple(y)] / c0
        for i in ones[1:]:
            y = list(x0)
            y[i], y[z0] = 0, 1
            w[i] = w[z0] / (coeffs[tuple(y)] / c0)
    lam = c0
    for i in ones:
        lam = lam / w[i]
    for b, c in coeffs.items():
        pred = lam
        for i in range(n):
            if b[i]:
                pred = pred * w[i]
        if not _close(pred, c):
            return None
    return tuple(w), lam


def apply_feedforward(bits: dict, ff: FeedForward, n: int) -> FockPolynomial:
    """Corrected dual-rail state: swap rails, then undo the phases."""
    terms = {}
    for key, c in bits.items():
        b = tuple(x ^ s for x, s in zip(key, ff.swaps))
        for i in range(n):
            if b[i]:
                c = c / ff.phases[i]
        terms[make_monomial(rail_label(i + 1, b[i]) for i in range(n))] = c
    return FockPolynomial(terms)


def designed_patterns(c: OpticalCircuit) -> list[tuple]:
    """The 2^n n (k+1) heralding patterns targeted by the feed-forward.

    Rail pair j clicks once (either port); every S group clicks at a common
    port q; every T group clicks at a common port p.
    """
    n, k = c.n, c.k
    out = []
    for rails in itertools.product((0, 1), repeat=n):
        for q in range(1, k + 2):
            for p in range(1, n + 1):
                modes = [c.mode("rail", j, 0, 1) if r == 0 else c.mode("rail", j, 1, 0)
                         for j, r in zip(range(1, n + 1), rails)]
                modes += [c.mode("S", j, q) for j in range(1, n + 1)]
                modes += [c.mode("T", l, p) for l in range(1, k + 1)]
                out.append(make_monomial(modes))
    return sorted(out)


def canonical_pattern(c: OpticalCircuit) -> tuple:
    """All rail clicks on (j,0,1), S and T groups on their first port."""
    modes = [c.mode("rail", j, 0, 1) for j in range(1, c.n + 1)]
    modes += [c.mode("S", j, 1) for j in range(1, c.n + 1)]
    modes += [c.mode("T", l, 1) for l in range(1, c.k + 1)]
    return make_monomial(modes)


def herald(state: FockPolynomial, c: OpticalCircuit, *, correct: str = "designed") -> list[HeraldOutcome]:
    """Group output terms by detector pattern and analyse each pattern.

    ``correct`` selects which patterns get the feed-forward search:
    "designed", "all" or "none".
    """
    det = set(c.detectors)
    out_modes = set(c.outputs)
    rail_of = {m: rail_label(*c.output_qubit(m)) for m in c.outputs}
    grouped: dict = {}
    for mono, coeff in state.terms.items():
        d = tuple((m, e) for m, e in mono if m in det)
        o = tuple((m, e) for m, e in mono if m in out_modes)
        grouped.setdefault(d, []).append((o, coeff))
    designed = set(designed_patterns(c))
    zero = scalars.scalar(0, c.backend)
    results = []
    for d in sorted(grouped):
        scale_d = mono_norm2(d)
        total = zero
        valid = {}
        for o, coeff in grouped[d]:
            p = scalars.abs2(coeff) * (scale_d * mono_norm2(o))
            total = total + p
            pairs = [c.output_qubit(m) for m, e in o if e == 1]
            if len(pairs) == c.n == len(o) and len({q for q, _ in pairs}) == c.n:
                lab = make_monomial(rail_of[m] for m, _ in o)
                valid[lab] = coeff * scalars.sqrt(scale_d, c.backend)
        cond = FockPolynomial(valid)
        weight = sum((scalars.abs2(v) for v in cond.terms.values()), zero)
        oc = HeraldOutcome(d, cond, weight, total, d in designed)
        if correct == "all" or (correct == "designed" and oc.designed):
            if cond:
                bits = bits_of_state(cond, c.n)
                ff = find_feedforward(bits, c.n, c.k)
                if ff is not None:
                    oc.feedforward = ff
                    oc.fidelity = fidelity_with_dicke(apply_feedforward(bits, ff, c.n), c.n, c.k)
        results.append(oc)
    return results


# -- reports -----------------------------------------------------------------


@dataclass
class SchemeReport:
    n: int
    k: int
    alpha: Any
    beta: Any
    backend: str
    restriction: str
    dcc_count: int | None = None
    graph_fidelity: Any = None
    circuit_fidelity: Any = None
    single_pattern_amplitude: Any = None
    canonical_amplitude_closed_form: Any = None
    accepted_pattern_count: int = 0
    designed_pattern_count: int = 0
    correctable_pattern_count: int = 0
    feedforward_factor: int = 0
    p_success_simulated: Any = None
    p_success_closed_form: Fraction | None = None
    p_success_expected: Any = None
    p_correctable_total: Any = None
    p_total: Any = None
    outcomes: list = field(default_factory=list, repr=False)

    @property
    def p_success_relative_error(self) -> float | None:
        if self.p_success_simulated is None or self.p_success_closed_form is None:
            return None
        cf = float(self.p_success_closed_form)
        return abs(float(complex(self.p_success_simulated).real) - cf) / cf

    @property
    def expected_relative_error(self) -> float | None:
        """Simulated vs 2^n n (k+1) amplitude^2 at this report's alpha, beta."""
        if self.p_success_simulated is None or self.p_success_expected is None:
            return None
        e = float(complex(self.p_success_expected).real)
        return abs(float(complex(self.p_success_simulated).real) - e) / e

    @property
    def p_success_exact_match(self) -> bool:
        s = self.p_success_simulated
        return isinstance(s, Surd) and s.is_rational() and s.to_fraction() == self.p_success_closed_form

    @property
    def count_matches_feedforward(self) -> bool:
        return self.accepted_pattern_count == self.feedforward_factor

    def to_json(self) -> dict:
        def f(x):
            return None if x is None else float(complex(x).real)

        def ex(x):
            return None if not isinstance(x, Surd | Fraction) else str(x)

        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n, "k": self.k,
            "alpha": f(self.alpha), "beta": f(self.beta),
            "backend": self.backend, "restriction": self.restriction,
            "dcc_count": self.dcc_count,
            "graph_fidelity": f(self.graph_fidelity),
            "circuit_fidelity": f(self.circuit_fidelity),
            "single_pattern_amplitude": f(self.single_pattern_amplitude),
            "single_pattern_amplitude_closed_form": f(self.canonical_amplitude_closed_form),
            "accepted_pattern_count": self.accepted_pattern_count,
            "designed_pattern_count": self.designed_pattern_count,
            "correctable_pattern_count": self.correctable_pattern_count,
            "feedforward_factor": self.feedforward_factor,
            "count_matches_feedforward": self.count_matches_feedforward,
            "p_success_simulated": f(self.p_success_simulated),
            "p_success_simulated_exact": ex(self.p_success_simulated),
            "p_success_closed_form": f(self.p_success_closed_form),
            "p_success_closed_form_exact": ex(self.p_success_closed_form),
            "p_success_relative_error": self.p_success_relative_error,
            "p_success_expected": f(self.p_success_expected),
            "expected_relative_error": self.expected_relative_error,
            "p_success_exact_match": self.p_success_exact_match,
            "p_correctable_total": f(self.p_correctable_total),
            "p_total_expanded": f(self.p_total),
        }

    def pattern_rows(self) -> list[dict]:
        rows = []
        for o in self.outcomes:
            rows.append({
                "pattern": " ".join(f"{m}:{e}" for m, e in o.pattern),
                "weight": float(complex(o.weight).real),
                "total_probability": float(complex(o.total_probability).real),
                "designed": int(o.designed),
                "accepted": int(o.accepted),
                "correctable": int(o.correctable),
                "fidelity": "" if o.fidelity is None else float(complex(o.fidelity).real),
            })
        return rows

    def patterns_csv(self) -> str:
        buf = io.StringIO()
        cols = ["pattern", "weight", "total_probability", "designed", "accepted", "correctable", "fidelity"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in self.pattern_rows():
            w.writerow({k: (f"{v:.12e}" if isinstance(v, float) else v) for k, v in r.items()})
        return buf.getvalue()


def simulate_scheme(n: int, k: int, alpha=None, beta=None, *, backend: str = EXACT,
                    restriction: str = "groups", correct: str = "designed",
                    budget: int | None = None) -> SchemeReport:
    """Compile, evolve, herald and compare with the closed forms."""
    c = compile_circuit(n, k, alpha, beta, backend=backend)
    state = evolve(c, keep=restriction_filter(c, restriction), budget=budget)
    outcomes = herald(state, c, correct=correct)
    zero = scalars.scalar(0, backend)
    rep = SchemeReport(n, k, c.alpha, c.beta, backend, restriction, outcomes=outcomes)
    rep.feedforward_factor = feedforward_factor(n, k)
    rep.p_success_closed_form = success_probability_closed_form(n, k)
    rep.canonical_amplitude_closed_form = canonical_amplitude(n, k, c.alpha, c.beta)
    rep.p_success_expected = rep.canonical_amplitude_closed_form ** 2 * rep.feedforward_factor
    rep.designed_pattern_count = sum(o.designed for o in outcomes)
    acc = [o for o in outcomes if o.accepted]
    rep.accepted_pattern_count = len(acc)
    rep.correctable_pattern_count = sum(o.correctable for o in outcomes)
    rep.p_success_simulated = sum((o.weight for o in acc), zero)
    rep.p_correctable_total = sum((o.weight for o in outcomes if o.correctable), zero)
    rep.p_total = sum((o.total_probability for o in outcomes), zero)
    fids = [o.fidelity for o in acc]
    if fids:
        rep.circuit_fidelity = min(fids, key=lambda z: complex(z).real)
    canon = canonical_pattern(c)
    for o in outcomes:
        if o.pattern == canon and o.conditional_state:
            coeffs = list(o.conditional_state.terms.values())
            rep.single_pattern_amplitude = _amplitude_of(coeffs, backend)
    return rep


def _amplitude_of(coeffs: Sequence, backend: str):
    """sqrt(sum |c|^2) of a conditional state (its heralded amplitude)."""
    tot = sum((scalars.abs2(c) for c in coeffs), scalars.scalar(0, backend))
    if isinstance(tot, Surd) and tot.is_rational():
        return Surd.sqrt(tot.to_fraction())
    return math.sqrt(complex(tot).real)


def success_probability_simulated(n: int, k: int, *, backend: str = EXACT, budget: int | None = None):
    """Summed weight of accepted heralding patterns (designed and correctable)."""
    return simulate_scheme(n, k, backend=backend, budget=budget).p_success_simulated


def canonical_conditional_state(n: int, k: int, *, backend: str = EXACT) -> FockPolynomial:
    c = compile_circuit(n, k, backend=backend)
    state = evolve(c, keep=restriction_filter(c, "groups"))
    canon = canonical_pattern(c)
    for o in herald(state, c, correct="none"):
        if o.pattern == canon:
            return o.conditional_state
    return FockPolynomial.zero()


__all__ = [
    "TermBudgetExceeded", "FLOAT", "SCHEMA_VERSION",
    "success_probability_closed_form", "optimal_splitting", "canonical_amplitude",
    "feedforward_factor", "numeric_optimal_splitting", "splitting_objective",
    "permanent", "naive_permanent", "amplitude_by_permanent",
    "evolve", "evolve_factors", "evolve_steps", "reference_groups", "evolved_groups",
    "check_step", "expanded_reference", "expanded_evolution", "StepCheck",
    "herald", "HeraldOutcome", "FeedForward", "find_feedforward", "apply_feedforward",
    "designed_patterns", "canonical_pattern", "restriction_filter", "group_cap_filter",
    "mode_groups", "SchemeReport", "simulate_scheme", "success_probability_simulated",
    "canonical_conditional_state", "bits_of_state",
]

"""Linear-optical circuit for heralded D_n^k generation.

Mode registry (dense ids, in this order):

* system qubit m: four paths ``("rail", m, s, b)`` with s, b in {0, 1}.  The
  two input photons enter ``(m,0,0)`` and ``(m,1,1)``; those two paths are
  also the dual-rail outputs (logical 0 and 1).
* ancilla S_j: branches ``("S", j, s)``, s = 1..k+1, photon enters s = 1.
* ancilla T_l: branches ``("T", l, t)``, t = 1..n, photon enters t = 1.

Every mode that is not an output is detected, so 5n + 2nk modes in total and
2n + k heralding photons.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from . import scalars
from .fock import FockPolynomial, rail_label, substitute
from .graphs import check_splitting, validate_nk, weight_from_json, weight_json
from .scalars import EXACT
from .surd import Surd

SCHEMA_VERSION = 1

BEAMSPLITTER = "Beamsplitter"
SYMMETRIC = "SymmetricMultiport"
ASYMMETRIC = "AsymmetricMultiport"
PERMUTATION = "Permutation"
PHASE = "PhaseShift"
KINDS = (BEAMSPLITTER, SYMMETRIC, ASYMMETRIC, PERMUTATION, PHASE)

STEP_NAMES = {
    1: "initial state",
    2: "path division",
    3: "two-photon splitting",
    4: "wire permutation",
    5: "final multiports",
}


@dataclass(frozen=True)
class CircuitMode:
    id: int
    origin: tuple


@dataclass(frozen=True)
class CircuitElement:
    """``a^dag_{modes[q]} -> sum_p matrix[p][q] a^dag_{modes[p]}``."""

    kind: str
    modes: tuple
    matrix: tuple
    step: int = 0
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown element kind {self.kind!r}")
        d = len(self.modes)
        if len(self.matrix) != d or any(len(r) != d for r in self.matrix):
            raise ValueError(f"{self.kind} on {d} modes needs a {d}x{d} matrix")
        if len(set(self.modes)) != d:
            raise ValueError("repeated mode in element")

    @property
    def dim(self) -> int:
        return len(self.modes)

    def column(self, q: int) -> list:
        return [(self.modes[p], self.matrix[p][q]) for p in range(self.dim)
                if not scalars.is_zero(self.matrix[p][q])]

    def to_json(self) -> dict:
        return {"step": self.step, "kind": self.kind, "label": self.label,
                "modes": list(self.modes),
                "matrix": [[weight_json(c) for c in row] for row in self.matrix]}

    @classmethod
    def from_json(cls, data: dict) -> "CircuitElement":
        m = tuple(tuple(weight_from_json(c) for c in row) for row in data["matrix"])
        return cls(data["kind"], tuple(data["modes"]), m, data["step"], data.get("label", ""))


@dataclass
class OpticalCircuit:
    n: int
    k: int
    alpha: Any
    beta: Any
    backend: str
    modes: list
    layers: list
    inputs: list = field(default_factory=list)
    detectors: list = field(default_factory=list)
    outputs: list = field(default_factory=list)

    def __post_init__(self):
        self._index = {m.origin: m.id for m in self.modes}
        if [m.id for m in self.modes] != list(range(len(self.modes))):
            raise ValueError("mode ids must be dense 0..M-1")
        if set(self.detectors) & set(self.outputs):
            raise ValueError("a mode cannot be both detected and an output")

    @property
    def num_modes(self) -> int:
        return len(self.modes)

    def mode(self, *origin) -> int:
        return self._index[tuple(origin)]

    def origin(self, mode_id: int) -> tuple:
        return self.modes[mode_id].origin

    def step_elements(self, step: int) -> list:
        return [e for e in self.layers if e.step == step]

    def discarded(self) -> list:
        used = set(self.detectors) | set(self.outputs)
        return [m.id for m in self.modes if m.id not in used]

    def photon_number(self) -> int:
        return len(self.inputs)

    def input_state(self) -> FockPolynomial:
        """Step-1 product state, one photon per input mode."""
        return _product_of_modes(self.inputs, self.backend)

    def output_qubit(self, mode_id: int) -> tuple | None:
        """(qubit m, logical bit) for an output mode, else None."""
        o = self.origin(mode_id)
        if mode_id in self.outputs:
            return o[1], o[3]
        return None

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n, "k": self.k,
            "alpha": weight_json(self.alpha), "beta": weight_json(self.beta),
            "backend": self.backend,
            "modes": [{"id": m.id, "origin": list(m.origin)} for m in self.modes],
            "layers": [e.to_json() for e in self.layers],
            "inputs": list(self.inputs),
            "detectors": list(self.detectors),
            "outputs": list(self.outputs),
        }

    @classmethod
    def from_json(cls, data: dict) -> "OpticalCircuit":
        modes = [CircuitMode(m["id"], tuple(m["origin"])) for m in data["modes"]]
        return cls(data["n"], data["k"], weight_from_json(data["alpha"]),
                   weight_from_json(data["beta"]), data["backend"], modes,
                   [CircuitElement.from_json(e) for e in data["layers"]],
                   list(data["inputs"]), list(data["detectors"]), list(data["outputs"]))


def _product_of_modes(modes, backend) -> FockPolynomial:
    out = FockPolynomial.vacuum(backend)
    for m in modes:
        out = out * FockPolynomial.creation(m, scalars.one(backend))
    return out


# -- element matrices --------------------------------------------------------

def beamsplitter_matrix(backend: str = EXACT) -> tuple:
    h = scalars.sqrt(Fraction(1, 2), backend)
    return ((h, h), (h, -h))


def dft_matrix(d: int, backend: str = EXACT) -> tuple:
    """(U_d)_{pq} = w^{pq}/sqrt(d) with ports indexed from 0, w = exp(2 pi i/d)."""
    if d < 1:
        raise ValueError("DFT size must be positive")
    if backend == EXACT and not scalars.exact_dft_supported(d):
        raise ValueError(f"{d}-port DFT is not exact; use the float backend")
    s = scalars.sqrt(Fraction(1, d), backend)
    return tuple(tuple(scalars.unit_root(p * q, d, backend) * s for q in range(d)) for p in range(d))


def householder_completion(v: list, backend: str = EXACT) -> tuple:
    """Real orthogonal matrix whose first column is the unit vector ``v``.

    Reflection I - 2uu^T/(u^T u) with u = e_1 - v; entries stay in the field
    generated by ``v``, so exact inputs give exact outputs.
    """
    d = len(v)
    one = scalars.one(backend)
    zero = scalars.scalar(0, backend)
    e1 = [one] + [zero] * (d - 1)
    u = [e1[i] - v[i] for i in range(d)]
    uu = sum((x * x for x in u), zero)
    if scalars.is_zero(uu):
        return tuple(tuple(one if i == j else zero for j in range(d)) for i in range(d))
    f = 2 / uu if backend == EXACT else 2.0 / complex(uu)
    return tuple(tuple((one if i == j else zero) - f * u[i] * u[j] for j in range(d)) for i in range(d))


def permutation_matrix(modes: tuple, mapping: dict, backend: str = EXACT) -> tuple:
    """Matrix sending a^dag_m to a^dag_{mapping[m]} on ``modes``."""
    pos = {m: i for i, m in enumerate(modes)}
    one, zero = scalars.one(backend), scalars.scalar(0, backend)
    rows = [[zero] * len(modes) for _ in modes]
    for m in modes:
        rows[pos[mapping.get(m, m)]][pos[m]] = one
    return tuple(tuple(r) for r in rows)


def phase_shift(mode: int, num: int, den: int, backend: str = EXACT, step: int = 0) -> CircuitElement:
    return CircuitElement(PHASE, (mode,), ((scalars.unit_root(num, den, backend),),), step,
                          f"phase 2pi*{num}/{den}")


# -- compilation -------------------------------------------------------------

def mode_origins(n: int, k: int) -> list[tuple]:
    origins = [("rail", m, s, b) for m in range(1, n + 1) for s in (0, 1) for b in (0, 1)]
    origins += [("S", j, s) for j in range(1, n + 1) for s in range(1, k + 2)]
    origins += [("T", l, t) for l in range(1, k + 1) for t in range(1, n + 1)]
    return origins


def wire_permutation_map(n: int, k: int) -> dict:
    """Step-4 rewiring on origins: S_j,s <-> T_s,j (s <= k) and S_j,k+1 <-> (j,0,1)."""
    out = {}
    for j in range(1, n + 1):
        for s in range(1, k + 1):
            out[("S", j, s)] = ("T", s, j)
            out[("T", s, j)] = ("S", j, s)
        out[("S", j, k + 1)] = ("rail", j, 0, 1)
        out[("rail", j, 0, 1)] = ("S", j, k + 1)
    return out


def resolve_splitting(n: int, k: int, alpha=None, beta=None, backend: str = EXACT):
    """Fill in the optimal alpha/beta where missing, coerce, and validate."""
    opt_a = scalars.sqrt(Fraction(1, n), backend)
    opt_b = scalars.sqrt(Fraction(n - k, n), backend)
    alpha = opt_a if alpha is None else scalars.scalar(alpha, backend)
    beta = opt_b if beta is None else scalars.scalar(beta, backend)
    check_splitting(k, alpha, beta)
    return alpha, beta


def compile_circuit(n: int, k: int, alpha=None, beta=None, *, backend: str = EXACT) -> OpticalCircuit:
    """Build the five-step D_n^k circuit; alpha/beta default to the optimum."""
    scalars.check_backend(backend)
    validate_nk(n, k)
    alpha, beta = resolve_splitting(n, k, alpha, beta, backend)
    origins = mode_origins(n, k)
    modes = [CircuitMode(i, o) for i, o in enumerate(origins)]
    idx = {o: i for i, o in enumerate(origins)}
    bs = beamsplitter_matrix(backend)
    dft_n = dft_matrix(n, backend)
    dft_k1 = dft_matrix(k + 1, backend)
    asym = householder_completion([alpha] * k + [beta], backend)

    layers: list[CircuitElement] = []
    for m in range(1, n + 1):
        layers.append(CircuitElement(BEAMSPLITTER, (idx["rail", m, 0, 0], idx["rail", m, 1, 1]), bs, 2,
                                     f"BS q{m}"))
    for j in range(1, n + 1):
        layers.append(CircuitElement(ASYMMETRIC, tuple(idx["S", j, s] for s in range(1, k + 2)), asym, 2,
                                     f"asym S{j}"))
    for l in range(1, k + 1):
        layers.append(CircuitElement(SYMMETRIC, tuple(idx["T", l, t] for t in range(1, n + 1)), dft_n, 2,
                                     f"U{n} T{l}"))
    for m in range(1, n + 1):
        layers.append(CircuitElement(BEAMSPLITTER, (idx["rail", m, 0, 0], idx["rail", m, 0, 1]), bs, 3,
                                     f"BS q{m} rail0"))
        layers.append(CircuitElement(BEAMSPLITTER, (idx["rail", m, 1, 0], idx["rail", m, 1, 1]), bs, 3,
                                     f"BS q{m} rail1"))
    layers.append(wire_permutation(n, k, idx, backend))
    for l in range(1, k + 1):
        layers.append(CircuitElement(SYMMETRIC, tuple(idx["T", l, t] for t in range(1, n + 1)), dft_n, 5,
                                     f"U{n} T{l}"))
    for j in range(1, n + 1):
        layers.append(CircuitElement(SYMMETRIC, tuple(idx["S", j, s] for s in range(1, k + 2)), dft_k1, 5,
                                     f"U{k + 1} S{j}"))
    for j in range(1, n + 1):
        layers.append(CircuitElement(BEAMSPLITTER, (idx["rail", j, 0, 1], idx["rail", j, 1, 0]), bs, 5,
                                     f"BS q{j} herald"))

    inputs = [idx["S", j, 1] for j in range(1, n + 1)] + [idx["T", l, 1] for l in range(1, k + 1)]
    inputs += [i for m in range(1, n + 1) for i in (idx["rail", m, 0, 0], idx["rail", m, 1, 1])]
    outputs = [i for m in range(1, n + 1) for i in (idx["rail", m, 0, 0], idx["rail", m, 1, 1])]
    detectors = [i for i in range(len(origins)) if i not in set(outputs)]
    return OpticalCircuit(n, k, alpha, beta, backend, modes, layers, inputs, detectors, outputs)


compile = compile_circuit  # noqa: A001


def wire_permutation(n: int, k: int, idx: dict | None = None, backend: str = EXACT) -> CircuitElement:
    """Step-4 permutation as a circuit element over mode ids."""
    validate_nk(n, k)
    if idx is None:
        idx = {o: i for i, o in enumerate(mode_origins(n, k))}
    omap = wire_permutation_map(n, k)
    mapping = {idx[a]: idx[b] for a, b in omap.items()}
    modes = tuple(sorted(mapping))
    return CircuitElement(PERMUTATION, modes, permutation_matrix(modes, mapping, backend), 4, "wires")


# -- evaluation --------------------------------------------------------------

def _zero_like(c):
    return Surd() if isinstance(c, Surd) else 0j


def circuit_unitary(c: OpticalCircuit, upto_step: int | None = None) -> np.ndarray:
    """Total mode-transfer matrix (column = input mode).

    Exact circuits give an object array of Surds; float ones a complex array.
    """
    M = c.num_modes
    exact = c.backend == EXACT
    if exact:
        U = np.empty((M, M), dtype=object)
        for i in range(M):
            for j in range(M):
                U[i, j] = Surd.coerce(int(i == j))
    else:
        U = np.eye(M, dtype=complex)
    for e in c.layers:
        if upto_step is not None and e.step > upto_step:
            break
        rows = list(e.modes)
        if max(rows) >= M:
            raise ValueError(f"element {e.label} touches mode {max(rows)} outside 0..{M - 1}")
        E = np.array(e.matrix, dtype=object if exact else complex)
        U[rows, :] = E.dot(U[rows, :])
    return U


def is_unitary(U: np.ndarray, tol: float = 1e-12) -> bool:
    if U.dtype == object:
        Ud = np.vectorize(lambda z: z.conjugate(), otypes=[object])(U.T)
        P = U.dot(Ud)
        M = U.shape[0]
        return all(P[i, j] == int(i == j) for i in range(M) for j in range(M))
    return bool(np.max(np.abs(U @ U.conj().T - np.eye(U.shape[0]))) < tol)


def column_polynomial(U: np.ndarray, mode: int) -> FockPolynomial:
    """Image of a^dag_mode under the transfer matrix ``U``."""
    col = U[:, mode]
    return FockPolynomial.linear((p, col[p]) for p in range(len(col)) if not scalars.is_zero(col[p]))


def apply_element(state: FockPolynomial, e: CircuitElement, circuit: OpticalCircuit | None = None,
                  *, budget: int | None = None) -> FockPolynomial:
    """Linear substitution of the element's modes; other modes pass through."""
    if circuit is not None:
        for m in state.modes():
            if not (isinstance(m, int) and 0 <= m < circuit.num_modes):
                raise ValueError(f"mode {m!r} is not in the circuit")
    present = state.modes()
    mapping = {}
    for q, m in enumerate(e.modes):
        if m in present:
            mapping[m] = FockPolynomial.linear(e.column(q))
    if not mapping:
        return state
    return substitute(state, mapping, budget=budget)


def apply_step(state: FockPolynomial, c: OpticalCircuit, step: int, **kw) -> FockPolynomial:
    for e in c.step_elements(step):
        state = apply_element(state, e, c, **kw)
    return state


def output_to_rail(c: OpticalCircuit):
    """Relabel function sending output mode ids to dual-rail qubit labels."""
    def f(mode):
        q = c.output_qubit(mode)
        return rail_label(*q) if q is not None else mode
    return f


def element_counts(c: OpticalCircuit) -> dict:
    out: dict = {}
    for e in c.layers:
        key = (e.step, e.kind)
        out[key] = out.get(key, 0) + 1
    return out


def expected_mode_count(n: int, k: int) -> int:
    return 5 * n + 2 * n * k


def summary_lines(c: OpticalCircuit) -> list[str]:
    lines = [f"D_{c.n}^{c.k} circuit: {c.num_modes} modes, {c.photon_number()} photons, "
             f"{len(c.detectors)} detectors, {len(c.outputs)} outputs"]
    for step in range(1, 6):
        els = c.step_elements(step)
        kinds: dict = {}
        for e in els:
            kinds[e.kind] = kinds.get(e.kind, 0) + 1
        desc = ", ".join(f"{v}x {k}" for k, v in sorted(kinds.items())) or "input photons"
        lines.append(f"  step {step} ({STEP_NAMES[step]}): {desc}")
    return lines

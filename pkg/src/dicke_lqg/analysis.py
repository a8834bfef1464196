"""Scans over (n, k) and deterministic CSV/JSON rendering."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import scalars
from .graphs import dcc_count_formula
from .scalars import EXACT, FLOAT
from .simulation import (
    feedforward_factor,
    optimal_splitting,
    simulate_scheme,
    success_probability_closed_form,
)

SCAN_COLUMNS = ["n", "k", "alpha", "beta", "p_closed", "p_simulated", "log10_p",
                "accepted_patterns", "fidelity"]


@dataclass
class ScanSpec:
    ks: list = field(default_factory=lambda: [2, 3, 4])
    n_min: int = 2
    n_max: int = 10
    backend: str = FLOAT
    simulate_upto: int = 0      # simulate rows with n <= this (0: closed form only)
    include_k_equals_n: bool = True

    def __post_init__(self):
        scalars.check_backend(self.backend)
        if any(k < 1 for k in self.ks):
            raise ValueError("k values must be >= 1")

    def pairs(self) -> list[tuple[int, int]]:
        out = []
        for k in sorted(set(self.ks)):
            for n in range(max(self.n_min, k), self.n_max + 1):
                if n == k and not self.include_k_equals_n:
                    continue
                out.append((n, k))
        return out


def _exact_dft_ok(n: int, k: int) -> bool:
    return scalars.exact_dft_supported(n) and scalars.exact_dft_supported(k + 1)


def scan_rows(spec: ScanSpec) -> list[dict]:
    rows = []
    for n, k in spec.pairs():
        p = success_probability_closed_form(n, k)
        a, b = optimal_splitting(n, k, FLOAT)
        row = {"n": n, "k": k, "alpha": a.real, "beta": b.real, "p_closed": float(p),
               "p_closed_exact": p, "p_simulated": None, "log10_p": log10_fraction(p),
               "accepted_patterns": None, "fidelity": None,
               "feedforward_factor": feedforward_factor(n, k), "dcc_count": dcc_count_formula(n, k)}
        if k < n and n <= spec.simulate_upto:
            backend = spec.backend if (spec.backend == FLOAT or _exact_dft_ok(n, k)) else FLOAT
            rep = simulate_scheme(n, k, backend=backend)
            row["p_simulated"] = float(complex(rep.p_success_simulated).real)
            row["accepted_patterns"] = rep.accepted_pattern_count
            if rep.circuit_fidelity is not None:
                row["fidelity"] = float(complex(rep.circuit_fidelity).real)
        rows.append(row)
    return rows


def log10_fraction(p: Fraction) -> float:
    """log10 of a positive rational without float underflow."""
    return math.log10(p.numerator) - math.log10(p.denominator)


def monotone_diagnostics(rows: list[dict]) -> dict:
    """Per k: is P strictly decreasing in n, and the largest ratio P(n+1)/P(n)."""
    out = {}
    for k in sorted({r["k"] for r in rows}):
        ps = [r["p_closed_exact"] for r in sorted((r for r in rows if r["k"] == k), key=lambda r: r["n"])]
        ratios = [ps[i + 1] / ps[i] for i in range(len(ps) - 1)]
        out[str(k)] = {
            "strictly_decreasing": all(r < 1 for r in ratios),
            "max_ratio": fmt(float(max(ratios))) if ratios else None,
            "min_ratio": fmt(float(min(ratios))) if ratios else None,
        }
    return out


# -- formatting --------------------------------------------------------------

def fmt(x) -> float | None:
    """Round-trip a float through %.12e so output bytes are stable."""
    if x is None:
        return None
    return float("%.12e" % float(x))


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return "%.12e" % v
    return str(v)


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_csv_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, float):
        return fmt(v) if math.isfinite(v) else None
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, list | tuple):
        return [_jsonable(x) for x in v]
    if isinstance(v, complex):
        return fmt(v.real)
    return v


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def scan_document(spec: ScanSpec, rows: list[dict]) -> dict:
    return {
        "schema_version": 1,
        "spec": {"ks": sorted(set(spec.ks)), "n_min": spec.n_min, "n_max": spec.n_max,
                 "backend": spec.backend, "simulate_upto": spec.simulate_upto},
        "columns": SCAN_COLUMNS,
        "rows": [{c: r.get(c) for c in SCAN_COLUMNS + ["p_closed_exact", "feedforward_factor", "dcc_count"]}
                 for r in rows],
        "diagnostics": monotone_diagnostics(rows) if rows else {},
    }


__all__ = ["ScanSpec", "scan_rows", "monotone_diagnostics", "rows_to_csv", "dumps",
           "scan_document", "SCAN_COLUMNS", "log10_fraction", "fmt", "EXACT", "FLOAT"]

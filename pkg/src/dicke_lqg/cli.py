"""Command-line front end: ``dicke-lqg {graph,verify,compile,simulate,scan,report}``.

Exit codes: 0 ok, 2 invalid input, 3 term budget exceeded, 4 a consistency
check failed.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

from . import scalars
from .analysis import SCAN_COLUMNS, ScanSpec, dumps, fmt, rows_to_csv, scan_document, scan_rows
from .circuit import compile_circuit, summary_lines
from .fock import TermBudgetExceeded
from .graphs import (
    build_dicke_digraph,
    dcc_count_formula,
    digraph_to_bigraph,
    enumerate_dccs,
    enumerate_perfect_matchings,
    is_epm_bigraph,
    is_epm_digraph,
)
from .scalars import EXACT, FLOAT
from .sculpting import verify_graph_side
from .simulation import FLOAT_TOL, simulate_scheme

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_CONSISTENCY = 0, 2, 3, 4
SIM_TOL = 1e-9


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _svg_text(draw, *args) -> str:
    fd, path = tempfile.mkstemp(suffix=".svg")
    os.close(fd)
    try:
        draw(*args, path)
        return Path(path).read_text()
    finally:
        os.unlink(path)


def _backend_for(args, n: int, k: int) -> str:
    if args.backend != "auto":
        return args.backend
    ok = scalars.exact_dft_supported(n) and scalars.exact_dft_supported(k + 1)
    return EXACT if ok else FLOAT


def _amplitudes(args, backend):
    a = None if args.alpha is None else scalars.parse_amplitude(args.alpha, backend)
    b = None if args.beta is None else scalars.parse_amplitude(args.beta, backend)
    return a, b


# -- subcommands -------------------------------------------------------------

def graph_document(n: int, k: int, degenerate: bool = False) -> dict:
    g = build_dicke_digraph(n, k, degenerate=degenerate)
    covers = enumerate_dccs(g)
    doc = {
        "n": n, "k": k,
        "digraph": g.to_json(),
        "dcc_count": len(covers),
        "dcc_formula": dcc_count_formula(n, k) if 1 <= k <= n else None,
        "epm_digraph": is_epm_digraph(g),
        "system_self_loops_per_cover": sorted({len(c.system_self_loops()) for c in covers}),
    }
    try:
        b = digraph_to_bigraph(g)
    except ValueError as exc:
        doc["bigraph_error"] = str(exc)
    else:
        doc["bigraph"] = b.to_json()
        doc["matching_count"] = len(enumerate_perfect_matchings(b))
        doc["epm_bigraph"] = is_epm_bigraph(b)
    return doc


def cmd_graph(args) -> int:
    g = build_dicke_digraph(args.n, args.k, degenerate=args.degenerate)
    if args.plot:
        from .plotting import plot_digraph
        plot_digraph(g, args.plot, title=f"D_{args.n}^{args.k}")
    if args.format == "dot":
        text = digraph_to_bigraph(g).to_dot() if args.bigraph else g.to_dot()
    elif args.format == "svg":
        from .plotting import plot_digraph
        text = _svg_text(plot_digraph, g)
    else:
        text = dumps(graph_document(args.n, args.k, args.degenerate))
    _emit(text, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.n > args.max_n:
        raise ValueError(f"n={args.n} exceeds --max-n {args.max_n} for the symbolic check")
    res = verify_graph_side(args.n, args.k)
    doc = res.to_json()
    if args.format == "csv":
        _emit(rows_to_csv([doc], list(doc)), args.out)
    else:
        _emit(dumps(doc), args.out)
    print(f"D_{args.n}^{args.k}: graph fidelity {res.fidelity} -> {'PASS' if res.passed else 'FAIL'}",
          file=sys.stderr)
    return EXIT_OK if res.passed else EXIT_CONSISTENCY


def cmd_compile(args) -> int:
    backend = _backend_for(args, args.n, args.k)
    alpha, beta = _amplitudes(args, backend)
    c = compile_circuit(args.n, args.k, alpha, beta, backend=backend)
    if args.plot:
        from .plotting import plot_circuit
        plot_circuit(c, args.plot, title=f"D_{args.n}^{args.k} circuit")
    if args.format == "svg":
        from .plotting import plot_circuit
        text = _svg_text(plot_circuit, c)
    elif args.format == "text":
        text = "\n".join(summary_lines(c)) + "\n"
    else:
        text = dumps(c.to_json())
    _emit(text, args.out)
    return EXIT_OK


def _simulate(args, n, k):
    backend = _backend_for(args, n, k)
    alpha, beta = _amplitudes(args, backend)
    rep = simulate_scheme(n, k, alpha, beta, backend=backend, restriction=args.restriction,
                          budget=args.budget)
    return rep


def _consistency_problems(rep) -> list[str]:
    problems = []
    err = rep.expected_relative_error
    if rep.backend == EXACT:
        if rep.p_success_simulated != rep.p_success_expected:
            problems.append("simulated success probability differs from the closed form")
    elif err is None or err > SIM_TOL:
        problems.append(f"relative error {err} exceeds {SIM_TOL}")
    for o in rep.outcomes:
        if o.accepted and abs(complex(o.fidelity) - 1) > FLOAT_TOL:
            problems.append(f"accepted pattern {o.pattern} has fidelity {o.fidelity}")
    return problems


def cmd_simulate(args) -> int:
    rep = _simulate(args, args.n, args.k)
    doc = rep.to_json()
    if args.format == "csv":
        _emit(rep.patterns_csv(), args.out)
    else:
        _emit(dumps(doc), args.out)
    if args.patterns_csv:
        Path(args.patterns_csv).write_text(rep.patterns_csv())
    if not rep.count_matches_feedforward:
        print(f"note: {rep.accepted_pattern_count} accepted patterns, feed-forward factor "
              f"{rep.feedforward_factor}", file=sys.stderr)
    problems = _consistency_problems(rep)
    for p in problems:
        print(f"consistency: {p}", file=sys.stderr)
    return EXIT_CONSISTENCY if problems else EXIT_OK


def _scan_spec(args, ks) -> ScanSpec:
    backend = FLOAT if args.backend == "auto" else args.backend
    return ScanSpec(list(ks), args.n_min, args.n_max, backend, args.simulate_upto)


def cmd_scan(args) -> int:
    spec = _scan_spec(args, args.k)
    rows = scan_rows(spec)
    if args.format == "json":
        text = dumps(scan_document(spec, rows))
    else:
        text = rows_to_csv(rows, SCAN_COLUMNS)
    _emit(text, args.out)
    if args.plot:
        from .plotting import plot_success_scan
        plot_success_scan(rows, args.plot)
    bad = [r for r in rows if not 0 < r["p_closed"] <= 1]
    if args.simulate_upto:
        bad += [r for r in rows if r["p_simulated"] is not None
                and abs(r["p_simulated"] - r["p_closed"]) > SIM_TOL * r["p_closed"]]
    return EXIT_CONSISTENCY if bad else EXIT_OK


def cmd_report(args) -> int:
    """Write tables, JSON documents and figures for one (n, k) plus the scan."""
    from .plotting import plot_circuit, plot_digraph, plot_success_scan

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n, k = args.n, args.k
    tag = f"{n}_{k}"
    spec = _scan_spec(args, args.scan_k)
    rows = scan_rows(spec)
    files = {}
    files["scan.csv"] = rows_to_csv(rows, SCAN_COLUMNS)
    files["scan.json"] = dumps(scan_document(spec, rows))
    files[f"graph_{tag}.json"] = dumps(graph_document(n, k))
    ver = verify_graph_side(n, k) if n <= args.max_n else None
    if ver is not None:
        files[f"verify_{tag}.json"] = dumps(ver.to_json())
    rep = _simulate(args, n, k)
    files[f"simulate_{tag}.json"] = dumps(rep.to_json())
    files[f"patterns_{tag}.csv"] = rep.patterns_csv()
    c = compile_circuit(n, k, backend=rep.backend)
    files[f"circuit_{tag}.json"] = dumps(c.to_json())
    for name, text in files.items():
        (out / name).write_text(text)
    figs = [
        plot_success_scan(rows, str(out / "psuc_scan.png")),
        plot_digraph(build_dicke_digraph(n, k), str(out / f"digraph_{tag}.png"), title=f"D_{n}^{k}"),
        plot_circuit(c, str(out / f"circuit_{tag}.svg"), title=f"D_{n}^{k} circuit"),
    ]
    summary = [{"item": "graph_fidelity", "value": "" if ver is None else fmt(complex(ver.fidelity).real)},
               {"item": "dcc_count", "value": ver.dcc_count if ver else ""},
               {"item": "p_success_simulated", "value": fmt(complex(rep.p_success_simulated).real)},
               {"item": "p_success_closed_form", "value": fmt(float(rep.p_success_closed_form))},
               {"item": "accepted_patterns", "value": rep.accepted_pattern_count},
               {"item": "feedforward_factor", "value": rep.feedforward_factor}]
    sys.stdout.write(rows_to_csv(summary, ["item", "value"]))
    for f in sorted(list(files) + [Path(p).name for p in figs]):
        print(f"wrote {out / f}", file=sys.stderr)
    problems = _consistency_problems(rep)
    if ver is not None and not ver.passed:
        problems.append("graph-side verification failed")
    return EXIT_CONSISTENCY if problems else EXIT_OK


# -- parser ------------------------------------------------------------------

def _nk(p: argparse.ArgumentParser, n: int | None = None, k: int | None = None) -> None:
    p.add_argument("--n", type=int, required=n is None, default=n, help="number of qubits")
    p.add_argument("--k", type=int, required=k is None, default=k, help="Hamming weight")


def _splitting(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", help="S-splitter amplitude, e.g. 1/2 or sqrt(1/3) (default: optimum)")
    p.add_argument("--beta", help="S-splitter amplitude toward the system (default: optimum)")
    p.add_argument("--backend", choices=["auto", EXACT, FLOAT], default="auto")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dicke-lqg", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph", help="Dicke digraph, bigraph and cover counts")
    _nk(p)
    p.add_argument("--format", choices=["json", "dot", "svg"], default="json")
    p.add_argument("--bigraph", action="store_true", help="DOT of the bigraph instead of the digraph")
    p.add_argument("--degenerate", action="store_true", help="allow k = 0 or k = n")
    p.add_argument("--plot", help="also render the digraph to this image file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("verify", help="exact graph-side check of the final state")
    _nk(p)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--max-n", type=int, default=6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compile", help="linear-optical circuit")
    _nk(p)
    _splitting(p)
    p.add_argument("--format", choices=["json", "svg", "text"], default="json")
    p.add_argument("--plot", help="also render the circuit to this image file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("simulate", help="heralded simulation report")
    _nk(p)
    _splitting(p)
    p.add_argument("--restriction", choices=["groups", "outputs", "none"], default="groups")
    p.add_argument("--budget", type=int, default=None, help="maximum monomials held in an expansion")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--patterns-csv", help="write per-pattern rows to this file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    def scan_options(p, k_flag):
        p.add_argument(k_flag, type=int, nargs="+", default=[2, 3, 4], help="k values to scan")
        p.add_argument("--n-min", type=int, default=2)
        p.add_argument("--n-max", type=int, default=10)
        p.add_argument("--simulate-upto", type=int, default=0, help="simulate rows with n up to this")
        p.add_argument("--backend", choices=["auto", EXACT, FLOAT], default="auto")

    p = sub.add_parser("scan", help="success probability table over (n, k)")
    scan_options(p, "--k")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--plot", help="render the log-scale plot to this image file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("report", help="tables, JSON and figures for one (n, k) plus the scan")
    _nk(p, 4, 2)
    scan_options(p, "--scan-k")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--restriction", choices=["groups", "outputs", "none"], default="groups")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--max-n", type=int, default=6)
    p.set_defaults(func=cmd_report, alpha=None, beta=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TermBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

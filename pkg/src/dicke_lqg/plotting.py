"""Matplotlib figures: success-probability scan, Dicke digraph, circuit schematic."""

from __future__ import annotations

import math
from collections.abc import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .circuit import OpticalCircuit  # noqa: E402
from .graphs import EdgeColor, SculptingDigraph  # noqa: E402

EDGE_STYLE = {
    EdgeColor.SOLID_BLACK: dict(color="black", linestyle="-"),
    EdgeColor.DASHED_BLACK: dict(color="black", linestyle="--"),
    EdgeColor.RED: dict(color="tab:red", linestyle="-"),
    EdgeColor.BLUE: dict(color="tab:blue", linestyle="-"),
}

KIND_COLOR = {
    "Beamsplitter": "#9ecae1",
    "SymmetricMultiport": "#a1d99b",
    "AsymmetricMultiport": "#fdae6b",
    "Permutation": "#d9d9d9",
    "PhaseShift": "#bcbddc",
}

RC = {
    "font.size": 9,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "savefig.bbox": "tight",
    "svg.hashsalt": "dicke-lqg",  # stable SVG ids
}


def _save(fig, path: str) -> str:
    fig.savefig(path, metadata={"Date": None} if str(path).endswith((".svg", ".pdf")) else None)
    plt.close(fig)
    return str(path)


def plot_success_scan(rows: Sequence[dict], path: str, title: str | None = None) -> str:
    """log10 P_suc against n, one curve per k; simulated points overlaid."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.6, 3.2))
        ks = sorted({r["k"] for r in rows})
        markers = "osD^v<>"
        for i, k in enumerate(ks):
            rk = sorted((r for r in rows if r["k"] == k), key=lambda r: r["n"])
            ns = [r["n"] for r in rk]
            ax.plot(ns, [r["p_closed"] for r in rk], marker=markers[i % len(markers)], label=f"k = {k}")
            sim = [(r["n"], r["p_simulated"]) for r in rk if r.get("p_simulated") not in (None, "")]
            if sim:
                ax.plot(*zip(*sim), linestyle="none", marker="x", color="black", markersize=6)
        if any(r.get("p_simulated") not in (None, "") for r in rows):
            ax.plot([], [], linestyle="none", marker="x", color="black", label="simulated")
        ax.set_yscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel(r"$P_{\mathrm{suc}}$")
        if rows:
            ax.set_xticks(range(min(r["n"] for r in rows), max(r["n"] for r in rows) + 1))
        ax.grid(True, which="major", alpha=0.3)
        ax.legend(frameon=False)
        if title:
            ax.set_title(title)
        return _save(fig, path)


def _digraph_positions(g: SculptingDigraph) -> dict:
    """Systems on the left column, S ancillas in the middle, T ancillas on the right."""
    cols = {"sys": 0.0, "S": 1.0, "T": 2.0}
    groups: dict = {}
    for v in g.vertices:
        groups.setdefault(v[0], []).append(v)
    pos = {}
    for kind, vs in groups.items():
        x = cols.get(kind, 3.0)
        for i, v in enumerate(vs):
            pos[v] = (x, -(i - (len(vs) - 1) / 2))
    return pos


def plot_digraph(g: SculptingDigraph, path: str, title: str | None = None) -> str:
    pos = _digraph_positions(g)
    with plt.rc_context(RC):
        h = max(2.5, 0.55 * max(len([v for v in g.vertices if v[0] == c]) for c in ("sys", "S", "T")))
        fig, ax = plt.subplots(figsize=(4.2, h))
        for e in g.edges:
            x0, y0 = pos[e.source]
            x1, y1 = pos[e.target]
            style = EDGE_STYLE[e.color]
            if e.source == e.target:
                loop = plt.Circle((x0 - 0.18, y0), 0.13, fill=False, lw=1, **style)
                ax.add_patch(loop)
                continue
            bend = 0.15 if (e.source[0], e.target[0]) in (("S", "sys"), ("T", "S")) else -0.15
            ax.annotate("", xy=(x1, y1), xytext=(x0, y0),
                        arrowprops=dict(arrowstyle="-|>", lw=0.8, shrinkA=9, shrinkB=9,
                                        connectionstyle=f"arc3,rad={bend}", **style))
        for v, (x, y) in pos.items():
            face = "white" if v[0] == "sys" else "#eeeeee"
            ax.add_patch(plt.Circle((x, y), 0.12, facecolor=face, edgecolor="black", zorder=3))
            name = {"sys": f"{v[1]}", "S": f"S{v[1]}", "T": f"T{v[1]}"}.get(v[0], str(v))
            ax.text(x, y, name, ha="center", va="center", fontsize=7, zorder=4)
        for color in EdgeColor:
            ax.plot([], [], label=color.title, **EDGE_STYLE[color])
        ax.legend(frameon=False, loc="upper center", bbox_to_anchor=(0.5, 0.0), ncol=4, fontsize=7)
        ax.set_aspect("equal")
        ax.axis("off")
        xs = [p[0] for p in pos.values()]
        ys = [p[1] for p in pos.values()]
        ax.set_xlim(min(xs) - 0.5, max(xs) + 0.4)
        ax.set_ylim(min(ys) - 0.5, max(ys) + 0.5)
        if title:
            ax.set_title(title)
        return _save(fig, path)


def plot_circuit(c: OpticalCircuit, path: str, title: str | None = None) -> str:
    """Wire diagram: one horizontal line per mode, one box per element."""
    M = c.num_modes
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(7.5, max(3.0, 0.16 * M)))
        col = 0.0
        xs = []
        for step in range(2, 6):
            els = c.step_elements(step)
            lanes: list[list] = []
            for e in els:
                lo, hi = min(e.modes), max(e.modes)
                for lane in lanes:
                    if all(hi < a or lo > b for a, b in lane):
                        lane.append((lo, hi))
                        e_lane = lane
                        break
                else:
                    e_lane = [(lo, hi)]
                    lanes.append(e_lane)
                x = col + lanes.index(e_lane)
                if e.kind == "Permutation":
                    for m in e.modes:
                        dst = next(p for p in range(e.dim) if e.matrix[p][e.modes.index(m)] != 0)
                        ax.plot([x - 0.35, x + 0.35], [-m, -e.modes[dst]], color="gray", lw=0.6)
                else:
                    ax.add_patch(plt.Rectangle((x - 0.3, -hi - 0.35), 0.6, hi - lo + 0.7,
                                               facecolor=KIND_COLOR[e.kind], edgecolor="black", lw=0.5, zorder=3))
                    for m in e.modes:
                        ax.plot([x - 0.3, x + 0.3], [-m, -m], color="black", lw=0.4, zorder=4)
            width = max(1, len(lanes))
            xs.append((col - 0.5, col + width - 0.5, step))
            col += width + 0.5
        for m in range(M):
            ax.plot([-1.0, col], [-m, -m], color="black", lw=0.3, zorder=1)
            label = "-".join(str(x) for x in c.origin(m))
            ax.text(-1.1, -m, label, ha="right", va="center", fontsize=5)
            if m in c.inputs:
                ax.plot(-1.0, -m, marker="o", color="tab:orange", markersize=3)
            tag = "out" if m in c.outputs else "D"
            ax.text(col + 0.1, -m, tag, ha="left", va="center", fontsize=5,
                    color="tab:green" if tag == "out" else "black")
        for a, b, step in xs:
            ax.text((a + b) / 2, 1.0, f"step {step}", ha="center", fontsize=7)
        for kind, colr in KIND_COLOR.items():
            ax.add_patch(plt.Rectangle((0, 0), 0, 0, facecolor=colr, label=kind))
        ax.legend(frameon=False, loc="upper center", bbox_to_anchor=(0.5, 0.0), ncol=5, fontsize=6)
        ax.set_xlim(-4.0, col + 1.0)
        ax.set_ylim(-M, 1.8)
        ax.axis("off")
        if title:
            ax.set_title(title)
        return _save(fig, path)


def log10_safe(p: float) -> float:
    return math.log10(p) if p > 0 else float("-inf")


def scan_curves(rows: Sequence[dict]) -> dict:
    """k -> (n array, log10 P array), for callers that want raw arrays."""
    out = {}
    for k in sorted({r["k"] for r in rows}):
        rk = sorted((r for r in rows if r["k"] == k), key=lambda r: r["n"])
        out[k] = (np.array([r["n"] for r in rk]), np.array([log10_safe(r["p_closed"]) for r in rk]))
    return out

"""Figure and delimited-output rendering for CLI report directories.

Every report writes a CSV summary next to one or more PNG figures, all
deterministic for fixed inputs.  Layouts come from networkx's
Kamada-Kawai embedding, which needs no random seed.
"""

from __future__ import annotations

import csv
from fractions import Fraction
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import networkx as nx  # noqa: E402

from .dual_complex import CubeComplex
from .wallspace import HalfplanePair, Wallspace, Window


def _ensure_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_complex_summary(complex_: CubeComplex, directory) -> Path:
    out = _ensure_dir(directory) / "summary.csv"
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["quantity", "value"])
        writer.writerow(["walls", len(complex_.wall_ids)])
        writer.writerow(["vertices", len(complex_.vertices)])
        writer.writerow(["edges", len(complex_.edges)])
        for dim in sorted(complex_.cubes):
            if dim >= 2:
                writer.writerow([f"cubes_dim_{dim}", complex_.cube_count(dim)])
        writer.writerow(["hyperplanes", len(complex_.hyperplanes)])
        writer.writerow(["crossing_pairs", len(complex_.crossing_pairs)])
    return out


def skeleton_figure(complex_: CubeComplex, directory, name="skeleton.png") -> Path:
    graph = nx.Graph()
    for idx in range(len(complex_.vertices)):
        graph.add_node(idx)
    for a, b, i in complex_.edges:
        graph.add_edge(a, b, wall=complex_.wall_ids[i])
    if graph.number_of_nodes() == 1:
        pos = {0: (0.0, 0.0)}
    else:
        pos = nx.kamada_kawai_layout(graph)
    fig, ax = plt.subplots(figsize=(6, 6))
    nx.draw_networkx_edges(graph, pos, ax=ax, edge_color="#888888")
    nx.draw_networkx_nodes(graph, pos, ax=ax, node_size=60, node_color="#1f77b4")
    if len(complex_.vertices) <= 40:
        labels = {
            idx: complex_.mask_string(m) for idx, m in enumerate(complex_.vertices)
        }
        nx.draw_networkx_labels(graph, pos, labels=labels, ax=ax, font_size=6)
    ax.set_axis_off()
    ax.set_title(f"1-skeleton: {len(complex_.vertices)} vertices")
    out = _ensure_dir(directory) / name
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out


def crossing_graph_figure(complex_: CubeComplex, directory, name="crossing.png") -> Path:
    graph = nx.Graph()
    for hp in complex_.hyperplanes:
        graph.add_node(hp.position, label=hp.wall)
    for i, j in complex_.crossing_pairs:
        graph.add_edge(i, j)
    fig, ax = plt.subplots(figsize=(5, 5))
    if graph.number_of_nodes():
        pos = (
            nx.kamada_kawai_layout(graph)
            if graph.number_of_nodes() > 1
            else {next(iter(graph.nodes)): (0.0, 0.0)}
        )
        nx.draw_networkx_edges(graph, pos, ax=ax, edge_color="#aa3333")
        nx.draw_networkx_nodes(graph, pos, ax=ax, node_size=90, node_color="#ff7f0e")
        labels = {n: graph.nodes[n]["label"] for n in graph.nodes}
        nx.draw_networkx_labels(graph, pos, labels=labels, ax=ax, font_size=6)
    ax.set_axis_off()
    ax.set_title("hyperplane crossing graph")
    out = _ensure_dir(directory) / name
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out


def arrangement_figure(ws: Wallspace, window: Window, directory, name="arrangement.png") -> Path:
    fig, ax = plt.subplots(figsize=(6, 6))
    x0, x1 = float(window.x0), float(window.x1)
    y0, y1 = float(window.y0), float(window.y1)
    for wall in ws.walls:
        if not isinstance(wall.geometry, HalfplanePair):
            continue
        line = wall.geometry.line
        width = 1.0 + 0.8 * (wall.mult - 1)
        if line.b == 0:
            x = float(Fraction(line.c, line.a))
            ax.plot([x, x], [y0, y1], lw=width, color="#2c7fb8")
        else:
            xs = [x0, x1]
            ys = [float((line.c - line.a * Fraction(x)) / line.b) for x in (x0, x1)]
            ax.plot(xs, ys, lw=width, color="#2c7fb8")
    ax.set_xlim(x0, x1)
    ax.set_ylim(y0, y1)
    ax.set_aspect("equal")
    ax.set_title("wall arrangement in window")
    out = _ensure_dir(directory) / name
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out


def halfplane_figure(halfplane, directory, name="halfplane.png") -> Path:
    c = halfplane.complex
    coords = halfplane.coords
    fig, ax = plt.subplots(figsize=(6, 6))
    for a, b, _ in c.edges:
        (x1, y1) = coords[c.vertices[a]]
        (x2, y2) = coords[c.vertices[b]]
        ax.plot([x1, x2], [y1, y2], color="#999999", lw=1)
    boundary = set(halfplane.boundary)
    xs = [coords[m][0] for m in c.vertices]
    ys = [coords[m][1] for m in c.vertices]
    colors = ["#d62728" if m in boundary else "#1f77b4" for m in c.vertices]
    ax.scatter(xs, ys, c=colors, s=40, zorder=3)
    ax.set_aspect("equal")
    ax.set_xlabel("tail progress")
    ax.set_ylabel("lead progress")
    ax.set_title("half-plane window (boundary in red)")
    out = _ensure_dir(directory) / name
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out


def write_charge_table(report, directory) -> Path:
    out = _ensure_dir(directory) / "charges.csv"
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["block", "charge", "chargeless", "witness", "interpretation_sensitive"]
        )
        for v in report.blocks:
            witness = (
                " ".join(f"{w.edge}:{w.end}={w.n}" for w in v.witness)
                if v.witness
                else ""
            )
            writer.writerow(
                [
                    v.block,
                    str(v.charge) if v.charge is not None else "",
                    int(v.chargeless),
                    witness,
                    int(v.interpretation_sensitive),
                ]
            )
    return out


def charge_figure(report, directory, name="charges.png") -> Path:
    blocks = [v.block for v in report.blocks]
    charges = [float(v.charge) if v.charge is not None else 0.0 for v in report.blocks]
    colors = ["#2ca02c" if v.chargeless else "#d62728" for v in report.blocks]
    fig, ax = plt.subplots(figsize=(max(4, len(blocks)), 4))
    ax.bar(range(len(blocks)), charges, color=colors)
    ax.axhline(0, color="black", lw=0.8)
    ax.set_xticks(range(len(blocks)))
    ax.set_xticklabels(blocks, rotation=45, ha="right")
    ax.set_ylabel("charge (sum of b/a over glued ends)")
    ax.set_title("per-block charge")
    out = _ensure_dir(directory) / name
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out


def complex_report(complex_: CubeComplex, directory, ws: Wallspace | None = None):
    """Summary CSV plus skeleton and crossing figures, and the arrangement
    when planar geometry is available."""
    paths = [
        write_complex_summary(complex_, directory),
        skeleton_figure(complex_, directory),
        crossing_graph_figure(complex_, directory),
    ]
    window = complex_.meta.get("window")
    if ws is not None and window is None:
        window = _display_window(ws)
    if ws is not None and window is not None:
        paths.append(arrangement_figure(ws, window, directory))
    return paths


def _display_window(ws: Wallspace) -> Window | None:
    """Box comfortably containing every pairwise line intersection."""
    lines = [w.geometry.line for w in ws.walls if isinstance(w.geometry, HalfplanePair)]
    if not lines:
        return None
    bound = Fraction(1)
    for line in lines:
        scale = max(abs(line.a), abs(line.b))
        bound = max(bound, abs(line.c) / scale + 1)
    return Window(-bound, -bound, bound, bound)


def charge_report_files(report, directory):
    return [write_charge_table(report, directory), charge_figure(report, directory)]


def halfplane_report(halfplane, directory):
    return [
        write_complex_summary(halfplane.complex, directory),
        halfplane_figure(halfplane, directory),
        crossing_graph_figure(halfplane.complex, directory),
    ]

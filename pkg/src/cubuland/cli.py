"""Command line interface: one binary with gm, cube, flat, and halfplane
groups, plus deterministic instance generators.

Exit codes: 0 success (and: manifold chargeless), 1 negative verdict or
failed structural check, 2 invalid input, 3 budget exceeded.
"""

from __future__ import annotations

import functools
import json
import sys
from fractions import Fraction
from pathlib import Path

import click

from . import chargeless as charge_mod
from . import generate as gen_mod
from . import graph_manifold as gm_mod
from . import halfplane as hp_mod
from . import planar as planar_mod
from . import wallspace as ws_mod
from .dual_complex import DEFAULT_VERTEX_BUDGET, build_dual
from .errors import BudgetError, InputError, StructuralFailureError

SCHEMA = "cubuland/1"


def echo_json(data):
    click.echo(json.dumps(data, indent=2, sort_keys=True))


def load_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc


def translate_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except InputError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except BudgetError as exc:
            click.echo(f"budget exceeded: {exc}", err=True)
            sys.exit(3)
        except StructuralFailureError as exc:
            click.echo(f"structural check failed: {exc}", err=True)
            sys.exit(1)

    return wrapper


def parse_fraction_pair(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise InputError(f"expected 'x,y', got {text!r}")
    return (ws_mod.as_fraction(parts[0]), ws_mod.as_fraction(parts[1]))


def parse_window(text):
    parts = text.split(",")
    if len(parts) != 4:
        raise InputError(f"expected 'x0,y0,x1,y1', got {text!r}")
    return ws_mod.Window(*(ws_mod.as_fraction(p) for p in parts))


def auto_basepoint(ws):
    if ws.kind == ws_mod.KIND_BIPARTITION:
        return 0
    lines = [
        w.geometry.line
        for w in ws.walls
        if isinstance(w.geometry, ws_mod.HalfplanePair)
    ]
    bound = Fraction(1)
    for line in lines:
        bound = max(bound, abs(line.c) + 1)
    window = ws_mod.Window(-bound, -bound, bound, bound)
    return ws_mod.point_off_lines(lines, window)


def emit_complex(complex_, fmt, provenance):
    if fmt == "json":
        echo_json(complex_.to_json())
    elif fmt == "dot":
        click.echo(complex_.to_dot(), nl=False)
    else:
        for line in provenance:
            click.echo(f"# {line}")
        click.echo(f"vertices: {len(complex_.vertices)}")
        click.echo(f"edges: {len(complex_.edges)}")
        for dim in sorted(complex_.cubes):
            if dim >= 2:
                click.echo(f"cubes[{dim}]: {complex_.cube_count(dim)}")
        click.echo(f"hyperplanes: {len(complex_.hyperplanes)}")
        click.echo(f"crossing pairs: {len(complex_.crossing_pairs)}")


@click.group()
def main():
    """Dual cube complexes of wallspaces and charge checks for block graphs."""


# ---------------------------------------------------------------------------
# gm: graph manifolds and charges
# ---------------------------------------------------------------------------


@click.group()
def gm():
    """Charge checks for graphs of circle-bundle blocks."""


main.add_command(gm, name="gm")


@gm.command("charge")
@click.argument("manifold", type=click.Path())
@click.option("--json", "as_json", is_flag=True, help="Emit the report as JSON.")
@click.option("--report", "report_dir", type=click.Path(), default=None,
              help="Write charges.csv and figures into this directory.")
@translate_errors
def gm_charge(manifold, as_json, report_dir):
    """Decide whether every block's charge vanishes."""
    m = gm_mod.manifold_from_json(load_json(manifold))
    report = charge_mod.is_chargeless(m)
    if report_dir:
        from . import report as report_files

        report_files.charge_report_files(report, report_dir)
    if as_json:
        echo_json(charge_mod.report_to_json(report))
    else:
        click.echo("# charge: sum of b/a over each block's glued edge ends;")
        click.echo("# zero iff nonzero integer weights cancel the neighbour fibers in homology")
        for v in report.blocks:
            charge = v.charge if v.charge is not None else "-"
            flag = " (interpretation-sensitive)" if v.interpretation_sensitive else ""
            click.echo(
                f"block {v.block}: charge {charge}, chargeless: "
                f"{'yes' if v.chargeless else 'no'}{flag}"
            )
            if v.relative_chargeless is not None:
                click.echo(
                    f"  relative to free boundary: "
                    f"{'yes' if v.relative_chargeless else 'no'}"
                )
        click.echo(f"chargeless: {'yes' if report.chargeless else 'no'}")
    sys.exit(0 if report.chargeless else 1)


@gm.command("witness")
@click.argument("manifold", type=click.Path())
@click.option("--brute", "brute_n", type=int, default=None,
              help="Also search integer weights up to this bound per end.")
@click.option("--parallel", is_flag=True,
              help="Slice the brute-force grid across worker processes.")
@click.option("--json", "as_json", is_flag=True)
@translate_errors
def gm_witness(manifold, brute_n, parallel, as_json):
    """Emit integer witnesses per block, or the obstruction."""
    m = gm_mod.manifold_from_json(load_json(manifold))
    report = charge_mod.is_chargeless(m)
    if as_json:
        data = charge_mod.report_to_json(report)
        if brute_n:
            data["brute_force"] = {}
            for block in m.blocks:
                result = charge_mod.brute_force_witness(
                    m, block.id, brute_n, parallel=parallel
                )
                data["brute_force"][block.id] = (
                    [w.n for w in result.witness] if result.found else None
                )
        echo_json(data)
    else:
        click.echo("# witness: weights n per edge end with all n*a equal and the")
        click.echo("# fiber coefficients cancelling; scaled to the least common multiple")
        for v in report.blocks:
            if v.witness:
                parts = ", ".join(f"{w.edge}.end{w.end}: n={w.n}" for w in v.witness)
                click.echo(f"block {v.block}: {parts}")
            else:
                click.echo(f"block {v.block}: no witness ({v.obstruction})")
            if brute_n:
                result = charge_mod.brute_force_witness(
                    m, v.block, brute_n, parallel=parallel
                )
                if result.found:
                    ns = ", ".join(str(w.n) for w in result.witness)
                    click.echo(f"  brute force: ({ns})")
                else:
                    click.echo(f"  brute force: exhausted at {result.exhausted_at}")
    sys.exit(0 if report.chargeless else 1)


@gm.command("turbine")
@click.argument("manifold", type=click.Path())
@click.option("--json", "as_json", is_flag=True)
@translate_errors
def gm_turbine(manifold, as_json):
    """Manifest of doubled surfaces and vertical annuli for a witness."""
    m = gm_mod.manifold_from_json(load_json(manifold))
    report = charge_mod.is_chargeless(m)
    manifest = charge_mod.turbine_manifest(m, report)
    if as_json:
        echo_json(charge_mod.manifest_to_json(manifest))
    else:
        click.echo("# per block: two parallel surface copies, plus 2|n| vertical")
        click.echo("# annuli in the adjacent block for each glued end")
        for entry in manifest.blocks:
            click.echo(f"block {entry.block}: {entry.surface_copies} surface copies")
            for a in entry.annuli:
                click.echo(
                    f"  {a.edge}.end{a.end}: {a.copies} annuli in {a.adjacent_block}, "
                    f"slope {a.slope[0]}*c[{a.torus}] + {a.slope[1]}*h"
                )
        for b in manifest.boundary_annuli:
            click.echo(f"boundary torus {b.block}[{b.torus}]: 1 vertical annulus")
    sys.exit(0)


@gm.command("cover")
@click.argument("manifold", type=click.Path())
@click.argument("cover", type=click.Path())
@click.option("--json", "as_json", is_flag=True)
@translate_errors
def gm_cover(manifold, cover, as_json):
    """Lift the manifold along a covering of its underlying graph."""
    m = gm_mod.manifold_from_json(load_json(manifold))
    c = gm_mod.cover_from_json(load_json(cover))
    result = gm_mod.induced_cover(m, c)
    if as_json:
        data = gm_mod.manifold_to_json(result.manifold)
        data["schema"] = SCHEMA
        data["components"] = [list(comp) for comp in result.components]
        echo_json(data)
    else:
        click.echo(
            f"lifted {len(result.manifold.blocks)} blocks, "
            f"{len(result.manifold.edges)} edges; "
            f"{len(result.components)} component(s)"
        )
        if not result.connected:
            for i, comp in enumerate(result.components):
                click.echo(f"  component {i}: {', '.join(comp)}")
    sys.exit(0)


@gm.command("retwist-check")
@click.argument("manifold", type=click.Path())
@click.argument("retwist", type=click.Path())
@translate_errors
def gm_retwist_check(manifold, retwist):
    """Check the verdict is unchanged under a zero-sum section change."""
    m = gm_mod.manifold_from_json(load_json(manifold))
    data = load_json(retwist)
    twists = data.get("blocks", data)
    ok = charge_mod.retwist_invariance_check(m, twists)
    click.echo("verdict invariant: yes" if ok else "verdict invariant: NO")
    sys.exit(0 if ok else 1)


# ---------------------------------------------------------------------------
# cube: dual complexes
# ---------------------------------------------------------------------------


@click.group()
def cube():
    """Dual cube complexes of finite wallspaces."""


main.add_command(cube, name="cube")


@cube.command("dual")
@click.argument("wallspace", type=click.Path())
@click.option("--basepoint", default=None, help="Point id or 'x,y' rationals.")
@click.option("--budget", type=int, default=DEFAULT_VERTEX_BUDGET)
@click.option("--format", "fmt", type=click.Choice(["text", "json", "dot"]), default="text")
@click.option("--graph", type=click.Choice(["skeleton", "crossing"]), default="skeleton",
              help="Which graph to emit with --format dot.")
@click.option("--report", "report_dir", type=click.Path(), default=None)
@translate_errors
def cube_dual(wallspace, basepoint, budget, fmt, graph, report_dir):
    """Build the dual cube complex of a finite wallspace."""
    ws = ws_mod.wallspace_from_json(load_json(wallspace))
    if basepoint is None:
        base = auto_basepoint(ws)
    elif ws.kind == ws_mod.KIND_BIPARTITION:
        base = int(basepoint)
    else:
        base = parse_fraction_pair(basepoint)
    complex_ = build_dual(ws, base, budget)
    if report_dir:
        from . import report as report_files

        report_files.complex_report(complex_, report_dir, ws)
    if fmt == "dot" and graph == "crossing":
        click.echo(complex_.to_dot("crossing"), nl=False)
        sys.exit(0)
    emit_complex(
        complex_,
        fmt,
        [
            "dual cube complex: vertices are pairwise-consistent closed-side",
            "choices, grown by single-wall flips from the basepoint orientation",
        ],
    )
    sys.exit(0)


@cube.command("decompose")
@click.argument("wallspace", type=click.Path())
@click.option("--basepoint", default=None)
@click.option("--json", "as_json", is_flag=True)
@translate_errors
def cube_decompose(wallspace, basepoint, as_json):
    """Split the dual complex along non-crossing hyperplane components."""
    ws = ws_mod.wallspace_from_json(load_json(wallspace))
    base = auto_basepoint(ws) if basepoint is None else (
        int(basepoint) if ws.kind == ws_mod.KIND_BIPARTITION else parse_fraction_pair(basepoint)
    )
    complex_ = build_dual(ws, base)
    dec = complex_.decompose_product()
    if as_json:
        echo_json(
            {
                "schema": SCHEMA,
                "kind": "product-decomposition",
                "is_product": dec.is_product,
                "factors": [len(f.vertices) for f in dec.factors],
            }
        )
    else:
        kind = "product" if dec.is_product else "not a product"
        click.echo(f"{kind}: {len(dec.factors)} factor(s)")
        for i, f in enumerate(dec.factors):
            click.echo(f"  factor {i}: {len(f.vertices)} vertices, walls {list(f.wall_ids)}")
    sys.exit(0)


# ---------------------------------------------------------------------------
# flat: periodic arrangements
# ---------------------------------------------------------------------------


@click.group()
def flat():
    """Parallel families and combinatorial flats of periodic arrangements."""


main.add_command(flat, name="flat")


@flat.command("families")
@click.argument("arrangement", type=click.Path())
@click.option("--json", "as_json", is_flag=True)
@translate_errors
def flat_families(arrangement, as_json):
    """Group the listed lines into parallel families."""
    arr = planar_mod.arrangement_from_json(load_json(arrangement))
    report = planar_mod.parallel_families(arr)
    if as_json:
        echo_json(
            {
                "schema": SCHEMA,
                "kind": "parallel-families",
                "n": report.n,
                "families": [
                    {
                        "direction": list(f.direction),
                        "lines": len(f.lines),
                        "step": f.step,
                    }
                    for f in report.families
                ],
            }
        )
    else:
        click.echo(f"parallel families: {report.n}")
        for f in report.families:
            mults = [pl.mult for pl in f.lines]
            click.echo(
                f"  direction {f.direction}: {len(f.lines)} line(s) per period, "
                f"multiplicities {mults}, translation step {f.step}"
            )
    sys.exit(0)


@flat.command("build")
@click.argument("arrangement", type=click.Path())
@click.option("--window", required=True, help="x0,y0,x1,y1 rationals.")
@click.option("--wall-budget", type=int, default=ws_mod.DEFAULT_WALL_BUDGET)
@click.option("--format", "fmt", type=click.Choice(["text", "json", "dot"]), default="text")
@click.option("--report", "report_dir", type=click.Path(), default=None)
@translate_errors
def flat_build(arrangement, window, wall_budget, fmt, report_dir):
    """Build and certify the dual flat of a window of the arrangement."""
    arr = planar_mod.arrangement_from_json(load_json(arrangement))
    win = parse_window(window)
    complex_ = planar_mod.dual_flat(arr, win, wall_budget)
    if report_dir:
        from . import report as report_files

        _, ws = planar_mod.window_wallspace(arr, complex_.meta["window"], wall_budget)
        report_files.complex_report(complex_, report_dir, ws)
    flat_cert = complex_.meta["flat"]
    emit_complex(
        complex_,
        fmt,
        [
            "windowed dual of a periodic arrangement, certified as a product of",
            f"per-family chains of cubes; families: {flat_cert.n}, "
            f"dims {[f.cube_dims for f in flat_cert.factors]}",
        ],
    )
    sys.exit(0)


@flat.command("classify")
@click.argument("arrangement", type=click.Path())
@click.option("--window", default=None)
@translate_errors
def flat_classify(arrangement, window):
    """Flat case (3+ families) versus the two-family case."""
    arr = planar_mod.arrangement_from_json(load_json(arrangement))
    win = parse_window(window) if window else None
    result = planar_mod.classify_families(arr, win)
    if result.kind == "flat":
        click.echo(f"FlatCase n={result.n}")
        click.echo(
            f"certified flat window: {len(result.flat.vertices)} vertices"
        )
    else:
        click.echo("TwoFamilies")
    sys.exit(0)


@flat.command("pinned")
@click.argument("arrangement", type=click.Path())
@click.option("--window", required=True)
@click.option("--relax", is_flag=True, help="Let the extra walls flip.")
@click.option("--format", "fmt", type=click.Choice(["text", "json", "dot"]), default="text")
@translate_errors
def flat_pinned(arrangement, window, relax, fmt):
    """Dual with the extra walls pinned to their designated sides."""
    arr = planar_mod.arrangement_from_json(load_json(arrangement))
    complex_ = planar_mod.build_pinned_dual(arr, parse_window(window), relax=relax)
    emit_complex(
        complex_,
        fmt,
        [
            "dual with ambient walls pinned to designated sides; certified to",
            "match the flat of the essential lines after forgetting them",
        ],
    )
    sys.exit(0)


# ---------------------------------------------------------------------------
# halfplane: geodesic crossing patterns
# ---------------------------------------------------------------------------


@click.group()
def halfplane():
    """Crossing patterns along a geodesic and half-plane windows."""


main.add_command(halfplane, name="halfplane")


@halfplane.command("validate")
@click.argument("pattern", type=click.Path())
@click.option("--window", type=int, default=None)
@translate_errors
def halfplane_validate(pattern, window):
    """Betweenness consistency of a pattern on a window."""
    p = hp_mod.pattern_from_json(load_json(pattern))
    window = window or p.validation_window
    check = hp_mod.validate_pattern(p, window)
    if check.ok:
        click.echo(f"ok (window {window})")
        sys.exit(0)
    click.echo(f"violation: {check.violation}")
    sys.exit(1)


@halfplane.command("classify")
@click.argument("pattern", type=click.Path())
@translate_errors
def halfplane_classify(pattern):
    """Unbounded crossing pair (Case1) or bounded crossings (Case2)."""
    p = hp_mod.pattern_from_json(load_json(pattern))
    cls = hp_mod.classify(p)
    if cls.case == 1:
        click.echo(f"Case1 witness=({cls.witness[0]},{cls.witness[1]})")
    else:
        click.echo(f"Case2 R={cls.r}")
    sys.exit(0)


@halfplane.command("build")
@click.argument("pattern", type=click.Path())
@click.option("--window", type=int, required=True)
@click.option("--format", "fmt", type=click.Choice(["text", "json", "dot"]), default="text")
@click.option("--report", "report_dir", type=click.Path(), default=None)
@translate_errors
def halfplane_build(pattern, window, fmt, report_dir):
    """Build the half-plane window spanned by geodesic vertex pairs."""
    p = hp_mod.pattern_from_json(load_json(pattern))
    hp = hp_mod.build_halfplane(p, window)
    if report_dir:
        from . import report as report_files

        report_files.halfplane_report(hp, report_dir)
    emit_complex(
        hp.complex,
        fmt,
        [
            "half-plane spanned by geodesic vertex pairs (x, x'); tail walls",
            "take the trailing side, lead walls the leading one",
            f"boundary length {len(hp.boundary)}",
        ],
    )
    sys.exit(0)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


@main.group()
def generate():
    """Seed-deterministic random instances."""


@generate.command("manifold")
@click.option("--seed", type=int, required=True)
@click.option("--blocks", type=int, default=2)
@click.option("--extra-edges", type=int, default=0)
@click.option("--max-entry", type=int, default=None)
@click.option("--free-tori", type=int, default=0)
@translate_errors
def generate_manifold(seed, blocks, extra_edges, max_entry, free_tori):
    m = gen_mod.manifold(seed, blocks, extra_edges, max_entry, free_tori)
    echo_json(gm_mod.manifold_to_json(m))


@generate.command("wallspace")
@click.option("--seed", type=int, required=True)
@click.option("--points", type=int, default=5)
@click.option("--walls", type=int, default=8)
@translate_errors
def generate_wallspace(seed, points, walls):
    ws = gen_mod.bipartition_wallspace(seed, points, walls)
    echo_json(ws_mod.wallspace_to_json(ws))


@generate.command("pattern")
@click.option("--seed", type=int, required=True)
@click.option("--period", type=int, default=2)
@click.option("--bounded/--unbounded", "bounded", default=None)
@translate_errors
def generate_pattern(seed, period, bounded):
    p = gen_mod.pattern(seed, period, bounded)
    echo_json(hp_mod.pattern_to_json(p))


if __name__ == "__main__":  # pragma: no cover
    main()

"""Periodic line arrangements, parallel families, and combinatorial flats.

A periodic arrangement lists lines modulo a rank-two integer lattice.
Lines sharing a direction form one parallel family; with independent
lattice vectors every family has translates on both sides of each
member, so the family analysis demands periodic input.  The dual of a
window of such an arrangement is certified against its predicted
product-of-chains shape: a family whose lines all have multiplicity one
contributes a path factor (a grid direction), while coinciding lines at
one position contribute a cube of that dimension glued to its neighbours
at opposite vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .dual_complex import CubeComplex, build_dual
from .errors import (
    BelowMinimumError,
    InputError,
    StructuralFailureError,
)
from .wallspace import (
    HalfplanePair,
    KIND_PERIODIC,
    Line,
    Orientation,
    SpanningWall,
    Wall,
    Wallspace,
    Window,
    as_fraction,
    expand_window,
    geometry_sides_intersect,
    lattice_step,
    point_off_lines,
    DEFAULT_WALL_BUDGET,
)
from .dual_complex import DEFAULT_VERTEX_BUDGET


def _canonical_direction(dx: int, dy: int):
    if dx == 0 and dy == 0:
        raise InputError("line direction must be nonzero")
    g = math.gcd(dx, dy)
    dx, dy = dx // g, dy // g
    if dx < 0 or (dx == 0 and dy < 0):
        dx, dy = -dx, -dy
    return dx, dy


@dataclass(frozen=True)
class PeriodicLine:
    """A line listed modulo the lattice: direction, offset, multiplicity.

    ``offset`` is the value of the canonical primitive normal form on the
    line, so direction (1, 0) gives {y = offset} and direction (0, 1)
    gives {x = offset}.
    """

    direction: tuple
    offset: Fraction
    mult: int = 1

    def __post_init__(self):
        dx, dy = self.direction
        if (dx, dy) != _canonical_direction(dx, dy):
            raise InputError(
                f"direction {self.direction} must be primitive with canonical sign"
            )
        object.__setattr__(self, "offset", as_fraction(self.offset))
        if self.mult < 1:
            raise InputError("line multiplicity must be >= 1")

    @property
    def normal(self) -> tuple:
        dx, dy = self.direction
        return _canonical_direction(-dy, dx)

    @property
    def line(self) -> Line:
        return Line.canonical(*self.normal, self.offset)


@dataclass(frozen=True)
class ExtraWall:
    """A wall pinned to one designated side during the flat construction.

    Either geometric (a line that must not cut the working window, with
    the designated closed side containing the window) or spanning (an
    ambient wall containing the whole plane, so both sides are available
    and the designated one is just the frozen choice).
    """

    side: int
    line: Line | None = None
    spanning: bool = False
    id: str = ""

    def __post_init__(self):
        if self.side not in (0, 1):
            raise InputError("extra wall side must be 0 or 1")
        if self.spanning == (self.line is not None):
            raise InputError("extra wall needs exactly one of a line or spanning=True")


@dataclass(frozen=True)
class PeriodicArrangement:
    lattice: tuple
    lines: tuple
    extra_walls: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "extra_walls", tuple(self.extra_walls))
        (u0, u1), (v0, v1) = self.lattice
        if u0 * v1 - u1 * v0 == 0:
            raise InputError("lattice vectors must be linearly independent")
        seen = set()
        for pl in self.lines:
            key = (pl.direction, pl.line)
            if key in seen:
                raise InputError("duplicate line listed; use mult for coinciding lines")
            seen.add(key)
        for direction, group in self._grouped().items():
            normal = (-direction[1], direction[0])
            prim = _canonical_direction(*normal)
            step = lattice_step(prim, self.lattice)
            values = [_normal_value(pl.line, prim) for pl in group]
            for i in range(len(values)):
                for j in range(i + 1, len(values)):
                    if ((values[i] - values[j]) / step).denominator == 1:
                        raise InputError(
                            "two listed lines are lattice translates of each other"
                        )

    def _grouped(self) -> dict:
        groups: dict = {}
        for pl in self.lines:
            groups.setdefault(pl.direction, []).append(pl)
        return groups

    def wallspace(self) -> Wallspace:
        walls = tuple(
            Wall(f"L{i}", HalfplanePair(pl.line), pl.mult)
            for i, pl in enumerate(self.lines)
        )
        return Wallspace(KIND_PERIODIC, walls, lattice=self.lattice)


def _normal_value(line: Line, prim_normal) -> Fraction:
    # line.a, line.b is a positive multiple of the primitive normal.
    scale = line.a // prim_normal[0] if prim_normal[0] else line.b // prim_normal[1]
    return Fraction(line.c, scale)


@dataclass(frozen=True)
class ParallelFamily:
    direction: tuple
    lines: tuple
    step: int


@dataclass(frozen=True)
class ParallelFamilyReport:
    families: tuple

    @property
    def n(self) -> int:
        return len(self.families)

    @property
    def directions(self) -> tuple:
        return tuple(f.direction for f in self.families)


@dataclass(frozen=True)
class FlatFactor:
    direction: tuple
    cube_dims: tuple


@dataclass(frozen=True)
class CombinatorialFlat:
    """Shape certificate of a windowed flat: one chain of cubes per family."""

    n: int
    factors: tuple

    @property
    def standard(self) -> bool:
        return all(d == 1 for f in self.factors for d in f.cube_dims)


def parallel_families(arr: PeriodicArrangement) -> ParallelFamilyReport:
    """Partition the listed lines into parallel families by direction."""
    if not arr.lines:
        raise InputError("arrangement has no lines")
    families = []
    for direction, group in sorted(arr._grouped().items()):
        normal = _canonical_direction(-direction[1], direction[0])
        step = lattice_step(normal, arr.lattice)
        ordered = tuple(sorted(group, key=lambda pl: _normal_value(pl.line, normal)))
        families.append(ParallelFamily(direction, ordered, step))
    return ParallelFamilyReport(tuple(families))


def nudge_window(arr: PeriodicArrangement, window: Window) -> Window:
    """Expand the window slightly if a lattice translate hits a corner.

    The expansion is at most half the smallest gap between parallel line
    values, applied with a different ratio per side so that no corner can
    slide along a line it sits on; the per-attempt ratio varies, and each
    line-corner pair rules out at most a few ratios, so the walk over
    candidates terminates.
    """
    report = parallel_families(arr)
    min_gap = None
    for fam in report.families:
        normal = _canonical_direction(-fam.direction[1], fam.direction[0])
        values = sorted(_normal_value(pl.line, normal) % fam.step for pl in fam.lines)
        if len(values) == 1:
            gaps = [Fraction(fam.step)]
        else:
            gaps = [values[i] - values[i - 1] for i in range(1, len(values))]
            gaps.append(values[0] + fam.step - values[-1])
        gap = min((g for g in gaps if g > 0), default=Fraction(fam.step))
        min_gap = gap if min_gap is None else min(min_gap, gap)
    delta = Fraction(min_gap, 2)
    if not _corner_on_translate(arr, window):
        return window
    attempts = 16 * (len(arr.lines) + 1) * 4
    for t in range(attempts):
        r = Fraction(1, t + 2)
        candidate = Window(
            window.x0 - delta,
            window.y0 - delta * r,
            window.x1 + delta * r * r,
            window.y1 + delta * r * r * r,
        )
        if not _corner_on_translate(arr, candidate):
            return candidate
    raise InputError("could not nudge the window off the arrangement lines")


def _corner_on_translate(arr: PeriodicArrangement, window: Window) -> bool:
    for fam in parallel_families(arr).families:
        normal = _canonical_direction(-fam.direction[1], fam.direction[0])
        for pl in fam.lines:
            base = _normal_value(pl.line, normal)
            for (x, y) in window.corners:
                value = normal[0] * x + normal[1] * y
                if ((value - base) / fam.step).denominator == 1:
                    return True
    return False


def window_wallspace(
    arr: PeriodicArrangement, window: Window, budget: int = DEFAULT_WALL_BUDGET
):
    """Nudged window plus the finite wallspace of translates inside it."""
    window = nudge_window(arr, window)
    ws = expand_window(arr.wallspace(), window, budget)
    return window, ws


def dual_flat(
    arr: PeriodicArrangement,
    window: Window,
    wall_budget: int = DEFAULT_WALL_BUDGET,
    vertex_budget: int = DEFAULT_VERTEX_BUDGET,
) -> CubeComplex:
    """Dual complex of a window of the arrangement, certified as a flat.

    The certificate (stored under ``meta["flat"]``) checks, per family,
    that the projected vertex set is exactly the chain-of-cubes pattern
    predicted by the multiplicities, and that the family factors multiply
    to the whole complex.
    """
    report = parallel_families(arr)
    window, ws = window_wallspace(arr, window, wall_budget)
    concrete = ws.concrete_walls()
    present_dirs = {_wall_direction(w) for w in concrete}
    for fam in report.families:
        if fam.direction not in present_dirs:
            raise InputError(
                f"window misses every line of the family with direction {fam.direction}"
            )
    basepoint = point_off_lines([w.geometry.line for w in concrete], window)
    complex_ = build_dual(ws, basepoint, vertex_budget)
    flat = certify_flat(complex_)
    complex_.meta["flat"] = flat
    complex_.meta["window"] = window
    return complex_


def _wall_direction(wall) -> tuple:
    line = wall.geometry.line
    return _canonical_direction(line.b, -line.a)


def certify_flat(complex_: CubeComplex) -> CombinatorialFlat:
    """Check a dual complex is the product of per-family chains of cubes."""
    groups: dict = {}
    for pos, uid in enumerate(complex_.wall_ids):
        geom = complex_.geometries.get(uid)
        if geom is None or not isinstance(geom, HalfplanePair):
            raise StructuralFailureError("flat certification needs line geometry")
        direction = _canonical_direction(geom.line.b, -geom.line.a)
        groups.setdefault(direction, []).append((geom.line.c, pos))

    factors = []
    expected_total = 1
    for direction in sorted(groups):
        entries = sorted(groups[direction])
        offsets = []
        for c, pos in entries:
            if offsets and offsets[-1][0] == c:
                offsets[-1][1].append(pos)
            else:
                offsets.append((c, [pos]))
        dims = tuple(len(positions) for _, positions in offsets)

        expected = _chain_masks([positions for _, positions in offsets])
        projected = set()
        fam_positions = [pos for _, positions in offsets for pos in positions]
        for m in complex_.vertices:
            pm = 0
            for k, pos in enumerate(fam_positions):
                if m >> pos & 1:
                    pm |= 1 << k
            projected.add(pm)
        if projected != expected:
            raise StructuralFailureError(
                f"family {direction} does not realize the predicted chain of cubes"
            )
        expected_total *= len(expected)
        factors.append(FlatFactor(direction, dims))

    if expected_total != len(complex_.vertices):
        raise StructuralFailureError(
            "family factors do not multiply to the full vertex count"
        )
    return CombinatorialFlat(len(factors), tuple(factors))


def _chain_masks(position_groups) -> set:
    """Expected orientations of one parallel family, in local bit order.

    Local bits follow the flattened position list, groups sorted by line
    value.  Side 1 of a wall is the upper halfplane of its value, so a
    consistent orientation sets side 1 on a lower segment of values, with
    free choices only inside the one group sitting at the boundary.
    """
    r = len(position_groups)
    sizes = [len(g) for g in position_groups]
    offsets = [sum(sizes[:i]) for i in range(r)]
    masks = set()
    for cut in range(r + 1):
        below = 0
        for gi in range(cut):
            for b in range(sizes[gi]):
                below |= 1 << (offsets[gi] + b)
        if cut == r:
            masks.add(below)
            continue
        for sub in range(1 << sizes[cut]):
            m = below
            for b in range(sizes[cut]):
                if sub >> b & 1:
                    m |= 1 << (offsets[cut] + b)
            masks.add(m)
    return masks


def build_pinned_dual(
    arr: PeriodicArrangement,
    window: Window,
    relax: bool = False,
    wall_budget: int = DEFAULT_WALL_BUDGET,
    vertex_budget: int = DEFAULT_VERTEX_BUDGET,
) -> CubeComplex:
    """Dual of the window with the extra walls pinned to designated sides.

    Geometric extra walls must hold the whole window in the designated
    closed side (a line cutting the window would be essential there and is
    rejected); spanning extra walls never constrain the plane.  With
    ``relax=False`` the pinned walls are frozen and the result is
    certified isomorphic, via forgetting the pinned coordinates, to the
    plain ``dual_flat`` of the lines.  With ``relax=True`` the pinned
    walls may flip; when all of them are spanning this multiplies the flat
    by a cube of that dimension, which is certified by vertex count.
    """
    flat = dual_flat(arr, window, wall_budget, vertex_budget)
    window = flat.meta["window"]
    _, ws = window_wallspace(arr, window, wall_budget)
    line_walls = list(ws.walls)

    extra_wall_objs = []
    for i, extra in enumerate(arr.extra_walls):
        uid = extra.id or f"X{i}"
        if extra.spanning:
            extra_wall_objs.append(Wall(uid, SpanningWall(uid)))
            continue
        values = [extra.line.eval_at(x, y) for (x, y) in window.corners]
        inside = all(v <= 0 for v in values) if extra.side == 0 else all(v >= 0 for v in values)
        if not inside:
            raise InputError(
                f"extra wall {uid!r} does not hold the window in its designated side; "
                "a line cutting the window is essential there"
            )
        extra_wall_objs.append(Wall(uid, HalfplanePair(extra.line)))

    for i in range(len(extra_wall_objs)):
        gi = extra_wall_objs[i].geometry
        si = arr.extra_walls[i].side
        for j in range(i + 1, len(extra_wall_objs)):
            gj = extra_wall_objs[j].geometry
            sj = arr.extra_walls[j].side
            if not geometry_sides_intersect(gi, si, gj, sj):
                raise InputError(
                    f"designated sides of extra walls "
                    f"{extra_wall_objs[i].id!r} and {extra_wall_objs[j].id!r} are disjoint"
                )

    full = Wallspace(ws.kind, tuple(line_walls) + tuple(extra_wall_objs))
    concrete = full.concrete_walls()
    lines = [w.geometry.line for w in concrete if isinstance(w.geometry, HalfplanePair)]
    basepoint = point_off_lines(lines, window)

    walls_order = []
    sides = []
    for w in concrete:
        if isinstance(w.geometry, SpanningWall):
            idx = [x.id for x in extra_wall_objs].index(w.uid)
            walls_order.append(w.uid)
            sides.append(arr.extra_walls[idx].side)
        else:
            value = w.geometry.line.eval_at(*basepoint)
            if value == 0:
                raise InputError("basepoint landed on a wall")  # pragma: no cover
            walls_order.append(w.uid)
            sides.append(1 if value > 0 else 0)
    start = Orientation(tuple(walls_order), tuple(sides))

    frozen = () if relax else tuple(w.id for w in extra_wall_objs)
    complex_ = build_dual(full, basepoint, vertex_budget, frozen=frozen, start=start)

    extra_ids = {w.id for w in extra_wall_objs}
    line_positions = [
        i for i, uid in enumerate(complex_.wall_ids) if uid not in extra_ids
    ]
    if not relax:
        projected = complex_.project(line_positions)
        if set(projected.vertices) != set(flat.vertices) or len(
            complex_.vertices
        ) != len(flat.vertices):
            raise StructuralFailureError(
                "pinned dual does not match the flat of the essential lines"
            )
    else:
        if all(e.spanning for e in arr.extra_walls):
            expected = len(flat.vertices) * (1 << len(arr.extra_walls))
            if len(complex_.vertices) != expected:
                raise StructuralFailureError(
                    "relaxed spanning walls did not multiply the flat by a cube"
                )
    complex_.meta["flat"] = flat.meta["flat"]
    complex_.meta["window"] = window
    complex_.meta["pinned"] = tuple(w.id for w in extra_wall_objs)
    return complex_


@dataclass(frozen=True)
class FamilyClassification:
    kind: str  # "flat" or "two-families"
    n: int
    flat: CubeComplex | None = None


def classify_families(
    arr: PeriodicArrangement,
    window: Window | None = None,
    wall_budget: int = DEFAULT_WALL_BUDGET,
    vertex_budget: int = DEFAULT_VERTEX_BUDGET,
) -> FamilyClassification:
    """Three or more families give a certified flat; two defer to the
    geodesic half-plane analysis; one is below the minimum the setting
    allows, since a plane-filling pattern always contains two transverse
    walls."""
    report = parallel_families(arr)
    if report.n == 1:
        raise BelowMinimumError(
            "one parallel family: a plane-filling wall pattern always has two "
            "transverse directions, so single-family input is rejected"
        )
    if report.n == 2:
        return FamilyClassification("two-families", 2)
    if window is None:
        window = default_window(arr)
    flat = dual_flat(arr, window, wall_budget, vertex_budget)
    return FamilyClassification("flat", report.n, flat)


def default_window(arr: PeriodicArrangement, periods: int = 1) -> Window:
    """Centered box wide enough that every family has a translate inside:
    each family's normal span over the box exceeds its translation step."""
    (u0, u1), (v0, v1) = arr.lattice
    extent = periods * max(abs(u0), abs(u1), abs(v0), abs(v1)) + Fraction(1, 2)
    return Window(-extent, -extent, extent, extent)


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def arrangement_to_json(arr: PeriodicArrangement) -> dict:
    data = {
        "kind": "periodic-planar",
        "lattice": [list(arr.lattice[0]), list(arr.lattice[1])],
        "lines": [
            {
                "id": f"L{i}",
                "direction": list(pl.direction),
                "offset": str(pl.offset),
                "mult": pl.mult,
            }
            for i, pl in enumerate(arr.lines)
        ],
    }
    if arr.extra_walls:
        data["extra_walls"] = [
            (
                {"spanning": True, "side": e.side, **({"id": e.id} if e.id else {})}
                if e.spanning
                else {
                    "line": {"A": str(e.line.a), "B": str(e.line.b), "C": str(e.line.c)},
                    "side": e.side,
                    **({"id": e.id} if e.id else {}),
                }
            )
            for e in arr.extra_walls
        ]
    return data


def arrangement_from_json(data: Mapping) -> PeriodicArrangement:
    raw_lattice = data.get("lattice")
    if raw_lattice is None:
        raise InputError("arrangement JSON needs a 'lattice'")
    lattice = (tuple(int(x) for x in raw_lattice[0]), tuple(int(x) for x in raw_lattice[1]))
    lines = []
    for entry in data.get("lines", ()):
        if "direction" in entry:
            direction = tuple(int(x) for x in entry["direction"])
            offset = as_fraction(entry["offset"])
        else:
            line = Line.canonical(entry["A"], entry["B"], entry["C"])
            direction = _canonical_direction(line.b, -line.a)
            offset = _normal_value(line, _canonical_direction(-direction[1], direction[0]))
        lines.append(PeriodicLine(direction, offset, entry.get("mult", 1)))
    extras = []
    for entry in data.get("extra_walls", ()):
        if entry.get("spanning"):
            extras.append(ExtraWall(entry["side"], spanning=True, id=entry.get("id", "")))
        else:
            ln = entry["line"]
            extras.append(
                ExtraWall(
                    entry["side"],
                    line=Line.canonical(ln["A"], ln["B"], ln["C"]),
                    id=entry.get("id", ""),
                )
            )
    return PeriodicArrangement(lattice, tuple(lines), tuple(extras))

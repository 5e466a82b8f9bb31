"""Walls, wallspaces, and exact side-intersection predicates.

All planar geometry is exact: lines are stored with a primitive integer
normal and a rational offset, and every predicate is decided over the
rationals.  A wall's two sides are the closed halfspaces of its line
(side 0 is where ``a*x + b*y <= c``), or the two point sets of a
bipartition.  Coinciding lines are modelled with a multiplicity so that
duplicate geometry is always explicit in the data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence, Union

from .errors import (
    BudgetError,
    DegenerateBasepointError,
    InputError,
    MixedKindError,
)

DEFAULT_WALL_BUDGET = 24

KIND_BIPARTITION = "finite-bipartition"
KIND_PLANAR = "finite-planar"
KIND_PERIODIC = "periodic-planar"


def as_fraction(value) -> Fraction:
    """Parse an int, Fraction, or decimal-integer string like ``"-3/2"``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational: {value!r}") from exc
    raise InputError(f"not a rational: {value!r}")


@dataclass(frozen=True, order=True)
class Line:
    """Rational line ``a*x + b*y = c`` in canonical form.

    The normal ``(a, b)`` is a primitive integer vector whose first
    nonzero entry is positive; ``c`` is an arbitrary rational.  Two Line
    values are equal exactly when they describe the same point set.
    """

    a: int
    b: int
    c: Fraction

    @classmethod
    def canonical(cls, a, b, c) -> "Line":
        fa, fb, fc = as_fraction(a), as_fraction(b), as_fraction(c)
        if fa == 0 and fb == 0:
            raise InputError("line normal (A, B) must be nonzero")
        den = math.lcm(fa.denominator, fb.denominator)
        ia, ib = int(fa * den), int(fb * den)
        fc = fc * den
        g = math.gcd(ia, ib)
        ia, ib, fc = ia // g, ib // g, fc / g
        if ia < 0 or (ia == 0 and ib < 0):
            ia, ib, fc = -ia, -ib, -fc
        return cls(ia, ib, fc)

    def eval_at(self, x: Fraction, y: Fraction) -> Fraction:
        return self.a * x + self.b * y - self.c

    def is_parallel_to(self, other: "Line") -> bool:
        return self.a * other.b - self.b * other.a == 0


@dataclass(frozen=True)
class Bipartition:
    """Two-sided partition of a finite point set."""

    side0: frozenset
    side1: frozenset


@dataclass(frozen=True)
class HalfplanePair:
    """Planar wall: the two closed halfplanes of a rational line."""

    line: Line


@dataclass(frozen=True)
class SpanningWall:
    """Abstract wall whose hyperplane swallows the whole working plane.

    Both closed sides meet every planar halfplane and every other side,
    so the wall never constrains a planar orientation.  Used to model
    ambient walls that contain the plane under study.
    """

    label: str = ""


Geometry = Union[Bipartition, HalfplanePair, SpanningWall]


@dataclass(frozen=True)
class Wall:
    """One wall of a wallspace; ``mult`` records coinciding copies."""

    id: str
    geometry: Geometry
    mult: int = 1

    def __post_init__(self):
        if self.mult < 1:
            raise InputError(f"wall {self.id!r}: multiplicity must be >= 1")


@dataclass(frozen=True)
class ConcreteWall:
    """A single expanded copy of a wall (multiplicity unfolded)."""

    uid: str
    geometry: Geometry


def geometry_sides_intersect(g1: Geometry, s1: int, g2: Geometry, s2: int) -> bool:
    if s1 not in (0, 1) or s2 not in (0, 1):
        raise InputError("sides must be 0 or 1")
    if isinstance(g1, SpanningWall) or isinstance(g2, SpanningWall):
        return True
    if isinstance(g1, Bipartition) and isinstance(g2, Bipartition):
        a = g1.side0 if s1 == 0 else g1.side1
        b = g2.side0 if s2 == 0 else g2.side1
        return bool(a & b)
    if isinstance(g1, HalfplanePair) and isinstance(g2, HalfplanePair):
        return _halfplanes_intersect(g1.line, s1, g2.line, s2)
    raise MixedKindError(
        f"cannot compare walls of kinds {type(g1).__name__} and {type(g2).__name__}"
    )


def _halfplanes_intersect(l1: Line, s1: int, l2: Line, s2: int) -> bool:
    # Closed halfplane {n.(x,y) >= k} with inward normal n.
    n1 = (l1.a, l1.b) if s1 == 1 else (-l1.a, -l1.b)
    k1 = l1.c if s1 == 1 else -l1.c
    n2 = (l2.a, l2.b) if s2 == 1 else (-l2.a, -l2.b)
    k2 = l2.c if s2 == 1 else -l2.c
    cross = n1[0] * n2[1] - n1[1] * n2[0]
    if cross != 0:
        # Transverse boundary lines: the closed quadrant is never empty.
        return True
    dot = n1[0] * n2[0] + n1[1] * n2[1]
    if dot > 0:
        return True
    # Antiparallel primitive normals, so n2 == -n1: the halfplanes are
    # {n1.x >= k1} and {n1.x <= -k2}; they meet iff the strip is nonempty.
    return k1 + k2 <= 0


def sides_intersect(w1: Wall | ConcreteWall, s1: int, w2: Wall | ConcreteWall, s2: int) -> bool:
    """True iff the chosen closed sides of the two walls share a point."""
    return geometry_sides_intersect(w1.geometry, s1, w2.geometry, s2)


def walls_cross(w1: Wall | ConcreteWall, w2: Wall | ConcreteWall) -> bool:
    """True iff all four side pairs of the two walls intersect."""
    return all(
        geometry_sides_intersect(w1.geometry, a, w2.geometry, b)
        for a in (0, 1)
        for b in (0, 1)
    )


@dataclass(frozen=True)
class Window:
    """Axis-aligned rational box used to cut a finite piece of the plane."""

    x0: Fraction
    y0: Fraction
    x1: Fraction
    y1: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x0", as_fraction(self.x0))
        object.__setattr__(self, "y0", as_fraction(self.y0))
        object.__setattr__(self, "x1", as_fraction(self.x1))
        object.__setattr__(self, "y1", as_fraction(self.y1))
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise InputError("window must satisfy x0 < x1 and y0 < y1")

    @property
    def corners(self):
        return (
            (self.x0, self.y0),
            (self.x0, self.y1),
            (self.x1, self.y0),
            (self.x1, self.y1),
        )


@dataclass(frozen=True)
class Wallspace:
    """A finite or periodic collection of walls.

    kinds:
      * ``finite-bipartition``: walls partition ``range(points)``.
      * ``finite-planar``: walls are halfplane pairs (spanning walls allowed).
      * ``periodic-planar``: walls are listed modulo the lattice action.
    """

    kind: str
    walls: tuple
    points: int | None = None
    lattice: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "walls", tuple(self.walls))
        if self.kind not in (KIND_BIPARTITION, KIND_PLANAR, KIND_PERIODIC):
            raise InputError(f"unknown wallspace kind {self.kind!r}")
        ids = [w.id for w in self.walls]
        if len(set(ids)) != len(ids):
            raise InputError("wall ids must be unique")
        if self.kind == KIND_BIPARTITION:
            self._validate_bipartition()
        else:
            self._validate_planar()

    def _validate_bipartition(self):
        if self.points is None or self.points < 1:
            raise InputError("finite-bipartition wallspace needs points >= 1")
        universe = frozenset(range(self.points))
        seen = set()
        for w in self.walls:
            g = w.geometry
            if not isinstance(g, Bipartition):
                raise InputError(f"wall {w.id!r}: expected a bipartition")
            if not g.side0 or not g.side1:
                raise InputError(f"wall {w.id!r}: both sides must be nonempty")
            if g.side0 & g.side1:
                raise InputError(f"wall {w.id!r}: sides overlap")
            if g.side0 | g.side1 != universe:
                raise InputError(f"wall {w.id!r}: sides must cover all points")
            key = frozenset((g.side0, g.side1))
            if key in seen:
                raise InputError(
                    f"wall {w.id!r}: duplicate geometry; record coinciding walls via mult"
                )
            seen.add(key)

    def _validate_planar(self):
        if self.kind == KIND_PERIODIC:
            if self.lattice is None:
                raise InputError("periodic-planar wallspace needs a lattice")
            (u0, u1), (v0, v1) = self.lattice
            if u0 * v1 - u1 * v0 == 0:
                raise InputError("lattice vectors must be linearly independent")
        seen = set()
        for w in self.walls:
            g = w.geometry
            if isinstance(g, SpanningWall):
                if self.kind == KIND_PERIODIC:
                    raise InputError("spanning walls are only allowed in finite wallspaces")
                continue
            if not isinstance(g, HalfplanePair):
                raise InputError(f"wall {w.id!r}: expected a halfplane pair")
            if g.line in seen:
                raise InputError(
                    f"wall {w.id!r}: duplicate line; record coinciding lines via mult"
                )
            seen.add(g.line)
        if self.kind == KIND_PERIODIC:
            self._validate_no_translate_duplicates()

    def _validate_no_translate_duplicates(self):
        groups: dict = {}
        for w in self.walls:
            line = w.geometry.line
            groups.setdefault((line.a, line.b), []).append(w)
        for (a, b), group in groups.items():
            step = lattice_step((a, b), self.lattice)
            for i in range(len(group)):
                for j in range(i + 1, len(group)):
                    diff = group[i].geometry.line.c - group[j].geometry.line.c
                    if (diff / step).denominator == 1:
                        raise InputError(
                            f"walls {group[i].id!r} and {group[j].id!r} are lattice "
                            "translates of each other; list one with the lattice"
                        )

    def concrete_walls(self) -> tuple:
        """Expand multiplicities into individually named wall copies."""
        out = []
        for w in self.walls:
            if w.mult == 1:
                out.append(ConcreteWall(w.id, w.geometry))
            else:
                for k in range(w.mult):
                    out.append(ConcreteWall(f"{w.id}#{k}", w.geometry))
        return tuple(out)


def lattice_step(normal: tuple, lattice) -> int:
    """Positive generator of the offsets by which the lattice moves a line.

    For a primitive normal n the lattice translates a line n.x = c to the
    lines n.x = c + k*step.  Independence of the lattice vectors makes the
    step nonzero for every nonzero normal.
    """
    (u0, u1), (v0, v1) = lattice
    su = normal[0] * u0 + normal[1] * u1
    sv = normal[0] * v0 + normal[1] * v1
    step = math.gcd(su, sv)
    if step == 0:
        from .errors import InvalidLatticeError

        raise InvalidLatticeError(
            f"lattice does not move the line with normal {normal}; "
            "lattice vectors are degenerate along this direction"
        )
    return step


@dataclass(frozen=True)
class Orientation:
    """A choice of one side per wall, in a fixed wall order."""

    walls: tuple
    sides: tuple

    def __post_init__(self):
        if len(self.walls) != len(self.sides):
            raise InputError("orientation must assign a side to every wall")

    def side_of(self, uid: str) -> int:
        try:
            return self.sides[self.walls.index(uid)]
        except ValueError:
            raise InputError(f"orientation has no wall {uid!r}") from None

    def as_dict(self) -> dict:
        return dict(zip(self.walls, self.sides))


def principal_orientation(ws: Wallspace, basepoint) -> Orientation:
    """Orientation choosing, for every wall, the side containing ``basepoint``.

    For planar wallspaces the basepoint is a rational pair and must avoid
    every line; for bipartition wallspaces it is a point id.  Spanning
    walls contain every point on both sides, so a side cannot be inferred
    for them and they are rejected here.
    """
    concrete = ws.concrete_walls()
    if ws.kind == KIND_BIPARTITION:
        if not isinstance(basepoint, int) or not (0 <= basepoint < ws.points):
            raise InputError(f"basepoint must be a point id in [0, {ws.points})")
        sides = tuple(0 if basepoint in w.geometry.side0 else 1 for w in concrete)
        return Orientation(tuple(w.uid for w in concrete), sides)
    if ws.kind == KIND_PERIODIC:
        raise InputError("expand a window of a periodic wallspace before orienting it")
    x, y = as_fraction(basepoint[0]), as_fraction(basepoint[1])
    sides = []
    for w in concrete:
        if isinstance(w.geometry, SpanningWall):
            raise InputError(
                f"wall {w.uid!r} spans the plane; its side must be designated explicitly"
            )
        value = w.geometry.line.eval_at(x, y)
        if value == 0:
            raise DegenerateBasepointError(
                f"basepoint ({x}, {y}) lies on wall {w.uid!r}"
            )
        sides.append(1 if value > 0 else 0)
    return Orientation(tuple(w.uid for w in concrete), tuple(sides))


def expand_window(
    ws: Wallspace, window: Window, budget: int = DEFAULT_WALL_BUDGET
) -> Wallspace:
    """All lattice translates of the listed lines that meet ``window``.

    Output is a finite-planar wallspace with multiplicities preserved and
    walls sorted lexicographically on the canonical line form.  Exceeds of
    the wall budget raise ``BudgetError`` carrying the offending count.
    """
    if ws.kind != KIND_PERIODIC:
        raise InputError("expand_window needs a periodic-planar wallspace")
    produced = []
    total = 0
    for w in ws.walls:
        line = w.geometry.line
        values = [line.a * x + line.b * y for (x, y) in window.corners]
        vmin, vmax = min(values), max(values)
        step = lattice_step((line.a, line.b), ws.lattice)
        k_lo = math.ceil(Fraction(vmin - line.c, step))
        k_hi = math.floor(Fraction(vmax - line.c, step))
        for k in range(k_lo, k_hi + 1):
            translate = Line(line.a, line.b, line.c + k * step)
            produced.append(Wall(f"{w.id}@{k}", HalfplanePair(translate), w.mult))
            total += w.mult
    if total > budget:
        raise BudgetError(
            f"window produces {total} walls, over the budget of {budget}",
            count=total,
            budget=budget,
        )
    produced.sort(key=lambda w: (w.geometry.line.a, w.geometry.line.b, w.geometry.line.c))
    return Wallspace(KIND_PLANAR, tuple(produced))


def point_off_lines(lines: Sequence[Line], window: Window) -> tuple:
    """Deterministic rational point inside ``window`` avoiding every line.

    Walks a parabola-shaped family of candidate points; each line can
    exclude at most two candidates, so the walk terminates quickly.
    """
    width = window.x1 - window.x0
    height = window.y1 - window.y0
    for j in range(2 * len(lines) + 3):
        t = Fraction(1, 2 * j + 3)
        p = (window.x0 + width * t, window.y0 + height * t * t)
        if all(line.eval_at(*p) != 0 for line in lines):
            return p
    raise InputError("could not find a basepoint off all lines")  # pragma: no cover


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def _fraction_str(value: Fraction) -> str:
    return str(value)


def wallspace_to_json(ws: Wallspace) -> dict:
    if ws.kind == KIND_BIPARTITION:
        return {
            "kind": ws.kind,
            "points": ws.points,
            "walls": [
                {
                    "id": w.id,
                    "side0": sorted(w.geometry.side0),
                    "side1": sorted(w.geometry.side1),
                    **({"mult": w.mult} if w.mult != 1 else {}),
                }
                for w in ws.walls
            ],
        }
    data = {
        "kind": ws.kind,
        "lines": [
            {
                "id": w.id,
                "A": str(w.geometry.line.a),
                "B": str(w.geometry.line.b),
                "C": _fraction_str(w.geometry.line.c),
                "mult": w.mult,
            }
            for w in ws.walls
        ],
    }
    if ws.kind == KIND_PERIODIC:
        data["lattice"] = [list(ws.lattice[0]), list(ws.lattice[1])]
    return data


def wallspace_from_json(data: Mapping) -> Wallspace:
    try:
        kind = data["kind"]
    except KeyError:
        raise InputError("wallspace JSON needs a 'kind' field") from None
    if kind == KIND_BIPARTITION:
        points = data.get("points")
        walls = []
        for i, entry in enumerate(data.get("walls", ())):
            walls.append(
                Wall(
                    entry.get("id", f"w{i}"),
                    Bipartition(frozenset(entry["side0"]), frozenset(entry["side1"])),
                    entry.get("mult", 1),
                )
            )
        return Wallspace(kind, tuple(walls), points=points)
    if kind in (KIND_PLANAR, KIND_PERIODIC):
        walls = []
        for i, entry in enumerate(data.get("lines", ())):
            line = Line.canonical(entry["A"], entry["B"], entry["C"])
            walls.append(Wall(entry.get("id", f"L{i}"), HalfplanePair(line), entry.get("mult", 1)))
        lattice = None
        if kind == KIND_PERIODIC:
            raw = data.get("lattice")
            if raw is None:
                raise InputError("periodic-planar wallspace JSON needs a 'lattice'")
            lattice = (tuple(int(x) for x in raw[0]), tuple(int(x) for x in raw[1]))
        return Wallspace(kind, tuple(walls), lattice=lattice)
    raise InputError(f"unknown wallspace kind {kind!r}")

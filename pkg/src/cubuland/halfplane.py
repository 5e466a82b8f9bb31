"""Periodic wall-crossing patterns along a combinatorial geodesic.

A pattern records, modulo a translation period m, which walls cross the
geodesic (one wall per unit position, so orbit base positions cover the
residues 0..m-1 exactly once) and which pairs of walls cross each other.
Crossing rules are restricted to Always, Never, or Within(R) on the
absolute position difference: these express exactly the dichotomy
between crossings at unbounded distance and uniformly bounded ones,
while keeping classification decidable by inspection.

When some cross-orbit rule is Always, the walls split into a tail family
(oriented from the trailing coordinate of a vertex pair) and a lead
family (oriented from the leading coordinate), and the pairs (x, x')
with x <= x' along the geodesic span a combinatorial half-plane bounded
by the geodesic.  When every rule is bounded, the convex hull of the
geodesic stays within bounded distance of it and grows by a fixed vertex
count per period.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .dual_complex import CompatTable, CubeComplex, from_orientations
from .errors import InputError, StructuralFailureError

ALWAYS = "always"
NEVER = "never"
WITHIN = "within"


@dataclass(frozen=True)
class CrossRule:
    kind: str
    r: int = 0

    def __post_init__(self):
        if self.kind not in (ALWAYS, NEVER, WITHIN):
            raise InputError(f"unknown crossing rule {self.kind!r}")
        if self.kind == WITHIN and self.r < 0:
            raise InputError("within-rule distance must be >= 0")

    def crosses(self, dist: int) -> bool:
        if self.kind == ALWAYS:
            return True
        if self.kind == NEVER:
            return False
        return dist <= self.r


RULE_ALWAYS = CrossRule(ALWAYS)
RULE_NEVER = CrossRule(NEVER)


def within(r: int) -> CrossRule:
    return CrossRule(WITHIN, r)


@dataclass(frozen=True)
class WallOrbit:
    id: str
    pos: int


class GeodesicWallPattern:
    """Crossing data of the wall orbits along a geodesic, modulo period m.

    ``rules`` maps unordered orbit-id pairs to a CrossRule; unlisted
    pairs default to Never.  Same-orbit rules must keep translates of one
    wall disjoint: Never, or Within(R) with R < m.
    """

    def __init__(self, period: int, orbits: Sequence[WallOrbit], rules: Mapping):
        if period < 1:
            raise InputError("period must be >= 1")
        self.period = period
        self.orbits = tuple(orbits)
        ids = [o.id for o in self.orbits]
        if len(set(ids)) != len(ids):
            raise InputError("orbit ids must be unique")
        positions = [o.pos for o in self.orbits]
        if any(not 0 <= p < period for p in positions):
            raise InputError("orbit base positions must lie in [0, period)")
        if sorted(positions) != list(range(period)):
            raise InputError(
                "orbit base positions must cover the residues 0..period-1 exactly "
                "once: a geodesic crosses one wall per edge"
            )
        normalized = {}
        for key, rule in rules.items():
            a, b = key
            if a not in ids or b not in ids:
                raise InputError(f"rule references unknown orbit in {key!r}")
            k = (a, b) if a <= b else (b, a)
            if k in normalized and normalized[k] != rule:
                raise InputError(f"conflicting rules for pair {k}")
            normalized[k] = rule
        self.rules = normalized
        for o in self.orbits:
            rule = self.rule(o.id, o.id)
            if rule.kind == ALWAYS or (rule.kind == WITHIN and rule.r >= period):
                raise InputError(
                    f"orbit {o.id!r}: same-orbit translates must never cross, so the "
                    "rule must be Never or Within(R) with R < period"
                )

    def rule(self, a: str, b: str) -> CrossRule:
        k = (a, b) if a <= b else (b, a)
        return self.rules.get(k, RULE_NEVER)

    def crosses(self, orbit_a: str, pos_a: int, orbit_b: str, pos_b: int) -> bool:
        if orbit_a == orbit_b and pos_a == pos_b:
            return False
        return self.rule(orbit_a, orbit_b).crosses(abs(pos_a - pos_b))

    @property
    def max_within(self) -> int:
        return max(
            (rule.r for rule in self.rules.values() if rule.kind == WITHIN),
            default=0,
        )

    @property
    def validation_window(self) -> int:
        return 4 * self.period * (self.max_within + 1)

    def orbit_at(self, pos: int) -> str:
        residue = pos % self.period
        for o in self.orbits:
            if o.pos == residue:
                return o.id
        raise AssertionError("positions cover all residues")  # pragma: no cover

    def concrete(self, window_len: int):
        """Walls of a window: (orbit id, position) for 0 <= position < window_len."""
        return tuple((self.orbit_at(q), q) for q in range(window_len))


@dataclass(frozen=True)
class PatternCheck:
    ok: bool
    violation: tuple | None = None


def validate_pattern(pattern: GeodesicWallPattern, window_len: int) -> PatternCheck:
    """Betweenness consistency on a window: whenever the outer walls of a
    position triple cross, the middle wall crosses one of them.

    Violations are results, not errors; the first one found is returned.
    """
    if window_len < pattern.validation_window:
        raise InputError(
            f"window_len must be at least 4*m*(maxR+1) = {pattern.validation_window}"
        )
    walls = pattern.concrete(window_len)
    n = len(walls)
    for i in range(n):
        oi, qi = walls[i]
        for k in range(i + 2, n):
            ok_, qk = walls[k]
            if not pattern.crosses(oi, qi, ok_, qk):
                continue
            for j in range(i + 1, k):
                oj, qj = walls[j]
                if not (
                    pattern.crosses(oj, qj, oi, qi)
                    or pattern.crosses(oj, qj, ok_, qk)
                ):
                    return PatternCheck(False, (walls[i], walls[j], walls[k]))
    return PatternCheck(True)


@dataclass(frozen=True)
class PatternClassification:
    case: int  # 1: crossings at unbounded distance, 2: bounded crossings
    witness: tuple | None = None
    r: int | None = None


def classify(pattern: GeodesicWallPattern) -> PatternClassification:
    """Case 1 with the first Always pair as witness, else Case 2 with the
    largest Within threshold (0 when nothing crosses)."""
    ids = [o.id for o in pattern.orbits]
    for i, a in enumerate(ids):
        for b in ids[i:]:
            if a == b:
                continue
            if pattern.rule(a, b).kind == ALWAYS:
                return PatternClassification(1, witness=(a, b))
    return PatternClassification(2, r=pattern.max_within)


@dataclass(frozen=True)
class WallSplit:
    """Tail walls orient from the trailing pair coordinate, lead walls
    from the leading one."""

    tail: tuple
    lead: tuple
    witness: tuple
    flagged: bool = False


def split_tail_lead(pattern: GeodesicWallPattern) -> WallSplit:
    """Partition orbits by whether they cross the backward translates of
    the witness orbit cofinally, then verify every tail wall crosses
    every lead wall ahead of it on the validation window.

    ``flagged`` marks the degenerate situation where the witness orbit
    itself lands on the lead side; with the rule language used here that
    cannot happen, but the check is kept for review of odd inputs.
    """
    cls = classify(pattern)
    if cls.case != 1:
        raise InputError("tail/lead split needs a pattern with an Always pair")
    a, b = cls.witness
    lead = tuple(o.id for o in pattern.orbits if pattern.rule(o.id, a).kind == ALWAYS)
    tail = tuple(o.id for o in pattern.orbits if o.id not in set(lead))
    flagged = a in lead

    window = pattern.validation_window
    walls = pattern.concrete(window)
    lead_set = set(lead)
    for i, (oi, qi) in enumerate(walls):
        if oi in lead_set:
            continue
        for oj, qj in walls[i + 1 :]:
            if oj not in lead_set:
                continue
            if not pattern.crosses(oi, qi, oj, qj):
                raise StructuralFailureError(
                    f"tail wall ({oi}, {qi}) does not cross the later lead wall "
                    f"({oj}, {qj}); the pattern violates the split's hypotheses"
                )
    return WallSplit(tail, lead, cls.witness, flagged)


@dataclass(frozen=True)
class HalfplaneComplex:
    """A windowed combinatorial half-plane with its boundary geodesic.

    ``complex`` is a square complex; ``boundary`` lists the orientations
    of the diagonal pairs (x, x) in geodesic order; ``coords`` maps each
    vertex mask to its (tail progress, lead progress) pair.
    """

    complex: CubeComplex
    boundary: tuple
    tail_walls: tuple
    lead_walls: tuple
    coords: dict


def build_halfplane(
    pattern: GeodesicWallPattern,
    window_len: int,
    embed_check_limit: int = 700,
) -> HalfplaneComplex:
    """Half-plane spanned by the vertex pairs (x, x') with x <= x'.

    Each pair orients a tail wall at position q to the side its trailing
    coordinate is on (crossed exactly when q < x) and a lead wall to the
    side of the leading coordinate.  Distinct orientations become the
    vertices; edges move one coordinate across one wall and squares move
    both at once.  The result is certified to be a square complex whose
    boundary is the diagonal, with V - E + F = 1, and whose 1-skeleton is
    isometrically embedded (all vertex pairs when the complex is small,
    else boundary-anchored samples).
    """
    # Betweenness is periodic data, so checking the invariant window covers
    # arbitrarily long build windows without a cubic rescan.
    check = validate_pattern(pattern, pattern.validation_window)
    if not check.ok:
        raise InputError(f"pattern fails betweenness at {check.violation}")
    split = split_tail_lead(pattern)
    walls = pattern.concrete(window_len)
    if not walls:
        raise InputError("window is empty")
    tail_set = {o for o in split.tail}
    has_tail = any(o in tail_set for o, _ in walls)
    has_lead = any(o not in tail_set for o, _ in walls)
    if not (has_tail and has_lead):
        raise InputError("window must contain a wall of both families")

    masks = []
    seen = set()
    coords = {}
    boundary = []
    for x in range(window_len + 1):
        for x2 in range(x, window_len + 1):
            mask = 0
            for k, (orbit, q) in enumerate(walls):
                coord = x if orbit in tail_set else x2
                if q < coord:
                    mask |= 1 << k
            if mask not in seen:
                seen.add(mask)
                masks.append(mask)
                tail_progress = sum(
                    1 for k, (o, q) in enumerate(walls) if o in tail_set and mask >> k & 1
                )
                lead_progress = sum(
                    1
                    for k, (o, q) in enumerate(walls)
                    if o not in tail_set and mask >> k & 1
                )
                coords[mask] = (tail_progress, lead_progress)
            if x == x2:
                boundary.append(mask)

    def pred(i, si, j, sj):
        oi, qi = walls[i]
        oj, qj = walls[j]
        if qi > qj:
            (oi, qi, si), (oj, qj, sj) = (oj, qj, sj), (oi, qi, si)
        if pattern.crosses(oi, qi, oj, qj):
            return True
        # Disjoint walls: the backward side of the earlier one misses the
        # forward side of the later one.
        return not (si == 0 and sj == 1)

    compat = CompatTable.from_predicate(len(walls), pred)
    wall_ids = [f"{orbit}@{q}" for orbit, q in walls]
    complex_ = from_orientations(wall_ids, masks, compat, validate=True)

    _certify_halfplane(complex_, boundary, window_len)
    _certify_embedding(complex_, embed_check_limit)
    return HalfplaneComplex(
        complex_,
        tuple(boundary),
        tuple(wall_ids[k] for k, (o, _) in enumerate(walls) if o in tail_set),
        tuple(wall_ids[k] for k, (o, _) in enumerate(walls) if o not in tail_set),
        coords,
    )


def _certify_halfplane(complex_: CubeComplex, boundary, window_len):
    if complex_.dimension > 2:
        raise StructuralFailureError("half-plane window is not a square complex")
    if len(boundary) != window_len + 1:
        raise StructuralFailureError("boundary does not visit one vertex per step")
    if len(set(boundary)) != len(boundary):
        raise StructuralFailureError("boundary revisits an orientation")
    for prev, cur in zip(boundary, boundary[1:]):
        if (prev ^ cur).bit_count() != 1:
            raise StructuralFailureError("boundary is not a combinatorial path")
    euler = len(complex_.vertices) - len(complex_.edges) + complex_.cube_count(2)
    if euler != 1:
        raise StructuralFailureError(
            f"window has V - E + F = {euler}, expected 1 for a disc"
        )


def _certify_embedding(complex_: CubeComplex, limit: int):
    n = len(complex_.vertices)
    adj = complex_.adjacency()
    if n <= limit:
        starts = range(n)
    else:
        starts = range(0, n, max(1, n // limit))
    for start in starts:
        dist = complex_.skeleton_distances_from(start, adj)
        base = complex_.vertices[start]
        for other in range(n):
            if dist[other] != (base ^ complex_.vertices[other]).bit_count():
                raise StructuralFailureError(
                    "half-plane 1-skeleton is not isometrically embedded"
                )


@dataclass(frozen=True)
class HalfplaneFactor:
    which: str  # "alpha" or "beta"
    halfplane: HalfplaneComplex
    line_len: int
    product: CubeComplex


@dataclass(frozen=True)
class CocompactHull:
    per_period_alpha: int
    per_period_beta: int
    vertices_per_period: int
    window_counts: tuple


def classify_two_patterns(
    alpha: GeodesicWallPattern,
    beta: GeodesicWallPattern,
    window_len: int | None = None,
):
    """Outcome for the two hull factors of a two-family plane.

    Any Case 1 factor contributes a half-plane crossed with a line window
    (alpha preferred when both qualify, a documented tie-break); two Case
    2 factors give a hull growing by a fixed, certified vertex count per
    period, with the product count reported per period square.
    """
    for p in (alpha, beta):
        check = validate_pattern(p, p.validation_window)
        if not check.ok:
            raise InputError(f"pattern fails betweenness at {check.violation}")
    ca, cb = classify(alpha), classify(beta)
    if ca.case == 1 or cb.case == 1:
        which, pattern = ("alpha", alpha) if ca.case == 1 else ("beta", beta)
        win = window_len or pattern.validation_window
        hp = build_halfplane(pattern, win)
        product = _cross_with_line(hp.complex, win)
        return HalfplaneFactor(which, hp, win, product)
    counts_a = _stable_period_counts(alpha)
    counts_b = _stable_period_counts(beta)
    return CocompactHull(
        counts_a[-1] - counts_a[-2],
        counts_b[-1] - counts_b[-2],
        (counts_a[-1] - counts_a[-2]) * (counts_b[-1] - counts_b[-2]),
        (tuple(counts_a), tuple(counts_b)),
    )


def count_hull_vertices(pattern: GeodesicWallPattern, window_len: int) -> int:
    """Pairwise consistent orientations of the window walls, counted by
    backtracking in position order.

    The only forbidden combination is side 0 on an earlier wall against
    side 1 on a later non-crossing wall, so a partial assignment prunes
    as soon as a later wall wants side 1 behind such a zero.
    """
    walls = pattern.concrete(window_len)
    n = len(walls)
    count = 0
    zero_positions: list = []

    def rec(k):
        nonlocal count
        if k == n:
            count += 1
            return
        orbit, q = walls[k]
        # side 0 always extends.
        zero_positions.append((orbit, q))
        rec(k + 1)
        zero_positions.pop()
        # side 1 extends when every earlier zero wall crosses this one.
        if all(pattern.crosses(o0, q0, orbit, q) for o0, q0 in zero_positions):
            rec(k + 1)

    rec(0)
    return count


def _stable_period_counts(pattern: GeodesicWallPattern):
    m = pattern.period
    base = pattern.validation_window // m
    counts = [count_hull_vertices(pattern, (base + i) * m) for i in range(3)]
    if counts[2] - counts[1] != counts[1] - counts[0]:
        raise StructuralFailureError(
            "hull growth did not stabilize to a fixed count per period"
        )
    return counts


def _cross_with_line(complex_: CubeComplex, length: int) -> CubeComplex:
    """Product with a combinatorial line window of the given edge count."""
    base_n = len(complex_.wall_ids)
    wall_ids = list(complex_.wall_ids) + [f"line@{i}" for i in range(length)]
    n = base_n + length

    def pred(i, si, j, sj):
        if i >= base_n and j >= base_n:
            qi, qj = i - base_n, j - base_n
            if qi > qj:
                qi, qj, si, sj = qj, qi, sj, si
            return not (si == 0 and sj == 1)
        if i < base_n and j < base_n:
            return bool(complex_.compat.bits[i][j] >> (si * 2 + sj) & 1)
        return True

    compat = CompatTable.from_predicate(n, pred)
    line_masks = [((1 << t) - 1) << base_n for t in range(length + 1)]
    masks = [m | lm for lm in line_masks for m in complex_.vertices]
    return from_orientations(wall_ids, masks, compat)


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def pattern_to_json(pattern: GeodesicWallPattern) -> dict:
    rules = []
    for (a, b), rule in sorted(pattern.rules.items()):
        if rule.kind == WITHIN:
            value = {"within": rule.r}
        else:
            value = rule.kind
        rules.append({"pair": [a, b], "rule": value})
    return {
        "m": pattern.period,
        "orbits": [{"id": o.id, "pos": o.pos} for o in pattern.orbits],
        "rules": rules,
    }


def pattern_from_json(data: Mapping) -> GeodesicWallPattern:
    try:
        period = int(data["m"])
        orbits = tuple(WallOrbit(o["id"], int(o["pos"])) for o in data["orbits"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"pattern JSON is missing fields: {exc}") from exc
    rules = {}
    for entry in data.get("rules", ()):
        pair = tuple(entry["pair"])
        raw = entry["rule"]
        if isinstance(raw, str):
            rule = CrossRule(raw)
        elif isinstance(raw, Mapping) and "within" in raw:
            rule = within(int(raw["within"]))
        else:
            raise InputError(f"unknown rule encoding {raw!r}")
        key = pair if pair[0] <= pair[1] else (pair[1], pair[0])
        if key in rules and rules[key] != rule:
            raise InputError(f"conflicting rules for pair {key}")
        rules[key] = rule
    return GeodesicWallPattern(period, orbits, rules)

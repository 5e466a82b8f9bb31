"""Independent brute-force oracles used to check the package's fast paths.

Everything here recomputes results from first principles: orientations
are enumerated exhaustively, consistency is decided by direct point-set
or halfplane reasoning, and cubes are found by scanning wall subsets.
None of it shares code with the construction under test.
"""

from fractions import Fraction
from itertools import combinations


def bipartition_side(points, side0, which):
    return side0 if which == 0 else frozenset(range(points)) - side0


def exhaustive_bipartition_dual(points, side0_sets, base_point):
    """All data of the dual complex of a bipartition wallspace.

    Enumerates every one of the 2^w orientations, keeps the pairwise
    consistent ones, restricts to the component of the principal vertex
    under single-wall flips, and scans for edges and cubes directly.
    Returns (vertices, edges, cubes_by_dim) with vertices as bitmasks,
    edges as frozensets of two masks, cubes as frozensets of 2^k masks.
    """
    w = len(side0_sets)
    universe = frozenset(range(points))
    sides = [
        (frozenset(s0), universe - frozenset(s0)) for s0 in side0_sets
    ]

    pair_ok = {}
    for i in range(w):
        for j in range(i + 1, w):
            for si in (0, 1):
                for sj in (0, 1):
                    pair_ok[(i, si, j, sj)] = bool(sides[i][si] & sides[j][sj])

    consistent = []
    for mask in range(1 << w):
        ok = True
        for i in range(w):
            for j in range(i + 1, w):
                if not pair_ok[(i, mask >> i & 1, j, mask >> j & 1)]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            consistent.append(mask)
    consistent_set = set(consistent)

    principal = 0
    for i, (s0, _) in enumerate(sides):
        if base_point not in s0:
            principal |= 1 << i
    assert principal in consistent_set

    component = {principal}
    stack = [principal]
    while stack:
        m = stack.pop()
        for i in range(w):
            m2 = m ^ (1 << i)
            if m2 in consistent_set and m2 not in component:
                component.add(m2)
                stack.append(m2)

    edges = set()
    for m in component:
        for i in range(w):
            m2 = m ^ (1 << i)
            if m2 in component and m < m2:
                edges.add(frozenset((m, m2)))

    cubes = {}
    for k in range(2, w + 1):
        found = set()
        for wallset in combinations(range(w), k):
            clear = ~sum(1 << i for i in wallset)
            bases = {m & clear for m in component}
            for base in bases:
                corners = [base]
                for i in wallset:
                    corners += [c | (1 << i) for c in corners]
                if all(c in component for c in corners):
                    found.add(frozenset(corners))
        if found:
            cubes[k] = found
    return component, edges, cubes


def halfplane_pair_ok(l1, s1, l2, s2):
    """Closed halfplanes intersect; decided from scratch over Fractions.

    Lines given as (a, b, c) triples for a*x + b*y = c, side 1 meaning
    the >= side.  Transverse lines always share points; parallel ones
    reduce to a strip comparison after rescaling one normal onto the
    other.
    """
    a1, b1, c1 = l1
    a2, b2, c2 = l2
    if a1 * b2 - b1 * a2 != 0:
        return True
    n1 = (a1, b1) if s1 == 1 else (-a1, -b1)
    k1 = Fraction(c1) if s1 == 1 else -Fraction(c1)
    n2 = (a2, b2) if s2 == 1 else (-a2, -b2)
    k2 = Fraction(c2) if s2 == 1 else -Fraction(c2)
    t = Fraction(n2[0], n1[0]) if n1[0] != 0 else Fraction(n2[1], n1[1])
    if t > 0:
        # Same inward direction: both halfplanes contain points far along n1.
        return True
    # H2 = {n1.x <= k2/t} with t < 0; meets H1 = {n1.x >= k1} iff k1 <= k2/t.
    return k1 <= k2 / t


def enumerate_consistent_planar(lines):
    """All pairwise consistent orientations of a list of (a, b, c) lines."""
    w = len(lines)
    out = []
    for mask in range(1 << w):
        ok = True
        for i in range(w):
            for j in range(i + 1, w):
                if not halfplane_pair_ok(lines[i], mask >> i & 1, lines[j], mask >> j & 1):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(mask)
    return out


def flip_component(masks, start, wall_count):
    masks = set(masks)
    component = {start}
    stack = [start]
    while stack:
        m = stack.pop()
        for i in range(wall_count):
            m2 = m ^ (1 << i)
            if m2 in masks and m2 not in component:
                component.add(m2)
                stack.append(m2)
    return component


def pair_enumeration_halfplane(wall_positions, tail_set, window_len):
    """Distinct orientations of pairs (x, x') with 0 <= x <= x' <= L.

    wall_positions: ordered positions of the window walls; tail_set:
    positions oriented from the trailing coordinate x, the rest from the
    leading coordinate x'.  Bit k is set when the relevant coordinate has
    passed wall k.
    """
    seen = []
    seen_set = set()
    for x in range(window_len + 1):
        for x2 in range(x, window_len + 1):
            mask = 0
            for k, q in enumerate(wall_positions):
                coord = x if q in tail_set else x2
                if q < coord:
                    mask |= 1 << k
            if mask not in seen_set:
                seen_set.add(mask)
                seen.append(mask)
    return seen

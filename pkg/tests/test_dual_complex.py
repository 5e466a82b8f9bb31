import random
from fractions import Fraction
import pytest
from hypothesis import given, settings, strategies as st

from cubuland.dual_complex import build_dual
from cubuland.errors import (
    InputError,
    PartialResultError,
    StructuralFailureError,
)
from cubuland.wallspace import (
    Bipartition,
    HalfplanePair,
    KIND_BIPARTITION,
    KIND_PLANAR,
    Line,
    Wall,
    Wallspace,
)

from oracles import exhaustive_bipartition_dual


def planar_space(*triples, mults=None):
    walls = []
    for i, (a, b, c) in enumerate(triples):
        mult = mults[i] if mults else 1
        walls.append(Wall(f"w{i}", HalfplanePair(Line.canonical(a, b, c)), mult))
    return Wallspace(KIND_PLANAR, tuple(walls))


def bip_space(points, side0_sets):
    universe = frozenset(range(points))
    walls = tuple(
        Wall(f"w{i}", Bipartition(frozenset(s), universe - frozenset(s)))
        for i, s in enumerate(side0_sets)
    )
    return Wallspace(KIND_BIPARTITION, walls, points=points)


TRIANGLE = planar_space((1, 0, 0), (0, 1, 0), (1, 1, 2))
GRID_2X1 = planar_space((1, 0, 0), (1, 0, 1), (0, 1, 0))
BASE = (Fraction(1, 3), Fraction(1, 7))


def cube3():
    """The 3-cube as the dual of three pairwise-crossing walls."""
    return build_dual(TRIANGLE, BASE)


class TestBuildDual:
    def test_single_wall(self):
        c = build_dual(planar_space((1, 0, 0)), BASE)
        assert len(c.vertices) == 2
        assert len(c.edges) == 1
        assert len(c.hyperplanes) == 1

    def test_triangle_counts(self):
        c = cube3()
        assert len(c.vertices) == 8
        assert len(c.edges) == 12
        assert c.cube_count(2) == 6
        assert c.cube_count(3) == 1

    def test_grid_2x1_counts(self):
        c = build_dual(GRID_2X1, BASE)
        assert len(c.vertices) == 6
        assert len(c.edges) == 7
        assert c.cube_count(2) == 2
        assert c.cube_count(3) == 0

    def test_budget_carries_frontier(self):
        with pytest.raises(PartialResultError) as err:
            build_dual(TRIANGLE, BASE, budget=3)
        assert len(err.value.vertices) == 3
        assert err.value.frontier

    def test_matches_oracle_on_planar_arrangements(self):
        from oracles import enumerate_consistent_planar, flip_component

        rng = random.Random(19)
        for _ in range(25):
            lines = []
            seen = set()
            for _ in range(rng.randint(1, 7)):
                a = rng.randint(-2, 2)
                b = rng.randint(-2, 2)
                if a == 0 and b == 0:
                    a = 1
                c = rng.randint(-3, 3)
                line = Line.canonical(a, b, c)
                if line in seen:
                    continue
                seen.add(line)
                lines.append(line)
            ws = Wallspace(
                KIND_PLANAR,
                tuple(Wall(f"w{i}", HalfplanePair(l)) for i, l in enumerate(lines)),
            )
            base = None
            for k in range(40):
                candidate = (Fraction(2 * k + 1, 7), Fraction(3 * k + 2, 11))
                if all(l.eval_at(*candidate) != 0 for l in lines):
                    base = candidate
                    break
            assert base is not None
            complex_ = build_dual(ws, base)

            triples = [(l.a, l.b, l.c) for l in lines]
            consistent = enumerate_consistent_planar(triples)
            principal = 0
            for i, l in enumerate(lines):
                if l.eval_at(*base) > 0:
                    principal |= 1 << i
            component = flip_component(consistent, principal, len(lines))
            assert set(complex_.vertices) == component

    def test_matches_oracle_on_bipartitions(self):
        rng = random.Random(11)
        for _ in range(30):
            points = rng.randint(2, 5)
            # Only 2^(p-1) - 1 distinct unordered bipartitions exist.
            n_walls = min(rng.randint(1, 8), (1 << (points - 1)) - 1)
            sets = set()
            while len(sets) < n_walls:
                size = rng.randint(1, points - 1)
                s = frozenset(rng.sample(range(points), size))
                key = frozenset((s, frozenset(range(points)) - s))
                if all(frozenset((t, frozenset(range(points)) - t)) != key for t in sets):
                    sets.add(s)
            sets = sorted(sets, key=sorted)
            ws = bip_space(points, sets)
            c = build_dual(ws, 0)
            verts, edges, cubes = exhaustive_bipartition_dual(points, sets, 0)
            assert set(c.vertices) == verts
            got_edges = {
                frozenset((c.vertices[a], c.vertices[b])) for a, b, _ in c.edges
            }
            assert got_edges == edges
            got_cubes = {
                dim: {
                    frozenset(_cube_corner_masks(base, walls))
                    for base, walls in c.cubes.get(dim, ())
                }
                for dim in cubes
            }
            assert got_cubes == cubes


def _cube_corner_masks(base, walls):
    masks = [base]
    for w in walls:
        masks += [m | (1 << w) for m in masks]
    return masks


class TestMedian:
    def test_three_cube_example(self):
        c = cube3()
        # Masks 000, 011, 101 have coordinatewise majority 001.
        assert c.median(0b000, 0b011, 0b101) == 0b001

    def test_degenerate_pair(self):
        c = cube3()
        for u in c.vertices:
            for w in c.vertices:
                assert c.median(u, u, w) == u

    def test_median_on_geodesics_random_bipartition(self):
        rng = random.Random(5)
        points = 5
        sets = []
        while len(sets) < 10:
            s = frozenset(rng.sample(range(points), rng.randint(1, points - 1)))
            comp = frozenset(range(points)) - s
            if all(frozenset((t, frozenset(range(points)) - t)) != frozenset((s, comp)) for t in sets):
                sets.append(s)
        c = build_dual(bip_space(points, sets), 0)
        verts = c.vertices
        for _ in range(300):
            u, v, w = (rng.choice(verts) for _ in range(3))
            m = c.median(u, v, w)
            for a, b in ((u, v), (u, w), (v, w)):
                assert c.distance(a, m) + c.distance(m, b) == c.distance(a, b)

    def test_missing_majority_is_structural(self):
        # Boundary ring of a 3x3 vertex grid: the median of the three edge
        # midpoints is the missing centre vertex.
        triples = [(1, 0, 0), (1, 0, 1), (0, 1, 0), (0, 1, 1)]
        c = build_dual(planar_space(*triples), BASE)

        def coords(m):
            return ((m >> 0 & 1) + (m >> 1 & 1), (m >> 2 & 1) + (m >> 3 & 1))

        ring = c.spanned([m for m in c.vertices if coords(m) != (1, 1)])
        mids = {coords(m): m for m in ring.vertices}
        with pytest.raises(StructuralFailureError):
            ring.median(mids[(1, 0)], mids[(1, 2)], mids[(0, 1)])


class TestConvexHull:
    def test_opposite_corners_span_cube(self):
        c = cube3()
        hull = c.convex_hull([0b000, 0b111])
        assert set(hull.vertices) == set(c.vertices)

    def test_adjacent_vertices_span_edge(self):
        c = cube3()
        hull = c.convex_hull([0b000, 0b001])
        assert set(hull.vertices) == {0b000, 0b001}
        assert len(hull.edges) == 1

    def test_bottom_square(self):
        c = cube3()
        hull = c.convex_hull([0b000, 0b011])
        assert set(hull.vertices) == {0b000, 0b001, 0b010, 0b011}
        assert hull.cube_count(2) == 1

    def test_idempotent_and_monotone(self):
        c = build_dual(GRID_2X1, BASE)
        seeds = [c.vertices[0], c.vertices[3]]
        hull = c.convex_hull(seeds)
        again = c.convex_hull(hull.vertices)
        assert set(again.vertices) == set(hull.vertices)
        bigger = c.convex_hull(list(seeds) + [c.vertices[1]])
        assert set(hull.vertices) <= set(bigger.vertices)


class TestCubicalNeighborhood:
    def test_radius_zero_is_identity(self):
        c = cube3()
        sub = c.spanned([0b000, 0b001])
        out = c.cubical_neighborhood(sub, 0)
        assert out.vertices == sub.vertices

    def test_vertex_star_fills_cube(self):
        c = cube3()
        sub = c.spanned([0b000])
        out = c.cubical_neighborhood(sub, 1)
        assert set(out.vertices) == set(c.vertices)

    def test_preserves_convexity(self):
        c = build_dual(GRID_2X1, BASE)
        sub = c.convex_hull([c.vertices[0]])
        for k in (1, 2):
            grown = c.cubical_neighborhood(sub, k)
            hull = c.convex_hull(grown.vertices)
            assert set(hull.vertices) == set(grown.vertices)


class TestEssentialCore:
    def test_whole_cube_collapses(self):
        c = cube3()
        for horizon in (1, 2, 3):
            core = c.essential_core(c, horizon)
            assert len(core.vertices) == 1
            assert not core.hyperplanes

    def test_grid_window_keeps_interior_walls(self):
        # 10 lines per direction; the walls three or more steps from both
        # window sides survive, giving a 5x5 interior grid.
        triples = [(1, 0, k) for k in range(10)] + [(0, 1, k) for k in range(10)]
        ws = planar_space(*triples)
        c = build_dual(ws, (Fraction(9, 2), Fraction(9, 2)))
        assert len(c.vertices) == 121
        core = c.essential_core(c, 3)
        kept = {hp.wall for hp in core.hyperplanes}
        assert kept == {"w3", "w4", "w5", "w6", "w13", "w14", "w15", "w16"}
        assert len(core.vertices) == 25

    def test_single_vertex_sub(self):
        c = build_dual(GRID_2X1, BASE)
        sub = c.spanned([c.vertices[0]])
        core = c.essential_core(sub, 1)
        # A singleton has no room on its own side of any wall.
        assert len(core.vertices) == 1


class TestDecomposeProduct:
    def test_grid_2x1_factors(self):
        c = build_dual(GRID_2X1, BASE)
        dec = c.decompose_product()
        assert dec.is_product
        sizes = sorted(len(f.vertices) for f in dec.factors)
        assert sizes == [2, 3]
        edge_counts = sorted(len(f.edges) for f in dec.factors)
        assert edge_counts == [1, 2]

    def test_three_cube_factors(self):
        dec = cube3().decompose_product()
        assert dec.is_product
        assert len(dec.factors) == 3
        assert all(len(f.vertices) == 2 for f in dec.factors)

    def test_parallel_path_irreducible(self):
        ws = planar_space((1, 0, 0), (1, 0, 1), (1, 0, 2))
        c = build_dual(ws, BASE)
        dec = c.decompose_product()
        assert dec.is_product
        assert len(dec.factors) == 1
        assert len(dec.factors[0].vertices) == 4

    def test_not_a_product_reports_obstruction(self):
        # L-shaped complex: drop one corner of a square grid.
        ws = planar_space((1, 0, 0), (0, 1, 0))
        c = build_dual(ws, BASE)
        sub = c.spanned([m for m in c.vertices if m != 0b11])
        dec = sub.decompose_product()
        assert not dec.is_product
        assert dec.obstruction is not None
        missing = sub.orientation_to_mask(dec.obstruction)
        assert missing == 0b11

    def test_crossing_graph_matches_squares(self):
        for ws in (TRIANGLE, GRID_2X1):
            c = build_dual(ws, BASE)
            from_squares = {
                frozenset(walls) for base, walls in c.cubes.get(2, ())
            }
            from_compat = {frozenset(p) for p in c.crossing_pairs}
            assert from_squares == from_compat


class TestIsometricEmbedding:
    def test_full_complex(self):
        c = cube3()
        ok, witness = c.is_isometrically_embedded(c)
        assert ok and witness is None

    def test_two_edge_path_between_opposite_square_corners(self):
        ws = planar_space((1, 0, 0), (0, 1, 0))
        c = build_dual(ws, BASE)
        sub = c.spanned([0b00, 0b01, 0b11])
        ok, _ = c.is_isometrically_embedded(sub)
        assert ok

    def test_l_shape_embeds_and_disconnected_rejected(self):
        triples = [(1, 0, 0), (1, 0, 1), (0, 1, 0), (0, 1, 1)]
        c = build_dual(planar_space(*triples), BASE)
        far = max(c.vertices, key=lambda m: m.bit_count())
        sub = c.spanned([m for m in c.vertices if m != far])
        ok, _ = c.is_isometrically_embedded(sub)
        assert ok
        broken = c.spanned([0, far])
        with pytest.raises(InputError):
            c.is_isometrically_embedded(broken)

    def test_violating_pair_reported(self):
        # Boundary ring of a 3x3 vertex grid: opposite edge midpoints are
        # two walls apart but four ring steps apart.
        triples = [(1, 0, 0), (1, 0, 1), (0, 1, 0), (0, 1, 1)]
        c = build_dual(planar_space(*triples), BASE)

        def coords(m):
            return ((m >> 0 & 1) + (m >> 1 & 1), (m >> 2 & 1) + (m >> 3 & 1))

        ring = c.spanned([m for m in c.vertices if coords(m) != (1, 1)])
        ok, witness = c.is_isometrically_embedded(ring)
        assert not ok
        u, v = witness
        assert ring.distance(u, v) < _skeleton_distance(ring, u, v)


def _skeleton_distance(c, u, v):
    adj = c.adjacency()
    dist = c.skeleton_distances_from(c.vertex_index[u], adj)
    return dist[c.vertex_index[v]]


@st.composite
def small_bipartition_spaces(draw):
    points = draw(st.integers(3, 5))
    universe = frozenset(range(points))
    n_walls = draw(st.integers(1, min(8, (1 << (points - 1)) - 1)))
    sides = []
    seen = set()
    while len(sides) < n_walls:
        size = draw(st.integers(1, points - 1))
        members = draw(
            st.frozensets(st.integers(0, points - 1), min_size=size, max_size=size)
        )
        if not members or members == universe:
            continue
        key = frozenset((members, universe - members))
        if key in seen:
            continue
        seen.add(key)
        sides.append(members)
    return points, sides


@given(small_bipartition_spaces(), st.randoms(use_true_random=False))
@settings(max_examples=30, deadline=None)
def test_median_axioms_on_random_spaces(space, rng):
    points, sides = space
    c = build_dual(bip_space(points, sides), 0)
    verts = c.vertices
    for _ in range(20):
        u, v, w = (rng.choice(verts) for _ in range(3))
        m = c.median(u, v, w)
        assert m == c.median(w, u, v) == c.median(v, w, u)
        for a, b in ((u, v), (u, w), (v, w)):
            assert c.distance(a, m) + c.distance(m, b) == c.distance(a, b)


class TestStructuralInvariants:
    def test_hyperplane_count_matches_separating_walls(self):
        rng = random.Random(23)
        spaces = [TRIANGLE, GRID_2X1]
        for seed in range(6):
            points = 5
            sets = []
            while len(sets) < 7:
                s = frozenset(rng.sample(range(points), rng.randint(1, points - 1)))
                comp = frozenset(range(points)) - s
                if all(
                    frozenset((t, frozenset(range(points)) - t)) != frozenset((s, comp))
                    for t in sets
                ):
                    sets.append(s)
            spaces.append(bip_space(points, sets))
        for ws in spaces:
            c = build_dual(ws, BASE if ws.kind == "finite-planar" else 0)
            separating = set()
            for i, u in enumerate(c.vertices):
                for v in c.vertices[i + 1 :]:
                    diff = u ^ v
                    w = 0
                    while diff:
                        if diff & 1:
                            separating.add(w)
                        diff >>= 1
                        w += 1
            assert len(c.hyperplanes) == len(separating)

    def test_product_remultiplies_to_whole(self):
        # A wallspace whose crossing graph is a join: a 2x2 grid.
        ws = planar_space((1, 0, 0), (1, 0, 1), (0, 1, 0), (0, 1, 1))
        c = build_dual(ws, BASE)
        dec = c.decompose_product()
        assert dec.is_product
        rebuilt = set()
        positions = [
            sorted(c.wall_ids.index(uid) for uid in f.wall_ids) for f in dec.factors
        ]
        import itertools as it

        for combo in it.product(*(f.vertices for f in dec.factors)):
            mask = 0
            for factor_positions, sub in zip(positions, combo):
                for local, pos in enumerate(factor_positions):
                    if sub >> local & 1:
                        mask |= 1 << pos
            rebuilt.add(mask)
        assert rebuilt == set(c.vertices)

    def test_skeleton_distance_equals_wall_distance(self):
        rng = random.Random(41)
        spaces = [TRIANGLE, GRID_2X1]
        sets = []
        while len(sets) < 8:
            s = frozenset(rng.sample(range(5), rng.randint(1, 4)))
            comp = frozenset(range(5)) - s
            if all(frozenset((t, frozenset(range(5)) - t)) != frozenset((s, comp)) for t in sets):
                sets.append(s)
        spaces.append(bip_space(5, sets))
        for ws in spaces:
            c = build_dual(ws, BASE if ws.kind == "finite-planar" else 0)
            adj = c.adjacency()
            for start in range(len(c.vertices)):
                dist = c.skeleton_distances_from(start, adj)
                for other in range(len(c.vertices)):
                    assert dist[other] == c.distance(
                        c.vertices[start], c.vertices[other]
                    )

    def test_coinciding_walls_span_squares(self):
        # Multiplicity-2 wall: the two copies cross, producing a square
        # glued into the chain with no special casing.
        ws = planar_space((1, 0, 0), (1, 0, 1), mults=[2, 1])
        c = build_dual(ws, BASE)
        assert len(c.vertices) == 4 + 2 - 1
        assert c.cube_count(2) == 1
        assert len(c.hyperplanes) == 3


class TestConcurrentQueries:
    def test_shared_complex_queries_are_consistent(self):
        from concurrent.futures import ThreadPoolExecutor

        c = build_dual(grid_like(), BASE)
        verts = c.vertices
        rng = random.Random(2)
        triples = [tuple(rng.choice(verts) for _ in range(3)) for _ in range(120)]
        serial = [c.median(*t) for t in triples]
        with ThreadPoolExecutor(max_workers=8) as pool:
            threaded = list(pool.map(lambda t: c.median(*t), triples))
        assert threaded == serial
        with ThreadPoolExecutor(max_workers=8) as pool:
            hulls = list(
                pool.map(lambda t: frozenset(c.convex_hull(t[:2]).vertices), triples)
            )
        assert hulls == [frozenset(c.convex_hull(t[:2]).vertices) for t in triples]


def grid_like():
    return planar_space((1, 0, 0), (1, 0, 1), (0, 1, 0), (0, 1, 1))


class TestErrorPaths:
    def test_median_rejects_non_vertices(self):
        c = cube3()
        sub = c.spanned([0b000, 0b001])
        with pytest.raises(InputError):
            sub.median(0b000, 0b001, 0b111)

    def test_convex_hull_rejects_empty_and_foreign_seeds(self):
        c = cube3()
        with pytest.raises(InputError):
            c.convex_hull([])
        sub = c.spanned([0b000, 0b001])
        with pytest.raises(InputError):
            sub.convex_hull([0b111])

    def test_neighborhood_rejects_negative_radius(self):
        c = cube3()
        with pytest.raises(InputError):
            c.cubical_neighborhood(c, -1)

    def test_essential_core_needs_positive_horizon(self):
        c = cube3()
        with pytest.raises(InputError):
            c.essential_core(c, 0)

    def test_foreign_subcomplex_rejected(self):
        c = cube3()
        other = build_dual(planar_space((1, 0, 0)), BASE)
        with pytest.raises(InputError):
            c.cubical_neighborhood(other, 1)

    def test_inconsistent_start_orientation_rejected(self):
        from cubuland.wallspace import Orientation

        bad = Orientation(("w0", "w1", "w2"), (0, 1, 1))  # x <= 0 with x >= 1
        with pytest.raises(InputError):
            build_dual(GRID_2X1, BASE, start=bad)


class TestExports:
    def test_json_shape(self):
        c = build_dual(GRID_2X1, BASE)
        data = c.to_json()
        assert data["schema"] == "cubuland/1"
        assert len(data["vertices"]) == 6
        assert len(data["edges"]) == 7
        assert len(data["cubes"]["2"]) == 2
        assert {tuple(pair) for pair in data["crossing"]} == {
            ("w0", "w2"),
            ("w1", "w2"),
        }

    def test_dot_output(self):
        c = build_dual(planar_space((1, 0, 0)), BASE)
        dot = c.to_dot()
        assert dot.startswith("graph skeleton {")
        assert "v0 -- v1" in dot
        crossing = c.to_dot("crossing")
        assert "h0" in crossing

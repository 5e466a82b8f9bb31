from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cubuland.errors import BelowMinimumError, InputError
from cubuland.planar import (
    ExtraWall,
    PeriodicArrangement,
    PeriodicLine,
    arrangement_from_json,
    arrangement_to_json,
    build_pinned_dual,
    classify_families,
    dual_flat,
    parallel_families,
)
from cubuland.wallspace import Line, Window

UNIT = ((1, 0), (0, 1))


def horizontal(offset, mult=1):
    return PeriodicLine((1, 0), Fraction(offset), mult)


def vertical(offset, mult=1):
    return PeriodicLine((0, 1), Fraction(offset), mult)


def diagonal(offset, mult=1):
    return PeriodicLine((1, 1), Fraction(offset), mult)


class TestParallelFamilies:
    def test_three_directions(self):
        arr = PeriodicArrangement(
            ((7, 0), (0, 7)),
            (
                horizontal(0), horizontal(1), horizontal(2),
                vertical(0), vertical(1),
                diagonal(0), diagonal(1),
            ),
        )
        report = parallel_families(arr)
        assert report.n == 3
        sizes = sorted(len(f.lines) for f in report.families)
        assert sizes == [2, 2, 3]

    def test_single_line_unit_lattice(self):
        arr = PeriodicArrangement(UNIT, (horizontal(0),))
        report = parallel_families(arr)
        assert report.n == 1
        assert report.families[0].step == 1

    def test_multiplicity_carried(self):
        arr = PeriodicArrangement(UNIT, (horizontal(0, mult=2), vertical(0)))
        report = parallel_families(arr)
        assert report.n == 2
        fam = next(f for f in report.families if f.direction == (1, 0))
        assert fam.lines[0].mult == 2

    def test_unimodular_lattice_change(self):
        lines = (horizontal(0), vertical(0), diagonal(0))
        base = PeriodicArrangement(((3, 0), (0, 3)), lines)
        # (u, v) -> (u + v, v) is unimodular, so the families must agree.
        changed = PeriodicArrangement(((3, 3), (0, 3)), lines)
        a = parallel_families(base)
        b = parallel_families(changed)
        assert a.directions == b.directions
        assert [len(f.lines) for f in a.families] == [len(f.lines) for f in b.families]


@given(
    st.integers(-2, 2), st.integers(-2, 2), st.integers(1, 3),
)
@settings(max_examples=60)
def test_families_invariant_under_shear(k, j, scale):
    lines = (horizontal(0), vertical(0))
    lattice = ((scale, 0), (0, scale))
    # Shear by an upper triangular unimodular matrix.
    sheared = (
        (scale, k * scale),
        (j * scale * 0, scale),
    )
    a = parallel_families(PeriodicArrangement(lattice, lines))
    b = parallel_families(PeriodicArrangement(sheared, lines))
    assert a.directions == b.directions
    assert [f.step for f in a.families] == [f.step for f in b.families]


class TestDualFlat:
    def test_grid_4x3(self):
        # 4 horizontal and 3 vertical lines meet the window: a 5x4 grid.
        arr = PeriodicArrangement(
            ((10, 0), (0, 10)),
            tuple(horizontal(i) for i in range(4)) + tuple(vertical(i) for i in range(3)),
        )
        c = dual_flat(arr, Window(Fraction(-1, 2), Fraction(-1, 2), Fraction(7, 2), Fraction(7, 2)))
        assert len(c.vertices) == 20
        assert c.cube_count(2) == 12
        flat = c.meta["flat"]
        assert flat.n == 2 and flat.standard

    def test_grid_counts_all_small_sizes(self):
        for p in range(1, 6):
            for q in range(1, 6):
                arr = PeriodicArrangement(
                    ((20, 0), (0, 20)),
                    tuple(horizontal(i) for i in range(p))
                    + tuple(vertical(i) for i in range(q)),
                )
                hi = Fraction(2 * max(p, q) + 1, 2)
                c = dual_flat(
                    arr,
                    Window(Fraction(-1, 2), Fraction(-1, 2), hi, hi),
                    wall_budget=30,
                )
                assert len(c.vertices) == (p + 1) * (q + 1)
                assert c.cube_count(2) == p * q

    def test_mult_2_1_chain(self):
        # One family: mult 2 at y=0 and mult 1 at y=1, period 2.  The window
        # holds y = 0, 1, 2, 3, giving square, edge, square, edge glued at
        # opposite vertices: 6 + 2 + 6 + 2 minus 3 shared corners.
        arr = PeriodicArrangement(
            ((1, 0), (0, 2)),
            (horizontal(0, mult=2), horizontal(1)),
        )
        c = dual_flat(
            arr,
            Window(0, Fraction(-1, 2), 1, Fraction(7, 2)),
        )
        assert len(c.vertices) == (4 + 2 + 4 + 2) - 3
        assert c.cube_count(2) == 2
        flat = c.meta["flat"]
        assert flat.n == 1
        assert flat.factors[0].cube_dims == (2, 1, 2, 1)

    def test_single_line_is_edge(self):
        arr = PeriodicArrangement(((5, 0), (0, 5)), (horizontal(0),))
        c = dual_flat(arr, Window(0, Fraction(-1, 2), 1, Fraction(1, 2)))
        assert len(c.vertices) == 2
        assert len(c.edges) == 1

    def test_window_missing_family_rejected(self):
        arr = PeriodicArrangement(
            ((10, 0), (0, 10)), (horizontal(0), vertical(0))
        )
        with pytest.raises(InputError):
            dual_flat(arr, Window(2, Fraction(-1, 2), 3, Fraction(1, 2)))

    def test_corner_nudge(self):
        # Window corner sits exactly on y = 0; the build must still work.
        arr = PeriodicArrangement(((10, 0), (0, 10)), (horizontal(0), vertical(0)))
        c = dual_flat(arr, Window(0, 0, 3, 3))
        assert len(c.vertices) == 4

    def test_decomposition_returns_family_count(self):
        arr3 = PeriodicArrangement(
            ((12, 0), (0, 12)),
            (horizontal(0), horizontal(1), vertical(0), diagonal(0)),
        )
        c = dual_flat(
            arr3,
            Window(Fraction(-7, 2), Fraction(-7, 2), Fraction(7, 2), Fraction(7, 2)),
            wall_budget=30,
        )
        dec = c.decompose_product()
        assert dec.is_product
        assert len(dec.factors) == 3

    def test_skeleton_isometric_in_extended_dual(self):
        # Rebuild with a far-away extra wall allowed to flip: the copy of
        # the flat sitting at the designated side must stay isometrically
        # embedded in the larger dual.
        window = Window(Fraction(-1, 2), Fraction(-1, 2), Fraction(3, 2), Fraction(3, 2))
        lines = (horizontal(0), vertical(0), vertical(1))
        flat = dual_flat(PeriodicArrangement(((10, 0), (0, 10)), lines), window)
        arr2 = PeriodicArrangement(
            ((10, 0), (0, 10)),
            lines,
            (ExtraWall(0, line=Line.canonical(1, 0, 8)),),
        )
        relaxed = build_pinned_dual(arr2, window, relax=True)
        assert len(relaxed.vertices) > len(flat.vertices)
        pos = relaxed.wall_ids.index("X0")
        image = [m for m in relaxed.vertices if not m >> pos & 1]
        assert len(image) == len(flat.vertices)
        sub = relaxed.spanned(image)
        ok, witness = relaxed.is_isometrically_embedded(sub)
        assert ok, witness


class TestPinnedDual:
    ARR = PeriodicArrangement(
        ((10, 0), (0, 10)),
        (horizontal(0), vertical(0)),
    )
    WINDOW = Window(Fraction(-1, 2), Fraction(-1, 2), Fraction(3, 2), Fraction(3, 2))

    def test_no_extras_matches_flat(self):
        flat = dual_flat(self.ARR, self.WINDOW)
        pinned = build_pinned_dual(self.ARR, self.WINDOW)
        assert set(pinned.vertices) == set(flat.vertices)

    def test_geometric_extra_freezes_coordinate(self):
        arr = PeriodicArrangement(
            ((10, 0), (0, 10)),
            (horizontal(0), vertical(0)),
            (ExtraWall(0, line=Line.canonical(1, 0, 7)),),
        )
        flat = dual_flat(arr, self.WINDOW)
        pinned = build_pinned_dual(arr, self.WINDOW)
        assert len(pinned.vertices) == len(flat.vertices)
        pos = pinned.wall_ids.index("X0")
        assert all(not m >> pos & 1 for m in pinned.vertices)

    def test_cutting_extra_rejected(self):
        arr = PeriodicArrangement(
            ((10, 0), (0, 10)),
            (horizontal(0), vertical(0)),
            (ExtraWall(0, line=Line.canonical(1, 0, 1)),),
        )
        with pytest.raises(InputError):
            build_pinned_dual(arr, self.WINDOW)

    def test_disjoint_designated_sides_rejected(self):
        arr = PeriodicArrangement(
            ((10, 0), (0, 10)),
            (horizontal(0), vertical(0)),
            (
                ExtraWall(0, line=Line.canonical(1, 0, 7)),
                ExtraWall(1, line=Line.canonical(1, 0, 8)),
            ),
        )
        with pytest.raises(InputError):
            build_pinned_dual(arr, self.WINDOW)

    def test_relaxed_spanning_walls_scale_by_cube(self):
        for k in (1, 2, 3):
            arr = PeriodicArrangement(
                ((10, 0), (0, 10)),
                (horizontal(0), vertical(0)),
                tuple(ExtraWall(0, spanning=True, id=f"S{i}") for i in range(k)),
            )
            flat = dual_flat(arr, self.WINDOW)
            frozen = build_pinned_dual(arr, self.WINDOW)
            assert len(frozen.vertices) == len(flat.vertices)
            relaxed = build_pinned_dual(arr, self.WINDOW, relax=True)
            assert len(relaxed.vertices) == len(flat.vertices) * (1 << k)
            dec = relaxed.decompose_product()
            assert dec.is_product


class TestClassifyFamilies:
    def test_three_directions_flat(self):
        arr = PeriodicArrangement(
            ((6, 0), (0, 6)), (horizontal(0), vertical(0), diagonal(0))
        )
        result = classify_families(
            arr,
            Window(Fraction(-5, 2), Fraction(-5, 2), Fraction(5, 2), Fraction(5, 2)),
            wall_budget=30,
        )
        assert result.kind == "flat"
        assert result.n == 3
        assert result.flat is not None
        assert result.flat.meta["flat"].n == 3

    def test_two_directions(self):
        arr = PeriodicArrangement(UNIT, (horizontal(0), vertical(0)))
        result = classify_families(arr)
        assert result.kind == "two-families"
        assert result.flat is None

    def test_default_window_catches_every_family(self):
        # No explicit window: the default box must meet all three families
        # even with a coarse lattice and a fractional offset.
        arr = PeriodicArrangement(
            ((4, 0), (0, 4)),
            (horizontal(0), vertical(0), diagonal(Fraction(1, 3))),
        )
        result = classify_families(arr)
        assert result.kind == "flat" and result.n == 3
        assert result.flat.meta["flat"].n == 3

    def test_one_direction_rejected(self):
        arr = PeriodicArrangement(UNIT, (horizontal(0),))
        with pytest.raises(BelowMinimumError):
            classify_families(arr)


class TestArrangementJson:
    def test_round_trip(self):
        arr = PeriodicArrangement(
            ((2, 0), (0, 2)),
            (horizontal(0, mult=2), vertical(Fraction(1, 2))),
            (
                ExtraWall(1, line=Line.canonical(1, 0, 9)),
                ExtraWall(0, spanning=True, id="amb"),
            ),
        )
        again = arrangement_from_json(arrangement_to_json(arr))
        assert again.lattice == arr.lattice
        assert again.lines == arr.lines
        assert len(again.extra_walls) == 2
        assert again.extra_walls[1].spanning

"""Deterministic pseudo-random instances for tests and the CLI.

Every generator is a pure function of its seed and size parameters, so
repeated runs emit byte-identical JSON.  Gluing matrices are sampled
either as words in the standard integer generators or, when an entry
bound is requested, as coprime (a, b) pairs completed to determinant
+-1 by the extended Euclidean algorithm.
"""

from __future__ import annotations

import math
import random

from .errors import InputError
from .graph_manifold import (
    Block,
    Edge,
    EdgeEnd,
    GluingMatrix,
    GraphManifoldDescription,
)
from .halfplane import (
    GeodesicWallPattern,
    RULE_ALWAYS,
    RULE_NEVER,
    WallOrbit,
    within,
)
from .wallspace import (
    Bipartition,
    KIND_BIPARTITION,
    Wall,
    Wallspace,
)

_GEN_S = ((0, -1), (1, 0))
_GEN_T = ((1, 1), (0, 1))
_GEN_J = ((1, 0), (0, -1))


def _mat_mult(m1, m2):
    return tuple(
        tuple(sum(m1[i][k] * m2[k][j] for k in range(2)) for j in range(2))
        for i in range(2)
    )


def _word_matrix(rng: random.Random, length: int):
    mat = ((1, 0), (0, 1))
    for _ in range(length):
        mat = _mat_mult(mat, rng.choice((_GEN_S, _GEN_T, _GEN_J)))
    return mat


def random_gluing_matrix(rng: random.Random, max_entry: int | None = None) -> GluingMatrix:
    """A determinant +-1 matrix with a != 0, resampled until it qualifies."""
    for _ in range(10_000):
        if max_entry is None:
            (a, b), (p, q) = _word_matrix(rng, rng.randint(1, 6))
        else:
            a = rng.choice([n for n in range(-max_entry, max_entry + 1) if n != 0])
            b = rng.randint(-max_entry, max_entry)
            if math.gcd(a, b) != 1:
                continue
            sign = rng.choice((1, -1))
            g, u, v = _extended_gcd(a, -b)
            q0, p0 = u * sign, v * sign
            t = rng.randint(-2, 2)
            p, q = p0 + a * t, q0 + b * t
        if a == 0:
            continue
        try:
            return GluingMatrix(a, b, p, q)
        except InputError:
            continue
    raise InputError("could not sample a gluing matrix")  # pragma: no cover


def _extended_gcd(x: int, y: int):
    if y == 0:
        return (x, 1, 0) if x >= 0 else (-x, -1, 0)
    g, u, v = _extended_gcd(y, x % y)
    return g, v, u - (x // y) * v


def manifold(
    seed: int,
    blocks: int = 2,
    extra_edges: int = 0,
    max_entry: int | None = None,
    free_tori: int = 0,
) -> GraphManifoldDescription:
    """Random fully-glued-by-default graph of blocks on a spanning tree.

    ``extra_edges`` adds loops or multi-edges on top of the tree, and
    ``free_tori`` leaves that many extra boundary components unglued,
    spread deterministically over the blocks.
    """
    if blocks < 1:
        raise InputError("need at least one block")
    rng = random.Random(seed)
    edge_specs = []
    for i in range(1, blocks):
        edge_specs.append((rng.randrange(i), i))
    for _ in range(extra_edges):
        u = rng.randrange(blocks)
        v = rng.randrange(blocks)
        edge_specs.append((u, v))
    if not edge_specs:
        edge_specs.append((0, 0))  # single block: a loop edge

    degree = [0] * blocks
    for u, v in edge_specs:
        degree[u] += 1
        degree[v] += 1

    block_objs = []
    boundary_counts = []
    for i in range(blocks):
        b = degree[i] + (free_tori if i == 0 else 0)
        genus = rng.randint(1, 2) if b <= 2 else rng.randint(0, 2)
        block_objs.append(Block(f"v{i}", genus, b))
        boundary_counts.append(b)

    next_torus = [0] * blocks
    edges = []
    for idx, (u, v) in enumerate(edge_specs):
        m1 = random_gluing_matrix(rng, max_entry)
        tu = next_torus[u]
        next_torus[u] += 1
        tv = next_torus[v]
        next_torus[v] += 1
        edges.append(
            Edge(
                f"e{idx}",
                EdgeEnd(f"v{u}", tu, m1),
                EdgeEnd(f"v{v}", tv, m1.inverse()),
            )
        )
    return GraphManifoldDescription(tuple(block_objs), tuple(edges))


def bipartition_wallspace(seed: int, points: int = 5, walls: int = 8) -> Wallspace:
    """Random distinct bipartitions of a small point set."""
    if points < 2:
        raise InputError("need at least two points")
    rng = random.Random(seed)
    max_walls = (1 << (points - 1)) - 1
    walls = min(walls, max_walls)
    universe = frozenset(range(points))
    chosen = []
    seen = set()
    guard = 0
    while len(chosen) < walls:
        guard += 1
        if guard > 10_000:  # pragma: no cover
            raise InputError("could not sample distinct walls")
        size = rng.randint(1, points - 1)
        side0 = frozenset(rng.sample(range(points), size))
        key = frozenset((side0, universe - side0))
        if key in seen:
            continue
        seen.add(key)
        chosen.append(side0)
    wall_objs = tuple(
        Wall(f"w{i}", Bipartition(s, universe - s)) for i, s in enumerate(chosen)
    )
    return Wallspace(KIND_BIPARTITION, wall_objs, points=points)


def pattern(seed: int, period: int = 2, bounded: bool | None = None) -> GeodesicWallPattern:
    """Random valid crossing pattern, either a two-group unbounded shape
    or a uniformly bounded one; both satisfy betweenness by construction."""
    rng = random.Random(seed)
    if bounded is None:
        bounded = rng.random() < 0.5
    orbits = tuple(WallOrbit(f"o{i}", i) for i in range(period))
    rules = {}
    if bounded or period == 1:
        r = rng.randint(0, 3)
        for i in range(period):
            for j in range(i + 1, period):
                rules[(f"o{i}", f"o{j}")] = within(r)
    else:
        cut = rng.randint(1, period - 1)
        group_a = {f"o{i}" for i in range(cut)}
        for i in range(period):
            for j in range(i + 1, period):
                a, b = f"o{i}", f"o{j}"
                same = (a in group_a) == (b in group_a)
                rules[(a, b)] = RULE_NEVER if same else RULE_ALWAYS
    return GeodesicWallPattern(period, orbits, rules)


def zero_sum_retwist(seed: int, manifold_: GraphManifoldDescription) -> dict:
    rng = random.Random(seed)
    twists = {}
    for block in manifold_.blocks:
        values = [rng.randint(-3, 3) for _ in range(block.boundary - 1)]
        values.append(-sum(values))
        twists[block.id] = values
    return twists


def permutation_cover(seed: int, manifold_: GraphManifoldDescription, degree: int):
    """Cover whose edge lifts follow random permutations of the sheets."""
    from .graph_manifold import CoverEdge, CoverVertex, GraphCover

    rng = random.Random(seed)
    vertices = tuple(
        CoverVertex(f"{b.id}.{i}", b.id) for b in manifold_.blocks for i in range(degree)
    )
    edges = []
    for e in manifold_.edges:
        perm = list(range(degree))
        rng.shuffle(perm)
        for i in range(degree):
            edges.append(
                CoverEdge(
                    f"{e.id}.{i}",
                    e.id,
                    f"{e.end1.block}.{i}",
                    f"{e.end2.block}.{perm[i]}",
                )
            )
    return GraphCover(degree, vertices, tuple(edges))

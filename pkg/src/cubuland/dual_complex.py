"""Cube complexes dual to wallspaces and their combinatorial toolkit.

A vertex is a pairwise-consistent choice of one closed side per wall,
stored as a bitmask over a fixed wall order (bit i set means wall i is
oriented to side 1).  The complex dual to a finite wallspace is grown by
a breadth-first search that flips one wall at a time from the principal
orientation of a basepoint, which realizes exactly the principal
connected component of the construction.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import (
    InputError,
    PartialResultError,
    StructuralFailureError,
)
from .wallspace import (
    Orientation,
    Wallspace,
    geometry_sides_intersect,
    principal_orientation,
)

DEFAULT_VERTEX_BUDGET = 500_000


class CompatTable:
    """Pairwise side compatibility of walls, stored as 4-bit masks.

    ``ok(i, si, j, sj)`` answers whether side ``si`` of wall i meets side
    ``sj`` of wall j; bit ``si*2 + sj`` of ``bits[i][j]`` stores the answer.
    """

    __slots__ = ("n", "bits")

    def __init__(self, n: int, bits):
        self.n = n
        self.bits = bits

    @classmethod
    def from_geometries(cls, geometries: Sequence) -> "CompatTable":
        n = len(geometries)
        bits = [[0b1111] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                mask = 0
                for si in (0, 1):
                    for sj in (0, 1):
                        if geometry_sides_intersect(geometries[i], si, geometries[j], sj):
                            mask |= 1 << (si * 2 + sj)
                bits[i][j] = mask
                bits[j][i] = _transpose_bits(mask)
        return cls(n, bits)

    @classmethod
    def from_predicate(cls, n: int, pred: Callable[[int, int, int, int], bool]) -> "CompatTable":
        bits = [[0b1111] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                mask = 0
                for si in (0, 1):
                    for sj in (0, 1):
                        if pred(i, si, j, sj):
                            mask |= 1 << (si * 2 + sj)
                bits[i][j] = mask
                bits[j][i] = _transpose_bits(mask)
        return cls(n, bits)

    def ok(self, i: int, si: int, j: int, sj: int) -> bool:
        return bool(self.bits[i][j] >> (si * 2 + sj) & 1)

    def cross(self, i: int, j: int) -> bool:
        return i != j and self.bits[i][j] == 0b1111

    def restricted(self, positions: Sequence[int]) -> "CompatTable":
        bits = [[self.bits[i][j] for j in positions] for i in positions]
        return CompatTable(len(positions), bits)


def _transpose_bits(mask: int) -> int:
    out = 0
    for si in (0, 1):
        for sj in (0, 1):
            if mask >> (si * 2 + sj) & 1:
                out |= 1 << (sj * 2 + si)
    return out


@dataclass(frozen=True)
class Hyperplane:
    """A wall that separates at least one edge, with its vertex halfspaces."""

    wall: str
    position: int
    side0: tuple
    side1: tuple


@dataclass(frozen=True)
class ProductDecomposition:
    factors: tuple
    is_product: bool
    obstruction: Orientation | None


class CubeComplex:
    """Immutable cube complex over a fixed ordered wall list.

    ``vertices`` is a deterministic tuple of bitmasks; edges, cubes,
    hyperplanes and the crossing graph are assembled eagerly so instances
    are safe to query concurrently.
    """

    def __init__(self, wall_ids, masks, compat: CompatTable, geometries=None, meta=None):
        self.wall_ids = tuple(wall_ids)
        self.compat = compat
        self.geometries = dict(geometries) if geometries else {}
        self.vertices = tuple(masks)
        self.vertex_index = {m: i for i, m in enumerate(self.vertices)}
        if len(self.vertex_index) != len(self.vertices):
            raise InputError("duplicate vertex orientations")
        self.meta = dict(meta) if meta else {}
        self._assemble()

    # ------------------------------------------------------------------
    # assembly
    # ------------------------------------------------------------------

    def _assemble(self):
        n = len(self.wall_ids)
        index = self.vertex_index
        edges = []
        for idx, m in enumerate(self.vertices):
            for i in range(n):
                if m >> i & 1:
                    continue
                other = index.get(m | (1 << i))
                if other is not None:
                    edges.append((idx, other, i))
        self.edges = tuple(edges)

        # Cubes of dimension k are stored as (base mask, sorted wall tuple)
        # where the base is the corner with every cube wall on side 0.  A
        # cube is complete iff both of its parallel faces in the last wall
        # direction are complete, which drives the level-by-level build.
        levels = {}
        level1 = set()
        for idx, other, i in edges:
            base = self.vertices[idx] & ~(1 << i)
            level1.add((base, (i,)))
        k = 1
        current = level1
        while current:
            levels[k] = current
            nxt = set()
            for base, walls in current:
                top = walls[-1]
                for w in range(top + 1, n):
                    if base >> w & 1:
                        continue
                    if (base | (1 << w), walls) in current:
                        nxt.add((base, walls + (w,)))
            current = nxt
            k += 1
        self.cubes = {
            dim: tuple(sorted(cubes)) for dim, cubes in sorted(levels.items())
        }

        realized = sorted({i for _, _, i in edges})
        hyperplanes = []
        for i in realized:
            side0 = tuple(idx for idx, m in enumerate(self.vertices) if not m >> i & 1)
            side1 = tuple(idx for idx, m in enumerate(self.vertices) if m >> i & 1)
            hyperplanes.append(Hyperplane(self.wall_ids[i], i, side0, side1))
        self.hyperplanes = tuple(hyperplanes)
        self.realized_walls = tuple(realized)
        self.crossing_pairs = tuple(
            (i, j)
            for a, i in enumerate(realized)
            for j in realized[a + 1 :]
            if self.compat.cross(i, j)
        )

    # ------------------------------------------------------------------
    # basic queries
    # ------------------------------------------------------------------

    @property
    def dimension(self) -> int:
        return max(self.cubes) if self.cubes else 0

    def cube_count(self, dim: int) -> int:
        return len(self.cubes.get(dim, ()))

    def contains_mask(self, mask: int) -> bool:
        return mask in self.vertex_index

    def mask_of(self, vertex) -> int:
        """Normalize a vertex argument (mask or Orientation) to a mask."""
        if isinstance(vertex, Orientation):
            return self.orientation_to_mask(vertex)
        return int(vertex)

    def orientation_to_mask(self, orientation: Orientation) -> int:
        assignment = orientation.as_dict()
        if set(assignment) != set(self.wall_ids):
            raise InputError("orientation walls do not match the complex")
        mask = 0
        for i, uid in enumerate(self.wall_ids):
            if assignment[uid] == 1:
                mask |= 1 << i
        return mask

    def orientation(self, mask: int) -> Orientation:
        return Orientation(
            self.wall_ids,
            tuple((mask >> i) & 1 for i in range(len(self.wall_ids))),
        )

    def mask_string(self, mask: int) -> str:
        return "".join(str((mask >> i) & 1) for i in range(len(self.wall_ids)))

    def distance(self, u, v) -> int:
        """Number of walls separating u and v.

        In a full dual complex this equals the 1-skeleton distance; a
        spanned subcomplex can be farther apart internally, which is what
        ``is_isometrically_embedded`` detects.
        """
        return (self.mask_of(u) ^ self.mask_of(v)).bit_count()

    def adjacency(self):
        adj = [[] for _ in self.vertices]
        for a, b, _ in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def skeleton_distances_from(self, start_idx: int, adj=None):
        if adj is None:
            adj = self.adjacency()
        dist = [-1] * len(self.vertices)
        dist[start_idx] = 0
        queue = deque([start_idx])
        while queue:
            cur = queue.popleft()
            for nb in adj[cur]:
                if dist[nb] < 0:
                    dist[nb] = dist[cur] + 1
                    queue.append(nb)
        return dist

    # ------------------------------------------------------------------
    # median and hulls
    # ------------------------------------------------------------------

    def median(self, u, v, w) -> int:
        """Wall-wise majority of three vertices; always a vertex here.

        A missing majority orientation signals a truncated component or a
        bug in the construction, so it raises ``StructuralFailureError``.
        """
        mu, mv, mw = self.mask_of(u), self.mask_of(v), self.mask_of(w)
        for m in (mu, mv, mw):
            if m not in self.vertex_index:
                raise InputError("median arguments must be vertices of the complex")
        maj = (mu & mv) | (mu & mw) | (mv & mw)
        if maj not in self.vertex_index:
            raise StructuralFailureError(
                f"majority orientation {self.mask_string(maj)} is not a vertex"
            )
        return maj

    def convex_hull(self, seeds: Iterable) -> "CubeComplex":
        """Subcomplex spanned by vertices not separated from ``seeds`` by any wall."""
        masks = [self.mask_of(s) for s in seeds]
        if not masks:
            raise InputError("convex hull of an empty vertex set")
        for m in masks:
            if m not in self.vertex_index:
                raise InputError("hull seeds must be vertices of the complex")
        forced0 = 0
        forced1 = ~0
        for m in masks:
            forced0 |= m
            forced1 &= m
        # forced0 bits 0 where every seed chose side 0; forced1 bits 1 where all chose 1.
        hull = [
            m
            for m in self.vertices
            if (m & ~forced0) == 0 and (m & forced1) == forced1
        ]
        return self.spanned(hull)

    def spanned(self, masks: Iterable[int]) -> "CubeComplex":
        """Full subcomplex on a vertex subset, sharing this wall order."""
        keep = set(masks)
        ordered = [m for m in self.vertices if m in keep]
        if len(ordered) != len(keep):
            raise InputError("spanned() expects vertices of the complex")
        return CubeComplex(self.wall_ids, ordered, self.compat, self.geometries)

    def is_subcomplex(self, sub: "CubeComplex") -> bool:
        return self.wall_ids == sub.wall_ids and all(
            m in self.vertex_index for m in sub.vertices
        )

    def cubical_neighborhood(self, sub: "CubeComplex", k: int) -> "CubeComplex":
        """k-fold union of all closed cubes meeting the current subcomplex."""
        if k < 0:
            raise InputError("neighborhood radius must be >= 0")
        if not self.is_subcomplex(sub):
            raise InputError("argument is not a subcomplex of this complex")
        current = set(sub.vertices)
        all_cubes = [cube for dim in self.cubes.values() for cube in dim]
        for _ in range(k):
            grown = set(current)
            for base, walls in all_cubes:
                verts = _cube_vertices(base, walls)
                if any(v in current for v in verts):
                    grown.update(verts)
            if grown == current:
                break
            current = grown
        return self.spanned(current)

    # ------------------------------------------------------------------
    # essential core
    # ------------------------------------------------------------------

    def essential_core(self, sub: "CubeComplex", horizon: int) -> "CubeComplex":
        """Dual complex of the walls essential for ``sub`` at a finite horizon.

        A halfspace of a hyperplane is essential when it holds a vertex of
        ``sub`` at 1-skeleton distance at least ``horizon`` from the
        hyperplane's own carrier on that side; a wall survives when both
        halfspaces are essential.  An empty essential set collapses the
        complex to a single vertex, which is a documented outcome rather
        than an error.
        """
        if horizon < 1:
            raise InputError("horizon must be >= 1")
        if not self.is_subcomplex(sub):
            raise InputError("argument is not a subcomplex of this complex")
        if not sub.vertices:
            raise InputError("subcomplex must be nonempty")
        adj = self.adjacency()
        sub_masks = set(sub.vertices)
        essential = []
        for hp in self.hyperplanes:
            i = hp.position
            carriers = {0: set(), 1: set()}
            for a, b, w in self.edges:
                if w != i:
                    continue
                ma, mb = self.vertices[a], self.vertices[b]
                lo, hi = (a, b) if not ma >> i & 1 else (b, a)
                carriers[0].add(lo)
                carriers[1].add(hi)
            keep = True
            for side, members in ((0, hp.side0), (1, hp.side1)):
                dist = _multi_source_bfs(adj, carriers[side], len(self.vertices))
                far = any(
                    self.vertices[idx] in sub_masks and dist[idx] >= horizon
                    for idx in members
                )
                if not far:
                    keep = False
                    break
            if keep:
                essential.append(i)
        return self.project(essential)

    def project(self, positions: Sequence[int]) -> "CubeComplex":
        """Quotient complex obtained by forgetting all other walls."""
        positions = list(positions)
        ids = [self.wall_ids[i] for i in positions]
        seen = {}
        ordered = []
        for m in self.vertices:
            pm = 0
            for new_i, old_i in enumerate(positions):
                if m >> old_i & 1:
                    pm |= 1 << new_i
            if pm not in seen:
                seen[pm] = True
                ordered.append(pm)
        compat = self.compat.restricted(positions)
        geoms = {uid: g for uid, g in self.geometries.items() if uid in set(ids)}
        return CubeComplex(ids, ordered, compat, geoms)

    # ------------------------------------------------------------------
    # products
    # ------------------------------------------------------------------

    def decompose_product(self, combination_cap: int = 2_000_000) -> ProductDecomposition:
        """Split hyperplanes along non-crossing connectivity into factors.

        Two hyperplanes land in the same factor when a chain of
        non-crossing pairs joins them; each factor complex is the
        projection onto its walls.  The decomposition is a genuine product
        exactly when the factor vertex counts multiply to the vertex count
        here, and otherwise the first missing combination is reported.
        """
        realized = list(self.realized_walls)
        if not realized:
            return ProductDecomposition((), True, None)
        parent = {i: i for i in realized}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, i in enumerate(realized):
            for j in realized[a + 1 :]:
                if not self.compat.cross(i, j):
                    parent[find(i)] = find(j)
        groups = {}
        for i in realized:
            groups.setdefault(find(i), []).append(i)
        components = sorted(groups.values(), key=lambda g: g[0])
        factors = tuple(self.project(sorted(g)) for g in components)

        count = 1
        for f in factors:
            count *= len(f.vertices)
        if count == len(self.vertices):
            return ProductDecomposition(factors, True, None)
        obstruction = None
        if count <= combination_cap:
            constant = self.vertices[0]
            for combo in itertools.product(*(f.vertices for f in factors)):
                mask = constant
                for f, comp, sub in zip(factors, components, combo):
                    for new_i, old_i in enumerate(comp):
                        bit = 1 << old_i
                        if sub >> new_i & 1:
                            mask |= bit
                        else:
                            mask &= ~bit
                if mask not in self.vertex_index:
                    obstruction = self.orientation(mask)
                    break
        return ProductDecomposition(factors, False, obstruction)

    # ------------------------------------------------------------------
    # embeddings
    # ------------------------------------------------------------------

    def is_isometrically_embedded(self, sub: "CubeComplex"):
        """Check d_sub == separating-wall count for all vertex pairs of ``sub``.

        Returns ``(True, None)`` or ``(False, (u_mask, v_mask))`` with a
        violating pair.  The subcomplex must be connected.
        """
        if not self.is_subcomplex(sub):
            raise InputError("argument is not a subcomplex of this complex")
        adj = sub.adjacency()
        n = len(sub.vertices)
        if n == 0:
            raise InputError("subcomplex must be nonempty")
        reach = sub.skeleton_distances_from(0, adj)
        if any(d < 0 for d in reach):
            raise InputError("subcomplex must be connected")
        for start in range(n):
            dist = sub.skeleton_distances_from(start, adj)
            mu = sub.vertices[start]
            for other in range(start + 1, n):
                if dist[other] != (mu ^ sub.vertices[other]).bit_count():
                    return False, (mu, sub.vertices[other])
        return True, None

    # ------------------------------------------------------------------
    # export
    # ------------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "schema": "cubuland/1",
            "kind": "cube-complex",
            "walls": list(self.wall_ids),
            "vertices": [self.mask_string(m) for m in self.vertices],
            "edges": [[a, b, self.wall_ids[i]] for a, b, i in self.edges],
            "cubes": {
                str(dim): [
                    {
                        "base": self.mask_string(base),
                        "walls": [self.wall_ids[i] for i in walls],
                    }
                    for base, walls in cubes
                ]
                for dim, cubes in self.cubes.items()
                if dim >= 2
            },
            "hyperplanes": [
                {"wall": hp.wall, "side0": list(hp.side0), "side1": list(hp.side1)}
                for hp in self.hyperplanes
            ],
            "crossing": [
                [self.wall_ids[i], self.wall_ids[j]] for i, j in self.crossing_pairs
            ],
        }

    def to_dot(self, graph: str = "skeleton") -> str:
        lines = [f"graph {graph} {{"]
        if graph == "skeleton":
            for idx, m in enumerate(self.vertices):
                lines.append(f'  v{idx} [label="{self.mask_string(m)}"];')
            for a, b, i in self.edges:
                lo, hi = min(a, b), max(a, b)
                lines.append(f'  v{lo} -- v{hi} [label="{self.wall_ids[i]}"];')
        elif graph == "crossing":
            for hp in self.hyperplanes:
                lines.append(f'  h{hp.position} [label="{hp.wall}"];')
            for i, j in self.crossing_pairs:
                lines.append(f"  h{i} -- h{j};")
        else:
            raise InputError(f"unknown graph export {graph!r}")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _cube_vertices(base: int, walls: Sequence[int]):
    masks = [base]
    for w in walls:
        masks += [m | (1 << w) for m in masks]
    return masks


def _multi_source_bfs(adj, sources, n):
    dist = [-1] * n
    queue = deque()
    for s in sources:
        dist[s] = 0
        queue.append(s)
    while queue:
        cur = queue.popleft()
        for nb in adj[cur]:
            if dist[nb] < 0:
                dist[nb] = dist[cur] + 1
                queue.append(nb)
    return dist


# ---------------------------------------------------------------------------
# construction from wallspaces
# ---------------------------------------------------------------------------


def build_dual(
    ws: Wallspace,
    basepoint,
    budget: int = DEFAULT_VERTEX_BUDGET,
    *,
    frozen: Iterable[str] = (),
    start: Orientation | None = None,
) -> CubeComplex:
    """Dual cube complex of a finite wallspace, principal component.

    Breadth-first search from the principal orientation of ``basepoint``,
    flipping one wall at a time and admitting a flip when the result stays
    pairwise consistent.  Wall ids in ``frozen`` are never flipped, and
    ``start`` overrides the principal orientation (required when spanning
    walls are present).  Vertex order is the discovery order, with flips
    tried in wall order, so the result is deterministic.
    """
    concrete = ws.concrete_walls()
    uid_pos = {w.uid: i for i, w in enumerate(concrete)}
    compat = CompatTable.from_geometries([w.geometry for w in concrete])

    if start is None:
        start = principal_orientation(ws, basepoint)
    start_mask = 0
    assignment = start.as_dict()
    if set(assignment) != set(uid_pos):
        raise InputError("start orientation must cover exactly the wallspace walls")
    for uid, side in assignment.items():
        if side == 1:
            start_mask |= 1 << uid_pos[uid]

    n = len(concrete)
    for i in range(n):
        si = start_mask >> i & 1
        for j in range(i + 1, n):
            if not compat.ok(i, si, j, start_mask >> j & 1):
                raise InputError(
                    f"start orientation is inconsistent on walls "
                    f"{concrete[i].uid!r} and {concrete[j].uid!r}"
                )

    frozen_positions = set()
    for uid in frozen:
        if uid not in uid_pos:
            raise InputError(f"frozen wall {uid!r} is not in the wallspace")
        frozen_positions.add(uid_pos[uid])

    order = [start_mask]
    seen = {start_mask}
    queue = deque([start_mask])
    while queue:
        m = queue.popleft()
        for i in range(n):
            if i in frozen_positions:
                continue
            m2 = m ^ (1 << i)
            if m2 in seen:
                continue
            s = m2 >> i & 1
            consistent = True
            for j in range(n):
                if j == i:
                    continue
                if not compat.ok(i, s, j, m >> j & 1):
                    consistent = False
                    break
            if not consistent:
                continue
            if len(seen) >= budget:
                raise PartialResultError(
                    f"vertex budget {budget} exceeded while building the dual",
                    vertices=order,
                    frontier=queue,
                    budget=budget,
                )
            seen.add(m2)
            order.append(m2)
            queue.append(m2)

    geoms = {w.uid: w.geometry for w in concrete}
    return CubeComplex([w.uid for w in concrete], order, compat, geoms)


def from_orientations(
    wall_ids,
    masks,
    compat: CompatTable,
    geometries=None,
    validate: bool = False,
) -> CubeComplex:
    """Cube complex on an explicit orientation set over given walls."""
    masks = list(masks)
    if validate:
        n = len(wall_ids)
        for m in masks:
            for i in range(n):
                for j in range(i + 1, n):
                    if not compat.ok(i, m >> i & 1, j, m >> j & 1):
                        raise InputError(
                            f"orientation {m:b} is not pairwise consistent"
                        )
    return CubeComplex(wall_ids, masks, compat, geometries)


# Function-style aliases over the methods above.


def median(complex_: CubeComplex, u, v, w) -> int:
    return complex_.median(u, v, w)


def convex_hull(complex_: CubeComplex, seeds) -> CubeComplex:
    return complex_.convex_hull(seeds)


def cubical_neighborhood(complex_: CubeComplex, sub: CubeComplex, k: int) -> CubeComplex:
    return complex_.cubical_neighborhood(sub, k)


def essential_core(complex_: CubeComplex, sub: CubeComplex, horizon: int) -> CubeComplex:
    return complex_.essential_core(sub, horizon)


def decompose_product(complex_: CubeComplex) -> ProductDecomposition:
    return complex_.decompose_product()


def is_isometrically_embedded(complex_: CubeComplex, sub: CubeComplex):
    return complex_.is_isometrically_embedded(sub)

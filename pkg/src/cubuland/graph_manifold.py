"""Graphs of circle-bundle blocks with integer torus gluings.

A block is a trivial circle bundle over an oriented hyperbolic surface
with boundary; blocks with singular fibers or nonzero Euler number are
rejected at ingestion, since a finite cover always removes them and the
charge arithmetic is only stated for products.  Each edge of the graph
carries, at both ends, an integer matrix expressing the far side's fiber
and section classes in the near (section, fiber) basis of the shared
torus; the two end matrices must be mutually inverse basis changes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import InputError, InvalidRetwistError


@dataclass(frozen=True)
class Block:
    """Trivial circle bundle over a genus-g surface with b boundary circles."""

    id: str
    genus: int
    boundary: int

    def __post_init__(self):
        if self.genus < 0:
            raise InputError(f"block {self.id!r}: genus must be >= 0")
        if self.boundary < 1:
            raise InputError(f"block {self.id!r}: boundary count must be >= 1")
        if 2 - 2 * self.genus - self.boundary >= 0:
            raise InputError(
                f"block {self.id!r}: base surface must be hyperbolic "
                f"(2 - 2g - b < 0), got g={self.genus}, b={self.boundary}"
            )


@dataclass(frozen=True)
class GluingMatrix:
    """Far classes in the near basis: fiber' = a*c + b*h, section' = p*c + q*h."""

    a: int
    b: int
    p: int
    q: int

    def __post_init__(self):
        det = self.a * self.q - self.b * self.p
        if det not in (1, -1):
            raise InputError(f"gluing matrix determinant must be +-1, got {det}")
        if self.a == 0:
            raise InputError(
                "gluing matrix needs a != 0: parallel adjacent fibers would "
                "contradict the minimality of the torus decomposition"
            )

    @property
    def det(self) -> int:
        return self.a * self.q - self.b * self.p

    def basis_change(self):
        """Columns are the far (section', fiber') in the near (c, h) basis."""
        return ((self.p, self.a), (self.q, self.b))

    def inverse(self) -> "GluingMatrix":
        """The matrix the opposite end must carry.

        The basis change C(M) = [[p, a], [q, b]] of the far (section,
        fiber) pair must invert across the torus, and inverting a 2x2
        integer matrix of determinant d = +-1 gives C(M)^-1 =
        [[-b*d, a*d], [q*d, -p*d]].
        """
        d = self.det
        return GluingMatrix(self.a * d, -self.p * d, -self.b * d, self.q * d)

    def to_rows(self):
        """JSON rows (a, p) and (b, q)."""
        return [[self.a, self.p], [self.b, self.q]]

    @classmethod
    def from_rows(cls, rows) -> "GluingMatrix":
        (a, p), (b, q) = rows
        return cls(int(a), int(b), int(p), int(q))


def _mat_mult(m1, m2):
    return tuple(
        tuple(sum(m1[i][k] * m2[k][j] for k in range(2)) for j in range(2))
        for i in range(2)
    )


@dataclass(frozen=True)
class EdgeEnd:
    block: str
    torus: int
    matrix: GluingMatrix


@dataclass(frozen=True)
class Edge:
    id: str
    end1: EdgeEnd
    end2: EdgeEnd


@dataclass(frozen=True)
class GraphManifoldDescription:
    blocks: tuple
    edges: tuple

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "edges", tuple(self.edges))
        ids = [b.id for b in self.blocks]
        if len(set(ids)) != len(ids):
            raise InputError("block ids must be unique")
        if not self.edges:
            raise InputError("a graph manifold description needs at least one edge")
        edge_ids = [e.id for e in self.edges]
        if len(set(edge_ids)) != len(edge_ids):
            raise InputError("edge ids must be unique")
        block_map = {b.id: b for b in self.blocks}
        used = set()
        for e in self.edges:
            for end in (e.end1, e.end2):
                block = block_map.get(end.block)
                if block is None:
                    raise InputError(f"edge {e.id!r} references unknown block {end.block!r}")
                if not 0 <= end.torus < block.boundary:
                    raise InputError(
                        f"edge {e.id!r}: torus index {end.torus} out of range for "
                        f"block {end.block!r}"
                    )
                key = (end.block, end.torus)
                if key in used:
                    raise InputError(
                        f"boundary component {key} is glued by more than one edge end"
                    )
                used.add(key)
            product = _mat_mult(e.end1.matrix.basis_change(), e.end2.matrix.basis_change())
            if product != ((1, 0), (0, 1)):
                raise InputError(
                    f"edge {e.id!r}: end matrices are not mutually inverse basis changes"
                )

    @property
    def block_map(self) -> dict:
        return {b.id: b for b in self.blocks}

    def ends_of_block(self, block_id: str):
        """Glued ends at a block as (edge, end number, EdgeEnd), in edge order."""
        out = []
        for e in self.edges:
            if e.end1.block == block_id:
                out.append((e, 1, e.end1))
            if e.end2.block == block_id:
                out.append((e, 2, e.end2))
        return out

    def free_tori(self, block_id: str):
        glued = {end.torus for _, _, end in self.ends_of_block(block_id)}
        block = self.block_map[block_id]
        return tuple(i for i in range(block.boundary) if i not in glued)

    def fully_glued(self, block_id: str) -> bool:
        return not self.free_tori(block_id)

    def components(self):
        """Connected components of the underlying graph, as block id tuples."""
        parent = {b.id: b.id for b in self.blocks}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            parent[find(e.end1.block)] = find(e.end2.block)
        groups: dict = {}
        for b in self.blocks:
            groups.setdefault(find(b.id), []).append(b.id)
        return tuple(tuple(g) for g in groups.values())


# ---------------------------------------------------------------------------
# homology
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockHomology:
    """H1 of circle x (genus-g surface with b boundary circles).

    Coordinates are (c_1 .. c_b, h, x_1 .. x_2g) with the single relation
    sum(c_i) = 0, so the group is free of rank 2g + b.  A vector is zero
    exactly when its boundary coordinates are all equal and the fiber and
    handle coordinates vanish.
    """

    genus: int
    boundary: int

    @property
    def rank(self) -> int:
        return 2 * self.genus + self.boundary

    @property
    def dim(self) -> int:
        return self.boundary + 1 + 2 * self.genus

    def zero(self):
        return (0,) * self.dim

    def boundary_class(self, i: int):
        if not 0 <= i < self.boundary:
            raise InputError(f"boundary index {i} out of range")
        vec = [0] * self.dim
        vec[i] = 1
        return tuple(vec)

    def fiber_class(self):
        vec = [0] * self.dim
        vec[self.boundary] = 1
        return tuple(vec)

    def add(self, u, v):
        return tuple(a + b for a, b in zip(u, v))

    def scale(self, n: int, u):
        return tuple(n * a for a in u)

    def reduce(self, vec):
        """Canonical representative: last boundary coordinate cleared."""
        t = vec[self.boundary - 1]
        return tuple(
            a - t if i < self.boundary else a for i, a in enumerate(vec)
        )

    def is_zero(self, vec) -> bool:
        cs = vec[: self.boundary]
        if any(c != cs[0] for c in cs):
            return False
        return all(a == 0 for a in vec[self.boundary :])


def product_homology(genus: int, boundary: int) -> BlockHomology:
    """Homology presentation for any circle x surface product, hyperbolic
    base or not (the annulus case is useful on its own)."""
    if genus < 0 or boundary < 1:
        raise InputError("need genus >= 0 and boundary >= 1")
    return BlockHomology(genus, boundary)


def h1_block(block: Block) -> BlockHomology:
    return BlockHomology(block.genus, block.boundary)


@dataclass(frozen=True)
class FiberClass:
    """Class of the neighbouring fiber on a glued torus, in the near basis."""

    a: int
    b: int
    torus: int
    vector: tuple


def neighbor_fiber_class(
    manifold: GraphManifoldDescription, edge_id: str, end: int
) -> FiberClass:
    edge = next((e for e in manifold.edges if e.id == edge_id), None)
    if edge is None:
        raise InputError(f"unknown edge {edge_id!r}")
    if end not in (1, 2):
        raise InputError("end must be 1 or 2")
    e = edge.end1 if end == 1 else edge.end2
    block = manifold.block_map[e.block]
    hom = h1_block(block)
    vec = hom.add(
        hom.scale(e.matrix.a, hom.boundary_class(e.torus)),
        hom.scale(e.matrix.b, hom.fiber_class()),
    )
    return FiberClass(e.matrix.a, e.matrix.b, e.torus, vec)


# ---------------------------------------------------------------------------
# covers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoverVertex:
    id: str
    base: str


@dataclass(frozen=True)
class CoverEdge:
    id: str
    base: str
    end1_vertex: str
    end2_vertex: str


@dataclass(frozen=True)
class GraphCover:
    degree: int
    vertices: tuple
    edges: tuple


@dataclass(frozen=True)
class CoverResult:
    manifold: GraphManifoldDescription
    components: tuple

    @property
    def connected(self) -> bool:
        return len(self.components) == 1


def induced_cover(manifold: GraphManifoldDescription, cover: GraphCover) -> CoverResult:
    """Lift blocks and edges along a covering of the underlying graph.

    Every base block must have exactly ``degree`` lifts and every edge end
    of the base must lift exactly once at each lift of its block (the
    local bijection that makes the map a covering).  Matrices are copied
    to the lifted edge ends, so per-block charge data is preserved; free
    boundary components stay free.  Disconnected covers are returned with
    their components flagged rather than rejected.
    """
    base_blocks = manifold.block_map
    lift_ids = [v.id for v in cover.vertices]
    if len(set(lift_ids)) != len(lift_ids):
        raise InputError("cover vertex ids must be unique")
    per_base: dict = {}
    for v in cover.vertices:
        if v.base not in base_blocks:
            raise InputError(f"cover vertex {v.id!r} lies over unknown block {v.base!r}")
        per_base.setdefault(v.base, []).append(v.id)
    for base_id in base_blocks:
        lifts = per_base.get(base_id, [])
        if len(lifts) != cover.degree:
            raise InputError(
                f"block {base_id!r} must have exactly {cover.degree} lifts, "
                f"found {len(lifts)}"
            )

    base_edges = {e.id: e for e in manifold.edges}
    vertex_base = {v.id: v.base for v in cover.vertices}
    # Each (lift vertex, base edge end) must be matched by exactly one lifted end.
    incidence: dict = {}
    for ce in cover.edges:
        base_edge = base_edges.get(ce.base)
        if base_edge is None:
            raise InputError(f"cover edge {ce.id!r} lies over unknown edge {ce.base!r}")
        for which, lift_vertex in ((1, ce.end1_vertex), (2, ce.end2_vertex)):
            base_end = base_edge.end1 if which == 1 else base_edge.end2
            if vertex_base.get(lift_vertex) != base_end.block:
                raise InputError(
                    f"cover edge {ce.id!r} end {which} attaches to {lift_vertex!r}, "
                    f"which does not lie over block {base_end.block!r}"
                )
            key = (lift_vertex, ce.base, which)
            if key in incidence:
                raise InputError(
                    f"not a covering: {lift_vertex!r} receives end {which} of "
                    f"{ce.base!r} twice"
                )
            incidence[key] = ce.id
    for v in cover.vertices:
        for e in manifold.edges:
            for which, end in ((1, e.end1), (2, e.end2)):
                if end.block != v.base:
                    continue
                if (v.id, e.id, which) not in incidence:
                    raise InputError(
                        f"not a covering: vertex {v.id!r} misses a lift of end "
                        f"{which} of edge {e.id!r}"
                    )

    blocks = tuple(
        Block(v.id, base_blocks[v.base].genus, base_blocks[v.base].boundary)
        for v in cover.vertices
    )
    edges = []
    for ce in cover.edges:
        base_edge = base_edges[ce.base]
        edges.append(
            Edge(
                ce.id,
                EdgeEnd(ce.end1_vertex, base_edge.end1.torus, base_edge.end1.matrix),
                EdgeEnd(ce.end2_vertex, base_edge.end2.torus, base_edge.end2.matrix),
            )
        )
    lifted = GraphManifoldDescription(blocks, tuple(edges))
    return CoverResult(lifted, lifted.components())


# ---------------------------------------------------------------------------
# retwists
# ---------------------------------------------------------------------------


def retwist(
    manifold: GraphManifoldDescription, twists: Mapping[str, Sequence[int]]
) -> GraphManifoldDescription:
    """Change the chosen section of each block by c_i -> c_i + m_i * h.

    The per-block integers must sum to zero so the new curves still bound
    a section.  At an edge end this rewrites the stored matrix by
    b -> b - a*m_near and q -> q - p*m_near, and the fact that the far
    section moved adds m_far times the fiber row to the section row.
    """
    block_map = manifold.block_map
    for block_id, values in twists.items():
        block = block_map.get(block_id)
        if block is None:
            raise InputError(f"retwist references unknown block {block_id!r}")
        if len(values) != block.boundary:
            raise InvalidRetwistError(
                f"block {block_id!r} needs one twist per boundary component"
            )
        if sum(values) != 0:
            raise InvalidRetwistError(
                f"twists on block {block_id!r} must sum to zero"
            )

    def twist_of(block_id, torus):
        values = twists.get(block_id)
        return values[torus] if values is not None else 0

    def rewrite(end: EdgeEnd, far: EdgeEnd) -> EdgeEnd:
        m_near = twist_of(end.block, end.torus)
        m_far = twist_of(far.block, far.torus)
        mat = end.matrix
        a, b, p, q = mat.a, mat.b, mat.p, mat.q
        # Far section moved by m_far * far fiber: row operation.
        p, q = p + m_far * a, q + m_far * b
        # Near basis change c -> c + m_near * h: column operation.
        b, q = b - a * m_near, q - p * m_near
        return EdgeEnd(end.block, end.torus, GluingMatrix(a, b, p, q))

    edges = tuple(
        Edge(e.id, rewrite(e.end1, e.end2), rewrite(e.end2, e.end1))
        for e in manifold.edges
    )
    return GraphManifoldDescription(manifold.blocks, edges)


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def manifold_to_json(manifold: GraphManifoldDescription) -> dict:
    return {
        "blocks": [
            {"id": b.id, "genus": b.genus, "boundary": b.boundary}
            for b in manifold.blocks
        ],
        "edges": [
            {
                "id": e.id,
                "end1": {
                    "block": e.end1.block,
                    "torus": e.end1.torus,
                    "matrix": e.end1.matrix.to_rows(),
                },
                "end2": {
                    "block": e.end2.block,
                    "torus": e.end2.torus,
                    "matrix": e.end2.matrix.to_rows(),
                },
            }
            for e in manifold.edges
        ],
    }


def manifold_from_json(data: Mapping) -> GraphManifoldDescription:
    blocks = []
    for entry in data.get("blocks", ()):
        try:
            blocks.append(Block(entry["id"], int(entry["genus"]), int(entry["boundary"])))
        except KeyError as exc:
            raise InputError(f"block entry missing field {exc}") from exc
    edges = []
    for i, entry in enumerate(data.get("edges", ())):
        def parse_end(raw):
            return EdgeEnd(
                raw["block"], int(raw["torus"]), GluingMatrix.from_rows(raw["matrix"])
            )

        try:
            edges.append(
                Edge(entry.get("id", f"e{i}"), parse_end(entry["end1"]), parse_end(entry["end2"]))
            )
        except KeyError as exc:
            raise InputError(f"edge entry missing field {exc}") from exc
    return GraphManifoldDescription(tuple(blocks), tuple(edges))


def cover_to_json(cover: GraphCover) -> dict:
    return {
        "degree": cover.degree,
        "vertices": [{"id": v.id, "base": v.base} for v in cover.vertices],
        "edges": [
            {
                "id": e.id,
                "base": e.base,
                "end1_vertex": e.end1_vertex,
                "end2_vertex": e.end2_vertex,
            }
            for e in cover.edges
        ],
    }


def cover_from_json(data: Mapping) -> GraphCover:
    try:
        return GraphCover(
            int(data["degree"]),
            tuple(CoverVertex(v["id"], v["base"]) for v in data["vertices"]),
            tuple(
                CoverEdge(
                    e.get("id", f"ce{i}"), e["base"], e["end1_vertex"], e["end2_vertex"]
                )
                for i, e in enumerate(data["edges"])
            ),
        )
    except KeyError as exc:
        raise InputError(f"cover JSON missing field {exc}") from exc

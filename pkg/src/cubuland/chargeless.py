"""Charge of blocks, integer witnesses, and turbine-collection manifests.

The charge of a fully glued block is the exact rational sum of b/a over
its glued edge ends.  The block admits nonzero integers n per end whose
weighted neighbour-fiber classes cancel in homology exactly when the
charge vanishes: the boundary coordinates force every n*a to share one
value t, and the fiber coordinate then demands t times the charge to be
zero.  The canonical witness scales t to the least common multiple of
the |a| values, and every emitted witness is re-verified by exact
substitution into the homology presentation.

Blocks with free boundary never satisfy the literal condition under the
nonzero-witness convention, because the free boundary coordinates force
t = 0; the report marks such blocks interpretation-sensitive and also
answers the variant computed relative to the free boundary, asserting
neither reading as canonical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import (
    BudgetError,
    InputError,
    StructuralFailureError,
    UnsupportedConfigurationError,
)
from .graph_manifold import (
    GraphManifoldDescription,
    h1_block,
    retwist,
)


@dataclass(frozen=True)
class EndWitness:
    edge: str
    end: int
    torus: int
    a: int
    b: int
    n: int


@dataclass(frozen=True)
class BlockVerdict:
    block: str
    charge: Fraction | None
    chargeless: bool
    witness: tuple | None
    obstruction: str | None = None
    interpretation_sensitive: bool = False
    relative_chargeless: bool | None = None


@dataclass(frozen=True)
class ChargeReport:
    blocks: tuple
    chargeless: bool

    def block(self, block_id: str) -> BlockVerdict:
        for verdict in self.blocks:
            if verdict.block == block_id:
                return verdict
        raise InputError(f"no verdict for block {block_id!r}")


def block_charge(manifold: GraphManifoldDescription, block_id: str) -> Fraction:
    """Sum of b/a over the block's glued ends, as an exact rational."""
    if block_id not in manifold.block_map:
        raise InputError(f"unknown block {block_id!r}")
    if not manifold.fully_glued(block_id):
        raise UnsupportedConfigurationError(
            f"block {block_id!r} has free boundary; the closed-form charge needs a "
            "fully glued block, use the literal solver via is_chargeless instead"
        )
    total = Fraction(0)
    for _, _, end in manifold.ends_of_block(block_id):
        total += Fraction(end.matrix.b, end.matrix.a)
    return total


def _substitute(manifold, block_id, ns):
    """Exact class of sum n_e * (a_e c_i + b_e h) in the block homology."""
    hom = h1_block(manifold.block_map[block_id])
    total = hom.zero()
    for (edge, which, end), n in zip(manifold.ends_of_block(block_id), ns):
        term = hom.add(
            hom.scale(n * end.matrix.a, hom.boundary_class(end.torus)),
            hom.scale(n * end.matrix.b, hom.fiber_class()),
        )
        total = hom.add(total, term)
    return hom, total


def _closed_form_verdict(manifold, block_id) -> BlockVerdict:
    charge = block_charge(manifold, block_id)
    ends = manifold.ends_of_block(block_id)
    if charge != 0:
        return BlockVerdict(
            block_id,
            charge,
            False,
            None,
            obstruction=f"charge {charge} is nonzero",
        )
    t = math.lcm(*(abs(end.matrix.a) for _, _, end in ends))
    ns = [t // end.matrix.a for _, _, end in ends]
    hom, total = _substitute(manifold, block_id, ns)
    if not hom.is_zero(total):
        raise StructuralFailureError(
            f"canonical witness for block {block_id!r} failed exact substitution"
        )
    witness = tuple(
        EndWitness(edge.id, which, end.torus, end.matrix.a, end.matrix.b, n)
        for (edge, which, end), n in zip(ends, ns)
    )
    return BlockVerdict(block_id, charge, True, witness)


def _free_boundary_verdict(manifold, block_id) -> BlockVerdict:
    """Literal solver for a block with free boundary components.

    Nonzero coefficients on the glued boundary classes cannot all match a
    zero coefficient on the free ones, so the literal answer is always
    negative; the relative variant drops the free coordinates and reduces
    to the closed-form charge over the glued ends.
    """
    ends = manifold.ends_of_block(block_id)
    glued_charge = sum(
        (Fraction(end.matrix.b, end.matrix.a) for _, _, end in ends), Fraction(0)
    )
    relative = bool(ends) and glued_charge == 0
    return BlockVerdict(
        block_id,
        glued_charge if ends else None,
        False,
        None,
        obstruction=(
            "free boundary classes force the shared coefficient t to vanish, "
            "which contradicts nonzero witnesses"
            if ends
            else "block has no glued ends"
        ),
        interpretation_sensitive=True,
        relative_chargeless=relative,
    )


def is_chargeless(manifold: GraphManifoldDescription) -> ChargeReport:
    """Per-block verdicts plus the manifold-level conjunction.

    Fully glued blocks: chargeless iff the charge vanishes, with the lcm
    witness attached and verified.  Free-boundary blocks: literal verdict
    (always negative under the nonzero-witness convention) plus the
    relative variant, flagged interpretation-sensitive.
    """
    verdicts = []
    for block in manifold.blocks:
        if manifold.fully_glued(block.id):
            verdicts.append(_closed_form_verdict(manifold, block.id))
        else:
            verdicts.append(_free_boundary_verdict(manifold, block.id))
    return ChargeReport(tuple(verdicts), all(v.chargeless for v in verdicts))


@dataclass(frozen=True)
class BruteForceResult:
    witness: tuple | None
    exhausted_at: int | None

    @property
    def found(self) -> bool:
        return self.witness is not None


def _witness_search_chunk(args):
    """Scan one slice of the grid (fixed first coordinate); module level so
    the parallel path can ship it to worker processes."""
    manifold, block_id, n_max, first = args
    ends = manifold.ends_of_block(block_id)
    hom = h1_block(manifold.block_map[block_id])
    values = [n for n in range(-n_max, n_max + 1) if n != 0]
    end_terms = []
    for _, _, end in ends:
        base = hom.add(
            hom.scale(end.matrix.a, hom.boundary_class(end.torus)),
            hom.scale(end.matrix.b, hom.fiber_class()),
        )
        end_terms.append({n: hom.scale(n, base) for n in values})
    k = len(ends)
    found = None

    def rec(depth, partial, chosen):
        nonlocal found
        if found is not None:
            return
        if depth == k:
            if hom.is_zero(partial):
                found = tuple(chosen)
            return
        for n in values:
            rec(depth + 1, hom.add(partial, end_terms[depth][n]), chosen + [n])
            if found is not None:
                return

    rec(1, end_terms[0][first], [first])
    return found


def brute_force_witness(
    manifold: GraphManifoldDescription,
    block_id: str,
    n_max: int,
    cap: int = 5_000_000,
    parallel: bool = False,
) -> BruteForceResult:
    """Search nonzero integer vectors in [-N, N]^k by direct substitution.

    Returns the lexicographically least witness in the iteration order
    -N, .., -1, 1, .., N per coordinate, or the exhaustion bound.  This
    is the independent oracle for the closed-form path: it never looks at
    the charge, only at exact homology arithmetic.  With ``parallel`` the
    grid is sliced on the first coordinate and the slices may run in any
    order; merging keeps the first hit in slice order, so the outcome is
    schedule independent.
    """
    if n_max < 1:
        raise InputError("n_max must be >= 1")
    ends = manifold.ends_of_block(block_id)
    if not ends:
        raise InputError(f"block {block_id!r} has no glued ends to weight")
    k = len(ends)
    space = (2 * n_max) ** k
    if space > cap:
        raise BudgetError(
            f"search space {space} exceeds the cap {cap}", count=space, budget=cap
        )
    values = [n for n in range(-n_max, n_max + 1) if n != 0]
    chunks = [(manifold, block_id, n_max, first) for first in values]
    found = None
    if parallel:
        from concurrent.futures import ProcessPoolExecutor

        try:
            with ProcessPoolExecutor() as pool:
                for result in pool.map(_witness_search_chunk, chunks):
                    if result is not None:
                        found = result
                        break
        except (OSError, PermissionError):  # pragma: no cover
            parallel = False
    if not parallel:
        for chunk in chunks:
            result = _witness_search_chunk(chunk)
            if result is not None:
                found = result
                break
    if found is None:
        return BruteForceResult(None, n_max)
    witness = tuple(
        EndWitness(edge.id, which, end.torus, end.matrix.a, end.matrix.b, n)
        for (edge, which, end), n in zip(ends, found)
    )
    return BruteForceResult(witness, None)


# ---------------------------------------------------------------------------
# turbine manifests
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnnulusEntry:
    edge: str
    end: int
    adjacent_block: str
    copies: int
    slope: tuple  # (n*a, n*b) on the torus, in the near (c_i, h) basis
    torus: int


@dataclass(frozen=True)
class TurbineBlockEntry:
    block: str
    surface_copies: int
    annuli: tuple


@dataclass(frozen=True)
class BoundaryAnnulus:
    block: str
    torus: int


@dataclass(frozen=True)
class TurbineManifest:
    blocks: tuple
    boundary_annuli: tuple


def turbine_manifest(
    manifold: GraphManifoldDescription, report: ChargeReport
) -> TurbineManifest:
    """Counts of doubled surfaces and vertical annuli realizing a witness.

    Each block contributes two parallel surface copies; each glued end
    contributes 2|n| vertical annuli in the adjacent block with slope
    n * (a c_i + b h); each free boundary torus contributes one vertical
    annulus entry of its own.
    """
    if not report.chargeless:
        raise InputError("turbine manifests need a chargeless report")
    blocks = []
    for verdict in report.blocks:
        annuli = []
        edge_map = {e.id: e for e in manifold.edges}
        for w in verdict.witness or ():
            edge = edge_map[w.edge]
            far_end = edge.end2 if w.end == 1 else edge.end1
            annuli.append(
                AnnulusEntry(
                    w.edge,
                    w.end,
                    far_end.block,
                    2 * abs(w.n),
                    (w.n * w.a, w.n * w.b),
                    w.torus,
                )
            )
        blocks.append(TurbineBlockEntry(verdict.block, 2, tuple(annuli)))
    boundary = []
    for block in manifold.blocks:
        for torus in manifold.free_tori(block.id):
            boundary.append(BoundaryAnnulus(block.id, torus))
    manifest = TurbineManifest(tuple(blocks), tuple(boundary))
    for entry in manifest.blocks:
        for annulus in entry.annuli:
            if annulus.copies <= 0 or annulus.copies % 2:
                raise StructuralFailureError("annulus counts must be even and positive")
    return manifest


def retwist_invariance_check(
    manifold: GraphManifoldDescription, twists: Mapping[str, Sequence[int]]
) -> bool:
    """Whether the verdict (global and per block) survives a zero-sum retwist."""
    before = is_chargeless(manifold)
    after = is_chargeless(retwist(manifold, twists))
    if before.chargeless != after.chargeless:
        return False
    flags_before = {v.block: v.chargeless for v in before.blocks}
    flags_after = {v.block: v.chargeless for v in after.blocks}
    return flags_before == flags_after


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def report_to_json(report: ChargeReport) -> dict:
    return {
        "schema": "cubuland/1",
        "kind": "charge-report",
        "chargeless": report.chargeless,
        "blocks": [
            {
                "block": v.block,
                "charge": str(v.charge) if v.charge is not None else None,
                "chargeless": v.chargeless,
                "witness": (
                    [
                        {
                            "edge": w.edge,
                            "end": w.end,
                            "torus": w.torus,
                            "n": w.n,
                        }
                        for w in v.witness
                    ]
                    if v.witness
                    else None
                ),
                "obstruction": v.obstruction,
                "interpretation_sensitive": v.interpretation_sensitive,
                "relative_chargeless": v.relative_chargeless,
            }
            for v in report.blocks
        ],
    }


def manifest_to_json(manifest: TurbineManifest) -> dict:
    return {
        "schema": "cubuland/1",
        "kind": "turbine-manifest",
        "blocks": [
            {
                "block": entry.block,
                "surface_copies": entry.surface_copies,
                "annuli": [
                    {
                        "edge": a.edge,
                        "end": a.end,
                        "adjacent_block": a.adjacent_block,
                        "copies": a.copies,
                        "slope": list(a.slope),
                        "torus": a.torus,
                    }
                    for a in entry.annuli
                ],
            }
            for entry in manifest.blocks
        ],
        "boundary_annuli": [
            {"block": b.block, "torus": b.torus} for b in manifest.boundary_annuli
        ],
    }

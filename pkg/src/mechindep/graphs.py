"""Factor graphs over Jacobian columns, their components, rank-additive row
partitions, and the four-way block-structure audit.

The block-structure audit cross-checks independent characterizations of the
maximal number of diagonal blocks obtainable from a matrix by invertible column
operations: the finest rank-additive row partition, an explicitly constructed
block-diagonalizing basis, the component count of the disjointness graph in
that basis, and a randomized sweep that can only under-count.  Disagreement is
a bug by construction and raises InternalError.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .basis import BlockSpec
from .certificates import Certificate, inputs_digest
from .core import SupportMask, Tolerance, as_matrix, column_supports, null_space, pitchfork, rank
from .errors import DegenerateColumn, InternalError, InvalidInput, RankError, SizeError

PARTITION_CAP = 16


@dataclass(frozen=True)
class FactorGraph:
    """Undirected graph on 1-based column (or coordinate) indices."""

    kind: str  # "D" | "M" | "H2"
    n: int
    edges: frozenset  # of (i, j) pairs with i < j

    def neighbors(self, v: int) -> set[int]:
        out = set()
        for a, b in self.edges:
            if a == v:
                out.add(b)
            elif b == v:
                out.add(a)
        return out


@dataclass(frozen=True)
class RowPartition:
    """Disjoint 1-based row groups covering the rows, sorted by smallest member."""

    groups: tuple[tuple[int, ...], ...]


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def build_graph(obj, kind: str = "D", tol: Tolerance | None = None) -> FactorGraph:
    """Disjointness graph (kind "D": edge iff column supports intersect),
    non-pitchfork graph (kind "M": edge iff one support contains the other),
    or cross-Hessian graph (kind "H2": edge iff the (a,b) Hessian slice is
    nonzero) on the latent coordinates."""
    tol = tol or Tolerance.default()
    if kind in ("D", "M"):
        M = as_matrix(obj)
        supports = column_supports(M, tol)
        n = M.shape[1]
        if kind == "M" and any(len(s) == 0 for s in supports):
            empty = [j + 1 for j, s in enumerate(supports) if len(s) == 0]
            raise DegenerateColumn(f"zero columns {empty} break pitchfork semantics")
        edges = set()
        for a in range(n):
            for b in range(a + 1, n):
                if kind == "D":
                    if supports[a].intersects(supports[b]):
                        edges.add((a + 1, b + 1))
                else:
                    if not pitchfork(supports[a], supports[b]):
                        edges.add((a + 1, b + 1))
        return FactorGraph(kind=kind, n=n, edges=frozenset(edges))
    if kind == "H2":
        T = np.asarray(obj, dtype=float)
        if T.ndim != 3 or T.shape[1] != T.shape[2]:
            raise InvalidInput(f"H2 graph needs a (d_x, d_s, d_s) tensor, got {T.shape}")
        if not np.all(np.isfinite(T)):
            raise InvalidInput("tensor contains non-finite entries")
        n = T.shape[1]
        thr = tol.threshold(np.abs(T).max() if T.size else 0.0)
        edges = set()
        for a in range(n):
            for b in range(a + 1, n):
                if max(np.abs(T[:, a, b]).max(), np.abs(T[:, b, a]).max()) > thr:
                    edges.add((a + 1, b + 1))
        return FactorGraph(kind=kind, n=n, edges=frozenset(edges))
    raise InvalidInput(f"unknown graph kind {kind!r}")


def components(g: FactorGraph) -> list[tuple[int, ...]]:
    """Connected components as sorted vertex tuples, ordered by smallest vertex."""
    uf = _UnionFind(g.n + 1)
    for a, b in g.edges:
        uf.union(a, b)
    comps: dict[int, list[int]] = {}
    for v in range(1, g.n + 1):
        comps.setdefault(uf.find(v), []).append(v)
    return sorted((tuple(sorted(c)) for c in comps.values()), key=lambda c: c[0])


def to_dot(g: FactorGraph, name: str = "factors") -> str:
    """DOT text with one subgraph cluster per connected component."""
    lines = [f"graph {name} {{"]
    lines.append(f'  label="{g.kind} graph";')
    for ci, comp in enumerate(components(g)):
        lines.append(f"  subgraph cluster_{ci} {{")
        lines.append(f'    label="component {ci + 1}";')
        for v in comp:
            lines.append(f'    v{v} [label="{v}"];')
        for a, b in sorted(g.edges):
            if a in comp:
                lines.append(f"    v{a} -- v{b};")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _nonzero_rows(M: np.ndarray, thr: float) -> list[int]:
    return [r for r in range(M.shape[0]) if np.abs(M[r]).max() > thr]


def _partition_with_zeros(parts0: list[list[int]], zero_rows: list[int]) -> RowPartition:
    groups = sorted((sorted(p) for p in parts0), key=lambda p: p[0])
    if zero_rows:
        groups[0] = sorted(groups[0] + zero_rows)
        groups = sorted(groups, key=lambda p: p[0])
    return RowPartition(tuple(tuple(r + 1 for r in p) for p in groups))


def _two_splits(M: np.ndarray, rows: list[int], tol: Tolerance, thr: float):
    """Yield rank-additive 2-partitions (P1, P2) of the given nonzero rows."""
    total = rank(M[rows, :], tol, thr=thr)
    head, rest = rows[0], rows[1:]
    for size in range(0, len(rest)):
        for extra in combinations(rest, size):
            P1 = [head, *extra]
            in1 = set(P1)
            P2 = [r for r in rows if r not in in1]
            if not P2:
                continue
            r1 = rank(M[P1, :], tol, thr=thr)
            r2 = rank(M[P2, :], tol, thr=thr)
            if r1 + r2 == total:
                yield P1, P2


def rank_additive_partitions(
    M, parts: int = 2, tol: Tolerance | None = None, cap: int = PARTITION_CAP
) -> list[RowPartition]:
    """Row partitions P with rank(M) equal to the sum of the parts' ranks.

    parts == 2 enumerates every 2-partition of the nonzero rows (capped).
    parts > 2 returns the unique finest partition found by recursive splitting,
    as a single-element list (rank-additive splits commute, so the recursion
    order cannot change the result).  Zero rows join the first group.
    """
    tol = tol or Tolerance.default()
    M = as_matrix(M)
    if parts < 2:
        raise InvalidInput("parts must be >= 2")
    thr = tol.matrix_threshold(M)
    nz = _nonzero_rows(M, thr)
    zero_rows = [r for r in range(M.shape[0]) if r not in set(nz)]
    if len(nz) > cap:
        raise SizeError(f"partition search capped at {cap} nonzero rows, got {len(nz)}")
    if len(nz) < 2:
        return []
    if parts == 2:
        return [
            _partition_with_zeros([P1, P2], zero_rows)
            for P1, P2 in _two_splits(M, nz, tol, thr)
        ]
    finest = _finest_groups(M, nz, tol, thr)
    if len(finest) < 2:
        return []
    return [_partition_with_zeros(finest, zero_rows)]


def _finest_groups(M: np.ndarray, rows: list[int], tol: Tolerance, thr: float) -> list[list[int]]:
    for P1, P2 in _two_splits(M, rows, tol, thr):
        return _finest_groups(M, P1, tol, thr) + _finest_groups(M, P2, tol, thr)
    return [rows]


def finest_rank_additive_partition(M, tol: Tolerance | None = None) -> RowPartition:
    """The unique finest rank-additive row partition (zero rows in group one)."""
    tol = tol or Tolerance.default()
    M = as_matrix(M)
    thr = tol.matrix_threshold(M)
    nz = _nonzero_rows(M, thr)
    zero_rows = [r for r in range(M.shape[0]) if r not in set(nz)]
    if len(nz) > PARTITION_CAP:
        raise SizeError(
            f"partition search capped at {PARTITION_CAP} nonzero rows, got {len(nz)}"
        )
    if not nz:
        return RowPartition((tuple(r + 1 for r in zero_rows),)) if zero_rows else RowPartition(())
    groups = _finest_groups(M, nz, tol, thr)
    return _partition_with_zeros(groups, zero_rows)


def block_structure_audit(
    M,
    K: int,
    tol: Tolerance | None = None,
    draws: int = 200,
    seed: int = 0,
) -> Certificate:
    """Decide whether K is the maximal number of independent mechanisms in M.

    Route a: the finest rank-additive row partition has F groups.
    Route b: a basis assembled from the groups' complementary null spaces makes
        M block-diagonal with F verified diagonal blocks under a row sort.
    Route c: the disjointness graph of M in that basis has F components.
    Route d (sampling): over seeded invertible mixings, the component count
        never exceeds F (it can under-count; the witness basis attains F).
    The certificate holds iff F == K.  Any disagreement among the routes
    raises InternalError.
    """
    tol = tol or Tolerance.default()
    M = as_matrix(M)
    if K < 1:
        raise InvalidInput("K must be >= 1")
    n = M.shape[1]
    if rank(M, tol) < n:
        raise RankError("block-structure audit needs full column rank")

    partition = finest_rank_additive_partition(M, tol)
    groups0 = [[r - 1 for r in g] for g in partition.groups]
    F = len(groups0)

    # route b: basis columns for group k solve M_row c = 0 for rows outside k
    thr = tol.matrix_threshold(M)
    blocks_cols: list[np.ndarray] = []
    col_counts = []
    for k, g in enumerate(groups0):
        outside = [r for r in range(M.shape[0]) if r not in set(g)]
        N = null_space(M[outside, :], tol, thr=thr) if outside else np.eye(n)
        expected_dim = rank(M[g, :], tol, thr=thr)
        if N.shape[1] != expected_dim:
            raise InternalError(
                f"group {k + 1}: null dimension {N.shape[1]} != group rank {expected_dim}"
            )
        blocks_cols.append(N)
        col_counts.append(N.shape[1])
    B = np.column_stack(blocks_cols) if blocks_cols else np.eye(n)
    if B.shape[1] != n or rank(B, tol) < n:
        raise InternalError("constructed basis is not invertible")
    C = M @ B
    thr_c = tol.matrix_threshold(C)
    col_start = np.cumsum([0] + col_counts)
    for k, g in enumerate(groups0):
        outside = [r for r in range(M.shape[0]) if r not in set(g)]
        cols = range(col_start[k], col_start[k + 1])
        if outside and np.abs(C[np.ix_(outside, list(cols))]).max() > thr_c:
            raise InternalError(f"witness basis fails block-diagonality at group {k + 1}")

    # route c: component count of the disjointness graph in the witness basis
    graph_comps = components(build_graph(C, "D", tol))
    if len(graph_comps) != F:
        raise InternalError(
            f"graph route found {len(graph_comps)} components, partition route {F}"
        )

    # route d: randomized invertible mixings can only under-count
    rng = np.random.default_rng(seed)
    sampled_max = 0
    for _ in range(draws):
        R = rng.standard_normal((n, n))
        attempts = 0
        while rank(R, tol) < n:
            R = rng.standard_normal((n, n))
            attempts += 1
            if attempts > 100:
                raise InternalError("could not draw an invertible mixing")
        count = len(components(build_graph(M @ R, "D", tol)))
        if count > F:
            raise InternalError(
                f"sampled mixing produced {count} components, exceeding the maximum {F}"
            )
        sampled_max = max(sampled_max, count)

    row_order = [r for g in partition.groups for r in g]
    return Certificate(
        criterion="blockStructure",
        holds=(F == K),
        witness={
            "claimedK": K,
            "maxComponents": F,
            "partition": [list(g) for g in partition.groups],
            "rowOrder": row_order,
            "basis": [[round(float(x), 12) + 0.0 for x in row] for row in B],
            "sampledMax": int(sampled_max),
            "draws": int(draws),
            "seed": int(seed),
        },
        notes=(
            "partition, witness-basis, and graph routes agreed on the maximum; "
            "the randomized sweep can only under-count and did not exceed it",
        ),
        inputs_digest=inputs_digest(M, K),
    )


def blocks_from_components(comps: list[tuple[int, ...]]) -> BlockSpec | None:
    """When components are contiguous column ranges in order, the induced BlockSpec."""
    expected = 1
    sizes = []
    for comp in comps:
        if comp[0] != expected or list(comp) != list(range(comp[0], comp[0] + len(comp))):
            return None
        sizes.append(len(comp))
        expected += len(comp)
    return BlockSpec(tuple(sizes))

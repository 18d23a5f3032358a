"""Factor graphs, rank-additive partitions, and the block-structure audit."""

import numpy as np
import pytest

from mechindep.basis import BlockSpec
from mechindep.errors import DegenerateColumn, InternalError, InvalidInput, SizeError
from mechindep.graphs import (
    block_structure_audit,
    blocks_from_components,
    build_graph,
    components,
    finest_rank_additive_partition,
    rank_additive_partitions,
    to_dot,
)

from golden import GOLDEN, MAT_DISJOINT
from oracles import oracle_components, oracle_finest_partition


def _planted(rng, sizes, rows_per, lo=-3, hi=4):
    """Block-diagonal integer matrix with dense nonzero blocks."""
    total = sum(sizes)
    M = np.zeros((rows_per * len(sizes), total))
    row = 0
    col = 0
    for s in sizes:
        while True:
            B = rng.integers(lo, hi, size=(rows_per, s)).astype(float)
            if np.linalg.matrix_rank(B) == s and np.all(np.abs(B).sum(axis=1) > 0):
                break
        M[row : row + rows_per, col : col + s] = B
        row += rows_per
        col += s
    return M


def test_d_graph_components_match_golden():
    for name, gold in GOLDEN.items():
        M = np.array(gold["matrix"], dtype=float)
        comps = components(build_graph(M, "D"))
        assert [set(c) for c in comps] == [set(c) for c in gold["d_components"]], name


def test_d_graph_matches_adjacency_oracle():
    rng = np.random.default_rng(3)
    for _ in range(30):
        M = rng.integers(-2, 3, size=(5, 4)).astype(float)
        if np.abs(M).max() == 0:
            continue
        g = build_graph(M, "D")
        sups = [set(np.flatnonzero(np.abs(M[:, j]) > 0)) for j in range(4)]
        edges = {
            (a + 1, b + 1)
            for a in range(4)
            for b in range(a + 1, 4)
            if sups[a] & sups[b]
        }
        assert set(g.edges) == edges
        assert [set(c) for c in components(g)] == [
            set(x + 1 for x in c) for c in oracle_components(4, edges={(a - 1, b - 1) for a, b in edges})
        ]


def test_m_graph_and_degenerate_column():
    A = np.array(GOLDEN["A"]["matrix"], dtype=float)
    g = build_graph(A, "M")
    assert g.edges == frozenset()          # both columns pitchfork
    assert len(components(g)) == 2
    with pytest.raises(DegenerateColumn):
        build_graph(np.array([[1.0, 0.0], [2.0, 0.0]]), "M")


def test_h2_graph_components():
    T = np.zeros((2, 3, 3))
    T[0, 0, 0] = 1.0
    T[1, 1, 2] = 2.0
    T[1, 2, 1] = 2.0
    g = build_graph(T, "H2")
    assert g.edges == frozenset({(2, 3)})
    assert [set(c) for c in components(g)] == [{1}, {2, 3}]


def test_two_partitions_of_diagonal():
    parts = rank_additive_partitions(np.diag([1.0, 2.0, 3.0]), 2)
    groups = sorted(tuple(tuple(g) for g in p.groups) for p in parts)
    assert groups == [((1,), (2, 3)), ((1, 2), (3,)), ((1, 3), (2,))]


def test_golden_a_admits_no_partition():
    A = np.array(GOLDEN["A"]["matrix"], dtype=float)
    assert rank_additive_partitions(A, 2) == []
    fin = finest_rank_additive_partition(A)
    assert len(fin.groups) == GOLDEN["A"]["finest_parts"]


def test_finest_partition_matches_oracle():
    rng = np.random.default_rng(9)
    for _ in range(25):
        m, n = int(rng.integers(2, 7)), int(rng.integers(1, 4))
        M = rng.integers(-2, 3, size=(m, n)).astype(float)
        if np.abs(M).max() == 0:
            continue
        got = finest_rank_additive_partition(M)
        want = oracle_finest_partition([[int(x) for x in row] for row in M])
        got_nz = sorted(
            sorted(r for r in g if np.abs(M[r - 1]).max() > 0) for g in got.groups
        )
        got_nz = [g for g in got_nz if g]
        want1 = sorted(sorted(r + 1 for r in g) for g in want)
        assert got_nz == want1, M


def test_zero_rows_join_first_group():
    M = np.array(MAT_DISJOINT, dtype=float)
    M2 = np.vstack([M, np.zeros((1, 2))])
    fin = finest_rank_additive_partition(M2)
    assert [list(g) for g in fin.groups] == [[1, 2, 5], [3, 4]]


def test_partition_guards():
    with pytest.raises(InvalidInput):
        rank_additive_partitions(np.eye(2), 1)
    with pytest.raises(SizeError):
        rank_additive_partitions(np.eye(17), 2)


def test_audit_single_block_golden():
    A = np.array(GOLDEN["A"]["matrix"], dtype=float)
    cert = block_structure_audit(A, 1)
    assert cert.holds
    assert cert.witness["maxComponents"] == 1
    assert cert.witness["sampledMax"] <= 1
    assert cert.criterion == "blockStructure"


def test_audit_planted_blocks():
    rng = np.random.default_rng(17)
    M = _planted(rng, (2, 2), 4)
    good = block_structure_audit(M, 2)
    assert good.holds and good.witness["maxComponents"] == 2
    bad = block_structure_audit(M, 1)
    assert not bad.holds and bad.witness["maxComponents"] == 2
    # sampling route never exceeded the constructive maximum
    assert good.witness["sampledMax"] <= 2


def test_audit_routes_agree_on_random_matrices():
    rng = np.random.default_rng(29)
    done = 0
    while done < 30:
        n = int(rng.integers(1, 5))
        m = int(rng.integers(n, 9))
        M = rng.integers(-3, 4, size=(m, n)).astype(float)
        if np.linalg.matrix_rank(M) < n:
            continue
        cert = block_structure_audit(M, 1, draws=40, seed=done)
        want = len(oracle_finest_partition([[int(x) for x in row] for row in M]))
        assert cert.witness["maxComponents"] == want
        done += 1


def test_audit_seed_determinism():
    rng = np.random.default_rng(31)
    M = _planted(rng, (2, 1), 3)
    a = block_structure_audit(M, 2, seed=5)
    b = block_structure_audit(M, 2, seed=5)
    assert a.to_dict() == b.to_dict()


def test_to_dot_grammar():
    M = np.array(MAT_DISJOINT, dtype=float)
    g = build_graph(M, "D")
    dot = to_dot(g)
    assert dot.startswith("graph factors {")
    assert dot.rstrip().endswith("}")
    assert dot.count("{") == dot.count("}")
    assert dot.count("subgraph cluster_") == len(components(g)) == 2
    A = np.array(GOLDEN["A"]["matrix"], dtype=float)
    dot_a = to_dot(build_graph(A, "D"))
    assert "v1 -- v2;" in dot_a
    assert dot_a.count("subgraph cluster_") == 1


def test_blocks_from_components():
    assert blocks_from_components([(1, 2), (3,)]).sizes == (2, 1)
    assert blocks_from_components([(1, 3), (2,)]) is None
    assert blocks_from_components([(2, 3), (1,)]) is None

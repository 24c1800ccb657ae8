import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gibbsgraph.groundstate import (
    ClusterTooLargeError,
    Uniqueness,
    cluster_decompose_2h0,
    ground_state_bruteforce,
    ground_state_matching,
    is_unique_ground_state,
    verify_ground_state_properties,
)
from gibbsgraph.model import Configuration, EdgeId, ModelParams, PointSet, edge, energy, energy_delta, all_edges

P = ModelParams(1.0, 0.5, 1.0)
COLLINEAR = PointSet([[0.0, 0.0], [0.4, 0.0], [0.8, 0.0]])


@pytest.mark.parametrize("solver", [ground_state_bruteforce, ground_state_matching])
def test_two_point_cases(solver):
    res = solver(PointSet([[0.0, 0.0], [0.6, 0.0]]), P)
    assert res.config.sorted_edges() == [EdgeId(0, 1)] and math.isclose(res.energy, 0.6)
    res = solver(PointSet([[0.0, 0.0], [1.2, 0.0]]), P)
    assert len(res.config) == 0 and math.isclose(res.energy, 1.0)


@pytest.mark.parametrize("solver", [ground_state_bruteforce, ground_state_matching])
def test_collinear_tie(solver):
    res = solver(COLLINEAR, P)
    assert res.unique is Uniqueness.TIED and res.n_ties == 2
    assert math.isclose(res.energy, 0.9)
    assert [c.sorted_edges() for c in res.ties] == [[EdgeId(0, 1)], [EdgeId(1, 2)]]
    # lexicographically smallest edge list is reported
    assert res.config.sorted_edges() == [EdgeId(0, 1)]
    assert "unique=tied" in res.summary()


@pytest.mark.parametrize("solver", [ground_state_bruteforce, ground_state_matching])
def test_rectangle(solver):
    ps = PointSet([[0.0, 0.0], [0.6, 0.0], [0.0, 10.0], [0.6, 10.0]])
    res = solver(ps, P)
    assert res.config.sorted_edges() == [EdgeId(0, 1), EdgeId(2, 3)]
    assert math.isclose(res.energy, 1.2) and res.unique is Uniqueness.UNIQUE


def test_far_apart_points_are_monomers():
    ps = PointSet([[0.0, 0.0], [1.5, 0.0], [0.0, 1.5], [3.0, 3.0]])
    for solver in (ground_state_bruteforce, ground_state_matching):
        res = solver(ps, P)
        assert len(res.config) == 0 and math.isclose(res.energy, 4 * P.h0)


def test_structure_check():
    ps = PointSet([[0.0, 0.0], [0.3, 0.0], [0.0, 0.3], [1.0, 0.0]])
    assert verify_ground_state_properties(Configuration(4), ps, P).ok
    bad = verify_ground_state_properties(Configuration(4, [edge(0, 1), edge(0, 2)]), ps, P)
    assert not bad.ok and any("degree 2" in v for v in bad.violations)
    assert not verify_ground_state_properties(Configuration(4, [edge(0, 3)]), ps, P).ok


def test_cluster_decomposition():
    h0 = P.h0
    far = PointSet([[0.0, 0.0], [1.01, 0.0], [2.02, 0.0]])
    assert cluster_decompose_2h0(far, h0) == [[0], [1], [2]]
    assert cluster_decompose_2h0(PointSet([[0.0, 0.0], [1.0, 0.0]]), h0) == [[0, 1]]
    chain = PointSet([[1.5 * h0 * k, 0.0] for k in range(6)])
    assert cluster_decompose_2h0(chain, h0) == [list(range(6))]


def test_uniqueness_decision():
    assert is_unique_ground_state(COLLINEAR, P) is Uniqueness.TIED
    assert is_unique_ground_state(PointSet([[0.0, 0.0], [0.6, 0.0]]), P) is Uniqueness.UNIQUE
    assert is_unique_ground_state(PointSet([[0.0, 0.0], [5.0, 0.0]]), P) is Uniqueness.UNIQUE
    crowd = PointSet(np.random.default_rng(0).random((9, 2)) * 0.5)
    with pytest.raises(ClusterTooLargeError):
        is_unique_ground_state(crowd, P)


def test_boundary_pair_flagged_degenerate():
    res = ground_state_matching(PointSet([[0.0, 0.0], [1.0, 0.0]]), P)
    assert res.degenerate and len(res.config) == 0


@st.composite
def small_instances(draw):
    n = draw(st.integers(2, 6))
    rng = np.random.default_rng(draw(st.integers(0, 2**32)))
    h0 = draw(st.floats(0.1, 1.0))
    params = ModelParams(draw(st.floats(0.2, 5)), h0, h0 + draw(st.floats(0.05, 2)))
    return PointSet(rng.random((n, 2)) * draw(st.floats(0.5, 3))), params


@settings(max_examples=80, deadline=None)
@given(small_instances())
def test_matching_equals_bruteforce(inst):
    ps, params = inst
    brute = ground_state_bruteforce(ps, params)
    match = ground_state_matching(ps, params)
    assert abs(brute.energy - match.energy) < 1e-9
    assert verify_ground_state_properties(match.config, ps, params).ok
    assert verify_ground_state_properties(brute.config, ps, params).ok
    assert brute.unique == match.unique
    assert brute.config == match.config


@settings(max_examples=60, deadline=None)
@given(small_instances())
def test_ground_state_locally_stable(inst):
    ps, params = inst
    gs = ground_state_matching(ps, params).config
    for e in all_edges(len(ps)):
        assert energy_delta(ps, gs, e, params) >= -1e-12


@settings(max_examples=40, deadline=None)
@given(small_instances())
def test_composition_over_clusters(inst):
    ps, params = inst
    total = 0.0
    for c in cluster_decompose_2h0(ps, params.h0):
        total += params.h0 if len(c) == 1 else ground_state_bruteforce(PointSet(ps.coords[c]), params).energy
    assert abs(total - ground_state_bruteforce(ps, params).energy) < 1e-9


def test_large_component_uses_blossom():
    rng = np.random.default_rng(7)
    ps = PointSet(rng.random((40, 2)) * 3)
    res = ground_state_matching(ps, P)
    assert res.unique is Uniqueness.UNKNOWN and res.n_ties is None
    assert verify_ground_state_properties(res.config, ps, P).ok
    g = nx.Graph()
    for e in all_edges(40):
        L = ps.distance(*e)
        if L < 2 * P.h0:
            g.add_edge(*e, weight=2 * P.h0 - L)
    best = sum(g[a][b]["weight"] for a, b in nx.max_weight_matching(g))
    assert math.isclose(res.energy, 40 * P.h0 - best, rel_tol=1e-12)
    assert math.isclose(res.energy, energy(ps, res.config, P), rel_tol=1e-12)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gibbsgraph.model import (
    Configuration,
    EdgeId,
    ModelParams,
    PointSet,
    Star,
    all_edges,
    edge,
    edge_from_index,
    edge_index,
    edge_length,
    energy,
    energy_delta,
    n_edges,
    params_from_temperature,
    penalty,
)

P = ModelParams(beta=1.0, h0=0.5, h1=1.0)


def test_params_validation():
    with pytest.raises(ValueError, match="h0 < h1"):
        ModelParams(1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        ModelParams(0.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        ModelParams(1.0, -0.1, 1.0)
    p = params_from_temperature(4.0, 0.5, 1.0)
    assert p.beta == 0.25 and p.temperature == 4.0
    assert P.with_beta(3.0).beta == 3.0


def test_penalty_values():
    assert penalty(0, P) == 0.5
    assert penalty(1, P) == 0.0
    assert penalty(1, ModelParams(1.0, 0.2, 7.0)) == 0.0
    assert penalty(4, P) == 6.0
    np.testing.assert_array_equal(penalty(np.array([0, 1, 2, 3]), P), [0.5, 0.0, 1.0, 3.0])


@given(st.floats(0.01, 5), st.floats(0.01, 5), st.integers(2, 50))
def test_penalty_nonnegative_and_increasing(h0, dh, d):
    p = ModelParams(1.0, h0, h0 + dh)
    assert penalty(d - 2, p) >= 0
    assert penalty(d + 1, p) > penalty(d, p)


def test_edge_length_examples():
    ps = PointSet([[0, 0], [3, 4]])
    assert edge_length(ps, edge(1, 0)) == 5.0
    assert edge_length(PointSet([[0.0], [1.0]]), EdgeId(0, 1)) == 1.0


def test_pointset_rejects_duplicates_and_nan():
    with pytest.raises(ValueError):
        PointSet([[1, 1], [1, 1]])
    with pytest.raises(ValueError):
        PointSet([[0, np.nan]])


def test_edge_indexing_roundtrip():
    for n in range(0, 8):
        edges = list(all_edges(n))
        assert len(edges) == n_edges(n)
        for k, e in enumerate(edges):
            assert edge_index(e, n) == k
            assert edge_from_index(k, n) == e
    with pytest.raises(ValueError):
        edge(2, 2)


def test_energy_examples():
    assert energy(PointSet([[0, 0], [1, 0], [0, 1]]), Configuration(3), P) == 1.5
    assert math.isclose(energy(PointSet([[0, 0], [0.7, 0]]), Configuration(2, [edge(0, 1)]), P), 0.7)
    tri = PointSet([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]])
    assert math.isclose(energy(tri, Configuration(3, all_edges(3)), P), 6.0)


def test_energy_delta_examples():
    ps = PointSet([[0, 0], [0.8, 0]])
    assert math.isclose(energy_delta(ps, Configuration(2), edge(0, 1), P), 0.8 - 1.0)
    # endpoint 0 has two other open edges, endpoint 1 none, L = 1
    ps = PointSet([[0, 0], [1, 0], [-1, 0], [0, 1]])
    cfg = Configuration(4, [edge(0, 2), edge(0, 3)])
    assert math.isclose(energy_delta(ps, cfg, edge(0, 1), P), 2.5)
    assert math.isclose(energy_delta(ps, cfg.flipped(edge(0, 1)), edge(0, 1), P), -2.5)


def test_configuration_bookkeeping():
    cfg = Configuration(4)
    cfg.open_edge(edge(0, 1))
    cfg.open_edge(edge(1, 2))
    assert cfg.degree(1) == 2 and cfg.degree(3) == 0
    cfg.open_edge(edge(0, 1))  # idempotent
    assert cfg.degree(0) == 1
    cfg.flip(edge(0, 1))
    assert cfg.sorted_edges() == [EdgeId(1, 2)]
    cfg.check_invariants()
    with pytest.raises(ValueError):
        cfg.open_edge(EdgeId(2, 9))
    with pytest.raises(ValueError):
        cfg.degrees[0] = 5


def test_star_from_open():
    s = Star.from_open(1, 4, [0, 3])
    assert s.degree == 2
    assert sorted(s.open_edges) == [EdgeId(0, 1), EdgeId(1, 3)]
    assert len(s.assignment) == 3
    with pytest.raises(ValueError):
        Star(0, ((EdgeId(1, 2), True),))


@st.composite
def instances(draw, max_n=8):
    n = draw(st.integers(2, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    ps = PointSet(rng.random((n, 2)) * 3)
    edges = list(all_edges(n))
    cfg = Configuration(n, [e for e in edges if rng.random() < 0.4])
    h0 = draw(st.floats(0.05, 2))
    h1 = h0 + draw(st.floats(0.01, 3))
    return ps, cfg, ModelParams(draw(st.floats(0.1, 5)), h0, h1), edges[draw(st.integers(0, len(edges) - 1))]


@settings(max_examples=300, deadline=None)
@given(instances())
def test_energy_delta_matches_recomputation(inst):
    ps, cfg, params, e = inst
    direct = energy(ps, cfg.flipped(e), params) - energy(ps, cfg, params)
    assert math.isclose(energy_delta(ps, cfg, e, params), direct, rel_tol=1e-9, abs_tol=1e-9)


@settings(max_examples=100, deadline=None)
@given(instances(), st.floats(0, 2 * math.pi), st.floats(-10, 10), st.floats(-10, 10))
def test_energy_rigid_motion_invariant(inst, angle, dx, dy):
    ps, cfg, params, _ = inst
    rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    moved = PointSet(ps.coords @ rot.T + [dx, dy])
    assert math.isclose(energy(ps, cfg, params), energy(moved, cfg, params), rel_tol=1e-9, abs_tol=1e-9)

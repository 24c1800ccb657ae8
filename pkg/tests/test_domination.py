import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import param_grid, unit_square_points
from gibbsgraph.domination import (
    RegionQuery,
    connection_g,
    in_region_F,
    j_tail_integral,
    j_tail_integral_quadrature,
    nu_open_probability,
    region_boundary,
    sample_nu,
    subcritical_rcm,
    total_g_closed,
    total_g_integral,
    total_g_integral_quadrature,
)
from gibbsgraph.model import EdgeId, ModelParams, PointSet, all_edges
from gibbsgraph.sampler import exact_distribution

P = ModelParams(2.0, 0.5, 1.0)


def test_connection_function_values():
    assert connection_g(2 * P.h0, P) == 0.5
    assert math.isclose(connection_g(0.0, P), 1 / (1 + math.exp(-2 * P.beta * P.h0)))
    with pytest.raises(ValueError):
        connection_g(-1.0, P)


@given(st.floats(0, 50), st.floats(1e-3, 5))
def test_connection_function_decreasing(x, dx):
    assert connection_g(x + dx, P) <= connection_g(x, P)
    if x < 10:
        assert connection_g(x + dx, P) < connection_g(x, P)


def test_nu_equals_gibbs_for_two_points():
    for L in (0.2, 1.0, 3.0):
        ps = PointSet([[0.0, 0.0], [L, 0.0]])
        for params in param_grid():
            exact = exact_distribution(ps, params).edge_marginals()[0]
            assert math.isclose(nu_open_probability(ps, EdgeId(0, 1), params), exact, rel_tol=1e-12)
    ps = PointSet([[0.0, 0.0], [1.0, 0.0]])
    assert nu_open_probability(ps, EdgeId(0, 1), ModelParams(1.0, 0.5, 1.0)) == 0.5


def test_nu_dominates_conditionals_small():
    rng = np.random.default_rng(21)
    for n in (2, 3, 4):
        ps = unit_square_points(n, rng, side=2)
        for params in param_grid()[::2]:
            d = exact_distribution(ps, params)
            g = connection_g(ps.edge_lengths(), params)
            for k in range(d.n_edges):
                assert d.conditional_open(k)[1].max() <= g[k] + 1e-12


def test_sample_nu_frequencies_and_determinism():
    ps = PointSet([[0.0, 0.0], [0.6, 0.0], [0.0, 1.4], [2.0, 2.0]])
    params = ModelParams(1.0, 0.5, 1.0)
    g = connection_g(ps.edge_lengths(), params)
    seeds = 10_000
    counts = np.zeros(len(g))
    for s in range(seeds):
        cfg = sample_nu(ps, params, s)
        for k, e in enumerate(all_edges(4)):
            counts[k] += e in cfg
    freq = counts / seeds
    assert np.all(np.abs(freq - g) < 3 * np.sqrt(g * (1 - g) / seeds) + 1e-12)
    assert sample_nu(ps, params, 5) == sample_nu(ps, params, 5)


def test_sample_nu_cold_long_edges_closed():
    ps = PointSet([[0.0, 0.0], [3.0, 0.0], [0.0, 3.0]])
    cold = ModelParams(1e4, 0.5, 1.0)
    assert all(len(sample_nu(ps, cold, s)) == 0 for s in range(100))


def test_sample_nu_cutoff():
    ps = PointSet([[0.0, 0.0], [0.1, 0.0], [9.0, 0.0]])
    hot = ModelParams(1e-6, 0.5, 1.0)
    for s in range(50):
        cfg = sample_nu(ps, hot, s, cutoff=1.0)
        assert EdgeId(0, 2) not in cfg and EdgeId(1, 2) not in cfg


def test_integral_examples():
    assert math.isclose(j_tail_integral(1.0, 0.5), math.log(2))
    assert math.isclose(total_g_integral(ModelParams(1.0, 0.5, 1.0)), math.log(1 + math.e))
    assert math.isclose(total_g_integral(ModelParams(1.0, 0.5, 1.0)), 1.313262, rel_tol=1e-6)
    assert j_tail_integral(1e-9, 0.5) < 1e-8
    assert total_g_closed(1e6, 0.5) > 1e5


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 20), st.floats(0.05, 10), st.floats(1.1, 5))
def test_tail_integral_linear_and_h0_free(T, h0, c):
    assert math.isclose(j_tail_integral(c * T, h0), c * j_tail_integral(T, h0), rel_tol=1e-12)
    assert j_tail_integral(T, h0) == j_tail_integral(T, 2 * h0)
    assert total_g_closed(T, h0) >= j_tail_integral(T, h0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.1, 5))
def test_quadrature_agrees_with_closed_forms(T, h0):
    q, err = j_tail_integral_quadrature(T, h0)
    assert abs(q - j_tail_integral(T, h0)) <= 1e-8 * j_tail_integral(T, h0)
    q, err = total_g_integral_quadrature(T, h0)
    assert abs(q - total_g_closed(T, h0)) <= 1e-8 * total_g_closed(T, h0)


def test_region_examples():
    assert math.isclose(region_boundary(1.0, 0.5), 1 / (1 + math.log(2)))
    assert round(region_boundary(1.0, 0.5), 6) == 0.590616
    assert in_region_F(RegionQuery(0.5, 1.0, 0.5))
    assert not in_region_F(RegionQuery(0.6, 1.0, 0.5))
    for T in (0.01, 1.0, 100.0):
        assert in_region_F(RegionQuery(1e-9, T, 0.5))
    total = total_g_closed(1.0, 0.5)
    assert not subcritical_rcm(RegionQuery(2 / total, 1.0, 0.5))
    assert subcritical_rcm(RegionQuery(0.5 / total, 1.0, 0.5))


def test_region_strict_variant_at_boundary():
    lam = region_boundary(1.0, 0.5)
    q = RegionQuery(lam, 1.0, 0.5)
    assert in_region_F(q) and not in_region_F(q, strict=True)


@given(st.floats(1e-4, 10), st.floats(0.01, 100), st.floats(0.01, 10))
def test_region_implies_subcritical(lam, T, h0):
    q = RegionQuery(lam, T, h0)
    if in_region_F(q):
        assert subcritical_rcm(q)
    if lam > 1 / (2 * h0):
        assert not in_region_F(q)


def test_region_query_validation():
    with pytest.raises(ValueError):
        RegionQuery(0.0, 1.0, 0.5)

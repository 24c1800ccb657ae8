"""The independent random-connection model that dominates the Gibbs graph.

Each edge is open independently with probability ``g(L)``, where
``g(x) = e^{-beta x} / (e^{-beta x} + e^{-2 beta h0}) = expit(-beta (x - 2 h0))``.
The non-percolation criteria compare the Poisson intensity with integrals of
``g``.  Substituting ``u = exp(-x/T)`` gives the closed forms

    int_{2h0}^inf g = T ln 2,        int_0^inf g = T ln(1 + e^{2 h0 / T}),

which the shipped predicates use; the quadrature routes are kept as an
independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import expit

from .model import Configuration, EdgeId, ModelParams, PointSet, edge_length
from .rng import make_rng
from .sampler import _active_edges

# quadrature runs on [0, 2 h0 + QUAD_SPAN * T]; the tail beyond is below T e^-50
QUAD_SPAN = 50.0


@dataclass(frozen=True)
class RegionQuery:
    lam: float
    temperature: float
    h0: float

    def __post_init__(self):
        for name in ("lam", "temperature", "h0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


def connection_g(x, params: ModelParams):
    """Open probability of an edge of length ``x`` under the dominating model."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("length must be nonnegative")
    p = expit(-params.beta * (x - 2 * params.h0))
    return float(p) if p.ndim == 0 else p


def nu_open_probability(ps: PointSet, e: EdgeId, params: ModelParams) -> float:
    return connection_g(edge_length(ps, e), params)


def sample_nu(
    ps: PointSet, params: ModelParams, seed: int, cutoff: float | None = None
) -> Configuration:
    """Independent edges with probability ``g(L)``; edges ``>= cutoff`` stay closed."""
    rng = make_rng(seed)
    ei, ej, lengths = _active_edges(ps, cutoff)
    on = rng.random(len(lengths)) < connection_g(lengths, params)
    return Configuration.from_arrays(len(ps), ei[on], ej[on])


def _g_of_temperature(x, temperature: float, h0: float):
    return expit(-(x - 2 * h0) / temperature)


def j_tail_integral(temperature: float, h0: float) -> float:
    """Integral of ``g`` over ``[2 h0, inf)``; equals ``T ln 2`` for every h0."""
    if not (temperature > 0 and h0 > 0):
        raise ValueError("temperature and h0 must be positive")
    return temperature * math.log(2.0)


def total_g_integral(params: ModelParams) -> float:
    """Integral of ``g`` over ``[0, inf)``: ``T ln(1 + e^{2 h0 / T})``."""
    return total_g_closed(params.temperature, params.h0)


def total_g_closed(temperature: float, h0: float) -> float:
    a = 2 * h0 / temperature
    # log1p(e^a) = a + log1p(e^-a), stable for large a
    return temperature * (a + math.log1p(math.exp(-a)))


def _quad(temperature: float, h0: float, lo: float) -> tuple[float, float]:
    hi = 2 * h0 + QUAD_SPAN * temperature
    breaks = [2 * h0] if lo < 2 * h0 < hi else None
    val, err = integrate.quad(
        _g_of_temperature, lo, hi, args=(temperature, h0),
        points=breaks, epsabs=0.0, epsrel=1e-13, limit=500,
    )
    tail_bound = temperature * math.exp(-QUAD_SPAN)
    return val, err + tail_bound


def j_tail_integral_quadrature(temperature: float, h0: float) -> tuple[float, float]:
    """Adaptive quadrature of the tail integral; returns ``(value, error bound)``."""
    return _quad(temperature, h0, 2 * h0)


def total_g_integral_quadrature(temperature: float, h0: float) -> tuple[float, float]:
    return _quad(temperature, h0, 0.0)


def region_boundary(temperature: float, h0: float) -> float:
    """Largest intensity in region F at this temperature: ``1 / (2 h0 + J(T))``."""
    return 1.0 / (2 * h0 + j_tail_integral(temperature, h0))


def in_region_F(q: RegionQuery, strict: bool = False) -> bool:
    """``lam <= 1 / (2 h0 + J(T))``; ``strict=True`` uses ``<`` instead."""
    bound = region_boundary(q.temperature, q.h0)
    return q.lam < bound if strict else q.lam <= bound


def subcritical_rcm(q: RegionQuery) -> bool:
    """Direct subcriticality test ``lam * int_0^inf g < 1``."""
    return q.lam * total_g_closed(q.temperature, q.h0) < 1.0

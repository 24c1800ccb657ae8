"""Finite-volume Gibbs edge measure: exact enumeration and heat-bath MCMC.

The exact route tabulates ``exp(-beta H)`` over all ``2^|E|`` configurations
(bit ``k`` of a mask is the state of canonical edge ``k``).  The chain route
updates one edge at a time from its conditional law given the rest, which
only depends on the edge length and the two endpoint degrees.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import expit

from ._kernels import heat_bath_sweeps
from .model import (
    Configuration,
    EdgeId,
    ModelParams,
    PointSet,
    Star,
    edge,
    edge_arrays,
    edge_index,
    edge_length,
    n_edges,
    open_cost,
    penalty,
)
from .rng import make_rng

MAX_EXACT_EDGES = 22
DEFAULT_BURNIN = 1000
DEFAULT_THIN = 10
# below this many points the chain runs on the complete edge set
AUTO_CUTOFF_MAX_POINTS = 40
# the automatic cutoff keeps cutoff_bias_bound() at or below this
AUTO_CUTOFF_TOL = 1e-3
# uniforms per generated block, bounds memory of one block to ~64 MB
_BLOCK_DOUBLES = 1 << 23
_LOG_FLOAT_MAX = math.log(sys.float_info.max)


class InstanceTooLargeError(ValueError):
    pass


def _check_enumerable(n: int, cap: int = MAX_EXACT_EDGES) -> int:
    m = n_edges(n)
    if m > cap:
        raise InstanceTooLargeError(f"C({n},2) = {m} edges exceeds the enumeration cap {cap}")
    return m


def enumerate_energies(ps: PointSet, params: ModelParams) -> np.ndarray:
    """Energy of every configuration, indexed by edge bitmask."""
    n = len(ps)
    m = _check_enumerable(n)
    masks = np.arange(1 << m, dtype=np.int64)
    lengths = ps.edge_lengths()
    ei, ej = edge_arrays(n)
    energies = np.zeros(1 << m)
    deg = np.zeros((n, 1 << m), dtype=np.int8)
    for k in range(m):
        bit = ((masks >> k) & 1).astype(np.int8)
        energies += bit * lengths[k]
        deg[ei[k]] += bit
        deg[ej[k]] += bit
    for v in range(n):
        energies += penalty(deg[v], params)
    return energies


def mask_to_config(mask: int, n: int) -> Configuration:
    ei, ej = edge_arrays(n)
    bits = np.array([(mask >> k) & 1 for k in range(len(ei))], dtype=bool)
    return Configuration.from_arrays(n, ei[bits], ej[bits])


def config_to_mask(cfg: Configuration) -> int:
    return sum(1 << edge_index(e, cfg.n) for e in cfg.open_edges)


@dataclass
class ExactDistribution:
    """Probabilities of every configuration of a small instance."""

    n: int
    beta: float
    lengths: np.ndarray
    energies: np.ndarray
    probabilities: np.ndarray
    log_z: float

    @property
    def n_edges(self) -> int:
        return len(self.lengths)

    @property
    def z(self) -> float:
        return math.exp(self.log_z)

    @property
    def masks(self) -> np.ndarray:
        return np.arange(len(self.probabilities), dtype=np.int64)

    def edge_bits(self, k: int) -> np.ndarray:
        return ((self.masks >> k) & 1).astype(bool)

    def degree(self, v: int) -> np.ndarray:
        ei, ej = edge_arrays(self.n)
        deg = np.zeros(len(self.probabilities), dtype=np.int64)
        for k in np.flatnonzero((ei == v) | (ej == v)):
            deg += self.edge_bits(int(k))
        return deg

    def probability(self, cfg: Configuration) -> float:
        return float(self.probabilities[config_to_mask(cfg)])

    def configuration(self, mask: int) -> Configuration:
        return mask_to_config(int(mask), self.n)

    def edge_marginals(self) -> np.ndarray:
        return np.array([self.probabilities[self.edge_bits(k)].sum() for k in range(self.n_edges)])

    def expected_degree(self, v: int) -> float:
        return float(np.dot(self.degree(v), self.probabilities))

    def conditional_open(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """``P(edge k open | rest)`` for every assignment of the other edges.

        Returns the complement masks (bit ``k`` cleared) and the probabilities.
        """
        rest = self.masks[~self.edge_bits(k)]
        p_closed = self.probabilities[rest]
        p_open = self.probabilities[rest | (1 << k)]
        return rest, p_open / (p_open + p_closed)

    def _assignment_mask(self, assignment: Iterable[tuple[EdgeId, bool]]) -> np.ndarray:
        sel = np.ones(len(self.probabilities), dtype=bool)
        for e, is_open in assignment:
            bits = self.edge_bits(edge_index(edge(*e), self.n))
            sel &= bits if is_open else ~bits
        return sel

    def star_probability(self, star: Star) -> float:
        """Probability that the configuration agrees with ``star``."""
        return float(self.probabilities[self._assignment_mask(star.assignment)].sum())

    def conditional_star_probability(self, star: Star, environment: Star) -> float:
        """``P(star | environment)``; both are assignments at the same center."""
        env = self._assignment_mask(environment.assignment)
        both = env & self._assignment_mask(star.assignment)
        return float(self.probabilities[both].sum() / self.probabilities[env].sum())

    def sample_masks(self, rng: np.random.Generator, size: int) -> np.ndarray:
        cdf = np.cumsum(self.probabilities)
        cdf[-1] = 1.0
        return np.searchsorted(cdf, rng.random(size), side="right")


def exact_distribution(ps: PointSet, params: ModelParams) -> ExactDistribution:
    """Exhaustive free-boundary Gibbs distribution; needs C(n,2) <= 22."""
    energies = enumerate_energies(ps, params)
    logw = -params.beta * energies
    shift = float(logw.max())
    w = np.exp(logw - shift)
    total = float(w.sum())
    return ExactDistribution(
        n=len(ps),
        beta=params.beta,
        lengths=ps.edge_lengths(),
        energies=energies,
        probabilities=w / total,
        log_z=shift + math.log(total),
    )


def heat_bath_open_probability(length, d1, d2, params: ModelParams):
    """``1 / (1 + exp(beta * dE))`` where dE is the cost of opening the edge.

    ``d1, d2`` are the endpoint degrees excluding the edge; arrays broadcast.
    """
    p = expit(-params.beta * open_cost(length, d1, d2, params))
    return float(p) if np.ndim(p) == 0 else p


def conditional_open_probability(
    ps: PointSet, cfg_rest: Configuration, e: EdgeId, params: ModelParams
) -> float:
    """Gibbs probability that ``e`` is open given every other edge.

    The state of ``e`` itself in ``cfg_rest`` is ignored.
    """
    e = edge(*e)
    own = e in cfg_rest
    d1 = cfg_rest.degree(e.i) - own
    d2 = cfg_rest.degree(e.j) - own
    return heat_bath_open_probability(edge_length(ps, e), d1, d2, params)


def default_cutoff(n: int, params: ModelParams, tol: float = AUTO_CUTOFF_TOL) -> float | None:
    """No cutoff up to 40 points, else ``2 h0 + T ln(C(n,2) / tol)``.

    Since ``g(x) <= exp(-beta (x - 2 h0))``, freezing edges at this length
    keeps the summed ``g`` of frozen edges, hence the bias bound, below ``tol``.
    """
    if n <= AUTO_CUTOFF_MAX_POINTS:
        return None
    return 2 * params.h0 + params.temperature * math.log(n_edges(n) / tol)


def _active_edges(ps: PointSet, cutoff: float | None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = len(ps)
    if cutoff is None:
        ei, ej = edge_arrays(n)
        return ei, ej, ps.edge_lengths()
    if n < 2:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, np.zeros(0)
    pairs = cKDTree(ps.coords).query_pairs(cutoff, output_type="ndarray").astype(np.int64)
    if len(pairs) == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, np.zeros(0)
    pairs.sort(axis=1)
    pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    lengths = np.linalg.norm(ps.coords[pairs[:, 0]] - ps.coords[pairs[:, 1]], axis=1)
    keep = lengths < cutoff
    return pairs[keep, 0].copy(), pairs[keep, 1].copy(), lengths[keep]


class HeatBathChain:
    """Single-edge heat-bath chain with random-permutation sweeps.

    Edges of length ``>= cutoff`` are frozen closed.  ``cutoff="auto"`` applies
    :func:`default_cutoff`; ``None`` keeps every edge active.
    """

    def __init__(
        self,
        ps: PointSet,
        params: ModelParams,
        seed: int,
        cutoff: float | None | str = "auto",
        initial: Configuration | None = None,
    ):
        self.ps = ps
        self.params = params
        self.cutoff = default_cutoff(len(ps), params) if cutoff == "auto" else cutoff
        if self.cutoff is not None and not self.cutoff > 0:
            raise ValueError(f"cutoff must be positive, got {self.cutoff}")
        self.edges_i, self.edges_j, self.lengths = _active_edges(ps, self.cutoff)
        self.state = np.zeros(len(self.lengths), dtype=np.int8)
        self.degrees = np.zeros(len(ps), dtype=np.int64)
        self.sweep_count = 0
        self._rng = make_rng(seed)
        if initial is not None:
            self._load(initial)

    def _load(self, cfg: Configuration) -> None:
        pos = {(int(a), int(b)): k for k, (a, b) in enumerate(zip(self.edges_i, self.edges_j))}
        for e in cfg.open_edges:
            k = pos.get((e.i, e.j))
            if k is None:
                raise ValueError(f"initial configuration opens frozen edge {tuple(e)}")
            self.state[k] = 1
        self.degrees[:] = cfg.degrees

    @property
    def n_active(self) -> int:
        return len(self.lengths)

    def active_edges(self) -> list[EdgeId]:
        return [EdgeId(int(a), int(b)) for a, b in zip(self.edges_i, self.edges_j)]

    def run(self, sweeps: int, record: bool = False) -> np.ndarray | None:
        """Advance ``sweeps`` sweeps; with ``record`` return the states after each."""
        if sweeps < 0:
            raise ValueError("sweeps must be nonnegative")
        m = self.n_active
        out = np.zeros((sweeps, m), dtype=np.int8) if record else None
        block = max(1, _BLOCK_DOUBLES // max(1, 2 * m))
        done = 0
        while done < sweeps:
            k = min(block, sweeps - done)
            rand = self._rng.random((k, 2, m))
            rec = out[done : done + k] if record else np.zeros((0, m), dtype=np.int8)
            heat_bath_sweeps(
                self.edges_i,
                self.edges_j,
                self.lengths,
                self.state,
                self.degrees,
                self.params.beta,
                self.params.h0,
                self.params.h1,
                rand,
                rec,
            )
            done += k
        self.sweep_count += sweeps
        return out

    def configuration(self) -> Configuration:
        return self.state_to_configuration(self.state)

    def state_to_configuration(self, state: np.ndarray) -> Configuration:
        on = state.astype(bool)
        return Configuration.from_arrays(len(self.ps), self.edges_i[on], self.edges_j[on])

    def energy(self) -> float:
        return float(self.lengths[self.state.astype(bool)].sum() + np.sum(penalty(self.degrees, self.params)))

    def cutoff_bias_bound(self) -> float:
        """Upper bound on the total-variation error from freezing long edges.

        The restricted law is the full law conditioned on all frozen edges
        being closed, so the error is at most the full-law probability that
        some frozen edge is open, which domination by the independent
        connection model bounds by the sum of ``g(L)`` over frozen edges.
        """
        if self.cutoff is None:
            return 0.0
        from .domination import connection_g

        x = self.ps.coords
        total = 0.0
        for start in range(0, len(x), 512):
            block = x[start : start + 512]
            d = np.linalg.norm(block[:, None, :] - x[None, :, :], axis=2)
            cols = np.arange(len(x))[None, :]
            rows = np.arange(start, start + len(block))[:, None]
            far = (cols > rows) & (d >= self.cutoff)
            total += float(np.sum(connection_g(d[far], self.params)))
        return total


def mcmc_run(
    ps: PointSet,
    params: ModelParams,
    seed: int,
    sweeps: int,
    burnin: int = DEFAULT_BURNIN,
    cutoff: float | None | str = "auto",
    initial: Configuration | None = None,
) -> Iterator[Configuration]:
    """Yield the configuration after each of ``sweeps`` post-burn-in sweeps."""
    if sweeps <= 0:
        raise ValueError("sweeps must be positive")
    chain = HeatBathChain(ps, params, seed, cutoff=cutoff, initial=initial)
    chain.run(burnin)
    block = max(1, min(sweeps, 10_000, _BLOCK_DOUBLES // max(1, 2 * chain.n_active)))
    done = 0
    while done < sweeps:
        k = min(block, sweeps - done)
        states = chain.run(k, record=True)
        for row in states:
            yield chain.state_to_configuration(row)
        done += k


@dataclass
class EdgeMarginals:
    """Per-edge open frequency and batch-means standard error (canonical order)."""

    n: int
    mean: np.ndarray
    se: np.ndarray
    samples: int

    def of(self, e: EdgeId) -> tuple[float, float]:
        k = edge_index(edge(*e), self.n)
        return float(self.mean[k]), float(self.se[k])


def estimate_edge_marginals(stream: Iterable[Configuration], thin: int = DEFAULT_THIN) -> EdgeMarginals:
    """Keep every ``thin``-th configuration and average edge indicators.

    Standard errors use ``floor(sqrt(N))`` batches of consecutive kept samples.
    """
    if thin < 1:
        raise ValueError("thin must be >= 1")
    kept: list[np.ndarray] = []
    n = None
    for t, cfg in enumerate(stream):
        if t % thin:
            continue
        if n is None:
            n = cfg.n
        elif cfg.n != n:
            raise ValueError("configurations in a stream must share the vertex count")
        if len(cfg):
            e = np.array(cfg.sorted_edges(), dtype=np.int64)
            i, j = e[:, 0], e[:, 1]
            kept.append(i * n - i * (i + 1) // 2 + (j - i - 1))
        else:
            kept.append(np.zeros(0, dtype=np.int64))
    if not kept:
        raise ValueError("empty stream after thinning")
    m = n_edges(n)
    N = len(kept)
    b = math.isqrt(N) if N >= 4 else 1
    chunks = np.array_split(np.arange(N), b)
    sums = np.zeros((b, m))
    for r, rows in enumerate(chunks):
        idx = np.concatenate([kept[t] for t in rows]) if len(rows) else np.zeros(0, dtype=np.int64)
        sums[r] = np.bincount(idx, minlength=m)
    sizes = np.array([len(c) for c in chunks], dtype=float)
    mean = sums.sum(axis=0) / N
    if b >= 2:
        bm = sums / sizes[:, None]
        se = bm.std(axis=0, ddof=1) / math.sqrt(b)
    else:
        # iid approximation for very short streams
        se = np.sqrt(mean * (1 - mean) / N)
    return EdgeMarginals(n=n, mean=mean, se=se, samples=N)


def _series_sum(t: float, params: ModelParams, shift: int, k_max: int | None, tol: float = 1e-12) -> float:
    """Sum over k >= 1 of k exp(-b h1 C(k+shift,2) + b h0 (k+1-shift)) t^k / k!."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return 0.0
    b, h0, h1 = params.beta, params.h0, params.h1

    def log_term(k: int) -> float:
        c = (k + shift) * (k + shift - 1) / 2
        return math.log(k) - b * h1 * c + b * h0 * (k + 1 - shift) + k * math.log(t) - math.lgamma(k + 1)

    def ratio(k: int) -> float:
        # term(k+1)/term(k); decreasing in k
        return math.exp(min(-b * h1 * (k + shift) + b * h0 + math.log(t) - math.log(k), _LOG_FLOAT_MAX))

    total = 0.0
    if k_max is not None:
        for k in range(1, k_max + 1):
            lt = log_term(k)
            if lt > _LOG_FLOAT_MAX:
                return math.inf
            total += math.exp(lt)
        r = ratio(k_max + 1)
        tail = math.exp(log_term(k_max + 1)) / (1 - r) if r < 1 else math.inf
        if tail >= tol:
            raise ValueError(f"k_max={k_max} leaves a tail bound {tail:.3g} >= {tol}")
        return total
    k = 1
    while True:
        lt = log_term(k)
        if lt > _LOG_FLOAT_MAX:
            # the sum is finite but not representable; an infinite bound is still valid
            return math.inf
        term = math.exp(lt)
        total += term
        r = ratio(k)
        if r < 0.5 and term * r / (1 - r) < tol * 0.1:
            return total
        k += 1
        if k > 100_000:
            raise RuntimeError("series did not converge")


def degree_bound(t_gamma_value: float, params: ModelParams, k_max: int | None = None) -> float:
    """Upper bound on the mean degree of a vertex with homogeneity sum ``t``.

    Sum over k >= 1 of ``k exp(-beta h1 C(k,2) + beta h0 (k+1)) t^k / k!``.
    Without ``k_max`` the series is summed until the remainder is below 1e-12.
    """
    return _series_sum(t_gamma_value, params, shift=0, k_max=k_max)


def star_probability_bound(
    ps: PointSet, sigma: Star, params: ModelParams, environment_open_count: int = 0
) -> float:
    """Upper bound on the probability of the star ``sigma``.

    Without an environment the star needs at least two open edges and the
    bound is ``exp(-beta sum L - beta h1 C(d,2) + beta h0 (d+1))``.  When the
    conditioning environment already holds at least one open edge at the
    center the bound becomes ``exp(-beta sum L - beta h1 C(d+1,2) + beta h0 d)``.
    """
    if environment_open_count < 0:
        raise ValueError("environment_open_count must be nonnegative")
    d = sigma.degree
    total_length = float(ps.lengths_of(sigma.open_edges).sum()) if d else 0.0
    b = params.beta
    if environment_open_count == 0:
        if d < 2:
            raise ValueError(f"star bound without environment needs degree >= 2, got {d}")
        expo = -b * total_length - b * params.h1 * d * (d - 1) / 2 + b * params.h0 * (d + 1)
    else:
        expo = -b * total_length - b * params.h1 * d * (d + 1) / 2 + b * params.h0 * d
    return math.exp(expo)

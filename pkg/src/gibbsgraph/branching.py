"""Cluster branching exploration of a configuration and its offspring bounds.

Exploration starts from one vertex and proceeds generation by generation.
Within a generation the frontier vertices are visited in ascending index
order; a visited vertex's offspring are its open edges not yet examined, and
visiting it marks all of its incident edges as examined.  The examined set is
stored implicitly as the set of visited vertices (an edge is examined iff one
of its endpoints was visited).
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .clusters import connected_components
from .model import Configuration, EdgeId, ModelParams, PointSet, all_edges, n_edges
from .rng import make_rng
from .sampler import DEFAULT_BURNIN, HeatBathChain, _series_sum, exact_distribution, mask_to_config

DEFAULT_MAX_GENERATIONS = 10_000
DEFAULT_MAX_EDGES = 1_000_000
BETA_GRID_FACTOR = 1.05


@dataclass
class Step:
    """One branching step: ``vertex`` and the offspring edges it produced."""

    vertex: int
    offspring: list[EdgeId]


@dataclass
class Generation:
    offspring: set[EdgeId]
    frontier: list[int]
    visited: frozenset[int]
    steps: list[Step] = field(default_factory=list)


@dataclass
class BranchingTrace:
    start: int
    generations: list[Generation]
    survived: bool

    @property
    def edges(self) -> set[EdgeId]:
        out: set[EdgeId] = set()
        for g in self.generations:
            out |= g.offspring
        return out

    @property
    def order(self) -> list[list[int]]:
        """Visiting order of the frontier of each generation."""
        return [g.frontier for g in self.generations]

    @property
    def extinction_generation(self) -> int | None:
        return None if self.survived else len(self.generations) - 1

    def examined_edges(self, generation: int, n: int) -> set[EdgeId]:
        """Materialize the examined-edge set after ``generation`` for an ``n``-vertex graph."""
        visited = self.generations[generation].visited
        return {e for e in all_edges(n) if e.i in visited or e.j in visited}

    def to_text(self) -> str:
        """Lines ``generation,vertex,edge_i,edge_j`` in exploration order."""
        buf = io.StringIO()
        buf.write("generation,vertex,edge_i,edge_j\n")
        for g_idx, g in enumerate(self.generations):
            for step in g.steps:
                for e in step.offspring:
                    buf.write(f"{g_idx},{step.vertex},{e.i},{e.j}\n")
        return buf.getvalue()


def _adjacency(cfg: Configuration) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(cfg.n)]
    for i, j in cfg.open_edges:
        adj[i].append(j)
        adj[j].append(i)
    for nb in adj:
        nb.sort()
    return adj


def explore_cluster(
    cfg: Configuration,
    gamma0: int,
    max_generations: int = DEFAULT_MAX_GENERATIONS,
    max_edges: int = DEFAULT_MAX_EDGES,
) -> BranchingTrace:
    """Cluster branching exploration of ``cfg`` from ``gamma0``.

    Generation 0 is ``({}, [gamma0], {})``.  The exploration stops after the
    first generation with an empty frontier, or marks ``survived`` when it
    exceeds ``max_generations`` generations or ``max_edges`` offspring edges.
    """
    if not 0 <= gamma0 < cfg.n:
        raise IndexError(f"start vertex {gamma0} out of range")
    adj = _adjacency(cfg)
    visited: set[int] = set()
    gens = [Generation(offspring=set(), frontier=[gamma0], visited=frozenset())]
    reached = {gamma0}
    total = 0
    while gens[-1].frontier:
        if len(gens) > max_generations:
            return BranchingTrace(gamma0, gens, survived=True)
        frontier = gens[-1].frontier
        offspring: set[EdgeId] = set()
        steps = []
        new_vertices: set[int] = set()
        for v in frontier:
            kids = [EdgeId(min(v, w), max(v, w)) for w in adj[v] if w not in visited]
            visited.add(v)
            steps.append(Step(v, kids))
            offspring.update(kids)
            new_vertices.update(e.j if e.i == v else e.i for e in kids)
        total += len(offspring)
        nxt = sorted(new_vertices - reached)
        reached.update(nxt)
        gens.append(Generation(offspring=offspring, frontier=nxt, visited=frozenset(visited), steps=steps))
        if total > max_edges:
            return BranchingTrace(gamma0, gens, survived=True)
    return BranchingTrace(gamma0, gens, survived=False)


def check_trace(trace: BranchingTrace, cfg: Configuration) -> list[str]:
    """Structural invariants of a trace; returns the violations found."""
    problems = []
    seen_edges: set[EdgeId] = set()
    seen_vertices: set[int] = set()
    prev_visited: frozenset[int] = frozenset()
    for g_idx, g in enumerate(trace.generations):
        if g.offspring & seen_edges:
            problems.append(f"generation {g_idx} repeats offspring edges")
        if not prev_visited <= g.visited:
            problems.append(f"examined set shrinks at generation {g_idx}")
        for e in g.offspring:
            if e not in cfg:
                problems.append(f"generation {g_idx} offspring {tuple(e)} is closed")
            if e.i in prev_visited or e.j in prev_visited:
                problems.append(f"generation {g_idx} re-examines {tuple(e)}")
        if g_idx > 0:
            parents = set(trace.generations[g_idx - 1].frontier)
            if any(not (e.i in parents or e.j in parents) for e in g.offspring):
                problems.append(f"generation {g_idx} offspring not incident to the frontier")
        if set(g.frontier) & seen_vertices:
            problems.append(f"generation {g_idx} frontier revisits vertices")
        seen_edges |= g.offspring
        seen_vertices |= set(g.frontier)
        prev_visited = g.visited
    return problems


def offspring_probability_bound(lengths: Sequence[float], params: ModelParams) -> float:
    """Bound on the conditional probability of a given offspring set of size m.

    ``exp(-beta sum L - beta h1 C(m+1, 2) + beta h0 m)``; equals 1 for m = 0.
    """
    m = len(lengths)
    b = params.beta
    return math.exp(-b * float(np.sum(lengths)) - b * params.h1 * m * (m + 1) / 2 + b * params.h0 * m)


def expected_offspring_bound(t_value: float, params: ModelParams, m_max: int | None = None) -> float:
    """Bound on the mean offspring count of a vertex with homogeneity sum ``t``.

    Sum over m >= 1 of ``m exp(-beta h1 C(m+1,2) + beta h0 m) t^m / m!``.
    """
    return _series_sum(t_value, params, shift=1, k_max=m_max)


def beta_grid(beta_min: float, beta_max: float, factor: float = BETA_GRID_FACTOR) -> np.ndarray:
    k = int(math.floor(math.log(beta_max / beta_min) / math.log(factor) + 1e-12))
    return beta_min * factor ** np.arange(k + 1)


def critical_beta_estimate(
    t_sup_fn: Callable[[float], float],
    params: ModelParams,
    eps: float,
    beta_min: float = 0.01,
    beta_max: float = 1000.0,
) -> float | None:
    """Smallest grid beta with ``expected_offspring_bound(T_sup(beta)) < 1 - eps``.

    The grid is geometric with ratio 1.05 from ``beta_min``; ``params`` supplies
    h0 and h1.  Returns None when no grid point qualifies.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    for b in beta_grid(beta_min, beta_max):
        p = params.with_beta(float(b))
        if expected_offspring_bound(t_sup_fn(float(b)), p) < 1 - eps:
            return float(b)
    return None


@dataclass
class ExtinctionRun:
    seed: int
    explored_edges: int
    generations: int
    survived: bool
    matches_component: bool


@dataclass
class ExtinctionReport:
    runs: list[ExtinctionRun]

    @property
    def finite_cluster_frequency(self) -> float:
        return sum(not r.survived for r in self.runs) / len(self.runs)

    @property
    def survival_frequency(self) -> float:
        return sum(r.survived for r in self.runs) / len(self.runs)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("run,seed,explored_edges,generations,survived,matches_component\n")
        for k, r in enumerate(self.runs):
            buf.write(f"{k},{r.seed},{r.explored_edges},{r.generations},{int(r.survived)},{int(r.matches_component)}\n")
        return buf.getvalue()


def sample_configurations(
    ps: PointSet,
    params: ModelParams,
    seeds: Iterable[int],
    method: str = "auto",
    burnin: int = DEFAULT_BURNIN,
    cutoff: float | None | str = "auto",
) -> Iterable[tuple[int, Configuration]]:
    """One Gibbs configuration per seed, exact for tiny instances, else MCMC."""
    if method == "auto":
        method = "exact" if n_edges(len(ps)) <= 12 else "mcmc"
    if method == "exact":
        dist = exact_distribution(ps, params)
        for s in seeds:
            mask = dist.sample_masks(make_rng(s), 1)[0]
            yield s, mask_to_config(int(mask), len(ps))
    elif method == "mcmc":
        for s in seeds:
            chain = HeatBathChain(ps, params, s, cutoff=cutoff)
            chain.run(burnin)
            yield s, chain.configuration()
    else:
        raise ValueError(f"unknown sampling method {method!r}")


def extinction_experiment(
    ps: PointSet,
    params: ModelParams,
    seeds: Sequence[int],
    start: int,
    method: str = "auto",
    burnin: int = DEFAULT_BURNIN,
    max_generations: int = DEFAULT_MAX_GENERATIONS,
    max_edges: int = DEFAULT_MAX_EDGES,
) -> ExtinctionReport:
    """Explore a fresh Gibbs sample per seed and compare with the start's cluster."""
    if not seeds:
        raise ValueError("need at least one seed")
    runs = []
    for s, cfg in sample_configurations(ps, params, seeds, method=method, burnin=burnin):
        trace = explore_cluster(cfg, start, max_generations=max_generations, max_edges=max_edges)
        comp = connected_components(ps, cfg).component_of(start)
        component_edges = set() if comp is None else {e for e in cfg.open_edges if e.i in comp}
        runs.append(ExtinctionRun(
            seed=s,
            explored_edges=len(trace.edges),
            generations=len(trace.generations) - 1,
            survived=trace.survived,
            matches_component=trace.survived or trace.edges == component_edges,
        ))
    return ExtinctionReport(runs)

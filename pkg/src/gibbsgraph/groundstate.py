"""Exact minimum-energy configurations.

Ground states are monomer-dimer configurations whose dimers are shorter than
``2 h0``.  Their energy is ``n h0 - sum(2 h0 - L)`` over the dimers, so finding
one is a maximum-weight matching problem on the edges with ``L < 2 h0`` and
weight ``2 h0 - L``.  The matching problem splits over the connected
components of those admissible edges; small components are searched
exhaustively (which also detects ties), large ones go to the blossom solver.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from scipy.spatial import cKDTree

from .clusters import UnionFind
from .model import Configuration, EdgeId, ModelParams, PointSet, edge_length, energy, n_edges
from .sampler import MAX_EXACT_EDGES, InstanceTooLargeError, enumerate_energies, mask_to_config

TIE_TOL = 1e-9
MAX_LISTED_TIES = 64
MAX_EXHAUSTIVE_MATCHING_EDGES = 20


class Uniqueness(str, enum.Enum):
    UNIQUE = "unique"
    TIED = "tied"
    UNKNOWN = "unknown"


class ClusterTooLargeError(InstanceTooLargeError):
    pass


@dataclass
class GroundStateResult:
    config: Configuration
    energy: float
    unique: Uniqueness
    n_ties: int | None = None
    ties: list[Configuration] | None = None
    degenerate: bool = False

    def summary(self) -> str:
        ties = "" if self.n_ties is None else str(self.n_ties)
        return (
            f"energy={self.energy!r},unique={self.unique.value},n_ties={ties},"
            f"degenerate={int(self.degenerate)},dimers={len(self.config)}"
        )


@dataclass
class GroundStateCheck:
    ok: bool
    violations: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def verify_ground_state_properties(cfg: Configuration, ps: PointSet, params: ModelParams) -> GroundStateCheck:
    """Max degree at most one and every open edge strictly shorter than ``2 h0``."""
    violations = []
    for v in np.flatnonzero(cfg.degrees > 1):
        violations.append(f"vertex {v} has degree {cfg.degree(int(v))}")
    for e in cfg.sorted_edges():
        length = edge_length(ps, e)
        if not length < 2 * params.h0:
            violations.append(f"edge ({e.i},{e.j}) has length {length!r} >= 2*h0")
    return GroundStateCheck(not violations, violations)


def _has_boundary_pair(ps: PointSet, h0: float) -> bool:
    if len(ps) < 2:
        return False
    lengths = ps.edge_lengths() if len(ps) <= 2000 else _pairs_within(ps, 2 * h0 * (1 + 1e-9))[2]
    return bool(np.any(np.isclose(lengths, 2 * h0, rtol=1e-12, atol=0.0)))


def _choose(configs: list[Configuration], ps: PointSet, params: ModelParams) -> Configuration:
    # structurally valid minimizers first, then smallest sorted edge list
    return min(
        configs,
        key=lambda c: (not verify_ground_state_properties(c, ps, params).ok, c.sorted_edges()),
    )


def ground_state_bruteforce(ps: PointSet, params: ModelParams) -> GroundStateResult:
    """Global minimizer over all ``2^C(n,2)`` configurations; needs C(n,2) <= 22."""
    n = len(ps)
    energies = enumerate_energies(ps, params)
    emin = float(energies.min())
    tied = np.flatnonzero(energies <= emin + TIE_TOL)
    configs = [mask_to_config(int(m), n) for m in tied]
    chosen = _choose(configs, ps, params)
    return GroundStateResult(
        config=chosen,
        energy=float(energies[tied].min()),
        unique=Uniqueness.UNIQUE if len(tied) == 1 else Uniqueness.TIED,
        n_ties=len(tied),
        ties=sorted(configs, key=Configuration.sorted_edges) if len(tied) <= MAX_LISTED_TIES else None,
        degenerate=_has_boundary_pair(ps, params.h0),
    )


def _pairs_within(ps: PointSet, radius: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Canonically sorted pairs at distance ``<= radius`` with their lengths."""
    if len(ps) < 2:
        z = np.zeros(0, dtype=np.int64)
        return z, z, np.zeros(0)
    pairs = cKDTree(ps.coords).query_pairs(radius * (1 + 1e-12), output_type="ndarray").astype(np.int64)
    if len(pairs) == 0:
        z = np.zeros(0, dtype=np.int64)
        return z, z, np.zeros(0)
    pairs.sort(axis=1)
    pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    lengths = np.linalg.norm(ps.coords[pairs[:, 0]] - ps.coords[pairs[:, 1]], axis=1)
    keep = lengths <= radius
    return pairs[keep, 0], pairs[keep, 1], lengths[keep]


def _best_matchings(edges: list[tuple[int, int, float]]) -> tuple[float, list[list[EdgeId]]]:
    """All maximum-weight matchings (within TIE_TOL) by exhaustive search."""
    best = [-1.0]
    found: list[tuple[float, list[EdgeId]]] = []
    chosen: list[EdgeId] = []
    used: set[int] = set()

    def rec(k: int, weight: float) -> None:
        if k == len(edges):
            if weight >= best[0] - TIE_TOL:
                found.append((weight, list(chosen)))
                best[0] = max(best[0], weight)
            return
        i, j, w = edges[k]
        if i not in used and j not in used:
            used.update((i, j))
            chosen.append(EdgeId(i, j))
            rec(k + 1, weight + w)
            chosen.pop()
            used.difference_update((i, j))
        rec(k + 1, weight)

    rec(0, 0.0)
    top = best[0]
    return top, [m for w, m in found if w >= top - TIE_TOL]


def ground_state_matching(ps: PointSet, params: ModelParams) -> GroundStateResult:
    """Ground state via maximum-weight matching on edges shorter than ``2 h0``."""
    n = len(ps)
    two_h0 = 2 * params.h0
    ei, ej, lengths = _pairs_within(ps, two_h0)
    strict = lengths < two_h0
    ei, ej, lengths = ei[strict], ej[strict], lengths[strict]

    uf = UnionFind(n)
    for a, b in zip(ei.tolist(), ej.tolist()):
        uf.union(a, b)
    comp_edges: dict[int, list[tuple[int, int, float]]] = {}
    for a, b, length in zip(ei.tolist(), ej.tolist(), lengths.tolist()):
        comp_edges.setdefault(uf.find(a), []).append((a, b, two_h0 - length))

    per_comp: list[list[list[EdgeId]]] = []
    status = Uniqueness.UNIQUE
    for root in sorted(comp_edges, key=lambda r: comp_edges[r][0][:2]):
        edges = comp_edges[root]
        if len(edges) <= MAX_EXHAUSTIVE_MATCHING_EDGES:
            _, options = _best_matchings(edges)
            options.sort()
            per_comp.append(options)
            if len(options) > 1:
                status = Uniqueness.TIED
        else:
            g = nx.Graph()
            g.add_weighted_edges_from(edges)
            m = nx.max_weight_matching(g, maxcardinality=False)
            per_comp.append([sorted(EdgeId(min(a, b), max(a, b)) for a, b in m)])
            if status is Uniqueness.UNIQUE:
                status = Uniqueness.UNKNOWN

    chosen = Configuration(n, itertools.chain.from_iterable(opts[0] for opts in per_comp))
    n_ties = int(np.prod([len(o) for o in per_comp])) if per_comp else 1
    ties = None
    if n_ties <= MAX_LISTED_TIES:
        ties = sorted(
            (Configuration(n, itertools.chain.from_iterable(combo)) for combo in itertools.product(*per_comp)),
            key=Configuration.sorted_edges,
        )
    return GroundStateResult(
        config=chosen,
        energy=energy(ps, chosen, params),
        unique=status,
        n_ties=None if status is Uniqueness.UNKNOWN else n_ties,
        ties=ties if status is not Uniqueness.UNKNOWN else None,
        degenerate=_has_boundary_pair(ps, params.h0),
    )


def cluster_decompose_2h0(ps: PointSet, h0: float) -> list[list[int]]:
    """Components of the graph linking points at distance ``<= 2 h0``.

    Every vertex appears exactly once; clusters are sorted lists ordered by
    their smallest member.
    """
    uf = UnionFind(len(ps))
    ei, ej, _ = _pairs_within(ps, 2 * h0)
    for a, b in zip(ei.tolist(), ej.tolist()):
        uf.union(a, b)
    return uf.groups()


def is_unique_ground_state(ps: PointSet, params: ModelParams) -> Uniqueness:
    """Unique iff the brute-force minimizer of every ``2 h0``-cluster is unique."""
    clusters = cluster_decompose_2h0(ps, params.h0)
    for c in clusters:
        if n_edges(len(c)) > MAX_EXACT_EDGES:
            raise ClusterTooLargeError(f"cluster of {len(c)} points is too large for brute force")
    for c in clusters:
        if len(c) < 2:
            continue
        sub = PointSet(ps.coords[c])
        if ground_state_bruteforce(sub, params).unique is Uniqueness.TIED:
            return Uniqueness.TIED
    return Uniqueness.UNIQUE

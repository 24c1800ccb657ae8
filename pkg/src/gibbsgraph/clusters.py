"""Connected components of open-edge graphs and finite-box percolation proxies."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import beta as beta_dist

from .model import Configuration, ModelParams, PointSet
from .points import BoxRegion, ProcessSpec
from .rng import derive_seed
from .sampler import DEFAULT_BURNIN, HeatBathChain

CROSSING_MARGIN_FRACTION = 0.05


class UnionFind:
    """Array-backed disjoint sets with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra

    def groups(self) -> list[list[int]]:
        """All sets as sorted lists, ordered by smallest member."""
        by_root: dict[int, list[int]] = {}
        for x in range(len(self.parent)):
            by_root.setdefault(self.find(x), []).append(x)
        return sorted(by_root.values(), key=lambda g: g[0])


@dataclass
class ClusterReport:
    components: list[list[int]]
    n: int
    crossing: bool
    mean_degree: float

    @property
    def sizes(self) -> list[int]:
        return [len(c) for c in self.components]

    @property
    def largest_fraction(self) -> float:
        if self.n == 0 or not self.components:
            return 0.0
        return max(self.sizes) / self.n

    @property
    def n_isolated(self) -> int:
        return self.n - sum(self.sizes)

    def component_of(self, v: int) -> list[int] | None:
        for c in self.components:
            if v in c:
                return c
        return None


def _open_components(cfg: Configuration) -> list[list[int]]:
    uf = UnionFind(cfg.n)
    for i, j in cfg.open_edges:
        uf.union(i, j)
    deg = cfg.degrees
    return [g for g in uf.groups() if deg[g[0]] > 0]


def connected_components(
    ps: PointSet,
    cfg: Configuration,
    box: BoxRegion | None = None,
    margin: float | None = None,
) -> ClusterReport:
    """Clusters of the open-edge graph; isolated vertices are not components.

    ``crossing`` is only evaluated when ``box`` is given (margin defaults to
    5% of the axis-0 side).
    """
    if cfg.n != len(ps):
        raise ValueError("configuration and point set sizes differ")
    comps = _open_components(cfg)
    crossing = False
    if box is not None:
        crossing = _crosses(ps, comps, box, _margin(box, margin))
    mean_degree = 2 * len(cfg) / cfg.n if cfg.n else 0.0
    return ClusterReport(components=comps, n=cfg.n, crossing=crossing, mean_degree=mean_degree)


def _margin(box: BoxRegion, margin: float | None) -> float:
    return CROSSING_MARGIN_FRACTION * float(box.sides[0]) if margin is None else margin


def _crosses(ps: PointSet, comps: list[list[int]], box: BoxRegion, margin: float) -> bool:
    if not comps:
        return False
    x0 = ps.coords[:, 0] if len(ps) else np.zeros(0)
    near_low = x0 <= box.low[0] + margin
    near_high = x0 >= box.high[0] - margin
    return any(near_low[c].any() and near_high[c].any() for c in comps)


def crossing_indicator(ps: PointSet, cfg: Configuration, box: BoxRegion, margin: float) -> bool:
    """Whether one cluster reaches within ``margin`` of both axis-0 faces."""
    return _crosses(ps, _open_components(cfg), box, margin)


def clopper_pearson(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    a = (1 - level) / 2
    lo = 0.0 if successes == 0 else float(beta_dist.ppf(a, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(beta_dist.ppf(1 - a, successes + 1, trials - successes))
    return lo, hi


@dataclass
class PercolationRow:
    size: float
    replica: int
    seed: int
    n_points: int
    crossing: bool
    largest_fraction: float
    mean_degree: float
    energy: float


@dataclass
class SizeSummary:
    size: float
    replicas: int
    crossing_frequency: float
    crossing_ci: tuple[float, float]
    mean_largest_fraction: float
    se_largest_fraction: float


@dataclass
class PercolationReport:
    rows: list[PercolationRow] = field(default_factory=list)
    summaries: list[SizeSummary] = field(default_factory=list)

    CSV_COLUMNS = ("size", "replica", "seed", "n_points", "crossing", "largest_fraction", "mean_degree", "energy")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_COLUMNS)
        for r in self.rows:
            w.writerow([
                repr(float(r.size)), r.replica, r.seed, r.n_points, int(r.crossing),
                repr(float(r.largest_fraction)), repr(float(r.mean_degree)), repr(float(r.energy)),
            ])
        return buf.getvalue()


def percolation_experiment(
    spec: ProcessSpec,
    sizes: Sequence[float],
    params: ModelParams,
    replicas: int,
    seed: int,
    burnin: int = DEFAULT_BURNIN,
    cutoff: float | None | str = "auto",
) -> PercolationReport:
    """Sample point sets in cubes of each side, equilibrate the chain, record crossing.

    Replica ``r`` of size index ``s`` draws its points with seed
    ``derive_seed(seed, s, r)`` and runs its chain on sub-stream 1 of that seed.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    report = PercolationReport()
    for s_idx, side in enumerate(sizes):
        box = BoxRegion.cube(side, params.dim)
        lf = []
        crossings = 0
        for r in range(replicas):
            rseed = derive_seed(seed, s_idx, r)
            ps = spec.sample(box, rseed)
            chain = HeatBathChain(ps, params, derive_seed(rseed, 1), cutoff=cutoff)
            chain.run(burnin)
            cfg = chain.configuration()
            rep = connected_components(ps, cfg, box)
            report.rows.append(PercolationRow(
                size=float(side), replica=r, seed=rseed, n_points=len(ps),
                crossing=rep.crossing, largest_fraction=rep.largest_fraction,
                mean_degree=rep.mean_degree, energy=chain.energy(),
            ))
            crossings += rep.crossing
            lf.append(rep.largest_fraction)
        lf_arr = np.array(lf)
        report.summaries.append(SizeSummary(
            size=float(side),
            replicas=replicas,
            crossing_frequency=crossings / replicas,
            crossing_ci=clopper_pearson(crossings, replicas),
            mean_largest_fraction=float(lf_arr.mean()),
            se_largest_fraction=float(lf_arr.std(ddof=1) / math.sqrt(replicas)) if replicas > 1 else 0.0,
        ))
    return report

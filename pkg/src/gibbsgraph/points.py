"""Vertex sets: Poisson and hard-core samples in boxes, homogeneity sums."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.spatial import cKDTree

from .model import PointSet
from .rng import check_seed, make_rng


@dataclass(frozen=True)
class BoxRegion:
    low: tuple[float, ...]
    high: tuple[float, ...]

    def __post_init__(self):
        low = tuple(float(x) for x in self.low)
        high = tuple(float(x) for x in self.high)
        if len(low) != len(high) or not low:
            raise ValueError("low and high must have the same positive length")
        if not all(a < b for a, b in zip(low, high)):
            raise ValueError(f"need low < high on every axis, got {low} / {high}")
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)

    @classmethod
    def cube(cls, side: float, dim: int) -> "BoxRegion":
        return cls((0.0,) * dim, (float(side),) * dim)

    @property
    def dim(self) -> int:
        return len(self.low)

    @property
    def sides(self) -> np.ndarray:
        return np.subtract(self.high, self.low)

    @property
    def volume(self) -> float:
        return float(np.prod(self.sides))

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.sides))

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return bool(np.all(x >= self.low) and np.all(x <= self.high))


@dataclass(frozen=True)
class ProcessSpec:
    kind: Literal["poisson", "hardcore"]
    lam: float
    eps0: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("poisson", "hardcore"):
            raise ValueError(f"unknown process kind {self.kind!r}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not self.eps0 >= 0:
            raise ValueError(f"eps0 must be nonnegative, got {self.eps0}")
        if self.kind == "hardcore" and not self.eps0 > 0:
            raise ValueError("hard-core process needs eps0 > 0")
        check_seed(self.seed)

    def sample(self, box: BoxRegion, seed: int | None = None) -> PointSet:
        seed = self.seed if seed is None else seed
        if self.kind == "poisson":
            return sample_poisson(box, self.lam, seed)
        return sample_hardcore(box, self.lam, self.eps0, seed)


def _poisson_coords(rng: np.random.Generator, box: BoxRegion, lam: float) -> np.ndarray:
    count = rng.poisson(lam * box.volume)
    return box.low + rng.random((count, box.dim)) * box.sides


def sample_poisson(box: BoxRegion, lam: float, seed: int) -> PointSet:
    """Homogeneous Poisson sample of intensity ``lam`` in ``box``."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    rng = make_rng(seed)
    return PointSet(_poisson_coords(rng, box, lam), dim=box.dim)


def sample_hardcore(box: BoxRegion, lam: float, eps0: float, seed: int) -> PointSet:
    """Matern type-II thinning of the Poisson sample drawn from the same seed.

    Each parent point gets an independent uniform mark and survives iff no other
    parent closer than ``eps0`` carries a smaller mark.  Survivors are pairwise
    at distance ``>= eps0`` and form a subset of ``sample_poisson(box, lam, seed)``.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if not eps0 > 0:
        raise ValueError(f"eps0 must be positive, got {eps0}")
    rng = make_rng(seed)
    parents = _poisson_coords(rng, box, lam)
    marks = rng.random(len(parents))
    keep = np.ones(len(parents), dtype=bool)
    if len(parents) > 1:
        pairs = cKDTree(parents).query_pairs(eps0, output_type="ndarray")
        if len(pairs):
            d = np.linalg.norm(parents[pairs[:, 0]] - parents[pairs[:, 1]], axis=1)
            pairs = pairs[d < eps0]
            a, b = pairs[:, 0], pairs[:, 1]
            loser = np.where(marks[a] < marks[b], b, a)
            keep[loser] = False
    return PointSet(parents[keep], dim=box.dim)


def t_gamma(ps: PointSet, v: int, beta: float) -> float:
    """Sum of exp(-beta * |x_v - x_w|) over all other vertices w."""
    if not 0 <= v < len(ps):
        raise IndexError(f"vertex {v} out of range")
    d = np.linalg.norm(ps.coords - ps.coords[v], axis=1)
    d = np.delete(d, v)
    return float(np.exp(-beta * d).sum())


def t_all(ps: PointSet, beta: float, chunk: int = 1024) -> np.ndarray:
    """``t_gamma`` for every vertex, computed in row blocks."""
    n = len(ps)
    out = np.zeros(n)
    x = ps.coords
    for start in range(0, n, chunk):
        block = x[start : start + chunk]
        d = np.linalg.norm(block[:, None, :] - x[None, :, :], axis=2)
        w = np.exp(-beta * d)
        rows = np.arange(len(block))
        w[rows, start + rows] = 0.0
        out[start : start + chunk] = w.sum(axis=1)
    return out


def t_sup(ps: PointSet, beta: float) -> float:
    """Largest homogeneity sum over the vertices; 0 for fewer than two points."""
    if len(ps) < 2:
        return 0.0
    return float(t_all(ps, beta).max())


def hardcore_t_bound(eps0: float, dim: int, beta: float, shells: int = 10_000) -> float:
    """Packing bound on ``t_gamma`` for any ``eps0``-separated set in R^dim.

    Points at distance in ``[k eps0, (k+1) eps0)`` have disjoint balls of radius
    ``eps0/2`` inside the ball of radius ``(k + 1.5) eps0``, so there are at most
    ``(2k + 3)^dim`` of them, each contributing at most ``exp(-beta k eps0)``.
    """
    total = 0.0
    for k in range(1, shells):
        count = (2 * k + 3) ** dim
        term = count * math.exp(-beta * k * eps0)
        total += term
        if term < 1e-16 * total:
            break
    return total

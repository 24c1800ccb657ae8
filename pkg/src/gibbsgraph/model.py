"""Domain types and energy arithmetic for the Gibbs random graph.

Vertices are the points of a finite :class:`PointSet`; a :class:`Configuration`
is the set of open edges of the complete graph on those points.  The energy of
a configuration is the total open-edge length plus a degree penalty at every
vertex (``h0`` for a monomer, nothing for degree one, ``h1 * C(d, 2)`` for a
vertex with ``d >= 2`` colliding edges).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np


@dataclass(frozen=True)
class ModelParams:
    """Inverse temperature ``beta``, monomer penalty ``h0``, collision penalty ``h1``.

    Construction rejects nonpositive values, ``dim < 1`` and ``h0 >= h1``.
    """

    beta: float
    h0: float
    h1: float
    dim: int = 2

    def __post_init__(self):
        beta, h0, h1 = float(self.beta), float(self.h0), float(self.h1)
        if not (beta > 0 and math.isfinite(beta)):
            raise ValueError(f"beta must be positive and finite, got {beta}")
        if not h0 > 0:
            raise ValueError(f"h0 must be positive, got {h0}")
        if not h1 > 0:
            raise ValueError(f"h1 must be positive, got {h1}")
        if not h0 < h1:
            raise ValueError(f"h0 < h1 is required, got h0={h0}, h1={h1}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be an integer >= 1, got {self.dim}")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "h1", h1)
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def temperature(self) -> float:
        return 1.0 / self.beta

    def with_beta(self, beta: float) -> "ModelParams":
        return replace(self, beta=beta)


def params_from_temperature(temperature: float, h0: float, h1: float, dim: int = 2) -> ModelParams:
    if not temperature > 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    return ModelParams(1.0 / temperature, h0, h1, dim)


class EdgeId(NamedTuple):
    """Unordered vertex pair in canonical form ``i < j``."""

    i: int
    j: int


def edge(a: int, b: int) -> EdgeId:
    """Canonical edge between vertices ``a`` and ``b``."""
    if a == b:
        raise ValueError(f"self-loop ({a}, {a}) is not an edge")
    return EdgeId(a, b) if a < b else EdgeId(b, a)


def n_edges(n: int) -> int:
    return n * (n - 1) // 2


def edge_index(e: EdgeId, n: int) -> int:
    """Position of ``e`` in the canonical order (0,1), (0,2), ..., (n-2,n-1)."""
    i, j = e
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def edge_from_index(k: int, n: int) -> EdgeId:
    if not 0 <= k < n_edges(n):
        raise IndexError(f"edge index {k} out of range for n={n}")
    i = 0
    row = n - 1
    while k >= row:
        k -= row
        i += 1
        row -= 1
    return EdgeId(i, i + 1 + k)


def all_edges(n: int) -> Iterator[EdgeId]:
    """Every edge of the complete graph on ``n`` vertices, canonical order."""
    for i in range(n):
        for j in range(i + 1, n):
            yield EdgeId(i, j)


def edge_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Endpoint index arrays ``(I, J)`` of every edge in canonical order."""
    i, j = np.triu_indices(n, k=1)
    return i.astype(np.int64), j.astype(np.int64)


class PointSet:
    """Finite ordered set of distinct points in R^dim.

    The coordinate array is stored read-only; vertex ``k`` is row ``k``.
    """

    __slots__ = ("_coords",)

    def __init__(self, points, dim: int | None = None):
        coords = np.array(points, dtype=float)
        if coords.size == 0:
            coords = coords.reshape(0, 2 if dim is None else dim)
        if coords.ndim == 1 and dim == 1:
            coords = coords.reshape(-1, 1)
        if coords.ndim != 2:
            raise ValueError("points must be a sequence of coordinate vectors")
        if dim is not None and coords.shape[1] != dim:
            raise ValueError(f"expected {dim} coordinates per point, got {coords.shape[1]}")
        if coords.shape[1] < 1:
            raise ValueError("points need at least one coordinate")
        if not np.all(np.isfinite(coords)):
            raise ValueError("coordinates must be finite")
        if len(coords) > 1 and len(np.unique(coords, axis=0)) != len(coords):
            raise ValueError("points must be pairwise distinct")
        coords.setflags(write=False)
        self._coords = coords

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    @property
    def dim(self) -> int:
        return self._coords.shape[1]

    def __len__(self) -> int:
        return len(self._coords)

    def __getitem__(self, k: int) -> np.ndarray:
        return self._coords[k]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return self._coords.shape == other._coords.shape and bool(
            np.array_equal(self._coords, other._coords)
        )

    def __repr__(self) -> str:
        return f"PointSet(n={len(self)}, dim={self.dim})"

    def distance(self, a: int, b: int) -> float:
        return float(np.linalg.norm(self._coords[a] - self._coords[b]))

    def edge_lengths(self) -> np.ndarray:
        """Lengths of all C(n, 2) edges in canonical order."""
        i, j = edge_arrays(len(self))
        return np.linalg.norm(self._coords[i] - self._coords[j], axis=1)

    def lengths_of(self, edges: Sequence[EdgeId]) -> np.ndarray:
        if len(edges) == 0:
            return np.zeros(0)
        idx = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        return np.linalg.norm(self._coords[idx[:, 0]] - self._coords[idx[:, 1]], axis=1)


def edge_length(ps: PointSet, e: EdgeId) -> float:
    """Euclidean length of edge ``e``; always positive for a valid PointSet."""
    i, j = e
    n = len(ps)
    if not 0 <= i < j < n:
        raise IndexError(f"{e} is not a canonical edge of a {n}-point set")
    return ps.distance(i, j)


class Configuration:
    """Open edges over a fixed vertex count, with cached vertex degrees."""

    __slots__ = ("n", "_open", "_deg")

    def __init__(self, n: int, open_edges: Iterable[EdgeId] = ()):
        self.n = int(n)
        self._open: set[EdgeId] = set()
        self._deg = np.zeros(self.n, dtype=np.int64)
        for e in open_edges:
            self.open_edge(e)

    @classmethod
    def from_arrays(cls, n: int, i: np.ndarray, j: np.ndarray) -> "Configuration":
        """Build from canonical endpoint arrays without per-edge validation."""
        cfg = cls.__new__(cls)
        cfg.n = int(n)
        cfg._open = set(map(EdgeId._make, zip(i.tolist(), j.tolist())))
        cfg._deg = np.bincount(i, minlength=n) + np.bincount(j, minlength=n)
        return cfg

    def _check_edge(self, e: EdgeId) -> EdgeId:
        i, j = e
        if not 0 <= i < j < self.n:
            raise ValueError(f"{tuple(e)} is not a canonical edge for n={self.n}")
        return EdgeId(i, j)

    @property
    def degrees(self) -> np.ndarray:
        view = self._deg.view()
        view.setflags(write=False)
        return view

    def degree(self, v: int) -> int:
        return int(self._deg[v])

    @property
    def open_edges(self) -> frozenset[EdgeId]:
        return frozenset(self._open)

    def sorted_edges(self) -> list[EdgeId]:
        return sorted(self._open)

    def is_open(self, e: EdgeId) -> bool:
        return e in self._open

    def __contains__(self, e) -> bool:
        return e in self._open

    def __len__(self) -> int:
        return len(self._open)

    def open_edge(self, e: EdgeId) -> None:
        e = self._check_edge(e)
        if e not in self._open:
            self._open.add(e)
            self._deg[e.i] += 1
            self._deg[e.j] += 1

    def close_edge(self, e: EdgeId) -> None:
        e = self._check_edge(e)
        if e in self._open:
            self._open.remove(e)
            self._deg[e.i] -= 1
            self._deg[e.j] -= 1

    def flip(self, e: EdgeId) -> None:
        if e in self._open:
            self.close_edge(e)
        else:
            self.open_edge(e)

    def flipped(self, e: EdgeId) -> "Configuration":
        cfg = self.copy()
        cfg.flip(e)
        return cfg

    def copy(self) -> "Configuration":
        cfg = Configuration.__new__(Configuration)
        cfg.n = self.n
        cfg._open = set(self._open)
        cfg._deg = self._deg.copy()
        return cfg

    def incident_open(self, v: int) -> list[EdgeId]:
        return sorted(e for e in self._open if v in e)

    def check_invariants(self) -> None:
        """Recount degrees from scratch and compare with the cache."""
        deg = np.zeros(self.n, dtype=np.int64)
        for i, j in self._open:
            assert 0 <= i < j < self.n, (i, j)
            deg[i] += 1
            deg[j] += 1
        assert np.array_equal(deg, self._deg), "degree cache out of sync"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.n == other.n and self._open == other._open

    def __repr__(self) -> str:
        return f"Configuration(n={self.n}, open={self.sorted_edges()})"


@dataclass(frozen=True)
class Star:
    """Open/closed assignment on some edges incident to ``center``.

    ``assignment`` maps each assigned edge to True (open) or False (closed).
    A full star assigns every edge at the center.
    """

    center: int
    assignment: tuple[tuple[EdgeId, bool], ...]

    def __post_init__(self):
        for e, _ in self.assignment:
            if self.center not in e:
                raise ValueError(f"edge {tuple(e)} is not incident to center {self.center}")

    @classmethod
    def from_open(cls, center: int, n: int, open_neighbors: Iterable[int]) -> "Star":
        """Full star on a complete graph of ``n`` vertices."""
        nbrs = set(open_neighbors)
        return cls(
            center,
            tuple((edge(center, w), w in nbrs) for w in range(n) if w != center),
        )

    @property
    def open_edges(self) -> list[EdgeId]:
        return [e for e, is_open in self.assignment if is_open]

    @property
    def degree(self) -> int:
        return sum(1 for _, is_open in self.assignment if is_open)


def penalty(degree, params: ModelParams):
    """Vertex penalty: h0 at degree 0, zero at degree 1, h1*C(d,2) above.

    Accepts a scalar or an integer array.
    """
    d = np.asarray(degree)
    if np.any(d < 0):
        raise ValueError("degree must be nonnegative")
    out = np.where(d == 0, params.h0, params.h1 * d * (d - 1) / 2.0)
    return float(out) if out.ndim == 0 else out


def energy(ps: PointSet, cfg: Configuration, params: ModelParams) -> float:
    """Free-boundary Hamiltonian: open-edge lengths plus vertex penalties."""
    if cfg.n != len(ps):
        raise ValueError("configuration and point set sizes differ")
    edges = cfg.sorted_edges()
    length = float(ps.lengths_of(edges).sum()) if edges else 0.0
    return length + float(np.sum(penalty(cfg.degrees, params))) if cfg.n else length


def open_cost(length, d1, d2, params: ModelParams):
    """Energy change of opening an edge whose endpoints have degrees d1, d2.

    Degrees exclude the edge itself.  Works elementwise on arrays.
    """
    d1 = np.asarray(d1)
    d2 = np.asarray(d2)
    return (
        length
        + params.h1 * (d1 + d2)
        - params.h0 * (d1 == 0)
        - params.h0 * (d2 == 0)
    )


def energy_delta(ps: PointSet, cfg: Configuration, e: EdgeId, params: ModelParams) -> float:
    """``energy(cfg with e flipped) - energy(cfg)`` from the endpoint degrees."""
    e = edge(*e)
    is_open = e in cfg
    d1 = cfg.degree(e.i) - is_open
    d2 = cfg.degree(e.j) - is_open
    delta = float(open_cost(edge_length(ps, e), d1, d2, params))
    return -delta if is_open else delta

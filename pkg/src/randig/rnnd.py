"""Nearest-neighbor digraphs over random point clouds.

Each of n i.i.d. points gets arcs to selected neighbors: either all of its
k nearest (``KNearest``) or the s-th nearest for s in a rank set
(``RankSubset``).  Distances use a full O(n^2) matrix; ties are broken by
lower vertex index and flagged with a warning (they have probability zero
under the continuous point distributions but can occur in floating point).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import rng as rngmod
from .digraph import Digraph, arc_slot
from .errors import UnsupportedExactError, ValidationError
from .estimate import EstimateWithError

POINT_DISTRIBUTIONS = ("uniform", "normal")
NORMS = ("L1", "L2", "Linf")


class DistanceTieWarning(UserWarning):
    """Two candidate neighbors at exactly equal distance."""


@dataclass(frozen=True)
class KNearest:
    """Arcs from each vertex to all of its k nearest neighbors."""

    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValidationError("k must be >= 1")

    @property
    def max_rank(self) -> int:
        return self.k

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(range(1, self.k + 1))

    @property
    def out_degree(self) -> int:
        return self.k


@dataclass(frozen=True)
class RankSubset:
    """Arcs from each vertex to its s-th nearest neighbor for each s in a
    nonempty subset of {1..k}."""

    selected: frozenset[int]

    def __init__(self, selected):
        object.__setattr__(self, "selected", frozenset(int(s) for s in selected))
        self.__post_init__()

    def __post_init__(self) -> None:
        if not self.selected:
            raise ValidationError("rank subset must be nonempty")
        if any(s < 1 for s in self.selected):
            raise ValidationError("ranks are positive integers")

    @property
    def max_rank(self) -> int:
        return max(self.selected)

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(sorted(self.selected))

    @property
    def out_degree(self) -> int:
        return len(self.selected)


NndRule = Union[KNearest, RankSubset]


@dataclass(frozen=True, eq=False)
class PointCloud:
    """n points in R^d with a norm tag."""

    coords: np.ndarray
    norm: str = "L2"

    def __post_init__(self) -> None:
        c = np.asarray(self.coords, dtype=float)
        if c.ndim != 2:
            raise ValidationError("coords must be an n x d matrix")
        if c.shape[0] < 3:
            raise ValidationError("a point cloud needs at least 3 points")
        if not np.all(np.isfinite(c)):
            raise ValidationError("coordinates must be finite")
        if self.norm not in NORMS:
            raise ValidationError(f"norm must be one of {NORMS}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    @classmethod
    def from_csv(cls, path, norm: str = "L2") -> "PointCloud":
        return cls(coords=np.loadtxt(path, delimiter=",", ndmin=2), norm=norm)

    def to_csv(self, path) -> None:
        np.savetxt(path, self.coords, delimiter=",")


@dataclass(frozen=True)
class Rnnd:
    """Model spec: nearest-neighbor digraph of n i.i.d. points in R^d.

    ``dist`` is "uniform" (the unit cube) or "normal" (standard normal).
    """

    n: int
    rule: NndRule
    d: int = 2
    dist: str = "uniform"
    norm: str = "L2"

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValidationError("nearest-neighbor digraphs need n >= 3")
        if self.rule.max_rank >= self.n - 1:
            raise ValidationError(
                f"neighbor rank {self.rule.max_rank} requires n > {self.rule.max_rank + 1}")
        if self.d < 1:
            raise ValidationError("dimension must be >= 1")
        if self.dist not in POINT_DISTRIBUTIONS:
            raise ValidationError(f"unknown point distribution {self.dist!r}")
        if self.norm not in NORMS:
            raise ValidationError(f"norm must be one of {NORMS}")


def _distance_matrix(coords: np.ndarray, norm: str) -> np.ndarray:
    diff = coords[:, np.newaxis, :] - coords[np.newaxis, :, :]
    if norm == "L1":
        return np.abs(diff).sum(axis=-1)
    if norm == "Linf":
        return np.abs(diff).max(axis=-1)
    return np.sqrt((diff * diff).sum(axis=-1))


def knn_digraph(cloud: PointCloud, rule: NndRule) -> Digraph:
    """Construct the nearest-neighbor digraph of a fixed point cloud."""
    n = cloud.n
    if rule.max_rank >= n - 1:
        raise ValidationError(f"neighbor rank {rule.max_rank} requires n > {rule.max_rank + 1}")
    dist = _distance_matrix(cloud.coords, cloud.norm)
    np.fill_diagonal(dist, np.inf)
    for row in dist:
        finite = np.sort(row[np.isfinite(row)])
        if np.any(finite[1:] == finite[:-1]):
            warnings.warn("equal distances broken by lower vertex index", DistanceTieWarning)
            break
    order = np.argsort(dist, axis=1, kind="stable")  # stable sort = index tie-break
    mask = 0
    for i in range(n):
        for s in rule.ranks:
            mask |= 1 << arc_slot(n, i + 1, int(order[i, s - 1]) + 1)
    return Digraph(n, mask)


def _sample_coords(spec: Rnnd, generator: np.random.Generator, count: int) -> np.ndarray:
    if spec.dist == "uniform":
        return generator.random((count, spec.n, spec.d))
    return generator.standard_normal((count, spec.n, spec.d))


def _batch_neighbor_order(coords: np.ndarray, norm: str) -> np.ndarray:
    """Per-sample stable argsort of the pairwise distance matrices."""
    diff = coords[:, :, np.newaxis, :] - coords[:, np.newaxis, :, :]
    if norm == "L1":
        dist = np.abs(diff).sum(axis=-1)
    elif norm == "Linf":
        dist = np.abs(diff).max(axis=-1)
    else:
        dist = (diff * diff).sum(axis=-1)  # squared distances order the same
    n = coords.shape[1]
    idx = np.arange(n)
    dist[:, idx, idx] = np.inf
    return np.argsort(dist, axis=2, kind="stable")


def _arc_matrix(spec: Rnnd, order: np.ndarray) -> np.ndarray:
    """Boolean (count, n, n) adjacency: arcs[c, i, j] = arc (i+1, j+1)."""
    count, n = order.shape[0], order.shape[1]
    arcs = np.zeros((count, n, n), dtype=bool)
    rows = np.arange(count)[:, np.newaxis]
    for i in range(n):
        for s in spec.rule.ranks:
            arcs[rows[:, 0], i, order[:, i, s - 1]] = True
    return arcs


def sample_rnnd(spec: Rnnd, seed: int) -> Digraph:
    """One seeded draw: n i.i.d. points, then the nearest-neighbor digraph."""
    if spec.n <= 8:
        return Digraph(spec.n, int(sample_rnnd_masks(spec, seed, 1)[0]))
    generator = rngmod.stream(seed, "chunk", 0, "point")
    coords = _sample_coords(spec, generator, 1)[0]
    return knn_digraph(PointCloud(coords=coords, norm=spec.norm), spec.rule)


def sample_rnnd_masks(spec: Rnnd, seed: int, count: int) -> np.ndarray:
    """Arc bitmasks of ``count`` seeded draws (requires n <= 8 for uint64)."""
    if spec.n > 8:
        raise ValidationError("bitmask sampling supports n <= 8; use rnnd_stats for larger n")
    slot_table = np.zeros((spec.n, spec.n), dtype=np.uint64)
    for i in range(spec.n):
        for j in range(spec.n):
            if i != j:
                slot_table[i, j] = arc_slot(spec.n, i + 1, j + 1)

    def one_chunk(chunk_index: int, size: int) -> np.ndarray:
        generator = rngmod.stream(seed, "chunk", chunk_index, "point")
        order = _batch_neighbor_order(_sample_coords(spec, generator, size), spec.norm)
        masks = np.zeros(size, dtype=np.uint64)
        for i in range(spec.n):
            for s in spec.rule.ranks:
                masks |= np.uint64(1) << slot_table[i][order[:, i, s - 1]]
        return masks

    return np.concatenate(rngmod.map_chunks(count, one_chunk))


def rnnd_exact_pmf_n3k1():
    """Exact law for n = 3, k = 1: the closest pair are mutual nearest
    neighbors and the third point attaches to one of them, so the six
    digraphs {(i,j),(j,i),(k,i)} each have probability 1/6 regardless of
    dimension, norm, or point distribution."""
    from .models import Pmf  # local import keeps the module dependency one-way

    masses = np.zeros(64)
    for i, j, k in ((1, 2, 3), (1, 3, 2), (2, 1, 3), (2, 3, 1), (3, 1, 2), (3, 2, 1)):
        d = Digraph.from_arcs(3, [(i, j), (j, i), (k, i)])
        masses[d.arcs] += 1.0 / 6.0
    return Pmf.from_dense(3, "digraph", masses)


def exact_pmf_rnnd(spec: Rnnd):
    """Exact PMF where known: only the distribution-free n = 3, k = 1 case."""
    if spec.n == 3 and spec.rule.ranks == (1,):
        return rnnd_exact_pmf_n3k1()
    raise UnsupportedExactError(
        "exact nearest-neighbor law is only available for n = 3 with rank set {1}")


@dataclass(frozen=True)
class RnndStats:
    """Aggregates over seeded draws of one spec."""

    spec: Rnnd
    n_samples: int
    seed: int
    out_degree_min: int
    out_degree_max: int
    in_degree_max: int
    n_s_histogram: dict[int, int]
    arc_marginal_est: EstimateWithError
    joint_pair_est: EstimateWithError


def rnnd_stats(spec: Rnnd, n_samples: int, seed: int) -> RnndStats:
    """Sample ``n_samples`` digraphs and accumulate degree and arc statistics.

    Also verifies, per sample, that the underlying edge count equals the arc
    count minus the number of symmetric pairs.
    """
    if n_samples < 1000:
        raise ValidationError("statistics need at least 1000 samples")
    out_min, out_max, in_max = spec.n, 0, 0
    ns_hist: dict[int, int] = {}
    arc_hits = 0
    joint_hits = 0

    def one_chunk(chunk_index: int, size: int):
        generator = rngmod.stream(seed, "chunk", chunk_index, "point")
        order = _batch_neighbor_order(_sample_coords(spec, generator, size), spec.norm)
        arcs = _arc_matrix(spec, order)
        sym = arcs & arcs.transpose(0, 2, 1)
        n_s = sym.sum(axis=(1, 2)) // 2
        n_a = arcs.sum(axis=(1, 2))
        n_e = (arcs | arcs.transpose(0, 2, 1)).sum(axis=(1, 2)) // 2
        if not np.array_equal(n_e, n_a - n_s):
            raise AssertionError("edge count must equal arc count minus symmetric pairs")
        out_deg = arcs.sum(axis=2)
        in_deg = arcs.sum(axis=1)
        return (int(out_deg.min()), int(out_deg.max()), int(in_deg.max()),
                np.bincount(n_s), int(arcs[:, 0, 1].sum()),
                int((arcs[:, 0, 1] & arcs[:, 0, 2]).sum()))

    for omin, omax, imax, hist, hits, jhits in rngmod.map_chunks(n_samples, one_chunk):
        out_min = min(out_min, omin)
        out_max = max(out_max, omax)
        in_max = max(in_max, imax)
        for value, count in enumerate(hist):
            if count:
                ns_hist[value] = ns_hist.get(value, 0) + int(count)
        arc_hits += hits
        joint_hits += jhits

    return RnndStats(
        spec=spec,
        n_samples=n_samples,
        seed=seed,
        out_degree_min=out_min,
        out_degree_max=out_max,
        in_degree_max=in_max,
        n_s_histogram=dict(sorted(ns_hist.items())),
        arc_marginal_est=EstimateWithError.from_indicator_mean(arc_hits / n_samples, n_samples),
        joint_pair_est=EstimateWithError.from_indicator_mean(joint_hits / n_samples, n_samples),
    )

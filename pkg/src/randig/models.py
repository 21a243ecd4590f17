"""Random digraph and random graph families: exact probability mass
functions at small n and seeded samplers at all n.

Digraph families
    Uniform   - uniform over digraphs with exactly m arcs
    Ard       - every arc independent with probability p_a
    Gard      - arc (i, j) independent with probability p[i, j]
    Vard/Vrd  - i.i.d. vertex labels, arcs from a kernel ([0,1]- or {0,1}-valued)
    Drd       - orient the edges of a random graph: one way with probability
                1 - p_d each, both ways with probability 2 p_d - 1
    Derd      - Drd generated by Erg
    Rnnd      - nearest-neighbor digraph (see randig.rnnd)

Graph families
    Erg       - every edge independent with probability p_e
    Verg/Vrg  - the undirected kernel analogues (symmetric kernels)

Exact PMFs enumerate all 2^(n(n-1)) states and therefore require
n(n-1) <= 20 and (for kernel families) a finite kernel.  Samplers are
deterministic functions of (model, seed) built on named Philox streams;
batch sampling is chunked so results never depend on the thread count.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product
from typing import Literal, Union

import numpy as np

from . import rng as rngmod
from .digraph import (
    Digraph,
    Graph,
    arc_slot_pairs,
    arc_to_edge_slot,
    edge_slot_pairs,
    num_arc_slots,
    num_edge_slots,
    opposite_arc_slots,
    popcount_array,
    symmetric_pair_counts,
    underlying_masks,
)
from .errors import (
    DegenerateModelError,
    NoClosedFormError,
    UnsupportedExactError,
    ValidationError,
)
from .kernels import (
    FiniteKernel,
    KernelSpec,
    kernel_from_json,
    kernel_to_json,
    underlying_kernel,
)
from .rnnd import KNearest, RankSubset, Rnnd, exact_pmf_rnnd, sample_rnnd_masks

MAX_EXACT_SLOTS = 20
DENSE_SLOT_LIMIT = 12
PMF_TOTAL_TOL = 1e-9

Kind = Literal["digraph", "graph"]


# ---------------------------------------------------------------------------
# Probability mass functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Pmf:
    """Distribution over all digraphs (or graphs) on [n].

    Stored dense (a vector indexed by bitmask) when the state space has at
    most 2^12 elements, sparse (mask -> mass) otherwise.
    """

    n: int
    kind: Kind
    _dense: np.ndarray | None
    _sparse: dict[int, float] | None

    @property
    def num_slots(self) -> int:
        return num_arc_slots(self.n) if self.kind == "digraph" else num_edge_slots(self.n)

    @property
    def num_states(self) -> int:
        return 1 << self.num_slots

    @classmethod
    def from_dense(cls, n: int, kind: Kind, masses: np.ndarray) -> "Pmf":
        masses = np.asarray(masses, dtype=float)
        slots = num_arc_slots(n) if kind == "digraph" else num_edge_slots(n)
        if masses.shape != (1 << slots,):
            raise ValidationError(f"dense pmf needs length {1 << slots}, got {masses.shape}")
        if np.any(masses < -1e-15) or np.any(masses > 1.0 + 1e-12):
            raise ValidationError("masses must lie in [0, 1]")
        if abs(float(masses.sum()) - 1.0) > PMF_TOTAL_TOL:
            raise ValidationError(f"total mass {masses.sum()} not within {PMF_TOTAL_TOL} of 1")
        masses = np.clip(masses, 0.0, 1.0)
        if slots <= DENSE_SLOT_LIMIT:
            masses.setflags(write=False)
            return cls(n=n, kind=kind, _dense=masses, _sparse=None)
        nz = np.nonzero(masses)[0]
        return cls(n=n, kind=kind, _dense=None,
                   _sparse={int(m): float(masses[m]) for m in nz})

    @classmethod
    def from_mapping(cls, n: int, kind: Kind, masses: dict[int, float]) -> "Pmf":
        slots = num_arc_slots(n) if kind == "digraph" else num_edge_slots(n)
        if slots <= DENSE_SLOT_LIMIT:
            dense = np.zeros(1 << slots)
            for mask, p in masses.items():
                dense[mask] = p
            return cls.from_dense(n, kind, dense)
        total = 0.0
        for mask, p in masses.items():
            if not 0 <= mask < (1 << slots):
                raise ValidationError(f"state {mask} out of range")
            if not 0.0 <= p <= 1.0 + 1e-12:
                raise ValidationError("masses must lie in [0, 1]")
            total += p
        if abs(total - 1.0) > PMF_TOTAL_TOL:
            raise ValidationError(f"total mass {total} not within {PMF_TOTAL_TOL} of 1")
        return cls(n=n, kind=kind, _dense=None,
                   _sparse={int(m): float(p) for m, p in masses.items() if p != 0.0})

    def mass(self, state) -> float:
        """Mass of a Digraph, Graph, or raw bitmask."""
        mask = self._as_mask(state)
        if self._dense is not None:
            return float(self._dense[mask])
        return self._sparse.get(mask, 0.0)

    def _as_mask(self, state) -> int:
        if isinstance(state, Digraph):
            if self.kind != "digraph" or state.n != self.n:
                raise ValidationError("state does not match this pmf")
            return state.arcs
        if isinstance(state, Graph):
            if self.kind != "graph" or state.n != self.n:
                raise ValidationError("state does not match this pmf")
            return state.edges
        mask = int(state)
        if not 0 <= mask < self.num_states:
            raise ValidationError(f"state {mask} out of range")
        return mask

    def dense(self) -> np.ndarray:
        """Materialize the full mass vector (read-only)."""
        if self._dense is not None:
            return self._dense
        out = np.zeros(self.num_states)
        for mask, p in self._sparse.items():
            out[mask] = p
        out.setflags(write=False)
        return out

    def items(self):
        """(mask, mass) over the support."""
        if self._dense is not None:
            for mask in np.nonzero(self._dense)[0]:
                yield int(mask), float(self._dense[mask])
        else:
            yield from sorted(self._sparse.items())

    def total(self) -> float:
        if self._dense is not None:
            return float(self._dense.sum())
        return float(sum(self._sparse.values()))

    def support_size(self) -> int:
        if self._dense is not None:
            return int(np.count_nonzero(self._dense))
        return len(self._sparse)

    def to_csv_rows(self):
        """(hex, probability-string) rows with 17 significant digits."""
        width = (self.num_slots + 7) // 8
        for mask, p in self.items():
            yield mask.to_bytes(width, "little").hex(), format(p, ".17g")


# ---------------------------------------------------------------------------
# Model specifications
# ---------------------------------------------------------------------------

def _check_open_unit(name: str, value: float) -> None:
    if not 0.0 < value < 1.0:
        if value in (0.0, 1.0):
            raise DegenerateModelError(f"{name}={value} gives a degenerate model")
        raise ValidationError(f"{name} must lie in (0, 1), got {value}")


def _check_direction(p_d: float) -> None:
    if p_d == 1.0:
        raise DegenerateModelError("p_d=1 removes the randomness in the direction")
    if not 0.5 <= p_d < 1.0:
        raise ValidationError(f"direction probability must lie in [1/2, 1), got {p_d}")


@dataclass(frozen=True)
class Uniform:
    """Uniform over the digraphs on [n] with exactly m arcs."""

    n: int
    m: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValidationError("uniform model needs n >= 2")
        if self.m in (0, num_arc_slots(self.n)):
            raise DegenerateModelError(f"m={self.m} gives a degenerate model")
        if not 0 < self.m < num_arc_slots(self.n):
            raise ValidationError(f"need 0 < m < n(n-1), got m={self.m}")


@dataclass(frozen=True)
class Ard:
    """Every arc present independently with probability p_a."""

    n: int
    p_a: float

    def __post_init__(self) -> None:
        _check_open_unit("p_a", self.p_a)


@dataclass(frozen=True, eq=False)
class Gard:
    """Arc (i, j) present independently with probability p[i-1, j-1];
    the diagonal of p is ignored (no loops exist)."""

    n: int
    p: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.p, dtype=float)
        if p.shape != (self.n, self.n):
            raise ValidationError(f"p must be an {self.n} x {self.n} matrix")
        off = ~np.eye(self.n, dtype=bool)
        if np.any(p[off] < 0.0) or np.any(p[off] > 1.0):
            raise ValidationError("arc probabilities must lie in [0, 1]")
        p = p.copy()
        np.fill_diagonal(p, 0.0)
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def arc_probs(self) -> np.ndarray:
        """Per-slot probabilities in arc-slot order."""
        return np.array([self.p[i - 1, j - 1] for i, j in arc_slot_pairs(self.n)])

    def is_constant(self) -> bool:
        probs = self.arc_probs()
        return bool(np.all(probs == probs[0]))


@dataclass(frozen=True)
class Vard:
    """Vertex labels i.i.d. from the kernel's space; arc (i, j) inserted
    independently with probability phi(x_i, x_j) given the labels."""

    n: int
    kernel: KernelSpec

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValidationError("need n >= 2")


@dataclass(frozen=True)
class Vrd(Vard):
    """Vard with a binary kernel: the labels determine the digraph."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if not self.kernel.is_binary:
            raise ValidationError("a vertex random digraph needs a {0,1}-valued kernel")


@dataclass(frozen=True)
class Erg:
    """Every edge present independently with probability p_e."""

    n: int
    p_e: float

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValidationError("need n >= 2")
        if not 0.0 <= self.p_e <= 1.0:
            raise ValidationError(f"p_e must lie in [0, 1], got {self.p_e}")


@dataclass(frozen=True)
class Verg:
    """Undirected kernel model: edge {i, j} inserted with probability
    phi(x_i, x_j); the kernel must be symmetric."""

    n: int
    kernel: KernelSpec

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValidationError("need n >= 2")
        if not self.kernel.is_symmetric:
            raise ValidationError("graph kernels must be symmetric")


@dataclass(frozen=True)
class Vrg(Verg):
    """Verg with a binary kernel."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if not self.kernel.is_binary:
            raise ValidationError("a vertex random graph needs a {0,1}-valued kernel")


@dataclass(frozen=True)
class Drd:
    """Direction-randomized digraph: draw a graph from ``graph_model``,
    then independently per edge {i, j} put only (i, j) with probability
    1 - p_d, only (j, i) with probability 1 - p_d, or both with
    probability 2 p_d - 1."""

    graph_model: "GraphModel"
    p_d: float

    def __post_init__(self) -> None:
        _check_direction(self.p_d)

    @property
    def n(self) -> int:
        return self.graph_model.n


@dataclass(frozen=True)
class Derd:
    """Drd generated by Erg(n, p_e)."""

    n: int
    p_e: float
    p_d: float

    def __post_init__(self) -> None:
        if self.p_e == 0.0:
            raise DegenerateModelError("p_e=0 gives a degenerate (empty) digraph")
        if not 0.0 < self.p_e <= 1.0:
            raise ValidationError(f"p_e must lie in (0, 1], got {self.p_e}")
        _check_direction(self.p_d)

    def as_drd(self) -> Drd:
        return Drd(graph_model=Erg(self.n, self.p_e), p_d=self.p_d)


GraphModel = Union[Erg, Verg, Vrg]
DigraphModel = Union[Uniform, Ard, Gard, Vard, Vrd, Drd, Derd, Rnnd]
ModelSpec = Union[DigraphModel, GraphModel]


def model_kind(model: ModelSpec) -> Kind:
    return "graph" if isinstance(model, (Erg, Verg, Vrg)) else "digraph"


def model_n(model: ModelSpec) -> int:
    return model.n


def _slots_for(model: ModelSpec) -> int:
    return num_arc_slots(model.n) if model_kind(model) == "digraph" else num_edge_slots(model.n)


# ---------------------------------------------------------------------------
# Exact probability mass functions
# ---------------------------------------------------------------------------

def supports_exact(model: ModelSpec) -> bool:
    """Whether exact_pmf applies to this model."""
    if isinstance(model, Rnnd):
        return model.n == 3 and model.rule.ranks == (1,)
    if _slots_for(model) > MAX_EXACT_SLOTS:
        return False
    if isinstance(model, (Vard, Vrd, Verg, Vrg)):
        return isinstance(model.kernel, FiniteKernel)
    if isinstance(model, Drd):
        return num_arc_slots(model.n) <= MAX_EXACT_SLOTS and supports_exact(model.graph_model)
    return True


def exact_pmf(model: ModelSpec) -> Pmf:
    """Exact distribution by the family's closed-form formula."""
    if isinstance(model, Rnnd):
        return exact_pmf_rnnd(model)
    if _slots_for(model) > MAX_EXACT_SLOTS:
        raise UnsupportedExactError(
            f"exact pmf supports at most 2^{MAX_EXACT_SLOTS} states, got n={model.n}")
    if isinstance(model, Uniform):
        return _pmf_uniform(model)
    if isinstance(model, Ard):
        return _pmf_independent_slots(model.n, "digraph",
                                      np.full(num_arc_slots(model.n), model.p_a))
    if isinstance(model, Gard):
        return _pmf_independent_slots(model.n, "digraph", model.arc_probs())
    if isinstance(model, Erg):
        return _pmf_independent_slots(model.n, "graph",
                                      np.full(num_edge_slots(model.n), model.p_e))
    if isinstance(model, (Vard, Vrd)):
        return _pmf_kernel(model.n, model.kernel, "digraph")
    if isinstance(model, (Verg, Vrg)):
        return _pmf_kernel(model.n, model.kernel, "graph")
    if isinstance(model, Derd):
        return _pmf_drd(model.as_drd())
    if isinstance(model, Drd):
        return _pmf_drd(model)
    raise ValidationError(f"unknown model {model!r}")


def _pmf_uniform(model: Uniform) -> Pmf:
    k = num_arc_slots(model.n)
    masks = np.arange(1 << k, dtype=np.uint64)
    counts = popcount_array(masks, k)
    masses = np.where(counts == model.m, 1.0 / math.comb(k, model.m), 0.0)
    return Pmf.from_dense(model.n, "digraph", masses)


def _pmf_independent_slots(n: int, kind: Kind, probs: np.ndarray) -> Pmf:
    k = probs.size
    masks = np.arange(1 << k, dtype=np.uint64)
    masses = np.ones(1 << k)
    for s in range(k):
        bit = ((masks >> np.uint64(s)) & np.uint64(1)).astype(bool)
        masses *= np.where(bit, probs[s], 1.0 - probs[s])
    return Pmf.from_dense(n, kind, masses)


def _kernel_slot_probs(kernel: FiniteKernel, labels: np.ndarray, n: int, kind: Kind) -> np.ndarray:
    """Per-slot arc/edge probabilities for rows of label assignments."""
    pairs = arc_slot_pairs(n) if kind == "digraph" else edge_slot_pairs(n)
    cols = [kernel.phi[labels[:, i - 1], labels[:, j - 1]] for i, j in pairs]
    return np.stack(cols, axis=1)


def _pmf_kernel(n: int, kernel: KernelSpec, kind: Kind) -> Pmf:
    if not isinstance(kernel, FiniteKernel):
        raise UnsupportedExactError(
            "exact pmf needs a finite kernel; continuous kernels are sampled only")
    k = num_arc_slots(n) if kind == "digraph" else num_edge_slots(n)
    masks = np.arange(1 << k, dtype=np.uint64)
    bits = np.stack([((masks >> np.uint64(s)) & np.uint64(1)).astype(bool) for s in range(k)],
                    axis=1)  # (states, k)
    label_rows = np.array(list(product(range(kernel.size), repeat=n)), dtype=np.int64)
    tuple_weights = kernel.weights[label_rows].prod(axis=1)
    masses = np.zeros(1 << k)
    step = max(1, (1 << 22) // (1 << k))  # keep the (rows, states) buffer small
    for start in range(0, label_rows.shape[0], step):
        rows = label_rows[start:start + step]
        probs = _kernel_slot_probs(kernel, rows, n, kind)  # (rows, k)
        cond = np.ones((rows.shape[0], 1 << k))
        for s in range(k):
            cond *= np.where(bits[np.newaxis, :, s], probs[:, s, np.newaxis],
                             1.0 - probs[:, s, np.newaxis])
        masses += tuple_weights[start:start + step] @ cond
    return Pmf.from_dense(n, kind, masses)


def _pmf_drd(model: Drd) -> Pmf:
    n = model.n
    graph_pmf = exact_pmf(model.graph_model).dense()
    k = num_arc_slots(n)
    masks = np.arange(1 << k, dtype=np.uint64)
    n_a = popcount_array(masks, k)
    n_s = symmetric_pair_counts(n, masks)
    n_as = n_a - 2 * n_s
    umasks = underlying_masks(n, masks)
    masses = (graph_pmf[umasks]
              * np.power(1.0 - model.p_d, n_as)
              * np.power(2.0 * model.p_d - 1.0, n_s))
    return Pmf.from_dense(n, "digraph", masses)


# ---------------------------------------------------------------------------
# Conditional pattern probability
# ---------------------------------------------------------------------------

def conditional_pattern_prob(kernel: KernelSpec, x, d: Digraph) -> float:
    """P_x(D): product of phi over present arcs and 1 - phi over absent ones."""
    if len(x) != d.n:
        raise ValidationError(f"need {d.n} sample points, got {len(x)}")
    for point in x:
        kernel.validate_point(point)
    prob = 1.0
    for s, (i, j) in enumerate(arc_slot_pairs(d.n)):
        p = float(np.asarray(kernel.phi_pairs(np.asarray(x[i - 1]), np.asarray(x[j - 1]))))
        prob *= p if d.arcs >> s & 1 else 1.0 - p
    return prob


# ---------------------------------------------------------------------------
# Seeded sampling
# ---------------------------------------------------------------------------

def sample(model: ModelSpec, seed: int) -> Digraph | Graph:
    """One seeded draw; deterministic for fixed (model, seed)."""
    mask = int(sample_masks(model, seed, 1)[0])
    if model_kind(model) == "digraph":
        return Digraph(model.n, mask)
    return Graph(model.n, mask)


def sample_masks(model: ModelSpec, seed: int, count: int) -> np.ndarray:
    """Bitmasks of ``count`` seeded draws (uint64; requires <= 63 slots).

    Chunked into fixed blocks with per-chunk derived streams, so the result
    is independent of thread count and stable under count extension.
    """
    if count < 1:
        raise ValidationError("count must be >= 1")
    if _slots_for(model) > 63:
        raise ValidationError("bitmask sampling supports at most 63 slots")
    if isinstance(model, Rnnd):
        return sample_rnnd_masks(model, seed, count)
    chunks = rngmod.map_chunks(count, lambda c, size: _sample_chunk(model, seed, c, size))
    return np.concatenate(chunks)


def _pack_bits(bits: np.ndarray) -> np.ndarray:
    """(count, slots) booleans -> uint64 masks."""
    k = bits.shape[1]
    weights = (np.uint64(1) << np.arange(k, dtype=np.uint64))
    return bits.astype(np.uint64) @ weights


def _sample_chunk(model: ModelSpec, seed: int, chunk: int, size: int) -> np.ndarray:
    if isinstance(model, Uniform):
        u = rngmod.stream(seed, "chunk", chunk, "subset").random((size, num_arc_slots(model.n)))
        chosen = np.argpartition(u, model.m - 1, axis=1)[:, :model.m]
        bits = np.zeros((size, num_arc_slots(model.n)), dtype=bool)
        np.put_along_axis(bits, chosen, True, axis=1)
        return _pack_bits(bits)
    if isinstance(model, Ard):
        u = rngmod.stream(seed, "chunk", chunk, "arc").random((size, num_arc_slots(model.n)))
        return _pack_bits(u < model.p_a)
    if isinstance(model, Gard):
        u = rngmod.stream(seed, "chunk", chunk, "arc").random((size, num_arc_slots(model.n)))
        return _pack_bits(u < model.arc_probs()[np.newaxis, :])
    if isinstance(model, Erg):
        u = rngmod.stream(seed, "chunk", chunk, "edge").random((size, num_edge_slots(model.n)))
        return _pack_bits(u < model.p_e)
    if isinstance(model, (Vard, Vrd)):
        return _sample_kernel_chunk(model.n, model.kernel, "digraph", seed, chunk, size)
    if isinstance(model, (Verg, Vrg)):
        return _sample_kernel_chunk(model.n, model.kernel, "graph", seed, chunk, size)
    if isinstance(model, Derd):
        return _sample_chunk(model.as_drd(), seed, chunk, size)
    if isinstance(model, Drd):
        return _sample_drd_chunk(model, seed, chunk, size)
    raise ValidationError(f"unknown model {model!r}")


def _sample_kernel_chunk(n: int, kernel: KernelSpec, kind: Kind,
                         seed: int, chunk: int, size: int) -> np.ndarray:
    points = kernel.sample_points(rngmod.stream(seed, "chunk", chunk, "vertex"), (size, n))
    pairs = arc_slot_pairs(n) if kind == "digraph" else edge_slot_pairs(n)
    probs = np.stack([kernel.phi_pairs(points[:, i - 1, ...], points[:, j - 1, ...])
                      for i, j in pairs], axis=1)
    u = rngmod.stream(seed, "chunk", chunk, "arc").random((size, len(pairs)))
    return _pack_bits(u < probs)


def _sample_drd_chunk(model: Drd, seed: int, chunk: int, size: int) -> np.ndarray:
    n = model.n
    edges = _sample_chunk(model.graph_model, seed, chunk, size)
    u = rngmod.stream(seed, "chunk", chunk, "orient").random((size, num_edge_slots(n)))
    opp = opposite_arc_slots(n)
    masks = np.zeros(size, dtype=np.uint64)
    one_way = 1.0 - model.p_d
    for e in range(num_edge_slots(n)):
        present = ((edges >> np.uint64(e)) & np.uint64(1)).astype(bool)
        forward = u[:, e] < one_way
        backward = (u[:, e] >= one_way) & (u[:, e] < 2.0 * one_way)
        both = u[:, e] >= 2.0 * one_way
        masks |= np.where(present & (forward | both), np.uint64(1) << opp[e, 0].astype(np.uint64),
                          np.uint64(0))
        masks |= np.where(present & (backward | both), np.uint64(1) << opp[e, 1].astype(np.uint64),
                          np.uint64(0))
    return masks


# ---------------------------------------------------------------------------
# Underlying (undirected) models
# ---------------------------------------------------------------------------

def underlying_model(model: DigraphModel) -> GraphModel:
    """Closed-form underlying random graph of a digraph model.

    Ard(p_a) -> Erg(2 p_a - p_a^2); kernel models symmetrize the kernel;
    a Drd returns its generator.  Families without a closed form (Uniform,
    non-constant Gard, Rnnd) raise NoClosedFormError; their underlying
    distribution can still be computed numerically via underlying_pmf.
    """
    if isinstance(model, Ard):
        return Erg(model.n, 2.0 * model.p_a - model.p_a ** 2)
    if isinstance(model, Gard) and model.is_constant():
        p = float(model.arc_probs()[0])
        return Erg(model.n, 2.0 * p - p * p)
    if isinstance(model, Vrd):
        return Vrg(model.n, underlying_kernel(model.kernel))
    if isinstance(model, Vard):
        return Verg(model.n, underlying_kernel(model.kernel))
    if isinstance(model, Derd):
        return Erg(model.n, model.p_e)
    if isinstance(model, Drd):
        return model.graph_model
    raise NoClosedFormError(
        f"{type(model).__name__} has no closed-form underlying model; "
        "use underlying_pmf(exact_pmf(model)) instead")


def underlying_pmf(pmf: Pmf) -> Pmf:
    """Push a digraph distribution to its underlying-graph distribution."""
    if pmf.kind != "digraph":
        raise ValidationError("underlying_pmf expects a digraph pmf")
    n = pmf.n
    masses = np.zeros(1 << num_edge_slots(n))
    if pmf._dense is not None:
        umasks = underlying_masks(n, np.arange(pmf.num_states, dtype=np.uint64))
        np.add.at(masses, umasks.astype(np.int64), pmf._dense)
    else:
        a2e = arc_to_edge_slot(n)
        for mask, p in pmf.items():
            g = 0
            for s in range(num_arc_slots(n)):
                if mask >> s & 1:
                    g |= 1 << int(a2e[s])
            masses[g] += p
    return Pmf.from_dense(n, "graph", masses)


# ---------------------------------------------------------------------------
# JSON (de)serialization of model specs
# ---------------------------------------------------------------------------

def model_to_json(model: ModelSpec) -> dict:
    if isinstance(model, Uniform):
        return {"family": "uniform", "n": model.n, "m": model.m}
    if isinstance(model, Ard):
        return {"family": "ard", "n": model.n, "p_a": model.p_a}
    if isinstance(model, Gard):
        return {"family": "gard", "n": model.n, "p": model.p.tolist()}
    if isinstance(model, Vrd):
        return {"family": "vrd", "n": model.n, "kernel": kernel_to_json(model.kernel)}
    if isinstance(model, Vard):
        return {"family": "vard", "n": model.n, "kernel": kernel_to_json(model.kernel)}
    if isinstance(model, Erg):
        return {"family": "erg", "n": model.n, "p_e": model.p_e}
    if isinstance(model, Vrg):
        return {"family": "vrg", "n": model.n, "kernel": kernel_to_json(model.kernel)}
    if isinstance(model, Verg):
        return {"family": "verg", "n": model.n, "kernel": kernel_to_json(model.kernel)}
    if isinstance(model, Derd):
        return {"family": "derd", "n": model.n, "p_e": model.p_e, "p_d": model.p_d}
    if isinstance(model, Drd):
        return {"family": "drd", "graph_model": model_to_json(model.graph_model),
                "p_d": model.p_d}
    if isinstance(model, Rnnd):
        rule = ({"k": model.rule.k} if isinstance(model.rule, KNearest)
                else {"s_k": sorted(model.rule.selected)})
        return {"family": "rnnd", "n": model.n, "rule": rule, "d": model.d,
                "dist": model.dist, "norm": model.norm}
    raise ValidationError(f"unknown model {model!r}")


def model_from_json(data: dict | str) -> ModelSpec:
    if isinstance(data, str):
        data = json.loads(data)
    family = data.get("family")
    if family == "uniform":
        return Uniform(n=data["n"], m=data["m"])
    if family == "ard":
        return Ard(n=data["n"], p_a=data["p_a"])
    if family == "gard":
        return Gard(n=data["n"], p=np.asarray(data["p"], dtype=float))
    if family == "vard":
        return Vard(n=data["n"], kernel=kernel_from_json(data["kernel"]))
    if family == "vrd":
        return Vrd(n=data["n"], kernel=kernel_from_json(data["kernel"]))
    if family == "erg":
        return Erg(n=data["n"], p_e=data["p_e"])
    if family == "verg":
        return Verg(n=data["n"], kernel=kernel_from_json(data["kernel"]))
    if family == "vrg":
        return Vrg(n=data["n"], kernel=kernel_from_json(data["kernel"]))
    if family == "derd":
        return Derd(n=data["n"], p_e=data["p_e"], p_d=data["p_d"])
    if family == "drd":
        return Drd(graph_model=model_from_json(data["graph_model"]), p_d=data["p_d"])
    if family == "rnnd":
        rule_data = data.get("rule", {})
        if "k" in rule_data:
            rule: "KNearest | RankSubset" = KNearest(k=rule_data["k"])
        elif "s_k" in rule_data:
            rule = RankSubset(rule_data["s_k"])
        else:
            raise ValidationError("rnnd rule needs 'k' or 's_k'")
        return Rnnd(n=data["n"], rule=rule, d=data.get("d", 2),
                    dist=data.get("dist", "uniform"), norm=data.get("norm", "L2"))
    raise ValidationError(f"unknown model family {family!r}")

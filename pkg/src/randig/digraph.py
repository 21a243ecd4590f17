"""Labeled digraphs and graphs on vertex set {1..n} stored as bitmasks.

A digraph on [n] is a bitmask of length n(n-1): slot(i,j) indexes the
ordered pairs (i,j), i != j, in lexicographic order.  A graph uses a
bitmask of length n(n-1)/2 over unordered pairs {i,j}, i < j.  Vertices
are 1-based everywhere in the public API.

All values are immutable and all operations are pure functions.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import ValidationError

# Exhaustive enumeration is capped at 2^20 states; canonical forms at 8! scans.
MAX_ENUM_SLOTS = 20
MAX_CANON_N = 8


def num_arc_slots(n: int) -> int:
    return n * (n - 1)


def num_edge_slots(n: int) -> int:
    return n * (n - 1) // 2


def arc_slot(n: int, i: int, j: int) -> int:
    """Bit index of the ordered pair (i, j); slot(1,2)=0 and slot(2,1)=n-1."""
    if not (1 <= i <= n and 1 <= j <= n) or i == j:
        raise ValidationError(f"arc ({i},{j}) is not an ordered pair of distinct vertices in [{n}]")
    return (i - 1) * (n - 1) + (j - 1) - (1 if j > i else 0)


def arc_slot_pair(n: int, s: int) -> tuple[int, int]:
    """Inverse of arc_slot."""
    i = s // (n - 1) + 1
    r = s % (n - 1)
    j = r + 1 if r + 1 < i else r + 2
    return i, j


def edge_slot(n: int, i: int, j: int) -> int:
    """Bit index of the unordered pair {i, j} in lexicographic order."""
    if i == j or not (1 <= i <= n and 1 <= j <= n):
        raise ValidationError(f"edge {{{i},{j}}} is not a pair of distinct vertices in [{n}]")
    if i > j:
        i, j = j, i
    return (i - 1) * n - i * (i - 1) // 2 + (j - i - 1)


@lru_cache(maxsize=None)
def arc_slot_pairs(n: int) -> tuple[tuple[int, int], ...]:
    """(i, j) for every arc slot, in slot order."""
    return tuple(arc_slot_pair(n, s) for s in range(num_arc_slots(n)))


@lru_cache(maxsize=None)
def edge_slot_pairs(n: int) -> tuple[tuple[int, int], ...]:
    """(i, j), i < j, for every edge slot, in slot order."""
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    return tuple(pairs)


@lru_cache(maxsize=None)
def arc_to_edge_slot(n: int) -> np.ndarray:
    """Map each arc slot to the edge slot of its endpoint pair."""
    return np.array([edge_slot(n, i, j) for i, j in arc_slot_pairs(n)], dtype=np.int64)


@lru_cache(maxsize=None)
def opposite_arc_slots(n: int) -> np.ndarray:
    """For each edge slot, the two arc slots (s_ij, s_ji) of its orientations."""
    out = np.empty((num_edge_slots(n), 2), dtype=np.int64)
    for e, (i, j) in enumerate(edge_slot_pairs(n)):
        out[e] = (arc_slot(n, i, j), arc_slot(n, j, i))
    return out


def _hex_width(slots: int) -> int:
    return 2 * ((slots + 7) // 8)


def _mask_to_hex(mask: int, slots: int) -> str:
    return mask.to_bytes((slots + 7) // 8, "little").hex()


def _hex_to_mask(text: str) -> int:
    return int.from_bytes(bytes.fromhex(text), "little")


@dataclass(frozen=True)
class Digraph:
    """A digraph on [n]: ``arcs`` holds bit ``arc_slot(n, i, j)`` for each arc (i, j)."""

    n: int
    arcs: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationError(f"vertex count must be >= 1, got {self.n}")
        if not 0 <= self.arcs < (1 << num_arc_slots(self.n)):
            raise ValidationError(f"arc bitmask out of range for n={self.n}")

    @classmethod
    def from_arcs(cls, n: int, pairs) -> "Digraph":
        mask = 0
        for i, j in pairs:
            mask |= 1 << arc_slot(n, i, j)
        return cls(n, mask)

    def has_arc(self, i: int, j: int) -> bool:
        return bool(self.arcs >> arc_slot(self.n, i, j) & 1)

    def arc_list(self) -> list[tuple[int, int]]:
        return [p for s, p in enumerate(arc_slot_pairs(self.n)) if self.arcs >> s & 1]

    def num_arcs(self) -> int:
        return self.arcs.bit_count()

    def to_text(self) -> str:
        return f"n={self.n};arcs={_mask_to_hex(self.arcs, num_arc_slots(self.n))}"

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "Digraph":
        """Parse either ``n=<k>;arcs=<hex>`` or an arc list ``(i,j),(k,l),...``."""
        text = text.strip()
        m = re.fullmatch(r"n=(\d+);arcs=([0-9a-fA-F]*)", text)
        if m:
            return cls(int(m.group(1)), _hex_to_mask(m.group(2)))
        pairs = _parse_pair_list(text)
        if n is None:
            n = max((max(i, j) for i, j in pairs), default=0)
        if n < 1:
            raise ValidationError("cannot infer vertex count from an empty arc list")
        return cls.from_arcs(n, pairs)

    def __repr__(self) -> str:  # arc list reads better than a bare int
        return f"Digraph(n={self.n}, arcs={self.arc_list()})"


@dataclass(frozen=True)
class Graph:
    """A graph on [n]: ``edges`` holds bit ``edge_slot(n, i, j)`` for each edge {i, j}."""

    n: int
    edges: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationError(f"vertex count must be >= 1, got {self.n}")
        if not 0 <= self.edges < (1 << num_edge_slots(self.n)):
            raise ValidationError(f"edge bitmask out of range for n={self.n}")

    @classmethod
    def from_edges(cls, n: int, pairs) -> "Graph":
        mask = 0
        for i, j in pairs:
            mask |= 1 << edge_slot(n, i, j)
        return cls(n, mask)

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.edges >> edge_slot(self.n, i, j) & 1)

    def edge_list(self) -> list[tuple[int, int]]:
        return [p for s, p in enumerate(edge_slot_pairs(self.n)) if self.edges >> s & 1]

    def num_edges(self) -> int:
        return self.edges.bit_count()

    def to_text(self) -> str:
        return f"n={self.n};edges={_mask_to_hex(self.edges, num_edge_slots(self.n))}"

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edge_list()})"


def _parse_pair_list(text: str) -> list[tuple[int, int]]:
    if text in ("", "()"):
        return []
    pairs = re.findall(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)", text)
    rebuilt = ",".join(f"({i},{j})" for i, j in pairs)
    if not pairs or re.sub(r"\s", "", text) != rebuilt:
        raise ValidationError(f"cannot parse arc list: {text!r}")
    return [(int(i), int(j)) for i, j in pairs]


class ArcCounts(NamedTuple):
    """n_a arcs, n_e underlying edges, n_s symmetric pairs, n_as one-way arcs."""

    n_a: int
    n_e: int
    n_s: int
    n_as: int


def underlying_graph(d: Digraph) -> Graph:
    """Forget directions: edge {i,j} present iff (i,j) or (j,i) is an arc."""
    edges = 0
    for e, (s_ij, s_ji) in enumerate(opposite_arc_slots(d.n)):
        if d.arcs >> int(s_ij) & 1 or d.arcs >> int(s_ji) & 1:
            edges |= 1 << e
    return Graph(d.n, edges)


def arc_counts(d: Digraph) -> ArcCounts:
    n_a = d.arcs.bit_count()
    n_s = 0
    n_e = 0
    for s_ij, s_ji in opposite_arc_slots(d.n):
        a = d.arcs >> int(s_ij) & 1
        b = d.arcs >> int(s_ji) & 1
        n_s += a & b
        n_e += a | b
    return ArcCounts(n_a=n_a, n_e=n_e, n_s=n_s, n_as=n_a - 2 * n_s)


def _check_permutation(n: int, sigma: Sequence[int]) -> None:
    if len(sigma) != n or sorted(sigma) != list(range(1, n + 1)):
        raise ValidationError(f"not a permutation of [{n}]: {sigma!r}")


def permutation_slot_map(n: int, sigma: Sequence[int]) -> list[int]:
    """Arc-slot map of a relabeling: slot of (i,j) goes to slot of (sigma(i), sigma(j))."""
    _check_permutation(n, sigma)
    return [arc_slot(n, sigma[i - 1], sigma[j - 1]) for i, j in arc_slot_pairs(n)]


def apply_permutation(d: Digraph, sigma: Sequence[int]) -> Digraph:
    """Relabel vertices: (i,j) is an arc of d iff (sigma(i), sigma(j)) is an arc of the result."""
    smap = permutation_slot_map(d.n, sigma)
    out = 0
    for s, t in enumerate(smap):
        if d.arcs >> s & 1:
            out |= 1 << t
    return Digraph(d.n, out)


def apply_permutation_graph(g: Graph, sigma: Sequence[int]) -> Graph:
    _check_permutation(g.n, sigma)
    out = 0
    for e, (i, j) in enumerate(edge_slot_pairs(g.n)):
        if g.edges >> e & 1:
            out |= 1 << edge_slot(g.n, sigma[i - 1], sigma[j - 1])
    return Graph(g.n, out)


@lru_cache(maxsize=None)
def _all_slot_maps(n: int) -> np.ndarray:
    """Arc-slot maps of all n! relabelings, one row per permutation."""
    perms = itertools.permutations(range(1, n + 1))
    return np.array([permutation_slot_map(n, p) for p in perms], dtype=np.uint64)


def canonical_form(d: Digraph) -> Digraph:
    """Bitmask-minimal relabeling of d; equal canonical forms <=> isomorphic."""
    if d.n > MAX_CANON_N:
        raise ValidationError(f"canonical form supports n <= {MAX_CANON_N}, got {d.n}")
    if d.n == 1:
        return d
    maps = _all_slot_maps(d.n)
    k = num_arc_slots(d.n)
    bits = np.array([(d.arcs >> s) & 1 for s in range(k)], dtype=np.uint64)
    permuted = (bits[np.newaxis, :] << maps).sum(axis=1)  # rows map bits to distinct slots
    return Digraph(d.n, int(permuted.min()))


def enumerate_digraphs(n: int) -> Iterator[Digraph]:
    """All 2^(n(n-1)) digraphs on [n] in ascending bitmask order."""
    k = num_arc_slots(n)
    if k > MAX_ENUM_SLOTS:
        raise ValidationError(f"enumeration supports n(n-1) <= {MAX_ENUM_SLOTS}, got n={n}")
    for mask in range(1 << k):
        yield Digraph(n, mask)


def enumerate_graphs(n: int) -> Iterator[Graph]:
    """All 2^(n(n-1)/2) graphs on [n] in ascending bitmask order."""
    k = num_edge_slots(n)
    if k > MAX_ENUM_SLOTS:
        raise ValidationError(f"enumeration supports n(n-1)/2 <= {MAX_ENUM_SLOTS}, got n={n}")
    for mask in range(1 << k):
        yield Graph(n, mask)


# ---------------------------------------------------------------------------
# Vectorized helpers over arrays of bitmasks (used by the model/analysis code).
# ---------------------------------------------------------------------------

def popcount_array(masks: np.ndarray, slots: int) -> np.ndarray:
    counts = np.zeros(masks.shape, dtype=np.int64)
    for s in range(slots):
        counts += ((masks >> np.uint64(s)) & np.uint64(1)).astype(np.int64)
    return counts


def underlying_masks(n: int, masks: np.ndarray) -> np.ndarray:
    """Edge bitmasks of the underlying graphs of an array of arc bitmasks."""
    opp = opposite_arc_slots(n)
    out = np.zeros(masks.shape, dtype=np.uint64)
    for e in range(len(opp)):
        s_ij, s_ji = int(opp[e, 0]), int(opp[e, 1])
        present = ((masks >> np.uint64(s_ij)) | (masks >> np.uint64(s_ji))) & np.uint64(1)
        out |= present << np.uint64(e)
    return out


def symmetric_pair_counts(n: int, masks: np.ndarray) -> np.ndarray:
    """n_s for an array of arc bitmasks."""
    opp = opposite_arc_slots(n)
    counts = np.zeros(masks.shape, dtype=np.int64)
    for e in range(len(opp)):
        s_ij, s_ji = int(opp[e, 0]), int(opp[e, 1])
        counts += (((masks >> np.uint64(s_ij)) & (masks >> np.uint64(s_ji))) & np.uint64(1)).astype(np.int64)
    return counts


@lru_cache(maxsize=None)
def orbit_canon_table(n: int) -> np.ndarray:
    """Canonical (minimal) bitmask for every digraph on [n], n(n-1) <= 20."""
    k = num_arc_slots(n)
    if k > MAX_ENUM_SLOTS:
        raise ValidationError(f"orbit table supports n(n-1) <= {MAX_ENUM_SLOTS}, got n={n}")
    masks = np.arange(1 << k, dtype=np.uint64)
    canon = masks.copy()
    for smap in _all_slot_maps(n):
        permuted = np.zeros_like(masks)
        for s in range(k):
            permuted |= ((masks >> np.uint64(s)) & np.uint64(1)) << smap[s]
        np.minimum(canon, permuted, out=canon)
    return canon

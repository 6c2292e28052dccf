"""Graphs as per-vertex neighbor bitsets, seeded G(n, p) sampling, and
induced-subgraph predicates.

Bitsets are plain Python ints: bit ``v`` of ``adj[u]`` is set iff ``uv`` is an
edge.  A :class:`Graph` is immutable once built.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import CapacityError, DomainError

MAX_VERTICES = 4096
_MASK64 = (1 << 64) - 1


def iter_bits(mask: int) -> Iterator[int]:
    """Yield set bit positions of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class VertexSet:
    members: int = 0

    @classmethod
    def of(cls, vertices: Iterable[int]) -> "VertexSet":
        mask = 0
        for v in vertices:
            if v < 0:
                raise DomainError(f"negative vertex {v}")
            mask |= 1 << v
        return cls(mask)

    @property
    def size(self) -> int:
        return self.members.bit_count()

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.members)

    def __contains__(self, v: int) -> bool:
        return v >= 0 and bool(self.members >> v & 1)

    def sorted(self) -> list[int]:
        return list(iter_bits(self.members))


@dataclass(frozen=True)
class RngSpec:
    master_seed: int
    stream_id: int = 0

    def key(self) -> list[int]:
        return [self.master_seed & _MASK64, self.stream_id & _MASK64]


class Graph:
    """Undirected simple graph on vertices ``0..n-1``."""

    __slots__ = ("n", "adj", "m")

    def __init__(self, n: int, adj: Iterable[int], *, max_vertices: int = MAX_VERTICES, check: bool = True):
        if n < 0:
            raise DomainError("n must be non-negative")
        if n > max_vertices:
            raise CapacityError(f"n={n} exceeds capacity {max_vertices}")
        adj = tuple(adj)
        if len(adj) != n:
            raise DomainError(f"expected {n} adjacency rows, got {len(adj)}")
        if check:
            _check_adjacency(n, adj)
        self.n = n
        self.adj = adj
        self.m = sum(a.bit_count() for a in adj) // 2

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], **kw) -> "Graph":
        if n > kw.get("max_vertices", MAX_VERTICES):
            raise CapacityError(f"n={n} exceeds capacity")
        adj = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise DomainError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise DomainError(f"self-loop at {u}")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return cls(n, adj, **kw)

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, [0] * n)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        full = (1 << n) - 1
        return cls(n, [full & ~(1 << v) for v in range(n)])

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls.from_edges(n, [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        if n < 3:
            raise DomainError("a cycle needs at least 3 vertices")
        return cls.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    @property
    def all_vertices(self) -> int:
        return (1 << self.n) - 1

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in iter_bits(self.adj[u] >> (u + 1) << (u + 1))]

    def complement(self) -> "Graph":
        full = self.all_vertices
        return Graph(self.n, [full & ~a & ~(1 << v) for v, a in enumerate(self.adj)], check=False)

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.adj == other.adj

    def __hash__(self) -> int:
        return hash((self.n, self.adj))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    # edge-list text format: header "n m", then one "u v" per line
    def to_text(self) -> str:
        lines = [f"{self.n} {self.m}"]
        lines += [f"{u} {v}" for u, v in self.edges()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, **kw) -> "Graph":
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not rows or len(rows[0]) != 2:
            raise DomainError("missing 'n m' header")
        n, m = int(rows[0][0]), int(rows[0][1])
        edges = []
        for row in rows[1:]:
            if len(row) != 2:
                raise DomainError(f"bad edge line: {' '.join(row)}")
            edges.append((int(row[0]), int(row[1])))
        g = cls.from_edges(n, edges, **kw)
        if g.m != m or len(edges) != m:
            raise DomainError(f"header declares {m} edges, found {len(edges)} lines / {g.m} distinct edges")
        return g

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path, **kw) -> "Graph":
        with open(path) as fh:
            return cls.from_text(fh.read(), **kw)


def _check_adjacency(n: int, adj: tuple[int, ...]) -> None:
    full = (1 << n) - 1
    for u, a in enumerate(adj):
        if a & ~full:
            raise DomainError(f"vertex {u} has neighbors outside 0..{n - 1}")
        if a >> u & 1:
            raise DomainError(f"self-loop at {u}")
        for v in iter_bits(a):
            if not adj[v] >> u & 1:
                raise DomainError(f"asymmetric adjacency between {u} and {v}")


def gen_gnp(n: int, p: float, rng: RngSpec, *, max_vertices: int = MAX_VERTICES) -> Graph:
    """Sample G(n, p).

    Pair ``(u, v)``, ``u < v``, with row-major index ``i`` is an edge iff the
    ``i``-th uniform of a Philox stream keyed by ``(master_seed, stream_id)``
    is below ``p``.  Philox is counter based, so draw ``i`` depends only on the
    key and ``i``.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p={p} not in [0, 1]")
    if n < 0:
        raise DomainError("n must be non-negative")
    if n > max_vertices:
        raise CapacityError(f"n={n} exceeds capacity {max_vertices}")
    if n < 2:
        return Graph(n, [0] * n, max_vertices=max_vertices)
    gen = np.random.Generator(np.random.Philox(key=np.array(rng.key(), dtype=np.uint64)))
    iu, ju = np.triu_indices(n, 1)
    hit = gen.random(iu.size) < p
    mat = np.zeros((n, n), dtype=bool)
    mat[iu[hit], ju[hit]] = True
    mat |= mat.T
    packed = np.packbits(mat, axis=1, bitorder="little")
    adj = [int.from_bytes(row.tobytes(), "little") for row in packed]
    return Graph(n, adj, max_vertices=max_vertices, check=False)


def _check_set(g: Graph, s: VertexSet) -> int:
    if s.members < 0 or s.members >> g.n:
        raise DomainError(f"vertex set {s.sorted()} not within 0..{g.n - 1}")
    return s.members


def _as_set(s) -> VertexSet:
    return s if isinstance(s, VertexSet) else VertexSet.of(s)


def induced_edge_count(g: Graph, s) -> int:
    mask = _check_set(g, _as_set(s))
    adj = g.adj
    return sum((adj[v] & mask).bit_count() for v in iter_bits(mask)) // 2


def is_connected_set(g: Graph, mask: int) -> bool:
    """True iff the subgraph induced on ``mask`` is connected (empty counts as not)."""
    if not mask:
        return False
    adj = g.adj
    seen = mask & -mask
    frontier = seen
    while frontier:
        nb = 0
        for v in iter_bits(frontier):
            nb |= adj[v]
        frontier = nb & mask & ~seen
        seen |= frontier
    return seen == mask


def _degrees_within(g: Graph, mask: int) -> list[int]:
    return [(g.adj[v] & mask).bit_count() for v in iter_bits(mask)]


def is_induced_tree(g: Graph, s) -> bool:
    s = _as_set(s)
    mask = _check_set(g, s)
    k = s.size
    if k == 0:
        return False
    return induced_edge_count(g, s) == k - 1 and is_connected_set(g, mask)


def is_independent(g: Graph, s) -> bool:
    return induced_edge_count(g, s) == 0


def is_induced_path(g: Graph, s) -> bool:
    """Induced subgraph is a path (a single vertex is a path of size 1)."""
    s = _as_set(s)
    mask = _check_set(g, s)
    if s.size == 0:
        return False
    return is_induced_tree(g, s) and max(_degrees_within(g, mask)) <= 2


def is_induced_cycle(g: Graph, s) -> bool:
    s = _as_set(s)
    mask = _check_set(g, s)
    if s.size < 3:
        return False
    return all(d == 2 for d in _degrees_within(g, mask)) and is_connected_set(g, mask)

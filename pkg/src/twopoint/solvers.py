"""Exact branch-and-bound solvers for maximum induced substructures.

All searches work on neighbor bitsets (``Graph.adj``) and branch on
candidates in ascending vertex order, so witnesses are deterministic.  A
:class:`Budget` caps nodes and/or wall time; when it runs out the best set
found so far is returned with ``exact=False``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

from .errors import CapacityError
from .graph import (Graph, VertexSet, induced_edge_count, is_connected_set, is_independent, is_induced_cycle,
                    is_induced_path, is_induced_tree, iter_bits)

ORACLE_MAX_N = 24


@dataclass(frozen=True)
class Budget:
    max_nodes: int | None = None
    max_time: float | None = None  # seconds

    @classmethod
    def unlimited(cls) -> "Budget":
        return cls()

    @classmethod
    def from_dict(cls, d: dict | None) -> "Budget":
        d = d or {}
        return cls(d.get("max_nodes"), d.get("max_time"))

    def to_dict(self) -> dict:
        return {"max_nodes": self.max_nodes, "max_time": self.max_time}


@dataclass
class SolveResult:
    value: int
    witness: VertexSet
    exact: bool
    nodes_explored: int
    elapsed: float  # seconds

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "witness": self.witness.sorted(),
            "exact": self.exact,
            "nodes_explored": self.nodes_explored,
            "elapsed_ms": round(self.elapsed * 1000, 3),
        }


class _BudgetExhausted(Exception):
    pass


class _Meter:
    """Counts search nodes and enforces the budget."""

    __slots__ = ("nodes", "max_nodes", "deadline", "start")

    def __init__(self, budget: Budget):
        self.nodes = 0
        self.start = time.perf_counter()
        self.max_nodes = budget.max_nodes
        self.deadline = None if budget.max_time is None else self.start + budget.max_time

    def tick(self) -> None:
        self.nodes += 1
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            raise _BudgetExhausted
        if self.deadline is not None and not self.nodes & 1023 and time.perf_counter() > self.deadline:
            raise _BudgetExhausted

    def result(self, value: int, witness: int, exact: bool) -> SolveResult:
        return SolveResult(value, VertexSet(witness), exact, self.nodes, time.perf_counter() - self.start)


def _clique_partition(adj, mask: int) -> list[int]:
    """Greedy partition of ``mask`` into cliques, lowest index first."""
    parts = []
    while mask:
        low = mask & -mask
        members = low
        cand = mask & adj[low.bit_length() - 1]
        while cand:
            w = cand & -cand
            members |= w
            cand &= adj[w.bit_length() - 1]
        parts.append(members)
        mask &= ~members
    return parts


# ------------------------------------------------------------ induced tree

def max_induced_tree(g: Graph, budget: Budget = Budget()) -> SolveResult:
    """Largest vertex set inducing a tree.

    Trees are grown from their lowest vertex.  For a current tree S the
    remaining vertices split into the frontier F (exactly one neighbor in S),
    the untouched set Z (no neighbor in S) and dead vertices (two or more,
    which would close a cycle).  Frontier vertices joining the tree must be
    pairwise non-adjacent, and any clique meets a tree in at most two
    vertices, which gives the bound ``cliques(F) + sum min(2, |C|)`` over a
    clique partition of Z.
    """
    meter = _Meter(budget)
    n, adj = g.n, g.adj
    if n == 0:
        return meter.result(0, 0, True)
    best = [1, 1]  # size, mask

    def grow(size: int, S: int, F: int, Z: int) -> None:
        meter.tick()
        if size > best[0]:
            best[0], best[1] = size, S
        while F:
            bound = len(_clique_partition(adj, F))
            for c in _clique_partition(adj, Z):
                bound += 1 if c & (c - 1) == 0 else 2
            if size + bound <= best[0]:
                return
            low = F & -F
            F ^= low
            nb = adj[low.bit_length() - 1]
            grow(size + 1, S | low, (F & ~nb) | (Z & nb), Z & ~nb)

    try:
        allowed = (1 << n) - 1
        for v in range(n):
            bit = 1 << v
            allowed &= ~bit
            grow(1, bit, adj[v] & allowed, allowed & ~adj[v])
    except _BudgetExhausted:
        return meter.result(best[0], best[1], False)
    return meter.result(best[0], best[1], True)


# ----------------------------------------------------- induced path / cycle

def max_induced_path_or_cycle(g: Graph, mode: str = "path", budget: Budget = Budget()) -> SolveResult:
    """Longest induced path (vertex count) or induced cycle.

    Paths are extended at one end.  A new end ``w`` must be adjacent to the
    current end and to no other path vertex.  Cycles start at their lowest
    vertex ``s``, only use vertices above ``s``, and close when the new end
    is adjacent to ``s``.  An induced path or cycle meets a clique in at most
    two vertices, which bounds the remaining growth.
    """
    if mode not in ("path", "cycle"):
        raise ValueError(f"mode must be 'path' or 'cycle', not {mode!r}")
    meter = _Meter(budget)
    n, adj = g.n, g.adj
    if n == 0:
        return meter.result(0, 0, True)

    def clique_bound(mask: int) -> int:
        return sum(1 if c & (c - 1) == 0 else 2 for c in _clique_partition(adj, mask))

    if mode == "path":
        best = [1, 1]

        def extend(size: int, P: int, end: int, avail: int) -> None:
            # avail: vertices outside P not adjacent to P - {end}
            meter.tick()
            if size > best[0]:
                best[0], best[1] = size, P
            cand = avail & adj[end]
            if not cand or size + clique_bound(avail) <= best[0]:
                return
            next_avail = avail & ~adj[end]
            for w in iter_bits(cand):
                bit = 1 << w
                extend(size + 1, P | bit, w, next_avail & ~bit)

        try:
            full = (1 << n) - 1
            for v in range(n):
                bit = 1 << v
                extend(1, bit, v, full & ~bit)
        except _BudgetExhausted:
            return meter.result(best[0], best[1], False)
        return meter.result(best[0], best[1], True)

    best = [0, 0]

    def walk(size: int, P: int, s: int, end: int, avail: int) -> None:
        # avail: vertices above s, outside P, not adjacent to P - {s, end}
        meter.tick()
        cand = avail & adj[end]
        if not cand:
            return
        if size >= 2:
            closing = cand & adj[s]
            if closing and size + 1 > best[0]:
                w = closing & -closing
                best[0], best[1] = size + 1, P | w
            cand &= ~adj[s]
        if size + clique_bound(avail) <= best[0]:
            return
        # the old end turns internal, unless it is s itself
        next_avail = avail if end == s else avail & ~adj[end]
        for w in iter_bits(cand):
            bit = 1 << w
            walk(size + 1, P | bit, s, w, next_avail & ~bit)

    try:
        full = (1 << n) - 1
        for s in range(n):
            above = full & ~((1 << (s + 1)) - 1)
            walk(1, 1 << s, s, s, above)
    except _BudgetExhausted:
        return meter.result(best[0], best[1], False)
    return meter.result(best[0], best[1], True)


# -------------------------------------------------- maximum independent set

def _independent_set_search(adj, candidates: int, meter: _Meter, best: list) -> None:
    """Clique-partition-colored B&B for a maximum independent set within ``candidates``."""

    def expand(size: int, S: int, P: int) -> None:
        meter.tick()
        if not P:
            if size > best[0]:
                best[0], best[1] = size, S
            return
        order = []
        for color, clique in enumerate(_clique_partition(adj, P), start=1):
            order.extend((v, color) for v in iter_bits(clique))
        for v, color in reversed(order):
            if size + color <= best[0]:
                return
            bit = 1 << v
            expand(size + 1, S | bit, P & ~adj[v] & ~bit)
            P &= ~bit
        if size > best[0]:
            best[0], best[1] = size, S

    expand(0, 0, candidates)


def max_independent_set(g: Graph, budget: Budget = Budget()) -> SolveResult:
    """Maximum independent set; an independent set takes at most one vertex per clique."""
    meter = _Meter(budget)
    best = [0, 0]
    try:
        _independent_set_search(g.adj, g.all_vertices, meter, best)
    except _BudgetExhausted:
        return meter.result(best[0], best[1], False)
    return meter.result(best[0], best[1], True)


# ------------------------------------------------- exactly t(k) induced edges

def _max_vertices_with_edge_budget(adj, cand: int, budget_edges: int) -> int:
    """Upper bound on how many vertices of ``cand`` fit with at most ``budget_edges`` internal edges.

    Within a clique of size c, taking x vertices costs C(x, 2) edges, so
    after one free vertex per clique the i-th extra vertex of a clique costs i.
    """
    parts = _clique_partition(adj, cand)
    total = len(parts)
    extra_costs: dict[int, int] = {}
    for c in parts:
        size = c.bit_count()
        for cost in range(1, size):
            extra_costs[cost] = extra_costs.get(cost, 0) + 1
    left = budget_edges
    for cost in sorted(extra_costs):
        take = min(extra_costs[cost], left // cost)
        total += take
        left -= take * cost
        if take < extra_costs[cost]:
            break
    return total


def _find_k_set_with_t_edges(adj, n: int, k: int, t: int, meter: _Meter) -> int | None:
    """Return a k-set inducing exactly t edges, or None.

    Include/exclude branching in ascending vertex order.  For r = k - |S|
    more vertices from the candidate pool C, with a(v) = |N(v) & S| and
    d(v) = |N(v) & C|, the final edge count is at least
    e + (r smallest a) + ceil(1/2 (r smallest max(0, d - (|C| - r)))) and at
    most e + (r largest of a + min(d, r - 1)/2).
    """
    found = [None]

    def search(S: int, s: int, e: int, C: int) -> bool:
        meter.tick()
        r = k - s
        if r == 0:
            if e == t:
                found[0] = S
                return True
            return False
        slack = t - e
        # drop candidates that alone would overshoot the target
        pool = C
        for v in iter_bits(C):
            if (adj[v] & S).bit_count() > slack:
                pool &= ~(1 << v)
        C = pool
        size_c = C.bit_count()
        if size_c < r:
            return False
        a_vals, lo_int, hi_vals = [], [], []
        for v in iter_bits(C):
            a = (adj[v] & S).bit_count()
            d = (adj[v] & C).bit_count()
            a_vals.append(a)
            lo_int.append(max(0, d - (size_c - r)))
            hi_vals.append(a + min(d, r - 1) / 2)
        a_vals.sort()
        lo_int.sort()
        low = e + sum(a_vals[:r]) + (sum(lo_int[:r]) + 1) // 2
        if low > t:
            return False
        hi_vals.sort(reverse=True)
        if e + math.floor(sum(hi_vals[:r]) + 1e-9) < t:
            return False
        if s + _max_vertices_with_edge_budget(adj, C, slack) < k:
            return False
        v_bit = C & -C
        v = v_bit.bit_length() - 1
        rest = C ^ v_bit
        if search(S | v_bit, s + 1, e + (adj[v] & S).bit_count(), rest):
            return True
        return search(S, s, e, rest)

    search(0, 0, 0, (1 << n) - 1)
    return found[0]


def max_exact_edges_subset(g: Graph, tfn: Callable[[int], int], budget: Budget = Budget()) -> SolveResult:
    """Largest k such that some k-set induces exactly t(k) edges.

    k runs downward from n.  Targets above half of C(k, 2) are searched in
    the complement with the complementary target.  A k-set with e edges
    contains an independent set of size at least k - e (drop one end of each
    edge) and at least k^2/(k + 2e) (Caro-Wei), so k is skipped when the
    host's independence number is smaller.
    """
    meter = _Meter(budget)
    n = g.n
    if n == 0:
        return meter.result(0, 0, True)
    comp = g.complement()
    alpha_cache: dict[bool, int] = {}

    def indep_number(use_complement: bool) -> int:
        if use_complement not in alpha_cache:
            best = [0, 0]
            _independent_set_search((comp if use_complement else g).adj, g.all_vertices, meter, best)
            alpha_cache[use_complement] = best[0]
        return alpha_cache[use_complement]

    try:
        for k in range(n, 0, -1):
            t = tfn(k)
            K = k * (k - 1) // 2
            if not 0 <= t <= K:
                continue
            flip = t > K - t
            target = K - t if flip else t
            alpha = indep_number(flip)
            if k - target > alpha or k * k > alpha * (k + 2 * target):
                continue
            host = comp if flip else g
            S = _find_k_set_with_t_edges(host.adj, n, k, target, meter)
            if S is not None:
                return meter.result(k, S, True)
    except _BudgetExhausted:
        # the search runs k downward, so nothing certified yet
        return meter.result(0, 0, False)
    return meter.result(0, 0, True)


# ------------------------------------------------- exhaustive counting oracle

def _k_subsets_with_edges(adj, n: int, k: int):
    """Yield (mask, induced edge count) for every k-subset, edges tracked incrementally."""

    def rec(start: int, need: int, mask: int, e: int):
        if need == 0:
            yield mask, e
            return
        for v in range(start, n - need + 1):
            yield from rec(v + 1, need - 1, mask | 1 << v, e + (adj[v] & mask).bit_count())

    return rec(0, k, 0, 0)


def _check_oracle_size(g: Graph) -> None:
    if g.n > ORACLE_MAX_N:
        raise CapacityError(f"exhaustive counting limited to n <= {ORACLE_MAX_N}")


def count_induced_trees(g: Graph, k: int) -> int:
    """Number of k-subsets inducing a tree, by subset enumeration."""
    _check_oracle_size(g)
    if not 1 <= k <= g.n:
        return 0
    return sum(1 for mask, e in _k_subsets_with_edges(g.adj, g.n, k) if e == k - 1 and is_connected_set(g, mask))


def count_exact_edge_sets(g: Graph, k: int, t: int) -> int:
    """Number of k-subsets inducing exactly t edges, by subset enumeration."""
    _check_oracle_size(g)
    if not 0 <= k <= g.n:
        return 0
    return sum(1 for _, e in _k_subsets_with_edges(g.adj, g.n, k) if e == t)


def brute_force_max(g: Graph, statistic: str, tfn: Callable[[int], int] | None = None) -> int:
    """Largest subset satisfying the statistic's predicate, by trying every subset.

    Uses only the graph-level predicates, so it is independent of the
    branch-and-bound code above.
    """
    _check_oracle_size(g)
    if statistic == "exact_edges" and tfn is None:
        raise ValueError("exact_edges needs tfn")
    preds = {
        "tree": lambda s: is_induced_tree(g, s),
        "path": lambda s: is_induced_path(g, s),
        "cycle": lambda s: is_induced_cycle(g, s),
        "independent_set": lambda s: is_independent(g, s),
        "exact_edges": lambda s: induced_edge_count(g, s) == tfn(s.size),
    }
    pred = preds[statistic]
    for k in range(g.n, 0, -1):
        if any(pred(VertexSet.of(c)) for c in combinations(range(g.n), k)):
            return k
    return 0

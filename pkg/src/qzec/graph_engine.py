"""Characteristic graphs, disjunctive powers and exact maximum cliques."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, product
from typing import Iterable

import numpy as np

from .distinguishability import TOL_PROB, InputEnsemble, a_sets
from .quantum_core import KrausChannel, Povm

DEFAULT_BUDGET = 10**7
BRUTEFORCE_CAP = 25
WORD_SEP = "·"


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph on vertices ``0..vertex_count-1``."""

    vertex_count: int
    edges: frozenset = frozenset()
    vertex_labels: tuple = ()

    def __post_init__(self):
        n = self.vertex_count
        if n < 0:
            raise ValueError("vertex_count must be non-negative")
        norm = set()
        for e in self.edges:
            u, v = e
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge {e} out of range for {n} vertices")
            norm.add((min(u, v), max(u, v)))
        labels = tuple(self.vertex_labels) if self.vertex_labels else tuple(str(i) for i in range(n))
        if len(labels) != n:
            raise ValueError("one label per vertex is required")
        object.__setattr__(self, "edges", frozenset(norm))
        object.__setattr__(self, "vertex_labels", labels)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, frozenset(combinations(range(n), 2)))

    @classmethod
    def cycle(cls, n: int, step: int = 1) -> "Graph":
        return cls(n, frozenset((i, (i + step) % n) for i in range(n)))

    @classmethod
    def from_adjacency(cls, adj, labels=()) -> "Graph":
        adj = np.asarray(adj, dtype=bool)
        n = adj.shape[0]
        return cls(n, frozenset((u, v) for u in range(n) for v in range(u + 1, n) if adj[u, v]), labels)

    @cached_property
    def neighbor_masks(self) -> tuple:
        masks = [0] * self.vertex_count
        for u, v in self.edges:
            masks[u] |= 1 << v
            masks[v] |= 1 << u
        return tuple(masks)

    def adjacent(self, u: int, v: int) -> bool:
        return bool(self.neighbor_masks[u] >> v & 1)

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.vertex_count, self.vertex_count), dtype=bool)
        for u, v in self.edges:
            a[u, v] = a[v, u] = True
        return a

    def sorted_edges(self) -> list:
        return sorted(self.edges)

    def __len__(self) -> int:
        return self.vertex_count


@dataclass(frozen=True)
class CliqueCertificate:
    vertices: tuple
    size: int
    exact: bool = True
    nodes: int = 0


def is_clique(g: Graph, vertices: Iterable[int]) -> bool:
    vs = list(vertices)
    return len(set(vs)) == len(vs) and all(g.adjacent(u, v) for u, v in combinations(vs, 2))


def build_characteristic_graph(channel: KrausChannel, ensemble: InputEnsemble, povm: Povm,
                               tol_prob: float = TOL_PROB) -> Graph:
    """Edge {i, j} iff states i and j have disjoint sets of possible outcomes."""
    sets = [a.outcomes for a in a_sets(channel, ensemble, povm, tol_prob)]
    n = len(sets)
    edges = frozenset((i, j) for i in range(n) for j in range(i + 1, n) if sets[i].isdisjoint(sets[j]))
    return Graph(n, edges, ensemble.labels)


def shannon_graph(matrix) -> Graph:
    """Confusability complement of a classical channel: inputs sharing no possible output."""
    t = np.asarray(matrix, dtype=float)
    support = t > 0
    n = t.shape[0]
    edges = frozenset(
        (i, j) for i in range(n) for j in range(i + 1, n) if not np.any(support[i] & support[j])
    )
    return Graph(n, edges)


def disjunctive_product(g: Graph, h: Graph) -> Graph:
    """Co-normal product: (u,x) ~ (v,y) iff u ~ v in g or x ~ y in h.

    Vertex (u, x) gets index ``u * len(h) + x``.
    """
    ng, nh = g.vertex_count, h.vertex_count
    ga, ha = g.adjacency_matrix(), h.adjacency_matrix()
    adj = ga[:, None, :, None] | ha[None, :, None, :]
    adj = adj.reshape(ng * nh, ng * nh)
    np.fill_diagonal(adj, False)
    labels = tuple(f"{a}{WORD_SEP}{b}" for a, b in product(g.vertex_labels, h.vertex_labels))
    iu, ju = np.nonzero(np.triu(adj, 1))
    return Graph(ng * nh, frozenset(zip(iu.tolist(), ju.tolist())), labels)


def graph_power(g: Graph, n: int) -> Graph:
    if n < 1:
        raise ValueError("block length must be at least 1")
    out = g
    for _ in range(n - 1):
        out = disjunctive_product(out, g)
    return out


def decode_vertex(index: int, base: int, n: int) -> tuple:
    """Letters of the word behind a vertex of the n-th power of a ``base``-vertex graph."""
    letters = []
    for _ in range(n):
        index, r = divmod(index, base)
        letters.append(r)
    return tuple(reversed(letters))


def _degeneracy_order(masks: list[int], n: int) -> list[int]:
    """Vertices ordered so that high-core vertices come first."""
    degree = [bin(m).count("1") for m in masks]
    alive = (1 << n) - 1
    removed = []
    while alive:
        v = min((u for u in range(n) if alive >> u & 1), key=lambda u: (degree[u], u))
        removed.append(v)
        alive &= ~(1 << v)
        nb = masks[v] & alive
        while nb:
            low = nb & -nb
            degree[low.bit_length() - 1] -= 1
            nb ^= low
    return removed[::-1]


def clique_number(g: Graph, budget: int = DEFAULT_BUDGET) -> CliqueCertificate:
    """Maximum clique by branch and bound with greedy-colouring bounds.

    ``budget`` caps the number of search nodes. When it runs out the best clique
    found so far is returned with ``exact=False``; that is still a valid lower bound.
    """
    n = g.vertex_count
    if n == 0:
        return CliqueCertificate((), 0)
    order = _degeneracy_order(list(g.neighbor_masks), n)
    pos = {v: i for i, v in enumerate(order)}
    # relabel so bit i is the i-th vertex of the search order
    nbr = [0] * n
    for i, v in enumerate(order):
        m = g.neighbor_masks[v]
        while m:
            low = m & -m
            nbr[i] |= 1 << pos[low.bit_length() - 1]
            m ^= low

    best: list[int] = []
    cand = (1 << n) - 1
    while cand:
        low = cand & -cand
        v = low.bit_length() - 1
        best.append(v)
        cand &= nbr[v]
    nodes = 0
    exhausted = False

    def colour_sort(p: int):
        vs, cs = [], []
        colour = 0
        uncoloured = p
        while uncoloured:
            colour += 1
            q = uncoloured
            while q:
                low = q & -q
                v = low.bit_length() - 1
                q &= ~nbr[v] & ~low
                uncoloured &= ~low
                vs.append(v)
                cs.append(colour)
        return vs, cs

    def expand(r: list[int], p: int) -> None:
        nonlocal best, nodes, exhausted
        vs, cs = colour_sort(p)
        for i in range(len(vs) - 1, -1, -1):
            if len(r) + cs[i] <= len(best):
                return
            nodes += 1
            if nodes > budget:
                exhausted = True
                return
            v = vs[i]
            r.append(v)
            np_ = p & nbr[v]
            if np_:
                expand(r, np_)
            elif len(r) > len(best):
                best = list(r)
            r.pop()
            if exhausted:
                return
            p &= ~(1 << v)

    expand([], (1 << n) - 1)
    verts = tuple(sorted(order[i] for i in best))
    if not is_clique(g, verts):
        raise AssertionError("clique search produced a non-clique; this is a bug")
    return CliqueCertificate(verts, len(verts), exact=not exhausted, nodes=nodes)


def clique_number_bruteforce(g: Graph) -> CliqueCertificate:
    """Exhaustive subset enumeration, smallest sizes first; for testing only."""
    n = g.vertex_count
    if n > BRUTEFORCE_CAP:
        raise ValueError(f"brute force is capped at {BRUTEFORCE_CAP} vertices, got {n}")
    if n == 0:
        return CliqueCertificate((), 0)
    adj = g.adjacency_matrix()
    best: tuple = (0,)
    for k in range(2, n + 1):
        found = next(
            (c for c in combinations(range(n), k) if all(adj[u, v] for u, v in combinations(c, 2))),
            None,
        )
        if found is None:
            break
        best = found
    return CliqueCertificate(tuple(best), len(best))


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(g: Graph, name: str = "G") -> str:
    lines = [f"graph {_dot_id(name)} {{"]
    for i, lab in enumerate(g.vertex_labels):
        lines.append(f"  {i} [label={_dot_id(lab)}];")
    for u, v in g.sorted_edges():
        lines.append(f"  {u} -- {v};")
    lines.append("}")
    return "\n".join(lines) + "\n"

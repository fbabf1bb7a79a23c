"""Colour-preserving automorphisms of incidence graphs.

Automorphisms are found by individualization and refinement.  Along the
leftmost branch of the search tree the individualized vertices form a base
``v_1, v_2, ...``; working from the deepest level upwards we complete the
orbit of ``v_k`` under the pointwise stabilizer of ``v_1 .. v_{k-1}``, searching
for one automorphism per candidate not yet reached.  The group order is the
product of those orbit lengths.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .errors import IncompleteGroup
from .exact_cover import Status
from .geometry import IncidenceGeometry, incidence_graph


@dataclass(frozen=True)
class ColoredGraph:
    num_vertices: int
    indptr: np.ndarray
    indices: np.ndarray
    colors: np.ndarray

    @classmethod
    def from_edges(cls, n: int, edges, colors=None) -> ColoredGraph:
        edges = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        data = np.ones(len(edges), dtype=np.int8)
        adj = sparse.coo_matrix((data, (edges[:, 0], edges[:, 1])), shape=(n, n)).tocsr()
        adj = ((adj + adj.T) > 0).astype(np.int8).tocsr()
        adj.setdiag(0)
        adj.eliminate_zeros()
        return cls.from_sparse(adj, colors)

    @classmethod
    def from_sparse(cls, adj: sparse.spmatrix, colors=None) -> ColoredGraph:
        adj = sparse.csr_matrix(adj)
        adj.sort_indices()
        n = adj.shape[0]
        if colors is None:
            colors = np.zeros(n, dtype=np.int64)
        return cls(n, adj.indptr.astype(np.int64), adj.indices.astype(np.int64), np.asarray(colors, dtype=np.int64))

    @classmethod
    def from_geometry(cls, geometry: IncidenceGeometry) -> ColoredGraph:
        """Incidence graph with points (colour 0) before lines (colour 1)."""
        colors = np.r_[np.zeros(geometry.num_points, dtype=np.int64), np.ones(geometry.num_lines, dtype=np.int64)]
        return cls.from_sparse(incidence_graph(geometry), colors)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edge_keys(self) -> np.ndarray:
        owner = np.repeat(np.arange(self.num_vertices), self.degrees)
        return np.sort(owner * self.num_vertices + self.indices)

    def is_automorphism(self, perm: np.ndarray) -> bool:
        if not np.array_equal(self.colors[perm], self.colors):
            return False
        owner = np.repeat(np.arange(self.num_vertices), self.degrees)
        mapped = np.sort(perm[owner] * self.num_vertices + perm[self.indices])
        return bool(np.array_equal(mapped, self.edge_keys()))


class _Refiner:
    """Equitable refinement with an isomorphism-invariant cell order."""

    def __init__(self, graph: ColoredGraph) -> None:
        self.graph = graph
        deg = graph.degrees
        self.owner = np.repeat(np.arange(graph.num_vertices), deg)
        starts = np.repeat(graph.indptr[:-1], deg)
        self.slot = np.arange(graph.indices.size) - starts
        self.width = int(deg.max(initial=0))
        self.deg = deg

    def refine(self, colors: np.ndarray) -> np.ndarray:
        g = self.graph
        colors = _dense_rank(colors)
        ncolors = int(colors.max(initial=-1)) + 1
        while True:
            nb = colors[g.indices]
            order = np.lexsort((nb, self.owner))
            sig = np.full((g.num_vertices, self.width + 2), -1, dtype=np.int64)
            sig[:, 0] = colors
            sig[:, 1] = self.deg
            sig[self.owner, 2 + self.slot] = nb[order]
            _, new = np.unique(sig, axis=0, return_inverse=True)
            new = new.ravel().astype(np.int64)
            count = int(new.max(initial=-1)) + 1
            if count == ncolors:
                return new
            colors, ncolors = new, count


def _dense_rank(colors: np.ndarray) -> np.ndarray:
    _, inv = np.unique(colors, return_inverse=True)
    return inv.ravel().astype(np.int64)


def individualize(colors: np.ndarray, v: int) -> np.ndarray:
    """Split ``v`` off its cell, placing it first."""
    out = 2 * colors + 1
    out[v] -= 1
    return _dense_rank(out)


def color_refine(graph: ColoredGraph, colors: np.ndarray | None = None) -> np.ndarray:
    """Coarsest equitable refinement of the graph's colouring (or of ``colors``)."""
    return _Refiner(graph).refine(graph.colors if colors is None else np.asarray(colors))


def _target_cell(colors: np.ndarray) -> np.ndarray | None:
    """First largest non-singleton cell, as ascending vertex indices."""
    sizes = np.bincount(colors)
    if sizes.max(initial=0) <= 1:
        return None
    cell = int(np.argmax(sizes))
    return np.flatnonzero(colors == cell)


def _orbit(v: int, gens: list[np.ndarray], n: int) -> np.ndarray:
    seen = np.zeros(n, dtype=bool)
    seen[v] = True
    frontier = np.array([v])
    while frontier.size:
        images = np.concatenate([g[frontier] for g in gens]) if gens else np.empty(0, dtype=np.int64)
        images = np.unique(images[~seen[images]])
        seen[images] = True
        frontier = images
    return seen


def orbit_partition(gens: list[np.ndarray], n: int) -> list[list[int]]:
    """Orbits of the group generated by ``gens`` on ``range(n)``."""
    if not gens:
        return [[i] for i in range(n)]
    rows = np.concatenate([np.arange(n)] * len(gens))
    cols = np.concatenate(gens)
    adj = sparse.coo_matrix((np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(n, n))
    _, labels = connected_components(adj, directed=True, connection="weak")
    orbits: dict[int, list[int]] = {}
    for v, lab in enumerate(labels):
        orbits.setdefault(int(lab), []).append(v)
    return sorted(orbits.values())


@dataclass
class AutResult:
    group_order: int
    generators: list[np.ndarray]
    point_orbits: list[list[int]]
    status: Status
    base: list[int] = field(default_factory=list)
    orbit_lengths: list[int] = field(default_factory=list)
    nodes: int = 0
    num_points: int | None = None

    @property
    def complete(self) -> bool:
        return self.status is Status.COMPLETE

    def point_generators(self) -> list[np.ndarray]:
        if self.num_points is None:
            return self.generators
        return [g[: self.num_points] for g in self.generators]

    def to_dict(self) -> dict:
        return {
            "group_order": str(self.group_order),
            "generators": [g.tolist() for g in self.generators],
            "point_orbits": self.point_orbits,
            "status": self.status.value,
            "base": self.base,
            "orbit_lengths": self.orbit_lengths,
            "nodes": self.nodes,
        }


class _BudgetExceeded(Exception):
    pass


class _Search:
    def __init__(self, graph: ColoredGraph, max_nodes: int | None, wall_clock: float | None) -> None:
        self.graph = graph
        self.refiner = _Refiner(graph)
        self.max_nodes = max_nodes
        self.deadline = None if wall_clock is None else time.monotonic() + wall_clock
        self.nodes = 0

    def tick(self) -> None:
        self.nodes += 1
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            raise _BudgetExceeded
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _BudgetExceeded

    def leftmost(self, colors: np.ndarray) -> tuple[list[int], list[np.ndarray], list[np.ndarray]]:
        path, parts, shapes = [], [colors], [np.bincount(colors)]
        while (cell := _target_cell(colors)) is not None:
            v = int(cell[0])
            path.append(v)
            self.tick()
            colors = self.refiner.refine(individualize(colors, v))
            parts.append(colors)
            shapes.append(np.bincount(colors))
        return path, parts, shapes

    def find_mapping(self, colors: np.ndarray, depth: int, shapes: list[np.ndarray], leaf: np.ndarray) -> np.ndarray | None:
        """Depth-first search below ``colors`` for a leaf giving an automorphism."""
        if not np.array_equal(np.bincount(colors), shapes[depth]):
            return None
        cell = _target_cell(colors)
        if cell is None:
            perm = np.empty(self.graph.num_vertices, dtype=np.int64)
            perm[leaf] = np.argsort(colors)
            return perm if self.graph.is_automorphism(perm) else None
        for v in cell:
            self.tick()
            found = self.find_mapping(self.refiner.refine(individualize(colors, int(v))), depth + 1, shapes, leaf)
            if found is not None:
                return found
        return None


def graph_automorphisms(
    graph: ColoredGraph,
    max_nodes: int | None = None,
    wall_clock_limit: float | None = None,
    num_points: int | None = None,
) -> AutResult:
    n = graph.num_vertices
    search = _Search(graph, max_nodes, wall_clock_limit)
    gens: list[np.ndarray] = []
    lengths: list[int] = []
    path: list[int] = []
    status = Status.COMPLETE
    try:
        root = search.refiner.refine(graph.colors)
        path, parts, shapes = search.leftmost(root)
        leaf = np.argsort(parts[-1])  # leaf[c] = vertex coloured c
        lengths = [0] * len(path)
        for k in range(len(path) - 1, -1, -1):
            cell = np.flatnonzero(parts[k] == parts[k][path[k]])
            reached = _orbit(path[k], gens, n)
            refused = np.zeros(n, dtype=bool)
            for w in cell:
                if reached[w] or refused[w]:
                    continue
                start = search.refiner.refine(individualize(parts[k], int(w)))
                search.tick()
                g = search.find_mapping(start, k + 1, shapes, leaf)
                if g is None:
                    refused |= _orbit(int(w), gens, n)
                else:
                    gens.append(g)
                    reached = _orbit(path[k], gens, n)
            lengths[k] = int(reached.sum())
    except _BudgetExceeded:
        status = Status.BUDGET_EXHAUSTED
    order = 1
    for length in lengths:
        order *= length
    limit = n if num_points is None else num_points
    orbits = [o for o in orbit_partition(gens, n) if o[0] < limit]
    return AutResult(
        group_order=order if status is Status.COMPLETE else 0,
        generators=gens,
        point_orbits=orbits,
        status=status,
        base=path,
        orbit_lengths=lengths,
        nodes=search.nodes,
        num_points=num_points,
    )


def automorphisms(
    geometry: IncidenceGeometry,
    max_nodes: int | None = None,
    wall_clock_limit: float | None = None,
) -> AutResult:
    """Automorphism group of a geometry (points to points, lines to lines)."""
    graph = ColoredGraph.from_geometry(geometry)
    return graph_automorphisms(graph, max_nodes, wall_clock_limit, num_points=geometry.num_points)


@dataclass
class TransitivityReport:
    point_transitive: bool
    num_point_orbits: int
    pair_orbits: dict[int, int]

    @property
    def distance_transitive(self) -> bool:
        return self.point_transitive and all(v == 1 for v in self.pair_orbits.values())

    def to_dict(self) -> dict:
        return {
            "point_transitive": self.point_transitive,
            "num_point_orbits": self.num_point_orbits,
            "pair_orbits": {str(k): v for k, v in self.pair_orbits.items()},
            "distance_transitive": self.distance_transitive,
        }


def transitivity_report(geometry: IncidenceGeometry, aut: AutResult, max_distance: int = 3) -> TransitivityReport:
    """Orbits on points and on ordered point pairs at each distance."""
    if not aut.complete:
        raise IncompleteGroup("transitivity needs a complete automorphism group")
    n = geometry.num_points
    gens = [g[:n] for g in aut.generators]
    dist = geometry.distances.dist
    pair_orbits = {}
    for i in range(max_distance + 1):
        a, b = np.nonzero(dist == i)
        if a.size == 0:
            pair_orbits[i] = 0
            continue
        slot = np.full(n * n, -1, dtype=np.int64)
        slot[a * n + b] = np.arange(a.size)
        if gens:
            src = np.concatenate([np.arange(a.size)] * len(gens))
            dst = np.concatenate([slot[g[a] * n + g[b]] for g in gens])
        else:
            src = dst = np.arange(a.size)
        adj = sparse.coo_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(a.size, a.size))
        pair_orbits[i], _ = connected_components(adj, directed=True, connection="weak")
        pair_orbits[i] = int(pair_orbits[i])
    return TransitivityReport(len(aut.point_orbits) == 1, len(aut.point_orbits), pair_orbits)


def set_orbits(aut: AutResult, sets) -> np.ndarray:
    """Orbit label for each point set in a family closed under the group.

    Raises ``ValueError`` when some generator maps a member outside the family,
    which would mean the family was enumerated incompletely.
    """
    if not aut.complete:
        raise IncompleteGroup("orbits on sets need a complete automorphism group")
    gens = aut.point_generators()
    keys = [tuple(sorted(int(p) for p in s)) for s in sets]
    index = {k: i for i, k in enumerate(keys)}
    if len(index) != len(keys):
        raise ValueError("family contains repeated sets")
    src, dst = [], []
    for i, k in enumerate(keys):
        pts = np.asarray(k, dtype=np.int64)
        for g in gens:
            image = tuple(sorted(g[pts].tolist()))
            j = index.get(image)
            if j is None:
                raise ValueError(f"image of set {i} is not in the family")
            src.append(i)
            dst.append(j)
    m = len(keys)
    adj = sparse.coo_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(m, m))
    _, labels = connected_components(adj, directed=True, connection="weak")
    return labels

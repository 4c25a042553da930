"""Ordered graph structures for discrete graphical models.

Every graph here carries a total vertex order: the listing order of its
vertex tuple.  Directed graphs must be listed topologically, so an edge
``(u, v)`` is accepted only when ``u`` appears before ``v``.  The order is
load-bearing throughout the package (triangulation, elimination sweeps and
junction trees are all defined relative to it), which is why inputs that
are not listed topologically are rejected instead of silently re-sorted.

Graph values are immutable after construction and every operation in this
module is a pure function, so values may be shared freely across threads.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping


@dataclass(frozen=True)
class OrderedDag:
    """A directed acyclic graph whose vertex listing is a topological order.

    Attributes:
        vertices: distinct vertex names; position in the tuple is the total
            order used by every ordered operation.
        edges: directed pairs ``(u, v)``; ``u`` must precede ``v`` in the
            vertex listing, which rules out cycles and self-loops at
            construction time.
    """

    vertices: tuple[str, ...]
    edges: frozenset[tuple[str, str]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(
            self, "edges", frozenset((u, v) for u, v in self.edges)
        )
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex names")
        pos = {v: i for i, v in enumerate(self.vertices)}
        for u, v in self.edges:
            if u not in pos or v not in pos:
                raise ValueError(f"edge ({u}, {v}) mentions an unknown vertex")
            if u == v:
                raise ValueError(f"self-loop on {u}")
            if pos[u] >= pos[v]:
                raise ValueError(
                    f"edge ({u}, {v}) violates the vertex order; directed "
                    "graphs must be listed topologically"
                )

    def position(self, v: str) -> int:
        return self.vertices.index(v)

    def parents_of(self, v: str) -> tuple[str, ...]:
        """Parents of ``v``, sorted by the vertex order."""
        ps = {u for u, w in self.edges if w == v}
        return tuple(u for u in self.vertices if u in ps)

    def children_of(self, v: str) -> tuple[str, ...]:
        cs = {w for u, w in self.edges if u == v}
        return tuple(w for w in self.vertices if w in cs)

    def has_edge(self, u: str, v: str) -> bool:
        return (u, v) in self.edges


@dataclass(frozen=True)
class OrderedUGraph:
    """An undirected graph with a total vertex order.

    Edges are unordered pairs of distinct vertices, stored as 2-element
    frozensets.
    """

    vertices: tuple[str, ...]
    edges: frozenset[frozenset[str]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(
            self, "edges", frozenset(frozenset(e) for e in self.edges)
        )
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex names")
        known = set(self.vertices)
        for e in self.edges:
            if len(e) != 2:
                raise ValueError(f"edge {set(e)} is not a pair of distinct vertices")
            if not e <= known:
                raise ValueError(f"edge {set(e)} mentions an unknown vertex")

    def position(self, v: str) -> int:
        return self.vertices.index(v)

    def neighbours_of(self, v: str) -> tuple[str, ...]:
        ns = {next(iter(e - {v})) for e in self.edges if v in e}
        return tuple(u for u in self.vertices if u in ns)

    def has_edge(self, u: str, v: str) -> bool:
        return frozenset((u, v)) in self.edges


Graph = OrderedDag | OrderedUGraph


@dataclass(frozen=True)
class GraphHom:
    """A vertex map between two graphs of the same kind.

    A valid homomorphism preserves the vertex order and the edges, where an
    edge may also be collapsed (both endpoints mapped to the same vertex).
    Validity is checked by :func:`check_hom`, not at construction.
    """

    source: Graph
    target: Graph
    vertex_map: Mapping[str, str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertex_map", dict(self.vertex_map))

    def preimage(self, v: str) -> tuple[str, ...]:
        """Source vertices mapped onto ``v``, in source order."""
        return tuple(u for u in self.source.vertices if self.vertex_map[u] == v)


def identity_hom(g: Graph) -> GraphHom:
    return GraphHom(g, g, {v: v for v in g.vertices})


def check_hom(hom: GraphHom) -> bool:
    """Whether ``hom`` is an order- and edge-preserving homomorphism.

    Raises:
        ValueError: if the vertex map is not total on the source vertices,
            maps outside the target, or the two graphs are of different
            kinds.  Order or edge violations return ``False``.
    """
    src, tgt, vm = hom.source, hom.target, hom.vertex_map
    if type(src) is not type(tgt):
        raise ValueError("source and target graphs must be of the same kind")
    if set(vm) != set(src.vertices):
        raise ValueError("vertex map is not total on the source vertices")
    if not set(vm.values()) <= set(tgt.vertices):
        raise ValueError("vertex map has images outside the target")

    tpos = {v: i for i, v in enumerate(tgt.vertices)}
    images = [tpos[vm[v]] for v in src.vertices]
    if any(a > b for a, b in zip(images, images[1:])):
        return False

    if isinstance(src, OrderedDag):
        return all(
            vm[u] == vm[v] or tgt.has_edge(vm[u], vm[v]) for u, v in src.edges
        )
    return all(
        vm[u] == vm[v] or tgt.has_edge(vm[u], vm[v])
        for e in src.edges
        for u, v in [tuple(e)]
    )


def decontract_hom(hom: GraphHom) -> tuple[GraphHom, GraphHom]:
    """Factor a surjective directed homomorphism through an edge decontraction.

    Returns a pair ``(beta, gamma)`` with ``gamma . beta == hom``, where
    ``beta`` is the identity on vertices into an intermediate graph that has
    an edge ``v -> w`` exactly when ``v < w`` and the images of ``v`` and
    ``w`` are equal or joined by a target edge, and ``gamma`` contracts each
    preimage (which the intermediate graph makes a complete subgraph).
    """
    if not isinstance(hom.source, OrderedDag) or not isinstance(hom.target, OrderedDag):
        raise ValueError("decontract_hom is defined for directed graphs")
    if not check_hom(hom):
        raise ValueError("not a valid graph homomorphism")
    if set(hom.vertex_map.values()) != set(hom.target.vertices):
        raise ValueError("homomorphism is not surjective on vertices")

    src, tgt, vm = hom.source, hom.target, hom.vertex_map
    mid_edges = set()
    for i, v in enumerate(src.vertices):
        for w in src.vertices[i + 1 :]:
            if vm[v] == vm[w] or tgt.has_edge(vm[v], vm[w]):
                mid_edges.add((v, w))
    mid = OrderedDag(src.vertices, mid_edges)
    beta = GraphHom(src, mid, {v: v for v in src.vertices})
    gamma = GraphHom(mid, tgt, dict(vm))
    return beta, gamma


def moralise_graph(g: OrderedDag) -> OrderedUGraph:
    """Drop edge directions and marry all co-parents.

    The result has the same vertex list and order; ``{u, v}`` is an edge
    exactly when ``g`` has an edge between ``u`` and ``v`` in either
    direction, or ``u`` and ``v`` share a child in ``g``.
    """
    edges = {frozenset(e) for e in g.edges}
    for v in g.vertices:
        for u, w in combinations(g.parents_of(v), 2):
            edges.add(frozenset((u, w)))
    return OrderedUGraph(g.vertices, edges)


def _reachable_through_high(h: OrderedUGraph, v: str, w: str) -> bool:
    """Is there a path v - x1 - ... - w in ``h`` with every xi listed at or
    after ``w``?  Direct edges count (no intermediates)."""
    if h.has_edge(v, w):
        return True
    pos = {u: i for i, u in enumerate(h.vertices)}
    cut = pos[w]
    seen = {v}
    queue = deque([v])
    while queue:
        u = queue.popleft()
        for n in h.neighbours_of(u):
            if n == w:
                return True
            if pos[n] > cut and n not in seen:
                seen.add(n)
                queue.append(n)
    return False


def triangulate_graph(h: OrderedUGraph) -> OrderedDag:
    """Direct ``h`` along its vertex order then add the fill-in edges.

    The output has an edge ``v -> w`` exactly when ``v`` precedes ``w`` and
    ``h`` contains a path from ``v`` to ``w`` whose intermediate vertices
    all come at or after ``w`` in the order (a direct edge is the
    zero-intermediate case).  The result always satisfies
    :func:`is_ordered_chordal`.
    """
    edges = set()
    for wi, w in enumerate(h.vertices):
        for v in h.vertices[:wi]:
            if _reachable_through_high(h, v, w):
                edges.add((v, w))
    return OrderedDag(h.vertices, edges)


def is_ordered_chordal(g: OrderedDag) -> bool:
    """Whether any two co-parents of a vertex are themselves joined.

    True exactly when for all edges ``u -> w`` and ``v -> w`` with ``u``
    listed before ``v``, the edge ``u -> v`` is present.
    """
    for w in g.vertices:
        ps = g.parents_of(w)
        for u, v in combinations(ps, 2):
            if not g.has_edge(u, v):
                return False
    return True


def _ancestors(g: OrderedDag, seeds: set[str]) -> set[str]:
    """Seeds together with all their ancestors."""
    out = set(seeds)
    queue = deque(seeds)
    while queue:
        v = queue.popleft()
        for u in g.parents_of(v):
            if u not in out:
                out.add(u)
                queue.append(u)
    return out


def _check_query_sets(
    g: Graph, x: Iterable[str], y: Iterable[str], z: Iterable[str]
) -> tuple[set[str], set[str], set[str]]:
    x, y, z = set(x), set(y), set(z)
    known = set(g.vertices)
    for name, s in (("x", x), ("y", y), ("z", z)):
        if not s <= known:
            raise ValueError(f"{name} contains unknown vertices: {sorted(s - known)}")
    if x & y or x & z or y & z:
        raise ValueError("x, y and z must be pairwise disjoint")
    return x, y, z


def d_separated(
    g: OrderedDag, x: Iterable[str], y: Iterable[str], z: Iterable[str]
) -> bool:
    """Whether every path between ``x`` and ``y`` is blocked given ``z``.

    Standard directed separation: a collider on a path is active exactly
    when it or one of its descendants lies in ``z``; a non-collider is
    active exactly when it is outside ``z``.  Implemented as reachability
    over (vertex, arrival-direction) states with the ancestor set of ``z``
    precomputed.
    """
    x, y, z = _check_query_sets(g, x, y, z)
    anc_z = _ancestors(g, z)

    # Direction encodes how the trail arrived: "up" from a child (or a
    # query start), "down" from a parent.
    visited: set[tuple[str, str]] = set()
    reachable: set[str] = set()
    queue = deque((s, "up") for s in x)
    while queue:
        v, d = queue.popleft()
        if (v, d) in visited:
            continue
        visited.add((v, d))
        if v not in z:
            reachable.add(v)
        if d == "up" and v not in z:
            for u in g.parents_of(v):
                queue.append((u, "up"))
            for w in g.children_of(v):
                queue.append((w, "down"))
        elif d == "down":
            if v not in z:
                for w in g.children_of(v):
                    queue.append((w, "down"))
            if v in anc_z:
                for u in g.parents_of(v):
                    queue.append((u, "up"))
    return not (reachable & y)


def u_separated(
    h: OrderedUGraph, x: Iterable[str], y: Iterable[str], z: Iterable[str]
) -> bool:
    """Whether every path between ``x`` and ``y`` meets ``z``.

    Plain graph separation: delete ``z`` and test connectivity.
    """
    x, y, z = _check_query_sets(h, x, y, z)
    seen = set(x)
    queue = deque(x)
    while queue:
        v = queue.popleft()
        for n in h.neighbours_of(v):
            if n in y:
                return False
            if n not in z and n not in seen:
                seen.add(n)
                queue.append(n)
    return True


def all_cliques(h: OrderedUGraph) -> list[tuple[str, ...]]:
    """All nonempty complete vertex subsets of ``h``.

    Each clique is a tuple sorted by the vertex order; the list is sorted by
    size and then lexicographically by vertex positions.  Singletons are
    always included.  Enumeration is by ordered backtracking, fine for the
    desk-scale graphs this package targets.
    """
    verts = h.vertices
    out: list[tuple[str, ...]] = []

    def extend(clique: tuple[str, ...], start: int) -> None:
        for i in range(start, len(verts)):
            v = verts[i]
            if all(h.has_edge(u, v) for u in clique):
                bigger = clique + (v,)
                out.append(bigger)
                extend(bigger, i + 1)

    extend((), 0)
    pos = {v: i for i, v in enumerate(verts)}
    out.sort(key=lambda c: (len(c), tuple(pos[v] for v in c)))
    return out


def maximal_cliques(h: OrderedUGraph) -> list[tuple[str, ...]]:
    """The inclusion-maximal entries of :func:`all_cliques`."""
    cliques = all_cliques(h)
    sets = [set(c) for c in cliques]
    return [
        c
        for c, cs in zip(cliques, sets)
        if not any(cs < other for other in sets)
    ]


@dataclass(frozen=True)
class ClusterTree:
    """A tree over vertex clusters, labelled with separator sets.

    Attributes:
        clusters: vertex sets, each sorted by the graph order.
        tree_edges: unordered pairs of cluster indices ``(i, j)`` with
            ``i < j``, forming a spanning tree.
        sepsets: for each tree edge, the intersection of its endpoint
            clusters.
    """

    clusters: tuple[tuple[str, ...], ...]
    tree_edges: frozenset[tuple[int, int]]
    sepsets: Mapping[tuple[int, int], tuple[str, ...]]

    def __post_init__(self) -> None:
        object.__setattr__(self, "sepsets", dict(self.sepsets))


def junction_tree(g: OrderedDag) -> ClusterTree:
    """Build the maximal-cluster tree of an ordered chordal graph.

    Clusters are the maximal sets among the families ``{v} | parents(v)``.
    The tree is a maximum-weight spanning tree of the cluster graph
    weighted by separator size, ties broken lexicographically on the
    cluster index pair, which makes the output canonical.  On disconnected
    graphs the tree is completed with empty-separator edges so that it
    still spans.  The result satisfies the running intersection property:
    for every vertex, the clusters containing it induce a connected
    subtree.
    """
    if not is_ordered_chordal(g):
        raise ValueError("junction_tree requires an ordered chordal graph")

    pos = {v: i for i, v in enumerate(g.vertices)}
    families = [
        tuple(sorted({v, *g.parents_of(v)}, key=pos.get)) for v in g.vertices
    ]
    family_sets = [set(f) for f in families]
    clusters = sorted(
        {
            f
            for f, fs in zip(families, family_sets)
            if not any(fs < other for other in family_sets)
        },
        key=lambda c: tuple(pos[v] for v in c),
    )

    n = len(clusters)
    candidates = sorted(
        ((i, j) for i in range(n) for j in range(i + 1, n)),
        key=lambda e: (-len(set(clusters[e[0]]) & set(clusters[e[1]])), e),
    )
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    tree_edges = set()
    sepsets = {}
    for i, j in candidates:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            tree_edges.add((i, j))
            sep = set(clusters[i]) & set(clusters[j])
            sepsets[(i, j)] = tuple(sorted(sep, key=pos.get))
    return ClusterTree(tuple(clusters), frozenset(tree_edges), sepsets)


def running_intersection_holds(tree: ClusterTree) -> bool:
    """Whether each vertex's clusters induce a connected subtree."""
    adjacency: dict[int, set[int]] = {i: set() for i in range(len(tree.clusters))}
    for i, j in tree.tree_edges:
        adjacency[i].add(j)
        adjacency[j].add(i)
    vertices = {v for c in tree.clusters for v in c}
    for v in vertices:
        holding = {i for i, c in enumerate(tree.clusters) if v in c}
        start = next(iter(holding))
        seen = {start}
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for j in adjacency[i]:
                if j in holding and j not in seen:
                    seen.add(j)
                    queue.append(j)
        if seen != holding:
            return False
    return True

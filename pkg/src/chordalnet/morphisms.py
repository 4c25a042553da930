"""Morphisms between networks of the same kind.

A morphism from a source network to a target network consists of

* ``alpha``: a :class:`~chordalnet.graphs.GraphHom` from the TARGET
  network's graph to the SOURCE network's graph.  The direction is
  contravariant on purpose and inverts the first intuition: mapping a
  target vertex onto a source vertex says which source variable (or
  variables) the target variable refines or collapses.
* ``eta``: for every source vertex ``v``, a column-stochastic matrix from
  the source domain of ``v`` to the product of the target domains over the
  alpha-preimage of ``v``.  An empty preimage makes the matrix a single
  all-ones row, the deletion map into the one-point domain.

A morphism is valid when ``alpha`` is a homomorphism, every ``eta`` matrix
is column-stochastic, and the tensor product of the ``eta`` matrices
carries the source distribution to the target distribution.  Because
``alpha`` is order-preserving, the preimages of successive source vertices
tile the target vertex list in order, so the tensor product is simply the
Kronecker product taken in source order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from itertools import product as iter_product
from typing import Mapping, NamedTuple

import numpy as np

from .factors import (
    Factor,
    Kernel,
    VariableTable,
    factor_marginalize,
    factor_product,
    kernel_to_factor,
    normalize_to_kernel,
)
from .graphs import GraphHom, OrderedDag, OrderedUGraph, check_hom, identity_hom, is_ordered_chordal
from .networks import (
    BayesianNetwork,
    ChordalNetwork,
    DegenerateDistributionError,
    MarkovNetwork,
    Network,
    mn_partition,
    network_distribution,
    require_valid,
)
from .transforms import variable_elimination

STOCHASTIC_TOL = 1e-9
PRESERVATION_TOL = 1e-9


@dataclass(eq=False)
class NetworkMorphism:
    """A contravariant vertex map plus per-vertex stochastic matrices.

    ``eta[v]`` has one column per state of the source variable ``v`` and
    one row per joint state of the target variables mapped onto ``v``
    (row-major in target order; a single row when the preimage is empty).
    """

    alpha: GraphHom
    eta: dict[str, np.ndarray]

    def __post_init__(self) -> None:
        self.eta = {v: np.asarray(m, dtype=np.float64) for v, m in self.eta.items()}


def identity_morphism(net: Network) -> NetworkMorphism:
    return NetworkMorphism(
        identity_hom(net.graph),
        {v: np.eye(net.vt.card(v)) for v in net.graph.vertices},
    )


def transfer_matrix(m: NetworkMorphism, src: Network) -> np.ndarray:
    """The tensor product of the eta components, in source vertex order.

    Applied to the flat source joint it yields a flat table in the target's
    canonical layout.
    """
    mats = [m.eta[v] for v in src.graph.vertices]
    return reduce(np.kron, mats, np.ones((1, 1)))


def morphism_violations(
    m: NetworkMorphism, src: Network, tgt: Network
) -> list[str]:
    """Every way ``m`` fails to be a morphism from ``src`` to ``tgt``.

    The distribution-preservation check reports the maximum pointwise
    deviation when it fails.
    """
    out: list[str] = []
    if m.alpha.source != tgt.graph:
        out.append("alpha must map from the target network's graph")
    if m.alpha.target != src.graph:
        out.append("alpha must map into the source network's graph")
    if out:
        return out
    try:
        if not check_hom(m.alpha):
            out.append("alpha is not an order- and edge-preserving homomorphism")
    except ValueError as exc:
        out.append(f"alpha is malformed: {exc}")

    for v in src.graph.vertices:
        mat = m.eta.get(v)
        if mat is None:
            out.append(f"eta is missing a component for vertex {v}")
            continue
        rows = 1
        for w in m.alpha.preimage(v):
            rows *= tgt.vt.card(w)
        if mat.shape != (rows, src.vt.card(v)):
            out.append(
                f"eta[{v}] has shape {mat.shape}, expected ({rows}, {src.vt.card(v)})"
            )
            continue
        if not np.all(np.isfinite(mat)) or np.any(mat < 0):
            out.append(f"eta[{v}] has negative or non-finite entries")
            continue
        dev = float(np.abs(mat.sum(axis=0) - 1.0).max())
        if dev > STOCHASTIC_TOL:
            out.append(
                f"eta[{v}] is not column-stochastic (worst column deviation {dev:.3g})"
            )
    if out:
        return out

    try:
        src_dist = network_distribution(src)
        tgt_dist = network_distribution(tgt)
    except (DegenerateDistributionError, ValueError) as exc:
        return [f"cannot check distribution preservation: {exc}"]
    image = transfer_matrix(m, src) @ src_dist.values
    dev = float(np.abs(image - tgt_dist.values).max())
    if dev > PRESERVATION_TOL:
        out.append(
            "the eta transfer does not carry the source distribution to the "
            f"target distribution (max pointwise deviation {dev:.3g})"
        )
    return out


def validate_morphism(m: NetworkMorphism, src: Network, tgt: Network) -> list[str]:
    """Alias of :func:`morphism_violations`; empty list means valid."""
    return morphism_violations(m, src, tgt)


def compose_morphisms(f: NetworkMorphism, g: NetworkMorphism) -> NetworkMorphism:
    """Compose ``f`` (A to B) with ``g`` (B to C) into a morphism A to C.

    Vertex maps compose target-to-source; each eta component of ``f`` is
    followed by the Kronecker product of the ``g`` components sitting over
    its output block.
    """
    if f.alpha.source != g.alpha.target:
        raise ValueError(
            "type mismatch: f's target network graph must be g's source network graph"
        )
    alpha = GraphHom(
        g.alpha.source,
        f.alpha.target,
        {w: f.alpha.vertex_map[g.alpha.vertex_map[w]] for w in g.alpha.source.vertices},
    )
    eta: dict[str, np.ndarray] = {}
    for v in f.alpha.target.vertices:
        mids = f.alpha.preimage(v)
        block = reduce(np.kron, [g.eta[u] for u in mids], np.ones((1, 1)))
        eta[v] = block @ f.eta[v]
    return NetworkMorphism(alpha, eta)


class MorphismDecomposition(NamedTuple):
    semantic: NetworkMorphism
    syntactic: NetworkMorphism
    intermediate: Network


def _product_states(vt: VariableTable, vertices: tuple[str, ...]) -> tuple[str, ...]:
    """State labels of a product domain, row-major, last factor fastest."""
    if not vertices:
        return ("()",)
    if len(vertices) == 1:
        return vt.states(vertices[0])
    return tuple(
        "(" + ",".join(combo) + ")"
        for combo in iter_product(*(vt.states(w) for w in vertices))
    )


def _regrouped_kernels(
    src_graph: OrderedDag,
    tgt: BayesianNetwork | ChordalNetwork,
    alpha: GraphHom,
) -> dict[str, Kernel]:
    """Target kernels bundled into one kernel per source vertex.

    The kernel of a source vertex ``v`` is the joint conditional of all
    target kernels whose child lies over ``v``: occurrences of in-group
    variables are identified, out-of-group parents are read off the
    preimages of the source parents, and unused inputs are broadcast.
    Because alpha preserves order, the flat layout over the concatenated
    preimages coincides with the target's canonical layout, so no
    transposition is needed.
    """
    stochastic = all(k.stochastic for k in tgt.kernels.values())
    kernels: dict[str, Kernel] = {}
    for v in src_graph.vertices:
        group = alpha.preimage(v)
        pa_src = src_graph.parents_of(v)
        input_block = tuple(w for p in pa_src for w in alpha.preimage(p))
        axes = input_block + group

        tables = [kernel_to_factor(tgt.kernels[w], tgt.vt) for w in group]
        prod = (
            reduce(lambda a, b: factor_product(a, b, tgt.vt), tables)
            if tables
            else None
        )
        shape = tgt.vt.shape(axes) if axes else ()
        if prod is None:
            values = np.ones(shape if shape else (1,))
        else:
            spread = prod.values.reshape(
                [tgt.vt.card(u) if u in prod.vars else 1 for u in axes]
            )
            values = np.broadcast_to(spread, shape)
        kernels[v] = Kernel(v, pa_src, values.ravel(), stochastic=stochastic)
    return kernels


def _regrouped_factors(
    src_graph: OrderedUGraph,
    tgt: MarkovNetwork,
    alpha: GraphHom,
) -> dict[frozenset[str], Factor]:
    """Target clique factors bundled onto their image cliques."""
    tpos = {w: i for i, w in enumerate(tgt.graph.vertices)}
    groups: dict[frozenset[str], list[Factor]] = {}
    for clique, f in sorted(
        tgt.factors.items(), key=lambda kv: tuple(sorted(tpos[w] for w in kv[0]))
    ):
        image = frozenset(alpha.vertex_map[w] for w in clique)
        groups.setdefault(image, []).append(f)

    spos = {v: i for i, v in enumerate(src_graph.vertices)}
    out: dict[frozenset[str], Factor] = {}
    for image, tables in groups.items():
        members = tuple(sorted(image, key=spos.get))
        axes = tuple(w for v in members for w in alpha.preimage(v))
        prod = reduce(lambda a, b: factor_product(a, b, tgt.vt), tables)
        spread = prod.values.reshape(
            [tgt.vt.card(u) if u in prod.vars else 1 for u in axes]
        )
        values = np.broadcast_to(spread, tgt.vt.shape(axes) if axes else (1,))
        out[frozenset(members)] = Factor(members, values.ravel())
    return out


def decompose_morphism(
    m: NetworkMorphism, src: Network, tgt: Network
) -> MorphismDecomposition:
    """Split a morphism into a semantic part followed by a syntactic part.

    The semantic part keeps the source graph and carries all of ``eta``
    into an intermediate network that holds the target distribution over
    the source graph, with each source vertex's domain replaced by the
    product of the target domains over its preimage.  The syntactic part
    reuses the original vertex map with identity eta components.  Their
    composition reproduces ``m`` exactly.
    """
    violations = morphism_violations(m, src, tgt)
    if violations:
        raise ValueError("cannot decompose an invalid morphism: " + "; ".join(violations))

    mid_vt = VariableTable(
        tuple(
            (v, _product_states(tgt.vt, m.alpha.preimage(v)))
            for v in src.graph.vertices
        )
    )
    intermediate: Network
    if isinstance(src, MarkovNetwork):
        intermediate = MarkovNetwork(
            src.graph, mid_vt, _regrouped_factors(src.graph, tgt, m.alpha)
        )
    else:
        kernels = _regrouped_kernels(src.graph, tgt, m.alpha)
        if isinstance(src, ChordalNetwork):
            intermediate = ChordalNetwork(src.graph, mid_vt, kernels)
        else:
            intermediate = BayesianNetwork(src.graph, mid_vt, kernels)

    semantic = NetworkMorphism(identity_hom(src.graph), dict(m.eta))
    syntactic = NetworkMorphism(
        m.alpha, {v: np.eye(mid_vt.card(v)) for v in src.graph.vertices}
    )
    return MorphismDecomposition(semantic, syntactic, intermediate)


@dataclass(frozen=True)
class PearlVertexUpdate:
    """Per-vertex update data: a state permutation and evidence weights.

    ``iso`` is a permutation matrix over the vertex domain (``None`` means
    identity); ``weight`` is a nonnegative evidence vector over the vertex
    domain in its original state order (``None`` means all ones).
    """

    iso: np.ndarray | None = None
    weight: np.ndarray | None = None


def _permutation(iso: np.ndarray | None, card: int, vertex: str) -> np.ndarray:
    """The map sigma with iso[sigma[j], j] == 1, validated."""
    if iso is None:
        return np.arange(card)
    arr = np.asarray(iso, dtype=np.float64)
    if arr.shape != (card, card):
        raise ValueError(f"iso for {vertex} must be {card}x{card}")
    ok = (
        np.all((arr == 0.0) | (arr == 1.0))
        and np.all(arr.sum(axis=0) == 1.0)
        and np.all(arr.sum(axis=1) == 1.0)
    )
    if not ok:
        raise ValueError(f"iso for {vertex} is not a permutation matrix")
    return np.argmax(arr, axis=0)


def _weights(weight: np.ndarray | None, card: int, vertex: str) -> np.ndarray:
    if weight is None:
        return np.ones(card)
    arr = np.asarray(weight, dtype=np.float64).ravel()
    if arr.size != card:
        raise ValueError(f"weight vector for {vertex} must have length {card}")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError(f"weight vector for {vertex} must be finite and nonnegative")
    return arr


def _reweighted_kernels(
    net: BayesianNetwork | ChordalNetwork,
    sigmas: dict[str, np.ndarray],
    weights: dict[str, np.ndarray],
) -> dict[str, Kernel]:
    """Weight each kernel's child axis, then relabel all axes."""
    out: dict[str, Kernel] = {}
    for v in net.graph.vertices:
        k = net.kernels[v]
        grid = k.values.reshape(net.vt.shape(k.parents) + (net.vt.card(v),))
        grid = grid * weights[v]
        grid = np.take(grid, np.argsort(sigmas[v]), axis=-1)
        for axis, p in enumerate(k.parents):
            grid = np.take(grid, np.argsort(sigmas[p]), axis=axis)
        out[v] = Kernel(v, k.parents, grid.ravel(), stochastic=False)
    return out


def _conditional_factorization(
    graph: OrderedDag, vt: VariableTable, posterior: Factor
) -> dict[str, Kernel]:
    """Kernels from the posterior's own conditionals along the graph."""
    kernels: dict[str, Kernel] = {}
    for v in graph.vertices:
        family = sorted({v, *graph.parents_of(v)}, key=vt.index)
        fam = factor_marginalize(posterior, set(posterior.vars) - set(family), vt)
        kernels[v], _ = normalize_to_kernel(fam, v, vt)
    return kernels


def pearl_update(
    net: Network, updates: Mapping[str, PearlVertexUpdate]
) -> tuple[Network, NetworkMorphism]:
    """Apply per-vertex evidence weights and state permutations.

    The updated network keeps the graph and variable order; its
    distribution is the old one multiplied pointwise by every weight,
    relabelled through the permutations, and renormalized once at the
    network level (never per vertex, which would destroy the per-vertex
    factorization of the witnessing morphism).  For Markov networks the
    weights join the singleton-clique factors; for directed kinds the
    reweighted kernels are re-normalized by the elimination sweep when the
    graph is ordered chordal, and from the posterior's own conditionals
    otherwise.

    Returns the updated network and a morphism from the input to it.  When
    every weight vector is constant the morphism components are the
    permutations themselves and the morphism always validates; under
    genuine evidence the components are the posterior marginals, which
    preserve the distribution exactly when the posterior is a product (for
    example indicator evidence on the last vertex of a chain), and only
    the marginals otherwise.

    Raises:
        DegenerateDistributionError: if the update annihilates the joint.
        ValueError: if a directed graph's posterior does not factor over it
            (possible for colliders under evidence), or on malformed
            update data.
    """
    require_valid(net)
    sigmas = {
        v: _permutation(getattr(updates.get(v), "iso", None), net.vt.card(v), v)
        for v in net.graph.vertices
    }
    weights = {
        v: _weights(getattr(updates.get(v), "weight", None), net.vt.card(v), v)
        for v in net.graph.vertices
    }
    for v, w in weights.items():
        if not np.any(w > 0):
            raise DegenerateDistributionError(
                f"update annihilates the joint: all weights at {v} are zero",
                vertex=v,
            )

    updated: Network
    if isinstance(net, MarkovNetwork):
        factors: dict[frozenset[str], Factor] = {}
        for clique, f in net.factors.items():
            grid = f.values.reshape(net.vt.shape(f.vars))
            for axis, u in enumerate(f.vars):
                grid = np.take(grid, np.argsort(sigmas[u]), axis=axis)
            factors[clique] = Factor(f.vars, grid.ravel())
        for v in net.graph.vertices:
            w = weights[v][np.argsort(sigmas[v])]
            if np.all(w == 1.0):
                continue
            key = frozenset({v})
            base = factors.get(key, Factor((v,), np.ones(net.vt.card(v))))
            factors[key] = Factor((v,), base.values * w)
        updated = MarkovNetwork(net.graph, net.vt, factors)
        if mn_partition(updated) == 0.0:
            raise DegenerateDistributionError(
                "update annihilates the joint: the factor product is zero"
            )
    else:
        reweighted = _reweighted_kernels(net, sigmas, weights)
        if is_ordered_chordal(net.graph):
            cn = ChordalNetwork(net.graph, net.vt, reweighted)
            try:
                bn, _ = variable_elimination(cn)
            except DegenerateDistributionError as exc:
                raise DegenerateDistributionError(
                    f"update annihilates the joint: {exc}", vertex=exc.vertex
                ) from exc
            kernels = bn.kernels
        else:
            tables = [
                kernel_to_factor(reweighted[v], net.vt) for v in net.graph.vertices
            ]
            prod = reduce(lambda a, b: factor_product(a, b, net.vt), tables)
            mass = float(prod.values.sum())
            if mass == 0.0:
                raise DegenerateDistributionError(
                    "update annihilates the joint: the weighted product is zero"
                )
            posterior = Factor(prod.vars, prod.values / mass)
            kernels = _conditional_factorization(net.graph, net.vt, posterior)
            check = reduce(
                lambda a, b: factor_product(a, b, net.vt),
                [kernel_to_factor(k, net.vt) for k in kernels.values()],
            )
            if float(np.abs(check.values - posterior.values).max()) > PRESERVATION_TOL:
                raise ValueError(
                    "the updated distribution does not factor over this graph; "
                    "evidence on a collider family needs a chordal graph"
                )
        if isinstance(net, ChordalNetwork):
            updated = ChordalNetwork(net.graph, net.vt, kernels)
        else:
            updated = BayesianNetwork(net.graph, net.vt, kernels)

    relabel_only = all(
        float(w.max() - w.min()) == 0.0 and w[0] > 0.0 for w in weights.values()
    )
    eta: dict[str, np.ndarray] = {}
    if relabel_only:
        for v in net.graph.vertices:
            card = net.vt.card(v)
            mat = np.zeros((card, card))
            mat[sigmas[v], np.arange(card)] = 1.0
            eta[v] = mat
    else:
        dist = network_distribution(updated)
        for v in net.graph.vertices:
            marg = factor_marginalize(dist, set(dist.vars) - {v}, net.vt)
            eta[v] = np.tile(marg.values[:, None], (1, net.vt.card(v)))
    return updated, NetworkMorphism(identity_hom(net.graph), eta)


def marginalization_morphism(net: Network, v: str) -> tuple[Network, NetworkMorphism]:
    """The morphism onto the one-vertex network carrying the v-marginal.

    The target keeps only ``v`` with its marginal distribution; the vertex
    map sends the single target vertex to ``v``, eta is the identity at
    ``v`` and the deletion map (a single all-ones row) everywhere else.
    """
    if v not in net.graph.vertices:
        raise ValueError(f"unknown vertex {v}")
    dist = network_distribution(net)
    marg = factor_marginalize(dist, set(dist.vars) - {v}, net.vt)
    vt_v = VariableTable(((v, net.vt.states(v)),))

    target: Network
    if isinstance(net, MarkovNetwork):
        graph: OrderedDag | OrderedUGraph = OrderedUGraph((v,))
        target = MarkovNetwork(graph, vt_v, {frozenset({v}): Factor((v,), marg.values)})
    else:
        graph = OrderedDag((v,))
        kernel = Kernel(v, (), marg.values, stochastic=True)
        if isinstance(net, ChordalNetwork):
            target = ChordalNetwork(graph, vt_v, {v: kernel})
        else:
            target = BayesianNetwork(graph, vt_v, {v: kernel})

    alpha = GraphHom(graph, net.graph, {v: v})
    eta = {
        u: np.eye(net.vt.card(u)) if u == v else np.ones((1, net.vt.card(u)))
        for u in net.graph.vertices
    }
    return target, NetworkMorphism(alpha, eta)

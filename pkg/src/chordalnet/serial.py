"""JSON documents for networks.

A document is a single JSON object::

    {
      "kind": "bayesian" | "markov" | "chordal",
      "variables": [{"name": ..., "states": [...]}, ...],
      "edges": [[u, v], ...],
      "tables": [...]
    }

The variable listing order IS the total order: it fixes triangulation and
elimination behaviour, so reordering a file is how a caller selects a
different order.  Edge lists of directed kinds must be topological with
respect to it.

Tables are self-describing, one row per conditioning assignment:
``{"child": v, "parents": [...], "rows": [{"given": [...], "values":
[...]}, ...]}`` for directed kinds, and ``{"clique": [...], "rows": ...}``
for Markov networks, where the rows condition on all clique variables but
the last.  Row coverage must be total, every assignment exactly once.
Missing Markov tables mean the all-ones factor.

Loading validates everything and reports all problems at once with field
context; saving emits a canonical key order and round-trip-exact floats,
so ``save(load(x))`` is byte-identical for canonical files.
"""

from __future__ import annotations

import json
from itertools import product as iter_product
from typing import Any, IO

import numpy as np

from .factors import Factor, Kernel, VariableTable
from .graphs import OrderedDag, OrderedUGraph
from .networks import (
    BayesianNetwork,
    ChordalNetwork,
    MarkovNetwork,
    Network,
    network_violations,
)

KINDS = ("bayesian", "markov", "chordal")


class DocumentError(ValueError):
    """A document failed to parse or validate; ``violations`` lists why."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("\n".join(self.violations))


def _parse_variables(doc: dict, errors: list[str]) -> VariableTable | None:
    raw = doc.get("variables")
    if not isinstance(raw, list) or not raw:
        errors.append("variables: must be a nonempty list")
        return None
    entries = []
    for i, item in enumerate(raw):
        where = f"variables[{i}]"
        if not isinstance(item, dict):
            errors.append(f"{where}: must be an object with name and states")
            return None
        name = item.get("name")
        states = item.get("states")
        if not isinstance(name, str) or not name:
            errors.append(f"{where}.name: must be a nonempty string")
            return None
        if (
            not isinstance(states, list)
            or not states
            or not all(isinstance(s, str) for s in states)
        ):
            errors.append(f"{where}.states: must be a nonempty list of strings")
            return None
        entries.append((name, tuple(states)))
    try:
        return VariableTable(tuple(entries))
    except ValueError as exc:
        errors.append(f"variables: {exc}")
        return None


def _parse_edges(
    doc: dict, vt: VariableTable, directed: bool, errors: list[str]
) -> list[tuple[str, str]] | None:
    raw = doc.get("edges", [])
    if not isinstance(raw, list):
        errors.append("edges: must be a list of vertex pairs")
        return None
    pos = {name: i for i, name in enumerate(vt.names)}
    out = []
    ok = True
    for i, item in enumerate(raw):
        where = f"edges[{i}]"
        if (
            not isinstance(item, list)
            or len(item) != 2
            or not all(isinstance(x, str) for x in item)
        ):
            errors.append(f"{where}: must be a pair of vertex names")
            ok = False
            continue
        u, v = item
        if u not in pos or v not in pos:
            errors.append(f"{where}: unknown vertex in ({u}, {v})")
            ok = False
            continue
        if u == v:
            errors.append(f"{where}: self-loop on {u}")
            ok = False
            continue
        if directed and pos[u] >= pos[v]:
            errors.append(
                f"{where}: ({u}, {v}) is not topological; the parent must be "
                "declared before the child"
            )
            ok = False
            continue
        out.append((u, v) if directed or pos[u] < pos[v] else (v, u))
    if len(set(out)) != len(out):
        errors.append("edges: duplicate edges")
        ok = False
    return out if ok else None


def _rows_to_flat(
    rows: Any,
    given_vars: tuple[str, ...],
    out_var: str,
    vt: VariableTable,
    where: str,
    errors: list[str],
) -> np.ndarray | None:
    if not isinstance(rows, list):
        errors.append(f"{where}.rows: must be a list")
        return None
    expected = list(iter_product(*(vt.states(p) for p in given_vars)))
    card = vt.card(out_var)
    seen: dict[tuple[str, ...], list[float]] = {}
    ok = True
    for i, row in enumerate(rows):
        rw = f"{where}.rows[{i}]"
        if not isinstance(row, dict):
            errors.append(f"{rw}: must be an object with given and values")
            ok = False
            continue
        given = row.get("given")
        values = row.get("values")
        if not isinstance(given, list) or not all(isinstance(s, str) for s in given):
            errors.append(f"{rw}.given: must be a list of state labels")
            ok = False
            continue
        if len(given) != len(given_vars):
            errors.append(
                f"{rw}.given: has {len(given)} labels, expected one per "
                f"conditioning variable {list(given_vars)}"
            )
            ok = False
            continue
        bad_label = next(
            (
                (p, s)
                for p, s in zip(given_vars, given)
                if s not in vt.states(p)
            ),
            None,
        )
        if bad_label is not None:
            errors.append(
                f"{rw}.given: {bad_label[1]!r} is not a state of {bad_label[0]}"
            )
            ok = False
            continue
        if not isinstance(values, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in values
        ):
            errors.append(f"{rw}.values: must be a list of numbers")
            ok = False
            continue
        if len(values) != card:
            errors.append(
                f"{rw}.values: has {len(values)} entries, expected {card} "
                f"(one per state of {out_var})"
            )
            ok = False
            continue
        key = tuple(given)
        if key in seen:
            errors.append(f"{rw}: duplicate row for assignment {list(key)}")
            ok = False
            continue
        seen[key] = [float(x) for x in values]
    for key in expected:
        if key not in seen:
            errors.append(f"{where}.rows: missing row for assignment {list(key)}")
            ok = False
    if not ok:
        return None
    return np.array([x for key in expected for x in seen[key]])


def _parse_kernel_tables(
    doc: dict, graph: OrderedDag, vt: VariableTable, stochastic: bool, errors: list[str]
) -> dict[str, Kernel] | None:
    raw = doc.get("tables")
    if not isinstance(raw, list):
        errors.append("tables: must be a list")
        return None
    kernels: dict[str, Kernel] = {}
    ok = True
    for i, item in enumerate(raw):
        where = f"tables[{i}]"
        if not isinstance(item, dict):
            errors.append(f"{where}: must be an object")
            ok = False
            continue
        child = item.get("child")
        parents = item.get("parents", [])
        if not isinstance(child, str) or child not in vt.names:
            errors.append(f"{where}.child: unknown variable {child!r}")
            ok = False
            continue
        if child in kernels:
            errors.append(f"{where}: duplicate table for {child}")
            ok = False
            continue
        expected_parents = graph.parents_of(child)
        if tuple(parents) != expected_parents:
            errors.append(
                f"{where}.parents: {parents} does not match the graph parents "
                f"{list(expected_parents)} of {child} (in declaration order)"
            )
            ok = False
            continue
        flat = _rows_to_flat(
            item.get("rows"), expected_parents, child, vt, where, errors
        )
        if flat is None:
            ok = False
            continue
        if np.any(flat < 0) or not np.all(np.isfinite(flat)):
            errors.append(f"{where}: values must be finite and nonnegative")
            ok = False
            continue
        kernels[child] = Kernel(child, expected_parents, flat, stochastic=stochastic)
    for v in graph.vertices:
        if v not in kernels:
            errors.append(f"tables: missing table for vertex {v}")
            ok = False
    return kernels if ok else None


def _parse_clique_tables(
    doc: dict, vt: VariableTable, errors: list[str]
) -> dict[frozenset[str], Factor] | None:
    raw = doc.get("tables", [])
    if not isinstance(raw, list):
        errors.append("tables: must be a list")
        return None
    pos = {name: i for i, name in enumerate(vt.names)}
    factors: dict[frozenset[str], Factor] = {}
    ok = True
    for i, item in enumerate(raw):
        where = f"tables[{i}]"
        if not isinstance(item, dict):
            errors.append(f"{where}: must be an object")
            ok = False
            continue
        clique = item.get("clique")
        if (
            not isinstance(clique, list)
            or not clique
            or not all(isinstance(x, str) for x in clique)
        ):
            errors.append(f"{where}.clique: must be a nonempty list of vertex names")
            ok = False
            continue
        unknown = [x for x in clique if x not in pos]
        if unknown:
            errors.append(f"{where}.clique: unknown vertices {unknown}")
            ok = False
            continue
        members = tuple(clique)
        if members != tuple(sorted(members, key=pos.get)) or len(set(members)) != len(
            members
        ):
            errors.append(
                f"{where}.clique: must list distinct vertices in declaration order"
            )
            ok = False
            continue
        key = frozenset(members)
        if key in factors:
            errors.append(f"{where}: duplicate table for clique {list(members)}")
            ok = False
            continue
        flat = _rows_to_flat(
            item.get("rows"), members[:-1], members[-1], vt, where, errors
        )
        if flat is None:
            ok = False
            continue
        if np.any(flat < 0) or not np.all(np.isfinite(flat)):
            errors.append(f"{where}: values must be finite and nonnegative")
            ok = False
            continue
        factors[key] = Factor(members, flat)
    return factors if ok else None


def document_to_network(doc: Any) -> Network:
    """Build and fully validate a network from a parsed JSON document.

    Raises:
        DocumentError: listing every structural and semantic violation.
    """
    errors: list[str] = []
    if not isinstance(doc, dict):
        raise DocumentError(["document: must be a JSON object"])
    kind = doc.get("kind")
    if kind not in KINDS:
        raise DocumentError(
            [f"kind: must be one of {list(KINDS)}, got {kind!r}"]
        )
    for key in doc:
        if key not in ("kind", "variables", "edges", "tables"):
            errors.append(f"{key}: unknown key")

    vt = _parse_variables(doc, errors)
    if vt is None:
        raise DocumentError(errors)
    edges = _parse_edges(doc, vt, directed=kind != "markov", errors=errors)
    if edges is None:
        raise DocumentError(errors)

    net: Network
    if kind == "markov":
        graph = OrderedUGraph(vt.names, {frozenset(e) for e in edges})
        factors = _parse_clique_tables(doc, vt, errors)
        if factors is None:
            raise DocumentError(errors)
        net = MarkovNetwork(graph, vt, factors)
    else:
        dag = OrderedDag(vt.names, set(edges))
        kernels = _parse_kernel_tables(
            doc, dag, vt, stochastic=kind == "bayesian", errors=errors
        )
        if kernels is None:
            raise DocumentError(errors)
        net = (
            BayesianNetwork(dag, vt, kernels)
            if kind == "bayesian"
            else ChordalNetwork(dag, vt, kernels)
        )

    errors.extend(network_violations(net))
    if errors:
        raise DocumentError(errors)
    return net


def network_to_document(net: Network) -> dict:
    """Canonical document of a network: fixed key order, canonical sorting."""
    vt = net.vt
    pos = {name: i for i, name in enumerate(vt.names)}
    variables = [
        {"name": name, "states": list(states)} for name, states in vt.entries
    ]
    if isinstance(net, MarkovNetwork):
        kind = "markov"
        edges = sorted(
            [sorted(e, key=pos.get) for e in net.graph.edges],
            key=lambda e: (pos[e[0]], pos[e[1]]),
        )
        tables = []
        for clique in sorted(
            net.factors, key=lambda c: tuple(sorted(pos[v] for v in c))
        ):
            members = tuple(sorted(clique, key=pos.get))
            f = net.factors[clique]
            card = vt.card(members[-1])
            rows = [
                {
                    "given": list(given),
                    "values": [float(x) for x in f.values[i * card : (i + 1) * card]],
                }
                for i, given in enumerate(
                    iter_product(*(vt.states(p) for p in members[:-1]))
                )
            ]
            tables.append({"clique": list(members), "rows": rows})
    else:
        kind = "bayesian" if isinstance(net, BayesianNetwork) else "chordal"
        edges = sorted(
            [list(e) for e in net.graph.edges], key=lambda e: (pos[e[0]], pos[e[1]])
        )
        tables = []
        for v in net.graph.vertices:
            k = net.kernels[v]
            card = vt.card(v)
            rows = [
                {
                    "given": list(given),
                    "values": [float(x) for x in k.values[i * card : (i + 1) * card]],
                }
                for i, given in enumerate(
                    iter_product(*(vt.states(p) for p in k.parents))
                )
            ]
            tables.append({"child": v, "parents": list(k.parents), "rows": rows})
    return {"kind": kind, "variables": variables, "edges": edges, "tables": tables}


def _scalar(x: Any) -> str:
    # json.dumps round-trips floats exactly (repr-based shortest form).
    return json.dumps(x)


def _render(obj: Any, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [
            f"{inner}{_scalar(k)}: {_render(v, indent + 1)}" for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(x, (dict, list)) for x in obj):
            return "[" + ", ".join(_scalar(x) for x in obj) + "]"
        parts = [f"{inner}{_render(x, indent + 1)}" for x in obj]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    return _scalar(obj)


def dumps_network(net: Network) -> str:
    """Serialize to canonical JSON text (stable bytes for identical input).

    Leaf lists stay on one line so documents diff row by row.
    """
    return _render(network_to_document(net), 0) + "\n"


def loads_network(text: str) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(
            [f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"]
        ) from exc
    return document_to_network(doc)


def load_network(source: str | IO[str]) -> Network:
    """Load a network from a path or an open text stream."""
    if hasattr(source, "read"):
        return loads_network(source.read())
    with open(source, "r", encoding="utf-8") as fh:
        return loads_network(fh.read())


def save_network(net: Network, destination: str | IO[str]) -> None:
    """Write the canonical document of ``net`` to a path or stream."""
    text = dumps_network(net)
    if hasattr(destination, "write"):
        destination.write(text)
        return
    with open(destination, "w", encoding="utf-8") as fh:
        fh.write(text)

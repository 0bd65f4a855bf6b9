"""Canonical codes for connected edge-coloured graphs.

The code is a complete invariant for colour-isomorphism (vertex relabelling
combined with any permutation of the colours).  It is built by a rooted
numbering: for a fixed root r and colour permutation pi, vertices are
numbered in breadth-first discovery order, the neighbours of each dequeued
vertex being visited in the order pi(0), pi(1), ...  The serialization lists,
for each vertex in numbering order, the numbers of its neighbours in pi
colour order, and the code is the lexicographic minimum of the serialization
over every (root, pi) choice.  Decoding the code and re-encoding reproduces
it, which makes the decoded graph a canonical representative with a
well-defined vertex ordering.
"""

from __future__ import annotations

from itertools import permutations

from .graphs import ColouredGraph, Disconnected, GraphError, is_connected

_PERMS = {k: tuple(permutations(range(k))) for k in (3, 4)}


def _bfs_serial(adj, order, root, perm, best):
    """Serialized rooted numbering, or None once it exceeds ``best``.

    Returns the flat tuple of neighbour numbers (length order * k).  The row
    of a vertex is complete the moment it is dequeued, so the comparison with
    the incumbent best serialization can run incrementally and abandon the
    run at the first position that is strictly worse.
    """
    numbering = [-1] * order
    numbering[root] = 0
    queue = [root]
    next_label = 1
    out = []
    undecided = best is not None
    pos = 0
    for t in range(order):
        v = queue[t]
        for c in perm:
            u = adj[c][v]
            lab = numbering[u]
            if lab < 0:
                lab = next_label
                numbering[u] = lab
                queue.append(u)
                next_label += 1
            out.append(lab)
            if undecided:
                b = best[pos]
                if lab > b:
                    return None
                if lab < b:
                    undecided = False
            pos += 1
    return out


def canonical_serial(g: ColouredGraph) -> tuple[int, ...]:
    """Minimum serialization over all roots and colour permutations."""
    if not is_connected(g):
        raise Disconnected("canonical code requires a connected graph")
    adj = g.adj
    order = g.order
    best = None
    for root in range(order):
        for perm in _PERMS[g.n_colours]:
            out = _bfs_serial(adj, order, root, perm, best)
            if out is not None and (best is None or out < best):
                best = out
    return tuple(best)


def serial_to_code(order: int, serial: tuple[int, ...], n_colours: int) -> str:
    """Fixed-width text form: order header, one row of labels per vertex."""
    width = len(str(order - 1))
    rows = []
    for v in range(order):
        chunk = serial[v * n_colours:(v + 1) * n_colours]
        rows.append(" ".join(f"{x:0{width}d}" for x in chunk))
    return f"{order}:" + "|".join(rows)


def code_to_graph(code: str) -> ColouredGraph:
    """Rebuild the canonically labelled graph from its code string."""
    try:
        head, body = code.split(":", 1)
        order = int(head)
        rows = [[int(x) for x in row.split()] for row in body.split("|")]
    except ValueError as exc:
        raise GraphError(f"malformed code: {code!r}") from exc
    if len(rows) != order or any(len(r) != len(rows[0]) for r in rows):
        raise GraphError(f"malformed code: {code!r}")
    n_colours = len(rows[0])
    adj = [[rows[v][c] for v in range(order)] for c in range(n_colours)]
    g = ColouredGraph(adj)
    g.validate()
    return g


def canonical_code(g: ColouredGraph) -> tuple[str, ColouredGraph]:
    """Canonical code and the canonically relabelled graph.

    The relabelled graph is reconstructed from the code itself, so its vertex
    ordering does not depend on which (root, permutation) attained the
    minimum.
    """
    serial = canonical_serial(g)
    code = serial_to_code(g.order, serial, g.n_colours)
    return code, code_to_graph(code)


def code_of(g: ColouredGraph) -> str:
    return serial_to_code(g.order, canonical_serial(g), g.n_colours)


def canonical_graph(g: ColouredGraph) -> ColouredGraph:
    return code_to_graph(code_of(g))


def colour_automorphisms(g: ColouredGraph) -> list[list[int]]:
    """Vertex maps of all automorphisms up to colour permutation.

    Every (root, pi) whose serialization attains the canonical minimum yields
    a numbering of the graph; composing one numbering with the inverse of
    another is an isomorphism of the graph with itself (possibly permuting
    colours).  The returned list contains each such vertex permutation once,
    identity included.
    """
    serial = canonical_serial(g)
    adj = g.adj
    order = g.order
    numberings = []
    for root in range(order):
        for perm in _PERMS[g.n_colours]:
            out = _bfs_serial(adj, order, root, perm, list(serial))
            if out is not None and tuple(out) == serial:
                numbering = [-1] * order
                numbering[root] = 0
                queue = [root]
                nxt = 1
                for t in range(order):
                    v = queue[t]
                    for c in perm:
                        u = adj[c][v]
                        if numbering[u] < 0:
                            numbering[u] = nxt
                            queue.append(u)
                            nxt += 1
                numberings.append(numbering)
    base = numberings[0]
    inv_base = [0] * order
    for v, lab in enumerate(base):
        inv_base[lab] = v
    autos = []
    seen = set()
    for num in numberings:
        # v -> inv_base[num[v]] maps the graph onto itself.
        sigma = tuple(inv_base[num[v]] for v in range(order))
        if sigma not in seen:
            seen.add(sigma)
            autos.append(list(sigma))
    return autos

"""Regular edge-coloured multigraphs and their structural queries.

A closed 3-manifold can be encoded by a regular 4-edge-coloured multigraph
whose dual pseudocomplex triangulates the manifold.  This module holds the
graph data model itself together with the purely structural operations:
bicoloured cycle and residue censuses, the Euler characteristic of the dual
pseudocomplex, the sphere criterion for 3-coloured graphs, and the combined
manifold test.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

COLOURS = (0, 1, 2, 3)
COLOUR_PAIRS = tuple(combinations(COLOURS, 2))


class GraphError(ValueError):
    """Base class for structural errors on coloured graphs."""


class IncompleteColouring(GraphError):
    """Some (vertex, colour) slot has no incident edge."""


class Loop(GraphError):
    """An edge joins a vertex to itself."""


class SlotClash(GraphError):
    """Two edges of the same colour meet at one vertex."""


class NotRegular(GraphError):
    """Graph is not regular of the expected degree."""


class NotConnected(GraphError):
    """Graph is not connected."""


class Disconnected(GraphError):
    """Operation requires a connected graph."""


class ColouredGraph:
    """An immutable regular multigraph whose edges carry colours 0..k-1.

    The graph is stored colour-major: ``adj[c][v]`` is the vertex joined to
    ``v`` by the (unique) colour-``c`` edge.  Each colour class is therefore a
    fixed-point-free involution on the vertex set.  Two vertices may be joined
    by edges of several colours.  Most of the package works with four colours;
    three-coloured graphs appear as surface residues.
    """

    __slots__ = ("order", "adj")

    def __init__(self, adj: Sequence[Sequence[int]]):
        self.adj = tuple(tuple(row) for row in adj)
        self.order = len(self.adj[0]) if self.adj else 0

    @property
    def n_colours(self) -> int:
        return len(self.adj)

    def __eq__(self, other) -> bool:
        return isinstance(other, ColouredGraph) and self.adj == other.adj

    def __hash__(self) -> int:
        return hash(self.adj)

    def __repr__(self) -> str:
        return f"ColouredGraph(order={self.order}, colours={self.n_colours})"

    def edges(self, colour: int | None = None):
        """Yield edges as (v, w, c) with v < w."""
        cols = COLOURS[: self.n_colours] if colour is None else (colour,)
        for c in cols:
            row = self.adj[c]
            for v, w in enumerate(row):
                if v < w:
                    yield (v, w, c)

    def validate(self) -> "ColouredGraph":
        n = self.order
        if n % 2 != 0:
            raise GraphError(f"order {n} is odd")
        for c, row in enumerate(self.adj):
            if len(row) != n:
                raise GraphError(f"colour {c} involution has wrong length")
            for v, w in enumerate(row):
                if w == v:
                    raise Loop(f"loop at vertex {v}, colour {c}")
                if not 0 <= w < n:
                    raise GraphError(f"vertex {w} out of range")
                if row[w] != v:
                    raise SlotClash(
                        f"colour {c} is not an involution at vertices {v},{w}"
                    )
        return self


def build_graph(order: int, edges: Iterable[tuple[int, int, int]],
                n_colours: int = 4) -> ColouredGraph:
    """Build and validate a coloured graph from an explicit edge list.

    Each entry ``(v, w, c)`` adds the colour-``c`` edge joining ``v`` and
    ``w``.  Every (vertex, colour) slot must be filled exactly once; loops
    and clashes raise the corresponding error.
    """
    if order % 2 != 0 or order <= 0:
        raise GraphError(f"order must be a positive even integer, got {order}")
    adj = [[-1] * order for _ in range(n_colours)]
    for v, w, c in edges:
        if not (0 <= c < n_colours):
            raise GraphError(f"colour {c} out of range")
        if v == w:
            raise Loop(f"loop at vertex {v}, colour {c}")
        if not (0 <= v < order and 0 <= w < order):
            raise GraphError(f"edge ({v},{w}) out of vertex range")
        if adj[c][v] != -1 or adj[c][w] != -1:
            raise SlotClash(f"colour {c} used twice at vertex {v} or {w}")
        adj[c][v] = w
        adj[c][w] = v
    for c in range(n_colours):
        for v in range(order):
            if adj[c][v] == -1:
                raise IncompleteColouring(f"vertex {v} has no colour-{c} edge")
    return ColouredGraph(adj)


class PartialGraph:
    """A 4-coloured graph whose colour-3 involution may be partial.

    Colours 0, 1, 2 form a complete regular 3-coloured graph; the colour-3
    slot of a vertex is either a neighbour index or -1.  Used to describe
    intermediate states while a fourth colour class is being attached to a
    surface graph.
    """

    __slots__ = ("order", "adj")

    def __init__(self, adj: Sequence[Sequence[int]]):
        self.adj = tuple(tuple(row) for row in adj)
        self.order = len(self.adj[0])

    @property
    def filled_count(self) -> int:
        """Number of colour-3 edges present (the m of the partial state)."""
        return sum(1 for w in self.adj[3] if w >= 0) // 2

    def is_complete(self) -> bool:
        return all(w >= 0 for w in self.adj[3])


@dataclass(frozen=True)
class CycleCensus:
    """Bicoloured cycles per colour pair.

    ``cycles[(i, j)]`` lists every closed {i,j}-coloured cycle as a tuple of
    vertices in traversal order; ``counts[(i, j)]`` is its length.  For a
    partial graph only cycles closed under the partial colour-3 map count.
    """

    counts: dict
    cycles: dict

    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class ResidueCensus:
    """Connected components of each graph-minus-one-colour residue.

    ``counts[i]`` is the number of components of the graph with colour-i
    edges deleted; ``boundary_counts[i]`` (partial graphs only) counts the
    components that are not regular of degree 3, i.e. contain a vertex with
    an unfilled colour-3 slot.
    """

    counts: dict
    components: dict
    boundary_counts: dict | None = None


def _pair_cycles(adj_i, adj_j, order):
    """All closed {i,j}-cycles; vertices on open {i,j}-paths are skipped.

    The walk from (v, use colour i next) alternates the two involutions; a
    bicoloured cycle visits each of its vertices exactly once, so returning
    to the start with an even number of steps closes the cycle.
    """
    out = []
    seen = [False] * order
    for v in range(order):
        if seen[v]:
            continue
        cycle = []
        w = v
        use_i = True
        closed = False
        while True:
            cycle.append(w)
            seen[w] = True
            nxt = (adj_i if use_i else adj_j)[w]
            if nxt < 0:
                break
            use_i = not use_i
            w = nxt
            if w == v:
                closed = use_i
                break
        if closed:
            out.append(tuple(cycle))
        else:
            # Open path: walk the other direction from v to mark the rest.
            w = v
            use_i = False
            while True:
                nxt = (adj_i if use_i else adj_j)[w]
                if nxt < 0 or nxt == v:
                    break
                w = nxt
                seen[w] = True
                use_i = not use_i
    return out


def cycle_census(g: ColouredGraph | PartialGraph) -> CycleCensus:
    """Census of bicoloured cycles, one entry per unordered colour pair."""
    n_colours = len(g.adj)
    counts = {}
    cycles = {}
    for i, j in combinations(range(n_colours), 2):
        cyc = _pair_cycles(g.adj[i], g.adj[j], g.order)
        cycles[(i, j)] = tuple(sorted(cyc))
        counts[(i, j)] = len(cyc)
    return CycleCensus(counts=counts, cycles=cycles)


def _components(order, rows) -> list[list[int]]:
    """Connected components under the given involution rows (-1 allowed)."""
    seen = [False] * order
    comps = []
    for v in range(order):
        if seen[v]:
            continue
        comp = [v]
        seen[v] = True
        stack = [v]
        while stack:
            u = stack.pop()
            for row in rows:
                w = row[u]
                if w >= 0 and not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def connected_components(g: ColouredGraph | PartialGraph) -> list[list[int]]:
    return _components(g.order, g.adj)


def is_connected(g: ColouredGraph | PartialGraph) -> bool:
    return len(connected_components(g)) == 1


def residue_census(g: ColouredGraph | PartialGraph) -> ResidueCensus:
    """Component census of every residue (graph minus one colour class)."""
    n_colours = len(g.adj)
    counts = {}
    components = {}
    partial = isinstance(g, PartialGraph)
    boundary = {} if partial else None
    for i in range(n_colours):
        rows = [g.adj[c] for c in range(n_colours) if c != i]
        comps = _components(g.order, rows)
        counts[i] = len(comps)
        components[i] = tuple(tuple(c) for c in comps)
        if partial:
            adj3 = g.adj[3]
            boundary[i] = sum(
                1 for comp in comps if any(adj3[v] < 0 for v in comp)
            )
    return ResidueCensus(counts=counts, components=components,
                         boundary_counts=boundary)


def euler_characteristic(g: ColouredGraph) -> int:
    """Euler characteristic of the dual pseudocomplex.

    The dual has one vertex per residue component, one edge per bicoloured
    cycle, two triangles per graph edge and one tetrahedron per graph vertex,
    so chi = sum(residue components) - sum(bicoloured cycles) + N.
    """
    rc = residue_census(g)
    cc = cycle_census(g)
    return sum(rc.counts.values()) - cc.total() + g.order


def is_sphere_gem(involutions: Sequence[Sequence[int]]) -> bool:
    """Sphere test for a connected regular 3-coloured graph.

    With 2q vertices the graph embeds cellularly in the 2-sphere exactly when
    the total number of bicoloured cycles is q + 2 (the Euler count
    2q - 3q + cycles = 2).
    """
    if len(involutions) != 3:
        raise NotRegular("expected exactly three colour involutions")
    order = len(involutions[0])
    for row in involutions:
        if len(row) != order or any(w < 0 for w in row):
            raise NotRegular("graph is not regular of degree 3")
    if len(_components(order, involutions)) != 1:
        raise NotConnected("sphere test requires a connected graph")
    q = order // 2
    total = 0
    for i, j in combinations(range(3), 2):
        total += len(_pair_cycles(involutions[i], involutions[j], order))
    return total == q + 2


def residue_subgraphs(g: ColouredGraph, colour: int):
    """Connected components of the residue missing ``colour``.

    Yields (vertices, involutions) pairs where vertices are the component's
    original labels and involutions are the three remaining colour classes
    relabelled to 0..len-1, in increasing original colour order.
    """
    other = [c for c in range(g.n_colours) if c != colour]
    rows = [g.adj[c] for c in other]
    for comp in _components(g.order, rows):
        index = {v: k for k, v in enumerate(comp)}
        invs = [[index[row[v]] for v in comp] for row in rows]
        yield comp, invs


@dataclass(frozen=True)
class ManifoldCheck:
    is_gem: bool
    is_crystallization: bool
    bipartite: bool


def bipartition(g: ColouredGraph | PartialGraph) -> list[int] | None:
    """Two-colouring of the vertices, or None if an odd cycle exists."""
    side = [-1] * g.order
    for s in range(g.order):
        if side[s] != -1:
            continue
        side[s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for row in g.adj:
                w = row[u]
                if w < 0:
                    continue
                if side[w] == -1:
                    side[w] = 1 - side[u]
                    stack.append(w)
                elif side[w] == side[u]:
                    return None
    return side


def manifold_check(g: ColouredGraph) -> ManifoldCheck:
    """Combined test: does the graph encode a closed 3-manifold?

    The graph is a gem iff every connected component of every residue passes
    the sphere test; it is a crystallization iff moreover the graph is
    connected and every residue is connected.  Orientability of the encoded
    manifold corresponds to the graph being bipartite.
    """
    is_gem = True
    residue_counts = []
    for colour in range(4):
        n_comp = 0
        for comp, invs in residue_subgraphs(g, colour):
            n_comp += 1
            if is_gem and not is_sphere_gem(invs):
                is_gem = False
        residue_counts.append(n_comp)
    contracted = all(n == 1 for n in residue_counts) and is_connected(g)
    return ManifoldCheck(
        is_gem=is_gem,
        is_crystallization=is_gem and contracted,
        bipartite=bipartition(g) is not None,
    )


def order_two_gem() -> ColouredGraph:
    """The unique 2-vertex graph: four parallel edges, encoding the 3-sphere."""
    return ColouredGraph([[1, 0]] * 4)


def disjoint_union(g1: ColouredGraph, g2: ColouredGraph) -> ColouredGraph:
    n1 = g1.order
    adj = [list(r1) + [w + n1 for w in r2] for r1, r2 in zip(g1.adj, g2.adj)]
    return ColouredGraph(adj)

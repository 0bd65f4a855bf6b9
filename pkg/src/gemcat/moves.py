"""Combinatorial rewritings on gems.

Dipole cancellation and insertion, switching of same-coloured edge pairs
that share bicoloured cycles, cancellation of generalized dipoles (two
bicoloured cycles of complementary colour pairs meeting in one vertex),
graph connected sums and their inverse splitting, detection and elimination
of cluster vertices, and the cleanup loop that drives any gem down to a
rigid contracted form while counting the handles split off along the way.

Every operation is a pure function returning a fresh graph; vertex labels of
survivors are compacted in increasing order, new vertices are appended.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .graphs import (
    ColouredGraph,
    GraphError,
    bipartition,
    connected_components,
    cycle_census,
    is_connected,
    manifold_check,
    order_two_gem,
)


class NonProperDipole(GraphError):
    """Cancelling this dipole would change the encoded manifold."""


class InvalidPair(GraphError):
    """The requested pair is not switchable in this graph."""


class InvalidConfiguration(GraphError):
    """The requested generalized dipole does not exist in this graph."""


class NoCluster(GraphError):
    """The graph has no cluster vertex."""


class SimplificationError(GraphError):
    """The cleanup loop failed to make progress."""


# ---------------------------------------------------------------------------
# basic traversals


def cycle_through(g: ColouredGraph, i: int, j: int, v: int) -> tuple[int, ...]:
    """The {i,j}-coloured cycle through v, starting with v's colour-i edge."""
    out = [v]
    w = g.adj[i][v]
    use_i = False
    while w != v:
        out.append(w)
        w = (g.adj[i] if use_i else g.adj[j])[w]
        use_i = not use_i
    return tuple(out)


def _relabel_drop(g: ColouredGraph, dropped: set[int]):
    """Old-to-new label map after removing ``dropped`` vertices."""
    new_label = {}
    k = 0
    for v in range(g.order):
        if v not in dropped:
            new_label[v] = k
            k += 1
    return new_label, k


# ---------------------------------------------------------------------------
# dipoles


@dataclass(frozen=True)
class Dipole:
    """Vertices v < w joined by exactly the edges coloured ``colours``.

    Proper means v and w lie in distinct connected components of the graph
    restricted to the complementary colours; only proper dipoles may be
    cancelled without changing the manifold.
    """

    v: int
    w: int
    colours: frozenset

    @property
    def degree(self) -> int:
        return len(self.colours)


def _joined_colours(g: ColouredGraph, v: int, w: int) -> frozenset:
    return frozenset(c for c in range(4) if g.adj[c][v] == w)


def _same_component(g: ColouredGraph, colours, v: int, w: int) -> bool:
    """Are v, w connected using only the given edge colours?"""
    if v == w:
        return True
    seen = {v}
    stack = [v]
    rows = [g.adj[c] for c in colours]
    while stack:
        u = stack.pop()
        for row in rows:
            x = row[u]
            if x == w:
                return True
            if x not in seen:
                seen.add(x)
                stack.append(x)
    return False


def is_proper_dipole(g: ColouredGraph, v: int, w: int, colours) -> bool:
    rest = [c for c in range(4) if c not in colours]
    return not _same_component(g, rest, v, w)


def find_dipoles(g: ColouredGraph) -> list[Dipole]:
    """All proper dipoles, sorted by decreasing degree then vertex pair."""
    out = []
    seen_pairs = set()
    for v in range(g.order):
        for c in range(4):
            w = g.adj[c][v]
            if w < v or (v, w) in seen_pairs:
                continue
            seen_pairs.add((v, w))
            colours = _joined_colours(g, v, w)
            if 1 <= len(colours) <= 3 and is_proper_dipole(g, v, w, colours):
                out.append(Dipole(v, w, colours))
    out.sort(key=lambda d: (-d.degree, d.v, d.w))
    return out


def first_proper_dipole(g: ColouredGraph) -> Dipole | None:
    best = None
    seen_pairs = set()
    for v in range(g.order):
        for c in range(4):
            w = g.adj[c][v]
            if w < v or (v, w) in seen_pairs:
                continue
            seen_pairs.add((v, w))
            colours = _joined_colours(g, v, w)
            if not 1 <= len(colours) <= 3:
                continue
            key = (-len(colours), v, w)
            if best is not None and best[0] <= key:
                continue
            if is_proper_dipole(g, v, w, colours):
                best = (key, Dipole(v, w, colours))
    return best[1] if best else None


def cancel_dipole(g: ColouredGraph, d: Dipole) -> ColouredGraph:
    """Remove the dipole pair and weld the dangling edges colourwise."""
    if _joined_colours(g, d.v, d.w) != d.colours:
        raise InvalidConfiguration("dipole does not match the graph")
    if not is_proper_dipole(g, d.v, d.w, d.colours):
        raise NonProperDipole(f"dipole {d} is not proper")
    new_label, n = _relabel_drop(g, {d.v, d.w})
    adj = [[-1] * n for _ in range(4)]
    for c in range(4):
        row = g.adj[c]
        for v in range(g.order):
            if v in (d.v, d.w) or row[v] in (d.v, d.w):
                continue
            adj[c][new_label[v]] = new_label[row[v]]
        if c not in d.colours:
            x, y = new_label[row[d.v]], new_label[row[d.w]]
            adj[c][x] = y
            adj[c][y] = x
    return ColouredGraph(adj)


@dataclass(frozen=True)
class DipoleSite:
    """Insertion site: the colours of the new pair plus one existing edge to
    subdivide for every complementary colour.

    ``cuts`` maps colour c (not in ``colours``) to ``(a, b)``: the colour-c
    edge from a to b is replaced by a to the new vertex v and b to the new
    vertex w.  Swapping a and b selects the other orientation.
    """

    colours: frozenset
    cuts: tuple  # ((c, a, b), ...) sorted by colour


def insert_dipole(g: ColouredGraph, site: DipoleSite) -> ColouredGraph:
    """Inverse of cancel_dipole; new vertices get labels N and N+1."""
    rest = sorted(c for c in range(4) if c not in site.colours)
    cut_map = {c: (a, b) for c, a, b in site.cuts}
    if sorted(cut_map) != rest:
        raise InvalidConfiguration("cuts must cover the complementary colours")
    n = g.order
    v, w = n, n + 1
    adj = [list(row) + [-1, -1] for row in g.adj]
    for c in site.colours:
        adj[c][v] = w
        adj[c][w] = v
    for c in rest:
        a, b = cut_map[c]
        if g.adj[c][a] != b:
            raise InvalidConfiguration(f"({a},{b}) is not a colour-{c} edge")
        adj[c][a] = v
        adj[c][v] = a
        adj[c][b] = w
        adj[c][w] = b
    return ColouredGraph(adj)


def cancel_proper_dipoles(g: ColouredGraph) -> ColouredGraph:
    """Cancel proper dipoles greedily until none remains."""
    while g.order > 2:
        d = first_proper_dipole(g)
        if d is None:
            break
        g = cancel_dipole(g, d)
    return g


# ---------------------------------------------------------------------------
# rho-pairs


@dataclass(frozen=True)
class RhoPair:
    """Two distinct i-coloured edges sharing exactly m bicoloured cycles."""

    colour: int
    e: tuple  # (a, b) with a < b
    f: tuple  # (c, d) with c < d
    m: int
    shared: tuple  # colour pairs of the shared cycles


def _cycle_ids(g: ColouredGraph):
    """Map (i, j, vertex) -> id of the {i,j}-cycle containing the vertex."""
    ids = {}
    lengths = {}
    for i, j in combinations(range(4), 2):
        seen = [False] * g.order
        for v in range(g.order):
            if seen[v]:
                continue
            cyc = cycle_through(g, i, j, v)
            key = (i, j, min(cyc))
            for u in cyc:
                seen[u] = True
                ids[(i, j, u)] = key
            lengths[key] = len(cyc)
    return ids, lengths


def find_rho_pairs(g: ColouredGraph) -> list[RhoPair]:
    """All pairs of same-coloured edges sharing two or three cycles."""
    ids, _ = _cycle_ids(g)
    out = []
    for i in range(4):
        edges = sorted((v, w) for v, w in enumerate(g.adj[i]) if v < w)
        others = [j for j in range(4) if j != i]
        for (a, b), (c, d) in combinations(edges, 2):
            shared = []
            for j in others:
                lo, hi = min(i, j), max(i, j)
                if ids[(lo, hi, a)] == ids[(lo, hi, c)]:
                    shared.append((lo, hi))
            if len(shared) >= 2:
                out.append(RhoPair(i, (a, b), (c, d), len(shared),
                                   tuple(shared)))
    out.sort(key=lambda p: (p.colour, p.e, p.f))
    return out


def is_rigid(g: ColouredGraph) -> bool:
    return not find_rho_pairs(g)


def _reconnect(g: ColouredGraph, i: int, e, f, pairing) -> ColouredGraph:
    """Replace i-edges e, f by the two edges in ``pairing``."""
    adj = [list(row) for row in g.adj]
    for x, y in pairing:
        adj[i][x] = y
        adj[i][y] = x
    return ColouredGraph(adj)


def _orientation(g: ColouredGraph, pair: RhoPair, shared_pair):
    """First endpoint of f met when walking the shared cycle from a via e.

    Walking starts at a, crosses e to b, and continues around the cycle; the
    return value is the endpoint of f reached first (the near end).
    """
    x, y = shared_pair
    other = x if y == pair.colour else y
    a, b = pair.e
    c, d = pair.f
    # Walk from b away from e, alternating other/colour edges.
    v = b
    use_other = True
    while True:
        v = (g.adj[other] if use_other else g.adj[pair.colour])[v]
        use_other = not use_other
        if v == c:
            return c
        if v == d:
            return d
        if v == a:
            raise InvalidPair("pair edges do not share the claimed cycle")


def switch_rho_pair(g: ColouredGraph, pair: RhoPair) -> ColouredGraph:
    """Exchange the endpoints of the pair, cutting every shared cycle.

    For each shared cycle, one of the two reconnections splits it in two
    while the other keeps it whole; the switch uses the reconnection that
    splits them all, which on bipartite graphs is exactly the one joining
    opposite bipartition classes.  Shared cycles of a pair inside a gem
    always agree on which reconnection that is; disagreement or a non-gem
    result raises InvalidPair.
    """
    a, b = pair.e
    c, d = pair.f
    if g.adj[pair.colour][a] != b or g.adj[pair.colour][c] != d:
        raise InvalidPair("pair edges are not in the graph")
    wanted = None
    for sp in pair.shared:
        near = _orientation(g, pair, sp)
        far = d if near == c else c
        pairing = ((a, far), (b, near))
        if wanted is None:
            wanted = pairing
        elif wanted != pairing:
            raise InvalidPair(
                "shared cycles disagree on the splitting reconnection")
    out = _reconnect(g, pair.colour, pair.e, pair.f, wanted)
    if not manifold_check(out).is_gem:
        raise InvalidPair("switch result fails the gem test")
    return out


def attach_handle(g: ColouredGraph, e, f, colour: int,
                  twisted: bool = False) -> ColouredGraph:
    """Inverse switch: merge two i-edges that share no bicoloured cycle.

    The result encodes the original manifold summed with an S2-bundle over
    S1, and the reconnected edges form a pair sharing all three cycles.  On
    a bipartite graph the default pairing keeps the graph bipartite
    (orientable bundle); ``twisted`` selects the other pairing.
    """
    ids, _ = _cycle_ids(g)
    a, b = e
    c, d = f
    if g.adj[colour][a] != b or g.adj[colour][c] != d:
        raise InvalidConfiguration("edges are not both of the given colour")
    for j in range(4):
        if j == colour:
            continue
        lo, hi = min(colour, j), max(colour, j)
        if ids[(lo, hi, a)] == ids[(lo, hi, c)]:
            raise InvalidConfiguration("edges share a bicoloured cycle")
    side = bipartition(g)
    if side is not None:
        # Pair endpoints across the bipartition unless a twist is requested.
        c1, d1 = (c, d) if side[c] != side[a] else (d, c)
    else:
        c1, d1 = c, d
    if twisted:
        c1, d1 = d1, c1
    return _reconnect(g, colour, e, f, ((a, c1), (b, d1)))


# ---------------------------------------------------------------------------
# generalized dipoles


@dataclass(frozen=True)
class GeneralizedDipole:
    """Cycles of complementary colour pairs meeting exactly at the apex.

    ``cycle_c`` is the {i,j}-cycle (the type pair), listed from the apex
    along its colour-i edge; ``cycle_d`` the {k,l}-cycle from the apex along
    colour k.  Lengths are m+1 and n+1.
    """

    type_pair: tuple
    apex: int
    cycle_c: tuple
    cycle_d: tuple

    @property
    def m(self) -> int:
        return len(self.cycle_c) - 1

    @property
    def n(self) -> int:
        return len(self.cycle_d) - 1


def find_generalized_dipoles(g: ColouredGraph, type_pair,
                             max_m: int = 8, max_n: int = 8
                             ) -> list[GeneralizedDipole]:
    """All generalized dipoles of the given type within the size bounds."""
    i, j = sorted(type_pair)
    k, l = (c for c in range(4) if c not in (i, j))
    out = []
    for v in range(g.order):
        cyc_c = cycle_through(g, i, j, v)
        if len(cyc_c) - 1 > max_m:
            continue
        cyc_d = cycle_through(g, k, l, v)
        if len(cyc_d) - 1 > max_n:
            continue
        if len(set(cyc_c) & set(cyc_d)) == 1:
            out.append(GeneralizedDipole((i, j), v, cyc_c, cyc_d))
    return out


def cancel_generalized_dipole(g: ColouredGraph,
                              gd: GeneralizedDipole) -> ColouredGraph:
    """Replace the two cycles through the apex by an m-by-n grid.

    The apex and both cycles disappear; a grid of m*n new vertices takes
    their place, rows forming {i,j}-paths that inherit the side attachments
    of the {k,l}-cycle and columns forming {k,l}-paths that inherit those of
    the {i,j}-cycle.  For m = 1 or n = 1 this is precisely the cancellation
    of a proper dipole of two colours, and in general it exchanges the
    bicoloured cycle configuration without touching the encoded manifold.
    Vertex count changes by m*n - m - n - 1.
    """
    i, j = gd.type_pair
    k, l = (c for c in range(4) if c not in (i, j))
    v0 = gd.apex
    cyc_c = cycle_through(g, i, j, v0)
    cyc_d = cycle_through(g, k, l, v0)
    if cyc_c != gd.cycle_c or cyc_d != gd.cycle_d:
        raise InvalidConfiguration("generalized dipole does not match graph")
    if len(set(cyc_c) & set(cyc_d)) != 1:
        raise InvalidConfiguration("cycles meet in more than the apex")
    a = cyc_c[1:]  # a_1 .. a_m, C-edge colours from apex: i, j, i, ..., j
    b = cyc_d[1:]  # b_1 .. b_n, D-edge colours from apex: k, l, k, ..., l
    m, n = len(a), len(b)
    a_pos = {u: s for s, u in enumerate(a, start=1)}
    b_pos = {u: t for t, u in enumerate(b, start=1)}

    ka = [g.adj[k][u] for u in a]
    la = [g.adj[l][u] for u in a]
    ib = [g.adj[i][u] for u in b]
    jb = [g.adj[j][u] for u in b]

    dropped = set(cyc_c) | set(cyc_d)
    new_label, base = _relabel_drop(g, dropped)
    total = base + m * n
    adj = [[-1] * total for _ in range(4)]
    for c in range(4):
        row = g.adj[c]
        for v in range(g.order):
            if v in dropped or row[v] in dropped:
                continue
            adj[c][new_label[v]] = new_label[row[v]]

    def grid(s, t):  # 1-based grid coordinates
        return base + (s - 1) * n + (t - 1)

    def addedge(c, x, y):
        adj[c][x] = y
        adj[c][y] = x

    for s in range(1, m + 1):
        for t in range(1, n):
            addedge(l if t % 2 == 1 else k, grid(s, t), grid(s, t + 1))
    for t in range(1, n + 1):
        for s in range(1, m):
            addedge(j if s % 2 == 1 else i, grid(s, t), grid(s + 1, t))

    def boundary(colour, x, partner, side_map):
        if partner in side_map:
            y = side_map[partner]
        else:
            y = new_label[partner]
        if adj[colour][x] == -1:
            addedge(colour, x, y)

    # Row ends take over the i and j attachments of the {k,l}-cycle, column
    # ends take over the k and l attachments of the {i,j}-cycle.
    b_to_left = {u: grid(1, t) for t, u in enumerate(b, start=1)}
    b_to_right = {u: grid(m, t) for t, u in enumerate(b, start=1)}
    a_to_top = {u: grid(s, 1) for s, u in enumerate(a, start=1)}
    a_to_bottom = {u: grid(s, n) for s, u in enumerate(a, start=1)}
    for t in range(1, n + 1):
        boundary(i, grid(1, t), ib[t - 1], b_to_left)
        boundary(j, grid(m, t), jb[t - 1], b_to_right)
    for s in range(1, m + 1):
        boundary(k, grid(s, 1), ka[s - 1], a_to_top)
        boundary(l, grid(s, n), la[s - 1], a_to_bottom)

    out = ColouredGraph(adj)
    out.validate()
    return out


# ---------------------------------------------------------------------------
# connected sums


def graph_connected_sum(g1: ColouredGraph, v1: int,
                        g2: ColouredGraph, v2: int) -> ColouredGraph:
    """Delete one vertex from each graph and weld the dangling edges."""
    n1 = g1.order
    map2 = {}
    k = n1 - 1
    new1, _ = _relabel_drop(g1, {v1})
    for v in range(g2.order):
        if v != v2:
            map2[v] = k
            k += 1
    total = g1.order + g2.order - 2
    adj = [[-1] * total for _ in range(4)]
    for c in range(4):
        for v in range(g1.order):
            w = g1.adj[c][v]
            if v != v1 and w != v1:
                adj[c][new1[v]] = new1[w]
        for v in range(g2.order):
            w = g2.adj[c][v]
            if v != v2 and w != v2:
                adj[c][map2[v]] = map2[w]
        x = new1[g1.adj[c][v1]]
        y = map2[g2.adj[c][v2]]
        adj[c][x] = y
        adj[c][y] = x
    return ColouredGraph(adj)


def _components_as_graphs(g: ColouredGraph):
    comps = connected_components(g)
    out = []
    for comp in comps:
        index = {v: k for k, v in enumerate(comp)}
        adj = [[index[g.adj[c][v]] for v in comp] for c in range(4)]
        out.append(ColouredGraph(adj))
    return out


def split_connected_sum(g: ColouredGraph):
    """Split along a colour-transversal quadruple of edges, if any.

    Searches all choices of one edge per colour whose removal leaves two
    components, each with more than one vertex, and caps each component with
    a new vertex joined to the four dangling ends.  Returns the two summand
    graphs, or None when no such quadruple exists.
    """
    if g.order <= 2:
        return None
    edges = {c: sorted((v, w) for v, w in enumerate(g.adj[c]) if v < w)
             for c in range(4)}
    n = g.order

    for e0 in edges[0]:
        for e1 in edges[1]:
            parent = list(range(n))

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            def union(x, y):
                rx, ry = find(x), find(y)
                if rx != ry:
                    parent[rx] = ry

            for c, banned in ((0, e0), (1, e1)):
                for v, w in edges[c]:
                    if (v, w) != banned:
                        union(v, w)
            # Quotient multigraph over colours 2 and 3.
            for e2 in edges[2]:
                q_parent = {}

                def qfind(x):
                    while q_parent[x] != x:
                        q_parent[x] = q_parent[q_parent[x]]
                        x = q_parent[x]
                    return x

                roots = {find(v) for v in range(n)}
                for r in roots:
                    q_parent[r] = r
                for v, w in edges[2]:
                    if (v, w) != e2:
                        a, b = qfind(find(v)), qfind(find(w))
                        if a != b:
                            q_parent[a] = b
                for e3 in edges[3]:
                    pr = dict(q_parent)

                    def pfind(x):
                        while pr[x] != x:
                            x = pr[x]
                        return x

                    comp_roots = set()
                    ok = True
                    for v, w in edges[3]:
                        if (v, w) != e3:
                            a, b = pfind(qfind(find(v))), pfind(qfind(find(w)))
                            if a != b:
                                pr[a] = b
                    for v in range(n):
                        comp_roots.add(pfind(qfind(find(v))))
                    if len(comp_roots) != 2:
                        continue
                    quad = (e0, e1, e2, e3)
                    result = _cap_split(g, quad)
                    if result is not None:
                        return result
    return None


def _cap_split(g: ColouredGraph, quad):
    """Cap the two components of g minus the quadruple, or None if degenerate."""
    n = g.order
    banned = {(c, e) for c, e in enumerate(quad)}
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in range(4):
        for v, w in ((v, w) for v, w in enumerate(g.adj[c]) if v < w):
            if (c, (v, w)) not in banned:
                rv, rw = find(v), find(w)
                if rv != rw:
                    parent[rv] = rw
    comps = {}
    for v in range(n):
        comps.setdefault(find(v), []).append(v)
    if len(comps) != 2:
        return None
    sides = sorted(comps.values(), key=lambda vs: (len(vs), vs))
    if len(sides[0]) < 2:
        return None
    out = []
    for side in sides:
        index = {v: k for k, v in enumerate(side)}
        cap = len(side)
        adj = [[-1] * (cap + 1) for _ in range(4)]
        for c in range(4):
            for v in side:
                w = g.adj[c][v]
                if (c, (min(v, w), max(v, w))) in banned:
                    adj[c][index[v]] = cap
                    adj[c][cap] = index[v]
                else:
                    adj[c][index[v]] = index[w]
        gg = ColouredGraph(adj)
        gg.validate()
        out.append(gg)
    return out[0], out[1]


# ---------------------------------------------------------------------------
# cluster vertices


@dataclass(frozen=True)
class ClusterVertex:
    """A vertex on four length-4 bicoloured cycles spanning nine vertices."""

    vertex: int
    cycles: tuple  # ((colour pair, cycle vertices), ...) the four short ones
    involved: frozenset


def find_cluster_vertices(g: ColouredGraph) -> list[ClusterVertex]:
    out = []
    for v in range(g.order):
        short = []
        for i, j in combinations(range(4), 2):
            cyc = cycle_through(g, i, j, v)
            if len(cyc) == 4:
                short.append(((i, j), cyc))
        if len(short) < 4:
            continue
        found = None
        for subset in combinations(short, 4):
            involved = set()
            for _, cyc in subset:
                involved.update(cyc)
            if len(involved) == 9:
                found = ClusterVertex(v, tuple(subset), frozenset(involved))
                break
        if found:
            out.append(found)
    return out


def _cluster_long_pairs(cl: ClusterVertex):
    used = {pair for pair, _ in cl.cycles}
    return [pq for pq in combinations(range(4), 2) if pq not in used]


def eliminate_clusters(g: ColouredGraph) -> ColouredGraph:
    """Remove all cluster vertices, strictly shrinking the graph.

    When the two non-short cycles at the cluster vertex use disjoint colour
    pairs, the nine involved vertices form exactly the grid configuration
    produced by a (3,3)-generalized-dipole cancellation, and the move is
    undone directly, giving back the two-vertex-smaller graph.  When they
    share a colour, cancelling the generalized dipole carried by the two
    complementary short cycles rewires the cluster so that two 2-dipoles
    appear, whose cancellation drops the count below the starting order.
    """
    clusters = find_cluster_vertices(g)
    if not clusters:
        raise NoCluster("graph has no cluster vertex")
    guard = 0
    while clusters:
        guard += 1
        if guard > 4 * g.order + 16:
            raise SimplificationError("cluster elimination does not terminate")
        cl = clusters[0]
        longs = _cluster_long_pairs(cl)
        order_before = g.order
        if len(longs) == 2 and not set(longs[0]) & set(longs[1]):
            g = _uncancel_grid(g, cl, longs)
        else:
            g = _reduce_shared_colour_cluster(g, cl)
        if g.order >= order_before:
            raise SimplificationError("cluster elimination failed to shrink")
        clusters = find_cluster_vertices(g)
    return g


def _uncancel_grid(g: ColouredGraph, cl: ClusterVertex, longs):
    """Inverse of the (3,3) grid cancellation around a cluster vertex."""
    (i, j), (k, l) = sorted(longs)
    v = cl.vertex
    ni, nj, nk, nl = (g.adj[c][v] for c in (i, j, k, l))
    z_ik = g.adj[k][ni]
    z_il = g.adj[l][ni]
    z_jk = g.adj[k][nj]
    z_jl = g.adj[l][nj]
    grid_of = {
        (2, 2): v, (3, 2): ni, (1, 2): nj, (2, 3): nk, (2, 1): nl,
        (3, 3): z_ik, (3, 1): z_il, (1, 3): z_jk, (1, 1): z_jl,
    }
    nine = set(grid_of.values())
    if len(nine) != 9 or nine != set(cl.involved):
        raise InvalidConfiguration("cluster does not match the grid pattern")
    # Cross-check the mirrored diagonal incidences.
    if g.adj[i][nk] != z_ik or g.adj[i][nl] != z_il \
            or g.adj[j][nk] != z_jk or g.adj[j][nl] != z_jl:
        raise InvalidConfiguration("cluster does not match the grid pattern")

    # Boundary slots of the grid and their outside partners.
    col_k = {1: z_jl, 2: nl, 3: z_il}   # x_{s,1} has the free k slot
    col_l = {1: z_jk, 2: nk, 3: z_ik}   # x_{s,3} has the free l slot
    row_i = {1: z_jl, 2: nj, 3: z_jk}   # x_{1,t} has the free i slot
    row_j = {1: z_il, 2: ni, 3: z_ik}   # x_{3,t} has the free j slot

    new_label, base = _relabel_drop(g, nine)
    # Replacement vertices: apex, a_1..a_3 ({i,j}-cycle), b_1..b_3.
    apex = base
    a = [base + 1, base + 2, base + 3]
    b = [base + 4, base + 5, base + 6]
    total = base + 7
    adj = [[-1] * total for _ in range(4)]
    for c in range(4):
        row = g.adj[c]
        for u in range(g.order):
            if u in nine or row[u] in nine:
                continue
            adj[c][new_label[u]] = new_label[row[u]]

    def addedge(c, x, y):
        adj[c][x] = y
        adj[c][y] = x

    addedge(i, apex, a[0])
    addedge(j, a[0], a[1])
    addedge(i, a[1], a[2])
    addedge(j, a[2], apex)
    addedge(k, apex, b[0])
    addedge(l, b[0], b[1])
    addedge(k, b[1], b[2])
    addedge(l, b[2], apex)

    remap_k = {col_k[s]: a[s - 1] for s in (1, 2, 3)}
    remap_l = {col_l[s]: a[s - 1] for s in (1, 2, 3)}
    remap_i = {row_i[t]: b[t - 1] for t in (1, 2, 3)}
    remap_j = {row_j[t]: b[t - 1] for t in (1, 2, 3)}

    def reattach(colour, slot_owner_to_new, remap):
        for old_owner, new_owner in slot_owner_to_new.items():
            partner = g.adj[colour][old_owner]
            if adj[colour][new_owner] != -1:
                continue
            if partner in remap:
                addedge(colour, new_owner, remap[partner])
            else:
                addedge(colour, new_owner, new_label[partner])

    reattach(k, remap_k, remap_k)
    reattach(l, remap_l, remap_l)
    reattach(i, remap_i, remap_i)
    reattach(j, remap_j, remap_j)

    out = ColouredGraph(adj)
    out.validate()
    return out


def _reduce_shared_colour_cluster(g: ColouredGraph,
                                  cl: ClusterVertex) -> ColouredGraph:
    """Shared-colour case: rewire through a (3,3) cancellation, then shrink."""
    shorts = {pair for pair, _ in cl.cycles}
    comp_pairs = sorted(
        pq for pq in shorts
        if tuple(sorted(set(range(4)) - set(pq))) in shorts
    )
    if not comp_pairs:
        raise InvalidConfiguration("no complementary short cycles at cluster")
    type_pair = comp_pairs[0]
    gds = [gd for gd in find_generalized_dipoles(g, type_pair, 3, 3)
           if gd.apex == cl.vertex]
    if not gds:
        raise InvalidConfiguration("cluster cycles do not form a dipole")
    g2 = cancel_generalized_dipole(g, gds[0])
    return cancel_proper_dipoles(g2)


# ---------------------------------------------------------------------------
# full simplification


def simplify_to_rigid(g: ColouredGraph, count_handles: bool = True):
    """Drive a gem to a rigid contracted crystallization.

    Proper dipoles are cancelled greedily; remaining pairs of same-coloured
    edges sharing cycles are switched, counting one handle for every
    three-cycle pair whose switch keeps the graph connected.  A switch that
    disconnects the graph exhibits the manifold as a connected sum; the S3
    summands are discarded and the remaining pieces re-summed.
    Returns (graph, handle count).
    """
    h = 0
    guard = 0
    limit = 64 * (g.order + 16)
    while True:
        guard += 1
        if guard > limit:
            raise SimplificationError("simplification loop guard exceeded")
        d = first_proper_dipole(g)
        if d is not None:
            g = cancel_dipole(g, d)
            continue
        pairs = find_rho_pairs(g)
        if not pairs:
            break
        progressed = False
        for pair in pairs:
            try:
                g2 = switch_rho_pair(g, pair)
            except InvalidPair:
                continue
            if is_connected(g2):
                if pair.m == 3:
                    h += 1
                g = g2
                progressed = True
                break
        if progressed:
            continue
        # Every admissible switch disconnects: the graph encodes a connected
        # sum.  Take the first switch, simplify the pieces, drop 3-spheres.
        g2 = None
        for pair in pairs:
            try:
                g2 = switch_rho_pair(g, pair)
                break
            except InvalidPair:
                continue
        if g2 is None:
            raise SimplificationError(
                "rho-pairs remain but none admits a valid switch")
        parts = []
        s3 = order_two_gem()
        for comp in _components_as_graphs(g2):
            comp_simplified, comp_h = simplify_to_rigid(comp)
            h += comp_h
            if comp_simplified != s3:
                parts.append(comp_simplified)
        if not parts:
            g = s3
        else:
            g = parts[0]
            for other in parts[1:]:
                g = graph_connected_sum(g, 0, other, 0)
    return g, h

"""Integral homology of the pseudocomplex dual to a 4-coloured graph.

The dual pseudocomplex has one vertex per residue component, one edge per
bicoloured cycle, two triangles per graph edge and one tetrahedron per graph
vertex.  Simplex orientations come from the colour order of the simplex
vertices, which makes the usual alternating-sign boundary well defined and
gives d o d = 0.  Homology groups are computed over the integers with exact
arithmetic via Smith normal form; a separate routine computes the first
homology from the abelianized edge-path group of the 2-skeleton and serves as
an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .graphs import ColouredGraph, NotConnected, GraphError, is_connected
from .graphs import cycle_census, residue_census


class NotAGem(GraphError):
    """The graph does not encode a closed manifold."""


@dataclass(frozen=True)
class ChainComplex:
    """Boundary matrices d1, d2, d3 stored as dense lists of ints.

    ``cells[k]`` is the number of k-cells.  Cell indexing:
      0-cells: residue components, grouped by missing colour;
      1-cells: bicoloured cycles, grouped by colour pair;
      2-cells: graph edges (v, w, c) with v < w, sorted;
      3-cells: graph vertices.
    """

    cells: tuple[int, int, int, int]
    d1: list
    d2: list
    d3: list


@dataclass(frozen=True)
class HomologyResult:
    """Finitely generated abelian group: free rank and torsion chain."""

    rank: int
    torsion: tuple[int, ...] = ()

    def __str__(self) -> str:
        parts = ["Z"] * self.rank + [f"Z_{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"


def _zeros(rows, cols):
    return [[0] * cols for _ in range(rows)]


def chain_complex(g: ColouredGraph) -> ChainComplex:
    """Boundary matrices of the dual pseudocomplex with colour-order signs.

    A k-cell corresponds to a graph object together with the set S of colours
    of its dual vertices (|S| = k + 1).  Removing the colour at position t of
    S in increasing order contributes the face with sign (-1)^t.
    """
    from .graphs import manifold_check

    if not manifold_check(g).is_gem:
        raise NotAGem("chain complex requires a gem")

    rc = residue_census(g)
    cc = cycle_census(g)
    n = g.order

    # 0-cells: (missing colour i, component index); vertex colour set {i}.
    vert_index = {}
    comp_of_vertex = {}
    for i in range(4):
        for k, comp in enumerate(rc.components[i]):
            vert_index[(i, k)] = len(vert_index)
            for v in comp:
                comp_of_vertex[(i, v)] = (i, k)

    # 1-cells: a {i,j}-cycle is dual to the edge with vertex colours
    # complementary to {i, j}.
    edge_index = {}
    edge_cycles = {}
    for (i, j), cycles in cc.cycles.items():
        for cyc in cycles:
            key = (i, j, cyc[0])
            edge_index[key] = len(edge_index)
            for v in cyc:
                edge_cycles[(i, j, v)] = key

    # 2-cells: graph edges; triangle colour set = all colours but the edge's.
    tri_index = {}
    for v, w, c in sorted(g.edges()):
        tri_index[(v, w, c)] = len(tri_index)

    n0, n1, n2, n3 = len(vert_index), len(edge_index), len(tri_index), n

    d1 = _zeros(n0, n1)
    for (i, j, rep), col in edge_index.items():
        # Edge vertex colours: {k, l} = complement of {i, j}, k < l.
        k, l = (c for c in range(4) if c not in (i, j))
        # d[kl-edge] = (l-end) - (k-end); the x-end is the component of the
        # residue missing x that contains the cycle.
        row_l = vert_index[comp_of_vertex[(l, rep)]]
        row_k = vert_index[comp_of_vertex[(k, rep)]]
        d1[row_l][col] += 1
        d1[row_k][col] -= 1

    d2 = _zeros(n1, n2)
    for (v, w, c), col in tri_index.items():
        tri_colours = [x for x in range(4) if x != c]
        for t, z in enumerate(tri_colours):
            # Removing vertex colour z leaves the edge dual to the
            # {c, z}-cycle through this graph edge.
            i, j = min(c, z), max(c, z)
            row = edge_index[edge_cycles[(i, j, v)]]
            d2[row][col] += (-1) ** t
    d3 = _zeros(n2, n3)
    for v in range(n):
        for c in range(4):
            w = g.adj[c][v]
            key = (min(v, w), max(v, w), c)
            d3[tri_index[key]][v] += (-1) ** c

    return ChainComplex(cells=(n0, n1, n2, n3), d1=d1, d2=d2, d3=d3)


def mat_mul(a, b):
    if not a or not b:
        return []
    cols_b = len(b[0])
    out = _zeros(len(a), cols_b)
    for i, row in enumerate(a):
        for k, aik in enumerate(row):
            if aik:
                brow = b[k]
                orow = out[i]
                for j in range(cols_b):
                    orow[j] += aik * brow[j]
    return out


def is_zero_matrix(a) -> bool:
    return all(all(x == 0 for x in row) for row in a)


def smith_normal_form(matrix) -> list[int]:
    """Invariant factors of an integer matrix, in divisibility order.

    Classic elimination with exact integers: bring the absolutely smallest
    nonzero entry to the pivot, reduce its row and column by Euclidean steps,
    and once the pivot divides everything below and to the right move on.
    Entries can grow, which is why arbitrary precision is mandatory here.
    """
    a = [list(row) for row in matrix]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    t = 0
    factors = []
    while t < rows and t < cols:
        # Find the smallest nonzero entry in the remaining block.
        piv = None
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                x = a[i][j]
                if x and (best is None or abs(x) < best):
                    best = abs(x)
                    piv = (i, j)
        if piv is None:
            break
        pi, pj = piv
        a[t], a[pi] = a[pi], a[t]
        for row in a:
            row[t], row[pj] = row[pj], row[t]
        # Clear column t and row t; restart if a smaller remainder shows up.
        while True:
            p = a[t][t]
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t]:
                    q = a[i][t] // p
                    if q:
                        for j in range(t, cols):
                            a[i][j] -= q * a[t][j]
                    if a[i][t]:
                        a[t], a[i] = a[i], a[t]
                        dirty = True
                        break
            if dirty:
                continue
            for j in range(t + 1, cols):
                if a[t][j]:
                    q = a[t][j] // p
                    if q:
                        for i in range(t, rows):
                            a[i][j] -= q * a[i][t]
                    if a[t][j]:
                        for i in range(rows):
                            a[i][t], a[i][j] = a[i][j], a[i][t]
                        dirty = True
                        break
            if not dirty:
                break
        # Enforce divisibility of the rest of the block by the pivot.
        p = a[t][t]
        offender = None
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if a[i][j] % p:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            for j in range(t, cols):
                a[t][j] += a[offender][j]
            continue
        factors.append(abs(p))
        t += 1
    return factors


def _group_from(kernel_rank: int, image_factors: list[int]) -> HomologyResult:
    torsion = tuple(f for f in image_factors if f > 1)
    return HomologyResult(rank=kernel_rank - len(image_factors),
                          torsion=torsion)


def homology(g: ColouredGraph):
    """Integral homology (H0, H1, H2, H3) of the encoded polyhedron."""
    if not is_connected(g):
        raise NotConnected("homology expects a connected gem")
    cx = chain_complex(g)
    n0, n1, n2, n3 = cx.cells
    f1 = smith_normal_form(cx.d1) if n0 and n1 else []
    f2 = smith_normal_form(cx.d2) if n1 and n2 else []
    f3 = smith_normal_form(cx.d3) if n2 and n3 else []
    r1, r2, r3 = len(f1), len(f2), len(f3)
    # d1 is a signed graph incidence matrix, hence torsion-free cokernel.
    h0 = HomologyResult(rank=n0 - r1)
    h1 = _group_from(n1 - r1, f2)
    h2 = _group_from(n2 - r2, f3)
    h3 = HomologyResult(rank=n3 - r3)
    return h0, h1, h2, h3


def h1(g: ColouredGraph) -> HomologyResult:
    return homology(g)[1]


def h1_abelianized_oracle(g: ColouredGraph) -> HomologyResult:
    """First homology via the abelianized edge-path group of the 2-skeleton.

    Independent of the chain-complex route: the dual 1-skeleton and triangle
    boundaries are rebuilt here from scratch, a spanning tree kills one
    generator per tree edge, each triangle contributes one relation among the
    remaining generators, and the relation matrix is diagonalized by plain
    Euclidean row and column sweeps with no Smith pivoting.
    """
    rc = residue_census(g)
    cc = cycle_census(g)

    vert_index = {}
    comp_of = {}
    for i in range(4):
        for k, comp in enumerate(rc.components[i]):
            vert_index[(i, k)] = len(vert_index)
            for v in comp:
                comp_of[(i, v)] = vert_index[(i, k)]
    edge_list = []
    cycle_key = {}
    for (i, j), cycles in cc.cycles.items():
        k, l = (c for c in range(4) if c not in (i, j))
        for cyc in cycles:
            idx = len(edge_list)
            # Oriented from the lower-coloured end to the higher-coloured one.
            edge_list.append((comp_of[(k, cyc[0])], comp_of[(l, cyc[0])]))
            for v in cyc:
                cycle_key[(i, j, v)] = idx

    parent = list(range(len(vert_index)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    gen_index = {}
    for idx, (a, b) in enumerate(edge_list):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
        else:
            gen_index[idx] = len(gen_index)

    relations = []
    for v, w, c in g.edges():
        tri_colours = [x for x in range(4) if x != c]
        rel = [0] * len(gen_index)
        nonzero = False
        for t, z in enumerate(tri_colours):
            i, j = min(c, z), max(c, z)
            idx = cycle_key[(i, j, v)]
            if idx in gen_index:
                rel[gen_index[idx]] += (-1) ** t
                nonzero = True
        if nonzero:
            relations.append(rel)
    return _abelian_group_from_relations(len(gen_index), relations)


def _abelian_group_from_relations(n_gens: int, relations) -> HomologyResult:
    """Cokernel of an integer relation matrix by naive diagonalization.

    Euclidean reduction of the pivot row and column in alternation until the
    pivot stands alone, then move to the next block.  No smallest-entry
    pivoting and no divisibility enforcement; the resulting diagonal is
    normalized into a divisor chain afterwards.
    """
    a = [list(r) for r in relations]
    rows, cols = len(a), n_gens
    t = 0
    diag = []
    while t < rows and t < cols:
        piv = None
        for i in range(t, rows):
            for j in range(t, cols):
                if a[i][j]:
                    piv = (i, j)
                    break
            if piv:
                break
        if piv is None:
            break
        pi, pj = piv
        a[t], a[pi] = a[pi], a[t]
        for row in a:
            row[t], row[pj] = row[pj], row[t]
        while True:
            for i in range(t + 1, rows):
                while a[i][t]:
                    q = a[i][t] // a[t][t]
                    if q:
                        for j in range(t, cols):
                            a[i][j] -= q * a[t][j]
                    if a[i][t]:
                        a[t], a[i] = a[i], a[t]
            for j in range(t + 1, cols):
                while a[t][j]:
                    q = a[t][j] // a[t][t]
                    if q:
                        for i in range(t, rows):
                            a[i][j] -= q * a[i][t]
                    if a[t][j]:
                        for i in range(rows):
                            a[i][t], a[i][j] = a[i][j], a[i][t]
            if all(a[i][t] == 0 for i in range(t + 1, rows)) and \
               all(a[t][j] == 0 for j in range(t + 1, cols)):
                break
        diag.append(abs(a[t][t]))
        t += 1
    torsion = _to_divisor_chain([d for d in diag if d > 1])
    return HomologyResult(rank=cols - len(diag), torsion=tuple(torsion))


def _to_divisor_chain(values) -> list[int]:
    """Rewrite a multiset of cyclic orders as a divisibility chain."""
    from math import gcd

    vals = [v for v in values if v > 1]
    changed = True
    while changed:
        changed = False
        vals.sort()
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                x, y = vals[i], vals[j]
                if y % x:
                    d = gcd(x, y)
                    m = x * y // d
                    vals[i], vals[j] = d, m
                    changed = True
        vals = [v for v in vals if v > 1]
    return vals

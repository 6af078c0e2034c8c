"""Fixed-point graph calculus for toric fibers over a point.

Torus-fixed stable maps decompose into multiple covers of coordinate
lines ("legs") joined at fixed points.  Each configuration is a
decorated tree: edges carry a line of the fiber and a covering
multiplicity, vertices carry a fixed point together with whatever marked
points sit there, and the vertex type records how the incident pieces
are glued.  Integrals over a fixed stratum factor into closed-form
vertex, edge, and node-smoothing contributions, with cotangent classes
surviving only at stable vertices, where they integrate against the
point-moduli numbers (n-3)!/(a_1!...a_n!).

Assembly is restricted to genus zero over a point base; the bundle case
is covered through the hypergeometric-series route elsewhere.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from .frobenius import extend_scalars
from .linalg import Mat
from .ratfunc import RatFunc
from .series import Key, VarGroup, VarSpace
from .toric import GenericityError, ToricBundleData

__all__ = [
    "GraphVertex", "GraphEdge", "DecoratedGraph", "Insertion",
    "enumerate_graphs", "smoothing_factor", "vertex_factor", "edge_factor",
    "assemble_correlator", "graph_s_matrix",
]


class GraphVertex(NamedTuple):
    """One fixed point of the tree, with its glueing type.

    Types: 1 = stable vertex (a constant map with at least three special
    points), 2 = node joining two legs, 3 = marked point on a leg end,
    4 = bare leg end.  `decoration` is the (genus, markings, degree)
    triple of the piece the vertex stands for.
    """
    alpha: Tuple[int, ...]
    marks: Tuple[int, ...]
    vtype: int
    decoration: Tuple[int, int, int]


class GraphEdge(NamedTuple):
    ends: Tuple[int, int]
    factor: int
    k: int


class DecoratedGraph(NamedTuple):
    vertices: Tuple[GraphVertex, ...]
    edges: Tuple[GraphEdge, ...]
    aut: int

    def degree(self, nfactors: int) -> Tuple[int, ...]:
        d = [0] * nfactors
        for e in self.edges:
            d[e.factor] += e.k
        return tuple(d)


class Insertion(NamedTuple):
    """A marked-point input: a localized class times psi^power, or the
    propagator class/(z - psi) when `prop` holds."""
    cls: object
    psi: int = 0
    prop: bool = False


# ----------------------------------------------------------- geometry


class _PointGeometry:
    """Tangent data of the fiber at its fixed points.

    Only products of projective spaces arise here: the weight matrix
    must consist of disjoint 0/1 indicator rows, one per factor.
    """

    __slots__ = ("data", "vars", "points", "factors", "pindex")

    def __init__(self, data: ToricBundleData, zvar: str):
        if data.base.curves or data.base.algebra.rank != 1:
            raise ValueError("graph assembly needs a point base")
        for i, row in enumerate(data.m):
            if any(x not in (0, 1) for x in row):
                raise ValueError("fiber is not a product of projective "
                                 "spaces in this presentation")
        for j in range(data.N):
            if sum(data.m[i][j] for i in range(data.k)) != 1:
                raise ValueError("toric divisor %d must belong to exactly "
                                 "one factor" % (j + 1))
        self.data = data
        self.vars = data.base.algebra.vars + (zvar,)
        self.points = data.fixed_points()
        self.factors = [tuple(j + 1 for j in range(data.N) if data.m[i][j])
                        for i in range(data.k)]
        self.pindex = {a: i for i, a in enumerate(self.points)}

    def lam(self, j: int) -> RatFunc:
        return RatFunc.variable(self.vars, self.data.lambda_names[j - 1])

    def weight(self, alpha: Tuple[int, ...], j: int) -> RatFunc:
        """Tangent weight at alpha along the line across divisor j."""
        i = self.factor_of(j)
        return self.lam(alpha[i]) - self.lam(j)

    def factor_of(self, j: int) -> int:
        for i, block in enumerate(self.factors):
            if j in block:
                return i
        raise ValueError("no factor contains divisor %d" % j)

    def neighbor(self, alpha: Tuple[int, ...], j: int) -> Tuple[int, ...]:
        i = self.factor_of(j)
        beta = alpha[:i] + (j,) + alpha[i + 1:]
        return beta

    def euler(self, alpha: Tuple[int, ...]) -> RatFunc:
        out = RatFunc.one(self.vars)
        for i, block in enumerate(self.factors):
            for j in block:
                if j != alpha[i]:
                    out = out * self.weight(alpha, j)
        return out


# -------------------------------------------------------- enumeration

# a rooted subtree is (alpha, marks, children) with children a sorted
# tuple of (factor, target point, k, subtree); sorting makes the nested
# tuple a canonical form, so the recursion below never emits duplicates


def _descriptor_runs(children) -> int:
    sym = 1
    run = 1
    for a, b in zip(children, children[1:]):
        run = run + 1 if a == b else 1
        if a == b:
            sym *= run
    return sym


def _gen_trees(geom: _PointGeometry, alpha, marks: Tuple[int, ...],
               budget: Tuple[int, ...], force_edge: bool):
    """All rooted trees at `alpha` holding exactly `marks`, of fiber
    degree within `budget`; yields (node, aut, degree_used)."""
    for root_marks_n in range(len(marks) + 1):
        for root_marks in itertools.combinations(marks, root_marks_n):
            rest = tuple(m for m in marks if m not in root_marks)
            for children, aut, used in _gen_children(geom, alpha, rest,
                                                     budget, None):
                if force_edge and not children:
                    continue
                node = (alpha, root_marks, children)
                yield node, aut * _descriptor_runs(children), used


def _gen_children(geom: _PointGeometry, alpha, marks: Tuple[int, ...],
                  budget: Tuple[int, ...], floor):
    """Sorted child tuples; `floor` keeps descriptors non-decreasing."""
    if not marks:
        yield (), 1, tuple(0 for _ in budget)
    for i, block in enumerate(geom.factors):
        if budget[i] == 0:
            continue
        for j in block:
            if j == alpha[i]:
                continue
            beta = geom.neighbor(alpha, j)
            for k in range(1, budget[i] + 1):
                spent = tuple(k if ii == i else 0
                              for ii in range(len(budget)))
                sub_budget = tuple(b - s for b, s in zip(budget, spent))
                for nmarks in range(len(marks) + 1):
                    for sub_marks in itertools.combinations(marks, nmarks):
                        remaining = tuple(m for m in marks
                                          if m not in sub_marks)
                        for sub, saut, sused in _gen_trees(
                                geom, beta, sub_marks, sub_budget, False):
                            desc = (i, beta, k, sub)
                            if floor is not None and desc < floor:
                                continue
                            total = tuple(a + b for a, b in
                                          zip(spent, sused))
                            rest_budget = tuple(
                                b - t for b, t in zip(budget, total))
                            for more, maut, mused in _gen_children(
                                    geom, alpha, remaining,
                                    rest_budget, desc):
                                yield ((desc,) + more, saut * maut,
                                       tuple(a + b for a, b in
                                             zip(total, mused)))


def _classify(nedges: int, nmarks: int) -> Tuple[int, Tuple[int, int, int]]:
    val = nedges + nmarks
    if val >= 3:
        return 1, (0, nmarks, 0)
    if nedges == 2:
        return 2, (0, 2, 0)
    if nedges == 1 and nmarks == 1:
        return 3, (0, 1, 0)
    if nedges == 1 and nmarks == 0:
        return 4, (0, 0, 0)
    raise ValueError("unclassifiable vertex: %d edges, %d marks"
                     % (nedges, nmarks))


def _flatten(node, aut: int) -> DecoratedGraph:
    vertices: List[GraphVertex] = []
    edges: List[GraphEdge] = []

    def walk(n) -> int:
        alpha, marks, children = n
        idx = len(vertices)
        vertices.append(None)
        child_idx = []
        for (i, _beta, k, sub) in children:
            child_idx.append((i, k, walk(sub)))
        nedges = len(children) + (0 if idx == 0 else 1)
        vtype, deco = _classify(nedges, len(marks))
        vertices[idx] = GraphVertex(alpha, marks, vtype, deco)
        for (i, k, widx) in child_idx:
            edges.append(GraphEdge((idx, widx), i, k))
        return idx

    walk(node)
    return DecoratedGraph(tuple(vertices), tuple(edges), aut)


def enumerate_graphs(data: ToricBundleData, n: int,
                     degree: Tuple[int, ...],
                     zvar: str = "z") -> List[DecoratedGraph]:
    """Duplicate-free decorated trees with `n` marked points and the
    given fiber multidegree.  Degree zero needs at least three marks
    (fewer leaves no stable configuration at all)."""
    geom = _PointGeometry(data, zvar)
    if len(degree) != data.k:
        raise ValueError("degree must have one entry per fiber factor")
    marks = tuple(range(1, n + 1))
    out: List[DecoratedGraph] = []
    if all(d == 0 for d in degree):
        if n < 3:
            return []
        for alpha in geom.points:
            v = GraphVertex(alpha, marks, 1, (0, n, 0))
            out.append(DecoratedGraph((v,), (), 1))
        return out
    for alpha in geom.points:
        for node, aut, used in _gen_trees(geom, alpha, marks, degree, True):
            if used != degree:
                continue
            if 1 not in node[1]:
                # root the tree at the vertex holding the first mark,
                # so each marked tree is produced exactly once
                continue
            out.append(_flatten(node, aut))
    return out


# ------------------------------------------------------------- factors


def smoothing_factor(geom_or_data, alpha, flag_edges, zvar: str = "z"
                     ) -> Dict[int, RatFunc]:
    """Node-smoothing contribution of one flag, as a polynomial in the
    cotangent class at the attachment point (psi power -> coefficient).

    `flag_edges` lists the (divisor, multiplicity) pairs of the legs at
    the vertex: one pair for a stable-vertex flag, two for a leg-leg
    node.  Marked or bare leg ends contribute the constant 1.
    """
    geom = (geom_or_data if isinstance(geom_or_data, _PointGeometry)
            else _PointGeometry(geom_or_data, zvar))
    one = RatFunc.one(geom.vars)
    if len(flag_edges) == 1:
        j, k = flag_edges[0]
        chi = geom.weight(alpha, j)
        return {0: chi.scale(Fraction(1, k)), 1: -one}
    if len(flag_edges) == 2:
        (j1, k1), (j2, k2) = flag_edges
        val = (geom.weight(alpha, j1).scale(Fraction(1, k1))
               + geom.weight(alpha, j2).scale(Fraction(1, k2)))
        if val.is_zero():
            raise GenericityError("leg-leg node smoothing weight vanishes")
        return {0: val}
    return {0: one}


def vertex_factor(geom_or_data, vertex: GraphVertex,
                  leg: Optional[Tuple[int, int]] = None,
                  zvar: str = "z") -> RatFunc:
    """Normal-direction Euler weight of one vertex.

    Stable and node vertices contribute the full normal weight of their
    fixed point; a bare leg end divides out the weight of the leg
    direction it sits on, which needs the (divisor, multiplicity) pair.
    """
    geom = (geom_or_data if isinstance(geom_or_data, _PointGeometry)
            else _PointGeometry(geom_or_data, zvar))
    e = geom.euler(vertex.alpha)
    if vertex.vtype == 4:
        if leg is None:
            raise ValueError("a bare leg end needs its leg data")
        j, k = leg
        return e / geom.weight(vertex.alpha, j).scale(Fraction(1, k))
    return e


def edge_factor(geom_or_data, alpha, j: int, k: int,
                zvar: str = "z", from_far_end: bool = False) -> RatFunc:
    """Euler weight of the moving deformations of one multiple cover,
    in the form the assembler divides by.

    Per toric divisor the weight ladder descends from the restriction
    at the near end in steps of the leg weight over the multiplicity,
    with as many interior rungs as the intersection number prescribes;
    divisors the covered line misses divide this product by their
    restriction instead, and weight-zero modes cancel against the
    trivial summands of the divisor presentation of the tangent bundle
    and are dropped.  The two ends give the same value; `from_far_end`
    evaluates from the other one as a convention cross-check.
    """
    geom = (geom_or_data if isinstance(geom_or_data, _PointGeometry)
            else _PointGeometry(geom_or_data, zvar))
    data = geom.data
    i = geom.factor_of(j)
    if from_far_end:
        # cross to the other endpoint; seen from there, the covered line
        # runs back over the divisor this endpoint selects
        alpha, j = geom.neighbor(alpha, j), alpha[i]
    chi_k = geom.weight(alpha, j).scale(Fraction(1, k))
    if chi_k.is_zero():
        raise GenericityError("degenerate leg weight")
    out = RatFunc.one(geom.vars)
    for jj in range(1, data.N + 1):
        u = (RatFunc.zero(geom.vars) if jj == alpha[geom.factor_of(jj)]
             else geom.weight(alpha, jj))
        kj = k * data.m[i][jj - 1]
        if kj < 0:
            raise ValueError("covered line meets divisor %d negatively"
                             % jj)
        if kj >= 1:
            for mm in range(1, kj):
                term = u - chi_k.scale(mm)
                if term.is_zero():
                    raise GenericityError("edge weight ladder hits zero")
                out = out * term
        elif not u.is_zero():
            out = out / u
    return out


# -------------------------------------------------------------- values


def _stable_vertex_value(geom: _PointGeometry, alpha,
                         flags: Sequence[Tuple[RatFunc, int]],
                         ins: Sequence[Tuple[RatFunc, int, bool]],
                         z: RatFunc) -> RatFunc:
    """Integral over the vertex moduli: smoothing denominators expanded
    as geometric series in psi, propagator insertions likewise in 1/z,
    then the point intersection numbers close the sum."""
    val = len(flags) + len(ins)
    dim = val - 3
    vars = geom.vars
    base = RatFunc.one(vars)
    fixed = 0
    marked_fact = Fraction(1)
    nprop = 0
    for v, p, prop in ins:
        base = base * v
        if prop:
            nprop += 1
        else:
            fixed += p
            marked_fact *= math.factorial(p)
    if fixed > dim:
        return RatFunc.zero(vars)
    slots = [chi.scale(Fraction(1, k)) for chi, k in flags]
    slots.extend([z] * nprop)
    for w in slots:
        if w.is_zero():
            raise GenericityError("vanishing smoothing weight at a "
                                  "stable vertex")
    total = RatFunc.zero(vars)
    free = dim - fixed
    for combo in itertools.product(range(free + 1), repeat=len(slots)):
        if sum(combo) != free:
            continue
        coeff = Fraction(math.factorial(dim)) / marked_fact
        for a in combo:
            coeff /= math.factorial(a)
        term = RatFunc.const(vars, coeff)
        for a, w in zip(combo, slots):
            term = term / (w ** (a + 1))
        total = total + term
    return base * total / geom.euler(alpha)


def _marked_psi_multinomial(dim: int, powers: Sequence[int]) -> Fraction:
    return Fraction(math.factorial(dim)) / math.prod(
        math.factorial(p) for p in powers)


def _graph_value(geom: _PointGeometry, g: DecoratedGraph,
                 ins: Sequence[Insertion], zvar: str) -> RatFunc:
    vars = geom.vars
    z = RatFunc.variable(vars, zvar)
    nv = len(g.vertices)
    flags: List[List[Tuple[RatFunc, int, int]]] = [[] for _ in range(nv)]
    total = RatFunc.one(vars)
    for e in g.edges:
        a, b = e.ends
        va, vb = g.vertices[a].alpha, g.vertices[b].alpha
        i = e.factor
        ja = vb[i]
        jb = va[i]
        flags[a].append((geom.weight(va, ja), e.k, ja))
        flags[b].append((geom.weight(vb, jb), e.k, jb))
        total = total / edge_factor(geom, va, ja, e.k).scale(e.k)
    for idx, v in enumerate(g.vertices):
        vflags = flags[idx]
        vins = []
        for m in v.marks:
            spec = ins[m - 1]
            pi = geom.pindex[v.alpha]
            value = spec.cls.coeffs[pi]
            vins.append((value, spec.psi, spec.prop))
        if v.vtype == 1:
            total = total * _stable_vertex_value(
                geom, v.alpha, [(c, k) for c, k, _j in vflags], vins, z)
        elif v.vtype == 2:
            (c1, k1, _), (c2, k2, _) = vflags
            den = c1.scale(Fraction(1, k1)) + c2.scale(Fraction(1, k2))
            if den.is_zero():
                raise GenericityError("leg-leg smoothing weight vanishes")
            total = total / (geom.euler(v.alpha) * den)
        elif v.vtype == 3:
            (c, k, _), = vflags
            (value, p, prop), = vins
            psi_val = -c.scale(Fraction(1, k))
            if prop:
                den = z - psi_val
                if den.is_zero():
                    raise GenericityError("propagator pole at a leg end")
                value = value / den
            elif p:
                value = value * psi_val ** p
            total = total * value / geom.euler(v.alpha)
        else:
            (c, k, _), = vflags
            total = total * c.scale(Fraction(1, k)) / geom.euler(v.alpha)
    return total.scale(Fraction(1, g.aut))


def assemble_correlator(data: ToricBundleData, ins: Sequence[Insertion],
                        degree: Tuple[int, ...],
                        zvar: str = "z") -> RatFunc:
    """Genus-zero correlator of localized classes by summing decorated
    trees of the given fiber multidegree."""
    geom = _PointGeometry(data, zvar)
    total = RatFunc.zero(geom.vars)
    for g in enumerate_graphs(data, len(ins), degree, zvar):
        total = total + _graph_value(geom, g, ins, zvar)
    return total


def graph_s_matrix(data: ToricBundleData, fiber_cap: int,
                   zvar: str = "z") -> Dict[Key, Mat]:
    """Fundamental solution assembled from the graph sum, in the
    localized basis: entry (mu, nu) pairs the weighted dual class at mu
    against the propagator insertion at nu."""
    geom = _PointGeometry(data, zvar)
    loc = data.localized()
    la_z = extend_scalars(loc.algebra, (zvar,))
    if la_z.vars != geom.vars:
        raise ValueError("variable universes disagree")
    npts = len(geom.points)
    space = VarSpace([VarGroup("q", tuple("q%d" % (i + 1)
                                          for i in range(data.k)),
                               fiber_cap)])
    zerorow = [RatFunc.zero(geom.vars)] * npts
    out: Dict[Key, Mat] = {
        space.zero_key: Mat.identity(npts, geom.vars)}
    dual = [la_z.basis_at(i).scale(geom.euler(geom.points[i]))
            for i in range(npts)]
    plain = [la_z.basis_at(i) for i in range(npts)]
    keys = [key for key in itertools.product(range(fiber_cap + 1),
                                             repeat=data.k)
            if space.admissible(key)]
    for key in keys:
        if sum(key) == 0:
            continue
        rows = [list(zerorow) for _ in range(npts)]
        for g in enumerate_graphs(data, 2, key, zvar):
            m1 = m2 = None
            for v in g.vertices:
                if 1 in v.marks:
                    m1 = geom.pindex[v.alpha]
                if 2 in v.marks:
                    m2 = geom.pindex[v.alpha]
            val = None
            for mu in (m1,) if m1 is not None else ():
                for nu in (m2,) if m2 is not None else ():
                    ins = [Insertion(dual[mu]), Insertion(plain[nu],
                                                          prop=True)]
                    val = _graph_value(geom, g, ins, zvar)
                    rows[mu][nu] = rows[mu][nu] + val
        out[key] = Mat(rows)
    return out

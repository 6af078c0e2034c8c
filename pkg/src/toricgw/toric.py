"""Toric bundle combinatorics and equivariant geometry.

A toric fiber is presented by GIT data: a k x N integer matrix whose
columns span the degree-2 classes of the fiber, and a generic moment
value.  Fixed points are the size-k index subsets whose divisor columns
positively span the moment value; restrictions of the divisor classes,
tangent weights along one-dimensional orbits, and normal-bundle Euler
classes all come from solving small exact linear systems.

Everything is over a base manifold carried as a BaseData record (its
cohomology, the degree-2 twisting classes of the line-bundle summands,
the first Chern class of the base, and generators of the effective
cone).  A point base makes the fiber itself the target.

Index subsets use 1-based labels throughout, matching the way the
fixed points are usually listed ({1}, {2}, ..., {13, 14, 23, 24}).
"""

from fractions import Fraction
from itertools import combinations
from typing import Dict, Optional, Sequence, Tuple

from .frobenius import (CohAlgebra, CohClass, LocalizedAlgebra,
                        point_cohomology, projective_space_cohomology)
from .linalg import LinearSolveError, Mat
from .ratfunc import RatFunc


class GenericityError(ValueError):
    pass


class BasisError(ValueError):
    pass


def _cone_solve(cols: Sequence[Sequence[Fraction]],
                rhs: Sequence[Fraction]) -> Optional[list]:
    """Solve sum_r x_r * cols[r] = rhs exactly; None when singular."""
    k = len(rhs)
    a = [[Fraction(cols[r][i]) for r in range(len(cols))] for i in range(k)]
    b = [Fraction(v) for v in rhs]
    ncols = len(cols)
    if ncols != k:
        raise ValueError("cone solve needs a square system")
    for col in range(k):
        piv = next((r for r in range(col, k) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        b[col], b[piv] = b[piv], b[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        b[col] = b[col] * inv
        for r in range(k):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                b[r] = b[r] - f * b[col]
    return b


def _gauss_solve(mat: Sequence[Sequence[Fraction]], rhs: list):
    """Solve a square Fraction system whose right-hand sides are vectors
    supporting +, - and scale() (RatFunc or CohClass).  None if singular."""
    k = len(rhs)
    a = [list(row) for row in mat]
    b = list(rhs)
    for col in range(k):
        piv = next((r for r in range(col, k) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        b[col], b[piv] = b[piv], b[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        b[col] = b[col].scale(inv)
        for r in range(k):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                b[r] = b[r] - b[col].scale(f)
    return b


def _frac_rank(rows: Sequence[Sequence[int]]) -> int:
    a = [[Fraction(v) for v in row] for row in rows]
    if not a:
        return 0
    rank = 0
    for col in range(len(a[0])):
        piv = next((r for r in range(rank, len(a)) if a[r][col] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        lead = a[rank][col]
        a[rank] = [x / lead for x in a[rank]]
        for r in range(len(a)):
            if r != rank and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[rank])]
        rank += 1
    return rank


class BaseData:
    """The base manifold of the bundle and the twisting data over it."""

    __slots__ = ("algebra", "lambdas", "c1", "curves")

    def __init__(self, algebra: CohAlgebra, lambdas: Sequence[CohClass],
                 c1: CohClass, curves: Sequence[Sequence[Fraction]] = ()):
        self.algebra = algebra
        self.lambdas = tuple(lambdas)
        self.c1 = c1
        self.curves = tuple(tuple(Fraction(x) for x in c) for c in curves)
        deg2 = self.degree2_labels()
        for c in self.curves:
            if len(c) != len(deg2):
                raise ValueError("curve class length disagrees with H^2 rank")

    def degree2_labels(self) -> Tuple:
        return tuple(l for l, d in zip(self.algebra.labels,
                                       self.algebra.degrees) if d == 2)

    def integrate_curve(self, curve_index: int, cls: CohClass) -> Fraction:
        """Pair the degree-2 part of a class with an effective generator."""
        total = Fraction(0)
        for w, label in zip(self.curves[curve_index], self.degree2_labels()):
            c = cls.coeff(label)
            if not c.is_zero():
                total += w * c.const_value()
        return total


class Restrictions:
    """Values of the divisor classes at one fixed point."""

    __slots__ = ("p", "u", "P", "U")

    def __init__(self, p, u, P, U):
        self.p = tuple(p)   # fiber generators, scalars
        self.u = tuple(u)   # fiber divisors, scalars
        self.P = tuple(P)   # bundle generators, base classes
        self.U = tuple(U)   # bundle divisors, base classes


class ToricBundleData:
    """GIT presentation of a toric bundle and its derived geometry."""

    __slots__ = ("m", "omega", "lambda_names", "base", "monomials", "ample",
                 "orientation", "_fixed", "_restr", "_localized", "_global",
                 "_evaluation")

    def __init__(self, m: Sequence[Sequence[int]], omega: Sequence,
                 lambda_names: Sequence[str], base: BaseData,
                 monomials: Sequence[Tuple[int, ...]], ample: bool = True,
                 orientation: int = 1):
        self.m = tuple(tuple(int(v) for v in row) for row in m)
        self.omega = tuple(Fraction(v) for v in omega)
        self.lambda_names = tuple(lambda_names)
        self.base = base
        self.monomials = tuple(tuple(int(e) for e in mono)
                               for mono in monomials)
        self.ample = bool(ample)
        if orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        self.orientation = orientation
        k, n = self.k, self.N
        if len(self.omega) != k:
            raise ValueError("moment value has wrong length")
        if any(len(row) != n for row in self.m):
            raise ValueError("ragged weight matrix")
        if len(self.lambda_names) != n or len(base.lambdas) != n:
            raise ValueError("need one equivariant parameter and one "
                             "twisting class per coordinate")
        for name in self.lambda_names:
            if name not in base.algebra.vars:
                raise ValueError("parameter %r missing from the scalar "
                                 "universe" % name)
        if k and _frac_rank(self.m) != k:
            raise ValueError("weight matrix is rank-deficient")
        if len(set(self.monomials)) != len(self.monomials):
            raise BasisError("duplicate basis monomials")
        for mono in self.monomials:
            if len(mono) != k or any(e < 0 for e in mono):
                raise BasisError("basis monomials must be exponent tuples "
                                 "of length k")
        self._fixed = None
        self._restr: Dict[Tuple[int, ...], Restrictions] = {}
        self._localized = None
        self._global = None
        self._evaluation = None

    @property
    def k(self) -> int:
        return len(self.m)

    @property
    def N(self) -> int:
        return len(self.m[0]) if self.m else len(self.lambda_names)

    def divisor_column(self, j: int) -> Tuple[Fraction, ...]:
        """Degree-2 class of the j-th coordinate divisor (1-based j)."""
        return tuple(Fraction(self.m[i][j - 1]) for i in range(self.k))

    # ------------------------------------------------------------ fixed set

    def fixed_points(self) -> Tuple[Tuple[int, ...], ...]:
        """Size-k subsets whose divisor columns positively span omega."""
        if self._fixed is not None:
            return self._fixed
        pts = []
        for alpha in combinations(range(1, self.N + 1), self.k):
            cols = [self.divisor_column(j) for j in alpha]
            x = _cone_solve(cols, self.omega)
            if x is None:
                continue    # rank-deficient subset
            if any(v == 0 for v in x):
                raise GenericityError("moment value lies on the wall of "
                                      "the cone of %r" % (alpha,))
            if all(v > 0 for v in x):
                pts.append(alpha)
        self._fixed = tuple(pts)
        for alpha in pts:
            r = self.restrictions(alpha)
            for j in range(1, self.N + 1):
                if j in alpha:
                    assert r.u[j - 1].is_zero()
                elif r.u[j - 1].is_zero():
                    raise GenericityError("degenerate torus action at %r"
                                          % (alpha,))
        return self._fixed

    # --------------------------------------------------------- restrictions

    def restrictions(self, alpha: Tuple[int, ...]) -> Restrictions:
        """Fixed-point values of the generators and coordinate divisors.

        The fiber generators restrict by solving sum_i m_ij p_i = lambda_j
        over j in alpha; the bundle generators solve the same system with
        the twisting classes added to the right-hand side.
        """
        alpha = tuple(sorted(alpha))
        cached = self._restr.get(alpha)
        if cached is not None:
            return cached
        k = self.k
        vars = self.base.algebra.vars
        rows = [[Fraction(self.m[i][j - 1]) for i in range(k)] for j in alpha]
        lam = [RatFunc.variable(vars, self.lambda_names[j - 1]) for j in alpha]
        p = _gauss_solve(rows, lam) if k else []
        if p is None:
            raise GenericityError("restriction system is singular at %r"
                                  % (alpha,))
        unit = self.base.algebra.unit
        rhs = [unit.scale(l) + self.base.lambdas[j - 1]
               for l, j in zip(lam, alpha)]
        P = _gauss_solve(rows, rhs) if k else []
        u = []
        U = []
        for j in range(1, self.N + 1):
            lam_j = RatFunc.variable(vars, self.lambda_names[j - 1])
            su = RatFunc.zero(vars)
            sU = self.base.algebra.zero()
            for i in range(k):
                if self.m[i][j - 1]:
                    su = su + p[i].scale(self.m[i][j - 1])
                    sU = sU + P[i].scale(self.m[i][j - 1])
            u.append(su - lam_j)
            U.append(sU - self.base.lambdas[j - 1] - unit.scale(lam_j))
        r = Restrictions(p, u, P, U)
        self._restr[alpha] = r
        return r

    # --------------------------------------------------------------- orbits

    def one_dim_orbits(self) -> Tuple[Tuple[Tuple[int, ...], Tuple[int, ...]], ...]:
        """Directed pairs (alpha, beta) joined by a one-dimensional orbit.

        Two fixed points are joined exactly when they share k-1 indices:
        the convex combination of their cone solutions is a positive
        representation supported on the union, so the face of the moment
        polytope between them is the required edge.  The midpoint test
        below re-checks that argument numerically.
        """
        pts = self.fixed_points()
        edges = []
        for a in pts:
            sa = set(a)
            for b in pts:
                if a != b and len(sa & set(b)) == self.k - 1:
                    edges.append((a, b))
        for a, b in edges:
            support = tuple(sorted(set(a) | set(b)))
            xa = dict(zip(a, _cone_solve([self.divisor_column(j) for j in a],
                                         self.omega)))
            xb = dict(zip(b, _cone_solve([self.divisor_column(j) for j in b],
                                         self.omega)))
            mid = [(xa.get(j, Fraction(0)) + xb.get(j, Fraction(0))) / 2
                   for j in support]
            assert all(v > 0 for v in mid), (a, b)
        return tuple(edges)

    def chi_class(self, alpha: Tuple[int, ...],
                  beta: Tuple[int, ...]) -> CohClass:
        """Weight of the tangent line at alpha pointing toward beta."""
        extra = set(beta) - set(alpha)
        if len(extra) != 1:
            raise ValueError("fixed points %r and %r are not joined by an "
                             "orbit" % (alpha, beta))
        j = extra.pop()
        cls = self.restrictions(alpha).U[j - 1]
        return cls if self.orientation == 1 else -cls

    def euler_normal(self, alpha: Tuple[int, ...]) -> CohClass:
        """Equivariant Euler class of the normal bundle of the fixed locus."""
        out = self.base.algebra.unit
        for j in range(1, self.N + 1):
            if j not in alpha:
                out = out * self.restrictions(alpha).U[j - 1]
        return out

    # ------------------------------------------------------------- algebras

    def localized(self) -> LocalizedAlgebra:
        if self._localized is None:
            pts = self.fixed_points()
            eulers = [self.euler_normal(a) for a in pts]
            c1_blocks = []
            for a in pts:
                total = self.base.c1
                for U in self.restrictions(a).U:
                    total = total + U
                c1_blocks.append(total)
            dim = self.N - self.k + self.base.algebra.dim
            self._localized = LocalizedAlgebra(pts, self.base.algebra,
                                               eulers, c1_blocks, dim)
        return self._localized

    def evaluation(self) -> Mat:
        """Localized coordinates of each chosen global basis element.

        Rows follow the localized basis (fixed point, base label); columns
        follow (monomial, base label).
        """
        if self._evaluation is not None:
            return self._evaluation
        loc = self.localized()
        base = self.base.algebra
        cols = []
        for mono in self.monomials:
            for bidx in range(base.rank):
                vec = []
                for alpha in loc.points:
                    r = self.restrictions(alpha)
                    cls = base.basis_at(bidx)
                    for i, e in enumerate(mono):
                        for _ in range(e):
                            cls = cls * r.P[i]
                    vec.extend(cls.coeffs)
                cols.append(vec)
        n = len(cols)
        if any(len(v) != n for v in cols):
            raise BasisError("global and localized ranks disagree; need as "
                             "many monomials as fixed points")
        self._evaluation = Mat([[cols[c][r] for c in range(n)]
                                for r in range(n)])
        return self._evaluation

    def global_algebra(self) -> CohAlgebra:
        if self._global is not None:
            return self._global
        loc = self.localized()
        base = self.base.algebra
        if len(self.monomials) != len(loc.points):
            raise BasisError("need exactly one basis monomial per fixed "
                             "point (%d != %d)"
                             % (len(self.monomials), len(loc.points)))
        ev = self.evaluation()
        try:
            ev_inv = ev.inv()
        except LinearSolveError:
            raise BasisError("chosen monomials do not restrict to a basis")
        n = ev.shape[0]
        la = loc.algebra
        cols = [CohClass(la, [ev[r, c] for r in range(n)]) for c in range(n)]

        def solve_back(cls: CohClass) -> Tuple[RatFunc, ...]:
            col = ev_inv * Mat.column(cls.coeffs)
            return tuple(col[i, 0] for i in range(n))

        table = [[solve_back(cols[i] * cols[j]) for j in range(n)]
                 for i in range(n)]
        pairing = ev.transpose() * la.pairing * ev
        unit = solve_back(la.unit)
        c1 = solve_back(la.c1)
        labels = [(mono, bl) for mono in self.monomials for bl in base.labels]
        degrees = [2 * sum(mono) + base.degrees[b]
                   for mono in self.monomials for b in range(base.rank)]
        self._global = CohAlgebra(base.vars, labels, degrees, table, pairing,
                                  unit, c1, la.dim, la.chi)
        return self._global


def localized_algebra(data: ToricBundleData) -> LocalizedAlgebra:
    return data.localized()


def make_toric_fiber_algebra(data: ToricBundleData) -> CohAlgebra:
    """Global presentation of the equivariant cohomology of the bundle."""
    return data.global_algebra()


# -------------------------------------------------------------- presets


def point_base(vars: Tuple[str, ...], n_lambdas: int) -> BaseData:
    alg = point_cohomology(vars)
    return BaseData(alg, [alg.zero()] * n_lambdas, alg.zero(), ())


def target_point() -> ToricBundleData:
    """Trivial datum: no fiber directions, point base, rank-1 algebra."""
    return ToricBundleData((), (), (), point_base((), 0), ((),))


def fiber_p1(names: Tuple[str, str] = ("l1", "l2")) -> ToricBundleData:
    return ToricBundleData(((1, 1),), (1,), names,
                           point_base(tuple(names), 2), ((0,), (1,)))


def fiber_p2(names: Tuple[str, str, str] = ("l1", "l2", "l3")) -> ToricBundleData:
    return ToricBundleData(((1, 1, 1),), (1,), names,
                           point_base(tuple(names), 3), ((0,), (1,), (2,)))


def fiber_p1xp1(names: Tuple[str, ...] = ("l1", "l2", "l3", "l4")) -> ToricBundleData:
    return ToricBundleData(((1, 1, 0, 0), (0, 0, 1, 1)), (1, 1), names,
                           point_base(tuple(names), 4),
                           ((0, 0), (1, 0), (0, 1), (1, 1)))


def p1_bundle_over_p1(degrees: Tuple[int, int] = (0, -1),
                      names: Tuple[str, str] = ("l1", "l2"),
                      base_gen: str = "h") -> ToricBundleData:
    """Projectivization of a sum of two line bundles on the projective line.

    `degrees` are the degrees of the two summands; the twisting classes
    are their duals.  The default (0, -1) is the first Hirzebruch surface.
    """
    alg = projective_space_cohomology(1, tuple(names), gen=base_gen)
    h = alg.basis(base_gen)
    lambdas = [h.scale(-d) for d in degrees]
    base = BaseData(alg, lambdas, h.scale(2), ((Fraction(1),),))
    return ToricBundleData(((1, 1),), (1,), names, base, ((0,), (1,)))

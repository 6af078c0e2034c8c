"""Finite-rank graded Frobenius algebras with exact scalars.

Models the even cohomology of the targets we work with: a point,
projective spaces and their products, and fixed-point localized bundle
algebras, all over exact rational functions in the equivariant
parameters.  An algebra records basis degrees, the cup table, the
Poincare pairing, the unit, the first Chern class and the complex
dimension; the grading data (the antisymmetric degree operator and
multiplication by the first Chern class) is derived.

Only even degrees are supported; constructors reject odd ones, so no
super-signs appear anywhere.
"""

from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

from .fock import LoopData
from .linalg import LinearSolveError, Mat
from .ratfunc import RatFunc


class FrobeniusError(ValueError):
    pass


class CohClass:
    """Element of a CohAlgebra as an exact coefficient vector."""

    __slots__ = ("alg", "coeffs")

    def __init__(self, alg: "CohAlgebra", coeffs: Sequence[RatFunc]):
        self.alg = alg
        self.coeffs = tuple(coeffs)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def __eq__(self, other) -> bool:
        return (isinstance(other, CohClass) and self.alg is other.alg
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash(self.coeffs)

    def coeff(self, label) -> RatFunc:
        return self.coeffs[self.alg._index[label]]

    def __add__(self, other: "CohClass") -> "CohClass":
        return CohClass(self.alg, tuple(a + b for a, b in
                                        zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "CohClass":
        return CohClass(self.alg, tuple(-c for c in self.coeffs))

    def __sub__(self, other: "CohClass") -> "CohClass":
        return self + (-other)

    def scale(self, c) -> "CohClass":
        if not isinstance(c, RatFunc):
            c = RatFunc.const(self.alg.vars, c)
        return CohClass(self.alg, tuple(x * c for x in self.coeffs))

    def __mul__(self, other: "CohClass") -> "CohClass":
        """Cup product via the structure-constant table."""
        alg = self.alg
        n = alg.rank
        out = [RatFunc.zero(alg.vars)] * n
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if b.is_zero():
                    continue
                ab = a * b
                for l, c in enumerate(alg.table[i][j]):
                    if not c.is_zero():
                        out[l] = out[l] + ab * c
        return CohClass(alg, tuple(out))

    def __pow__(self, n: int) -> "CohClass":
        if n < 0:
            raise ValueError("negative cup powers go through inverse()")
        out = self.alg.unit
        for _ in range(n):
            out = out * self
        return out

    def pair(self, other: "CohClass") -> RatFunc:
        g = self.alg.pairing
        total = RatFunc.zero(self.alg.vars)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if not b.is_zero():
                    total = total + a * g[i, j] * b
        return total

    def integrate(self) -> RatFunc:
        """Pairing against the unit (the pushforward to a point)."""
        return self.pair(self.alg.unit)

    def mult_matrix(self) -> Mat:
        """Matrix of cup multiplication by this class."""
        cols = [ (self * self.alg.basis_at(j)).coeffs
                 for j in range(self.alg.rank) ]
        return Mat([[cols[j][i] for j in range(self.alg.rank)]
                    for i in range(self.alg.rank)])

    def inverse(self) -> "CohClass":
        """Multiplicative inverse, when the class is a unit of the algebra."""
        try:
            minv = self.mult_matrix().inv()
        except LinearSolveError:
            raise FrobeniusError("class is not invertible")
        return CohClass(self.alg, tuple((minv * Mat.column(self.alg.unit.coeffs)
                                         )[i, 0] for i in range(self.alg.rank)))

    def __repr__(self):
        parts = ["%r*%r" % (c, l) for l, c in
                 zip(self.alg.labels, self.coeffs) if not c.is_zero()]
        return "CohClass(%s)" % (" + ".join(parts) or "0")


class CohAlgebra:
    """Graded commutative Frobenius algebra on an explicit basis.

    `table[i][j]` is the coefficient vector of the product of basis
    elements i and j.  The constructor verifies commutativity,
    associativity, the unit law, symmetry and nondegeneracy of the
    pairing, and the Frobenius compatibility (ab, c) = (a, bc).
    """

    __slots__ = ("vars", "labels", "degrees", "table", "pairing", "dim",
                 "chi", "unit", "c1", "_index", "pairing_inv")

    def __init__(self, vars: Tuple[str, ...], labels: Sequence,
                 degrees: Sequence[int], table, pairing: Mat,
                 unit: Sequence[RatFunc], c1: Sequence[RatFunc],
                 dim: int, chi, check: bool = True):
        self.vars = tuple(vars)
        self.labels = tuple(labels)
        self.degrees = tuple(int(d) for d in degrees)
        self.table = tuple(tuple(tuple(cell) for cell in row) for row in table)
        self.pairing = pairing
        self.unit = CohClass(self, tuple(unit))
        self.c1 = CohClass(self, tuple(c1))
        self.dim = int(dim)
        self.chi = Fraction(chi)
        self._index = {l: i for i, l in enumerate(self.labels)}
        if len(self._index) != len(self.labels):
            raise FrobeniusError("duplicate basis labels")
        try:
            self.pairing_inv = pairing.inv()
        except LinearSolveError:
            raise FrobeniusError("degenerate pairing")
        if check:
            self._check()

    @property
    def rank(self) -> int:
        return len(self.labels)

    def basis_at(self, i: int) -> CohClass:
        coeffs = [RatFunc.zero(self.vars)] * self.rank
        coeffs[i] = RatFunc.one(self.vars)
        return CohClass(self, coeffs)

    def basis(self, label) -> CohClass:
        return self.basis_at(self._index[label])

    def zero(self) -> CohClass:
        return CohClass(self, [RatFunc.zero(self.vars)] * self.rank)

    def scalar(self, c) -> CohClass:
        return self.unit.scale(c)

    def from_coeffs(self, coeffs: Sequence) -> CohClass:
        out = []
        for c in coeffs:
            out.append(c if isinstance(c, RatFunc)
                       else RatFunc.const(self.vars, c))
        if len(out) != self.rank:
            raise FrobeniusError("coefficient vector has wrong length")
        return CohClass(self, out)

    def dual_basis(self) -> Tuple[CohClass, ...]:
        """Basis {e^i} with (e^i, e_j) = delta_ij."""
        ginv = self.pairing_inv
        return tuple(CohClass(self, [ginv[i, j] for j in range(self.rank)])
                     for i in range(self.rank))

    # ------------------------------------------------------------ checking

    def _check(self):
        n = self.rank
        if len(self.degrees) != n or len(self.table) != n:
            raise FrobeniusError("basis data sizes disagree")
        for d in self.degrees:
            if d % 2:
                raise FrobeniusError("odd cohomology is not supported")
        if self.pairing.shape != (n, n):
            raise FrobeniusError("pairing has wrong shape")
        for i in range(n):
            for j in range(i, n):
                if self.pairing[i, j] != self.pairing[j, i]:
                    raise FrobeniusError("pairing is not symmetric")
                if self.table[i][j] != self.table[j][i]:
                    raise FrobeniusError("cup table is not commutative")
        basis = [self.basis_at(i) for i in range(n)]
        for i in range(n):
            if (self.unit * basis[i]).coeffs != basis[i].coeffs:
                raise FrobeniusError("unit does not act as identity")
        for i in range(n):
            for j in range(n):
                ij = basis[i] * basis[j]
                for l in range(n):
                    if ((ij * basis[l]).coeffs
                            != (basis[i] * (basis[j] * basis[l])).coeffs):
                        raise FrobeniusError("cup product is not associative")
                    if ij.pair(basis[l]) != basis[i].pair(basis[j] * basis[l]):
                        raise FrobeniusError("pairing is not invariant")
        self._check_grading()

    def _check_grading(self):
        # Degree additivity, checked where it is meaningful: products whose
        # expected degree stays within the top degree of the basis, and
        # structure constants free of the scalar parameters (equivariant
        # parameters carry degree 2 and legitimately mix basis degrees).
        maxdeg = max(self.degrees, default=0)
        for i in range(self.rank):
            for j in range(self.rank):
                want = self.degrees[i] + self.degrees[j]
                if want > maxdeg:
                    continue
                for l, c in enumerate(self.table[i][j]):
                    if not c.is_zero() and c.is_const():
                        if self.degrees[l] != want:
                            raise FrobeniusError(
                                "degree additivity fails at %r*%r"
                                % (self.labels[i], self.labels[j]))


# ---------------------------------------------------------------- grading


class GradingOps:
    """The degree operator and first-Chern-class multiplication.

    The degree operator acts diagonally on basis classes with eigenvalue
    (deg - D)/2, a half-integer; multiplication by c1 raises degree by 2.
    When the pairing is degree-homogeneous (non-equivariant algebras),
    a(z) = mu + rho/z satisfies a(-z)* = -a(z) for the adjoint with
    respect to the pairing.  Equivariant pairings mix basis degrees with
    scalar parameters of degree 2, so the identity only holds there once
    the parameter grading is counted, not as a matrix identity.
    """

    __slots__ = ("alg", "mu", "rho")

    def __init__(self, alg: CohAlgebra):
        self.alg = alg
        eig = [RatFunc.const(alg.vars, Fraction(d - alg.dim, 2))
               for d in alg.degrees]
        self.mu = Mat.diag(eig, alg.vars)
        cols = [alg.c1 * alg.basis_at(j) for j in range(alg.rank)]
        self.rho = Mat([[cols[j].coeffs[i] for j in range(alg.rank)]
                        for i in range(alg.rank)])

    def mu_apply(self, a: CohClass) -> CohClass:
        col = self.mu * Mat.column(a.coeffs)
        return CohClass(self.alg, [col[i, 0] for i in range(self.alg.rank)])

    def rho_apply(self, a: CohClass) -> CohClass:
        return self.alg.c1 * a

    def adjoint(self, m: Mat) -> Mat:
        """Adjoint with respect to the pairing: (Ma, b) = (a, M*b)."""
        return self.alg.pairing_inv * m.transpose() * self.alg.pairing

    def loop_condition_holds(self) -> bool:
        """mu* = -mu and rho* = rho, i.e. a(-z)* = -a(z) for mu + rho/z."""
        return (self.adjoint(self.mu) == -self.mu
                and self.adjoint(self.rho) == self.rho)

    def str_mu_mu_star(self) -> Fraction:
        """Supertrace of mu mu* (ordinary trace here: all degrees even)."""
        m = self.mu * self.adjoint(self.mu)
        total = RatFunc.zero(self.alg.vars)
        for i in range(self.alg.rank):
            total = total + m[i, i]
        return total.const_value()


def loop_data(alg: CohAlgebra, grading: Optional[GradingOps] = None) -> LoopData:
    """Bridge an algebra to the loop-space data used by quantization."""
    if "h" in alg.vars:
        raise FrobeniusError('scalar universe already uses "h"')
    vars = ("h",) + alg.vars
    lift = lambda e: e.with_vars(vars)
    g = grading if grading is not None else GradingOps(alg)
    return LoopData(vars, alg.pairing.map(lift), g.mu.map(lift),
                    g.rho.map(lift), chi=alg.chi)


# ------------------------------------------------------------ constructors


def point_cohomology(vars: Tuple[str, ...] = ()) -> CohAlgebra:
    one = RatFunc.one(vars)
    zero = RatFunc.zero(vars)
    return CohAlgebra(vars, ("1",), (0,), (((one,),),), Mat([[one]]),
                      (one,), (zero,), 0, 1)


def projective_space_cohomology(n: int, vars: Tuple[str, ...] = (),
                                gen: str = "p") -> CohAlgebra:
    """Non-equivariant H*(P^n) = Q[p]/(p^(n+1)) with (p^a, p^(n-a)) = 1."""
    one = RatFunc.one(vars)
    zero = RatFunc.zero(vars)
    labels = ["1"] + [gen if a == 1 else "%s^%d" % (gen, a)
                      for a in range(1, n + 1)]
    degrees = [2 * a for a in range(n + 1)]
    table = [[[one if a + b == l else zero for l in range(n + 1)]
              for b in range(n + 1)] for a in range(n + 1)]
    pairing = Mat([[one if a + b == n else zero for b in range(n + 1)]
                   for a in range(n + 1)])
    unit = [one] + [zero] * n
    c1 = [zero] * (n + 1)
    if n >= 1:
        c1[1] = RatFunc.const(vars, n + 1)
    return CohAlgebra(vars, labels, degrees, table, pairing, unit, c1, n, n + 1)


def tensor_cohomology(a: CohAlgebra, b: CohAlgebra) -> CohAlgebra:
    """Tensor product of algebras over the same scalar universe."""
    if a.vars != b.vars:
        raise FrobeniusError("tensor factors live over different scalars")
    labels = [(la, lb) for la in a.labels for lb in b.labels]
    degrees = [a.degrees[i] + b.degrees[j]
               for i in range(a.rank) for j in range(b.rank)]
    nb = b.rank

    def fuse(ca, cb):
        return [x * y for x in ca for y in cb]

    table = []
    for i in range(a.rank):
        for j in range(b.rank):
            row = []
            for i2 in range(a.rank):
                for j2 in range(b.rank):
                    row.append(fuse(a.table[i][i2], b.table[j][j2]))
            table.append(row)
    pairing = Mat([[a.pairing[i, i2] * b.pairing[j, j2]
                    for i2 in range(a.rank) for j2 in range(b.rank)]
                   for i in range(a.rank) for j in range(b.rank)])
    unit = fuse(a.unit.coeffs, b.unit.coeffs)
    c1 = [x + y for x, y in zip(fuse(a.c1.coeffs, b.unit.coeffs),
                                fuse(a.unit.coeffs, b.c1.coeffs))]
    return CohAlgebra(a.vars, labels, degrees, table, pairing, unit, c1,
                      a.dim + b.dim, a.chi * b.chi)


def specialize(alg: CohAlgebra, assignment: Dict[str, Fraction],
               drop: Tuple[str, ...] = ()) -> CohAlgebra:
    """Substitute scalar parameters (e.g. the non-equivariant limit).

    Raises FrobeniusError if a structure constant has a pole at the
    assignment or the specialized pairing degenerates.
    """
    new_vars = tuple(v for v in alg.vars if v not in drop)
    for name in drop:
        if name not in assignment:
            raise FrobeniusError("dropped variable %r needs a value" % name)

    def conv(e: RatFunc) -> RatFunc:
        try:
            return e.subs(assignment).with_vars(new_vars)
        except ZeroDivisionError:
            raise FrobeniusError("structure constant has a pole at the "
                                 "specialization point")

    table = [[[conv(c) for c in cell] for cell in row] for row in alg.table]
    return CohAlgebra(new_vars, alg.labels, alg.degrees, table,
                      alg.pairing.map(conv), [conv(c) for c in alg.unit.coeffs],
                      [conv(c) for c in alg.c1.coeffs], alg.dim, alg.chi)


def nonequivariant_limit(alg: CohAlgebra, names: Tuple[str, ...]) -> CohAlgebra:
    return specialize(alg, {n: Fraction(0) for n in names}, drop=names)


def extend_scalars(alg: CohAlgebra, extra: Tuple[str, ...]) -> CohAlgebra:
    """The same algebra over a rational-function field with more variables.

    Used to adjoin the loop variable before building z-dependent classes.
    """
    new_vars = alg.vars + tuple(v for v in extra if v not in alg.vars)
    if new_vars == alg.vars:
        return alg

    def conv(e: RatFunc) -> RatFunc:
        return e.with_vars(new_vars)

    table = [[[conv(c) for c in cell] for cell in row] for row in alg.table]
    return CohAlgebra(new_vars, alg.labels, alg.degrees, table,
                      alg.pairing.map(conv), [conv(c) for c in alg.unit.coeffs],
                      [conv(c) for c in alg.c1.coeffs], alg.dim, alg.chi)


def transport(cls: CohClass, target: CohAlgebra, conv=None) -> CohClass:
    """Move a class to an algebra with the same labels, converting scalars.

    The default conversion re-expresses each coefficient over the target's
    variables; pass `conv` for substitutions (specializations, limits).
    """
    if list(cls.alg.labels) != list(target.labels):
        raise FrobeniusError("label mismatch; classes are not comparable")
    if conv is None:
        conv = lambda e: e.with_vars(target.vars)
    return CohClass(target, [conv(c) for c in cls.coeffs])


# ------------------------------------------------------- localized algebras


class LocalizedAlgebra:
    """Direct sum of base-algebra blocks, one per fixed point.

    The cup product is blockwise; the pairing on the block of a fixed
    point is the base pairing weighted by the inverse Euler class of the
    normal bundle there.  Blocks are orthogonal by construction.
    """

    __slots__ = ("points", "base", "eulers", "algebra")

    def __init__(self, points: Sequence, base: CohAlgebra,
                 eulers: Sequence[CohClass], c1_blocks: Sequence[CohClass],
                 dim: int):
        self.points = tuple(points)
        self.base = base
        self.eulers = tuple(eulers)
        nb = base.rank
        labels = [(pt, lb) for pt in self.points for lb in base.labels]
        degrees = [d for _ in self.points for d in base.degrees]
        zero_cell = [RatFunc.zero(base.vars)] * len(labels)
        n = len(labels)
        table = [[None] * n for _ in range(n)]
        for pi in range(len(self.points)):
            off = pi * nb
            for i in range(nb):
                for j in range(nb):
                    cell = list(zero_cell)
                    for l, c in enumerate(base.table[i][j]):
                        cell[off + l] = c
                    table[off + i][off + j] = cell
        for i in range(n):
            for j in range(n):
                if table[i][j] is None:
                    table[i][j] = zero_cell
        zero = RatFunc.zero(base.vars)
        pairing_rows = [[zero] * n for _ in range(n)]
        for pi in range(len(self.points)):
            off = pi * nb
            try:
                einv = self.eulers[pi].inverse()
            except FrobeniusError:
                raise FrobeniusError("Euler class at %r is not invertible"
                                     % (self.points[pi],))
            for i in range(nb):
                bi = base.basis_at(i) * einv
                for j in range(nb):
                    pairing_rows[off + i][off + j] = \
                        bi.pair(base.basis_at(j))
        unit = []
        c1 = []
        for pi in range(len(self.points)):
            unit.extend(base.unit.coeffs)
            c1.extend(c1_blocks[pi].coeffs)
        self.algebra = CohAlgebra(base.vars, labels, degrees, table,
                                  Mat(pairing_rows), unit, c1, dim,
                                  base.chi * len(self.points))

    def idempotent(self, point) -> CohClass:
        return self.from_blocks({point: self.base.unit})

    def block(self, cls: CohClass, point) -> CohClass:
        """Component of a localized class in the block of one fixed point."""
        pi = self.points.index(point)
        nb = self.base.rank
        return CohClass(self.base, cls.coeffs[pi * nb:(pi + 1) * nb])

    def from_blocks(self, blocks: Dict) -> CohClass:
        coeffs = []
        zero = self.base.zero()
        for pt in self.points:
            coeffs.extend(blocks.get(pt, zero).coeffs)
        return CohClass(self.algebra, coeffs)

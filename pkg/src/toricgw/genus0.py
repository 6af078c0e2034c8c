"""Genus-zero engine for toric bundles.

Everything here is a truncated generating series with exact coefficients.
Cohomology classes live in an algebra whose scalar field has the loop
variable z adjoined, and curve degrees are tracked by a capped variable
space of Novikov monomials.  The chain of constructions is: the
hypergeometric series of the bundle (i_function), the quantum product read
off from its second derivatives (extract_quantum_product), the fundamental
solution of the quantum differential equation (qde_solve), and on top of
those the two-variable pairing form, restriction to fixed points with end
contributions, block-canonical coordinates, the block factorization of the
fundamental solution, and cone-tangency tests for loop-space elements.

Small phase space only: parameters range over the span of the unit and the
divisor classes, which is what the divisor and string identities control.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

from .birkhoff import FactorizationError, z_poly_split
from .frobenius import (CohAlgebra, CohClass, FrobeniusError, GradingOps,
                        extend_scalars, projective_space_cohomology)
from .linalg import LinearSolveError, Mat, solve_linear
from .polys import Poly
from .ratfunc import RatFunc
from .series import Key, VarGroup, VarSpace
from .toric import ToricBundleData

__all__ = [
    "AmplenessError", "TruncationError", "Direction", "Frame",
    "VectorSeries", "MatrixSeries", "QuantumProduct", "TangencyResult",
    "i_function", "base_j_series", "projective_j_series",
    "extract_quantum_product", "qde_solve",
    "v_form", "materialize", "end_contribution", "block_coordinate",
    "block_coordinate_ends", "block_factorize", "flat_sections",
    "tangent_basis", "cone_tangency", "loop_operator", "exp_over_z",
]


class TruncationError(RuntimeError):
    """The requested object is not determined at the current caps."""


class AmplenessError(ValueError):
    """A fiber degree direction has nonpositive grading weight, so any
    Novikov degree would receive infinitely many lattice contributions."""


class Direction(NamedTuple):
    """A small-phase-space parameter direction.

    `cls` is the degree-0-or-2 class the direction shifts along; `weights`
    give its pairing with the curve class behind each Novikov variable.
    """
    name: str
    cls: CohClass
    weights: Dict[str, Fraction]


class Frame:
    """Shared context for one family of series: the target algebra with
    the loop variable adjoined, the Novikov variable space, and the
    parameter directions."""

    __slots__ = ("alg", "space", "zvar", "dirs", "_dir_index")

    def __init__(self, alg: CohAlgebra, space: VarSpace, zvar: str,
                 dirs: Sequence[Direction] = ()):
        if zvar not in alg.vars:
            raise ValueError("loop variable %r missing from scalars" % zvar)
        self.alg = alg
        self.space = space
        self.zvar = zvar
        self.dirs = tuple(dirs)
        self._dir_index = {d.name: d for d in self.dirs}

    def z(self) -> RatFunc:
        return RatFunc.variable(self.alg.vars, self.zvar)

    def direction(self, name: str) -> Direction:
        try:
            return self._dir_index[name]
        except KeyError:
            raise KeyError("unknown parameter direction %r" % name)

    def key_weight(self, key: Key, direction: Direction) -> Fraction:
        """Pairing of the direction with the curve class of a Novikov key."""
        total = Fraction(0)
        for nov, w in direction.weights.items():
            total += w * key[self.space._index[nov]]
        return total

    def pairing_inv(self) -> Mat:
        return self.alg.pairing_inv

    def keys(self) -> List[Key]:
        """All admissible keys, graded by total degree."""
        ranges = [range(g.cap + 1) for g in self.space.groups
                  for _ in g.names]
        out = [k for k in itertools.product(*ranges)
               if self.space.admissible(k)]
        out.sort(key=lambda k: (sum(k), k))
        return out

    def with_space(self, space: VarSpace,
                   dirs: Optional[Sequence[Direction]] = None) -> "Frame":
        return Frame(self.alg, space, self.zvar,
                     self.dirs if dirs is None else dirs)


# --------------------------------------------------------- vector series


class VectorSeries:
    """Novikov-indexed family of cohomology classes."""

    __slots__ = ("frame", "terms")

    def __init__(self, frame: Frame, terms: Dict[Key, CohClass]):
        self.frame = frame
        self.terms = {k: c for k, c in terms.items() if not c.is_zero()}

    @staticmethod
    def zero(frame: Frame) -> "VectorSeries":
        return VectorSeries(frame, {})

    def coeff(self, exponents: Dict[str, int]) -> CohClass:
        key = self.frame.space.key_of(exponents)
        return self.terms.get(key, self.frame.alg.zero())

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return (isinstance(other, VectorSeries) and self.frame is other.frame
                and self.terms == other.terms)

    def __add__(self, other: "VectorSeries") -> "VectorSeries":
        d = dict(self.terms)
        for k, c in other.terms.items():
            d[k] = d[k] + c if k in d else c
        return VectorSeries(self.frame, d)

    def __neg__(self) -> "VectorSeries":
        return VectorSeries(self.frame, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "VectorSeries") -> "VectorSeries":
        return self + (-other)

    def cmul(self, c: RatFunc) -> "VectorSeries":
        return self.map_classes(lambda cls: cls.scale(c))

    def scale(self, q) -> "VectorSeries":
        return self.cmul(RatFunc.const(self.frame.alg.vars, q))

    def cup(self, cls: CohClass) -> "VectorSeries":
        return self.map_classes(lambda c: c * cls)

    def zmul(self) -> "VectorSeries":
        return self.cmul(self.frame.z())

    def zdiv(self) -> "VectorSeries":
        return self.cmul(self.frame.z().inv())

    def map_classes(self, f: Callable[[CohClass], CohClass]) -> "VectorSeries":
        return VectorSeries(self.frame, {k: f(c) for k, c in self.terms.items()})

    def map_coeffs(self, f: Callable[[RatFunc], RatFunc]) -> "VectorSeries":
        alg = self.frame.alg
        return self.map_classes(
            lambda cls: CohClass(alg, [f(c) for c in cls.coeffs]))

    def flip_z(self) -> "VectorSeries":
        return self.map_coeffs(lambda c: c.flip_sign(self.frame.zvar))

    def infinity_plus_part(self) -> "VectorSeries":
        """Drop everything that vanishes at z = infinity."""
        zv = self.frame.zvar
        return self.map_coeffs(lambda c: z_poly_split(c, zv)[0])

    def regular_at_zero(self) -> "VectorSeries":
        """Drop the principal part of the Laurent expansion at z = 0."""
        zv = self.frame.zvar
        return self.map_coeffs(lambda c: _regular_at_zero(c, zv))

    def deriv(self, name: str) -> "VectorSeries":
        """Derivative along a parameter direction.

        If the direction has been materialized as a series variable this is
        the formal partial derivative; otherwise the divisor identity
        (cup product over z plus the degree weight) computes it.
        """
        if name in self.frame.space._index:
            return self._formal_deriv(name)
        return self._divisor_deriv(name)

    def _formal_deriv(self, name: str) -> "VectorSeries":
        pos = self.frame.space._index[name]
        d: Dict[Key, CohClass] = {}
        for k, c in self.terms.items():
            if k[pos] == 0:
                continue
            kk = k[:pos] + (k[pos] - 1,) + k[pos + 1:]
            scaled = c.scale(k[pos])
            d[kk] = d[kk] + scaled if kk in d else scaled
        return VectorSeries(self.frame, d)

    def _divisor_deriv(self, name: str) -> "VectorSeries":
        dirn = self.frame.direction(name)
        zinv = self.frame.z().inv()
        d: Dict[Key, CohClass] = {}
        for k, c in self.terms.items():
            val = (c * dirn.cls).scale(zinv)
            w = self.frame.key_weight(k, dirn)
            if w:
                val = val + c.scale(w)
            if not val.is_zero():
                d[k] = val
        return VectorSeries(self.frame, d)

    def convolve(self, scal: Dict[Key, RatFunc]) -> "VectorSeries":
        """Multiply by a scalar series."""
        space = self.frame.space
        d: Dict[Key, CohClass] = {}
        for k1, c in self.terms.items():
            for k2, s in scal.items():
                k = space.combine(k1, k2)
                if k is None or s.is_zero():
                    continue
                v = c.scale(s)
                d[k] = d[k] + v if k in d else v
        return VectorSeries(self.frame, d)

    def __repr__(self):
        bits = []
        for k in sorted(self.terms):
            mono = "*".join("%s^%d" % (n, e) for n, e in
                            zip(self.frame.space.names, k) if e)
            bits.append("[%s] %r" % (mono or "1", self.terms[k]))
        return "VectorSeries(" + "; ".join(bits) + ")"


def _regular_at_zero(f: RatFunc, zvar: str) -> RatFunc:
    if f.is_zero() or f.z_valuation(zvar) >= 0:
        return f
    val = f.z_valuation(zvar)
    zpow = RatFunc.variable(f.vars, zvar)
    out = f
    for e, c in f.laurent_at_zero(zvar, val, -1).items():
        out = out - c * zpow ** e
    return out


# --------------------------------------------------------- scalar series


def scal_mul(space: VarSpace, a: Dict[Key, RatFunc],
             b: Dict[Key, RatFunc]) -> Dict[Key, RatFunc]:
    d: Dict[Key, RatFunc] = {}
    for k1, x in a.items():
        for k2, y in b.items():
            k = space.combine(k1, k2)
            if k is None:
                continue
            v = x * y
            d[k] = d[k] + v if k in d else v
    return {k: v for k, v in d.items() if not v.is_zero()}


def scal_invert(space: VarSpace, a: Dict[Key, RatFunc],
                keys: Sequence[Key]) -> Dict[Key, RatFunc]:
    lead = a.get(space.zero_key)
    if lead is None or lead.is_zero():
        raise TruncationError("scalar series has no invertible leading term")
    inv = {space.zero_key: lead.inv()}
    for key in keys:
        if sum(key) == 0:
            continue
        acc = None
        for k1, x in a.items():
            if sum(k1) == 0:
                continue
            k2 = tuple(p - q for p, q in zip(key, k1))
            if any(e < 0 for e in k2) or k2 not in inv:
                continue
            v = x * inv[k2]
            acc = v if acc is None else acc + v
        if acc is not None and not acc.is_zero():
            inv[key] = -(lead.inv()) * acc
    return inv


def exp_over_z(space: VarSpace, scal: Dict[Key, RatFunc], zvar: str,
               vars: Tuple[str, ...]) -> Dict[Key, RatFunc]:
    """exp(u/z) for a scalar series u with no constant term."""
    if space.zero_key in scal and not scal[space.zero_key].is_zero():
        raise ValueError("exponent has a constant term")
    one = RatFunc.one(vars)
    zinv = RatFunc.variable(vars, zvar).inv()
    acc = {space.zero_key: one}
    layer = {space.zero_key: one}
    for n in range(1, space.total_cap() + 1):
        layer = scal_mul(space, layer, scal)
        layer = {k: v * zinv.scale(Fraction(1, n)) for k, v in layer.items()}
        if not layer:
            break
        for k, v in layer.items():
            acc[k] = acc[k] + v if k in acc else v
    return {k: v for k, v in acc.items() if not v.is_zero()}


# --------------------------------------------------------- matrix series


class MatrixSeries:
    """Novikov-indexed family of endomorphisms in the chosen basis.

    Used both for fundamental solutions (identity plus negative z-powers)
    and for their block quotients (regular at z = 0)."""

    __slots__ = ("frame", "terms")

    def __init__(self, frame: Frame, terms: Dict[Key, Mat]):
        self.frame = frame
        self.terms = {k: m for k, m in terms.items() if not m.is_zero()}

    @staticmethod
    def identity(frame: Frame) -> "MatrixSeries":
        n = frame.alg.rank
        return MatrixSeries(frame,
                            {frame.space.zero_key: Mat.identity(n, frame.alg.vars)})

    def coeff(self, exponents: Dict[str, int]) -> Mat:
        key = self.frame.space.key_of(exponents)
        n = self.frame.alg.rank
        return self.terms.get(key, Mat.zero(n, n, self.frame.alg.vars))

    def map_entries(self, f) -> "MatrixSeries":
        return MatrixSeries(self.frame,
                            {k: m.map(f) for k, m in self.terms.items()})

    def flip_z(self) -> "MatrixSeries":
        return MatrixSeries(self.frame,
                            {k: m.flip_sign(self.frame.zvar)
                             for k, m in self.terms.items()})

    def adjoint(self) -> "MatrixSeries":
        """Transpose with respect to the algebra's pairing."""
        g = self.frame.alg.pairing
        ginv = self.frame.pairing_inv()
        return MatrixSeries(self.frame,
                            {k: ginv * m.transpose() * g
                             for k, m in self.terms.items()})

    def compose(self, other: "MatrixSeries") -> "MatrixSeries":
        space = self.frame.space
        d: Dict[Key, Mat] = {}
        for k1, a in self.terms.items():
            for k2, b in other.terms.items():
                k = space.combine(k1, k2)
                if k is None:
                    continue
                v = a * b
                d[k] = d[k] + v if k in d else v
        return MatrixSeries(self.frame, d)

    def __sub__(self, other: "MatrixSeries") -> "MatrixSeries":
        d = dict(self.terms)
        for k, m in other.terms.items():
            d[k] = d[k] - m if k in d else -m
        return MatrixSeries(self.frame, d)

    def apply_class(self, cls: CohClass) -> VectorSeries:
        col = Mat.column(cls.coeffs)
        out: Dict[Key, CohClass] = {}
        for k, m in self.terms.items():
            prod = m * col
            out[k] = CohClass(self.frame.alg,
                              [prod[i, 0] for i in range(self.frame.alg.rank)])
        return VectorSeries(self.frame, out)

    def apply(self, vs: VectorSeries) -> VectorSeries:
        space = self.frame.space
        out: Dict[Key, CohClass] = {}
        for k1, m in self.terms.items():
            for k2, cls in vs.terms.items():
                k = space.combine(k1, k2)
                if k is None:
                    continue
                prod = m * Mat.column(cls.coeffs)
                v = CohClass(self.frame.alg,
                             [prod[i, 0] for i in range(self.frame.alg.rank)])
                out[k] = out[k] + v if k in out else v
        return VectorSeries(self.frame, out)

    def keyed_inverse(self) -> "MatrixSeries":
        """Inverse of a series whose leading key is the identity."""
        zero = self.frame.space.zero_key
        n = self.frame.alg.rank
        if self.terms.get(zero) != Mat.identity(n, self.frame.alg.vars):
            raise FactorizationError("leading term is not the identity")
        inv: Dict[Key, Mat] = {zero: self.terms[zero]}
        for key in self.frame.keys():
            if sum(key) == 0:
                continue
            acc = None
            for k1, m in self.terms.items():
                if sum(k1) == 0:
                    continue
                k2 = tuple(p - q for p, q in zip(key, k1))
                if any(e < 0 for e in k2) or k2 not in inv:
                    continue
                v = m * inv[k2]
                acc = v if acc is None else acc + v
            if acc is not None:
                inv[key] = -acc
        return MatrixSeries(self.frame, inv)

    def fundamental_vector(self) -> VectorSeries:
        """z S* applied to the unit: recovers the cone point the solution
        was built from."""
        return self.adjoint().apply_class(self.frame.alg.unit).zmul()

    def unitarity_defect(self) -> Dict[Key, Mat]:
        """S(z) S(-z)* minus the identity, key by key."""
        star = self.adjoint().flip_z()
        prod = self.compose(star)
        n = self.frame.alg.rank
        ident = Mat.identity(n, self.frame.alg.vars)
        zero = self.frame.space.zero_key
        out = dict(prod.terms)
        out[zero] = out.get(zero, Mat.zero(n, n, self.frame.alg.vars)) - ident
        return {k: m for k, m in out.items() if not m.is_zero()}


# ------------------------------------------------------------- I-function


def base_j_series(data: ToricBundleData, space: VarSpace, base_z: CohAlgebra,
                  zvar: str) -> Dict[Tuple[int, ...], CohClass]:
    """Closed-form J-series coefficients of the base, per curve degree.

    Supports a point (the series is z alone) and a projective space with a
    single effective generator.  Other bases must be passed in explicitly.
    """
    base = data.base
    z = RatFunc.variable(base_z.vars, zvar)
    if not base.curves:
        return {(): base_z.unit.scale(z)}
    deg2 = [l for l, d in zip(base_z.labels, base_z.degrees) if d == 2]
    expected = list(range(0, 2 * base_z.rank, 2))
    if (len(base.curves) != 1 or len(deg2) != 1
            or sorted(base_z.degrees) != expected):
        raise ValueError("no closed base J-series here; pass base_j")
    h = base_z.basis(deg2[0])
    cap = next(g.cap for g in space.groups if g.label == "Q")
    out = {}
    cur = base_z.unit.scale(z)
    out[(0,)] = cur
    for b in range(1, cap + 1):
        step = h + base_z.unit.scale(z.scale(b))
        inv = step.inverse()
        for _ in range(base_z.rank):
            cur = cur * inv
        out[(b,)] = cur
    return out


def projective_j_series(dim: int, cap: int, zvar: str = "z",
                        gen: str = "p") -> VectorSeries:
    """Small J-series of a plain projective space, no torus action.

    Degree-d coefficient: z times the (dim+1)-st inverse power of the
    ladder product over (gen + m z), m = 1..d.
    """
    alg = extend_scalars(projective_space_cohomology(dim, (), gen), (zvar,))
    space = VarSpace([VarGroup("q", ("q1",), cap)])
    z = RatFunc.variable(alg.vars, zvar)
    h = alg.basis(gen)
    terms: Dict[Key, CohClass] = {(0,): alg.unit.scale(z)}
    cur = terms[(0,)]
    for d in range(1, cap + 1):
        inv = (h + alg.unit.scale(z.scale(d))).inverse()
        for _ in range(dim + 1):
            cur = cur * inv
        terms[(d,)] = cur
    dirs = [Direction("t0", alg.unit, {}),
            Direction("t1", h, {"q1": Fraction(1)})]
    frame = Frame(alg, space, zvar, dirs)
    return VectorSeries(frame, {k: c for k, c in terms.items()
                                if not c.is_zero()})


def _unit_label_index(alg: CohAlgebra) -> int:
    hits = [i for i, c in enumerate(alg.unit.coeffs) if not c.is_zero()]
    if len(hits) != 1 or alg.unit.coeffs[hits[0]] != RatFunc.one(alg.vars):
        raise FrobeniusError("unit is not a basis element in this basis")
    return hits[0]


def i_function(data: ToricBundleData, fiber_cap: int, base_cap: int = 0,
               zvar: str = "z", base_j=None) -> VectorSeries:
    """Hypergeometric series of the bundle on the small parameter space.

    Stored at parameter zero; the unit and divisor directions, with their
    Novikov weights, ride along in the frame so that derivatives and
    materialized parameters are exact.
    """
    k, n = data.k, data.N
    for i in range(k):
        if sum(data.m[i]) <= 0:
            raise AmplenessError(
                "fiber direction %d has grading weight %d" %
                (i + 1, sum(data.m[i])))
    base = data.base
    qnames = tuple("q%d" % (i + 1) for i in range(k))
    groups = []
    if qnames:
        groups.append(VarGroup("q", qnames, fiber_cap))
    qbnames = tuple("Q%d" % (b + 1) for b in range(len(base.curves)))
    if qbnames:
        groups.append(VarGroup("Q", qbnames, base_cap))
    space = VarSpace(groups)

    alg = extend_scalars(data.global_algebra(), (zvar,))
    base_z = extend_scalars(base.algebra, (zvar,))
    z = RatFunc.variable(alg.vars, zvar)

    # embeddings of base classes along the zero monomial
    zero_mono = (0,) * k
    buidx = _unit_label_index(base_z)
    gl_index = {lab: i for i, lab in enumerate(alg.labels)}

    def embed(cls: CohClass) -> CohClass:
        out = [RatFunc.zero(alg.vars)] * alg.rank
        for bl, c in zip(base_z.labels, cls.coeffs):
            if not c.is_zero():
                out[gl_index[(zero_mono, bl)]] = c
        return CohClass(alg, out)

    unit_mono = [tuple(1 if j == i else 0 for j in range(k)) for i in range(k)]
    for mono in unit_mono:
        if (mono, base_z.labels[buidx]) not in gl_index:
            raise FrobeniusError("degree-one monomials missing from the "
                                 "global basis")
    p_cls = [alg.basis((mono, base_z.labels[buidx])) for mono in unit_mono]
    lam_emb = [embed(CohClass(base_z, [c.with_vars(base_z.vars)
                                       for c in lam.coeffs]))
               for lam in base.lambdas]
    u_cls = []
    for j in range(n):
        acc = alg.zero()
        for i in range(k):
            if data.m[i][j]:
                acc = acc + p_cls[i].scale(data.m[i][j])
        acc = acc - lam_emb[j]
        acc = acc - alg.unit.scale(RatFunc.variable(alg.vars,
                                                    data.lambda_names[j]))
        u_cls.append(acc)

    if base_j is None:
        base_j = base_j_series(data, space, base_z, zvar)

    lam_curve = [[None] * len(base.curves) for _ in range(n)]
    for j in range(n):
        for b in range(len(base.curves)):
            v = data.base.integrate_curve(b, base.lambdas[j])
            if v.denominator != 1:
                raise ValueError("non-integral twisting degree")
            lam_curve[j][b] = int(v)

    inv_cache: Dict[Tuple[int, int], CohClass] = {}

    def ladder(j: int, c: int) -> Optional[CohClass]:
        """Ratio of the U_j weight products for total degree c."""
        if c == 0:
            return None
        acc = alg.unit
        if c >= 1:
            for m in range(1, c + 1):
                if (j, m) not in inv_cache:
                    inv_cache[(j, m)] = (u_cls[j]
                                         + alg.unit.scale(z.scale(m))).inverse()
                acc = acc * inv_cache[(j, m)]
        else:
            for m in range(c + 1, 1):
                acc = acc * (u_cls[j] + alg.unit.scale(z.scale(m)))
        return acc

    terms: Dict[Key, CohClass] = {}
    dummy_frame = Frame(alg, space, zvar)
    for key in dummy_frame.keys():
        d = space.group_exponents(key, "q") if qnames else ()
        beta = space.group_exponents(key, "Q") if qbnames else ()
        jb = base_j.get(beta)
        if jb is None:
            continue
        cls = embed(jb)
        for j in range(n):
            c = sum(d[i] * data.m[i][j] for i in range(k))
            c -= sum(beta[b] * lam_curve[j][b] for b in range(len(beta)))
            lad = ladder(j, c)
            if lad is not None:
                cls = cls * lad
        if not cls.is_zero():
            terms[key] = cls

    dirs = [Direction("t0", alg.unit, {})]
    for i in range(k):
        dirs.append(Direction("t%d" % (i + 1), p_cls[i],
                              {qnames[i]: Fraction(1)}))
    deg2 = [l for l, dg in zip(base_z.labels, base_z.degrees) if dg == 2]
    for c_pos, lab in enumerate(deg2):
        weights = {qbnames[b]: Fraction(base.curves[b][c_pos])
                   for b in range(len(base.curves))
                   if base.curves[b][c_pos]}
        dirs.append(Direction("s%d" % (c_pos + 1),
                              embed(base_z.basis(lab)), weights))
    frame = Frame(alg, space, zvar, dirs)
    return VectorSeries(frame, terms)


# ------------------------------------------------------- quantum product


class QuantumProduct:
    """Structure constants of the parameter-dependent product, together
    with the family of flat derivatives of the series they were read from.

    `tensor[(dir, label)]` is the series of classes `direction * phi_label`;
    `flat[label]` is the corresponding derivative of the source series.
    """

    __slots__ = ("frame", "flat", "tensor", "unit_index")

    def __init__(self, frame: Frame, flat, tensor, unit_index: int):
        self.frame = frame
        self.flat = flat
        self.tensor = tensor
        self.unit_index = unit_index

    def matrix(self, dirname: str) -> Dict[Key, Mat]:
        """Matrix series of multiplication by a direction's class."""
        alg = self.frame.alg
        cols = [self.tensor[(dirname, lab)] for lab in alg.labels]
        keys = set()
        for col in cols:
            keys.update(col)
        out = {}
        for key in keys:
            zero = RatFunc.zero(alg.vars)
            out[key] = Mat([[col.get(key).coeffs[i] if key in col else zero
                             for col in cols] for i in range(alg.rank)])
        return out

    def product_series(self, dirname: str, label) -> Dict[Key, CohClass]:
        return self.tensor[(dirname, label)]


def extract_quantum_product(j: VectorSeries) -> QuantumProduct:
    """Read the quantum product off the second derivatives of a cone point.

    z d_u d_v J is the flat family attached to u * v; its nonnegative part
    in z recovers the product itself.  Divisor directions generate: the
    remaining flat families are solved for one cup-degree at a time, and
    every extracted relation is re-verified before returning.
    """
    frame = j.frame
    alg = frame.alg
    unit_index = _unit_label_index(alg)
    flat: Dict[object, VectorSeries] = {}
    flat[alg.labels[unit_index]] = j.zdiv()
    div_dirs = []
    for d in frame.dirs:
        if d.cls == alg.unit:
            continue
        hits = [i for i, c in enumerate(d.cls.coeffs)
                if c == RatFunc.one(alg.vars)]
        if len(hits) != 1 or not all(c.is_zero() for i, c in
                                     enumerate(d.cls.coeffs) if i != hits[0]):
            raise FrobeniusError("direction %r is not a basis divisor" % d.name)
        # the divisor identity, not the formal shift: exact at the top
        # layer of materialized parameters as well, and every member of
        # the flat family is a parameter derivative of the same point
        flat[alg.labels[hits[0]]] = j._divisor_deriv(d.name)
        div_dirs.append(d)

    tensor: Dict[Tuple[str, object], Dict[Key, CohClass]] = {}
    raw: Dict[Tuple[str, object], VectorSeries] = {}

    def record(dirname: str, label) -> Dict[Key, CohClass]:
        f = flat[label]._divisor_deriv(dirname).zmul()
        raw[(dirname, label)] = f
        pos = f.infinity_plus_part()
        for cls in pos.terms.values():
            for c in cls.coeffs:
                if c.has_var(frame.zvar):
                    raise TruncationError(
                        "product extraction left z-dependence behind")
        tensor[(dirname, label)] = pos.terms
        return pos.terms

    progress = True
    while progress:
        progress = False
        for d in div_dirs:
            for label in list(flat):
                if (d.name, label) in tensor:
                    continue
                prod = record(d.name, label)
                progress = True
                classical = prod.get(frame.space.zero_key)
                if classical is None:
                    continue
                unknown = [i for i, c in enumerate(classical.coeffs)
                           if not c.is_zero()
                           and alg.labels[i] not in flat]
                if len(unknown) != 1:
                    continue
                mu = unknown[0]
                scal = {k: cls.coeffs[mu] for k, cls in prod.items()
                        if not cls.coeffs[mu].is_zero()}
                w = raw[(d.name, label)]
                for i, lab in enumerate(alg.labels):
                    if i == mu or lab not in flat:
                        continue
                    comp = {k: cls.coeffs[i] for k, cls in prod.items()
                            if not cls.coeffs[i].is_zero()}
                    if comp:
                        w = w - flat[lab].convolve(comp)
                inv = scal_invert(frame.space, scal, frame.keys())
                flat[alg.labels[mu]] = w.convolve(inv)

    missing = [lab for lab in alg.labels if lab not in flat]
    if missing:
        raise TruncationError("divisor derivatives do not reach %r at these "
                              "caps" % (missing,))
    for d in div_dirs:
        for label in alg.labels:
            if (d.name, label) not in tensor:
                record(d.name, label)

    # re-verify every relation now that the full family is known
    for (dirname, label), prod in tensor.items():
        acc = VectorSeries.zero(frame)
        for i, lab in enumerate(alg.labels):
            comp = {k: cls.coeffs[i] for k, cls in prod.items()
                    if not cls.coeffs[i].is_zero()}
            if comp:
                acc = acc + flat[lab].convolve(comp)
        if acc != raw[(dirname, label)]:
            raise TruncationError("flat family of %r * %r is inconsistent; "
                                  "raise the caps" % (dirname, label))
    return QuantumProduct(frame, flat, tensor, unit_index)


# --------------------------------------------------- fundamental solution


def qde_solve(product: QuantumProduct) -> MatrixSeries:
    """Unique solution S = Id + O(1/z) of z dS = (v *) S.

    Keys with materialized parameter exponents integrate directly; pure
    Novikov keys are solved through the divisor identity, which turns the
    equation into an invertible Sylvester system.
    """
    frame = product.frame
    alg = frame.alg
    n = alg.rank
    z = frame.z()
    zero = frame.space.zero_key
    mats = {}
    for d in frame.dirs:
        if d.cls == alg.unit:
            mats[d.name] = {zero: Mat.identity(n, alg.vars)}
        else:
            mats[d.name] = product.matrix(d.name)
    s_terms: Dict[Key, Mat] = {zero: Mat.identity(n, alg.vars)}

    def conv(a: Dict[Key, Mat], key: Key, skip_zero: bool) -> Optional[Mat]:
        acc = None
        for k1, m in a.items():
            if skip_zero and sum(k1) == 0:
                continue
            k2 = tuple(p - q for p, q in zip(key, k1))
            if any(e < 0 for e in k2) or k2 not in s_terms:
                continue
            v = m * s_terms[k2]
            acc = v if acc is None else acc + v
        return acc

    for key in frame.keys():
        if sum(key) == 0:
            continue
        placed = False
        for d in frame.dirs:
            if d.name not in frame.space._index:
                continue
            pos = frame.space._index[d.name]
            if key[pos] == 0:
                continue
            below = key[:pos] + (key[pos] - 1,) + key[pos + 1:]
            rhs = conv(mats[d.name], below, skip_zero=False)
            if rhs is None:
                rhs = Mat.zero(n, n, alg.vars)
            s_terms[key] = rhs.smul((z.scale(key[pos])).inv())
            placed = True
            break
        if placed:
            continue
        pick = None
        for d in frame.dirs:
            w = frame.key_weight(key, d)
            if w:
                pick = (d, w)
                break
        if pick is None:
            raise TruncationError("no parameter direction pairs with key %r"
                                  % (key,))
        d, w = pick
        rhs = conv(mats[d.name], key, skip_zero=True)
        if rhs is None:
            rhs = Mat.zero(n, n, alg.vars)
        m0 = mats[d.name].get(zero, Mat.zero(n, n, alg.vars))
        s_terms[key] = _sylvester_solve(z.scale(w), m0, rhs)

    s = MatrixSeries(frame, s_terms)
    _check_flat(product, s, mats)
    return s


def _sylvester_solve(c: RatFunc, m: Mat, rhs: Mat) -> Mat:
    """Solve c X - M X + X M = RHS by vectorizing."""
    n = m.shape[0]
    zero = RatFunc.zero(c.vars)
    rows = []
    vec = []
    for i in range(n):
        for jj in range(n):
            row = [zero] * (n * n)
            row[i * n + jj] = row[i * n + jj] + c
            for s in range(n):
                row[s * n + jj] = row[s * n + jj] - m[i, s]
                row[i * n + s] = row[i * n + s] + m[s, jj]
            rows.append(row)
            vec.append(rhs[i, jj])
    sol = solve_linear(rows, vec)
    return Mat([[sol[i * n + jj] for jj in range(n)] for i in range(n)])


def _check_flat(product: QuantumProduct, s: MatrixSeries, mats) -> None:
    """Verify every direction's equation on the solved family.

    Solving used one direction per key; flatness of the connection makes
    the rest automatic in exact arithmetic, so a failure here means the
    extracted product itself was inconsistent."""
    frame = product.frame
    z = frame.z()
    n = frame.alg.rank
    zmat = Mat.zero(n, n, frame.alg.vars)
    for d in frame.dirs:
        a = mats[d.name]
        m0 = a.get(frame.space.zero_key, zmat)
        materialized = d.name in frame.space._index
        for key in frame.keys():
            rhs = zmat
            for k1, m in a.items():
                k2 = tuple(p - q for p, q in zip(key, k1))
                if any(e < 0 for e in k2) or k2 not in s.terms:
                    continue
                rhs = rhs + m * s.terms[k2]
            if materialized:
                pos = frame.space._index[d.name]
                up = key[:pos] + (key[pos] + 1,) + key[pos + 1:]
                if not frame.space.admissible(up):
                    continue
                got = s.terms.get(up, zmat)
                lhs = got.smul(z.scale(key[pos] + 1))
            else:
                # stored at parameter zero: the derivative is the Novikov
                # weight plus a cup product that moves to the other side
                cur = s.terms.get(key, zmat)
                w = frame.key_weight(key, d)
                lhs = cur.smul(z.scale(w)) + cur * m0
            if lhs != rhs:
                raise TruncationError("connection is not flat along %r"
                                      % d.name)


# ------------------------------------------------------------ V-form


class VForm(NamedTuple):
    frame: Frame
    wvar: str
    terms: Dict[Key, Mat]

    def bilinear(self) -> Dict[Key, Mat]:
        vars_w = self.terms[self.frame.space.zero_key][0, 0].vars
        g = self.frame.alg.pairing.map(lambda e: e.with_vars(vars_w))
        return {k: g * m for k, m in self.terms.items()}


def v_form(s: MatrixSeries, wvar: str = "w") -> VForm:
    """Two-variable form S*(w) S(z) / (w + z); the division is checked to
    be exact (the numerator vanishes at w = -z) before it happens."""
    frame = s.frame
    alg = frame.alg
    if wvar in alg.vars:
        raise ValueError("second loop variable %r already in use" % wvar)
    vars_w = alg.vars + (wvar,)
    zpoly = RatFunc.variable(vars_w, frame.zvar)
    wpoly = RatFunc.variable(vars_w, wvar)
    w_of_z = Poly.variable(vars_w, wvar)
    minus_z = Poly.variable(vars_w, frame.zvar).scale(-1)

    star = s.adjoint()
    n = alg.rank
    space = frame.space
    num: Dict[Key, Mat] = {}
    for k1, a in star.terms.items():
        aw = a.map(lambda e: e.with_vars(vars_w).subs({frame.zvar: w_of_z}))
        for k2, b in s.terms.items():
            k = space.combine(k1, k2)
            if k is None:
                continue
            v = aw * b.map(lambda e: e.with_vars(vars_w))
            num[k] = num[k] + v if k in num else v
    ident = Mat.identity(n, vars_w)
    zero_mat = Mat.zero(n, n, vars_w)
    out = {}
    for k, m in num.items():
        expect = ident if sum(k) == 0 else zero_mat
        probe = m.map(lambda e: e.subs({wvar: minus_z}))
        if probe != expect:
            raise FrobeniusError("(w+z)-division is not exact: the solution "
                                 "is not unitary at these caps")
        out[k] = m.smul((wpoly + zpoly).inv())
    return VForm(frame, wvar, out)


# -------------------------------------------------------- materialization


def materialize(vs: VectorSeries, names: Sequence[str], cap: int,
                label: str = "t") -> VectorSeries:
    """Expand the dependence on the listed parameter directions as honest
    truncated polynomial variables (one series variable per direction)."""
    frame = vs.frame
    for g in frame.space.groups:
        if g.label == label:
            raise ValueError("group %r already present" % label)
    space = VarSpace(frame.space.groups + (VarGroup(label, tuple(names), cap),))
    pad = (0,) * len(names)
    nframe = frame.with_space(space)
    lifted = VectorSeries(nframe, {k + pad: c for k, c in vs.terms.items()})
    acc = lifted
    layer = lifted
    for nstep in range(1, cap + 1):
        nxt = VectorSeries.zero(nframe)
        for name in names:
            d = layer._divisor_deriv(name)
            shifted = VectorSeries(
                nframe,
                {space.combine(k, space.unit_key(name)): c
                 for k, c in d.terms.items()
                 if space.combine(k, space.unit_key(name)) is not None})
            nxt = nxt + shifted
        layer = nxt.scale(Fraction(1, nstep))
        if layer.is_zero():
            break
        acc = acc + layer
    return acc


# ------------------------------------------------ fixed-point restriction


def restriction_classes(data: ToricBundleData, alpha: Tuple[int, ...],
                        base_z: CohAlgebra) -> List[CohClass]:
    """Value of each global basis element at one fixed point."""
    r = data.restrictions(alpha)
    lift = [CohClass(base_z, [c.with_vars(base_z.vars) for c in p.coeffs])
            for p in r.P]
    out = []
    for mono, bl in data.global_algebra().labels:
        cls = base_z.basis(bl)
        for i, e in enumerate(mono):
            for _ in range(e):
                cls = cls * lift[i]
        out.append(cls)
    return out


def restrict_series(vs: VectorSeries, data: ToricBundleData,
                    alpha: Tuple[int, ...]) -> VectorSeries:
    frame = vs.frame
    base_z = extend_scalars(data.base.algebra, (frame.zvar,))
    rcls = restriction_classes(data, alpha, base_z)
    bframe = Frame(base_z, frame.space, frame.zvar)
    terms: Dict[Key, CohClass] = {}
    for k, cls in vs.terms.items():
        acc = base_z.zero()
        for c, rc in zip(cls.coeffs, rcls):
            if not c.is_zero():
                acc = acc + rc.scale(c)
        if not acc.is_zero():
            terms[k] = acc
    return VectorSeries(bframe, terms)


def end_contribution(j: VectorSeries, data: ToricBundleData,
                     alpha: Tuple[int, ...]) -> VectorSeries:
    """Contribution of all chains hanging off a fixed point: z plus the
    power-series part (at z = 0) of the restricted series at -z."""
    restricted = restrict_series(j, data, alpha)
    reg = restricted.flip_z().regular_at_zero()
    z = restricted.frame.z()
    zcls = restricted.frame.alg.unit.scale(z)
    zero = restricted.frame.space.zero_key
    terms = dict(reg.terms)
    terms[zero] = terms[zero] + zcls if zero in terms else zcls
    return VectorSeries(restricted.frame, terms)


# ------------------------------------------- block-canonical coordinates


def block_coordinate(eps: VectorSeries, s_provider) -> Dict[Key, RatFunc]:
    """Parameter moving the block theory onto a given end contribution.

    Solved from the characterization: the nonnegative part at z = 0 of
    S(u, z) applied to (eps - u) starts at z^1.  Rank-one blocks only.
    """
    frame = eps.frame
    if frame.alg.rank != 1:
        raise ValueError("block coordinates are per fixed point; restrict "
                         "to a rank-one block first")
    zvar = frame.zvar
    epss = {k: c.coeffs[0] for k, c in eps.terms.items()}
    u: Dict[Key, RatFunc] = {}
    for key in frame.keys():
        if sum(key) == 0:
            val = epss.get(key)
            if val is not None and not val.is_zero():
                u[key] = _z_zero_coeff(val, zvar)
            continue
        s = s_provider(u)
        total = None
        for k1, sv in s.items():
            k2 = tuple(p - q for p, q in zip(key, k1))
            if any(e < 0 for e in k2):
                continue
            dv = epss.get(k2)
            if dv is None and k2 not in u:
                continue
            d = (dv if dv is not None
                 else RatFunc.zero(frame.alg.vars))
            if k2 in u:
                d = d - u[k2]
            if d.is_zero():
                continue
            v = sv * d
            total = v if total is None else total + v
        if total is not None and not total.is_zero():
            c0 = _z_zero_coeff(total, zvar)
            if not c0.is_zero():
                u[key] = c0
    # final check of the characterization with the full coordinate
    s = s_provider(u)
    for key in frame.keys():
        total = None
        for k1, sv in s.items():
            k2 = tuple(p - q for p, q in zip(key, k1))
            if any(e < 0 for e in k2):
                continue
            d = epss.get(k2, RatFunc.zero(frame.alg.vars))
            if k2 in u:
                d = d - u[k2]
            if d.is_zero():
                continue
            v = sv * d
            total = v if total is None else total + v
        if total is not None and not _z_zero_coeff(total, zvar).is_zero():
            raise TruncationError("block coordinate characterization failed "
                                  "at key %r" % (key,))
    return u


def _z_zero_coeff(f: RatFunc, zvar: str) -> RatFunc:
    got = _regular_at_zero(f, zvar).laurent_at_zero(zvar, 0, 0)
    return got.get(0, RatFunc.zero(f.vars))


def _point_zero_correlator(exponents: Sequence[int]) -> Fraction:
    """Genus-zero intersection numbers with two extra plain points:
    <tau_0 tau_0 tau_{e_1} ... tau_{e_n}>."""
    n = len(exponents)
    if sum(exponents) != n - 1:
        return Fraction(0)
    num = math.factorial(n - 1)
    den = 1
    for e in exponents:
        den *= math.factorial(e)
    return Fraction(num, den)


def block_coordinate_ends(eps: VectorSeries,
                          correlator=None) -> Dict[Key, RatFunc]:
    """Block coordinate summed directly over end configurations.

    Expands each end contribution in powers of the cotangent class and
    pairs the multiset against two-pointed intersection numbers; this is
    the generating-function route, independent of the characterization.
    """
    if correlator is None:
        correlator = _point_zero_correlator
    frame = eps.frame
    if frame.alg.rank != 1:
        raise ValueError("rank-one blocks only")
    space = frame.space
    zvar = frame.zvar
    cap = space.total_cap()
    items: List[Tuple[Key, int, RatFunc]] = []
    for k, cls in eps.terms.items():
        if sum(k) == 0 and cls.coeffs[0].is_zero():
            continue
        if sum(k) == 0:
            raise ValueError("end contribution must vanish at degree zero")
        f = cls.coeffs[0]
        for e, c in f.laurent_at_zero(zvar, 0, cap).items():
            items.append((k, e, c))
    out: Dict[Key, RatFunc] = {}
    for n in range(1, cap + 1):
        for combo in itertools.combinations_with_replacement(items, n):
            key = space.zero_key
            ok = True
            for k, _e, _c in combo:
                key = space.combine(key, k)
                if key is None:
                    ok = False
                    break
            if not ok:
                continue
            val = correlator([e for _k, e, _c in combo])
            if not val:
                continue
            mults: Dict[Tuple[Key, int], int] = {}
            for k, e, _c in combo:
                mults[(k, e)] = mults.get((k, e), 0) + 1
            sym = 1
            for m in mults.values():
                sym *= math.factorial(m)
            coeff = RatFunc.const(frame.alg.vars, Fraction(val, sym))
            for _k, _e, c in combo:
                coeff = coeff * c
            if coeff.is_zero():
                continue
            out[key] = out[key] + coeff if key in out else coeff
    return {k: v for k, v in out.items() if not v.is_zero()}


# ------------------------------------------------------ block factorization


def block_factorize(s: MatrixSeries, data: ToricBundleData,
                    blocks) -> MatrixSeries:
    """Quotient of the fundamental solution by its fixed-point blocks.

    `blocks` maps each fixed point to a keyed dict of scalar (or matrix)
    values of the block solution, already evaluated on its block
    coordinate.  The result is expressed in the localized basis and is
    checked to be regular at z = 0.
    """
    frame = s.frame
    zvar = frame.zvar
    loc = data.localized()
    la_z = extend_scalars(loc.algebra, (zvar,))
    lframe = Frame(la_z, frame.space, zvar)
    ev = data.evaluation().map(lambda e: e.with_vars(la_z.vars))
    ev_inv = ev.inv()
    s_loc = MatrixSeries(lframe, {k: ev * m.map(
        lambda e: e.with_vars(la_z.vars)) * ev_inv
        for k, m in s.terms.items()})

    base_rank = data.base.algebra.rank
    n = la_z.rank
    keys = set()
    for alpha in loc.points:
        keys.update(blocks[alpha])
    block_terms: Dict[Key, Mat] = {}
    for key in keys:
        rows = [[RatFunc.zero(la_z.vars)] * n for _ in range(n)]
        present = False
        for pi, alpha in enumerate(loc.points):
            val = blocks[alpha].get(key)
            if val is None:
                continue
            present = True
            if isinstance(val, Mat):
                for i in range(base_rank):
                    for jj in range(base_rank):
                        rows[pi * base_rank + i][pi * base_rank + jj] = val[i, jj]
            else:
                if base_rank != 1:
                    raise ValueError("scalar block on a higher-rank base")
                rows[pi * base_rank][pi * base_rank] = val
        if present:
            block_terms[key] = Mat(rows)
    sblock = MatrixSeries(lframe, block_terms)
    r = s_loc.compose(sblock.keyed_inverse())

    ident = Mat.identity(n, la_z.vars)
    zero = frame.space.zero_key
    if r.terms.get(zero) != ident:
        raise FactorizationError("block quotient does not start at the "
                                 "identity")
    for key, m in r.terms.items():
        for i in range(n):
            for jj in range(n):
                e = m[i, jj]
                if not e.is_zero() and e.z_valuation(zvar) < 0:
                    raise FactorizationError(
                        "block quotient has a pole at z = 0 in key %r" % (key,))
    return r


# ------------------------------------------------------------- tangency


def flat_sections(s: MatrixSeries) -> Dict[object, VectorSeries]:
    """Derivatives of the cone point along every basis direction."""
    star = s.adjoint()
    return {lab: star.apply_class(s.frame.alg.basis(lab))
            for lab in s.frame.alg.labels}


def tangent_basis(s: MatrixSeries, z_orders: int) -> List[Tuple[int, object,
                                                                VectorSeries]]:
    """The family z^a d_mu J(tau, -z) for 0 <= a <= z_orders."""
    secs = flat_sections(s)
    z = s.frame.z()
    out = []
    for lab, sec in secs.items():
        flipped = sec.flip_z()
        cur = flipped
        for a in range(z_orders + 1):
            out.append((a, lab, cur))
            cur = cur.cmul(z)
    return out


class TangencyResult(NamedTuple):
    coeffs: Dict[Tuple[int, object], Dict[Key, RatFunc]]
    residual: VectorSeries

    @property
    def is_tangent(self) -> bool:
        return self.residual.is_zero()


def cone_tangency(f: VectorSeries, basis, window: Tuple[int, int]
                  ) -> TangencyResult:
    """Express f in a tangent family by graded elimination.

    The window picks which Laurent coefficients at z = 0 enter the solve;
    the residual is recomputed exactly afterwards, so a zero residual is a
    rational identity, not a windowed one.  Raises TruncationError when
    the degree-zero profiles of the family are dependent (the window is
    too small to separate the candidates, or the family itself is)."""
    frame = f.frame
    lo, hi = window
    zvar = frame.zvar
    rank = frame.alg.rank
    zero = frame.space.zero_key
    zero_row = [RatFunc.zero(frame.alg.vars)] * (rank * (hi - lo + 1))

    def profile(cls: Optional[CohClass]) -> List[RatFunc]:
        if cls is None:
            return list(zero_row)
        row = []
        for c in cls.coeffs:
            got = c.laurent_at_zero(zvar, lo, hi) if not c.is_zero() else {}
            for e in range(lo, hi + 1):
                row.append(got.get(e, RatFunc.zero(frame.alg.vars)))
        return row

    elim = _Eliminator([profile(vec.terms.get(zero)) for _a, _lab, vec in basis])
    if elim.deficient:
        raise TruncationError("tangent family is dependent in this window; "
                              "widen it")

    cdicts: List[Dict[Key, RatFunc]] = [{} for _ in basis]
    for key in frame.keys():
        rhs = profile(f.terms.get(key))
        for j, (_a, _lab, vec) in enumerate(basis):
            for k1, cv in cdicts[j].items():
                k2 = tuple(p - q for p, q in zip(key, k1))
                if any(e < 0 for e in k2) or k2 == zero:
                    continue
                for idx, val in enumerate(profile(vec.terms.get(k2))):
                    if not val.is_zero():
                        rhs[idx] = rhs[idx] - cv * val
        for j, c in enumerate(elim.solve(rhs)):
            if not c.is_zero():
                cdicts[j][key] = c

    total = VectorSeries.zero(frame)
    coeffs: Dict[Tuple[int, object], Dict[Key, RatFunc]] = {}
    for j, (a, lab, vec) in enumerate(basis):
        if cdicts[j]:
            coeffs[(a, lab)] = cdicts[j]
            total = total + vec.convolve(cdicts[j])
    return TangencyResult(coeffs, f - total)


class _Eliminator:
    """Exact least-structure solver against a fixed set of columns.

    Pivot rows are selected once by Gaussian elimination; per solve, the
    coefficients come from the invertible pivot-row submatrix and any
    mismatch on the remaining rows is left for the caller's residual."""

    def __init__(self, cols: List[List[RatFunc]]):
        self.cols = cols
        self.ncols = len(cols)
        self.nrows = len(cols[0]) if cols else 0
        work = [[cols[j][i] for j in range(self.ncols)]
                for i in range(self.nrows)]
        self.pivot_rows: List[int] = []
        used = set()
        for col in range(self.ncols):
            piv = None
            for r in range(self.nrows):
                if r not in used and not work[r][col].is_zero():
                    piv = r
                    break
            if piv is None:
                continue
            used.add(piv)
            self.pivot_rows.append(piv)
            lead = work[piv][col]
            for r in range(self.nrows):
                if r == piv or work[r][col].is_zero():
                    continue
                fac = work[r][col] / lead
                work[r] = [x - fac * y for x, y in zip(work[r], work[piv])]
        self.deficient = len(self.pivot_rows) < self.ncols

    def solve(self, rhs: List[RatFunc]) -> List[RatFunc]:
        rows = [[self.cols[j][r] for j in range(self.ncols)]
                for r in self.pivot_rows]
        return solve_linear(rows, [rhs[r] for r in self.pivot_rows])


# --------------------------------------------------------- loop operators


def loop_operator(k: int, grading: GradingOps, vs: VectorSeries
                  ) -> VectorSeries:
    """The grading family on the loop space: l_0 = z d/dz + 1/2 + mu +
    rho/z, l_k = l_0 (z l_0)^k, and l_{-1} = multiplication by 1/z."""
    frame = vs.frame
    if k < -1:
        raise ValueError("only k >= -1 is defined")
    if k == -1:
        return vs.zdiv()
    if grading.alg is not frame.alg:
        raise ValueError("grading operators must be built on the series' "
                         "own algebra")
    zvar = frame.zvar
    z = frame.z()

    def l0(v: VectorSeries) -> VectorSeries:
        a = v.map_coeffs(lambda c: c.derivative(zvar) * z)
        b = v.scale(Fraction(1, 2))
        c = v.map_classes(grading.mu_apply)
        d = v.map_classes(grading.rho_apply).zdiv()
        return a + b + c + d

    cur = vs
    for _ in range(k):
        cur = l0(cur).zmul()
    return l0(cur)

"""Loop-space quantization: Virasoro operators, quadratic Hamiltonians,
central constants, and the point target's descendant potential.

The symplectic loop space of an algebra H with pairing G consists of
H-valued Laurent series f(z); the form is Omega(f,g) = Res_{z=0} (f(-z),
g(z)) dz.  Darboux coordinates come from the polarization: f = sum q_k z^k
+ sum p_k (-z)^{-1-k}, with p-components expanded in the dual basis.

Operators are kept as explicit sparse matrices between z-modes over a
finite window (`ModeOp`).  Quantization is performed mechanically: the
coefficient of every quadratic monomial in the Hamiltonian
h(f) = (1/2) Omega(f, Tf) is read off by evaluating the symmetrized
bilinear form on pairs of coordinate basis vectors.  (The orientation of
the T -> h_T assignment is the one under which the corrected operators
satisfy the stated commutation relations and the grading eigenvalue
check; the opposite sign would flip the quantized bracket.)  No
closed-form index bookkeeping is hand-derived anywhere; commutators of
quantized operators are reconstructed from their action on test
polynomials.  The variable "h" in the scalar universe is the genus
parameter of the Fock space (it enters only through the quantization
weights 1/h and h).
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb
from typing import Dict, List, Optional, Tuple

from .linalg import Mat
from .ratfunc import RatFunc

QLabel = Tuple[int, int]   # (z-power >= 0, basis index)
PLabel = Tuple[int, int]


class WindowError(ValueError):
    pass


class LoopData:
    """Loop space of an algebra: pairing, grading operator, c1-multiplication.

    `vars` is the scalar variable universe and must contain "h".
    """

    def __init__(self, vars: Tuple[str, ...], pairing: Mat, mu: Mat, rho: Mat,
                 chi: Optional[Fraction] = None):
        if "h" not in vars:
            raise ValueError('loop-space scalars need the genus variable "h"')
        self.vars = vars
        self.pairing = pairing
        self.pairing_inv = pairing.inv()
        self.mu = mu
        self.rho = rho
        self.chi = chi
        self.dim = pairing.shape[0]

    @staticmethod
    def point(extra_vars: Tuple[str, ...] = ()) -> "LoopData":
        vars = ("h",) + tuple(extra_vars)
        one = Mat.identity(1, vars)
        zero = Mat.zero(1, 1, vars)
        return LoopData(vars, one, zero, zero, chi=Fraction(1))


ModeVec = Dict[int, List[RatFunc]]


class ModeOp:
    """Sparse operator between z-modes, valid on inputs in [in_lo, in_hi]."""

    def __init__(self, entries: Dict[Tuple[int, int], Mat], in_lo: int, in_hi: int):
        self.entries = {k: m for k, m in entries.items() if not m.is_zero()}
        self.in_lo = in_lo
        self.in_hi = in_hi

    def entry(self, n: int, m: int) -> Optional[Mat]:
        if not (self.in_lo <= m <= self.in_hi):
            raise WindowError("mode %d outside input window [%d, %d]"
                              % (m, self.in_lo, self.in_hi))
        return self.entries.get((n, m))

    def apply(self, vec: ModeVec) -> ModeVec:
        out: ModeVec = {}
        for m, comps in vec.items():
            if not (self.in_lo <= m <= self.in_hi):
                raise WindowError("input mode %d outside window" % m)
            for (n, mm), mat in self.entries.items():
                if mm != m:
                    continue
                img = [sum_entries(row, comps) for row in mat.rows]
                acc = out.get(n)
                if acc is None:
                    out[n] = img
                else:
                    out[n] = [a + b for a, b in zip(acc, img)]
        return {n: c for n, c in out.items() if any(not x.is_zero() for x in c)}

    def compose(self, inner: "ModeOp") -> "ModeOp":
        """self o inner; the input window shrinks to modes whose images stay
        inside self's window."""
        valid = []
        for m in range(inner.in_lo, inner.in_hi + 1):
            outs = [n for (n, mm) in inner.entries if mm == m]
            if all(self.in_lo <= n <= self.in_hi for n in outs):
                valid.append(m)
        if not valid:
            raise WindowError("empty window after composition")
        lo, hi = min(valid), max(valid)
        if set(valid) != set(range(lo, hi + 1)):
            raise WindowError("composition window is not contiguous")
        entries: Dict[Tuple[int, int], Mat] = {}
        for (n, m), bmat in inner.entries.items():
            if not (lo <= m <= hi):
                continue
            for (n2, nn), amat in self.entries.items():
                if nn != n:
                    continue
                prod = amat * bmat
                key = (n2, m)
                acc = entries.get(key)
                entries[key] = prod if acc is None else acc + prod
        return ModeOp(entries, lo, hi)

    def __add__(self, other: "ModeOp") -> "ModeOp":
        lo, hi = max(self.in_lo, other.in_lo), min(self.in_hi, other.in_hi)
        entries: Dict[Tuple[int, int], Mat] = {}
        for src in (self.entries, other.entries):
            for (n, m), mat in src.items():
                if not (lo <= m <= hi):
                    continue
                acc = entries.get((n, m))
                entries[(n, m)] = mat if acc is None else acc + mat
        return ModeOp(entries, lo, hi)

    def scale(self, q) -> "ModeOp":
        return ModeOp({k: m.scale(q) for k, m in self.entries.items()},
                      self.in_lo, self.in_hi)

    def __sub__(self, other: "ModeOp") -> "ModeOp":
        return self + other.scale(-1)

    def restrict(self, lo: int, hi: int) -> "ModeOp":
        if lo < self.in_lo or hi > self.in_hi:
            raise WindowError("cannot widen input window")
        return ModeOp({(n, m): mat for (n, m), mat in self.entries.items()
                       if lo <= m <= hi}, lo, hi)

    def equal_on(self, other: "ModeOp", lo: int, hi: int) -> bool:
        a = self.restrict(lo, hi)
        b = other.restrict(lo, hi)
        return (a - b).entries == {}


def sum_entries(row, comps):
    acc = None
    for a, b in zip(row, comps):
        if a.is_zero() or b.is_zero():
            continue
        t = a * b
        acc = t if acc is None else acc + t
    if acc is None:
        acc = row[0] - row[0]
    return acc


def _l0(loop: LoopData, lo: int, hi: int) -> ModeOp:
    """z d/dz + 1/2 + mu + rho/z on the window."""
    ident = Mat.identity(loop.dim, loop.vars)
    entries: Dict[Tuple[int, int], Mat] = {}
    for m in range(lo, hi + 1):
        entries[(m, m)] = ident.scale(Fraction(2 * m + 1, 2)) + loop.mu
        if not loop.rho.is_zero():
            entries[(m - 1, m)] = loop.rho
    return ModeOp(entries, lo, hi)


def _zmul(loop: LoopData, lo: int, hi: int) -> ModeOp:
    ident = Mat.identity(loop.dim, loop.vars)
    return ModeOp({(m + 1, m): ident for m in range(lo, hi + 1)}, lo, hi)


def virasoro_l(k: int, loop: LoopData, in_lo: int, in_hi: int) -> ModeOp:
    """l_k = l_0 (z l_0)^k for k >= 0; l_{-1} = 1/z.  Valid on [in_lo, in_hi]."""
    if k < -1:
        raise ValueError("k must be >= -1")
    ident = Mat.identity(loop.dim, loop.vars)
    if k == -1:
        return ModeOp({(m - 1, m): ident for m in range(in_lo, in_hi + 1)},
                      in_lo, in_hi)
    # build on a padded window so the composition never clips
    lo, hi = in_lo - k - 2, in_hi + k + 2
    op = _l0(loop, lo, hi)
    for _ in range(k):
        op = _l0(loop, lo, hi).compose(_zmul(loop, lo, hi).compose(op))
    if op.in_lo > in_lo or op.in_hi < in_hi:
        raise WindowError("padding insufficient for requested window")
    return op.restrict(in_lo, in_hi)


def omega(x: ModeVec, y: ModeVec, pairing: Mat) -> RatFunc:
    """Omega(x, y) = Res_{z=0} (x(-z), y(z)) dz on mode vectors."""
    acc = None
    for n, xc in x.items():
        yc = y.get(-1 - n)
        if yc is None:
            continue
        sign = 1 if n % 2 == 0 else -1
        for i, xi in enumerate(xc):
            if xi.is_zero():
                continue
            for j, yj in enumerate(yc):
                g = pairing[i, j]
                if g.is_zero() or yj.is_zero():
                    continue
                t = (xi * g * yj).scale(sign)
                acc = t if acc is None else acc + t
    if acc is None:
        # scrape a zero of the right universe off the pairing
        acc = pairing[0, 0] - pairing[0, 0]
    return acc


class QuadraticOperator:
    """Quantized quadratic Hamiltonian:
    (1/2h) sum A q q + sum B q d/dq + (h/2) sum C d/dq d/dq + const.

    A and C are stored on canonically sorted label pairs (symmetric values);
    B maps (q-label, p-label) pairs.  Labels are (z-power, basis index).
    """

    def __init__(self, vars: Tuple[str, ...],
                 A: Dict[Tuple[QLabel, QLabel], RatFunc],
                 B: Dict[Tuple[QLabel, PLabel], RatFunc],
                 C: Dict[Tuple[PLabel, PLabel], RatFunc],
                 const: RatFunc):
        self.vars = vars
        self.A = {k: v for k, v in A.items() if not v.is_zero()}
        self.B = {k: v for k, v in B.items() if not v.is_zero()}
        self.C = {k: v for k, v in C.items() if not v.is_zero()}
        self.const = const

    def with_const(self, c: RatFunc) -> "QuadraticOperator":
        return QuadraticOperator(self.vars, self.A, self.B, self.C, c)

    def labels(self) -> Tuple[List[QLabel], List[PLabel]]:
        qs, ps = set(), set()
        for (u, v) in self.A:
            qs.add(u)
            qs.add(v)
        for (u, v) in self.B:
            qs.add(u)
            ps.add(v)
        for (u, v) in self.C:
            ps.add(u)
            ps.add(v)
        return sorted(qs), sorted(ps)

    # ------------------------------------------------------------ Fock action

    def act(self, poly: Dict[Tuple[QLabel, ...], RatFunc]) -> Dict[Tuple[QLabel, ...], RatFunc]:
        """Apply to a polynomial in the q-variables (monomial -> coefficient)."""
        hvar = RatFunc.variable(self.vars, "h")
        hinv = hvar.inv()
        out: Dict[Tuple[QLabel, ...], RatFunc] = {}

        def put(mono, c):
            if c.is_zero():
                return
            acc = out.get(mono)
            c = c if acc is None else acc + c
            if c.is_zero():
                out.pop(mono, None)
            else:
                out[mono] = c

        for mono, coeff in poly.items():
            if not self.const.is_zero():
                put(mono, coeff * self.const)
            for (u, v), a in self.A.items():
                w = a.scale(Fraction(1, 2)) if u == v else a
                put(tuple(sorted(mono + (u, v))), coeff * w * hinv)
            for (u, v), b in self.B.items():
                cnt = mono.count(v)
                if cnt:
                    reduced = list(mono)
                    reduced.remove(v)
                    put(tuple(sorted(reduced + [u])), (coeff * b).scale(cnt))
            for (u, v), c in self.C.items():
                # ordered-sum weight: u != v contributes h*C*d_u d_v,
                # u == v contributes (h/2)*C*d_u^2
                cnt_u = mono.count(u)
                if not cnt_u:
                    continue
                reduced = list(mono)
                reduced.remove(u)
                cnt_v = reduced.count(v)
                if not cnt_v:
                    continue
                reduced.remove(v)
                factor = Fraction(cnt_u * cnt_v)
                if u == v:
                    factor /= 2
                put(tuple(sorted(reduced)), (coeff * c * hvar).scale(factor))
        return out

    # ----------------------------------------------------------- commutators

    def commutator(self, other: "QuadraticOperator") -> "QuadraticOperator":
        """[self, other], reconstructed from the action on test polynomials.

        Exact provided the label sets of both operators are complete for
        the composite (true when both were quantized on a window large
        enough to contain all couplings, as with banded Virasoro data).
        """
        qs1, ps1 = self.labels()
        qs2, ps2 = other.labels()
        qlabels = sorted(set(qs1) | set(qs2) | set(ps1) | set(ps2))
        hvar = RatFunc.variable(self.vars, "h")
        one = RatFunc.one(self.vars)
        zero = RatFunc.zero(self.vars)

        def comm(poly):
            first = self.act(other.act(poly))
            second = other.act(self.act(poly))
            out = dict(first)
            for m, c in second.items():
                acc = out.get(m)
                acc = -c if acc is None else acc - c
                if acc.is_zero():
                    out.pop(m, None)
                else:
                    out[m] = acc
            return out

        r0 = comm({(): one})
        const = r0.get((), zero)
        A: Dict[Tuple[QLabel, QLabel], RatFunc] = {}
        for mono, c in r0.items():
            if len(mono) == 2:
                u, v = mono
                A[(u, v)] = c * hvar if u != v else (c * hvar).scale(2)
            elif len(mono) != 0:
                raise RuntimeError("commutator action on 1 is not quadratic")
        B: Dict[Tuple[QLabel, PLabel], RatFunc] = {}
        for w in qlabels:
            r1 = comm({(w,): one})
            for mono, c in r1.items():
                if len(mono) != 1:
                    continue
                u = mono[0]
                val = c - const if u == w else c
                if not val.is_zero():
                    B[(u, w)] = val
        C: Dict[Tuple[PLabel, PLabel], RatFunc] = {}
        for w, x in combinations_with_replacement(qlabels, 2):
            r2 = comm({tuple(sorted((w, x))): one})
            c = r2.get((), None)
            if c is not None and not c.is_zero():
                C[(w, x)] = c / hvar
        return QuadraticOperator(self.vars, A, B, C, const)

    def __sub__(self, other: "QuadraticOperator") -> "QuadraticOperator":
        def merge(d1, d2):
            d = dict(d1)
            for k, v in d2.items():
                acc = d.get(k)
                acc = -v if acc is None else acc - v
                if acc.is_zero():
                    d.pop(k, None)
                else:
                    d[k] = acc
            return d
        return QuadraticOperator(self.vars, merge(self.A, other.A),
                                 merge(self.B, other.B), merge(self.C, other.C),
                                 self.const - other.const)

    def scale(self, q) -> "QuadraticOperator":
        return QuadraticOperator(
            self.vars,
            {k: v.scale(q) for k, v in self.A.items()},
            {k: v.scale(q) for k, v in self.B.items()},
            {k: v.scale(q) for k, v in self.C.items()},
            self.const.scale(q))

    def restrict(self, q_max: int, p_max: int) -> "QuadraticOperator":
        """Drop couplings involving labels past the given z-power caps."""
        return QuadraticOperator(
            self.vars,
            {k: v for k, v in self.A.items() if k[0][0] <= q_max and k[1][0] <= q_max},
            {k: v for k, v in self.B.items() if k[0][0] <= q_max and k[1][0] <= p_max},
            {k: v for k, v in self.C.items() if k[0][0] <= p_max and k[1][0] <= p_max},
            self.const)

    def is_scalar(self) -> bool:
        return not self.A and not self.B and not self.C


def quantize(op: ModeOp, loop: LoopData, q_cap: int, p_cap: int,
             const: Optional[RatFunc] = None) -> QuadraticOperator:
    """Quadratic Hamiltonian h(f) = (1/2) Omega(f, op f), quantized.

    Every coefficient is extracted as the symmetrized bilinear form
    (Omega(e_u, T e_v) + Omega(e_v, T e_u))/2 on coordinate vectors e_u.
    """
    if op.in_lo > -1 - p_cap or op.in_hi < q_cap:
        raise WindowError("operator window too small for the requested caps")
    n = loop.dim
    vars = loop.vars
    ginv = loop.pairing_inv
    zero = RatFunc.zero(vars)
    one = RatFunc.one(vars)

    basis_cols = [[one if i == j else zero for i in range(n)] for j in range(n)]
    dual_cols = [ginv.col(l) for l in range(n)]

    qlabels: List[QLabel] = [(a, i) for a in range(q_cap + 1) for i in range(n)]
    plabels: List[PLabel] = [(j, l) for j in range(p_cap + 1) for l in range(n)]

    def e_q(lbl: QLabel) -> ModeVec:
        a, i = lbl
        return {a: list(basis_cols[i])}

    def e_p(lbl: PLabel) -> ModeVec:
        j, l = lbl
        sgn = -1 if j % 2 == 0 else 1   # (-1)^{1+j}
        return {-1 - j: [c.scale(sgn) for c in dual_cols[l]]}

    elems = {("q", lbl): e_q(lbl) for lbl in qlabels}
    elems.update({("p", lbl): e_p(lbl) for lbl in plabels})
    images = {key: op.apply(vec) for key, vec in elems.items()}

    def bform(ku, kv) -> RatFunc:
        t = omega(elems[ku], images[kv], loop.pairing) \
            + omega(elems[kv], images[ku], loop.pairing)
        return t.scale(Fraction(1, 2))

    A: Dict[Tuple[QLabel, QLabel], RatFunc] = {}
    for u, v in combinations_with_replacement(qlabels, 2):
        c = bform(("q", u), ("q", v))
        if not c.is_zero():
            A[(u, v)] = c
    B: Dict[Tuple[QLabel, PLabel], RatFunc] = {}
    for u in qlabels:
        for v in plabels:
            c = bform(("q", u), ("p", v))
            if not c.is_zero():
                B[(u, v)] = c
    C: Dict[Tuple[PLabel, PLabel], RatFunc] = {}
    for u, v in combinations_with_replacement(plabels, 2):
        c = bform(("p", u), ("p", v))
        if not c.is_zero():
            C[(u, v)] = c
    return QuadraticOperator(vars, A, B, C, const if const is not None else zero)


def central_constant(chi, mu: Mat, pairing: Mat) -> Fraction:
    """chi/16 + str(mu mu^*)/4 with mu^* the pairing-adjoint of mu.

    All algebras here are concentrated in even degrees, so the supertrace
    is the ordinary trace.
    """
    mu_star = pairing.inv() * mu.transpose() * pairing
    prod = mu * mu_star
    n = prod.shape[0]
    tr = None
    for i in range(n):
        tr = prod[i, i] if tr is None else tr + prod[i, i]
    return Fraction(chi, 16) + tr.const_value() / 4


# --------------------------------------------------------------------------
# descendant potentials


class Potential:
    """Correlator table: (genus, sorted insertion tuple, Novikov tuple) -> value.

    Insertions are (z-power, basis-index) pairs.  The table is a plain
    store; selection rules live with whoever fills it.
    """

    def __init__(self, basis_size: int = 1, novikov_rank: int = 0):
        self.basis_size = basis_size
        self.novikov_rank = novikov_rank
        self.data: Dict[Tuple[int, Tuple, Tuple], object] = {}

    def set(self, g: int, insertions, nov=(), value=None):
        key = (g, tuple(sorted(insertions)), tuple(nov))
        self.data[key] = value

    def get(self, g: int, insertions, nov=()):
        return self.data.get((g, tuple(sorted(insertions)), tuple(nov)))

    def items(self):
        return self.data.items()


def double_factorial(n: int) -> int:
    """(2k+1)!! style double factorial with (-1)!! = 1."""
    if n <= 0:
        return 1
    r = 1
    while n > 0:
        r *= n
        n -= 2
    return r


class PointVirasoro:
    """The point target's descendant potential, solved from the quantized
    Virasoro family: for each correlator the operator with the matching
    top insertion is used as a rewriting rule.
    """

    def __init__(self, d_max: int = 16):
        self.d_max = d_max
        loop = LoopData.point()
        self.c0 = central_constant(loop.chi, loop.mu, loop.pairing)
        self._ops: Dict[int, Tuple[Dict, Dict, Dict, Fraction]] = {}
        self._loop = loop
        self._cache: Dict[Tuple[int, Tuple[int, ...]], Fraction] = {}
        self._stack: set = set()

    def _tensors(self, k: int):
        """Point-specialized (A, B, C, const) of L_k as Fraction tables."""
        if k not in self._ops:
            cap = self.d_max
            lop = virasoro_l(k, self._loop, -2 - cap, cap + 1)
            qop = quantize(lop, self._loop, cap, cap)
            A = {(u[0], v[0]): c.const_value() for (u, v), c in qop.A.items()}
            B = {(u[0], v[0]): c.const_value() for (u, v), c in qop.B.items()}
            C = {(u[0], v[0]): c.const_value() for (u, v), c in qop.C.items()}
            const = self.c0 if k == 0 else Fraction(0)
            self._ops[k] = (A, B, C, const)
        return self._ops[k]

    def correlator(self, g: int, ds) -> Fraction:
        """<tau_{d_1} ... tau_{d_n}>_g, exact."""
        ds = tuple(sorted(ds, reverse=True))
        n = len(ds)
        if 2 * g - 2 + n <= 0:
            return Fraction(0)
        if sum(ds) != 3 * g - 3 + n:
            return Fraction(0)
        if ds and ds[0] > self.d_max:
            raise ValueError("insertion exceeds d_max=%d" % self.d_max)
        key = (g, ds)
        if key in self._cache:
            return self._cache[key]
        if key in self._stack:
            raise RuntimeError("cyclic Virasoro recursion at %r" % (key,))
        self._stack.add(key)
        try:
            d1, rest = ds[0], ds[1:]
            k = d1 - 1
            A, B, C, const = self._tensors(k)
            target_coeff = B.get((1, d1))
            if target_coeff is None or target_coeff == 0:
                raise RuntimeError("rewriting rule lost its target at %r" % (key,))
            others = [b for (a, b) in B if a == 1 and b != d1]
            if others:
                raise RuntimeError("ambiguous rewriting rule for %r" % (key,))
            rest_sum = self._residual_terms(g, rest, A, B, C, const,
                                            skip=(d1, rest))
            value = rest_sum / target_coeff
            self._cache[key] = value
            return value
        finally:
            self._stack.discard(key)

    def residual(self, qtensors, g: int, monomial) -> Fraction:
        """Coefficient of h^{g-1} prod t_{d} in e^{-F} (quantized op) e^{F}."""
        A, B, C, const = qtensors
        return self._residual_terms(g, tuple(sorted(monomial, reverse=True)),
                                    A, B, C, const, skip=None)

    def _residual_terms(self, g, M, A, B, C, const, skip):
        """Sum of the equation terms at (g, M); with `skip` set, the single
        shift-coupling onto the target correlator is omitted, so the full
        equation 0 = result - B[(1, d1)]*target gives target directly."""
        total = Fraction(0)

        # scalar and 1/(2h) A(q,q) pieces, with the dilaton shift q = t - delta_1
        if not M and g == 1:
            total += const
        if g == 0:
            if len(M) == 2:
                a, b = M
                total += A.get((min(a, b), max(a, b)), Fraction(0))
            elif len(M) == 1:
                b = M[0]
                total -= A.get((min(1, b), max(1, b)), Fraction(0))
            elif len(M) == 0:
                total += A.get((1, 1), Fraction(0)) / 2

        # B(q, dF): t-part and shift part
        mult = _multiplicities(M)
        for a, m_a in mult.items():
            rest = _remove(M, a)
            for (aa, b), coeff in B.items():
                if aa != a:
                    continue
                total += m_a * coeff * self.correlator(g, rest + (b,))
        for (aa, b), coeff in B.items():
            if aa != 1:
                continue
            if skip is not None and b == skip[0]:
                continue
            total -= coeff * self.correlator(g, M + (b,))

        # (h/2) C(dF, dF) and (h/2) C(ddF)
        csym = []
        for (u, v), coeff in C.items():
            csym.append((u, v, coeff if u == v else 2 * coeff))
        if csym:
            for u, v, coeff in csym:
                if g >= 1:
                    total += Fraction(1, 2) * coeff * self.correlator(g - 1, M + (u, v))
                for g1 in range(0, g + 1):
                    g2 = g - g1
                    for M1, M2, ways in _splits(M):
                        c1 = self.correlator(g1, M1 + (u,))
                        if c1 == 0:
                            continue
                        c2 = self.correlator(g2, M2 + (v,))
                        if c2 == 0:
                            continue
                        total += Fraction(1, 2) * coeff * ways * c1 * c2
        return total


def _multiplicities(M) -> Dict[int, int]:
    out: Dict[int, int] = {}
    for a in M:
        out[a] = out.get(a, 0) + 1
    return out


def _remove(M: Tuple[int, ...], a: int) -> Tuple[int, ...]:
    lst = list(M)
    lst.remove(a)
    return tuple(lst)


def _splits(M: Tuple[int, ...]):
    """All splittings of the multiset M into (M1, M2) with multiplicities."""
    mult = sorted(_multiplicities(M).items())
    results = [((), (), 1)]
    for a, m in mult:
        nxt = []
        for M1, M2, w in results:
            for i in range(m + 1):
                nxt.append((M1 + (a,) * i, M2 + (a,) * (m - i), w * comb(m, i)))
        results = nxt
    return results


def solve_point_potential(genus_cap: int, n_cap: int, d_max: int = 16) -> Potential:
    """Point-target correlator table for g <= genus_cap, n <= n_cap."""
    pv = PointVirasoro(d_max=d_max)
    pot = Potential(basis_size=1, novikov_rank=0)
    for g in range(genus_cap + 1):
        for n in range(1, n_cap + 1):
            if 2 * g - 2 + n <= 0:
                continue
            total = 3 * g - 3 + n
            if total < 0:
                continue
            for ds in _partitions_into(total, n):
                pot.set(g, [(d, 0) for d in ds], (), pv.correlator(g, ds))
    return pot


def _partitions_into(total: int, n: int):
    """Weakly decreasing n-tuples of nonnegative integers summing to total."""
    def rec(remaining, slots, cap):
        if slots == 0:
            if remaining == 0:
                yield ()
            return
        for first in range(min(remaining, cap), -1, -1):
            if first * slots < remaining:
                break
            for rest in rec(remaining - first, slots - 1, first):
                yield (first,) + rest
    return rec(total, n, total)


def apply_virasoro(pv: PointVirasoro, k: int, keys) -> Dict[Tuple[int, Tuple[int, ...]], Fraction]:
    """Residual table of the (uncorrected or corrected) operator on the
    point potential: for each (g, monomial) key the coefficient of
    h^{g-1} t^monomial in e^{-F} L_k e^{F}."""
    tensors = pv._tensors(k)
    out = {}
    for g, M in keys:
        out[(g, tuple(sorted(M, reverse=True)))] = pv.residual(tensors, g, M)
    return out

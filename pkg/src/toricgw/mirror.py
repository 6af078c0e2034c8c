"""Fixed-point charts, formal saddle expansions, and homogeneity checks.

The fiber superpotential of a toric bundle, restricted to the torus cut
out by the moment constraints, splits in the chart of each fixed point
into one-dimensional model integrands with monomial amplitudes.  This
module computes that splitting exactly: chart solutions for the
eliminated coordinates, the integrand series phi_alpha, normalized
asymptotic series of the one-dimensional model integral by a formal
Laplace rule, perturbed critical points by fixed-point iteration in the
Novikov-adic topology, and the shift operator that trades twisting
classes for Novikov rescalings.

On top of those it verifies, coefficient by coefficient, that the
fixed-point restrictions of the derivative columns of the hypergeometric
series match the stationary-phase side (entries_check), extracts the
change-of-frame factor whose coefficients survive the limit of vanishing
torus weights (nonequivariant_r_factor), and checks the first-order
homogeneity of the columns under the grading vector field
(grading_residuals).

All expansions are exact: the Laplace method is an algebraic rule (phase
Taylor coefficients paired with formal Gaussian moments), never a
numerical approximation.  Multivariate saddles are only ever treated as
products of one-dimensional ones, which the chart structure guarantees.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from .frobenius import (CohAlgebra, CohClass, FrobeniusError, extend_scalars)
from .linalg import Mat
from .ratfunc import RatFunc
from .series import (Key, TruncSeries, VarGroup, VarSpace, series_exp,
                     series_invert)
from .toric import BasisError, GenericityError, ToricBundleData
from .genus0 import (AmplenessError, Frame, VectorSeries, base_j_series,
                     i_function, materialize, restrict_series)

__all__ = [
    "MirrorChart", "PhiTerm", "PhiSeries", "CriticalData", "SaddleExpansion",
    "EntriesReport", "GradingReport", "DivisorShiftError",
    "chart_solve", "phi_alpha", "formal_laplace_1d", "stirling_1d",
    "stirling_class", "gamma_alpha", "critical_data", "divisor_operator",
    "tensor_columns", "entries_check", "saddle_expansion",
    "nonequivariant_r_factor", "euler_coefficients", "grading_residuals",
]


class DivisorShiftError(ValueError):
    """The shift function has a constant part and no string split was
    requested, so the operator is not Novikov-adically convergent."""


# ----------------------------------------------------------- small linalg


def _mat_inverse(rows: List[List[Fraction]]) -> Optional[List[List[Fraction]]]:
    """Inverse of a square Fraction matrix, or None when singular."""
    n = len(rows)
    aug = [[Fraction(v) for v in row] + [Fraction(int(i == j))
                                         for j in range(n)]
           for i, row in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        lead = aug[col][col]
        aug[col] = [v / lead for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _binom(top: Fraction, n: int) -> Fraction:
    acc = Fraction(1)
    for i in range(n):
        acc *= (top - i) / (i + 1)
    return acc


def _odd_double_factorial(m: int) -> int:
    """(m-1)!! for even m >= 0."""
    acc = 1
    for v in range(1, m, 2):
        acc *= v
    return acc


# ------------------------------------------------------------ chart solve


class MirrorChart(NamedTuple):
    """Monomial solution of the moment constraints in one chart.

    For each i (ordered as in `alpha`) the eliminated coordinate is
      x_i = prod_l (q_l e^{t_l})^{novikov_powers[i][l]}
            * prod_j x_j^{-elimination_powers[i][pos(j)]},  j in `outside`.
    """
    alpha: Tuple[int, ...]
    outside: Tuple[int, ...]
    novikov_powers: Tuple[Tuple[Fraction, ...], ...]
    elimination_powers: Tuple[Tuple[Fraction, ...], ...]


def chart_solve(data: ToricBundleData, alpha: Tuple[int, ...]) -> MirrorChart:
    """Solve the moment constraints for the coordinates indexed by alpha.

    The k-by-k block of the weight matrix on the alpha columns must be
    invertible over the rationals; its inverse gives the Novikov exponents
    and the elimination exponents of the remaining coordinates.
    """
    k = data.k
    alpha = tuple(sorted(alpha))
    if len(alpha) != k or len(set(alpha)) != k \
            or any(j < 1 or j > data.N for j in alpha):
        raise ValueError("chart index must be %d distinct coordinates" % k)
    outside = tuple(j for j in range(1, data.N + 1) if j not in alpha)
    m_alpha = [[Fraction(data.m[i][j - 1]) for j in alpha] for i in range(k)]
    inv = _mat_inverse(m_alpha)
    if inv is None:
        raise BasisError("chart block of the weight matrix is singular "
                         "at %r" % (alpha,))
    nov = tuple(tuple(inv[i][l] for l in range(k)) for i in range(k))
    elim = tuple(tuple(sum(inv[i][l] * data.m[l][j - 1] for l in range(k))
                       for j in outside) for i in range(k))
    return MirrorChart(alpha, outside, nov, elim)


def _degree_weights(data: ToricBundleData, d: Sequence[int]) -> Tuple[int, ...]:
    """u_j(d) = sum_i d_i m_ij for every coordinate j (1-based order)."""
    return tuple(sum(d[i] * data.m[i][j] for i in range(data.k))
                 for j in range(data.N))


# ------------------------------------------------------------- phi series


class PhiTerm(NamedTuple):
    """One Novikov coefficient of the chart integrand.

    `amplitude_powers[j]` is the exponent of 1/x_j for the coordinates
    outside the chart; `factorial_weight` and `z_power` record the scalar
    weight 1/(prod u_j(d)! * z^{sum u_j(d)}) over the chart coordinates.
    """
    amplitude_powers: Dict[int, int]
    factorial_weight: Fraction
    z_power: int


class PhiSeries(NamedTuple):
    chart: MirrorChart
    prefactor_exponents: Tuple[RatFunc, ...]
    unperturbed: Dict[int, RatFunc]
    terms: Dict[Key, PhiTerm]


def phi_alpha(data: ToricBundleData, alpha: Tuple[int, ...],
              cap: int) -> PhiSeries:
    """Novikov expansion of the chart integrand.

    Each term is a product of monomial amplitudes in the coordinates
    outside the chart and a rational weight from the eliminated ones; the
    common prefactor exponents alpha^*(p_i) and the unperturbed critical
    coordinates alpha^*(u_j) ride along so callers can assemble the
    one-dimensional model integrals without re-deriving them.
    """
    for i in range(data.k):
        if sum(data.m[i]) <= 0:
            raise AmplenessError("fiber direction %d has grading weight %d"
                                 % (i + 1, sum(data.m[i])))
    chart = chart_solve(data, alpha)
    r = data.restrictions(chart.alpha)
    pstar = tuple(r.p)
    unper = {j: r.u[j - 1] for j in chart.outside}
    space = VarSpace([VarGroup("q", tuple("q%d" % (i + 1)
                                          for i in range(data.k)), cap)])
    terms: Dict[Key, PhiTerm] = {}
    for key in itertools.product(range(cap + 1), repeat=data.k):
        if not space.admissible(key):
            continue
        u = _degree_weights(data, key)
        if any(u[j - 1] < 0 for j in chart.alpha):
            continue
        fact = 1
        zpow = 0
        for j in chart.alpha:
            f = 1
            for v in range(2, u[j - 1] + 1):
                f *= v
            fact *= f
            zpow += u[j - 1]
        terms[key] = PhiTerm({j: u[j - 1] for j in chart.outside},
                             Fraction(1, fact), zpow)
    return PhiSeries(chart, pstar, unper, terms)


# ------------------------------------------------- formal Laplace method


def formal_laplace_1d(phase: Sequence, amplitude: Sequence, order: int,
                      one, inv=None) -> List:
    """Normalized asymptotic series of a one-dimensional saddle integral.

    `phase[m]` is the Taylor coefficient of y^{m+2} of the phase at the
    critical point (the linear term vanishes there, the constant is
    normalized away) and `amplitude[n]` the coefficient of y^n of the
    amplitude.  Coefficients live in any exact commutative ring: `one` is
    its unit and `inv` inverts an element (defaults to the `.inv` method).
    Returns the coefficients of z^0..z^order of the integral divided by
    its leading Gaussian factor; the order-0 entry is amplitude[0].

    The rule is algebraic: expand exp of the cubic-and-higher phase terms,
    multiply by the amplitude, and replace y^{2n} by the normalized
    Gaussian moment (2n-1)!! (-z / (2 phase[0]))^n.  Odd powers drop.
    """
    if inv is None:
        inv = lambda v: v.inv()
    if not phase:
        raise ValueError("phase needs at least the quadratic coefficient")
    zero = one - one
    f2 = phase[0]
    # tail[(ypow, zpow)] with zpow the (negative) exponent from 1/z factors
    pmax = 2 * order
    ymax = 6 * order
    gterm: Dict[Tuple[int, int], object] = {}
    for m, c in enumerate(phase[1:], start=3):
        if m > ymax:
            break
        if not _is_zero(c, zero):
            gterm[(m, -1)] = c
    expg: Dict[Tuple[int, int], object] = {(0, 0): one}
    cur: Dict[Tuple[int, int], object] = {(0, 0): one}
    for p in range(1, pmax + 1):
        cur = _ypoly_mul(cur, gterm, ymax)
        cur = {ke: _ring_scale(v, Fraction(1, p))
               for ke, v in cur.items()}
        if not cur:
            break
        for ke, v in cur.items():
            expg[ke] = expg[ke] + v if ke in expg else v
    amp = {(n, 0): c for n, c in enumerate(amplitude)
           if n <= ymax and not _is_zero(c, zero)}
    total = _ypoly_mul(expg, amp, ymax)
    half_inv_f2 = inv(f2 + f2)      # 1 / (2 f2)
    out = [zero for _ in range(order + 1)]
    for (ypow, zpow), c in total.items():
        if ypow % 2:
            continue
        n = ypow // 2
        e = n + zpow
        if 0 <= e <= order:
            moment = Fraction((-1) ** n * _odd_double_factorial(ypow))
            val = _ring_scale(c, moment)
            for _ in range(n):
                val = val * half_inv_f2
            out[e] = out[e] + val
    return out


def _is_zero(v, zero) -> bool:
    try:
        return v.is_zero()
    except AttributeError:
        return v == zero


def _ring_scale(v, fr: Fraction):
    try:
        return v.scale(fr)
    except AttributeError:
        return v * fr


def _ypoly_mul(a: Dict[Tuple[int, int], object],
               b: Dict[Tuple[int, int], object],
               ymax: int) -> Dict[Tuple[int, int], object]:
    out: Dict[Tuple[int, int], object] = {}
    for (y1, z1), c1 in a.items():
        for (y2, z2), c2 in b.items():
            y = y1 + y2
            if y > ymax:
                continue
            ke = (y, z1 + z2)
            v = c1 * c2
            out[ke] = out[ke] + v if ke in out else v
    return out


_SADDLE_CACHE: Dict[Tuple[int, int], Tuple[Fraction, ...]] = {}


def _saddle_rationals(c: int, order: int) -> Tuple[Fraction, ...]:
    """Rational skeleton of the model integral's expansion.

    The model is the integrand exp((x - a log x)/z) x^{-c} dlog x at the
    critical point x = a; in the scaled coordinate x = a(1+s) the phase
    Taylor coefficients are a(-1)^m/m and the amplitude is (1+s)^{-c-1},
    so the z^k coefficient is (returned value)_k / a^k.
    """
    hit = _SADDLE_CACHE.get((c, order))
    if hit is not None and len(hit) > order:
        return hit
    one = Fraction(1)
    phase = [Fraction((-1) ** m, m) for m in range(2, 6 * order + 3)]
    amp = [_binom(Fraction(-c - 1), n) for n in range(6 * order + 1)]
    vals = formal_laplace_1d(phase, amp, order, one,
                             inv=lambda v: 1 / v)
    out = tuple(Fraction(v) for v in vals)
    _SADDLE_CACHE[(c, order)] = out
    return out


def stirling_1d(a: RatFunc, c: int, order: int) -> Dict[int, RatFunc]:
    """Normalized z-series of the model integral with parameter a.

    Coefficient of z^k is a rational number over a^k.  The branch is
    fixed by the first correction for c = 0 being 1/(12 a); with that
    convention the logarithm of the c = 0 series has only odd z-powers.
    """
    if a.is_zero():
        raise GenericityError("saddle parameter vanishes identically")
    rats = _saddle_rationals(c, order)
    ainv = a.inv()
    out: Dict[int, RatFunc] = {}
    power = RatFunc.one(a.vars)
    for k in range(order + 1):
        if k:
            power = power * ainv
        val = power.scale(rats[k] * (-1) ** k)
        if not val.is_zero():
            out[k] = val
    return out


def stirling_class(a: CohClass, c: int, order: int) -> Dict[int, CohClass]:
    """Same expansion with a cohomology-class parameter."""
    rats = _saddle_rationals(c, order)
    try:
        ainv = a.inverse()
    except FrobeniusError:
        raise GenericityError("saddle parameter class is not invertible")
    out: Dict[int, CohClass] = {}
    power = a.alg.unit
    for k in range(order + 1):
        if k:
            power = power * ainv
        val = power.scale(Fraction((-1) ** k) * rats[k])
        if not val.is_zero():
            out[k] = val
    return out


def gamma_alpha(data: ToricBundleData, alpha: Tuple[int, ...],
                order: int) -> Dict[int, CohClass]:
    """Product of the model expansions over the coordinates outside alpha.

    Classes live in the base algebra; the parameters are the fixed-point
    values of the coordinate divisor classes.
    """
    alpha = tuple(sorted(alpha))
    r = data.restrictions(alpha)
    base = data.base.algebra
    out: Dict[int, CohClass] = {0: base.unit}
    for j in range(1, data.N + 1):
        if j in alpha:
            continue
        factor = stirling_class(r.U[j - 1], 0, order)
        nxt: Dict[int, CohClass] = {}
        for k1, c1 in out.items():
            for k2, c2 in factor.items():
                k = k1 + k2
                if k > order:
                    continue
                v = c1 * c2
                nxt[k] = nxt[k] + v if k in nxt else v
        out = nxt
    return out


def _honest_gamma(data: ToricBundleData, alpha: Tuple[int, ...],
                  order: int) -> Dict[int, CohClass]:
    """gamma_alpha with the loop variable reflected (internal branch)."""
    out = gamma_alpha(data, alpha, order)
    return {k: c.scale(Fraction((-1) ** k)) for k, c in out.items()}


# ------------------------------------------------------- critical points


class CriticalData(NamedTuple):
    """Perturbed critical point of the chart superpotential.

    `coordinates[j]` solves the critical equations for j outside the
    chart; `eliminated[i]` is the induced value of the chart coordinate
    (1-based, ordered as alpha).  `value_correction` is the Novikov-
    positive part of the critical value (constants and logarithms of the
    unperturbed point are normalized away); `hessian_determinant` is the
    determinant of the log-coordinate second-derivative matrix.
    """
    alpha: Tuple[int, ...]
    chart: MirrorChart
    coordinates: Dict[int, TruncSeries]
    eliminated: Dict[int, TruncSeries]
    value_correction: TruncSeries
    hessian_determinant: TruncSeries


def _series_pow(s: TruncSeries, e: int) -> TruncSeries:
    if e < 0:
        s = series_invert(s)
        e = -e
    out = None
    for _ in range(e):
        out = s if out is None else out * s
    if out is None:
        one = s.const_coeff()
        raise ValueError("zeroth power needs an explicit unit")
    return out


def _log1p_series(u: TruncSeries, one: RatFunc) -> TruncSeries:
    """log(1 + u) for a series with no constant term."""
    if u.const_coeff() is not None:
        raise ValueError("logarithm needs a vanishing constant term")
    out = TruncSeries.zero(u.space)
    term = TruncSeries.const(u.space, one)
    cap = u.space.total_cap()
    for n in range(1, cap + 1):
        term = term * u
        if term.is_zero():
            break
        out = out + term.scale(Fraction((-1) ** (n + 1), n))
    return out


def _trunc_det(rows: List[List[TruncSeries]], space: VarSpace,
               one: RatFunc) -> TruncSeries:
    n = len(rows)
    if n == 0:
        return TruncSeries.const(space, one)
    if n == 1:
        return rows[0][0]
    out = TruncSeries.zero(space)
    for c in range(n):
        if rows[0][c].is_zero():
            continue
        minor = [[rows[r][cc] for cc in range(n) if cc != c]
                 for r in range(1, n)]
        sub = _trunc_det(minor, space, one)
        out = out + (rows[0][c] * sub).scale(Fraction((-1) ** c))
    return out


def critical_data(data: ToricBundleData, alpha: Tuple[int, ...],
                  cap: int) -> CriticalData:
    """Solve the critical equations as a Novikov series.

    The seed is the unperturbed point where each outside coordinate sits
    at the fixed-point value of its divisor weight; each fixed-point
    iteration step then gains one Novikov order because the eliminated
    monomials carry positive degree.  Nondegeneracy at degree zero is the
    nonvanishing of those fixed-point values, which is asserted.
    """
    chart = chart_solve(data, alpha)
    r = data.restrictions(chart.alpha)
    vars_ = data.base.algebra.vars
    one = RatFunc.one(vars_)
    a_val: Dict[int, RatFunc] = {}
    for j in chart.outside:
        val = r.u[j - 1]
        if val.is_zero():
            raise GenericityError("critical point degenerates at "
                                  "coordinate %d of %r" % (j, alpha))
        a_val[j] = val
    for i in range(data.k):
        for v in chart.novikov_powers[i] + chart.elimination_powers[i]:
            if v.denominator != 1:
                raise BasisError("chart exponents of %r are not integral"
                                 % (alpha,))
        if sum(chart.novikov_powers[i]) <= 0:
            raise AmplenessError("eliminated coordinate %d carries no "
                                 "Novikov degree" % (chart.alpha[i],))
    qnames = tuple("q%d" % (l + 1) for l in range(data.k))
    space = VarSpace([VarGroup("q", qnames, cap)])
    x = {j: TruncSeries.const(space, a_val[j]) for j in chart.outside}
    elim: Dict[int, TruncSeries] = {}
    for _ in range(cap + 1):
        elim = {}
        for i in range(data.k):
            mono = TruncSeries.monomial(
                space,
                {qnames[l]: int(chart.novikov_powers[i][l])
                 for l in range(data.k) if chart.novikov_powers[i][l]},
                one)
            for pos, j in enumerate(chart.outside):
                e = int(chart.elimination_powers[i][pos])
                if e:
                    mono = mono * _series_pow(x[j], -e)
            elim[chart.alpha[i]] = mono
        x = {j: TruncSeries.const(space, a_val[j])
             + sum_series(space,
                          [elim[chart.alpha[i]].scale(
                              chart.elimination_powers[i][pos])
                           for i in range(data.k)
                           if chart.elimination_powers[i][pos]])
             for pos, j in enumerate(chart.outside)}
    # fixpoint sanity: one more sweep must reproduce the solution
    for pos, j in enumerate(chart.outside):
        again = TruncSeries.const(space, a_val[j])
        for i in range(data.k):
            e = chart.elimination_powers[i][pos]
            if e:
                again = again + elim[chart.alpha[i]].scale(e)
        if again != x[j]:
            raise ArithmeticError("critical point iteration failed to "
                                  "stabilize at cap %d" % cap)
    value = TruncSeries.zero(space)
    for j in chart.outside:
        dev = x[j] - TruncSeries.const(space, a_val[j])
        value = value + dev
        logpart = _log1p_series(dev.cmul(a_val[j].inv()), one)
        value = value - logpart.cmul(a_val[j])
    for i in range(data.k):
        value = value + elim[chart.alpha[i]]
    rows = []
    for pos, j in enumerate(chart.outside):
        row = []
        for pos2, j2 in enumerate(chart.outside):
            entry = TruncSeries.zero(space)
            if pos == pos2:
                entry = entry + x[j]
            for i in range(data.k):
                e1 = chart.elimination_powers[i][pos]
                e2 = chart.elimination_powers[i][pos2]
                if e1 and e2:
                    entry = entry + elim[chart.alpha[i]].scale(e1 * e2)
            row.append(entry)
        rows.append(row)
    hess = _trunc_det(rows, space, one)
    lead = hess.const_coeff()
    if lead is None or lead.is_zero():
        raise GenericityError("degenerate Hessian at Novikov degree zero "
                              "for %r" % (alpha,))
    return CriticalData(chart.alpha, chart, x, elim, value, hess)


def sum_series(space: VarSpace,
               parts: Sequence[TruncSeries]) -> TruncSeries:
    out = TruncSeries.zero(space)
    for p in parts:
        out = out + p
    return out


# -------------------------------------------------------- divisor shifts


def divisor_operator(series: Dict[Key, CohClass], space: VarSpace,
                     w: Dict[Key, Tuple[RatFunc, Sequence[Fraction]]],
                     slopes: Sequence[Sequence[int]], zvar: str,
                     split_string: bool = False,
                     ) -> Tuple[Dict[Key, CohClass], Dict[Key, RatFunc]]:
    """Apply exp(w(shifted argument)/z) to a Novikov-indexed series.

    `w` assigns to each Novikov key an affine function of the twisting
    slots: a constant plus one coefficient per slot.  Acting on a term of
    degree D, slot s evaluates to z * sum_a slopes[s][a] D_a, because the
    twisting class differentiates the Novikov monomial by its pairing
    with the curve classes.  All slots read the degree of the term the
    factor ultimately lands on, and with that reading every factor
    commutes, so the exponential is a well-defined monomial-wise rule.

    A nonzero constant part has no Novikov-adic limit; it belongs to the
    string direction instead.  With `split_string` the constant parts are
    returned separately as the parameter shift the caller should apply;
    without it they raise DivisorShiftError.  On a point base there are
    no slots and the whole operator degenerates to that string shift.
    """
    shift: Dict[Key, RatFunc] = {}
    cleaned: Dict[Key, Tuple[RatFunc, Sequence[Fraction]]] = {}
    for key, (const, coefs) in w.items():
        if not const.is_zero():
            if not split_string:
                raise DivisorShiftError("shift function has a constant "
                                        "part at %r" % (key,))
            shift[key] = const
        if any(coefs):
            cleaned[key] = (const, tuple(coefs))
    out: Dict[Key, CohClass] = {}
    for dkey, cls in series.items():
        z = RatFunc.variable(cls.alg.vars, zvar)
        slot_vals = [z.scale(sum(Fraction(sl[a]) * dkey[a]
                                 for a in range(len(dkey))))
                     for sl in slopes]
        expo: Dict[Key, RatFunc] = {}
        for key, (_, coefs) in cleaned.items():
            val = RatFunc.zero(cls.alg.vars)
            for s, cf in enumerate(coefs):
                if cf:
                    val = val + slot_vals[s].scale(cf)
            if not val.is_zero():
                expo[key] = val * z.inv()
        acc = {dkey: cls}
        layer = {dkey: cls}
        for n in range(1, space.total_cap() + 1):
            nxt: Dict[Key, CohClass] = {}
            for k1, c1 in layer.items():
                for k2, v in expo.items():
                    k = space.combine(k1, k2)
                    if k is None:
                        continue
                    add = c1.scale(v * Fraction(1, n))
                    nxt[k] = nxt[k] + add if k in nxt else add
            if not nxt:
                break
            layer = nxt
            for k, v in layer.items():
                acc[k] = acc[k] + v if k in acc else v
        for k, v in acc.items():
            out[k] = out[k] + v if k in out else v
    return out, shift


# ------------------------------------------------------ tensor columns


def tensor_columns(data: ToricBundleData, fiber_cap: int, base_cap: int,
                   zvar: str = "z") -> Tuple[List[VectorSeries], List]:
    """Derivative columns of the hypergeometric series, one per global
    basis label: the fiber monomial acts as iterated z-weighted divisor
    derivatives and the base label as one more parameter derivative."""
    vs = i_function(data, fiber_cap, base_cap, zvar)
    base = data.base.algebra
    deg2 = [l for l, dg in zip(base.labels, base.degrees) if dg == 2]
    cols: List[VectorSeries] = []
    labels = []
    for mono in data.monomials:
        for bl, dg in zip(base.labels, base.degrees):
            if dg == 0:
                name = "t0"
            elif dg == 2:
                name = "s%d" % (deg2.index(bl) + 1)
            else:
                raise BasisError("base labels beyond degree 2 are not "
                                 "supported in tensor columns")
            col = vs.deriv(name)
            for i, e in enumerate(mono):
                for _ in range(e):
                    col = col.deriv("t%d" % (i + 1)).zmul()
            cols.append(col)
            labels.append((mono, bl))
    return cols, labels


def _class_window(cls: CohClass, zvar: str, lo: int,
                  hi: int) -> Dict[int, CohClass]:
    """Laurent window of a class whose scalars are rational in z."""
    alg = cls.alg
    out: Dict[int, Dict] = {}
    for idx, c in enumerate(cls.coeffs):
        if c.is_zero():
            continue
        for e, v in c.laurent_at_zero(zvar, lo, hi).items():
            out.setdefault(e, {})[idx] = v
    win: Dict[int, CohClass] = {}
    for e, entries in out.items():
        coeffs = [entries.get(i, RatFunc.zero(alg.vars))
                  for i in range(alg.rank)]
        win[e] = CohClass(alg, coeffs)
    return win


def _min_valuation(cls: CohClass, zvar: str) -> Optional[int]:
    vals = [c.z_valuation(zvar) for c in cls.coeffs if not c.is_zero()]
    return min(vals) if vals else None


# -------------------------------------------------- stationary phase side


class _SaddleGeometry(NamedTuple):
    base_z: CohAlgebra
    points: Tuple[Tuple[int, ...], ...]
    lam_curve: List[List[int]]
    base_j: Dict[Key, CohClass]
    deg2_positions: List[int]


def _saddle_setup(data: ToricBundleData, space: VarSpace,
                  zvar: str) -> _SaddleGeometry:
    base = data.base
    base_z = extend_scalars(base.algebra, (zvar,))
    lam_curve = [[0] * len(base.curves) for _ in range(data.N)]
    for j in range(data.N):
        for b in range(len(base.curves)):
            v = base.integrate_curve(b, base.lambdas[j])
            if v.denominator != 1:
                raise ValueError("non-integral twisting degree")
            lam_curve[j][b] = int(v)
    base_j = base_j_series(data, space, base_z, zvar)
    deg2 = [i for i, dg in enumerate(base_z.degrees) if dg == 2]
    return _SaddleGeometry(base_z, data.fixed_points(), lam_curve, base_j,
                           deg2)


def _saddle_term(data: ToricBundleData, geo: _SaddleGeometry,
                 alpha: Tuple[int, ...], d: Tuple[int, ...],
                 bdeg: Tuple[int, ...], mono: Tuple[int, ...], blabel,
                 zvar: str, z_order: int) -> Optional[CohClass]:
    """Exact class value of one (fiber degree, base degree) saddle term.

    The value is the product of the weight factor over the chart
    coordinates, the column class of the derivative label, the dressing
    of each outside coordinate (parameter shifted by z times its twisting
    degree), and the base series coefficient of the base label.  The
    dressing series are truncated at `z_order`, which must cover the
    caller's expansion window.
    """
    base_z = geo.base_z
    r = data.restrictions(alpha)
    z = RatFunc.variable(base_z.vars, zvar)
    u = _degree_weights(data, d)
    fact = 1
    zpow = 0
    for j in alpha:
        if u[j - 1] < 0:
            return None
        f = 1
        for v in range(2, u[j - 1] + 1):
            f *= v
        fact *= f
        zpow += u[j - 1]
    lift = lambda c: c.with_vars(base_z.vars)
    # weight of the derivative monomial: prod (alpha^*(P_i) + z(d_i+shift_i))
    cls = base_z.unit.scale(Fraction(1, fact))
    for i, e in enumerate(mono):
        if not e:
            continue
        j = alpha[i]
        shift = sum(geo.lam_curve[j - 1][a] * bdeg[a]
                    for a in range(len(bdeg)))
        factor = CohClass(base_z, [lift(c) for c in r.P[i].coeffs]) \
            + base_z.unit.scale(z.scale(d[i] + shift))
        for _ in range(e):
            cls = cls * factor
    for _ in range(zpow):
        cls = cls.scale(z.inv())
    # dressing of the outside coordinates
    for j in range(1, data.N + 1):
        if j in alpha:
            continue
        a_cls = CohClass(base_z, [lift(c) for c in r.U[j - 1].coeffs])
        ctil = sum(geo.lam_curve[j - 1][a] * bdeg[a]
                   for a in range(len(bdeg)))
        ueff = u[j - 1]
        b_cls = a_cls - base_z.unit.scale(z.scale(ctil))
        try:
            b_inv = b_cls.inverse()
            a_inv = a_cls.inverse()
        except FrobeniusError:
            raise GenericityError("outside coordinate %d is not "
                                  "invertible at %r" % (j, alpha))
        # parameter power from the shifted prefactor
        if ctil >= 0:
            for _ in range(ctil):
                cls = cls * a_cls
        else:
            for _ in range(-ctil):
                cls = cls * a_inv
        # monomial amplitude at the shifted parameter
        if ueff >= 0:
            for _ in range(ueff):
                cls = cls * b_inv
        else:
            for _ in range(-ueff):
                cls = cls * b_cls
        # model series at the shifted parameter
        rats = _saddle_rationals(ueff, z_order)
        model = base_z.zero()
        bpow = base_z.unit
        for kk in range(z_order + 1):
            if kk:
                bpow = bpow * b_inv
            if rats[kk]:
                model = model + bpow.scale((z ** kk).scale(rats[kk]))
        cls = cls * model
        if ctil:
            # exponential of the critical-value difference
            expo = base_z.zero()
            apow = base_z.unit
            for mm in range(1, z_order + 1):
                apow = apow * a_inv
                coef = Fraction(-(ctil ** (mm + 1)), mm * (mm + 1))
                expo = expo + apow.scale((z ** mm).scale(coef))
            eterm = base_z.unit
            layer = base_z.unit
            for p in range(1, z_order + 1):
                layer = (layer * expo).scale(Fraction(1, p))
                if layer.is_zero():
                    break
                eterm = eterm + layer
            cls = cls * eterm
            # square-root ratio of the Gaussian factors
            root = base_z.zero()
            apow = base_z.unit
            for nn in range(z_order + 1):
                if nn:
                    apow = apow * a_inv
                coef = _binom(Fraction(-1, 2), nn) * Fraction((-ctil) ** nn)
                root = root + apow.scale((z ** nn).scale(coef))
            cls = cls * root
    # base column coefficient
    jb = geo.base_j.get(tuple(bdeg))
    if jb is None:
        return None
    deg2 = [l for l, dg in zip(base_z.labels, base_z.degrees) if dg == 2]
    if blabel in deg2:
        cpos = deg2.index(blabel)
        weight = sum(Fraction(data.base.curves[a][cpos]) * bdeg[a]
                     for a in range(len(bdeg)))
        g = (base_z.basis(blabel) * jb).scale(z.inv()) + jb.scale(weight)
    else:
        g = jb.scale(z.inv())
    cls = cls * g
    return None if cls.is_zero() else cls


class EntriesReport(NamedTuple):
    zero: bool
    window: Tuple[int, int]
    checked: int
    failures: List[Tuple[Tuple[int, ...], Tuple, Key, int]]


def entries_check(data: ToricBundleData, fiber_cap: int, base_cap: int,
                  z_hi: int, zvar: str = "z") -> EntriesReport:
    """Compare the two expansions of the dressed derivative columns.

    Left side: restrict each derivative column of the hypergeometric
    series to a fixed point and multiply by the product of reflected
    model expansions of the outside coordinates.  Right side: the sum of
    exact saddle terms over pairs of fiber and base degrees, where the
    base degree shifts the fiber Novikov exponent by the twisting degree
    of the chart coordinates.  Both sides are expanded over a common
    Laurent window in the loop variable and must agree coefficientwise.
    """
    cols, labels = tensor_columns(data, fiber_cap, base_cap, zvar)
    space = cols[0].frame.space if cols else None
    geo = _saddle_setup(data, space, zvar)
    restricted = {}
    lo = 0
    for ai, alpha in enumerate(geo.points):
        for ci, col in enumerate(cols):
            rs = restrict_series(col, data, alpha)
            restricted[(ai, ci)] = rs
            for cls in rs.terms.values():
                v = _min_valuation(cls, zvar)
                if v is not None:
                    lo = min(lo, v)
    window = (lo, z_hi)
    gamma_order = z_hi - lo
    nbase = len(data.base.curves)
    failures = []
    checked = 0
    keys = list(cols[0].frame.keys()) if cols else []
    for ai, alpha in enumerate(geo.points):
        gam = _honest_gamma(data, alpha, gamma_order)
        gam = {k: CohClass(geo.base_z,
                           [c.with_vars(geo.base_z.vars) for c in v.coeffs])
               for k, v in gam.items()}
        for ci, col in enumerate(cols):
            mono, blabel = labels[ci]
            rs = restricted[(ai, ci)]
            for key in keys:
                d = space.group_exponents(key, "q") if data.k else ()
                bdeg = space.group_exponents(key, "Q") if nbase else ()
                # left side: window of the restriction, then the gamma
                # convolution
                raw = rs.terms.get(key)
                rwin = (_class_window(raw, zvar, lo - gamma_order, z_hi)
                        if raw is not None else {})
                lhs: Dict[int, CohClass] = {}
                for gk, gcls in gam.items():
                    for e, ccls in rwin.items():
                        eo = e + gk
                        if lo <= eo <= z_hi:
                            add = gcls * ccls
                            lhs[eo] = lhs[eo] + add if eo in lhs else add
                # right side: sum of saddle terms with shifted degrees
                rhs_cls = geo.base_z.zero()
                for bd in itertools.product(*(range(b + 1) for b in bdeg)):
                    shift = tuple(
                        sum(geo.lam_curve[alpha[i] - 1][a] * bd[a]
                            for a in range(nbase))
                        for i in range(data.k))
                    dd = tuple(d[i] - shift[i] for i in range(data.k))
                    if any(v < 0 for v in dd):
                        continue
                    rest = tuple(bdeg[a] - bd[a] for a in range(nbase))
                    if any(rest):
                        continue
                    term = _saddle_term(data, geo, alpha, dd, bd, mono,
                                        blabel, zvar, z_hi - lo)
                    if term is not None:
                        rhs_cls = rhs_cls + term
                rhs = _class_window(rhs_cls, zvar, lo, z_hi)
                for e in range(lo, z_hi + 1):
                    lv = lhs.get(e)
                    rv = rhs.get(e)
                    checked += 1
                    if lv is None or lv.is_zero():
                        bad = rv is not None and not rv.is_zero()
                    elif rv is None:
                        bad = not lv.is_zero()
                    else:
                        bad = not (lv - rv).is_zero()
                    if bad:
                        failures.append((alpha, labels[ci], key, e))
    return EntriesReport(not failures, window, checked, failures)


# ------------------------------------------------------ saddle expansions


class SaddleExpansion(NamedTuple):
    """Normalized stationary-phase row of one fixed point (point base).

    `rows[mono][key]` is the exact scalar value of the saddle sum for the
    derivative monomial `mono` at the Novikov key, truncated in the loop
    variable at `z_order`; `psi[mono][key]` is its window of nonnegative
    powers after multiplying by exp(-value_correction/z), which removes
    every pole.  `value_correction` is the Novikov-positive critical
    value from `critical_data`.
    """
    alpha: Tuple[int, ...]
    value_correction: TruncSeries
    z_order: int
    rows: Dict[Tuple[int, ...], Dict[Key, RatFunc]]
    psi: Dict[Tuple[int, ...], Dict[Key, Dict[int, RatFunc]]]


def saddle_expansion(data: ToricBundleData, alpha: Tuple[int, ...],
                     fiber_cap: int, z_hi: int,
                     zvar: str = "z") -> SaddleExpansion:
    """Assemble the normalized saddle rows over a point base.

    Removing the exponential of the critical value must leave a series
    with no poles in the loop variable; a surviving pole raises
    ArithmeticError since it signals an inconsistent critical value.
    """
    if data.base.curves:
        raise ValueError("saddle rows are assembled over a point base")
    alpha = tuple(sorted(alpha))
    r = data.restrictions(alpha)
    scal_vars = data.base.algebra.vars
    vars_z = scal_vars + ((zvar,) if zvar not in scal_vars else ())
    z = RatFunc.variable(vars_z, zvar)
    qnames = tuple("q%d" % (i + 1) for i in range(data.k))
    space = VarSpace([VarGroup("q", qnames, fiber_cap)])
    maxu = 0
    keys = [k for k in itertools.product(range(fiber_cap + 1),
                                         repeat=data.k)
            if space.admissible(k)]
    for key in keys:
        u = _degree_weights(data, key)
        maxu = max(maxu, max(u))
    z_order = z_hi + 2 * fiber_cap + maxu
    pstar = [v.with_vars(vars_z) for v in r.p]
    ustar = [v.with_vars(vars_z) for v in r.u]
    rows: Dict[Tuple[int, ...], Dict[Key, RatFunc]] = {}
    for mono in data.monomials:
        row: Dict[Key, RatFunc] = {}
        for key in keys:
            u = _degree_weights(data, key)
            if any(u[j - 1] < 0 for j in alpha):
                continue
            val = RatFunc.one(vars_z)
            for i, e in enumerate(mono):
                base_val = pstar[i] + z.scale(key[i])
                for _ in range(e):
                    val = val * base_val
            for j in alpha:
                f = 1
                for v in range(2, u[j - 1] + 1):
                    f *= v
                val = val.scale(Fraction(1, f)) * (z.inv() ** u[j - 1])
            for j in range(1, data.N + 1):
                if j in alpha:
                    continue
                a_j = ustar[j - 1]
                if a_j.is_zero():
                    raise GenericityError("degenerate weight at %d" % j)
                val = val * (a_j.inv() ** u[j - 1]) if u[j - 1] >= 0 \
                    else val * (a_j ** (-u[j - 1]))
                rats = _saddle_rationals(u[j - 1], z_order)
                model = RatFunc.zero(vars_z)
                for kk in range(z_order + 1):
                    if rats[kk]:
                        model = model + (z ** kk).scale(rats[kk]) \
                            * (a_j.inv() ** kk)
                val = val * model
            if not val.is_zero():
                row[key] = val
        rows[mono] = row
    cd = critical_data(data, alpha, fiber_cap)
    wlift = cd.value_correction.map_coeffs(
        lambda c: -(c.with_vars(vars_z) * z.inv()))
    espace = wlift.space
    eser = series_exp(wlift, RatFunc.one(vars_z))
    psi: Dict[Tuple[int, ...], Dict[Key, Dict[int, RatFunc]]] = {}
    for mono, row in rows.items():
        out: Dict[Key, Dict[int, RatFunc]] = {}
        for key in keys:
            total = RatFunc.zero(vars_z)
            for k2, ec in eser.items():
                k1 = tuple(a - b for a, b in zip(key, k2))
                if any(v < 0 for v in k1):
                    continue
                mv = row.get(tuple(k1))
                if mv is not None:
                    total = total + mv * ec
            if total.is_zero():
                continue
            if total.z_valuation(zvar) < 0:
                raise ArithmeticError(
                    "saddle row keeps a pole after removing the critical "
                    "value exponential at %r, %r" % (mono, key))
            out[key] = {e: c for e, c in
                        total.laurent_at_zero(zvar, 0, z_hi).items()
                        if not c.is_zero()}
        psi[mono] = out
    return SaddleExpansion(alpha, cd.value_correction, z_order, rows, psi)


# ------------------------------------------- change of frame at weight 0


def nonequivariant_r_factor(data: ToricBundleData, fiber_cap: int,
                            base_cap: int = 0,
                            zvar: str = "z") -> Dict[Key, Mat]:
    """Novikov-graded change-of-frame factor of the derivative columns.

    The stationary-phase side of the entries identity carries, per fixed
    point, a scalar dressing: the model expansions of the outside
    coordinates and the exponential of the critical value.  Peeling all
    of it into the fixed-point frame leaves exactly the matrix of global
    derivative columns with the loop sign reflected; its degree-zero term
    is the identity, so it is invertible in the Novikov-adic topology.
    The inverse returned here therefore has entries whose denominators
    are products of ladder factors, finite when the torus weights vanish.
    """
    cols, _labels = tensor_columns(data, fiber_cap, base_cap, zvar)
    frame = cols[0].frame
    n = frame.alg.rank
    if len(cols) != n:
        raise BasisError("derivative columns do not span the frame")
    vars_ = frame.alg.vars
    mats: Dict[Key, Mat] = {}
    for ci, col in enumerate(cols):
        flipped = col.flip_z()
        for key, cls in flipped.terms.items():
            m = mats.get(key)
            if m is None:
                m = [[RatFunc.zero(vars_) for _ in range(n)]
                     for _ in range(n)]
                mats[key] = m
            for r in range(n):
                m[r][ci] = cls.coeffs[r]
    series = {key: Mat(rows) for key, rows in mats.items()}
    zero_key = frame.space.zero_key
    ident = Mat.identity(n, vars_)
    if series.get(zero_key) != ident:
        raise FrobeniusError("degree-zero column matrix is not the "
                             "identity in the monomial basis")
    inv: Dict[Key, Mat] = {zero_key: ident}
    for key in frame.keys():
        if key == zero_key:
            continue
        acc = Mat.zero(n, n, vars_)
        for k2, r2 in inv.items():
            k1 = tuple(a - b for a, b in zip(key, k2))
            if k1 == zero_key or any(v < 0 for v in k1):
                continue
            g = series.get(tuple(k1))
            if g is not None:
                acc = acc + g * r2
        inv[key] = -acc
    return inv


# ----------------------------------------------------- grading residuals


def euler_coefficients(data: ToricBundleData
                       ) -> Tuple[CohClass, Tuple[int, ...],
                                  Tuple[Fraction, ...]]:
    """First Chern class of the bundle at weight zero, with its Novikov
    pairings: the fiber coefficients against the derivative divisors and
    the base coefficients against the degree-2 labels."""
    alg = data.global_algebra()
    base = data.base.algebra
    gl_index = {lab: i for i, lab in enumerate(alg.labels)}
    zero_mono = (0,) * data.k
    unit_bl = next(bl for bl, dg in zip(base.labels, base.degrees)
                   if dg == 0)

    def embed(cls: CohClass) -> CohClass:
        out = [RatFunc.zero(alg.vars)] * alg.rank
        for bl, c in zip(base.labels, cls.coeffs):
            if not c.is_zero():
                out[gl_index[(zero_mono, bl)]] = c
        return CohClass(alg, out)

    c1 = embed(data.base.c1)
    for j in range(1, data.N + 1):
        col = data.divisor_column(j)
        for i in range(data.k):
            if col[i]:
                mono = tuple(int(i == l) for l in range(data.k))
                c1 = c1 + alg.basis((mono, unit_bl)).scale(col[i])
        c1 = c1 - embed(data.base.lambdas[j - 1])
    fib = []
    for i in range(data.k):
        mono = tuple(int(i == l) for l in range(data.k))
        v = c1.coeff((mono, unit_bl))
        if not (v.is_const() and v.const_value().denominator == 1):
            raise ValueError("fiber Euler pairing is not an integer")
        fib.append(int(v.const_value()))
    deg2 = [bl for bl, dg in zip(base.labels, base.degrees) if dg == 2]
    bse = []
    for bl in deg2:
        v = c1.coeff((zero_mono, bl))
        if not v.is_const():
            raise ValueError("base Euler pairing is not constant")
        bse.append(v.const_value())
    return c1, tuple(fib), tuple(bse)


class GradingReport(NamedTuple):
    zero: bool
    fiber_pairings: Tuple[int, ...]
    base_pairings: Tuple[Fraction, ...]
    commutation_checked: int
    divisor_checked: int
    failures: List[Tuple[str, object]]


def grading_residuals(data: ToricBundleData, fiber_cap: int,
                      base_cap: int = 0, t_cap: int = 2,
                      zvar: str = "z") -> GradingReport:
    """Check the homogeneity and divisor structure of the columns.

    Commutation part: at weight zero, every Novikov coefficient of every
    derivative column must satisfy the first-order equation that pairs
    the loop scaling with the Novikov grading by the first Chern class
    and the half-degree difference of row and column labels.  Divisor
    part: materialize each divisor parameter, reflect the loop variable,
    and compare the Novikov rescaling of each coefficient against the
    formal parameter derivative plus the cup action over the loop
    variable.
    """
    _c1, fib, bse = euler_coefficients(data)
    cols, labels = tensor_columns(data, fiber_cap, base_cap, zvar)
    frame = cols[0].frame
    alg = frame.alg
    lam = list(data.lambda_names)
    space = frame.space
    nbase = len(data.base.curves)
    base = data.base.algebra
    deg2 = [bl for bl, dg in zip(base.labels, base.degrees) if dg == 2]
    failures: List[Tuple[str, object]] = []
    ccount = 0
    for ci, col in enumerate(cols):
        mono, bl = labels[ci]
        half_col = Fraction(sum(mono)) + Fraction(
            base.degrees[base.labels.index(bl)], 2)
        for key, cls in col.terms.items():
            d = space.group_exponents(key, "q") if data.k else ()
            bdeg = space.group_exponents(key, "Q") if nbase else ()
            novik = sum(Fraction(fib[i]) * d[i] for i in range(len(d)))
            novik += sum(bse[a] * bdeg[a] for a in range(len(bdeg)))
            for r in range(alg.rank):
                g = cls.coeffs[r].subs_zero(lam)
                ccount += 1
                if g.is_zero():
                    continue
                half_row = Fraction(alg.degrees[r], 2)
                zvar_f = RatFunc.variable(alg.vars, zvar)
                res = zvar_f * g.derivative(zvar) \
                    + g.scale(novik + half_row - half_col)
                if not res.is_zero():
                    failures.append(("commutation",
                                     (labels[ci], key, alg.labels[r])))
    vs = i_function(data, fiber_cap, base_cap, zvar)
    dnames = ["t%d" % (i + 1) for i in range(data.k)]
    dnames += ["s%d" % (a + 1) for a in range(len(deg2))]
    dcount = 0
    for dn in dnames:
        dirn = vs.frame.direction(dn)
        mat = materialize(vs, [dn], t_cap, label="m")
        flip = mat.flip_z()
        fr = flip.frame
        lhs = {k: c.scale(fr.key_weight(k, dirn))
               for k, c in flip.terms.items()}
        rhs = flip.deriv(dn) + flip.cup(dirn.cls).zdiv()
        for key in fr.keys():
            texp = sum(fr.space.group_exponents(key, "m"))
            if texp > t_cap - 1:
                continue
            lv = lhs.get(key)
            rv = rhs.terms.get(key)
            dcount += 1
            if lv is None or lv.is_zero():
                bad = rv is not None and not rv.is_zero()
            elif rv is None:
                bad = not lv.is_zero()
            else:
                bad = not (lv - rv).is_zero()
            if bad:
                failures.append(("divisor", (dn, key)))
    return GradingReport(not failures, fib, bse, ccount, dcount, failures)

"""Exact multivariate polynomials over the rationals.

Every polynomial carries a fixed, ordered variable universe (a tuple of
names).  Monomials are exponent tuples aligned with that universe, and
coefficients are `fractions.Fraction`.  All arithmetic is exact; there is
no floating point anywhere in this package.

The gcd here is the primitive pseudo-remainder sequence, done recursively
one variable at a time.  It is not meant for huge inputs -- the engine
works with a handful of equivariant parameters plus one distinguished
variable for the loop-space parameter -- but it is exact and total.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Tuple

Monomial = Tuple[int, ...]

_ZERO = Fraction(0)
_ONE = Fraction(1)


class Poly:
    """Immutable multivariate polynomial with Fraction coefficients."""

    __slots__ = ("vars", "terms")

    def __init__(self, vars: Tuple[str, ...], terms: Dict[Monomial, Fraction]):
        # terms is trusted to be canonical (no zero coefficients).
        self.vars = vars
        self.terms = terms

    # ---------------------------------------------------------- construction

    @staticmethod
    def zero(vars: Tuple[str, ...]) -> "Poly":
        return Poly(vars, {})

    @staticmethod
    def const(vars: Tuple[str, ...], c) -> "Poly":
        c = Fraction(c)
        if c == 0:
            return Poly(vars, {})
        return Poly(vars, {(0,) * len(vars): c})

    @staticmethod
    def one(vars: Tuple[str, ...]) -> "Poly":
        return Poly.const(vars, 1)

    @staticmethod
    def variable(vars: Tuple[str, ...], name: str) -> "Poly":
        i = vars.index(name)
        mono = tuple(1 if j == i else 0 for j in range(len(vars)))
        return Poly(vars, {mono: _ONE})

    @staticmethod
    def from_terms(vars: Tuple[str, ...], items: Iterable[Tuple[Monomial, Fraction]]) -> "Poly":
        d: Dict[Monomial, Fraction] = {}
        for m, c in items:
            c = Fraction(c)
            if c == 0:
                continue
            acc = d.get(m)
            if acc is None:
                d[m] = c
            else:
                acc = acc + c
                if acc == 0:
                    del d[m]
                else:
                    d[m] = acc
        return Poly(vars, d)

    # ---------------------------------------------------------------- basics

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        if not self.terms:
            return True
        if len(self.terms) > 1:
            return False
        (m, _), = self.terms.items()
        return not any(m)

    def const_value(self) -> Fraction:
        """Value as a constant; raises if the polynomial is not constant."""
        if not self.terms:
            return _ZERO
        if not self.is_const():
            raise ValueError("polynomial is not constant: %s" % (self,))
        return next(iter(self.terms.values()))

    def degree(self, var: str | None = None) -> int:
        """Total degree, or degree in one variable.  Zero polynomial: -1."""
        if not self.terms:
            return -1
        if var is None:
            return max(sum(m) for m in self.terms)
        i = self.vars.index(var)
        return max(m[i] for m in self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    def __bool__(self) -> bool:
        return bool(self.terms)

    # ------------------------------------------------------------ arithmetic

    def _check(self, other: "Poly"):
        if self.vars != other.vars:
            raise ValueError("mixed variable universes: %r vs %r" % (self.vars, other.vars))

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        d = dict(self.terms)
        for m, c in other.terms.items():
            acc = d.get(m)
            if acc is None:
                d[m] = c
            else:
                acc = acc + c
                if acc == 0:
                    del d[m]
                else:
                    d[m] = acc
        return Poly(self.vars, d)

    def __neg__(self) -> "Poly":
        return Poly(self.vars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        self._check(other)
        if not self.terms or not other.terms:
            return Poly(self.vars, {})
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        d: Dict[Monomial, Fraction] = {}
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                m = tuple(x + y for x, y in zip(m1, m2))
                c = c1 * c2
                acc = d.get(m)
                if acc is None:
                    d[m] = c
                else:
                    acc = acc + c
                    if acc == 0:
                        del d[m]
                    else:
                        d[m] = acc
        return Poly(self.vars, d)

    def scale(self, c) -> "Poly":
        c = Fraction(c)
        if c == 0:
            return Poly(self.vars, {})
        return Poly(self.vars, {m: c * v for m, v in self.terms.items()})

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.one(self.vars)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    # -------------------------------------------------- substitution, calculus

    def subs(self, assignment: Dict[str, "Poly | Fraction | int"]) -> "Poly":
        """Substitute polynomials (or constants) for some of the variables."""
        polys: Dict[int, Poly] = {}
        for name, val in assignment.items():
            i = self.vars.index(name)
            polys[i] = val if isinstance(val, Poly) else Poly.const(self.vars, val)
        out = Poly.zero(self.vars)
        # cache powers per substituted variable
        powcache: Dict[Tuple[int, int], Poly] = {}
        for m, c in self.terms.items():
            rest = tuple(0 if i in polys else e for i, e in enumerate(m))
            term = Poly(self.vars, {rest: c})
            for i, e in enumerate(m):
                if i in polys and e:
                    key = (i, e)
                    p = powcache.get(key)
                    if p is None:
                        p = polys[i] ** e
                        powcache[key] = p
                    term = term * p
            out = out + term
        return out

    def with_vars(self, new_vars: Tuple[str, ...]) -> "Poly":
        """Re-express over a different variable tuple.

        Every variable actually occurring in a term must be present in
        `new_vars`; unused variables may be dropped or added freely.
        """
        if new_vars == self.vars:
            return self
        pos = []
        for v in self.vars:
            pos.append(new_vars.index(v) if v in new_vars else -1)
        n = len(new_vars)
        terms: Dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            m2 = [0] * n
            for i, e in enumerate(m):
                if not e:
                    continue
                if pos[i] < 0:
                    raise ValueError("variable %r not in target universe"
                                     % (self.vars[i],))
                m2[pos[i]] = e
            terms[tuple(m2)] = c
        return Poly(new_vars, terms)

    def derivative(self, var: str) -> "Poly":
        i = self.vars.index(var)
        d: Dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            if m[i]:
                m2 = m[:i] + (m[i] - 1,) + m[i + 1:]
                d[m2] = d.get(m2, _ZERO) + c * m[i]
        return Poly(self.vars, {m: c for m, c in d.items() if c != 0})

    def coeffs_in(self, var: str) -> Dict[int, "Poly"]:
        """View as a univariate polynomial in `var` with Poly coefficients."""
        i = self.vars.index(var)
        out: Dict[int, Dict[Monomial, Fraction]] = {}
        for m, c in self.terms.items():
            e = m[i]
            m2 = m[:i] + (0,) + m[i + 1:]
            out.setdefault(e, {})[m2] = c
        return {e: Poly(self.vars, d) for e, d in out.items()}

    @staticmethod
    def from_coeffs_in(vars: Tuple[str, ...], var: str, coeffs: Dict[int, "Poly"]) -> "Poly":
        i = vars.index(var)
        d: Dict[Monomial, Fraction] = {}
        for e, p in coeffs.items():
            for m, c in p.terms.items():
                m2 = m[:i] + (m[i] + e,) + m[i + 1:]
                d[m2] = d.get(m2, _ZERO) + c
        return Poly(vars, {m: c for m, c in d.items() if c != 0})

    # ---------------------------------------------------------- division, gcd

    def _lex_lead(self) -> Tuple[Monomial, Fraction]:
        m = max(self.terms)
        return m, self.terms[m]

    def lex_lead_coeff(self) -> Fraction:
        return self._lex_lead()[1]

    def divexact(self, other: "Poly") -> "Poly":
        """Exact division; raises ValueError if `other` does not divide self."""
        self._check(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if other.is_const():
            return self.scale(_ONE / other.const_value())
        q: Dict[Monomial, Fraction] = {}
        r = self
        lm, lc = other._lex_lead()
        while not r.is_zero():
            rm, rc = r._lex_lead()
            qm = tuple(a - b for a, b in zip(rm, lm))
            if any(e < 0 for e in qm):
                raise ValueError("inexact polynomial division")
            qc = rc / lc
            q[qm] = q.get(qm, _ZERO) + qc
            r = r - Poly(self.vars, {qm: qc}) * other
        return Poly(self.vars, {m: c for m, c in q.items() if c != 0})

    def divides(self, other: "Poly") -> bool:
        try:
            other.divexact(self)
            return True
        except ValueError:
            return False

    def _active_vars(self) -> Tuple[int, ...]:
        n = len(self.vars)
        seen = [0] * n
        for m in self.terms:
            for i, e in enumerate(m):
                if e:
                    seen[i] = 1
        return tuple(i for i in range(n) if seen[i])

    def gcd(self, other: "Poly") -> "Poly":
        """Gcd normalized to have lex-leading coefficient 1."""
        self._check(other)
        g = _gcd_rec(self, other)
        if g.is_zero():
            return g
        return g.scale(_ONE / g.lex_lead_coeff())

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, reverse=True):
            c = self.terms[m]
            factors = [str(c)]
            for name, e in zip(self.vars, m):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append("%s^%d" % (name, e))
            parts.append("*".join(factors))
        return " + ".join(parts)


def _univar_content_pp(p: Poly, var: str) -> Tuple[Poly, Poly]:
    """Content (gcd of Poly coefficients in `var`) and primitive part."""
    coeffs = p.coeffs_in(var)
    content = Poly.zero(p.vars)
    for c in coeffs.values():
        content = _gcd_rec(content, c)
        if content.is_const() and not content.is_zero():
            break
    if content.is_zero():
        return content, p
    content = content.scale(_ONE / content.lex_lead_coeff())
    if content.is_const():
        return Poly.one(p.vars), p
    return content, p.divexact(content)


def _pseudo_rem(a: Dict[int, Poly], b: Dict[int, Poly], vars, var) -> Dict[int, Poly]:
    """Pseudo-remainder of univariate-with-Poly-coefficient views."""
    da, db = max(a), max(b)
    lb = b[db]
    r = dict(a)
    while r and max(r) >= db:
        dr = max(r)
        lr = r[dr]
        # r <- lb*r - lr*x^(dr-db)*b
        newr: Dict[int, Poly] = {}
        for e, c in r.items():
            newr[e] = c * lb
        for e, c in b.items():
            e2 = e + dr - db
            newr[e2] = newr.get(e2, Poly.zero(vars)) - lr * c
        r = {e: c for e, c in newr.items() if not c.is_zero()}
    return r


_EVAL_POINTS = ((2, 3, 5, 7, 11, 13, 17, 19, 23, 29),
                (-3, 5, -7, 11, -13, 17, -19, 23, -29, 31),
                (4, -9, 6, 25, -15, 8, 21, -35, 12, 33))


def _univar_image(p: Poly, vi: int, pts: Dict[int, int]) -> Dict[int, Fraction]:
    """Evaluate every variable except one at integer points."""
    out: Dict[int, Fraction] = {}
    for mono, c in p.terms.items():
        v = c
        for i, e in enumerate(mono):
            if e and i != vi:
                v = v * pts[i] ** e
        got = out.get(mono[vi], _ZERO) + v
        if got:
            out[mono[vi]] = got
        elif mono[vi] in out:
            del out[mono[vi]]
    return out


def _univar_mod(a: Dict[int, Fraction], b: Dict[int, Fraction]) -> Dict[int, Fraction]:
    db = max(b)
    lead = b[db]
    a = dict(a)
    while a:
        da = max(a)
        if da < db:
            break
        f = a.pop(da) / lead
        for e, c in b.items():
            if e == db:
                continue
            t = e + da - db
            got = a.get(t, _ZERO) - f * c
            if got:
                a[t] = got
            else:
                a.pop(t, None)
    return a


def _univar_gcd_degree(u: Dict[int, Fraction], v: Dict[int, Fraction]) -> int:
    a, b = dict(u), dict(v)
    while b:
        a, b = b, _univar_mod(a, b)
    return max(a) if a else -1


def _certified_var_free(a: Poly, b: Poly, var: str) -> bool:
    """True proves gcd(a, b) has degree zero in var.

    If the leading coefficient of `a` in var survives an integer
    evaluation of the other variables, the gcd's image keeps its full
    var-degree and divides the univariate image gcd; coprime images are
    therefore a proof, while a failed trial proves nothing.
    """
    vi = a.vars.index(var)
    da = a.degree(var)
    others = sorted((set(a._active_vars()) | set(b._active_vars())) - {vi})
    for row in _EVAL_POINTS:
        pts = {i: row[j % len(row)] for j, i in enumerate(others)}
        ia = _univar_image(a, vi, pts)
        if not ia or max(ia) != da:
            continue
        ib = _univar_image(b, vi, pts)
        if not ib:
            continue
        if _univar_gcd_degree(ia, ib) == 0:
            return True
    return False


def _univar_content(p: Poly, var: str) -> Poly:
    coeffs = p.coeffs_in(var)
    content = Poly.zero(p.vars)
    for c in coeffs.values():
        content = _gcd_rec(content, c)
        if content.is_const() and not content.is_zero():
            return Poly.one(p.vars)
    if content.is_zero():
        return content
    return content.scale(_ONE / content.lex_lead_coeff())


def _eval_var(p: Poly, ui: int, t: int) -> Poly:
    """Substitute an integer for the variable at index ui."""
    d: Dict[Monomial, Fraction] = {}
    for mono, c in p.terms.items():
        e = mono[ui]
        v = c * t ** e if e else c
        if not v:
            continue
        m2 = mono[:ui] + (0,) + mono[ui + 1:]
        got = d.get(m2, _ZERO) + v
        if got:
            d[m2] = got
        elif m2 in d:
            del d[m2]
    return Poly(p.vars, d)


def _int_points():
    yield 0
    t = 1
    while True:
        yield t
        yield -t
        t += 1


def _newton_interp(points, vars: Tuple[str, ...], ui: int) -> Poly:
    """Polynomial through (t, value) pairs; values are polys free of the
    interpolation variable."""
    ts = [Fraction(t) for t, _ in points]
    coef = [v for _, v in points]
    n = len(points)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]).scale(_ONE / (ts[i] - ts[i - j]))
    upoly = Poly.variable(vars, vars[ui])
    out = coef[-1]
    for i in range(n - 2, -1, -1):
        out = out * (upoly - Poly.const(vars, ts[i])) + coef[i]
    return out


def _modular_gcd(a: Poly, b: Poly, vi: int) -> "Poly | None":
    """Dense evaluation-and-interpolation gcd.

    One parameter variable at a time is evaluated at integers, images are
    combined by recursion, and the result is certified by trial division;
    an unlucky run of points returns None and the caller falls back to the
    pseudo-remainder path."""
    var = a.vars[vi]
    act = (set(a._active_vars()) | set(b._active_vars())) - {vi}
    if not act:
        ga = _univar_image(a, vi, {})
        gb = _univar_image(b, vi, {})
        while gb:
            ga, gb = gb, _univar_mod(ga, gb)
        if not ga:
            return Poly.zero(a.vars)
        lead = ga[max(ga)]
        nvars = len(a.vars)
        terms = {}
        for e, c in ga.items():
            mono = tuple(e if i == vi else 0 for i in range(nvars))
            terms[mono] = c / lead
        return Poly(a.vars, terms)
    # the gcd splits into a content and a primitive part along var; the
    # interpolation below only sees the primitive parts
    ca = _univar_content(a, var)
    cb = _univar_content(b, var)
    cont = _gcd_rec(ca, cb)
    pa = a if ca.is_const() else a.divexact(ca)
    pb = b if cb.is_const() else b.divexact(cb)
    ui = max(act)
    u = a.vars[ui]
    lc_a = pa.coeffs_in(var)[pa.degree(var)]
    lc_b = pb.coeffs_in(var)[pb.degree(var)]
    gamma = _gcd_rec(lc_a, lc_b)
    need = min(pa.degree(u), pb.degree(u)) + gamma.degree(u) + 1
    kept = []
    dmin = None
    tried = 0
    for t in _int_points():
        tried += 1
        if tried > 8 * need + 24:
            return None
        if _eval_var(lc_a, ui, t).is_zero() or _eval_var(lc_b, ui, t).is_zero():
            continue
        g = _gcd_rec(_eval_var(pa, ui, t), _eval_var(pb, ui, t))
        dg = g.degree(var)
        if dg == 0:
            # the primitive parts are coprime in var
            return cont
        if dmin is None or dg < dmin:
            dmin = dg
            kept = []
        if dg > dmin:
            continue
        try:
            factor = _eval_var(gamma, ui, t).divexact(g.coeffs_in(var)[dg])
        except ValueError:
            continue
        kept.append((t, g * factor))
        if len(kept) < need:
            continue
        cand = _newton_interp(kept, a.vars, ui)
        ccand = _univar_content(cand, var)
        if not ccand.is_zero() and not ccand.is_const():
            cand = cand.divexact(ccand)
        if cand.divides(pa) and cand.divides(pb):
            return cont * cand
        return None
    return None


def _gcd_rec(a: Poly, b: Poly) -> Poly:
    if a.is_zero():
        return b
    if b.is_zero():
        return a
    if a.is_const() or b.is_const():
        return Poly.one(a.vars)
    av, bv = a._active_vars(), b._active_vars()
    common = [i for i in av if i in bv]
    if not common:
        return Poly.one(a.vars)
    var = a.vars[common[-1]]
    if len(av) == 1 and len(bv) == 1:
        # single shared variable: monic Euclid on plain coefficient dicts
        return _modular_gcd(a, b, a.vars.index(var))
    if _certified_var_free(a, b, var):
        return _gcd_rec(_univar_content(a, var), _univar_content(b, var))
    g = _modular_gcd(a, b, a.vars.index(var))
    if g is not None:
        return g
    ca, pa = _univar_content_pp(a, var)
    cb, pb = _univar_content_pp(b, var)
    cont = _gcd_rec(ca, cb)
    ua, ub = pa.coeffs_in(var), pb.coeffs_in(var)
    if max(ua) < max(ub):
        ua, ub = ub, ua
    while True:
        r = _pseudo_rem(ua, ub, a.vars, var)
        if not r:
            break
        if max(r) == 0:
            # nonzero constant (in var) remainder: coprime in var
            ub = {0: Poly.one(a.vars)}
            break
        rp = Poly.from_coeffs_in(a.vars, var, r)
        _, rp = _univar_content_pp(rp, var)
        ua, ub = ub, rp.coeffs_in(var)
    g = Poly.from_coeffs_in(a.vars, var, ub)
    _, g = _univar_content_pp(g, var)
    if g.degree(var) == 0 and g.is_const():
        return cont
    if g.degree(var) == 0:
        return cont
    return cont * g

"""Rational functions over the rationals, with decidable equality.

A RatFunc is a reduced fraction num/den of Polys over a shared variable
universe.  Canonical form: gcd(num, den) = 1 and den has lex-leading
coefficient 1, so structural equality is semantic equality.

The same type doubles as the coefficient field for objects that are
rational in the loop parameter: the parameter is simply one more variable
in the universe, and `laurent_at_zero` / `laurent_at_inf` produce exact
Laurent expansions with respect to it.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Tuple

from .polys import Poly

_ONE = Fraction(1)


class RatFunc:
    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly, reduce: bool = True):
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            num = Poly.zero(num.vars)
            den = Poly.one(num.vars)
        elif reduce:
            if den.is_const():
                num = num.scale(_ONE / den.const_value())
                den = Poly.one(num.vars)
            else:
                g = num.gcd(den)
                if not g.is_const():
                    num = num.divexact(g)
                    den = den.divexact(g)
                lc = den.lex_lead_coeff()
                if lc != 1:
                    num = num.scale(_ONE / lc)
                    den = den.scale(_ONE / lc)
        self.num = num
        self.den = den

    # ---------------------------------------------------------- construction

    @staticmethod
    def from_poly(p: Poly) -> "RatFunc":
        return RatFunc(p, Poly.one(p.vars), reduce=False)

    @staticmethod
    def const(vars: Tuple[str, ...], c) -> "RatFunc":
        return RatFunc(Poly.const(vars, c), Poly.one(vars), reduce=False)

    @staticmethod
    def zero(vars: Tuple[str, ...]) -> "RatFunc":
        return RatFunc(Poly.zero(vars), Poly.one(vars), reduce=False)

    @staticmethod
    def one(vars: Tuple[str, ...]) -> "RatFunc":
        return RatFunc.const(vars, 1)

    @staticmethod
    def variable(vars: Tuple[str, ...], name: str) -> "RatFunc":
        return RatFunc.from_poly(Poly.variable(vars, name))

    # ---------------------------------------------------------------- basics

    @property
    def vars(self) -> Tuple[str, ...]:
        return self.num.vars

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_const(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def const_value(self) -> Fraction:
        if not self.is_const():
            raise ValueError("not a constant: %s" % (self,))
        if self.num.is_zero():
            return Fraction(0)
        return self.num.const_value() / self.den.const_value()

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatFunc):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __bool__(self):
        return not self.is_zero()

    # ------------------------------------------------------------ arithmetic

    def __add__(self, other: "RatFunc") -> "RatFunc":
        # Both operands are reduced, so the only factors the sum can share
        # with the common denominator lie in gcd(den, den'); working with
        # that small gcd avoids ever reducing the full cross product.
        if self.num.is_zero():
            return other
        if other.num.is_zero():
            return self
        d1, d2 = self.den, other.den
        if d1 == d2:
            return RatFunc(self.num + other.num, d1)
        g0 = d1.gcd(d2)
        if g0.is_const():
            num = self.num * d2 + other.num * d1
            return RatFunc(num, d1 * d2, reduce=False)
        r1 = d1.divexact(g0)
        r2 = d2.divexact(g0)
        t = self.num * r2 + other.num * r1
        if t.is_zero():
            return RatFunc.zero(self.vars)
        g1 = t.gcd(g0)
        if not g1.is_const():
            t = t.divexact(g1)
            g0 = g0.divexact(g1)
        return RatFunc(t, g0 * r1 * r2, reduce=False)

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.num, self.den, reduce=False)

    def __sub__(self, other: "RatFunc") -> "RatFunc":
        return self + (-other)

    @staticmethod
    def _cross_reduced(n1: Poly, d1: Poly, n2: Poly, d2: Poly):
        """num/den parts of (n1/d1)*(n2/d2), fully cancelled, given that
        gcd(n1, d1) = gcd(n2, d2) = 1."""
        g = n1.gcd(d2)
        if not g.is_const():
            n1 = n1.divexact(g)
            d2 = d2.divexact(g)
        g = n2.gcd(d1)
        if not g.is_const():
            n2 = n2.divexact(g)
            d1 = d1.divexact(g)
        g = n2.gcd(d2)
        if not g.is_const():
            n2 = n2.divexact(g)
            d2 = d2.divexact(g)
        return n1 * n2, d1 * d2

    def __mul__(self, other: "RatFunc") -> "RatFunc":
        if self.num.is_zero() or other.num.is_zero():
            return RatFunc.zero(self.vars)
        num, den = RatFunc._cross_reduced(self.num, self.den,
                                          other.num, other.den)
        return RatFunc(num, den, reduce=False)

    def __truediv__(self, other: "RatFunc") -> "RatFunc":
        if other.num.is_zero():
            raise ZeroDivisionError("division of rational functions by zero")
        if self.num.is_zero():
            return self
        num, den = RatFunc._cross_reduced(self.num, self.den,
                                          other.den, other.num)
        lc = den.lex_lead_coeff()
        if lc != 1:
            num = num.scale(_ONE / lc)
            den = den.scale(_ONE / lc)
        return RatFunc(num, den, reduce=False)

    def inv(self) -> "RatFunc":
        return RatFunc.one(self.vars) / self

    def scale(self, c) -> "RatFunc":
        return RatFunc(self.num.scale(c), self.den, reduce=False)

    def __pow__(self, n: int) -> "RatFunc":
        if n < 0:
            return self.inv() ** (-n)
        return RatFunc(self.num ** n, self.den ** n, reduce=False)

    # -------------------------------------------------------- specialization

    def subs(self, assignment: Dict[str, "Poly | Fraction | int"]) -> "RatFunc":
        """Substitute values/polys for variables; raises on vanishing denominator."""
        return RatFunc(self.num.subs(assignment), self.den.subs(assignment))

    def subs_zero(self, names: List[str]) -> "RatFunc":
        """Set the listed variables to 0 (used for non-equivariant limits)."""
        return self.subs({n: 0 for n in names})

    def with_vars(self, new_vars: Tuple[str, ...]) -> "RatFunc":
        """Re-express over a different variable tuple (see Poly.with_vars)."""
        if new_vars == self.vars:
            return self
        # Canonical form (gcd-reduced, lex-monic denominator) survives the
        # renumbering only if the retained variables keep their relative
        # order; otherwise renormalize.
        kept = [new_vars.index(v) for v in self.vars if v in new_vars]
        monotone = all(a < b for a, b in zip(kept, kept[1:]))
        return RatFunc(self.num.with_vars(new_vars),
                       self.den.with_vars(new_vars), reduce=not monotone)

    def derivative(self, var: str) -> "RatFunc":
        n, d = self.num, self.den
        return RatFunc(n.derivative(var) * d - n * d.derivative(var), d * d)

    # ---------------------------------------------------- Laurent expansions

    def z_valuation(self, var: str) -> int:
        """Order of vanishing at var=0 (negative for a pole)."""
        if self.is_zero():
            raise ValueError("zero has no valuation")
        nmin = min(e for e in self.num.coeffs_in(var))
        dmin = min(e for e in self.den.coeffs_in(var))
        return nmin - dmin

    def laurent_at_zero(self, var: str, lo: int, hi: int) -> Dict[int, "RatFunc"]:
        """Exact Laurent coefficients of self at var=0 for exponents lo..hi.

        Coefficients are RatFuncs free of `var`, returned over the same
        variable universe.
        """
        if self.is_zero():
            return {}
        ncs = self.num.coeffs_in(var)
        dcs = self.den.coeffs_in(var)
        nmin, dmin = min(ncs), min(dcs)
        # shift so denominator has nonzero constant term
        d0 = dcs[dmin]
        out: Dict[int, RatFunc] = {}
        coeffs: Dict[int, RatFunc] = {}
        d0r = RatFunc.from_poly(d0)
        val = nmin - dmin
        for k in range(0, hi - val + 1):
            # c_k of (num shifted)/(den shifted)
            acc = RatFunc.from_poly(ncs.get(k + nmin, Poly.zero(self.vars)))
            for j in range(0, k):
                dj = dcs.get(k - j + dmin)
                if dj is not None:
                    acc = acc - coeffs[j] * RatFunc.from_poly(dj)
            ck = acc / d0r
            coeffs[k] = ck
            e = k + val
            if lo <= e <= hi and not ck.is_zero():
                out[e] = ck
        return out

    def laurent_at_inf(self, var: str, lo: int, hi: int) -> Dict[int, "RatFunc"]:
        """Exact expansion in powers of 1/var; keys are var-exponents lo..hi."""
        if self.is_zero():
            return {}
        ncs = self.num.coeffs_in(var)
        dcs = self.den.coeffs_in(var)
        nmax, dmax = max(ncs), max(dcs)
        # f(var) = var^(nmax-dmax) * (reversed num)/(reversed den) at w=1/var -> 0
        rn = {nmax - e: p for e, p in ncs.items()}
        rd = {dmax - e: p for e, p in dcs.items()}
        d0 = rd[0]
        d0r = RatFunc.from_poly(d0)
        val = nmax - dmax
        out: Dict[int, RatFunc] = {}
        coeffs: Dict[int, RatFunc] = {}
        for k in range(0, val - lo + 1):
            acc = RatFunc.from_poly(rn.get(k, Poly.zero(self.vars)))
            for j in range(0, k):
                dj = rd.get(k - j)
                if dj is not None:
                    acc = acc - coeffs[j] * RatFunc.from_poly(dj)
            ck = acc / d0r
            coeffs[k] = ck
            e = val - k
            if lo <= e <= hi and not ck.is_zero():
                out[e] = ck
        return out

    def z_expand(self, var: str, lo: int, hi: int, at_inf: bool = False) -> Dict[int, "RatFunc"]:
        if at_inf:
            return self.laurent_at_inf(var, lo, hi)
        return self.laurent_at_zero(var, lo, hi)

    def flip_sign(self, var: str) -> "RatFunc":
        """Substitute var -> -var."""
        v = Poly.variable(self.vars, var).scale(-1)
        return self.subs({var: v})

    def has_var(self, name: str) -> bool:
        i = self.vars.index(name)
        return any(m[i] for m in self.num.terms) or any(m[i] for m in self.den.terms)

    def __repr__(self):
        if self.den.is_const() and self.den.const_value() == 1:
            return repr(self.num)
        return "(%s)/(%s)" % (self.num, self.den)

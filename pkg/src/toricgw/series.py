"""Truncated formal series in grouped variables, plus windowed Laurent data.

The engine's generating objects are polynomial in several families of
bookkeeping variables (Novikov variables for fiber and base curve classes,
coordinates on the parameter space) and rational or Laurent in one
distinguished loop parameter.  This module provides:

* `VarSpace` -- an ordered list of variable groups, each with a cap on the
  total degree within the group.  Multiplication silently drops terms past
  a cap, so every computation downstream is automatically truncated.
* `TruncSeries` -- a dict from exponent keys to coefficients.  Coefficients
  are duck-typed: anything with `+`, `*`, unary `-`, `scale` and `is_zero`
  works (rational functions, cohomology classes, matrices).
* `ZSeries` -- a finite window of powers of the loop parameter, each power
  holding one coefficient object, with window bookkeeping under ring ops.

Nothing here knows about geometry; it is shared plumbing.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple

Key = Tuple[int, ...]


class VarGroup(NamedTuple):
    label: str
    names: Tuple[str, ...]
    cap: int


class VarSpace:
    """Ordered variable groups with per-group total-degree caps."""

    def __init__(self, groups: Iterable[VarGroup]):
        self.groups = tuple(groups)
        labels = [g.label for g in self.groups]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate group labels")
        self.names: Tuple[str, ...] = tuple(n for g in self.groups for n in g.names)
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate variable names")
        self.nvars = len(self.names)
        self.zero_key: Key = (0,) * self.nvars
        self._spans: List[Tuple[int, int, int]] = []  # (start, stop, cap)
        pos = 0
        for g in self.groups:
            self._spans.append((pos, pos + len(g.names), g.cap))
            pos += len(g.names)
        self._index = {n: i for i, n in enumerate(self.names)}

    def unit_key(self, name: str) -> Key:
        i = self._index[name]
        return tuple(1 if j == i else 0 for j in range(self.nvars))

    def key_of(self, exponents: Dict[str, int]) -> Key:
        k = [0] * self.nvars
        for n, e in exponents.items():
            k[self._index[n]] = e
        key = tuple(k)
        if not self.admissible(key):
            raise ValueError("key exceeds caps: %r" % (key,))
        return key

    def admissible(self, key: Key) -> bool:
        for start, stop, cap in self._spans:
            if sum(key[start:stop]) > cap:
                return False
        return True

    def combine(self, k1: Key, k2: Key) -> Optional[Key]:
        k = tuple(a + b for a, b in zip(k1, k2))
        return k if self.admissible(k) else None

    def group_degree(self, key: Key, label: str) -> int:
        for g, (start, stop, _cap) in zip(self.groups, self._spans):
            if g.label == label:
                return sum(key[start:stop])
        raise KeyError(label)

    def group_exponents(self, key: Key, label: str) -> Tuple[int, ...]:
        for g, (start, stop, _cap) in zip(self.groups, self._spans):
            if g.label == label:
                return key[start:stop]
        raise KeyError(label)

    def total_cap(self) -> int:
        return sum(g.cap for g in self.groups)

    def __repr__(self):
        return "VarSpace(%s)" % ", ".join(
            "%s=%r cap %d" % (g.label, g.names, g.cap) for g in self.groups)


def _czero(c) -> bool:
    z = getattr(c, "is_zero", None)
    if z is not None:
        return z()
    return c == 0


class TruncSeries:
    """Formal series over a VarSpace; keys past any group cap are dropped."""

    __slots__ = ("space", "terms")

    def __init__(self, space: VarSpace, terms: Dict[Key, object]):
        self.space = space
        self.terms = terms

    @staticmethod
    def zero(space: VarSpace) -> "TruncSeries":
        return TruncSeries(space, {})

    @staticmethod
    def const(space: VarSpace, coeff) -> "TruncSeries":
        if _czero(coeff):
            return TruncSeries(space, {})
        return TruncSeries(space, {space.zero_key: coeff})

    @staticmethod
    def monomial(space: VarSpace, exponents: Dict[str, int], coeff) -> "TruncSeries":
        if _czero(coeff):
            return TruncSeries(space, {})
        return TruncSeries(space, {space.key_of(exponents): coeff})

    def _check(self, other: "TruncSeries"):
        if self.space is not other.space:
            raise ValueError("series from different variable spaces")

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, key: Key):
        return self.terms.get(key)

    def const_coeff(self):
        return self.terms.get(self.space.zero_key)

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        self._check(other)
        d = dict(self.terms)
        for k, c in other.terms.items():
            acc = d.get(k)
            if acc is None:
                d[k] = c
            else:
                acc = acc + c
                if _czero(acc):
                    del d[k]
                else:
                    d[k] = acc
        return TruncSeries(self.space, d)

    def __neg__(self) -> "TruncSeries":
        return TruncSeries(self.space, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        return self + (-other)

    def __mul__(self, other: "TruncSeries") -> "TruncSeries":
        self._check(other)
        if not self.terms or not other.terms:
            return TruncSeries(self.space, {})
        combine = self.space.combine
        d: Dict[Key, object] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = combine(k1, k2)
                if k is None:
                    continue
                c = c1 * c2
                acc = d.get(k)
                if acc is None:
                    d[k] = c
                else:
                    d[k] = acc + c
        return TruncSeries(self.space, {k: c for k, c in d.items() if not _czero(c)})

    def cmul(self, coeff, side: str = "left") -> "TruncSeries":
        """Multiply every coefficient by a fixed one (order matters for matrices)."""
        if side == "left":
            d = {k: coeff * c for k, c in self.terms.items()}
        else:
            d = {k: c * coeff for k, c in self.terms.items()}
        return TruncSeries(self.space, {k: c for k, c in d.items() if not _czero(c)})

    def scale(self, q) -> "TruncSeries":
        q = Fraction(q)
        if q == 0:
            return TruncSeries(self.space, {})
        return TruncSeries(self.space, {k: c.scale(q) for k, c in self.terms.items()})

    def map_coeffs(self, f) -> "TruncSeries":
        d = {}
        for k, c in self.terms.items():
            v = f(c)
            if v is not None and not _czero(v):
                d[k] = v
        return TruncSeries(self.space, d)

    def filter_keys(self, pred) -> "TruncSeries":
        return TruncSeries(self.space, {k: c for k, c in self.terms.items() if pred(k)})

    def items(self):
        return self.terms.items()

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return self.space is other.space and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "TruncSeries(0)"
        bits = []
        for k in sorted(self.terms):
            mono = "*".join("%s^%d" % (n, e) for n, e in zip(self.space.names, k) if e)
            bits.append("[%s] %r" % (mono or "1", self.terms[k]))
        return "TruncSeries(" + "; ".join(bits) + ")"


class DivergenceError(RuntimeError):
    pass


def series_exp(s: TruncSeries, one) -> TruncSeries:
    """exp of a series with no constant term.  `one` is the coefficient unit."""
    if s.const_coeff() is not None:
        raise ValueError("series_exp needs a vanishing constant term")
    out = TruncSeries.const(s.space, one)
    term = out
    cap = s.space.total_cap() + 1
    for k in range(1, cap + 1):
        term = (term * s).scale(Fraction(1, k))
        if term.is_zero():
            return out
        out = out + term
    if not term.is_zero():
        raise DivergenceError("series_exp did not terminate within caps")
    return out


def series_invert(s: TruncSeries) -> TruncSeries:
    """Multiplicative inverse; the constant coefficient must have .inv()."""
    c0 = s.const_coeff()
    if c0 is None:
        raise ValueError("series with no constant term is not invertible")
    c0i = c0.inv()
    # s = c0 (1 + n)  with  n = c0^{-1} (s - c0);  s^{-1} = sum (-n)^k c0^{-1}
    n = (s - TruncSeries.const(s.space, c0)).cmul(c0i, side="left")
    acc = TruncSeries.const(s.space, c0i)
    term = TruncSeries.const(s.space, c0i)
    cap = s.space.total_cap() + 1
    for _ in range(cap + 1):
        term = (-n) * term
        if term.is_zero():
            return acc
        acc = acc + term
    if not term.is_zero():
        raise DivergenceError("series_invert did not terminate within caps")
    return acc


class ZSeries:
    """Laurent data in the loop parameter with an explicit accuracy window.

    `coeffs[e]` is the coefficient of the e-th power; the object is exact
    for exponents in [lo, hi] and says nothing outside.  Ring operations
    track the window: addition intersects, multiplication uses the usual
    lo1+lo2 .. min(hi1+lo2, hi2+lo1) rule (valid when coefficients below
    lo are genuinely absent, which holds for all our uses).
    """

    __slots__ = ("coeffs", "lo", "hi")

    def __init__(self, coeffs: Dict[int, object], lo: int, hi: int):
        if lo > hi:
            raise ValueError("empty window [%d, %d]" % (lo, hi))
        self.coeffs = {e: c for e, c in coeffs.items() if lo <= e <= hi and not _czero(c)}
        self.lo = lo
        self.hi = hi

    @staticmethod
    def const(c, lo: int, hi: int) -> "ZSeries":
        return ZSeries({0: c} if not _czero(c) else {}, lo, hi)

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, e: int):
        if not (self.lo <= e <= self.hi):
            raise KeyError("exponent %d outside window [%d, %d]" % (e, self.lo, self.hi))
        return self.coeffs.get(e)

    def __add__(self, other: "ZSeries") -> "ZSeries":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        d = {e: c for e, c in self.coeffs.items() if lo <= e <= hi}
        for e, c in other.coeffs.items():
            if not (lo <= e <= hi):
                continue
            acc = d.get(e)
            d[e] = c if acc is None else acc + c
        return ZSeries(d, lo, hi)

    def __neg__(self) -> "ZSeries":
        return ZSeries({e: -c for e, c in self.coeffs.items()}, self.lo, self.hi)

    def __sub__(self, other: "ZSeries") -> "ZSeries":
        return self + (-other)

    def __mul__(self, other: "ZSeries") -> "ZSeries":
        lo = self.lo + other.lo
        hi = min(self.hi + other.lo, other.hi + self.lo)
        d: Dict[int, object] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = e1 + e2
                if e > hi:
                    continue
                c = c1 * c2
                acc = d.get(e)
                d[e] = c if acc is None else acc + c
        return ZSeries(d, lo, hi)

    def shift(self, k: int) -> "ZSeries":
        return ZSeries({e + k: c for e, c in self.coeffs.items()}, self.lo + k, self.hi + k)

    def truncate(self, lo: int, hi: int) -> "ZSeries":
        if lo < self.lo or hi > self.hi:
            raise ValueError("cannot widen window")
        return ZSeries(dict(self.coeffs), lo, hi)

    def part(self, lo: int, hi: int) -> "ZSeries":
        """Keep only exponents in [lo, hi] (must lie inside the window)."""
        if lo < self.lo or hi > self.hi:
            raise ValueError("part outside window")
        return ZSeries({e: c for e, c in self.coeffs.items() if lo <= e <= hi}, lo, hi)

    def map_coeffs(self, f) -> "ZSeries":
        d = {}
        for e, c in self.coeffs.items():
            v = f(c)
            if v is not None and not _czero(v):
                d[e] = v
        return ZSeries(d, self.lo, self.hi)

    def min_exponent(self) -> Optional[int]:
        return min(self.coeffs) if self.coeffs else None

    def __eq__(self, other):
        if not isinstance(other, ZSeries):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi and self.coeffs == other.coeffs

    def __repr__(self):
        bits = ["z^%d: %r" % (e, self.coeffs[e]) for e in sorted(self.coeffs)]
        return "ZSeries[%d..%d](%s)" % (self.lo, self.hi, "; ".join(bits))


def z_expand_series(ts: TruncSeries, var: str, lo: int, hi: int,
                    at_inf: bool = False) -> ZSeries:
    """Expand a series whose coefficients are exact in the loop parameter.

    Each coefficient must implement `z_expand(var, lo, hi, at_inf)`; the
    result regroups everything as a ZSeries with TruncSeries coefficients.
    """
    per_power: Dict[int, Dict[Key, object]] = {}
    for k, c in ts.terms.items():
        for e, ce in c.z_expand(var, lo, hi, at_inf).items():
            per_power.setdefault(e, {})[k] = ce
    return ZSeries({e: TruncSeries(ts.space, d) for e, d in per_power.items()}, lo, hi)

"""Independent oracles for test expectations.

Everything here is implemented from classical identities, deliberately
avoiding the package's own machinery:

* point-target correlators from the KdV-style recursion on the top
  insertion plus string/dilaton equations,
* the genus-zero closed form (n-3)!/prod(d_i!),
* log-Stirling coefficients from Bernoulli numbers.
"""

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial


def double_factorial(n: int) -> int:
    """Odd double factorial with the (-1)!! = 1 convention."""
    if n <= 0:
        return 1
    r = 1
    while n > 0:
        r *= n
        n -= 2
    return r


def genus0_closed(ds) -> Fraction:
    """<tau_{d_1}...tau_{d_n}>_0 = (n-3)!/prod d_i! when sum d_i = n-3."""
    n = len(ds)
    if n < 3 or sum(ds) != n - 3:
        return Fraction(0)
    denom = 1
    for d in ds:
        denom *= factorial(d)
    return Fraction(factorial(n - 3), denom)


@lru_cache(maxsize=None)
def _corr(g: int, ds: tuple) -> Fraction:
    n = len(ds)
    if 2 * g - 2 + n <= 0:
        return Fraction(0)
    if sum(ds) != 3 * g - 3 + n:
        return Fraction(0)
    if g == 0 and n == 3:
        return Fraction(1)
    if g == 1 and n == 1:
        return Fraction(1, 24)
    d1, rest = ds[0], ds[1:]
    if d1 == 0:
        # string equation
        total = Fraction(0)
        for j, dj in enumerate(rest):
            if dj >= 1:
                red = rest[:j] + (dj - 1,) + rest[j + 1:]
                total += _corr(g, tuple(sorted(red, reverse=True)))
        return total
    if d1 == 1:
        # dilaton equation
        return (2 * g - 2 + (n - 1)) * _corr(g, rest)
    # top-insertion recursion
    lhs_factor = double_factorial(2 * d1 + 1)
    total = Fraction(0)
    for j, dj in enumerate(rest):
        red = rest[:j] + rest[j + 1:]
        key = tuple(sorted(red + (d1 + dj - 1,), reverse=True))
        total += Fraction(double_factorial(2 * (d1 + dj) - 1),
                          double_factorial(2 * dj - 1)) * _corr(g, key)
    for a in range(0, d1 - 1):
        b = d1 - 2 - a
        w = Fraction(double_factorial(2 * a + 1) * double_factorial(2 * b + 1), 2)
        if g >= 1:
            key = tuple(sorted(rest + (a, b), reverse=True))
            total += w * _corr(g - 1, key)
        for g1 in range(0, g + 1):
            g2 = g - g1
            for part, ways in _subsets(rest):
                comp = _complement(rest, part)
                c1 = _corr(g1, tuple(sorted(part + (a,), reverse=True)))
                if c1 == 0:
                    continue
                c2 = _corr(g2, tuple(sorted(comp + (b,), reverse=True)))
                if c2 == 0:
                    continue
                total += w * ways * c1 * c2
    return total / lhs_factor


def _subsets(M):
    """Sub-multisets of M with the number of ways to pick them."""
    mult = {}
    for a in M:
        mult[a] = mult.get(a, 0) + 1
    results = [((), 1)]
    for a, m in sorted(mult.items()):
        nxt = []
        for part, w in results:
            for i in range(m + 1):
                nxt.append((part + (a,) * i, w * comb(m, i)))
        results = nxt
    return results


def _complement(M, part):
    rem = list(M)
    for a in part:
        rem.remove(a)
    return tuple(rem)


def dvv_correlator(g: int, ds) -> Fraction:
    """<tau_{d_1}...tau_{d_n}>_g via the independent classical recursion."""
    return _corr(g, tuple(sorted(ds, reverse=True)))


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli numbers, B_1 = -1/2 convention."""
    if n == 0:
        return Fraction(1)
    total = Fraction(0)
    for j in range(n):
        total += comb(n + 1, j) * bernoulli(j)
    return -total / (n + 1)


def log_stirling_coeff(k: int) -> Fraction:
    """Coefficient of (z/a)^k in the log of the 1-D Stirling series.

    Nonzero only for odd k; value B_{k+1}/((k+1)k).  The k=1 value is 1/12.
    """
    if k <= 0 or k % 2 == 0:
        return Fraction(0)
    return bernoulli(k + 1) / ((k + 1) * k)

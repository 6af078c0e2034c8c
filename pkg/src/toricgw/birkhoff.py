"""Birkhoff factorization of loop-matrix series.

A matrix series T, graded by Novikov keys and carrying both positive and
negative powers of the loop variable, splits as

    T(-z) = U(z) L(z)

where U = Id + (strictly negative powers of z) and L is polynomial in z.
The factorization is computed by a graded recursion: the Novikov-degree
zero part of T(-z) must be a z-free invertible matrix (it becomes L's
constant term, with U starting at the identity), and at every higher key
the still-unknown terms U_g L_0 + L_g appear linearly once the products of
lower-order factors are subtracted, so the remainder splits uniquely by
the sign of the z-exponent.

Two entry formats are supported.  Matrices of exact rational functions of
z are split by polynomial division at z = infinity; Laurent-polynomial
matrices, given as {exponent: matrix} dictionaries, are split by slicing.
Both are exact, and the round trip U * L reproduces the input.
"""

from __future__ import annotations

from typing import Dict, Tuple

from .linalg import LinearSolveError, Mat
from .ratfunc import RatFunc

Key = Tuple[int, ...]


class FactorizationError(ValueError):
    """The leading term is not an invertible z-free matrix."""


# ------------------------------------------------- splitting at z = infinity


def z_poly_split(f: RatFunc, zvar: str) -> Tuple[RatFunc, RatFunc]:
    """Split a rational function into (polynomial in z, proper part).

    The proper part vanishes at z = infinity; the polynomial part is the
    finite chunk of the expansion there with nonnegative exponents.
    """
    if f.is_zero():
        return f, f
    bound = f.num.degree(zvar) - f.den.degree(zvar)
    if bound < 0:
        return RatFunc.zero(f.vars), f
    zpow = RatFunc.variable(f.vars, zvar)
    poly = RatFunc.zero(f.vars)
    for e, c in f.laurent_at_inf(zvar, 0, bound).items():
        poly = poly + c * zpow ** e
    return poly, f - poly


def mat_poly_split(m: Mat, zvar: str) -> Tuple[Mat, Mat]:
    n, k = m.shape
    polys = [[None] * k for _ in range(n)]
    props = [[None] * k for _ in range(n)]
    for i in range(n):
        for j in range(k):
            polys[i][j], props[i][j] = z_poly_split(m[i, j], zvar)
    return Mat(polys), Mat(props)


# ------------------------------------------------------ Laurent dictionaries

# A Laurent matrix is a dict {z-exponent: Mat}; supports are finite and the
# arithmetic below is exact convolution, so no window bookkeeping is needed.


def laurent_mul(a: Dict[int, Mat], b: Dict[int, Mat]) -> Dict[int, Mat]:
    out: Dict[int, Mat] = {}
    for ea, ma in a.items():
        for eb, mb in b.items():
            prod = ma * mb
            acc = out.get(ea + eb)
            out[ea + eb] = prod if acc is None else acc + prod
    return {e: m for e, m in out.items() if not m.is_zero()}


def laurent_sub(a: Dict[int, Mat], b: Dict[int, Mat]) -> Dict[int, Mat]:
    out = dict(a)
    for e, m in b.items():
        acc = out.get(e)
        out[e] = -m if acc is None else acc - m
    return {e: m for e, m in out.items() if not m.is_zero()}


def laurent_flip(a: Dict[int, Mat], zvar: str) -> Dict[int, Mat]:
    """Substitute z -> -z: coefficients pick up parity signs and the
    matrices themselves are flipped in case entries still mention z."""
    return {e: (m.flip_sign(zvar) if zvar in _mat_vars(m) else m).scale(
        (-1) ** (e % 2)) for e, m in a.items()}


def _mat_vars(m: Mat) -> Tuple[str, ...]:
    return m[0, 0].vars


def _sorted_keys(terms):
    return sorted(terms, key=lambda k: (sum(k), k))


def _convolution(u, l, key, skip_edges=True):
    """Sum of U_{k'} L_{k''} over k' + k'' = key, skipping the two edge
    products that involve the still-unknown factors."""
    total = None
    for ku in u:
        kl = tuple(a - b for a, b in zip(key, ku))
        if any(x < 0 for x in kl) or kl not in l:
            continue
        if skip_edges and (sum(ku) == 0 or sum(kl) == 0):
            continue
        prod = _term_mul(u[ku], l[kl])
        total = prod if total is None else _term_add(total, prod)
    return total


def _term_mul(a, b):
    if isinstance(a, Mat):
        return a * b
    return laurent_mul(a, b)


def _term_add(a, b):
    if isinstance(a, Mat):
        return a + b
    out = dict(a)
    for e, m in b.items():
        acc = out.get(e)
        out[e] = m if acc is None else acc + m
    return {e: m for e, m in out.items() if not m.is_zero()}


# ------------------------------------------------------------- factorization


def birkhoff_factorize(t_terms, zvar: str = "z"):
    """Factor T(-z) = U(z) L(z) for a keyed matrix series T.

    `t_terms` maps Novikov keys to either Mat (entries rational in `zvar`)
    or {z-exponent: Mat} Laurent dictionaries.  Returns (u_terms, l_terms)
    in the same format.  Raises FactorizationError when the key-zero term
    is not an invertible z-free matrix.
    """
    keys = _sorted_keys(t_terms)
    if not keys or sum(keys[0]) != 0:
        raise FactorizationError("missing Novikov-degree-zero term")
    zero = keys[0]
    rational = isinstance(t_terms[zero], Mat)
    flipped = {k: (_flip_rational(v, zvar) if rational else
                   laurent_flip(v, zvar)) for k, v in t_terms.items()}

    lead = flipped[zero]
    l0 = _extract_constant(lead, zvar, rational)
    try:
        l0_inv = l0.inv()
    except LinearSolveError:
        raise FactorizationError("leading term is singular")

    n = l0.shape[0]
    ident = Mat.identity(n, _mat_vars(l0))
    u_terms = {zero: ident if rational else {0: ident}}
    l_terms = {zero: l0 if rational else {0: l0}}

    for key in keys[1:]:
        m = flipped[key]
        known = _convolution(u_terms, l_terms, key)
        if known is not None:
            m = (m - known) if rational else laurent_sub(m, known)
        if rational:
            nrm = m * l0_inv
            poly, proper = mat_poly_split(nrm, zvar)
            u_terms[key] = proper
            l_terms[key] = poly * l0
        else:
            nrm = laurent_mul(m, {0: l0_inv})
            u_terms[key] = {e: c for e, c in nrm.items() if e < 0}
            l_terms[key] = laurent_mul(
                {e: c for e, c in nrm.items() if e >= 0}, {0: l0})
    return u_terms, l_terms


def _flip_rational(m: Mat, zvar: str) -> Mat:
    return m.flip_sign(zvar)


def _extract_constant(lead, zvar: str, rational: bool) -> Mat:
    if rational:
        if any(lead[i, j].has_var(zvar)
               for i in range(lead.shape[0]) for j in range(lead.shape[1])):
            raise FactorizationError("leading term mixes z-orders")
        return lead
    extra = [e for e in lead if e != 0]
    if extra:
        raise FactorizationError("leading term mixes z-orders")
    if 0 not in lead:
        raise FactorizationError("leading term is zero")
    return lead[0]


def factor_product(u_terms, l_terms, key):
    """The key-component of U * L (for round-trip checks)."""
    return _convolution(u_terms, l_terms, key, skip_edges=False)

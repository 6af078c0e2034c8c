"""Dense exact linear algebra over a field of duck-typed scalars.

Scalars are usually `RatFunc` (so matrix entries may carry equivariant
parameters and the loop parameter exactly).  Anything with field
arithmetic, `is_zero`, `inv` and `scale` works.  Sizes here are tiny --
ranks equal the number of torus-fixed points -- so naive Gaussian
elimination is entirely adequate.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, List, Sequence, Tuple

from .ratfunc import RatFunc


class LinearSolveError(ValueError):
    pass


class Mat:
    __slots__ = ("rows",)

    def __init__(self, rows: Sequence[Sequence[object]]):
        self.rows = tuple(tuple(r) for r in rows)
        if self.rows:
            w = len(self.rows[0])
            if any(len(r) != w for r in self.rows):
                raise ValueError("ragged matrix")

    # ---------------------------------------------------------- construction

    @staticmethod
    def zero(n: int, m: int, vars: Tuple[str, ...]) -> "Mat":
        z = RatFunc.zero(vars)
        return Mat([[z] * m for _ in range(n)])

    @staticmethod
    def identity(n: int, vars: Tuple[str, ...]) -> "Mat":
        z = RatFunc.zero(vars)
        o = RatFunc.one(vars)
        return Mat([[o if i == j else z for j in range(n)] for i in range(n)])

    @staticmethod
    def diag(entries: Sequence[object], vars: Tuple[str, ...]) -> "Mat":
        z = RatFunc.zero(vars)
        n = len(entries)
        return Mat([[entries[i] if i == j else z for j in range(n)] for i in range(n)])

    @staticmethod
    def column(entries: Sequence[object]) -> "Mat":
        return Mat([[e] for e in entries])

    # ---------------------------------------------------------------- basics

    @property
    def shape(self) -> Tuple[int, int]:
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def __getitem__(self, ij: Tuple[int, int]):
        return self.rows[ij[0]][ij[1]]

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self.rows for e in r)

    def __eq__(self, other):
        return isinstance(other, Mat) and self.rows == other.rows

    def __add__(self, other: "Mat") -> "Mat":
        return Mat([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __neg__(self) -> "Mat":
        return Mat([[-a for a in r] for r in self.rows])

    def __sub__(self, other: "Mat") -> "Mat":
        return self + (-other)

    def __mul__(self, other: "Mat") -> "Mat":
        n, k = self.shape
        k2, m = other.shape
        if k != k2:
            raise ValueError("shape mismatch %s * %s" % (self.shape, other.shape))
        cols = list(zip(*other.rows))
        out = []
        for r in self.rows:
            row = []
            for c in cols:
                acc = None
                for a, b in zip(r, c):
                    if a.is_zero() or b.is_zero():
                        continue
                    t = a * b
                    acc = t if acc is None else acc + t
                if acc is None:
                    acc = r[0] - r[0]
                row.append(acc)
            out.append(row)
        return Mat(out)

    def smul(self, c) -> "Mat":
        """Multiply every entry by the scalar c (on the left)."""
        return Mat([[c * a for a in r] for r in self.rows])

    def scale(self, q) -> "Mat":
        q = Fraction(q)
        return Mat([[a.scale(q) for a in r] for r in self.rows])

    def transpose(self) -> "Mat":
        return Mat(list(zip(*self.rows)))

    def map(self, f: Callable) -> "Mat":
        return Mat([[f(a) for a in r] for r in self.rows])

    def subs(self, assignment) -> "Mat":
        return self.map(lambda a: a.subs(assignment))

    def flip_sign(self, var: str) -> "Mat":
        return self.map(lambda a: a.flip_sign(var))

    def col(self, j: int) -> List[object]:
        return [r[j] for r in self.rows]

    # ------------------------------------------------------------ elimination

    def inv(self) -> "Mat":
        n, m = self.shape
        if n != m:
            raise ValueError("inverse of a non-square matrix")
        work = [list(r) for r in self.rows]
        one = None
        for r in work:
            for e in r:
                if not e.is_zero():
                    one = e * e.inv()
                    break
            if one is not None:
                break
        if one is None:
            raise LinearSolveError("singular (zero) matrix")
        zero = one - one
        aug = [row + [one if i == j else zero for j in range(n)]
               for i, row in enumerate(work)]
        _row_reduce(aug, n)
        for i in range(n):
            if aug[i][i].is_zero():
                raise LinearSolveError("singular matrix")
        return Mat([row[n:] for row in aug])

    def z_expand(self, var: str, lo: int, hi: int, at_inf: bool = False):
        """Entrywise Laurent expansion, regrouped into matrices per power."""
        n, m = self.shape
        per = {}
        for i, r in enumerate(self.rows):
            for j, e in enumerate(r):
                for p, c in e.z_expand(var, lo, hi, at_inf).items():
                    per.setdefault(p, {})[(i, j)] = c
        vars = self.rows[0][0].vars
        out = {}
        for p, d in per.items():
            z = RatFunc.zero(vars)
            out[p] = Mat([[d.get((i, j), z) for j in range(m)] for i in range(n)])
        return out

    def __repr__(self):
        return "Mat(%s)" % ("; ".join(", ".join(repr(e) for e in r) for r in self.rows))


def _row_reduce(aug: List[List[object]], ncols: int):
    """In-place reduced row echelon form on the first ncols columns."""
    nrows = len(aug)
    row = 0
    for col in range(ncols):
        piv = None
        for r in range(row, nrows):
            if not aug[r][col].is_zero():
                piv = r
                break
        if piv is None:
            continue
        aug[row], aug[piv] = aug[piv], aug[row]
        inv = aug[row][col].inv()
        aug[row] = [inv * e for e in aug[row]]
        for r in range(nrows):
            if r != row and not aug[r][col].is_zero():
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[row])]
        row += 1
        if row == nrows:
            break


def solve_linear(rows: List[List[object]], rhs: List[object]) -> List[object]:
    """One particular exact solution of rows * x = rhs (free variables -> 0).

    Raises LinearSolveError if the system is inconsistent.
    """
    if not rows:
        return []
    ncols = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    _row_reduce(aug, ncols)
    zero_like = None
    for r in aug:
        for e in r:
            if not e.is_zero():
                zero_like = e - e
                break
        if zero_like is not None:
            break
    sol = [zero_like] * ncols if zero_like is not None else [rhs[0]] * ncols
    for r in aug:
        lead = None
        for c in range(ncols):
            if not r[c].is_zero():
                lead = c
                break
        if lead is None:
            if not r[ncols].is_zero():
                raise LinearSolveError("inconsistent linear system")
            continue
        # row reduced: x_lead = rhs - sum over later free columns (all zero)
        sol[lead] = r[ncols]
    return sol

"""The rational function field Q(beta), just enough for small linear solves.

Elements are reduced fractions of univariate Polys; used by the folded-
system solver, whose final answers are asserted to be Laurent polynomials.
"""

from __future__ import annotations

from fractions import Fraction

from .poly import Poly, _frac


class RatF:
    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None):
        if den is None:
            den = Poly.const(1, var=num.var)
        if den.is_zero():
            raise ZeroDivisionError
        g = num.gcd(den)
        if g.degree > 0:
            num = num / g
            den = den / g
        lead = den.leading()
        if lead != 1 and not den.is_zero():
            num = num / lead
            den = den / lead
        self.num = num
        self.den = den

    @classmethod
    def const(cls, c, var: str = "beta") -> "RatF":
        return cls(Poly.const(_frac(c), var=var))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return bool(self.num)

    def __add__(self, other: "RatF") -> "RatF":
        return RatF(self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other: "RatF") -> "RatF":
        return RatF(self.num * other.den - other.num * self.den, self.den * other.den)

    def __neg__(self) -> "RatF":
        return RatF(-self.num, self.den)

    def __mul__(self, other: "RatF") -> "RatF":
        return RatF(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RatF") -> "RatF":
        if other.num.is_zero():
            raise ZeroDivisionError
        return RatF(self.num * other.den, self.den * other.num)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = RatF.const(other, var=self.num.var)
        return self.num == other.num and self.den == other.den

    def __repr__(self):
        return f"({self.num!r})/({self.den!r})" if self.den.degree > 0 or self.den[0] != 1 else repr(self.num)

    def as_laurent(self) -> dict[int, Fraction]:
        """Coefficients {beta_exp: c} when the denominator is a monomial
        beta^k (or constant); raises ValueError otherwise."""
        den = self.den
        k = 0
        while den.degree >= 0 and den[0] == 0:
            den = Poly(den.coeffs[1:], var=den.var)
            k += 1
        if den.degree != 0:
            raise ValueError(f"not a Laurent polynomial: {self!r}")
        c0 = den[0]
        return {
            e - k: c / c0 for e, c in enumerate(self.num.coeffs) if c
        }


def solve_linear_ratf(
    rows: list[tuple[list[RatF], RatF]], ncols: int
) -> list[RatF] | None:
    """Exact Gaussian elimination over Q(beta).

    Returns a solution vector (free variables pinned to 0) or None when the
    system is inconsistent.
    """
    mat = [list(coeffs) + [rhs] for coeffs, rhs in rows]
    nrows = len(mat)
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = None
        for rr in range(r, nrows):
            if not mat[rr][c].is_zero():
                pivot_row = rr
                break
        if pivot_row is None:
            continue
        mat[r], mat[pivot_row] = mat[pivot_row], mat[r]
        inv = mat[r][c]
        mat[r] = [x / inv for x in mat[r]]
        for rr in range(nrows):
            if rr != r and not mat[rr][c].is_zero():
                f = mat[rr][c]
                mat[rr] = [x - f * y for x, y in zip(mat[rr], mat[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    zero = RatF.const(0)
    for rr in range(r, nrows):
        if not mat[rr][ncols].is_zero():
            return None
    sol = [zero] * ncols
    for i, c in enumerate(pivots):
        sol[c] = mat[i][ncols]
    return sol

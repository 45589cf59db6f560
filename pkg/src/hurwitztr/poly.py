"""Exact univariate polynomials over the rationals.

Dense ascending coefficient lists of ``fractions.Fraction``.  The zero
polynomial is the empty list; otherwise the trailing coefficient is nonzero.
Everything here is exact: no floats anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot coerce {x!r} to an exact rational")


class Poly:
    """Univariate polynomial with exact rational coefficients."""

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs: Iterable = (), var: str = "z"):
        cs = [_frac(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: list[Fraction] = cs
        self.var = var

    # -- constructors -------------------------------------------------

    @classmethod
    def const(cls, c, var: str = "z") -> "Poly":
        return cls([_frac(c)], var=var)

    @classmethod
    def x(cls, var: str = "z") -> "Poly":
        return cls([0, 1], var=var)

    @classmethod
    def monomial(cls, k: int, c=1, var: str = "z") -> "Poly":
        return cls([0] * k + [_frac(c)], var=var)

    # -- basic queries -------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __getitem__(self, k: int) -> Fraction:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return Fraction(0)

    def leading(self) -> Fraction:
        if not self.coeffs:
            return Fraction(0)
        return self.coeffs[-1]

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other, var=self.var)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash((tuple(self.coeffs), self.var))

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                parts.append(str(c))
            elif k == 1:
                parts.append(f"{c}*{self.var}")
            else:
                parts.append(f"{c}*{self.var}^{k}")
        return " + ".join(parts)

    # -- arithmetic ----------------------------------------------------

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.var != self.var and other.degree > 0 and self.degree > 0:
                raise ValueError(f"variable mismatch: {self.var} vs {other.var}")
            return other
        return Poly.const(other, var=self.var)

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(
            [self[k] + other[k] for k in range(n)], var=self.var
        )

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly([-c for c in self.coeffs], var=self.var)

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            return Poly([c * other for c in self.coeffs], var=self.var)
        other = self._coerce(other)
        if not self.coeffs or not other.coeffs:
            return Poly(var=self.var)
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out, var=self.var)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.const(1, var=self.var)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __truediv__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            inv = 1 / _frac(other)
            return Poly([c * inv for c in self.coeffs], var=self.var)
        q, r = divmod(self, other)
        if r:
            raise ValueError("inexact polynomial division")
        return q

    def __divmod__(self, other: "Poly") -> tuple["Poly", "Poly"]:
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return Poly(var=self.var), Poly(rem, var=self.var)
        quo = [Fraction(0)] * (dq + 1)
        lead = other.coeffs[-1]
        for k in range(dq, -1, -1):
            c = rem[k + other.degree] / lead
            if c:
                quo[k] = c
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= c * b
        return Poly(quo, var=self.var), Poly(rem, var=self.var)

    def __mod__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[1]

    # -- calculus and evaluation ----------------------------------------

    def derivative(self) -> "Poly":
        return Poly(
            [k * c for k, c in enumerate(self.coeffs)][1:], var=self.var
        )

    def __call__(self, x):
        """Evaluate by Horner; x may be a Fraction, int, Poly, or anything
        supporting + and * with Fractions (e.g. series or mpoly)."""
        if not self.coeffs:
            return Fraction(0) if isinstance(x, (int, Fraction)) else x * 0
        acc = self.coeffs[-1] if isinstance(x, (int, Fraction)) else x * 0 + self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    def shift(self, a) -> "Poly":
        """P(x + a)."""
        a = _frac(a)
        out = Poly(var=self.var)
        xa = Poly([a, 1], var=self.var)
        for c in reversed(self.coeffs):
            out = out * xa + Poly.const(c, var=self.var)
        return out

    # -- normal forms ----------------------------------------------------

    def monic(self) -> "Poly":
        if not self.coeffs:
            return self
        lead = self.coeffs[-1]
        return Poly([c / lead for c in self.coeffs], var=self.var)

    def gcd(self, other: "Poly") -> "Poly":
        a, b = self, self._coerce(other)
        while b:
            a, b = b, a % b
        return a.monic() if a else a

    def xgcd(self, other: "Poly") -> tuple["Poly", "Poly", "Poly"]:
        """Return (g, u, v) with u*self + v*other = g, g monic (or zero)."""
        a, b = self, self._coerce(other)
        u0, v0 = Poly.const(1, self.var), Poly(var=self.var)
        u1, v1 = Poly(var=self.var), Poly.const(1, self.var)
        while b:
            q, r = divmod(a, b)
            a, b = b, r
            u0, u1 = u1, u0 - q * u1
            v0, v1 = v1, v0 - q * v1
        if a:
            lead = a.leading()
            return a.monic(), u0 / lead, v0 / lead
        return a, u0, v0

    def is_squarefree(self) -> bool:
        if self.degree <= 0:
            return not self.is_zero()
        return self.gcd(self.derivative()).degree == 0

    # -- root machinery ---------------------------------------------------

    def rational_roots(self) -> list[Fraction]:
        """All rational roots, with multiplicity-free listing."""
        if self.is_zero():
            raise ValueError("zero polynomial has all roots")
        # Clear denominators to an integer polynomial.
        denom = 1
        for c in self.coeffs:
            denom = denom * c.denominator // _gcd_int(denom, c.denominator)
        ints = [int(c * denom) for c in self.coeffs]
        while ints and ints[0] == 0:
            ints = ints[1:]
        roots = []
        if len(ints) < len(self.coeffs):
            roots.append(Fraction(0))
        if not ints or len(ints) == 1:
            return roots
        a0, an = abs(ints[0]), abs(ints[-1])
        for p in _divisors(a0):
            for q in _divisors(an):
                for cand in (Fraction(p, q), Fraction(-p, q)):
                    if cand not in roots and self(cand) == 0:
                        roots.append(cand)
        roots.sort()
        return roots

    def power_sums(self, kmax: int) -> list[Fraction]:
        """Newton power sums p_0..p_kmax of the roots (with multiplicity).

        Requires a nonzero polynomial; computed from the coefficients by
        Newton's identities, no root isolation.
        """
        n = self.degree
        if n < 0:
            raise ValueError("zero polynomial")
        lead = self.coeffs[-1]
        # e_k = (-1)^k a_{n-k} / a_n
        e = [
            (-1) ** k * self[n - k] / lead if k <= n else Fraction(0)
            for k in range(kmax + 1)
        ]
        p = [Fraction(n)]
        for k in range(1, kmax + 1):
            acc = Fraction(0)
            for i in range(1, k):
                acc += (-1) ** (i - 1) * e[i] * p[k - i]
            acc += (-1) ** (k - 1) * k * e[k] if k <= n else Fraction(0)
            p.append(acc)
        return p


def _gcd_int(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def _divisors(n: int) -> list[int]:
    if n == 0:
        return [1]
    n = abs(n)
    out = set()
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.add(d)
            out.add(n // d)
        d += 1
    return sorted(out)

"""Arithmetic in Q[t]/(P) for squarefree P, with dynamic evaluation.

Inverting a zero divisor raises `SplitEvent` carrying a nontrivial
factorization P = P1 * P2 discovered from the failed gcd; callers rerun the
computation per factor and add the traces.  `trace_over_roots` sums an
expression over all roots of P via Newton power sums, staying in Q.
"""

from __future__ import annotations

from fractions import Fraction

from .poly import Poly, _frac


class SplitEvent(Exception):
    """Control-flow signal: the modulus split into coprime factors."""

    def __init__(self, factors: tuple[Poly, ...]):
        self.factors = factors
        super().__init__(f"modulus split into {len(factors)} factors")


class DynEvalElement:
    """Residue class `value mod modulus`, modulus monic squarefree."""

    __slots__ = ("modulus", "value")

    def __init__(self, modulus: Poly, value: Poly):
        if not modulus.is_monic():
            raise ValueError("modulus must be monic")
        self.modulus = modulus
        self.value = value % modulus

    @classmethod
    def generator(cls, modulus: Poly) -> "DynEvalElement":
        return cls(modulus, Poly.x(var=modulus.var))

    @classmethod
    def of(cls, modulus: Poly, c) -> "DynEvalElement":
        return cls(modulus, Poly.const(c, var=modulus.var))

    def _coerce(self, other) -> "DynEvalElement":
        if isinstance(other, DynEvalElement):
            if other.modulus != self.modulus:
                raise ValueError("modulus mismatch")
            return other
        return DynEvalElement(self.modulus, Poly.const(other, var=self.modulus.var))

    def __add__(self, other):
        other = self._coerce(other)
        return DynEvalElement(self.modulus, self.value + other.value)

    __radd__ = __add__

    def __neg__(self):
        return DynEvalElement(self.modulus, -self.value)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        return DynEvalElement(self.modulus, (self.value * other.value) % self.modulus)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.invert() ** (-n)
        result = DynEvalElement.of(self.modulus, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = DynEvalElement.of(self.modulus, other)
        if not isinstance(other, DynEvalElement):
            return NotImplemented
        return self.modulus == other.modulus and self.value == other.value

    def is_zero(self) -> bool:
        return self.value.is_zero()

    def invert(self) -> "DynEvalElement":
        """Inverse mod P, or raise SplitEvent on a zero divisor."""
        g, u, _ = self.value.xgcd(self.modulus)
        if g.degree == 0:
            # u * value = g (a nonzero constant already normalized to 1)
            return DynEvalElement(self.modulus, u)
        if g == self.modulus:
            raise ZeroDivisionError("inverting zero in quotient ring")
        p1 = g
        p2 = (self.modulus / g).monic()
        raise SplitEvent((p1, p2))

    def __truediv__(self, other):
        return self * self._coerce(other).invert()

    def trace(self) -> Fraction:
        """Sum of value(a) over all roots a of the modulus."""
        psums = self.modulus.power_sums(max(self.value.degree, 0))
        return sum(
            (c * psums[k] for k, c in enumerate(self.value.coeffs)),
            Fraction(0),
        )

    def __repr__(self):
        return f"({self.value!r} mod {self.modulus!r})"


def dyneval_invert(e: DynEvalElement):
    """Spec-level wrapper: inverse, or the SplitEvent's factors."""
    try:
        return e.invert()
    except SplitEvent as s:
        return s


def trace_over_roots(P: Poly, num: Poly, den: Poly | None = None) -> Fraction:
    """Sum num(a)/den(a) over the roots a of squarefree P, exactly.

    Splits P dynamically whenever den is not invertible modulo a factor,
    raising ZeroDivisor only when den shares a root with P.
    """
    if P.degree <= 0:
        return Fraction(0)
    if not P.is_squarefree():
        raise ValueError("modulus must be squarefree")
    P = P.monic()
    total = Fraction(0)
    stack = [P]
    while stack:
        Pk = stack.pop()
        e = DynEvalElement(Pk, num % Pk)
        if den is not None:
            d = DynEvalElement(Pk, den % Pk)
            if d.is_zero():
                raise ZeroDivisionError("denominator vanishes on every root")
            try:
                e = e * d.invert()
            except SplitEvent as s:
                stack.extend(s.factors)
                continue
        total += e.trace()
    return total

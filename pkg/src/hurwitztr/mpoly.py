"""Sparse multivariate polynomials over the rationals.

A term maps an exponent tuple (one int per variable, negative allowed for
Laurent-style variables such as beta) to a nonzero Fraction.  Variables are
named; binary operations require identical variable tuples, and `extend`
re-embeds a polynomial into a larger variable set.

No automatic gcd reduction is attempted anywhere; exact division is provided
only for divisors that are monic in a designated variable (or constants),
which is all the engine needs.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .poly import Poly, _frac


class MPoly:
    __slots__ = ("vars", "terms")

    def __init__(self, vars: tuple[str, ...], terms: Mapping | None = None):
        self.vars = tuple(vars)
        t: dict[tuple[int, ...], Fraction] = {}
        if terms:
            for e, c in terms.items():
                c = _frac(c)
                if c != 0:
                    t[tuple(e)] = c
        self.terms = t

    # -- constructors ---------------------------------------------------

    @classmethod
    def const(cls, vars: tuple[str, ...], c) -> "MPoly":
        c = _frac(c)
        if c == 0:
            return cls(vars)
        return cls(vars, {(0,) * len(vars): c})

    @classmethod
    def var(cls, vars: tuple[str, ...], name: str, power: int = 1) -> "MPoly":
        e = [0] * len(vars)
        e[vars.index(name)] = power
        return cls(vars, {tuple(e): Fraction(1)})

    @classmethod
    def from_poly(cls, p: Poly, vars: tuple[str, ...], name: str) -> "MPoly":
        i = vars.index(name)
        terms = {}
        for k, c in enumerate(p.coeffs):
            if c:
                e = [0] * len(vars)
                e[i] = k
                terms[tuple(e)] = c
        return cls(vars, terms)

    # -- queries ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = MPoly.const(self.vars, other)
        if not isinstance(other, MPoly):
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    def degree_in(self, name: str) -> int:
        """Max exponent of `name`; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        i = self.vars.index(name)
        return max(e[i] for e in self.terms)

    def constant_value(self) -> Fraction:
        """The value, asserting the polynomial is constant."""
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1:
            (e, c), = self.terms.items()
            if all(x == 0 for x in e):
                return c
        raise ValueError(f"not a constant: {self}")

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for e in sorted(self.terms):
            c = self.terms[e]
            mono = "*".join(
                f"{v}^{k}" if k != 1 else v
                for v, k in zip(self.vars, e)
                if k != 0
            )
            bits.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(bits)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "MPoly":
        if isinstance(other, MPoly):
            if other.vars != self.vars:
                raise ValueError(f"variable mismatch: {self.vars} vs {other.vars}")
            return other
        return MPoly.const(self.vars, other)

    def __add__(self, other) -> "MPoly":
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, Fraction(0)) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        r = MPoly(self.vars)
        r.terms = out
        return r

    __radd__ = __add__

    def __neg__(self) -> "MPoly":
        r = MPoly(self.vars)
        r.terms = {e: -c for e, c in self.terms.items()}
        return r

    def __sub__(self, other) -> "MPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "MPoly":
        return (-self) + other

    def __mul__(self, other) -> "MPoly":
        if isinstance(other, (int, Fraction)):
            other = _frac(other)
            if other == 0:
                return MPoly(self.vars)
            r = MPoly(self.vars)
            r.terms = {e: c * other for e, c in self.terms.items()}
            return r
        other = self._coerce(other)
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e, Fraction(0)) + c1 * c2
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        r = MPoly(self.vars)
        r.terms = out
        return r

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "MPoly":
        if n < 0:
            raise ValueError("negative power")
        result = MPoly.const(self.vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __truediv__(self, other) -> "MPoly":
        if isinstance(other, (int, Fraction)):
            return self * (1 / _frac(other))
        return self.divexact(other)

    # -- structure ------------------------------------------------------------

    def diff(self, name: str) -> "MPoly":
        i = self.vars.index(name)
        out: dict[tuple[int, ...], Fraction] = {}
        for e, c in self.terms.items():
            k = e[i]
            if k == 0:
                continue
            e2 = e[:i] + (k - 1,) + e[i + 1:]
            v = out.get(e2, Fraction(0)) + k * c
            if v:
                out[e2] = v
            else:
                out.pop(e2, None)
        r = MPoly(self.vars)
        r.terms = out
        return r

    def extend(self, vars: tuple[str, ...]) -> "MPoly":
        """Re-embed into a superset variable tuple."""
        pos = [vars.index(v) for v in self.vars]
        out = {}
        for e, c in self.terms.items():
            e2 = [0] * len(vars)
            for p, k in zip(pos, e):
                e2[p] = k
            out[tuple(e2)] = c
        return MPoly(vars, out)

    def coeff_of(self, name: str, k: int) -> "MPoly":
        """Coefficient of name^k, as a polynomial in the remaining spot
        (same variable tuple, exponent of `name` zeroed)."""
        i = self.vars.index(name)
        out = {}
        for e, c in self.terms.items():
            if e[i] == k:
                out[e[:i] + (0,) + e[i + 1:]] = c
        return MPoly(self.vars, out)

    def coefficients_in(self, name: str) -> dict[int, "MPoly"]:
        i = self.vars.index(name)
        buckets: dict[int, dict] = {}
        for e, c in self.terms.items():
            buckets.setdefault(e[i], {})[e[:i] + (0,) + e[i + 1:]] = c
        return {k: MPoly(self.vars, t) for k, t in buckets.items()}

    def subs(self, assignment: Mapping[str, object]) -> "MPoly":
        """Substitute variables by Fractions/ints or MPolys over the same
        variable tuple.  Unmentioned variables stay symbolic.  Exponents of
        substituted variables must be nonnegative."""
        result = MPoly(self.vars)
        powers: dict[str, list] = {}

        def pw(name, k):
            val = assignment[name]
            if isinstance(val, (int, Fraction)):
                return MPoly.const(self.vars, _frac(val) ** k)
            cache = powers.setdefault(name, [MPoly.const(self.vars, 1)])
            while len(cache) <= k:
                cache.append(cache[-1] * val)
            return cache[k]

        for e, c in self.terms.items():
            rest = list(e)
            factor = MPoly.const(self.vars, c)
            for name in assignment:
                i = self.vars.index(name)
                k = rest[i]
                if k < 0:
                    raise ValueError("cannot substitute into a negative exponent")
                rest[i] = 0
                if k:
                    factor = factor * pw(name, k)
            mono = MPoly(self.vars, {tuple(rest): Fraction(1)})
            result = result + factor * mono
        return result

    def eval_all(self, values: Mapping[str, object]) -> Fraction:
        out = Fraction(0)
        vals = [
            _frac(values[v]) for v in self.vars
        ]
        for e, c in self.terms.items():
            acc = c
            for x, k in zip(vals, e):
                if k:
                    acc *= x ** k
            out += acc
        return out

    def as_poly(self, name: str) -> Poly:
        """Convert to a univariate Poly, asserting all other exponents vanish."""
        i = self.vars.index(name)
        coeffs: dict[int, Fraction] = {}
        for e, c in self.terms.items():
            if any(k != 0 for j, k in enumerate(e) if j != i):
                raise ValueError(f"not univariate in {name}: {self}")
            if e[i] < 0:
                raise ValueError("negative exponent")
            coeffs[e[i]] = c
        if not coeffs:
            return Poly(var=name)
        n = max(coeffs)
        return Poly([coeffs.get(k, 0) for k in range(n + 1)], var=name)

    def divexact(self, divisor: "MPoly", name: str | None = None) -> "MPoly":
        """Exact division by a divisor whose leading coefficient in `name`
        is a nonzero constant.  Raises ValueError if the division is inexact.
        """
        divisor = self._coerce(divisor)
        if not divisor.terms:
            raise ZeroDivisionError
        if len(divisor.terms) == 1:
            (e0, c0), = divisor.terms.items()
            out = {}
            for e, c in self.terms.items():
                out[tuple(a - b for a, b in zip(e, e0))] = c / c0
            return MPoly(self.vars, out)
        if name is None:
            # pick a variable actually appearing in the divisor
            for v in self.vars:
                if divisor.degree_in(v) > 0:
                    name = v
                    break
        d = divisor.degree_in(name)
        lead = divisor.coeff_of(name, d)
        lead_c = lead.constant_value()  # raises if not constant
        rem = self
        quo = MPoly(self.vars)
        i = self.vars.index(name)
        var_mono = lambda k: MPoly(
            self.vars, {tuple(k if j == i else 0 for j in range(len(self.vars))): 1}
        )
        while rem.terms:
            dr = rem.degree_in(name)
            if dr < d:
                raise ValueError("inexact multivariate division")
            top = rem.coeff_of(name, dr)
            q = top * (1 / lead_c) * var_mono(dr - d)
            quo = quo + q
            rem = rem - q * divisor
        return quo

    def divides(self, divisor: "MPoly", name: str | None = None) -> "MPoly | None":
        try:
            return self.divexact(divisor, name=name)
        except ValueError:
            return None

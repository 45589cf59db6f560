"""Truncated multivariate formal series with a beta Laurent grading.

A `SeriesRing` fixes an ordered tuple of variable names, a per-variable
truncation cap (inclusive max exponent; None = no cap), and an optional cap
on the beta exponent.  A `Series` stores {(beta_exp, exps): Fraction}.

beta is not an ordinary variable: its exponent may be negative (Laurent),
and several operations shift it in lockstep with other variables (the
beta^-1-scaled flow variables).  All coefficients are exact rationals.

Truncation discipline: `mul` drops terms beyond the caps, so products are
exact on the retained support provided the inputs were.  When beta_cap is
set and factors carry negative beta exponents, callers must build inputs
with enough beta margin; the engine's entry points do this.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .poly import _frac


class DivisionByNonUnit(ArithmeticError):
    pass


class NotInvertible(ArithmeticError):
    pass


class SeriesRing:
    __slots__ = ("vars", "caps", "beta_cap", "_index")

    def __init__(
        self,
        vars: Iterable[str],
        caps: Mapping[str, int | None] | None = None,
        beta_cap: int | None = None,
    ):
        self.vars = tuple(vars)
        caps = dict(caps or {})
        unknown = set(caps) - set(self.vars)
        if unknown:
            raise ValueError(f"caps for unknown variables {sorted(unknown)}")
        self.caps = tuple(caps.get(v) for v in self.vars)
        self.beta_cap = beta_cap
        self._index = {v: i for i, v in enumerate(self.vars)}

    def __eq__(self, other):
        return (
            isinstance(other, SeriesRing)
            and self.vars == other.vars
            and self.caps == other.caps
            and self.beta_cap == other.beta_cap
        )

    def __hash__(self):
        return hash((self.vars, self.caps, self.beta_cap))

    def __repr__(self):
        caps = {v: c for v, c in zip(self.vars, self.caps) if c is not None}
        return f"SeriesRing(vars={self.vars}, caps={caps}, beta_cap={self.beta_cap})"

    def pos(self, name: str) -> int:
        return self._index[name]

    def _keep(self, beta: int, exps: tuple[int, ...]) -> bool:
        if self.beta_cap is not None and beta > self.beta_cap:
            return False
        for e, cap in zip(exps, self.caps):
            if cap is not None and e > cap:
                return False
        return True

    # -- element builders ------------------------------------------------

    def zero(self) -> "Series":
        return Series(self, {})

    def const(self, c) -> "Series":
        c = _frac(c)
        if c == 0:
            return self.zero()
        return Series(self, {(0, (0,) * len(self.vars)): c})

    def one(self) -> "Series":
        return self.const(1)

    def var(self, name: str, power: int = 1, coeff=1) -> "Series":
        e = [0] * len(self.vars)
        e[self.pos(name)] = power
        return Series(self, {(0, tuple(e)): _frac(coeff)})

    def beta(self, power: int = 1, coeff=1) -> "Series":
        return Series(self, {(power, (0,) * len(self.vars)): _frac(coeff)})

    def monomial(self, coeff, beta: int = 0, **exps: int) -> "Series":
        e = [0] * len(self.vars)
        for name, k in exps.items():
            e[self.pos(name)] = k
        return Series(self, {(beta, tuple(e)): _frac(coeff)})


class Series:
    __slots__ = ("ring", "terms")

    def __init__(self, ring: SeriesRing, terms: Mapping | None = None):
        self.ring = ring
        t: dict[tuple[int, tuple[int, ...]], Fraction] = {}
        if terms:
            for (b, e), c in terms.items():
                c = _frac(c)
                e = tuple(e)
                if c != 0 and ring._keep(b, e):
                    t[(b, e)] = c
        self.terms = t

    # -- queries --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self.ring.const(other)
        if not isinstance(other, Series):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    def coeff(self, beta: int = 0, **exps: int) -> Fraction:
        e = [0] * len(self.ring.vars)
        for name, k in exps.items():
            e[self.ring.pos(name)] = k
        return self.terms.get((beta, tuple(e)), Fraction(0))

    def coeff_series(self, name: str, k: int) -> "Series":
        """Coefficient of name^k as a Series (exponent of name zeroed)."""
        i = self.ring.pos(name)
        out = {}
        for (b, e), c in self.terms.items():
            if e[i] == k:
                out[(b, e[:i] + (0,) + e[i + 1:])] = c
        return Series(self.ring, out)

    def beta_range(self) -> tuple[int, int]:
        if not self.terms:
            return (0, 0)
        bs = [b for (b, _) in self.terms]
        return (min(bs), max(bs))

    def beta_piece(self, b: int) -> "Series":
        return Series(
            self.ring, {(0, e): c for (bb, e), c in self.terms.items() if bb == b}
        )

    def min_exponent(self, name: str) -> int | None:
        i = self.ring.pos(name)
        if not self.terms:
            return None
        return min(e[i] for (_, e) in self.terms)

    def max_exponent(self, name: str) -> int | None:
        i = self.ring.pos(name)
        if not self.terms:
            return None
        return max(e[i] for (_, e) in self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for (b, e) in sorted(self.terms)[:40]:
            c = self.terms[(b, e)]
            mono = "*".join(
                ([f"beta^{b}"] if b else [])
                + [
                    f"{v}^{k}" if k != 1 else v
                    for v, k in zip(self.ring.vars, e)
                    if k
                ]
            )
            bits.append(f"{c}*{mono}" if mono else str(c))
        tail = " + ..." if len(self.terms) > 40 else ""
        return " + ".join(bits) + tail

    # -- ring ops ----------------------------------------------------------

    def _coerce(self, other) -> "Series":
        if isinstance(other, Series):
            if other.ring != self.ring:
                raise ValueError("series ring mismatch")
            return other
        return self.ring.const(other)

    def __add__(self, other) -> "Series":
        other = self._coerce(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k, Fraction(0)) + c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        r = Series(self.ring)
        r.terms = out
        return r

    __radd__ = __add__

    def __neg__(self) -> "Series":
        r = Series(self.ring)
        r.terms = {k: -c for k, c in self.terms.items()}
        return r

    def __sub__(self, other) -> "Series":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Series":
        return (-self) + other

    def __mul__(self, other) -> "Series":
        if isinstance(other, (int, Fraction)):
            other = _frac(other)
            if other == 0:
                return self.ring.zero()
            r = Series(self.ring)
            r.terms = {k: c * other for k, c in self.terms.items()}
            return r
        other = self._coerce(other)
        keep = self.ring._keep
        out: dict[tuple[int, tuple[int, ...]], Fraction] = {}
        for (b1, e1), c1 in self.terms.items():
            for (b2, e2), c2 in other.terms.items():
                b = b1 + b2
                e = tuple(a + x for a, x in zip(e1, e2))
                if not keep(b, e):
                    continue
                key = (b, e)
                v = out.get(key, Fraction(0)) + c1 * c2
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)
        r = Series(self.ring)
        r.terms = out
        return r

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Series":
        if n < 0:
            raise ValueError("negative power; use invert()")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __truediv__(self, other) -> "Series":
        if isinstance(other, (int, Fraction)):
            return self * (1 / _frac(other))
        return self * self._coerce(other).invert()

    # -- grading helpers ------------------------------------------------------

    def beta_shift(self, k: int) -> "Series":
        """Multiply by beta^k."""
        out = {}
        for (b, e), c in self.terms.items():
            if self.ring._keep(b + k, e):
                out[(b + k, e)] = c
        return Series(self.ring, out)

    def scale_vars_by_beta(self, names: Iterable[str], power: int) -> "Series":
        """Substitute v -> beta^power * v for each named variable."""
        idx = [self.ring.pos(n) for n in names]
        out = {}
        for (b, e), c in self.terms.items():
            b2 = b + power * sum(e[i] for i in idx)
            if self.ring._keep(b2, e):
                out[(b2, e)] = c
        return Series(self.ring, out)

    def map_coeffs(self, f: Callable[[Fraction], Fraction]) -> "Series":
        return Series(self.ring, {k: f(c) for k, c in self.terms.items()})

    def filter_terms(
        self, pred: Callable[[int, tuple[int, ...]], bool]
    ) -> "Series":
        return Series(
            self.ring, {k: c for k, c in self.terms.items() if pred(k[0], k[1])}
        )

    def total_degree_filter(self, names: Iterable[str], maxdeg: int) -> "Series":
        idx = [self.ring.pos(n) for n in names]
        return self.filter_terms(lambda b, e: sum(e[i] for i in idx) <= maxdeg)

    # -- substitution ------------------------------------------------------------

    def subs(self, assignment: Mapping[str, object]) -> "Series":
        """Substitute variables by Fractions or Series in the same ring.
        Exponents of substituted variables must be nonnegative."""
        ring = self.ring
        series_vals = {
            n: v for n, v in assignment.items() if isinstance(v, Series)
        }
        scalar_vals = {
            n: _frac(v)
            for n, v in assignment.items()
            if not isinstance(v, Series)
        }
        pows: dict[str, list[Series]] = {n: [ring.one()] for n in series_vals}

        def spow(name: str, k: int) -> Series:
            cache = pows[name]
            while len(cache) <= k:
                cache.append(cache[-1] * series_vals[name])
            return cache[k]

        out = ring.zero()
        idx = {n: ring.pos(n) for n in assignment}
        for (b, e), c in self.terms.items():
            rest = list(e)
            coeff = c
            sfactors = []
            for n in assignment:
                k = rest[idx[n]]
                if k < 0:
                    raise ValueError("negative exponent in substitution")
                rest[idx[n]] = 0
                if k == 0:
                    continue
                if n in scalar_vals:
                    coeff *= scalar_vals[n] ** k
                else:
                    sfactors.append(spow(n, k))
            if coeff == 0:
                continue
            term = Series(ring, {(b, tuple(rest)): coeff})
            for f in sfactors:
                term = term * f
            out = out + term
        return out

    # -- unit inversion, exp, log ----------------------------------------------

    def _capped_degree_bound(self) -> int:
        """Max total degree storable in capped variables (for loop bounds)."""
        tot = 0
        for cap in self.ring.caps:
            if cap is not None:
                tot += max(cap, 0)
        if self.ring.beta_cap is not None:
            tot += abs(self.ring.beta_cap) + max(
                (-b for (b, _) in self.terms), default=0
            )
        return tot

    def _min_capped_degree(self) -> int:
        degs = []
        for (b, e), _ in self.terms.items():
            d = sum(
                x for x, cap in zip(e, self.ring.caps) if cap is not None
            )
            degs.append(d)
        return min(degs) if degs else 0

    def invert(self) -> "Series":
        """Inverse of a unit: a single minimal monomial must divide all terms."""
        if not self.terms:
            raise DivisionByNonUnit("zero series")
        # candidate monomial: componentwise minimum of exponents and beta
        bmin = min(b for (b, _) in self.terms)
        emin = tuple(
            min(e[i] for (_, e) in self.terms)
            for i in range(len(self.ring.vars))
        )
        key = (bmin, emin)
        c0 = self.terms.get(key)
        if c0 is None:
            raise DivisionByNonUnit(
                "no leading monomial divides every term of the series"
            )
        # self = c0 * m * (1 + u), invert the unit factor geometrically
        m_inv = Series(
            self.ring, {(-bmin, tuple(-x for x in emin)): 1 / c0}
        )
        u = self * m_inv - self.ring.one()
        if u.is_zero():
            return m_inv
        if u._min_capped_degree() <= 0:
            raise DivisionByNonUnit("series unit part has a constant remainder")
        bound = self._capped_degree_bound() + 2
        acc = self.ring.one()
        upow = u
        k = 1
        while not upow.is_zero() and k <= bound:
            acc = acc + (-1) ** k * upow
            upow = upow * u
            k += 1
        return acc * m_inv

    def exp(self) -> "Series":
        """exp of a series with no constant term (positive capped degree)."""
        if self.is_zero():
            return self.ring.one()
        if self._min_capped_degree() <= 0:
            raise ValueError("exp needs positive valuation in capped variables")
        bound = self._capped_degree_bound() + 2
        acc = self.ring.one()
        term = self.ring.one()
        k = 1
        while k <= bound:
            term = term * self / k
            if term.is_zero():
                break
            acc = acc + term
            k += 1
        return acc

    def log(self) -> "Series":
        """log of a series of the form 1 + u, u of positive capped degree."""
        u = self - self.ring.one()
        if u.is_zero():
            return self.ring.zero()
        if u._min_capped_degree() <= 0:
            raise ValueError("log needs 1 + (positive-valuation part)")
        bound = self._capped_degree_bound() + 2
        acc = self.ring.zero()
        upow = u
        k = 1
        while not upow.is_zero() and k <= bound:
            acc = acc + (-1) ** (k + 1) * upow / k
            upow = upow * u
            k += 1
        return acc


def series_arith(a: Series, b: Series, op: str) -> Series:
    """Spec-level entry: add/mul/div on compatible series."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def reversion(f: Series, name: str, order: int) -> Series:
    """Compositional inverse of a univariate series f with f(0)=0, f'(0)!=0.

    Returns g with f(g(x)) = x + O(x^{order+1}); verified internally by
    composition before returning.
    """
    ring = f.ring
    i = ring.pos(name)
    for (b, e), _ in f.terms.items():
        if b != 0 or any(x and j != i for j, x in enumerate(e)):
            raise ValueError("reversion needs a univariate beta-free series")
    if f.coeff(**{name: 0}) != 0:
        raise NotInvertible("series must vanish at 0")
    a1 = f.coeff(**{name: 1})
    if a1 == 0:
        raise NotInvertible("series must have nonzero linear term")
    cap = ring.caps[i]
    if cap is None or cap < order:
        raise ValueError("ring cap too small for requested reversion order")

    x = ring.var(name)
    g = x / a1
    rest = f - x * a1  # higher-order part
    for _ in range(order + 1):
        g_new = (x - _compose_univariate(rest, name, g)) / a1
        if g_new == g:
            break
        g = g_new
    check = _compose_univariate(f, name, g) - x
    if any(e[i] <= order for (_, e) in check.terms):
        raise NotInvertible("reversion failed to stabilize")
    return g


def _compose_univariate(f: Series, name: str, g: Series) -> Series:
    """f(g) for univariate f (in `name`), by Horner in descending powers."""
    ring = f.ring
    i = ring.pos(name)
    if f.is_zero():
        return ring.zero()
    deg = max(e[i] for (_, e) in f.terms)
    coeffs = [f.coeff(**{name: k}) for k in range(deg + 1)]
    acc = ring.zero()
    for c in reversed(coeffs):
        acc = acc * g + ring.const(c)
    return acc


def divide_diff(f: Series, xi: str, xj: str) -> Series:
    """Divide f exactly by (xi - xj), assuming f vanishes on the diagonal.

    The output is truncated to the region where the division is determined
    by the stored support: terms with a + b + 1 <= cap(xj) come from the
    descending recurrence in xi, the rest (with a + b + 1 <= cap(xi)) from
    the mirrored one.  Terms outside both regions are dropped.
    """
    ring = f.ring
    pi, pj = ring.pos(xi), ring.pos(xj)
    cap_i = ring.caps[pi]
    cap_j = ring.caps[pj]
    if cap_i is None or cap_j is None:
        raise ValueError("divide_diff needs caps on both variables")

    # bucket coefficients by (beta, other-exponents) -> {(a, b): coeff}
    buckets: dict[tuple, dict[tuple[int, int], Fraction]] = {}
    for (b, e), c in f.terms.items():
        key = (b, tuple(x for k, x in enumerate(e) if k not in (pi, pj)))
        buckets.setdefault(key, {})[(e[pi], e[pj])] = c

    out: dict[tuple[int, tuple[int, ...]], Fraction] = {}
    for key, cmap in buckets.items():
        bexp, rest = key
        amax = max(a for a, _ in cmap)
        bmax = max(b for _, b in cmap)
        for a in range(0, max(amax, cap_i) + 1):
            for b in range(0, max(bmax, cap_j) + 1):
                tot = a + b + 1
                if tot <= cap_j:
                    val = -sum(
                        (cmap.get((i2, tot - i2), Fraction(0)) for i2 in range(a + 1)),
                        Fraction(0),
                    )
                elif tot <= cap_i:
                    val = sum(
                        (cmap.get((tot - j2, j2), Fraction(0)) for j2 in range(b + 1)),
                        Fraction(0),
                    )
                else:
                    continue
                if val:
                    e = [0] * len(ring.vars)
                    k = 0
                    for pos in range(len(ring.vars)):
                        if pos == pi:
                            e[pos] = a
                        elif pos == pj:
                            e[pos] = b
                        else:
                            e[pos] = rest[k]
                            k += 1
                    out[(bexp, tuple(e))] = val
    return Series(ring, out)

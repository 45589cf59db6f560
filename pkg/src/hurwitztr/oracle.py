"""Ground-truth Hurwitz numbers by symmetric-group factorization counting.

Pure Hurwitz numbers count identity factorizations with prescribed cycle
types, normalized by 1/N!.  Weighted double Hurwitz numbers sum these over
auxiliary profiles with symmetric-function weights in the g-coefficient
basis, by two independently coded routes whose agreement is asserted:

  * the k-tuple sum over nontrivial profiles with weight
    (|aut(lambda)|/k!) m_lambda(c), and
  * the M-slot sum allowing trivial profiles with weight prod c_i^{colength}.

Connected (transitive) counts come from direct enumeration where feasible
and from the log of the disconnected generating series in general; the two
are cross-checked on the overlap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, product
from math import factorial

from .mpoly import MPoly
from .partitions import (
    Partition,
    aut_size,
    check_partition,
    colength,
    multiplicities,
    partitions_of,
)
from .sgroup import (
    CapExceeded,
    count_identity_factorizations,
    count_identity_factorizations_naive,
)
from .symfun import WeightData, c_vars, eval_g_monomials, symmetric_c_to_g, weight_WG

N_CAP = 7
K_CAP = 12

GTable = dict[Partition, Fraction]  # {g-monomial partition: coefficient}


class InconsistentDefinitions(AssertionError):
    pass


class NonIntegral(ValueError):
    pass


@dataclass
class FactorizationQuery:
    N: int
    profiles: list[Partition]
    require_transitive: bool = False

    def __post_init__(self):
        self.profiles = [check_partition(p) for p in self.profiles]
        for p in self.profiles:
            if sum(p) != self.N:
                raise ValueError(f"profile {p} does not partition {self.N}")


@dataclass
class HurwitzTable:
    """Map (mu, nu, d) -> coefficient table over g-monomials."""

    connected: bool
    entries: dict[tuple[Partition, Partition, int], GTable] = field(
        default_factory=dict
    )

    def value(
        self, mu: Partition, nu: Partition, d: int, w: WeightData
    ) -> Fraction:
        tbl = self.entries.get((tuple(mu), tuple(nu), d))
        if not tbl:
            return Fraction(0)
        return eval_g_monomials(tbl, w)


def genus_of(mu: Partition, nu: Partition, d: int) -> int:
    """Genus from 2 - 2g = l(mu) + l(nu) - d; NonIntegral on parity failure."""
    chi = len(mu) + len(nu) - d
    if chi % 2 != 0:
        raise NonIntegral(f"chi = {chi} is odd for ({mu}, {nu}, d={d})")
    return (2 - chi) // 2


def pure_hurwitz(q: FactorizationQuery, method: str = "auto") -> Fraction:
    """H(mu^(1)..mu^(k)) = #factorizations of I / N!.

    method: 'auto' (class convolution unless transitivity is required),
    'enumerate' (naive ground truth), 'classalgebra'.
    """
    if q.N > N_CAP:
        raise CapExceeded(f"N = {q.N} exceeds cap {N_CAP}")
    if len(q.profiles) > K_CAP:
        raise CapExceeded(f"k = {len(q.profiles)} exceeds cap {K_CAP}")
    if q.require_transitive:
        if method == "classalgebra":
            raise ValueError("transitive counting needs enumeration")
        count = count_identity_factorizations_naive(
            q.N, q.profiles, transitive=True
        )
    elif method == "enumerate":
        count = count_identity_factorizations_naive(q.N, q.profiles)
    else:
        count = count_identity_factorizations(q.N, q.profiles)
    return Fraction(count, factorial(q.N))


def _nontrivial_profiles(N: int) -> list[Partition]:
    return [p for p in partitions_of(N) if colength(p) >= 1]


def _hd_route_tuples(
    w: WeightData, mu: Partition, nu: Partition, d: int
) -> GTable:
    """Route 1: sum over unordered k-tuples of nontrivial profiles."""
    N = sum(mu)
    if d == 0:
        h = pure_hurwitz(FactorizationQuery(N, [mu, nu]))
        return {(): h} if h else {}
    out: GTable = {}
    pool = _nontrivial_profiles(N)
    for k in range(1, min(w.degree, d) + 1):
        for combo in combinations_with_replacement(pool, k):
            if sum(colength(p) for p in combo) != d:
                continue
            h = pure_hurwitz(FactorizationQuery(N, list(combo) + [mu, nu]))
            if h == 0:
                continue
            wt = weight_WG(list(combo), w)
            orderings = Fraction(
                factorial(k), aut_size_of_multiset(combo)
            )
            for gmono, c in wt.items():
                v = out.get(gmono, Fraction(0)) + c * h * orderings
                if v:
                    out[gmono] = v
                else:
                    out.pop(gmono, None)
    return out


def aut_size_of_multiset(profiles) -> int:
    counts: dict[Partition, int] = {}
    for p in profiles:
        counts[p] = counts.get(p, 0) + 1
    out = 1
    for c in counts.values():
        out *= factorial(c)
    return out


def _hd_route_slots(
    w: WeightData, mu: Partition, nu: Partition, d: int
) -> GTable:
    """Route 2: ordered M-slot sum with trivial profiles allowed, weight
    prod c_i^{colength_i}, reduced to the g basis at the end."""
    N = sum(mu)
    M = w.degree
    trivial = (1,) * N
    pool = partitions_of(N)
    cvs = c_vars(M)
    acc = MPoly(cvs)
    cache: dict[tuple, Fraction] = {}
    for slots in product(pool, repeat=M):
        if sum(colength(p) for p in slots) != d:
            continue
        key = tuple(sorted(slots))
        h = cache.get(key)
        if h is None:
            nontriv = [p for p in key if p != trivial]
            h = pure_hurwitz(FactorizationQuery(N, nontriv + [mu, nu]))
            cache[key] = h
        if h == 0:
            continue
        exps = tuple(colength(p) for p in slots)
        acc = acc + MPoly(cvs, {exps: h})
    if not acc.terms:
        return {}
    return symmetric_c_to_g(acc, M)


_WEIGHTED_CACHE: dict[tuple, HurwitzTable] = {}


def weighted_hurwitz(
    w: WeightData, mu: Partition, nu: Partition, dmax: int
) -> HurwitzTable:
    """H^d_G(mu, nu) for 0 <= d <= dmax as g-monomial tables.

    Both defining routes are computed and compared; disagreement raises
    InconsistentDefinitions (an implementation-bug signal, not an input
    error).  Results are cached per (G, mu, nu, dmax); treat them as
    read-only.
    """
    mu, nu = check_partition(mu), check_partition(nu)
    if sum(mu) != sum(nu):
        raise ValueError("|mu| != |nu|")
    if sum(mu) > N_CAP:
        raise CapExceeded(f"N = {sum(mu)} exceeds cap {N_CAP}")
    key = (tuple(w.gcoeffs), mu, nu, dmax)
    hit = _WEIGHTED_CACHE.get(key)
    if hit is not None:
        return hit
    table = HurwitzTable(connected=False)
    for d in range(dmax + 1):
        t1 = _hd_route_tuples(w, mu, nu, d)
        t2 = _hd_route_slots(w, mu, nu, d)
        if t1 != t2:
            raise InconsistentDefinitions(
                f"H^{d}_G({mu},{nu}): tuple route {t1} != slot route {t2}"
            )
        if t1:
            table.entries[(mu, nu, d)] = t1
    _WEIGHTED_CACHE[key] = table
    return table


def connected_pure_hurwitz(q: FactorizationQuery) -> Fraction:
    """Transitive-only count, direct enumeration."""
    q = FactorizationQuery(q.N, q.profiles, require_transitive=True)
    return pure_hurwitz(q)


def connected_weighted_hurwitz(
    w: WeightData, mu: Partition, nu: Partition, dmax: int
) -> HurwitzTable:
    """Connected H~^d_G(mu, nu) by direct transitive enumeration."""
    mu, nu = check_partition(mu), check_partition(nu)
    N = sum(mu)
    if N != sum(nu):
        raise ValueError("|mu| != |nu|")
    if N > N_CAP:
        raise CapExceeded(f"N = {N} exceeds cap {N_CAP}")
    table = HurwitzTable(connected=True)
    pool = _nontrivial_profiles(N)
    for d in range(dmax + 1):
        out: GTable = {}
        if d == 0:
            h = connected_pure_hurwitz(FactorizationQuery(N, [mu, nu]))
            if h:
                out[()] = h
        else:
            for k in range(1, min(w.degree, d) + 1):
                for combo in combinations_with_replacement(pool, k):
                    if sum(colength(p) for p in combo) != d:
                        continue
                    h = connected_pure_hurwitz(
                        FactorizationQuery(N, list(combo) + [mu, nu])
                    )
                    if h == 0:
                        continue
                    wt = weight_WG(list(combo), w)
                    orderings = Fraction(
                        factorial(k), aut_size_of_multiset(combo)
                    )
                    for gmono, c in wt.items():
                        v = out.get(gmono, Fraction(0)) + c * h * orderings
                        if v:
                            out[gmono] = v
                        else:
                            out.pop(gmono, None)
        if out:
            table.entries[(mu, nu, d)] = out
    return table


# ---------------------------------------------------------------------------
# connected numbers via the exp-log principle
# ---------------------------------------------------------------------------

PairKey = tuple[Partition, Partition, int]


def _merge(a: Partition, b: Partition) -> Partition:
    return tuple(sorted(a + b, reverse=True))


def disconnected_numeric_table(
    w: WeightData, n_max: int, d_max: int
) -> dict[PairKey, Fraction]:
    """{(mu, nu, d): H^d_G(mu, nu)} at the numeric g's of w, |mu| <= n_max."""
    out: dict[PairKey, Fraction] = {}
    for N in range(1, n_max + 1):
        for mu in partitions_of(N):
            for nu in partitions_of(N):
                tbl = weighted_hurwitz(w, mu, nu, d_max)
                for (m, n, d), g in tbl.entries.items():
                    val = eval_g_monomials(g, w)
                    if val:
                        out[(m, n, d)] = val
    return out


def connected_from_log(
    disconnected: dict[PairKey, Fraction], n_max: int, d_max: int
) -> dict[PairKey, Fraction]:
    """Connected numbers as the log of the disconnected generating series.

    The series lives in the monoid of (mu, nu, beta^d) monomials with the
    gamma-grading |mu|; log(1 + U) truncates at gamma^{n_max}.
    """
    U = dict(disconnected)

    def mul(
        A: dict[PairKey, Fraction], B: dict[PairKey, Fraction]
    ) -> dict[PairKey, Fraction]:
        out: dict[PairKey, Fraction] = {}
        for (m1, n1, d1), c1 in A.items():
            for (m2, n2, d2), c2 in B.items():
                if sum(m1) + sum(m2) > n_max or d1 + d2 > d_max:
                    continue
                key = (_merge(m1, m2), _merge(n1, n2), d1 + d2)
                v = out.get(key, Fraction(0)) + c1 * c2
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)
        return out

    acc: dict[PairKey, Fraction] = {}
    upow = dict(U)
    for k in range(1, n_max + 1):
        sign = Fraction((-1) ** (k + 1), k)
        for key, c in upow.items():
            v = acc.get(key, Fraction(0)) + sign * c
            if v:
                acc[key] = v
            else:
                acc.pop(key, None)
        upow = mul(upow, U)
        if not upow:
            break
    return {k: v for k, v in acc.items() if v}


def connected_numeric_table(
    w: WeightData, n_max: int, d_max: int
) -> dict[PairKey, Fraction]:
    """Connected weighted Hurwitz numbers at numeric g via the log route."""
    return connected_from_log(
        disconnected_numeric_table(w, n_max, d_max), n_max, d_max
    )

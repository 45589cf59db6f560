"""Symmetric-function layer: characters, Schur expansions, content products.

Irreducible symmetric-group characters come from the Murnaghan-Nakayama
rule with memoization.  Schur functions are expanded in the scaled power
sums t_i = p_i / i used as flow variables; complete homogeneous functions
in the s_i = p'_i / i likewise.  Weight data wraps the weight generating
polynomial G and produces content products, the rho ladder, and the
symmetric weight of a tuple of ramification profiles expressed in the
g-coefficient basis.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial

from .mpoly import MPoly
from .partitions import (
    Partition,
    aut_size,
    check_partition,
    colength,
    multiplicities,
    partitions_of,
    weight,
    z_mu,
)
from .poly import Poly, _frac
from .series import Series, SeriesRing


class SizeMismatch(ValueError):
    pass


class TrivialProfile(ValueError):
    pass


# ---------------------------------------------------------------------------
# characters
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def character(lam: Partition, mu: Partition) -> int:
    """chi_lambda(mu) by the Murnaghan-Nakayama rule.

    Border-strip removal is done on the beta-set b_r = lam_r + (L - 1 - r):
    removing a strip of size k replaces one beta number b by b - k, legal
    when b - k >= 0 and not already present; the sign is the parity of the
    beta numbers lying strictly between the old and new values.
    """
    if sum(lam) != sum(mu):
        raise SizeMismatch(f"|lambda| = {sum(lam)} != |mu| = {sum(mu)}")
    if not lam:
        return 1
    k = mu[0]
    rest = mu[1:]
    L = len(lam)
    beta = [lam[r] + (L - 1 - r) for r in range(L)]
    bset = set(beta)
    total = 0
    for b in beta:
        nb = b - k
        if nb < 0 or nb in bset:
            continue
        crossed = sum(1 for x in beta if nb < x < b)
        newbeta = sorted((x for x in beta if x != b), reverse=True)
        # insert nb in order
        newbeta.append(nb)
        newbeta.sort(reverse=True)
        newlam = tuple(
            x - (L - 1 - r) for r, x in enumerate(newbeta) if x - (L - 1 - r) > 0
        )
        total += (-1) ** crossed * character(newlam, rest)
    return total


def dimension(lam: Partition) -> int:
    """f^lambda via the hook length formula."""
    lam = check_partition(lam)
    if not lam:
        return 1
    conj = [sum(1 for p in lam if p >= c + 1) for c in range(lam[0])]
    num = factorial(sum(lam))
    for i, row in enumerate(lam):
        for j in range(row):
            num //= (row - j) + (conj[j] - i) - 1
    return num


# ---------------------------------------------------------------------------
# Schur / monomial / complete homogeneous expansions
# ---------------------------------------------------------------------------

def schur_in_powersums(lam: Partition, ring: SeriesRing, prefix: str = "t") -> Series:
    """s_lambda as a polynomial in the scaled power sums t_i = p_i / i.

    Frobenius: s_lambda = sum_mu chi_lambda(mu) p_mu / z_mu with
    p_mu = prod mu_i t_{mu_i} * prod mu_i.
    """
    lam = check_partition(lam)
    n = sum(lam)
    out = ring.zero()
    for mu in partitions_of(n):
        chi = character(lam, mu)
        if chi == 0:
            continue
        coeff = Fraction(chi, z_mu(mu))
        for part in mu:
            coeff *= part
        out = out + ring.monomial(coeff, **_exp_map(mu, prefix))
    if n == 0:
        out = ring.one()
    return out


def _exp_map(mu: Partition, prefix: str) -> dict[str, int]:
    exps: dict[str, int] = {}
    for part in mu:
        key = f"{prefix}{part}"
        exps[key] = exps.get(key, 0) + 1
    return exps


def power_sum_monomial(mu: Partition, ring: SeriesRing, prefix: str) -> Series:
    """p_mu in flow variables: prod_i (mu_i * v_{mu_i})."""
    coeff = Fraction(1)
    for part in mu:
        coeff *= part
    if not mu:
        return ring.one()
    return ring.monomial(coeff, **_exp_map(mu, prefix))


def complete_h(j: int, ring: SeriesRing, prefix: str = "s", beta_scaled: bool = False) -> Series:
    """h_j in the flow variables v_i = p'_i / i (optionally at beta^-1 v).

    h_j = sum over partitions mu of j of p_mu / z_mu; the beta-scaled form
    multiplies each p_i by beta^-1, giving a Laurent polynomial in beta.
    """
    if j < 0:
        return ring.zero()
    if j == 0:
        return ring.one()
    out = ring.zero()
    for mu in partitions_of(j):
        term = power_sum_monomial(mu, ring, prefix) / z_mu(mu)
        if beta_scaled:
            term = term.beta_shift(-len(mu))
        out = out + term
    return out


def complete_h_numeric(j: int, svals: list[Fraction]) -> Poly:
    """h_j(beta^-1 s) at numeric flow values s_i, as a Laurent-free data:
    returns the polynomial in u = beta^-1, i.e. coefficients of beta^-k."""
    if j < 0:
        return Poly(var="u")
    if j == 0:
        return Poly.const(1, var="u")
    out = Poly(var="u")
    for mu in partitions_of(j):
        coeff = Fraction(1, z_mu(mu))
        ok = True
        for part in mu:
            s = svals[part] if part < len(svals) else Fraction(0)
            if s == 0:
                ok = False
                break
            coeff *= part * s
        if ok:
            out = out + Poly.monomial(len(mu), coeff, var="u")
    return out


def monomial_sym(mu: Partition, xs: list[str], ring: SeriesRing) -> Series:
    """Monomial symmetric polynomial m_mu(x_1..x_n)."""
    mu = check_partition(mu)
    n = len(xs)
    if len(mu) > n:
        return ring.zero()
    padded = list(mu) + [0] * (n - len(mu))
    seen: set[tuple[int, ...]] = set()
    out = ring.zero()
    for arrangement in _distinct_permutations(padded):
        if arrangement in seen:
            continue
        seen.add(arrangement)
        out = out + ring.monomial(
            1, **{x: e for x, e in zip(xs, arrangement) if e}
        )
    return out


def _distinct_permutations(vals: list[int]):
    vals = sorted(vals, reverse=True)
    n = len(vals)

    def rec(remaining: list[int], acc: list[int]):
        if not remaining:
            yield tuple(acc)
            return
        prev = None
        for i, v in enumerate(remaining):
            if v == prev:
                continue
            prev = v
            yield from rec(remaining[:i] + remaining[i + 1:], acc + [v])

    yield from rec(vals, [])


def monomial_two_block(mu: Partition, n: int, m: int) -> dict[tuple[int, int], int]:
    """m_mu(x,...,x, x',...,x') with n copies of x and m of x'.

    Returns {(dx, dx'): multiplicity} with dx + dx' = |mu|; used by the
    partial-diagonal boson/fermion identities.
    """
    mu = check_partition(mu)
    if len(mu) > n + m:
        return {}
    padded = list(mu) + [0] * (n + m - len(mu))
    out: dict[tuple[int, int], int] = {}
    for arrangement in _distinct_permutations(padded):
        a = sum(arrangement[:n])
        b = sum(arrangement[n:])
        out[(a, b)] = out.get((a, b), 0) + 1
    return out


def hook_schur_eval(a: int, b: int, ring: SeriesRing, x: str = "x", xp: str = "xp") -> Series:
    """s_{(a|b)} at the difference evaluation [x] - [x']: (x - x') x^a (-x')^b."""
    if a < 0 or b < 0:
        raise ValueError("hook coordinates must be nonnegative")
    sign = (-1) ** b
    t1 = ring.monomial(sign, **{x: a + 1, xp: b})
    t2 = ring.monomial(-sign, **{x: a, xp: b + 1})
    return t1 + t2


def schur_difference_eval(lam: Partition, ring: SeriesRing, x: str = "x", xp: str = "xp") -> Series:
    """s_lambda([x]-[x']): zero unless lambda is a hook or empty."""
    from .partitions import is_hook

    lam = check_partition(lam)
    if not lam:
        return ring.one()
    hook = is_hook(lam)
    if hook is None:
        return ring.zero()
    return hook_schur_eval(hook[0], hook[1], ring, x=x, xp=xp)


# ---------------------------------------------------------------------------
# weight data: G, content products, rho ladder, profile weights
# ---------------------------------------------------------------------------

class WeightData:
    """The weight generating polynomial G(z) = 1 + sum g_k z^k.

    g-coefficients are exact rationals; the c-parameters (roots of G as
    (1 + c_i z) factors) are never solved for -- symmetric-function
    reduction keeps everything in Q[g_1..g_M].
    """

    def __init__(self, gcoeffs: list) -> None:
        gs = [_frac(g) for g in gcoeffs]
        while gs and gs[-1] == 0:
            gs.pop()
        self.gcoeffs = gs
        self.G = Poly([1] + gs, var="z")

    @property
    def degree(self) -> int:
        return len(self.gcoeffs)

    def __repr__(self):
        return f"WeightData(G={self.G!r})"

    def g_eval(self, z) -> Fraction:
        return self.G(_frac(z))

    def power_sums_A(self, kmax: int) -> list[Fraction]:
        """A_k = (1/k) sum_i c_i^k from Newton's identities on e_k = g_k."""
        M = self.degree
        e = [Fraction(1)] + [
            self.gcoeffs[k - 1] if k <= M else Fraction(0) for k in range(1, kmax + 1)
        ]
        p = [Fraction(M)]
        for k in range(1, kmax + 1):
            acc = Fraction(0)
            for i in range(1, k):
                acc += (-1) ** (i - 1) * e[i] * p[k - i]
            acc += (-1) ** (k - 1) * k * e[k]
            p.append(acc)
        return [p[k] / k if k else Fraction(0) for k in range(kmax + 1)]


def g_of_beta_poly(w: WeightData, mult: int) -> Poly:
    """G(mult * beta) as a polynomial in beta."""
    out = [Fraction(1)]
    for k, g in enumerate(w.gcoeffs, start=1):
        out.append(g * Fraction(mult) ** k)
    return Poly(out, var="beta")


def content_product(lam: Partition, w: WeightData) -> Poly:
    """r_lambda = prod over boxes (i,j) of G((j - i) beta), in beta."""
    lam = check_partition(lam)
    out = Poly.const(1, var="beta")
    for i, row in enumerate(lam):
        for j in range(row):
            out = out * g_of_beta_poly(w, j - i)
    return out


def rho_plus(w: WeightData, j: int) -> Poly:
    """prod_{i=1..j} G(i beta) (the beta part of rho_j, j >= 0)."""
    out = Poly.const(1, var="beta")
    for i in range(1, j + 1):
        out = out * g_of_beta_poly(w, i)
    return out


def rho_minus_inv(w: WeightData, j: int) -> Poly:
    """prod_{i=0..j-1} G(-i beta): the beta part of 1/rho_{-j}, j >= 0."""
    out = Poly.const(1, var="beta")
    for i in range(j):
        out = out * g_of_beta_poly(w, -i)
    return out


def rho_coeff(w: WeightData, j: int, ring: SeriesRing, gamma: str = "gamma") -> Series:
    """rho_j as a Series: gamma^j times a beta-polynomial (j >= 0) or the
    truncated beta-series of the inverse product (j < 0).

    The ring must carry `gamma` and, for j < 0, a beta_cap to truncate the
    G-inverses.
    """
    if j >= 0:
        base = rho_plus(w, j)
        out = ring.zero()
        for k, c in enumerate(base.coeffs):
            if c:
                out = out + ring.monomial(c, beta=k, **{gamma: j})
        return out
    j = -j
    prod = rho_minus_inv(w, j)  # rho_{-j} is gamma^{-j} / prod
    inv = _invert_beta_poly(prod, ring)
    return inv * ring.monomial(1, **{gamma: -j})


def _invert_beta_poly(p: Poly, ring: SeriesRing) -> Series:
    """1/p as a beta-series in `ring` (p has constant term 1)."""
    if p[0] != 1:
        raise ValueError("expect constant term 1")
    if ring.beta_cap is None:
        raise ValueError("beta truncation required to invert a beta-polynomial")
    u = ring.zero()
    for k, c in enumerate(p.coeffs):
        if k and c:
            u = u + ring.beta(k, c)
    out = ring.one()
    term = ring.one()
    for _ in range(ring.beta_cap + 1):
        term = term * u * (-1)
        if term.is_zero():
            break
        out = out + term
    return out


def c_vars(M: int) -> tuple[str, ...]:
    return tuple(f"c{i}" for i in range(1, M + 1))


def elementary_polys(M: int) -> list[MPoly]:
    """[1, e_1, ..., e_M] in the c variables."""
    from itertools import combinations

    cvars = c_vars(M)
    es = [MPoly.const(cvars, 1)]
    for k in range(1, M + 1):
        acc = MPoly(cvars)
        for combo in combinations(range(M), k):
            e = [0] * M
            for i in combo:
                e[i] = 1
            acc = acc + MPoly(cvars, {tuple(e): 1})
        es.append(acc)
    return es


def symmetric_c_to_g(target: MPoly, M: int) -> dict[Partition, Fraction]:
    """Rewrite a symmetric polynomial in c_1..c_M in the elementary basis.

    Returns {nu: coeff} meaning sum coeff * prod g_{nu_i} (e_k(c) = g_k).
    Gauss reduction on the lex-leading monomial; raises if the input is not
    symmetric.
    """
    es = elementary_polys(M)
    result: dict[Partition, Fraction] = {}
    while target.terms:
        lead = max(target.terms)  # lex order on exponent tuples
        c = target.terms[lead]
        alpha = list(lead)
        if any(alpha[i] < alpha[i + 1] for i in range(M - 1)):
            raise ValueError("not symmetric in the c variables")
        # e-product with this leading monomial: prod e_k^{alpha_k - alpha_{k+1}}
        basis = MPoly.const(c_vars(M), 1)
        nu_parts = []
        for k in range(1, M + 1):
            mult = alpha[k - 1] - (alpha[k] if k < M else 0)
            if mult:
                basis = basis * es[k] ** mult
                nu_parts.extend([k] * mult)
        nu = tuple(sorted(nu_parts, reverse=True))
        result[nu] = result.get(nu, Fraction(0)) + c
        target = target - basis * c
    return {k: v for k, v in result.items() if v}


def m_lambda_in_g(lam: Partition, M: int) -> dict[Partition, Fraction]:
    """Expand m_lambda(c_1..c_M) in elementary symmetric polynomials of c.

    Returns {e-exponent partition nu: coeff} meaning sum coeff * prod e_{nu_i},
    where e_k(c) = g_k.  Zero dict if l(lambda) > M.
    """
    lam = check_partition(lam)
    if len(lam) > M:
        return {}
    cvars = c_vars(M)
    target = MPoly(cvars)
    padded = list(lam) + [0] * (M - len(lam))
    seen = set()
    for arr in _distinct_permutations(padded):
        if arr in seen:
            continue
        seen.add(arr)
        target = target + MPoly(cvars, {arr: 1})
    return symmetric_c_to_g(target, M)


def weight_WG(profiles: list[Partition], w: WeightData) -> dict[Partition, Fraction]:
    """W_G(mu^(1)..mu^(k)) = (|aut(lambda)| / k!) m_lambda(c) in the g basis.

    lambda is the sorted tuple of colengths; the result maps e-exponent
    partitions nu (meaning prod g_{nu_i}) to rational coefficients.
    """
    k = len(profiles)
    if k == 0:
        return {(): Fraction(1)}
    lam_parts = []
    for mu in profiles:
        mu = check_partition(mu)
        ls = colength(mu)
        if ls == 0:
            raise TrivialProfile(f"profile {mu} is trivial")
        lam_parts.append(ls)
    lam = tuple(sorted(lam_parts, reverse=True))
    me = m_lambda_in_g(lam, w.degree)
    scale = Fraction(aut_size(lam), factorial(k))
    return {nu: c * scale for nu, c in me.items()}


def eval_g_monomials(table: dict[Partition, Fraction], w: WeightData) -> Fraction:
    """Evaluate a {nu: coeff} g-monomial table at the numeric g's of w."""
    out = Fraction(0)
    for nu, c in table.items():
        acc = c
        for part in nu:
            acc *= w.gcoeffs[part - 1] if part <= w.degree else Fraction(0)
        out += acc
    return out

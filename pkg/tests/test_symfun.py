"""Partitions, characters, Schur expansions, weights."""

from fractions import Fraction

import pytest

from hurwitztr.partitions import (
    aut_size,
    colength,
    conjugate,
    partitions_of,
    z_mu,
)
from hurwitztr.series import SeriesRing
from hurwitztr.symfun import (
    SizeMismatch,
    TrivialProfile,
    WeightData,
    character,
    complete_h,
    content_product,
    dimension,
    hook_schur_eval,
    m_lambda_in_g,
    monomial_sym,
    rho_coeff,
    rho_plus,
    rho_minus_inv,
    schur_difference_eval,
    schur_in_powersums,
    weight_WG,
)


def t_ring(n):
    names = tuple(f"t{i}" for i in range(1, n + 1))
    return SeriesRing(names, caps={v: n for v in names})


def test_partition_counts():
    assert partitions_of(0) == [()]
    assert len(partitions_of(4)) == 5
    assert len(partitions_of(6)) == 11
    assert partitions_of(3, max_len=2) == [(3,), (2, 1)]


def test_partition_stats():
    assert colength((3, 1, 1)) == 2
    assert aut_size((2, 2, 1)) == 2
    assert z_mu((2, 1, 1)) == 4
    assert conjugate((3, 1)) == (2, 1, 1)


def test_character_trivial_and_sign():
    for mu in partitions_of(5):
        assert character((5,), mu) == 1
        sgn = (-1) ** (sum(mu) - len(mu))
        assert character((1, 1, 1, 1, 1), mu) == sgn


def test_character_dimension():
    # chi_lambda((1^n)) is the dimension; (2,1) has dimension 2
    assert character((2, 1), (1, 1, 1)) == 2
    for lam in partitions_of(6):
        assert character(lam, (1,) * 6) == dimension(lam)


def test_character_size_mismatch():
    with pytest.raises(SizeMismatch):
        character((2,), (1,))


def test_character_orthogonality():
    # sum_mu chi_l(mu) chi_l'(mu) / z_mu = delta for all |lambda| <= 6
    for n in range(7):
        parts = partitions_of(n)
        for l1 in parts:
            for l2 in parts:
                total = sum(
                    Fraction(character(l1, mu) * character(l2, mu), z_mu(mu))
                    for mu in parts
                )
                assert total == (1 if l1 == l2 else 0)


def test_schur_in_powersums_small():
    R = t_ring(3)
    assert schur_in_powersums((1,), R) == R.var("t1")
    s2 = schur_in_powersums((2,), R)
    s11 = schur_in_powersums((1, 1), R)
    t1, t2 = R.var("t1"), R.var("t2")
    assert s2 == t1 * t1 / 2 + t2
    assert s11 == t1 * t1 / 2 - t2


def test_cauchy_littlewood():
    # exp(sum i t_i s_i) = sum_lambda s_lambda(t) s_lambda(s), degree <= 6
    N = 6
    tnames = tuple(f"t{i}" for i in range(1, N + 1))
    snames = tuple(f"s{i}" for i in range(1, N + 1))
    caps = {v: N for v in tnames + snames}
    R = SeriesRing(tnames + snames, caps=caps)
    expo = R.zero()
    for i in range(1, N + 1):
        expo = expo + R.var(f"t{i}") * R.var(f"s{i}") * i
    lhs = expo.exp()
    rhs = R.zero()
    for n in range(N + 1):
        for lam in partitions_of(n):
            st = schur_in_powersums(lam, R, prefix="t")
            ss = schur_in_powersums(lam, R, prefix="s")
            rhs = rhs + st * ss

    def wdeg(exps):
        return sum(
            (i % N + 1) * e for i, e in enumerate(exps)
        )

    lhs_f = lhs.filter_terms(lambda b, e: wdeg(e) <= 2 * N)
    rhs_f = rhs.filter_terms(lambda b, e: wdeg(e) <= 2 * N)
    # compare on weighted degree <= 6 per alphabet: both weights equal by
    # homogeneity, so total weighted degree <= 12 covers it
    assert lhs_f == rhs_f


def test_hook_schur_eval():
    R = SeriesRing(("x", "xp"), caps={"x": 8, "xp": 8})
    x, xp = R.var("x"), R.var("xp")
    assert hook_schur_eval(0, 0, R) == x - xp
    assert hook_schur_eval(1, 0, R) == (x - xp) * x
    assert schur_difference_eval((2, 2), R).is_zero()
    # cross-check vs character expansion with t_n -> (x^n - x'^n)/n
    for lam in partitions_of(4):
        Rt = SeriesRing(
            ("x", "xp", "t1", "t2", "t3", "t4"),
            caps={"x": 8, "xp": 8, "t1": 4, "t2": 4, "t3": 4, "t4": 4},
        )
        slam = schur_in_powersums(lam, Rt)
        sub = {}
        for n in range(1, 5):
            sub[f"t{n}"] = (Rt.var("x", n) - Rt.var("xp", n)) / n
        direct = slam.subs(sub)
        hook = schur_difference_eval(lam, Rt)
        assert direct == hook, lam


def test_content_product():
    w = WeightData([1])  # G = 1 + z
    assert content_product((), w) == 1
    assert content_product((1,), w) == 1
    # (2,1): contents 0, 1, -1 -> G(b) G(-b) = (1+b)(1-b) = 1 - b^2
    from hurwitztr.poly import Poly

    assert content_product((2, 1), w) == Poly([1, 0, -1], var="beta")
    # beta = 0 evaluation is 1 for every lambda since G(0) = 1
    for lam in partitions_of(5):
        assert content_product(lam, w)[0] == 1


def test_rho_ladder():
    w = WeightData([1, Fraction(1, 2)])
    R = SeriesRing(("gamma",), caps={"gamma": 10}, beta_cap=6)
    assert rho_coeff(w, 0, R) == R.one()
    r1 = rho_coeff(w, 1, R)
    assert r1.coeff(beta=0, gamma=1) == 1 and r1.coeff(beta=1, gamma=1) == 1
    rm1 = rho_coeff(w, -1, R)
    assert rm1.coeff(beta=0, gamma=-1) == 1  # gamma^-1 since G(0) = 1
    # consecutive-ratio identity r_j = rho_j / (gamma rho_{j-1}), -5..5
    for j in range(-5, 6):
        lhs = rho_coeff(w, j, R)
        rhs = rho_coeff(w, j - 1, R) * R.monomial(1, gamma=1)
        # r_j = G(j beta) as a beta-polynomial
        from hurwitztr.symfun import g_of_beta_poly

        rj = g_of_beta_poly(w, j)
        rj_series = R.zero()
        for k, c in enumerate(rj.coeffs):
            rj_series = rj_series + R.beta(k, c)
        assert (rhs * rj_series - lhs).is_zero()


def test_rho_plus_minus_product_forms():
    w = WeightData([2, 3])
    assert rho_plus(w, 2) == (
        __import__("hurwitztr.symfun", fromlist=["g_of_beta_poly"]).g_of_beta_poly(w, 1)
        * __import__("hurwitztr.symfun", fromlist=["g_of_beta_poly"]).g_of_beta_poly(w, 2)
    )
    assert rho_minus_inv(w, 1)[0] == 1 and rho_minus_inv(w, 1).degree == 0


def test_monomial_sym():
    R = SeriesRing(("x1", "x2"), caps={"x1": 6, "x2": 6})
    assert monomial_sym((1,), ["x1"], R) == R.var("x1")
    assert monomial_sym((1, 1), ["x1", "x2"], R) == R.var("x1") * R.var("x2")
    m21 = monomial_sym((2, 1), ["x1", "x2"], R)
    assert m21 == R.monomial(1, x1=2, x2=1) + R.monomial(1, x1=1, x2=2)


def test_complete_h():
    R = SeriesRing(("s1", "s2"), caps={"s1": 4, "s2": 4}, beta_cap=4)
    assert complete_h(0, R) == R.one()
    h1 = complete_h(1, R, beta_scaled=True)
    assert h1 == R.var("s1").beta_shift(-1)
    h2 = complete_h(2, R, beta_scaled=True)
    # s1^2/(2 b^2) + s2/b
    assert h2.coeff(beta=-2, s1=2) == Fraction(1, 2)
    assert h2.coeff(beta=-1, s2=1) == 1
    assert len(h2.terms) == 2


def test_weight_WG():
    w = WeightData([1, 1])  # M = 2, symbolic reduction only
    assert weight_WG([], w) == {(): 1}
    # single profile with colength 1: m_(1)(c) = e1 -> g1
    tbl = weight_WG([(2, 1)], w)
    assert tbl == {(1,): Fraction(1)}
    # two profiles each colength 1: (aut/2!) m_(1,1) = e2 -> g2
    tbl2 = weight_WG([(2, 1), (2, 1)], w)
    assert tbl2 == {(2,): Fraction(1)}
    with pytest.raises(TrivialProfile):
        weight_WG([(1, 1, 1)], w)


def test_m_lambda_in_g_cases():
    # m_(2)(c) = p2 = e1^2 - 2 e2
    assert m_lambda_in_g((2,), 2) == {
        (1, 1): Fraction(1),
        (2,): Fraction(-2),
    }
    # length > M vanishes
    assert m_lambda_in_g((1, 1, 1), 2) == {}
    # m_(2,1) for M = 2: e1 e2 - 3 e3 with e3 = 0 -> check via direct eval
    tbl = m_lambda_in_g((2, 1), 2)
    c1, c2 = Fraction(2), Fraction(-3)
    direct = c1 ** 2 * c2 + c2 ** 2 * c1
    e1, e2 = c1 + c2, c1 * c2
    val = sum(
        coeff * (e1 if nu == (1,) else 1)
        * (e2 if nu == (2,) else 1)
        * (e1 * e1 if nu == (1, 1) else 1)
        * (e1 * e2 if nu == (2, 1) else 1)
        * (e2 * e2 if nu == (2, 2) else 1)
        for nu, coeff in tbl.items()
    )
    assert val == direct

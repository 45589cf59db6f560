"""Hurwitz-number oracle: factorization counts, weights, connectivity."""

import random
from fractions import Fraction

import pytest

from hurwitztr.oracle import (
    FactorizationQuery,
    NonIntegral,
    connected_from_log,
    connected_numeric_table,
    connected_pure_hurwitz,
    connected_weighted_hurwitz,
    disconnected_numeric_table,
    genus_of,
    pure_hurwitz,
    weighted_hurwitz,
)
from hurwitztr.partitions import partitions_of
from hurwitztr.sgroup import (
    CapExceeded,
    count_identity_factorizations,
    count_identity_factorizations_naive,
)
from hurwitztr.symfun import WeightData, character, z_mu
from hurwitztr.partitions import class_size


def test_single_trivial_profile():
    for n in (1, 2, 3, 4):
        q = FactorizationQuery(n, [(1,) * n])
        assert pure_hurwitz(q) == Fraction(1, __import__("math").factorial(n))


def test_two_transpositions_s2():
    assert pure_hurwitz(FactorizationQuery(2, [(2,), (2,)])) == Fraction(1, 2)


def test_three_transpositions_s2_vanishes():
    assert pure_hurwitz(FactorizationQuery(2, [(2,), (2,), (2,)])) == 0


def test_classalgebra_matches_naive():
    random.seed(0)
    for n in (2, 3, 4, 5):
        pool = partitions_of(n)
        for _ in range(6):
            profiles = [random.choice(pool) for _ in range(random.randint(1, 4))]
            fast = count_identity_factorizations(n, profiles)
            slow = count_identity_factorizations_naive(n, profiles)
            assert fast == slow, (n, profiles)


def test_profile_permutation_invariance():
    random.seed(1)
    for n in (3, 4, 5, 6):
        pool = partitions_of(n)
        profiles = [random.choice(pool) for _ in range(3)]
        base = pure_hurwitz(FactorizationQuery(n, profiles))
        for _ in range(3):
            shuffled = profiles[:]
            random.shuffle(shuffled)
            assert pure_hurwitz(FactorizationQuery(n, shuffled)) == base


def test_trivial_profile_insertion():
    for n in (2, 3, 4):
        pool = partitions_of(n)
        for p1 in pool:
            for p2 in pool:
                a = pure_hurwitz(FactorizationQuery(n, [p1, p2]))
                b = pure_hurwitz(FactorizationQuery(n, [p1, p2, (1,) * n]))
                assert a == b


def test_frobenius_cross_check():
    # H(mu^(1)..mu^(k)) = sum_lambda (f_lambda/N!)^... the standard character
    # sum: (1/N!) sum_lambda dim^2 prod_i (|C_i| chi(C_i)/dim)
    import math

    random.seed(2)
    for n in (2, 3, 4, 5):
        pool = partitions_of(n)
        for _ in range(5):
            profiles = [random.choice(pool) for _ in range(random.randint(1, 3))]
            brute = pure_hurwitz(FactorizationQuery(n, profiles))
            total = Fraction(0)
            for lam in pool:
                dim = character(lam, (1,) * n)
                term = Fraction(dim * dim)
                for mu in profiles:
                    term *= Fraction(class_size(mu) * character(lam, mu), dim)
                total += term
            total /= Fraction(math.factorial(n)) ** 2
            assert total == brute, (n, profiles)


def test_genus_of():
    assert genus_of((3,), (3,), 0) == 0
    assert genus_of((2,), (1, 1), 1) == 0
    with pytest.raises(NonIntegral):
        genus_of((2,), (2,), 1)


def test_weighted_hurwitz_basic():
    w = WeightData([1])  # G = 1 + z
    t = weighted_hurwitz(w, (2,), (1, 1), 1)
    # d=1: profiles with colength 1 in S_2: only (2); H((2),(2),(1,1)) = 1/2
    assert t.entries[((2,), (1, 1), 1)] == {(1,): Fraction(1, 2)}
    t0 = weighted_hurwitz(w, (1, 1), (1, 1), 0)
    assert t0.entries[((1, 1), (1, 1), 0)] == {(): Fraction(1, 2)}


def test_weighted_routes_agree_exhaustive():
    # acceptance criterion 2 at reduced scale here (full run in acceptance)
    for w in (WeightData([1]), WeightData([3, 2])):
        for N in (2, 3):
            for mu in partitions_of(N):
                for nu in partitions_of(N):
                    weighted_hurwitz(w, mu, nu, 4)  # asserts internally


def test_connected_small():
    assert connected_pure_hurwitz(FactorizationQuery(1, [(1,), (1,)])) == 1
    assert connected_pure_hurwitz(FactorizationQuery(2, [(1, 1), (1, 1)])) == 0
    assert connected_pure_hurwitz(FactorizationQuery(2, [(2,), (2,)])) == Fraction(1, 2)


def test_connected_log_route_matches_enumeration():
    w = WeightData([1])
    nmax, dmax = 4, 3
    table = connected_numeric_table(w, nmax, dmax)
    for N in range(1, nmax + 1):
        for mu in partitions_of(N):
            for nu in partitions_of(N):
                direct = connected_weighted_hurwitz(w, mu, nu, dmax)
                for d in range(dmax + 1):
                    lhs = table.get((mu, nu, d), Fraction(0))
                    rhs = direct.value(mu, nu, d, w)
                    assert lhs == rhs, (mu, nu, d)


def test_connected_vanishes_on_bad_genus():
    w = WeightData([1])
    # connected count must vanish when genus is non-integral or negative
    tbl = connected_numeric_table(w, 4, 4)
    for (mu, nu, d), val in tbl.items():
        try:
            g = genus_of(mu, nu, d)
        except NonIntegral:
            assert val == 0, (mu, nu, d)
            continue
        assert g >= 0 or val == 0, (mu, nu, d)


def test_cap_guard():
    with pytest.raises(CapExceeded):
        pure_hurwitz(FactorizationQuery(8, [(8,)]))

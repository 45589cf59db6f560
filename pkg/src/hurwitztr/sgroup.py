"""Symmetric-group machinery for factorization counting.

Permutations are tuples of images on {0..N-1}; composition (p * q)(i) =
p[q[i]].  Conjugacy classes are materialized once per N and cached.  Two
counting routes are provided: naive tuple enumeration with the last factor
forced (ground truth, supports the transitivity filter) and an accelerated
class-convolution route built from explicit products with one fixed
representative per class, validated against the naive route in tests.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from math import factorial

from .partitions import Partition, class_size


class CapExceeded(ValueError):
    pass


Perm = tuple[int, ...]


def identity(n: int) -> Perm:
    return tuple(range(n))


def compose(p: Perm, q: Perm) -> Perm:
    """(p * q)(i) = p(q(i))."""
    return tuple(p[x] for x in q)


def inverse(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, x in enumerate(p):
        out[x] = i
    return tuple(out)


def cycle_type(p: Perm) -> Partition:
    seen = [False] * len(p)
    lens = []
    for i in range(len(p)):
        if seen[i]:
            continue
        ln = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = p[j]
            ln += 1
        lens.append(ln)
    return tuple(sorted(lens, reverse=True))


def perm_from_cycle_type(mu: Partition) -> Perm:
    """Canonical representative with consecutive cycles."""
    n = sum(mu)
    out = list(range(n))
    start = 0
    for part in mu:
        for i in range(part):
            out[start + i] = start + (i + 1) % part
        start += part
    return tuple(out)


def is_transitive(perms: list[Perm], n: int) -> bool:
    """Does the subgroup generated by `perms` act transitively on {0..n-1}?"""
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    comps = n
    for p in perms:
        for i, j in enumerate(p):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj
                comps -= 1
    return comps == 1


@lru_cache(maxsize=None)
def conjugacy_classes(n: int) -> dict[Partition, list[Perm]]:
    """All elements of S_n bucketed by cycle type."""
    if n > 8:
        raise CapExceeded(f"S_{n} enumeration refused (cap 8)")
    out: dict[Partition, list[Perm]] = {}
    for p in permutations(range(n)):
        out.setdefault(cycle_type(p), []).append(p)
    return out


@lru_cache(maxsize=None)
def _convolution_table(n: int) -> dict[Partition, dict[Partition, dict[Partition, int]]]:
    """T[K][C][K2] = #{h in class C : rep(K) * h in K2}.

    By conjugation invariance this determines the full class-algebra
    convolution; built from |classes| * n! explicit products.
    """
    classes = conjugacy_classes(n)
    table: dict[Partition, dict[Partition, dict[Partition, int]]] = {}
    for K in classes:
        rep = perm_from_cycle_type(K)
        table[K] = {}
        for C, elements in classes.items():
            dist: dict[Partition, int] = {}
            for h in elements:
                K2 = cycle_type(compose(rep, h))
                dist[K2] = dist.get(K2, 0) + 1
            table[K][C] = dist
    return table


def count_identity_factorizations(n: int, profiles: list[Partition]) -> int:
    """#{(h_1..h_k): h_i in cyc(profile_i), h_1 ... h_k = I} by class
    convolution."""
    for mu in profiles:
        if sum(mu) != n:
            raise ValueError(f"profile {mu} is not a partition of {n}")
    if not profiles:
        return 1
    table = _convolution_table(n)
    ident = (1,) * n if n else ()
    # n_j(K) = number of j-tuples with product lying in K (per element of K)
    current: dict[Partition, int] = {ident: 1}
    for C in profiles:
        nxt: dict[Partition, int] = {}
        for K2 in conjugacy_classes(n):
            # N_j(g) for g in K2 = sum_h in C of N_{j-1}(g h)
            acc = 0
            dist = table[K2][C]
            for K, cnt in dist.items():
                v = current.get(K)
                if v:
                    acc += v * cnt
            if acc:
                nxt[K2] = acc
        current = nxt
    return current.get(ident, 0)


def count_identity_factorizations_naive(
    n: int,
    profiles: list[Partition],
    transitive: bool = False,
    tuple_budget: int = 20_000_000,
) -> int:
    """Direct enumeration: free factors run over their classes, the last
    factor is the forced inverse of the partial product."""
    for mu in profiles:
        if sum(mu) != n:
            raise ValueError(f"profile {mu} is not a partition of {n}")
    if not profiles:
        return 1 if not transitive or n <= 1 else 0
    classes = conjugacy_classes(n)
    # force the largest class to save a loop
    order = sorted(range(len(profiles)), key=lambda i: class_size(profiles[i]))
    free = [profiles[i] for i in order[:-1]]
    forced = profiles[order[-1]]
    work = 1
    for mu in free:
        work *= class_size(mu)
    if work > tuple_budget:
        raise CapExceeded(f"enumeration would visit {work} tuples")

    count = 0
    ident = identity(n)
    chosen: list[Perm] = []

    def rec(i: int, prod: Perm):
        nonlocal count
        if i == len(free):
            last = inverse(prod)
            if cycle_type(last) != forced:
                return
            if transitive and not is_transitive(chosen + [last], n):
                return
            count += 1
            return
        for h in classes[free[i]]:
            chosen.append(h)
            rec(i + 1, compose(prod, h))
            chosen.pop()

    rec(0, ident)
    return count

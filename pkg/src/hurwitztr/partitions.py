"""Integer partitions: generation, statistics, and serialization.

Partitions are plain tuples of weakly decreasing positive ints, the empty
partition being ().  They index ramification profiles, conjugacy classes of
the symmetric group, and Schur functions throughout the engine.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial

Partition = tuple[int, ...]


def check_partition(parts) -> Partition:
    p = tuple(int(x) for x in parts)
    if any(x <= 0 for x in p):
        raise ValueError(f"partition parts must be positive: {p}")
    if any(p[i] < p[i + 1] for i in range(len(p) - 1)):
        raise ValueError(f"parts must be weakly decreasing: {p}")
    return p


def weight(mu: Partition) -> int:
    return sum(mu)


def length(mu: Partition) -> int:
    return len(mu)


def colength(mu: Partition) -> int:
    """|mu| - l(mu), the contribution of mu to the Riemann-Hurwitz count."""
    return sum(mu) - len(mu)


def multiplicities(mu: Partition) -> dict[int, int]:
    m: dict[int, int] = {}
    for part in mu:
        m[part] = m.get(part, 0) + 1
    return m


def aut_size(mu: Partition) -> int:
    """|aut(mu)| = prod over part values of (multiplicity!)."""
    out = 1
    for m in multiplicities(mu).values():
        out *= factorial(m)
    return out


def z_mu(mu: Partition) -> int:
    """Centralizer order prod i^{m_i} m_i! of the cycle type mu."""
    out = 1
    for i, m in multiplicities(mu).items():
        out *= i ** m * factorial(m)
    return out


def class_size(mu: Partition) -> int:
    """Size of the conjugacy class of cycle type mu in S_{|mu|}."""
    return factorial(sum(mu)) // z_mu(mu)


def conjugate(mu: Partition) -> Partition:
    if not mu:
        return ()
    out = []
    for i in range(1, mu[0] + 1):
        out.append(sum(1 for p in mu if p >= i))
    return tuple(out)


def partitions_of(n: int, max_len: int | None = None, max_part: int | None = None):
    """All partitions of n, optionally bounded, in lexicographically
    decreasing order of part tuples (deterministic)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    result: list[Partition] = []

    def rec(remaining: int, largest: int, acc: list[int]):
        if remaining == 0:
            result.append(tuple(acc))
            return
        if max_len is not None and len(acc) >= max_len:
            return
        for part in range(min(remaining, largest), 0, -1):
            acc.append(part)
            rec(remaining - part, part, acc)
            acc.pop()

    top = n if max_part is None else min(n, max_part)
    rec(n, max(top, 0) if n else 0, [])
    if n == 0:
        result = [()]
    return result


def hook_partitions(n: int):
    """Hook partitions (a | b) of weight n = a + b + 1, as (a, b) pairs."""
    return [(a, n - 1 - a) for a in range(n)] if n >= 1 else []


def hook_to_partition(a: int, b: int) -> Partition:
    return (a + 1,) + (1,) * b


def is_hook(mu: Partition) -> tuple[int, int] | None:
    """Return Frobenius coordinates (a, b) if mu is a hook, else None."""
    if not mu:
        return None
    if all(p == 1 for p in mu[1:]):
        return (mu[0] - 1, len(mu) - 1)
    return None


def serialize(mu: Partition) -> list[int]:
    return list(mu)

"""Exact binomial coefficients and lexicographic (un)ranking of k-combinations.

A group of k distinct items out of a universe of n is held as a strictly
increasing tuple of dense indices in 1..n.  ``rank_group`` maps such a tuple
to its 1-based position h in the lexicographic enumeration of all C(n, k)
k-combinations, and ``unrank_group`` inverts the mapping.  Ranks are plain
Python ints and routinely exceed 64 bits (C(700, 10) is a 22-digit number),
so nothing here assumes a fixed word size.

All functions are pure; the only shared state is a read-mostly memo table
behind ``binomial``, which is safe to hit from any number of threads.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from typing import Iterator, Sequence, Tuple

from .errors import InvalidCombinationError, InvalidSizeError, RankOutOfRangeError

Combination = Tuple[int, ...]


@lru_cache(maxsize=None, typed=True)
def binomial(n: int, k: int) -> int:
    """Return C(n, k) exactly: 0 when k > n, 1 when k = 0.

    Multiplicative evaluation with exact division, O(min(k, n-k)) big-int
    steps, so no O(n^2) table is ever materialized.
    """
    if not isinstance(n, int) or not isinstance(k, int):
        raise TypeError(f"binomial expects integers, got {n!r}, {k!r}")
    if n < 0 or k < 0:
        raise ValueError(f"binomial is defined for non-negative arguments, got ({n}, {k})")
    if k > n:
        return 0
    k = min(k, n - k)
    value = 1
    for i in range(1, k + 1):
        # after step i, value == C(n-k+i, i), so the floor division is exact
        value = value * (n - k + i) // i
    return value


def _checked_combination(indices: Sequence[int], n: int) -> Combination:
    if n < 1:
        raise InvalidSizeError(f"universe size must be at least 1, got {n}")
    combo = tuple(indices)
    if not combo:
        raise InvalidCombinationError("empty group has no rank")
    if len(combo) > n:
        raise InvalidCombinationError(
            f"group of {len(combo)} items cannot come from a universe of {n}")
    prev = 0
    for idx in combo:
        if not isinstance(idx, int):
            raise InvalidCombinationError(f"index {idx!r} is not an integer")
        if not 1 <= idx <= n:
            raise InvalidCombinationError(f"index {idx} outside 1..{n}")
        if idx <= prev:
            raise InvalidCombinationError(
                f"indices must be strictly increasing, got {idx} after {prev}")
        prev = idx
    return combo


def rank_group(indices: Sequence[int], n: int) -> int:
    """1-based lexicographic rank of a combination among all C(n, k) of its size.

    rank_group((1, 2, ..., k), n) == 1 and
    rank_group((n-k+1, ..., n), n) == C(n, k).
    """
    combo = _checked_combination(indices, n)
    k = len(combo)
    later = 0  # combinations strictly after combo in lexicographic order
    for pos, c in enumerate(combo, start=1):
        later += binomial(n - c, k - pos + 1)
    return binomial(n, k) - later


def unrank_group(h: int, k: int, n: int) -> Combination:
    """The unique combination c with rank_group(c, n) == h, |c| == k.

    Recovers the descending digits of C(n, k) - h in the degree-k
    combinatorial number system (greedy, binary-searched) and reflects each
    digit m back to the index n - m.
    """
    if n < 1:
        raise InvalidSizeError(f"universe size must be at least 1, got {n}")
    if not isinstance(k, int) or not 1 <= k <= n:
        raise InvalidSizeError(f"group size must satisfy 1 <= k <= {n}, got {k!r}")
    total = binomial(n, k)
    if not isinstance(h, int) or not 1 <= h <= total:
        raise RankOutOfRangeError(
            f"rank {h!r} outside [1, {total}] for k={k}, n={n}")
    remaining = total - h
    combo = []
    hi = n - 1  # digits are strictly decreasing, each below the previous
    for j in range(k, 0, -1):
        lo, up = j - 1, hi  # C(j-1, j) == 0 <= remaining, so lo is always feasible
        while lo < up:
            mid = (lo + up + 1) // 2
            if binomial(mid, j) <= remaining:
                lo = mid
            else:
                up = mid - 1
        combo.append(n - lo)
        remaining -= binomial(lo, j)
        hi = lo - 1
    assert remaining == 0
    return tuple(combo)


def enumerate_combinations(n: int, k: int) -> Iterator[Combination]:
    """All C(n, k) combinations of {1..n} in lexicographic order.

    Reference enumeration for small n; rank_group/unrank_group never call it.
    """
    if n < 1:
        raise InvalidSizeError(f"universe size must be at least 1, got {n}")
    if not isinstance(k, int) or not 1 <= k <= n:
        raise InvalidSizeError(f"group size must satisfy 1 <= k <= {n}, got {k!r}")
    return iter(combinations(range(1, n + 1), k))

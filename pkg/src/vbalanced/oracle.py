"""Exact counts and exhaustive enumerations of balanced words and necklaces.

This module is the independent reference for every statistical check.  It
uses exact integer arithmetic (factorials, gcd-based totients) and shares
no code with the floating-point series layer.
"""
from __future__ import annotations

import math
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainError
from .gfseries import as_balance

ENUMERATION_LIMIT = 20


def _totient_by_gcd(n: int) -> int:
    return sum(1 for i in range(1, n + 1) if math.gcd(i, n) == 1)


def count_sequences(v, p: int) -> int:
    """Number of v-balanced words of length ``|v| p``: ``(|v|p)! / prod (v_i p)!``."""
    v = as_balance(v)
    if p < 0:
        raise DomainError(f"repetition index must be non-negative, got {p}")
    result = math.factorial(v.weight * p)
    for vi in v.parts:
        result //= math.factorial(vi * p)
    return result


def count_necklaces(v, p: int) -> int:
    """Number of v-balanced necklaces with ``|v| p`` beads."""
    v = as_balance(v)
    if p < 1:
        raise DomainError(f"necklaces need p >= 1, got {p}")
    total = sum(_totient_by_gcd(d) * count_sequences(v, p // d) for d in range(1, p + 1) if p % d == 0)
    n = v.weight * p
    if total % n:
        raise ArithmeticError("necklace count is not integral")
    return total // n


def _multiset_permutations(counts: list[int]) -> Iterator[list[int]]:
    n = sum(counts)
    word = [0] * n

    def rec(pos):
        if pos == n:
            yield list(word)
            return
        for c, left in enumerate(counts):
            if left:
                counts[c] -= 1
                word[pos] = c
                yield from rec(pos + 1)
                counts[c] += 1

    yield from rec(0)


def balanced_words(v, p: int) -> Iterator[tuple[int, ...]]:
    """All words with exactly ``v_i p`` letters of color ``i``, in lexicographic order."""
    v = as_balance(v)
    for w in _multiset_permutations([vi * p for vi in v.parts]):
        yield tuple(w)


def enumerate_necklaces(v, p: int) -> list[tuple[int, ...]]:
    """Canonical representatives of all v-balanced necklaces of size ``|v| p``, sorted."""
    v = as_balance(v)
    if p < 1:
        raise DomainError(f"necklaces need p >= 1, got {p}")
    if v.weight * p > ENUMERATION_LIMIT:
        raise DomainError(f"enumeration refused above {ENUMERATION_LIMIT} beads (asked {v.weight * p})")
    return sorted({canonical_rotation(w) for w in balanced_words(v, p)})


def least_rotation(w: Sequence) -> int:
    """Start index of the lexicographically least rotation (Booth's algorithm)."""
    n = len(w)
    if n == 0:
        raise DomainError("canonical rotation of an empty word")
    s = list(w) * 2
    f = [-1] * (2 * n)
    k = 0
    for j in range(1, 2 * n):
        sj = s[j]
        i = f[j - k - 1]
        while i != -1 and sj != s[k + i + 1]:
            if sj < s[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != s[k + i + 1]:
            # here i == -1
            if sj < s[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k


def canonical_rotation(w: Sequence) -> tuple:
    """The lexicographically least rotation of ``w``, as a tuple."""
    w = [int(c) for c in w] if not isinstance(w, (list, tuple, str)) else w
    k = least_rotation(w)
    w = tuple(w)
    return w[k:] + w[:k]


def primitive_root(w: Sequence) -> tuple[tuple, int]:
    """Shortest ``u`` and largest ``p`` with ``w = u^p``."""
    w = tuple(w)
    n = len(w)
    if n == 0:
        raise DomainError("primitive root of an empty word")
    # prefix function
    pi = [0] * n
    for i in range(1, n):
        j = pi[i - 1]
        while j and w[i] != w[j]:
            j = pi[j - 1]
        if w[i] == w[j]:
            j += 1
        pi[i] = j
    period = n - pi[-1]
    if n % period:
        period = n
    return w[:period], n // period


def color_counts(w: Sequence[int], k: int) -> list[int]:
    counts = [0] * k
    for c in w:
        counts[c] += 1
    return counts


def is_balanced(w: Sequence[int], v, *, allow_empty: bool = False) -> bool:
    """Whether the color counts of ``w`` are a positive multiple of ``v``.

    ``allow_empty`` admits the empty word (multiple 0), as sequences do.
    """
    v = as_balance(v)
    if len(w) == 0:
        return allow_empty
    if isinstance(w, np.ndarray):
        if int(w.min()) < 0 or int(w.max()) >= v.k:
            return False
        counts = np.bincount(w, minlength=v.k).tolist()
    else:
        if any(not (0 <= int(c) < v.k) for c in w):
            return False
        counts = color_counts([int(c) for c in w], v.k)
    p = v.repetition_index(counts)
    return p is not None and p >= 1

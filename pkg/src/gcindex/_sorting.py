"""Lexicographic sorting of many substrings of one text.

Each substring is a prefix of some suffix, so two of them compare by the
longest common prefix of their suffixes: if it covers the shorter one the
shorter sorts first, otherwise suffix-array rank decides. Build cost is a
prefix-doubling suffix array, Kasai LCP and a sparse table for range
minima; each comparison is then O(1).
"""

from __future__ import annotations

from functools import cmp_to_key
from typing import Sequence

import numpy as np


def suffix_array(text: bytes) -> np.ndarray:
    n = len(text)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    rank = np.frombuffer(text, dtype=np.uint8).astype(np.int64)
    k = 1
    while True:
        second = np.full(n, -1, dtype=np.int64)
        if k < n:
            second[: n - k] = rank[k:]
        sa = np.lexsort((second, rank))
        r1, r2 = rank[sa], second[sa]
        step = np.empty(n, dtype=np.int64)
        step[0] = 0
        step[1:] = (r1[1:] != r1[:-1]) | (r2[1:] != r2[:-1])
        new_rank = np.empty(n, dtype=np.int64)
        new_rank[sa] = np.cumsum(step)
        rank = new_rank
        if rank[sa[-1]] == n - 1:
            return sa
        k <<= 1


def lcp_array(text: bytes, sa: np.ndarray, rank: Sequence[int]) -> list[int]:
    """``lcp[r]`` = common prefix of suffixes ranked ``r - 1`` and ``r`` (``lcp[0] = 0``)."""
    n = len(text)
    sa_list = sa.tolist()
    lcp = [0] * n
    h = 0
    for i in range(n):
        r = rank[i]
        if r == 0:
            h = 0
            continue
        j = sa_list[r - 1]
        while i + h < n and j + h < n and text[i + h] == text[j + h]:
            h += 1
        lcp[r] = h
        if h:
            h -= 1
    return lcp


class SubstringSorter:
    """Compares ``(start, length)`` substrings of ``text`` (0-based starts)."""

    def __init__(self, text: bytes):
        self.text = text
        sa = suffix_array(text)
        rank = np.empty(len(text), dtype=np.int64)
        rank[sa] = np.arange(len(text))
        self._rank = rank.tolist()
        lcp = np.asarray(lcp_array(text, sa, self._rank), dtype=np.int64)
        table = [lcp]
        span = 1
        while 2 * span <= len(lcp):
            prev = table[-1]
            table.append(np.minimum(prev[:-span], prev[span:]))
            span <<= 1
        self._table = [t.tolist() for t in table]

    def lcp(self, i: int, j: int) -> int:
        """Longest common prefix of suffixes starting at ``i`` and ``j``."""
        if i == j:
            return len(self.text) - i
        a, b = self._rank[i], self._rank[j]
        if a > b:
            a, b = b, a
        a += 1
        k = (b - a + 1).bit_length() - 1
        row = self._table[k]
        x, y = row[a], row[b - (1 << k) + 1]
        return x if x < y else y

    def compare(self, s1: int, l1: int, s2: int, l2: int) -> int:
        common = self.lcp(s1, s2)
        if common >= min(l1, l2):
            return (l1 > l2) - (l1 < l2)
        return -1 if self._rank[s1] < self._rank[s2] else 1

    def sort(self, items: Sequence[tuple[int, int]], ties: Sequence | None = None) -> list[int]:
        """Indices of ``items`` in sorted order; equal substrings keep ``ties`` order."""
        ties = list(range(len(items))) if ties is None else list(ties)

        def cmp(x: int, y: int) -> int:
            (s1, l1), (s2, l2) = items[x], items[y]
            c = self.compare(s1, l1, s2, l2)
            if c:
                return c
            return (ties[x] > ties[y]) - (ties[x] < ties[y])

        return sorted(range(len(items)), key=cmp_to_key(cmp))


def sort_substrings_naive(text: bytes, items: Sequence[tuple[int, int]], ties: Sequence | None = None) -> list[int]:
    ties = list(range(len(items))) if ties is None else list(ties)
    return sorted(range(len(items)), key=lambda k: (text[items[k][0]: items[k][0] + items[k][1]], ties[k]))

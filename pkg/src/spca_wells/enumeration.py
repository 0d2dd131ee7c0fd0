"""Exhaustive enumeration of k'-sparse supports, grouped by overlap with the signal.

Energies are computed in blocks: a support with overlap ``m`` is a pair
``(a, b)`` with ``a`` an m-subset of the signal and ``b`` a (k'-m)-subset of its
complement, and ``v^T y v = S(a) + S(b) + 2 * cross(a, b)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import EnumerationTooLargeError, InvalidParameterError

DEFAULT_BUDGET = 10**8
_BLOCK = 1 << 15


def check_budget(n: int, k_prime: int, budget: int | None = DEFAULT_BUDGET) -> int:
    if not 0 <= k_prime <= n:
        raise InvalidParameterError(f"sparsity {k_prime} not in [0, {n}]")
    count = math.comb(n, k_prime)
    if budget is not None and count > budget:
        raise EnumerationTooLargeError(count, budget)
    return count


def enumerate_supports(n: int, k_prime: int, budget: int | None = DEFAULT_BUDGET) -> Iterator[tuple]:
    """Every k'-subset of ``[0, n)`` exactly once, in lexicographic order."""
    check_budget(n, k_prime, budget)
    return itertools.combinations(range(n), k_prime)


def overlap_range(n: int, k: int, k_prime: int) -> range:
    """Overlap values realized by at least one k'-support."""
    return range(max(0, k_prime - (n - k)), min(k, k_prime) + 1)


def combination_blocks(pool, r: int, size: int) -> Iterator[np.ndarray]:
    """Lexicographic r-combinations of ``pool`` as ``(rows, r)`` int arrays."""
    it = itertools.combinations(pool, r)
    while True:
        chunk = list(itertools.islice(it, size))
        if not chunk:
            return
        yield np.array(chunk, dtype=np.intp).reshape(len(chunk), r)


def _pair_sums(y: np.ndarray, block: np.ndarray) -> np.ndarray:
    """Row-wise ``sum_{i,j in row} y[i, j]``."""
    out = np.zeros(block.shape[0])
    r = block.shape[1]
    for p in range(r):
        out += y[block[:, p], block[:, p]]
        for q in range(p + 1, r):
            out += 2.0 * y[block[:, p], block[:, q]]
    return out


@dataclass
class EnergyBlock:
    """Energies of all supports ``a ∪ b`` for ``a`` in ``xa`` and ``b`` in ``cb``.

    ``energy`` is flattened with ``a`` as the slow index.
    """

    overlap: int
    xa: np.ndarray
    cb: np.ndarray
    energy: np.ndarray

    def support(self, p: int) -> tuple:
        nb = self.cb.shape[0]
        return tuple(sorted(self.xa[p // nb].tolist() + self.cb[p % nb].tolist()))

    def supports(self) -> np.ndarray:
        """All supports of the block as a sorted ``(rows, k')`` array."""
        na, nb = self.xa.shape[0], self.cb.shape[0]
        full = np.concatenate([np.repeat(self.xa, nb, axis=0), np.tile(self.cb, (na, 1))], axis=1)
        full.sort(axis=1)
        return full


def class_blocks(y: np.ndarray, x, k_prime: int, m: int, block: int = _BLOCK) -> Iterator[EnergyBlock]:
    """Energy blocks covering every support with overlap exactly ``m`` with ``x``.

    Order is deterministic: signal-side chunks outermost, then complement chunks.
    """
    n = y.shape[0]
    x = list(x)
    xs = set(x)
    comp = [i for i in range(n) if i not in xs]
    r = k_prime - m
    if m < 0 or r < 0 or m > len(x) or r > len(comp):
        return
    nb_total = math.comb(len(comp), r)
    nb = max(1, min(nb_total, block))
    na = max(1, min(block // nb, (1 << 22) // (max(m, 1) * n)))
    for xa in combination_blocks(x, m, na):
        s_a = _pair_sums(y, xa)
        rows_a = y[xa].sum(axis=1) if m else np.zeros((xa.shape[0], n))
        for cb in combination_blocks(comp, r, nb):
            s_b = _pair_sums(y, cb)
            cross = rows_a[:, cb].sum(axis=2) if r else np.zeros((xa.shape[0], 1))
            vyv = s_a[:, None] + s_b[None, :] + 2.0 * cross
            yield EnergyBlock(m, xa, cb, -vyv.reshape(-1))


class LogSumExp:
    """Streaming log-sum-exp with a running maximum."""

    def __init__(self):
        self.max = -math.inf
        self.scaled = 0.0

    def add(self, values) -> None:
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return
        mx = float(values.max())
        if mx == -math.inf:
            return
        if mx > self.max:
            self.scaled = self.scaled * math.exp(self.max - mx) if self.max > -math.inf else 0.0
            self.max = mx
        self.scaled += float(np.exp(values - self.max).sum())

    def merge(self, other: "LogSumExp") -> None:
        if other.max > -math.inf:
            self.add([other.max + math.log(other.scaled)])

    @property
    def value(self) -> float:
        if self.max == -math.inf:
            return -math.inf
        return self.max + math.log(self.scaled)


def logsumexp(values) -> float:
    acc = LogSumExp()
    acc.add(values)
    return acc.value

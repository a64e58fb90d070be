"""Higher-order chain rule: multi-index sets, exact coefficients, synthesis.

The index set J_n holds every alpha = (alpha_1, ..., alpha_n) of non-negative
integers with weighted degree sum(k * alpha_k) = n; J_0 is empty by
convention.  Each alpha contributes

    c(alpha, n) * f^(|alpha|)(g(x)) * prod_j (g^(j)(x))^alpha_j

to d^n/dx^n f(g(x)), with c(alpha, n) = n! / prod_j (alpha_j! (j!)^alpha_j).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Sequence

__all__ = [
    "MultiIndex",
    "multi_indices",
    "faa_coefficient",
    "composite_derivs",
    "bell_numbers",
]


@dataclass(frozen=True)
class MultiIndex:
    entries: tuple[int, ...]

    def __post_init__(self):
        if any(a < 0 for a in self.entries):
            raise ValueError(f"negative entry in multi-index {self.entries}")

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def size(self) -> int:
        """|alpha|, the number of inner-derivative factors."""
        return sum(self.entries)

    @property
    def weight(self) -> int:
        """||alpha||_n = sum k * alpha_k."""
        return sum(k * a for k, a in enumerate(self.entries, start=1))

    @property
    def odd(self) -> int:
        return sum(self.entries[0::2])

    @property
    def even(self) -> int:
        return sum(self.entries[1::2])

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]


def _partitions(n: int, largest: int) -> list[list[int]]:
    # partitions of n into parts <= largest, parts in non-increasing order
    if n == 0:
        return [[]]
    out = []
    for part in range(min(n, largest), 0, -1):
        for rest in _partitions(n - part, part):
            out.append([part] + rest)
    return out


@lru_cache(maxsize=None)
def multi_indices(n: int) -> tuple[MultiIndex, ...]:
    """Enumerate J_n in lexicographically descending order of entries."""
    if n < 0:
        raise ValueError("order must be non-negative")
    if n == 0:
        return ()
    found = []
    for parts in _partitions(n, n):
        counts = [0] * n
        for p in parts:
            counts[p - 1] += 1
        found.append(tuple(counts))
    found.sort(reverse=True)
    return tuple(MultiIndex(c) for c in found)


@lru_cache(maxsize=None)
def faa_coefficient(alpha: MultiIndex, n: int) -> int:
    """Exact integer value of n! / prod_j (alpha_j! (j!)^alpha_j)."""
    if alpha.n != n or alpha.weight != n:
        raise ValueError(f"{alpha.entries} is not in J_{n}")
    den = 1
    for j, a in enumerate(alpha.entries, start=1):
        den *= factorial(a) * factorial(j) ** a
    num = factorial(n)
    if num % den:
        raise ArithmeticError("non-integral chain-rule coefficient")
    return num // den


@lru_cache(maxsize=None)
def _terms(n: int) -> tuple[tuple[int, int, tuple[tuple[int, int], ...]], ...]:
    # (float coefficient, |alpha|, ((j, alpha_j), ...) with alpha_j > 0)
    out = []
    for alpha in multi_indices(n):
        nz = tuple((j, a) for j, a in enumerate(alpha.entries, start=1) if a)
        out.append((float(faa_coefficient(alpha, n)), alpha.size, nz))
    return tuple(out)


def composite_derivs(outer: Sequence, inner: Sequence, n: int) -> list:
    """Derivatives 0..n of f(g(x)) from those of f (at g(x)) and of g.

    Parameters
    ----------
    outer : sequence
        f^(0)(g(x)), ..., f^(n)(g(x)); entries may be scalars or arrays
        (real or complex) that broadcast together.
    inner : sequence
        g'(x), ..., g^(n)(x).
    n : int
        Highest order wanted.

    Returns
    -------
    list
        d^k/dx^k f(g(x)) for k = 0..n.
    """
    if len(outer) < n + 1 or len(inner) < n:
        raise ValueError(
            f"need {n + 1} outer and {n} inner derivatives, "
            f"got {len(outer)} and {len(inner)}"
        )
    # powers[j][a] = (g^(j))^a, built lazily
    powers: dict[tuple[int, int], object] = {}

    def power(j, a):
        key = (j, a)
        if key not in powers:
            powers[key] = inner[j - 1] if a == 1 else power(j, a - 1) * inner[j - 1]
        return powers[key]

    result = [outer[0]]
    for k in range(1, n + 1):
        acc = 0
        for coef, size, nz in _terms(k):
            prod = outer[size]
            for j, a in nz:
                prod = prod * power(j, a)
            acc = acc + coef * prod
        result.append(acc)
    return result


def bell_numbers(n_max: int) -> list[int]:
    """B_0..B_n_max from the Bell triangle; independent of J_n."""
    row = [1]
    out = [1]
    for _ in range(n_max):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
        out.append(row[0])
    return out

"""Finite-difference oracles used by the property suites and tests."""

from __future__ import annotations

from math import comb
from typing import Callable

import numpy as np

__all__ = ["central_difference", "richardson_derivative", "mixed_derivative"]


def central_difference(f: Callable[[float], float], x: float, n: int, h: float) -> float:
    """n-th derivative by the centred stencil sum_k (-1)^k C(n,k) f(x + (n/2 - k) h) / h^n."""
    acc = 0.0
    for k in range(n + 1):
        acc += (-1) ** k * comb(n, k) * f(x + (n / 2.0 - k) * h)
    return acc / h**n


def richardson_derivative(
    f: Callable[[float], float], x: float, n: int, h: float = 0.05, levels: int = 3
) -> float:
    """Central difference of order n, Richardson-extrapolated in h^2 (step halved each level)."""
    if n == 0:
        return f(x)
    table = [central_difference(f, x, n, h / 2**i) for i in range(levels)]
    for lev in range(1, levels):
        fac = 4.0**lev
        table = [(fac * table[i + 1] - table[i]) / (fac - 1.0) for i in range(len(table) - 1)]
    return table[0]


def mixed_derivative(
    f: Callable[[float, float], float],
    x: float,
    y: float,
    nx: int,
    ny: int,
    h: float = 0.05,
    levels: int = 3,
) -> float:
    """d^{nx}/dx^{nx} d^{ny}/dy^{ny} f by a tensor-product centred stencil with Richardson."""

    def stencil(hh):
        acc = 0.0
        for i in range(nx + 1):
            ci = (-1) ** i * comb(nx, i)
            for j in range(ny + 1):
                cj = (-1) ** j * comb(ny, j)
                acc += ci * cj * f(x + (nx / 2.0 - i) * hh, y + (ny / 2.0 - j) * hh)
        return acc / hh ** (nx + ny)

    table = [stencil(h / 2**i) for i in range(levels)]
    for lev in range(1, levels):
        fac = 4.0**lev
        table = [(fac * table[i + 1] - table[i]) / (fac - 1.0) for i in range(len(table) - 1)]
    return table[0]

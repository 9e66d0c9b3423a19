"""Small numerical helpers shared across modules."""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable
from fractions import Fraction

import numpy as np

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def all_exact(xs: Iterable) -> bool:
    return all(is_exact(x) for x in xs)


def log_sum_exp(logs: Iterable[float]) -> float:
    """Compensated log-domain sum of ``exp(l)`` over ``logs``."""
    logs = list(logs)
    if not logs:
        return -math.inf
    top = max(logs)
    if math.isinf(top):
        return top
    return top + math.log(math.fsum(math.exp(v - top) for v in logs))


def log_factorial(n: int) -> float:
    return math.lgamma(n + 1.0)


def kruglov_weight(n: int) -> float:
    """Measure of the n-th block, ``1/(e n!)``, evaluated in log-domain."""
    return math.exp(-1.0 - log_factorial(n))


def poisson_tail(n_max: int) -> float:
    """``sum_{n > n_max} 1/(e n!)``, summed directly (no cancellation)."""
    terms = []
    n = n_max + 1
    while True:
        t = kruglov_weight(n)
        terms.append(t)
        if t == 0.0 or t < 1e-20 * terms[0]:
            break
        n += 1
    return math.fsum(terms)


def golden_max(fn: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10,
               max_iter: int = 500) -> tuple[float, float]:
    """Golden-section maximisation of a unimodal ``fn`` on ``[lo, hi]``.

    Returns ``(argmax, max)``. The bracket shrinks until its width is below
    ``tol * max(1, |hi|)``.
    """
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fn(d)
    best = max(((c, fc), (d, fd), (a, fn(a)), (b, fn(b))), key=lambda z: z[1])
    return best


def sup_grid_refine(fn: Callable[[float], float], lo: float, hi: float,
                    n_grid: int = 512, tol: float = 1e-10) -> tuple[float, float]:
    """Supremum of ``fn`` over ``[lo, hi]`` (``0 < lo < hi``).

    Coarse log-spaced grid, then golden-section inside the two cells around
    the best grid point. Deterministic for a given ``(lo, hi, n_grid, tol)``.
    """
    grid = np.geomspace(lo, hi, n_grid)
    grid[-1] = hi
    vals = [fn(float(u)) for u in grid]
    i = int(np.argmax(vals))
    best = (float(grid[i]), vals[i])
    a = float(grid[max(i - 1, 0)])
    b = float(grid[min(i + 1, n_grid - 1)])
    if b > a:
        cand = golden_max(fn, a, b, tol=tol)
        if cand[1] > best[1]:
            best = cand
    return best


def philox(seed: int, stream=0) -> np.random.Generator:
    """Counter-based generator; ``stream`` (int or tuple) selects an independent substream."""
    key = stream if isinstance(stream, tuple) else (stream,)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))

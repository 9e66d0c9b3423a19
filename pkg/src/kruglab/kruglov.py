"""The Kruglov operator realised on laws.

``K`` sends the law of ``f`` to the compound-Poisson law

    (1/e) delta_0 + sum_{n >= 1} (1 / (e n!)) * f^{*n},

the law of a Poisson(1)-indexed random sum of independent copies of ``f``.
The series is cut at ``n_max`` and the dropped Poisson tail is carried as the
law's deficit, so norms computed from the result are lower bounds (deficit at
0) or, with :func:`~kruglab.dist.quantile_step` ``deficit_at="max"``, the
matching upper-mode values.
"""

from __future__ import annotations

import cmath
from collections.abc import Iterable
from dataclasses import dataclass
from fractions import Fraction
import math

from ._numeric import kruglov_weight, poisson_tail
from .dist import (
    DiscreteDistribution,
    charfn,
    convolve,
    delta,
    mixture,
    quantile_step,
    step_to_dist,
)
from .stepfn import StepFunction

__all__ = [
    "KruglovConfig",
    "transform",
    "apply_to_step",
    "finite_poissonization",
    "charfn_identity_residual",
    "indicator_top_mass",
]

N_MAX_LIMIT = 170


@dataclass(frozen=True)
class KruglovConfig:
    """Series truncation for :func:`transform`.

    ``n_max`` is raised automatically until the dropped mass
    ``sum_{n > n_max} 1/(e n!)`` is at most ``tail_tol``.
    """

    n_max: int | None = None
    tail_tol: float = 1e-12
    prune_tol: float = 1e-15

    def __post_init__(self):
        if not self.tail_tol > 0:
            raise ValueError("tail_tol must be positive")
        if self.prune_tol < 0:
            raise ValueError("prune_tol must be nonnegative")
        n = 1 if self.n_max is None else int(self.n_max)
        if not 1 <= n <= N_MAX_LIMIT:
            raise ValueError(f"n_max must be an integer in [1, {N_MAX_LIMIT}]")
        while poisson_tail(n) > self.tail_tol:
            n += 1
            if n > N_MAX_LIMIT:
                raise ValueError(f"tail_tol={self.tail_tol} needs n_max > {N_MAX_LIMIT}")
        object.__setattr__(self, "n_max", n)

    @property
    def dropped_mass(self) -> float:
        return poisson_tail(self.n_max)


DEFAULT_CONFIG = KruglovConfig()


def transform(d: DiscreteDistribution, cfg: KruglovConfig = DEFAULT_CONFIG) -> DiscreteDistribution:
    """Law of ``K f`` for ``f ~ d``, truncated after ``cfg.n_max`` convolution powers."""
    if d.deficit > 0:
        raise ValueError("transform needs a complete law (deficit 0)")
    parts = [(kruglov_weight(0), delta(0))]
    power = delta(0)
    for n in range(1, cfg.n_max + 1):
        power = convolve(power, d)
        parts.append((kruglov_weight(n), power))
    mixed = mixture(parts)
    # the mixture's deficit is 1 - sum of weights; replace it by the directly summed tail
    out = DiscreteDistribution(mixed.atoms, cfg.dropped_mass)
    return out.pruned(cfg.prune_tol)


def apply_to_step(f: StepFunction, cfg: KruglovConfig = DEFAULT_CONFIG,
                  deficit_at: str = "zero") -> StepFunction:
    """``(K f)*`` for a step function supported in ``[0, 1]``."""
    if f.length > 1 * (1 + 1e-12):
        raise ValueError("K acts on functions supported in [0, 1]")
    return quantile_step(transform(step_to_dist(f), cfg), deficit_at=deficit_at)


def finite_poissonization(d: DiscreteDistribution, n: int) -> DiscreteDistribution:
    """Law of ``H_n``: sum of ``n`` independent copies of ``(1 - 1/n) delta_0 + (1/n) d``.

    Evaluated as the binomial mixture ``sum_k C(n,k) n^-k (1-1/n)^(n-k) d^{*k}``.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    r = Fraction(1, n) if d.exact else 1.0 / n
    parts = []
    power = delta(0)
    for k in range(n + 1):
        if k:
            power = convolve(power, d)
        parts.append((math.comb(n, k) * r ** k * (1 - r) ** (n - k), power))
    return mixture(parts)


def charfn_identity_residual(d: DiscreteDistribution, t_grid: Iterable[float],
                             cfg: KruglovConfig = DEFAULT_CONFIG) -> float:
    """``max_t |phi_{Kf}(t) - exp(phi_f(t) - 1)|`` over ``t_grid``."""
    kd = transform(d, cfg)
    return max((abs(charfn(kd, t) - cmath.exp(charfn(d, t) - 1)) for t in t_grid), default=0.0)


def indicator_top_mass(p: float) -> float:
    """``P(K(a chi_A) = a)`` for ``a > 0`` and ``lambda(A) = p``.

    Exactly one of the Poisson(1) copies must land in ``A``, so the value is
    ``p e^{-p}``; this is ``p/e`` only at ``p = 1`` and at least ``p/e`` below it.
    """
    return p * math.exp(-p)

"""Finite atomic probability laws.

A :class:`DiscreteDistribution` stores atoms ``(value, mass)`` sorted by value
plus a ``deficit``: probability mass deliberately dropped by series truncation
or pruning. Deficit is tracked, never renormalised away; wherever a law is
turned into a function it is counted as mass at 0.

Two numeric backends share the code: floats (default) and exact rationals,
selected implicitly by the types of the atoms. Exact laws merge equal values
exactly; float laws merge values closer than ``1e-12`` relative to the largest
magnitude in the law.
"""

from __future__ import annotations

import json
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._numeric import all_exact, is_exact, philox
from .stepfn import StepFunction

__all__ = [
    "DiscreteDistribution",
    "delta",
    "bernoulli",
    "symmetric_two_point",
    "binomial",
    "poisson",
    "convolve",
    "convolve_power",
    "mixture",
    "quantile_step",
    "step_to_dist",
    "charfn",
    "kolmogorov_distance",
    "sample",
]

MASS_TOL = 1e-9
MERGE_RTOL = 1e-12
LATTICE_SPAN = 200_000


@dataclass(frozen=True)
class DiscreteDistribution:
    atoms: tuple[tuple, ...]
    deficit: float = 0

    def __post_init__(self):
        acc: dict = {}
        for value, mass in self.atoms:
            if mass < 0:
                raise ValueError(f"negative mass {mass!r} at {value!r}")
            if not math.isfinite(value):
                raise ValueError(f"atom value must be finite, got {value!r}")
            if mass > 0:
                acc[value] = acc.get(value, 0) + mass
        if self.deficit < 0:
            raise ValueError("deficit must be nonnegative")
        atoms = tuple(sorted(acc.items()))
        object.__setattr__(self, "atoms", atoms)
        total = sum((m for _, m in atoms), 0) + self.deficit
        if abs(total - 1) > MASS_TOL:
            raise ValueError(f"total mass plus deficit is {float(total)!r}, expected 1")

    # -- views --------------------------------------------------------------

    @property
    def values(self) -> tuple:
        return tuple(v for v, _ in self.atoms)

    @property
    def masses(self) -> tuple:
        return tuple(m for _, m in self.atoms)

    @property
    def exact(self) -> bool:
        return all_exact(self.values) and all_exact(self.masses) and is_exact(self.deficit)

    def __len__(self) -> int:
        return len(self.atoms)

    def mass_at(self, value):
        return dict(self.atoms).get(value, 0)

    def mean(self):
        return sum((v * m for v, m in self.atoms), 0)

    def moment(self, p: float, absolute: bool = True) -> float:
        if absolute:
            return math.fsum(abs(float(v)) ** p * float(m) for v, m in self.atoms)
        return math.fsum(float(v) ** p * float(m) for v, m in self.atoms)

    def prob_nonzero(self):
        return sum((m for v, m in self.atoms if v != 0), 0)

    def max_abs(self):
        return max((abs(v) for v in self.values), default=0)

    def cdf(self, x):
        """``P(X <= x)``, deficit counted at 0."""
        out = sum((m for v, m in self.atoms if v <= x), 0)
        return out + self.deficit if x >= 0 else out

    def tail_ge(self, x):
        """``P(X >= x)``, deficit counted at 0."""
        out = sum((m for v, m in self.atoms if v >= x), 0)
        return out + self.deficit if x <= 0 else out

    def tail_gt(self, x):
        out = sum((m for v, m in self.atoms if v > x), 0)
        return out + self.deficit if x < 0 else out

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        table = dict(self.atoms)
        if self.exact:
            return all(table.get(-v, 0) == m for v, m in self.atoms)
        scale = max(1.0, float(self.max_abs()))
        neg = sorted(((-float(v), float(m)) for v, m in self.atoms))
        pos = sorted(((float(v), float(m)) for v, m in self.atoms))
        return all(abs(a[0] - b[0]) <= tol * scale and abs(a[1] - b[1]) <= tol
                   for a, b in zip(neg, pos))

    def map_values(self, fn) -> DiscreteDistribution:
        """Law of ``fn(X)``. The deficit stays a deficit (its value is unknown)."""
        return _from_accumulator(((fn(v), m) for v, m in self.atoms), self.deficit,
                                 exact=self.exact)

    def abs(self) -> DiscreteDistribution:
        return self.map_values(abs)

    def with_deficit_at_max(self) -> DiscreteDistribution:
        """Move the deficit onto an atom at ``max |value|``.

        Pairs with the default (deficit at 0) to bracket norms of truncated laws.
        """
        if self.deficit == 0:
            return self
        top = self.max_abs()
        return DiscreteDistribution(self.atoms + ((top, self.deficit),), 0)

    def pruned(self, prune_tol: float) -> DiscreteDistribution:
        """Drop atoms lighter than ``prune_tol`` into the deficit."""
        if prune_tol <= 0:
            return self
        keep = tuple((v, m) for v, m in self.atoms if m >= prune_tol)
        if len(keep) == len(self.atoms):
            return self
        dropped = sum((m for v, m in self.atoms if m < prune_tol), 0)
        return DiscreteDistribution(keep, self.deficit + dropped)

    # -- serialisation ------------------------------------------------------

    def to_json(self) -> dict:
        return {"atoms": [[float(v), float(m)] for v, m in self.atoms],
                "deficit": float(self.deficit)}

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data) -> DiscreteDistribution:
        if isinstance(data, str):
            data = json.loads(data)
        return cls(tuple((float(v), float(m)) for v, m in data["atoms"]),
                   float(data.get("deficit", 0.0)))


# -- constructors -------------------------------------------------------------

def delta(c=0) -> DiscreteDistribution:
    return DiscreteDistribution(((c, 1),))


def bernoulli(p, value=1) -> DiscreteDistribution:
    """``value`` with probability ``p``, 0 otherwise (the law of ``value * chi_[0,p)``)."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    return DiscreteDistribution(((0, 1 - p), (value, p)))


def symmetric_two_point(u, value=1) -> DiscreteDistribution:
    """``+-value`` with probability ``u/2`` each, 0 otherwise."""
    if not 0 <= u <= 1:
        raise ValueError("u must lie in [0, 1]")
    half = u / 2
    return DiscreteDistribution(((-value, half), (0, 1 - u), (value, half)))


def binomial(n: int, p) -> DiscreteDistribution:
    if n < 0 or not 0 <= p <= 1:
        raise ValueError("invalid binomial parameters")
    return DiscreteDistribution(tuple((k, math.comb(n, k) * p ** k * (1 - p) ** (n - k))
                                      for k in range(n + 1)))


def poisson(mu: float, n_max: int) -> DiscreteDistribution:
    """Poisson(``mu``) truncated after ``n_max``; the dropped tail goes to the deficit."""
    logs = [k * math.log(mu) - mu - math.lgamma(k + 1) for k in range(n_max + 1)] if mu > 0 else [0.0]
    atoms = tuple((k, math.exp(l)) for k, l in enumerate(logs))
    tail = _poisson_upper_tail(mu, n_max) if mu > 0 else 0.0
    return DiscreteDistribution(atoms, tail)


def _poisson_upper_tail(mu: float, n_max: int) -> float:
    terms = []
    k = n_max + 1
    while True:
        t = math.exp(k * math.log(mu) - mu - math.lgamma(k + 1))
        terms.append(t)
        if t == 0.0 or (k > mu and t < 1e-20 * max(terms)):
            break
        k += 1
    return math.fsum(terms)


# -- arithmetic ---------------------------------------------------------------

def _merge_float(items: list[tuple]) -> list[tuple]:
    """Cluster sorted float values closer than MERGE_RTOL * max|value|."""
    if not items:
        return items
    scale = max(abs(v) for v, _ in items)
    tol = MERGE_RTOL * scale
    out: list[list] = []
    for v, m in items:
        if out and v - out[-1][2] <= tol:
            cluster = out[-1]
            if v == 0 or (cluster[0] != 0 and m > cluster[3]):
                cluster[0], cluster[3] = v, m
            cluster[1] += m
            cluster[2] = v
        else:
            out.append([v, m, v, m])  # representative, total, last value, heaviest mass
    return [(c[0], c[1]) for c in out]


def _from_accumulator(pairs: Iterable[tuple], deficit, exact: bool) -> DiscreteDistribution:
    acc: dict = {}
    for v, m in pairs:
        acc[v] = acc.get(v, 0) + m
    items = sorted(acc.items())
    if not exact:
        items = _merge_float(items)
    return DiscreteDistribution(tuple(items), deficit)


def _is_lattice(d: DiscreteDistribution) -> bool:
    return (not d.exact) and all(float(v).is_integer() for v in d.values)


def _convolve_lattice(d1: DiscreteDistribution, d2: DiscreteDistribution, deficit) -> DiscreteDistribution:
    lo1, lo2 = int(d1.values[0]), int(d2.values[0])
    a = np.zeros(int(d1.values[-1]) - lo1 + 1)
    b = np.zeros(int(d2.values[-1]) - lo2 + 1)
    for v, m in d1.atoms:
        a[int(v) - lo1] = m
    for v, m in d2.atoms:
        b[int(v) - lo2] = m
    c = np.convolve(a, b)
    idx = np.nonzero(c)[0]
    atoms = tuple((float(i + lo1 + lo2), float(c[i])) for i in idx)
    return DiscreteDistribution(atoms, deficit)


def convolve(d1: DiscreteDistribution, d2: DiscreteDistribution) -> DiscreteDistribution:
    """Law of ``X + Y`` for independent ``X ~ d1``, ``Y ~ d2``."""
    deficit = d1.deficit + d2.deficit - d1.deficit * d2.deficit
    if not d1.atoms or not d2.atoms:
        return DiscreteDistribution((), deficit) if deficit else delta(0)
    if _is_lattice(d1) and _is_lattice(d2):
        span = (d1.values[-1] - d1.values[0]) + (d2.values[-1] - d2.values[0])
        if span <= LATTICE_SPAN:
            return _convolve_lattice(d1, d2, deficit)
    exact = d1.exact and d2.exact
    return _from_accumulator(((v1 + v2, m1 * m2) for v1, m1 in d1.atoms for v2, m2 in d2.atoms),
                             deficit, exact)


def convolve_power(d: DiscreteDistribution, n: int) -> DiscreteDistribution:
    """n-fold convolution ``d^{*n}`` (``d^{*0} = delta_0``)."""
    if n < 0:
        raise ValueError("power must be nonnegative")
    out = delta(0)
    for _ in range(n):
        out = convolve(out, d)
    return out


def mixture(parts: Sequence[tuple]) -> DiscreteDistribution:
    """``sum_i w_i d_i``; unassigned weight ``1 - sum_i w_i * |d_i|`` becomes deficit."""
    weights = [w for w, _ in parts]
    if any(w < 0 for w in weights):
        raise ValueError("mixture weights must be nonnegative")
    if sum(weights, 0) > 1 + 1e-12:
        raise ValueError("mixture weights sum to more than 1")
    exact = all_exact(weights) and all(d.exact for _, d in parts)
    pairs = [(v, w * m) for w, d in parts for v, m in d.atoms]
    carried = sum((w * (1 - d.deficit) for w, d in parts), 0)
    deficit = 1 - carried
    if not exact:
        deficit = float(deficit)
        if abs(deficit) < 1e-14:
            deficit = 0.0
    return _from_accumulator(pairs, max(deficit, 0), exact)


# -- bridges to step functions --------------------------------------------------

def quantile_step(d: DiscreteDistribution, deficit_at: str = "zero") -> StepFunction:
    """Decreasing step function on ``[0, 1]`` equimeasurable with ``|X|``.

    ``deficit_at="max"`` places the deficit at ``max |value|`` instead of 0.
    """
    if deficit_at == "max":
        d = d.with_deficit_at_max()
    elif deficit_at != "zero":
        raise ValueError("deficit_at must be 'zero' or 'max'")
    acc: dict = {}
    for v, m in d.atoms:
        a = abs(v)
        if a > 0:
            acc[a] = acc.get(a, 0) + m
    segs = tuple((m, v) for v, m in sorted(acc.items(), reverse=True))
    return StepFunction(segs, domain_end=1)


def step_to_dist(f: StepFunction, total=1) -> DiscreteDistribution:
    """Law of ``f`` viewed as a random variable on ``[0, total]``."""
    vm = f.value_measure()
    rest = total - sum(vm.values(), 0)
    if rest < -MASS_TOL:
        raise ValueError(f"support measure {float(total - rest)} exceeds the domain {total}")
    atoms = list(vm.items())
    if rest > 0:
        atoms.append((0, rest))
    return DiscreteDistribution(tuple(atoms))


# -- comparisons, transforms, sampling --------------------------------------------

def charfn(d: DiscreteDistribution, t: float) -> complex:
    """``E exp(i t X)``, deficit counted as mass at 0."""
    re = math.fsum([float(m) * math.cos(t * float(v)) for v, m in d.atoms] + [float(d.deficit)])
    im = math.fsum(float(m) * math.sin(t * float(v)) for v, m in d.atoms)
    return complex(re, im)


def kolmogorov_distance(d1: DiscreteDistribution, d2: DiscreteDistribution):
    """``sup_x |F_1(x) - F_2(x)|`` over all atom locations (deficit at 0)."""
    def table(d):
        out = dict(d.atoms)
        if d.deficit:
            out[0] = out.get(0, 0) + d.deficit
        return out
    t1, t2 = table(d1), table(d2)
    grid = sorted(set(t1) | set(t2))
    c1 = c2 = 0
    best = 0
    for x in grid:
        c1 += t1.get(x, 0)
        c2 += t2.get(x, 0)
        best = max(best, abs(c1 - c2))
    return best


def sample(d: DiscreteDistribution, seed: int, n: int, stream=0) -> np.ndarray:
    """``n`` independent draws from ``d`` by inverse-CDF lookup.

    Deterministic in ``(seed, stream)``; distinct streams are independent.
    """
    if d.deficit >= MASS_TOL:
        raise ValueError("cannot sample from a law with deficit; the dropped mass has no location")
    values = np.array([float(v) for v in d.values])
    cum = np.cumsum([float(m) for m in d.masses])
    u = philox(seed, stream).random(n) * cum[-1]
    idx = np.minimum(np.searchsorted(cum, u, side="right"), len(values) - 1)
    return values[idx]


def as_fraction_law(d: DiscreteDistribution) -> DiscreteDistribution:
    """Exact copy of a float law (each float converted to its exact rational)."""
    return DiscreteDistribution(tuple((Fraction(v), Fraction(m)) for v, m in d.atoms),
                                Fraction(d.deficit))

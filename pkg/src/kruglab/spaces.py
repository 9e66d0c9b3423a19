"""Symmetric function spaces and their norms on step functions.

Every norm here depends on ``f`` only through ``f*``, so inputs are rearranged
first. The ``[0, 1]`` spaces are ``L_p``, the Lorentz space ``Lambda(t^{1/p})``,
the Marcinkiewicz space ``M(t^{1/p})`` and the Orlicz space generated by
``N_q(t) = t^{t^q} - 1``. :class:`ZXp` lives on ``[0, inf)`` and evaluates the
quasi-norm ``||f* chi_[0,1]||_X + ||f* chi_[1,inf)||_{L_p}``.

Text forms (used by the CLI): ``lp:4``, ``lp:inf``, ``lorentz:2``, ``marc:8``,
``orlicz:1``, ``zx:lp:2,tail=1``, ``zx:lp:2,tail=discrete2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .stepfn import StepFunction, rearrange, truncate

__all__ = [
    "SymmetricSpace",
    "Lp",
    "Lorentz",
    "Marcinkiewicz",
    "OrliczNq",
    "ZXp",
    "norm",
    "fundamental_function",
    "check_assumption",
    "parse_space",
]

SUPPORT_TOL = 1e-12


def _fmt(x: float) -> str:
    if x == math.inf:
        return "inf"
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _parse_number(text: str) -> float:
    return math.inf if text in ("inf", "infinity") else float(text)


def _float_segments(f: StepFunction) -> list[tuple[float, float]]:
    return [(float(l), float(v)) for l, v in f.segments]


class SymmetricSpace:
    """Base class; subclasses implement ``_norm_decreasing`` on ``f*``."""

    on_unit_interval = True

    def norm(self, f: StepFunction) -> float:
        fs = rearrange(f)
        if self.on_unit_interval and fs.support_measure > 1 + SUPPORT_TOL:
            raise ValueError(f"{self} is a space on [0, 1]; support measure is {float(fs.support_measure)}")
        if fs.is_empty():
            return 0.0
        # every norm here is positively homogeneous; scaling to max 1 keeps tiny or huge values finite
        top = float(fs.max_value)
        if top != 1.0:
            fs = fs.map_values(lambda v: float(v) / top)
        return top * self._norm_decreasing(fs)

    def _norm_decreasing(self, fs: StepFunction) -> float:
        raise NotImplementedError

    @property
    def exponent(self) -> float | None:
        return getattr(self, "p", None)


@dataclass(frozen=True)
class Lp(SymmetricSpace):
    p: float

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError("L_p needs p >= 1")

    def __str__(self):
        return f"lp:{_fmt(self.p)}"

    def _norm_decreasing(self, fs):
        return lp_norm(_float_segments(fs), self.p)


def lp_norm(segments: list[tuple[float, float]], p: float) -> float:
    """``(sum l v^p)^{1/p}``, scaled by the largest value against overflow."""
    segments = [(l, v) for l, v in segments if v > 0]
    if not segments:
        return 0.0
    top = max(v for _, v in segments)
    if p == math.inf:
        return top
    s = math.fsum(l * (v / top) ** p for l, v in segments)
    return top * s ** (1.0 / p)


@dataclass(frozen=True)
class Lorentz(SymmetricSpace):
    """``Lambda(t^{1/p})``: ``int_0^1 f* d(t^{1/p})``."""

    p: float

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError("Lorentz space needs p >= 1")

    def __str__(self):
        return f"lorentz:{_fmt(self.p)}"

    def _norm_decreasing(self, fs):
        r = 1.0 / self.p
        terms = []
        t0 = 0.0
        for l, v in _float_segments(fs):
            t1 = t0 + l
            terms.append(v * (t1 ** r - t0 ** r))
            t0 = t1
        return math.fsum(terms)


@dataclass(frozen=True)
class Marcinkiewicz(SymmetricSpace):
    """``M(t^{1/p})``: ``sup_{0<t<=1} t^{1/p-1} int_0^t f*``."""

    p: float

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError("Marcinkiewicz space needs p >= 1")

    def __str__(self):
        return f"marc:{_fmt(self.p)}"

    def _norm_decreasing(self, fs):
        a = 1.0 / self.p - 1.0
        best = 0.0
        t0, acc = 0.0, 0.0
        for l, v in _float_segments(fs):
            t1 = t0 + l
            # on [t0, t1]: g(t) = t^a (acc + v (t - t0)); g' = 0 at t = -a (acc - v t0) / (v (1 + a))
            cands = [t1]
            denom = v * (1.0 + a)
            if a < 0 and denom > 0:
                ts = -a * (acc - v * t0) / denom
                if t0 + 1e-14 < ts < t1 - 1e-14:
                    cands.append(ts)
            for t in cands:
                if 0 < t <= 1 + SUPPORT_TOL:
                    best = max(best, t ** a * (acc + v * (t - t0)))
            acc += v * l
            t0 = t1
        # past the support the average only decays, but t = 1 is always a candidate
        return max(best, acc)


def _n_q(s: float, q: float) -> float:
    """Positive part of ``N_q(s) = s^{s^q} - 1`` (zero for ``s <= 1``)."""
    if s <= 1.0:
        return 0.0
    e = s ** q * math.log(s)
    return math.inf if e > 700.0 else math.expm1(e)


@dataclass(frozen=True)
class OrliczNq(SymmetricSpace):
    """Luxemburg norm ``inf{lam : int_0^1 N_q(f*/lam) <= 1}``.

    ``N_q`` is negative on ``(0, 1)``; its positive part is used, which agrees
    with ``N_q`` at every level where the constraint binds and makes the
    modular monotone in ``lam``.
    """

    q: float
    rtol: float = 1e-10

    def __post_init__(self):
        if not self.q >= 1:
            raise ValueError("Orlicz N_q needs q >= 1")

    def __str__(self):
        return f"orlicz:{_fmt(self.q)}"

    @property
    def exponent(self):
        return None

    def modular(self, fs: StepFunction, lam: float) -> float:
        return math.fsum(l * _n_q(v / lam, self.q) for l, v in _float_segments(fs))

    def _norm_decreasing(self, fs):
        hi = float(fs.max_value)  # every ratio <= 1, modular 0
        lo = hi / 2.0
        for _ in range(2000):
            if self.modular(fs, lo) > 1.0:
                break
            hi, lo = lo, lo / 2.0
        else:
            raise ArithmeticError(f"{self}: could not bracket the Luxemburg norm")
        for _ in range(400):
            if hi - lo <= self.rtol * hi:
                return hi
            mid = 0.5 * (lo + hi)
            if self.modular(fs, mid) > 1.0:
                lo = mid
            else:
                hi = mid
        raise ArithmeticError(f"{self}: Luxemburg bisection did not converge")


@dataclass(frozen=True)
class ZXp(SymmetricSpace):
    """``||f* chi_[0,1]||_base + tail``; tail is ``||f* chi_[1,inf)||_{L_tail_p}``
    or, with ``discrete=True``, ``(sum_{k>=1} f*(k)^tail_p)^{1/tail_p}``."""

    base: SymmetricSpace
    tail_p: float = 1.0
    discrete: bool = False
    on_unit_interval = False

    def __post_init__(self):
        if isinstance(self.base, ZXp) or not self.base.on_unit_interval:
            raise ValueError("Z_X^p needs a base space on [0, 1]")
        if not self.tail_p >= 1:
            raise ValueError("tail exponent must lie in [1, inf]")

    def __str__(self):
        tail = ("discrete" if self.discrete else "") + _fmt(self.tail_p)
        return f"zx:{self.base},tail={tail}"

    @property
    def exponent(self):
        return self.base.exponent

    def head(self, fs: StepFunction) -> StepFunction:
        return truncate(fs, 0, 1)

    def tail_norm(self, fs: StepFunction) -> float:
        if self.discrete:
            k_max = math.ceil(float(fs.length))
            vals = [float(fs(k)) for k in range(1, k_max + 1)]
            return lp_norm([(1.0, v) for v in vals], self.tail_p)
        if fs.length <= 1:
            return 0.0
        return lp_norm(_float_segments(truncate(fs, 1)), self.tail_p)

    def _norm_decreasing(self, fs):
        return self.base.norm(self.head(fs)) + self.tail_norm(fs)


def norm(space: SymmetricSpace, f: StepFunction) -> float:
    return space.norm(f)


def fundamental_function(space: SymmetricSpace, t) -> float:
    """``phi_X(t) = ||chi_[0,t)||_X`` for ``t in (0, 1]``."""
    if not space.on_unit_interval:
        raise ValueError("the fundamental function is defined here for spaces on [0, 1]")
    if not 0 < t <= 1:
        raise ValueError("t must lie in (0, 1]")
    return space.norm(StepFunction.indicator(t))


class AssumptionCheck(NamedTuple):
    support_sum: float
    holds: bool


def check_assumption(ens) -> AssumptionCheck:
    """``sum_k P(f_k != 0)`` and whether it is at most 1."""
    s = ens.support_sum
    return AssumptionCheck(s, bool(s <= 1 + 1e-12))


def parse_space(text: str) -> SymmetricSpace:
    text = text.strip().lower()
    kind, _, rest = text.partition(":")
    if kind == "zx":
        base_text, _, tail = rest.partition(",tail=")
        base = parse_space(base_text)
        tail = tail or "1"
        discrete = tail.startswith("discrete")
        return ZXp(base, _parse_number(tail[len("discrete"):] if discrete else tail), discrete)
    if not rest:
        raise ValueError(f"space {text!r} is missing its parameter")
    x = _parse_number(rest)
    table = {"lp": Lp, "l": Lp, "lorentz": Lorentz, "marc": Marcinkiewicz,
             "marcinkiewicz": Marcinkiewicz, "orlicz": OrliczNq}
    if kind not in table:
        raise ValueError(f"unknown space {kind!r}; expected one of lp, lorentz, marc, orlicz, zx")
    return table[kind](x)

"""Nonnegative right-continuous step functions on ``[0, inf)``.

A :class:`StepFunction` is a finite list of ``(length, value)`` segments laid
end to end from 0; the function vanishes after the last segment. Values are
attached to left-closed intervals, so ``f(t)`` is right-continuous. Lengths and
values may be floats or exact rationals (``int``/``Fraction``); every operation
here only adds, multiplies and compares, so exact inputs stay exact.
"""

from __future__ import annotations

import bisect
import json
import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from itertools import accumulate

__all__ = [
    "StepFunction",
    "rearrange",
    "dilate",
    "disjointify",
    "truncate",
]


@dataclass(frozen=True)
class StepFunction:
    segments: tuple[tuple, ...] = ()
    domain_end: float = math.inf

    def __post_init__(self):
        merged: list[tuple] = []
        for length, value in self.segments:
            if not length > 0:
                raise ValueError(f"segment length must be positive, got {length!r}")
            if not value >= 0 or not math.isfinite(value):
                raise ValueError(f"segment value must be finite and nonnegative, got {value!r}")
            if merged and merged[-1][1] == value:
                merged[-1] = (merged[-1][0] + length, value)
            else:
                merged.append((length, value))
        while merged and merged[-1][1] == 0:
            merged.pop()
        object.__setattr__(self, "segments", tuple(merged))
        if self.length > self.domain_end * (1 + 1e-12):
            raise ValueError(f"segments extend to {self.length}, past domain end {self.domain_end}")

    @classmethod
    def indicator(cls, u, value=1, domain_end=1) -> StepFunction:
        """``value * chi_[0,u)``."""
        return cls(((u, value),), domain_end=domain_end) if u > 0 and value > 0 else cls((), domain_end)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence], domain_end=math.inf) -> StepFunction:
        """Build from ``(length, value)`` pairs, silently dropping empty segments."""
        return cls(tuple((l, v) for l, v in pairs if l > 0), domain_end=domain_end)

    # -- basic quantities ---------------------------------------------------

    @property
    def lengths(self) -> tuple:
        return tuple(l for l, _ in self.segments)

    @property
    def values(self) -> tuple:
        return tuple(v for _, v in self.segments)

    @property
    def breakpoints(self) -> list:
        """Right endpoints of the segments."""
        return list(accumulate(self.lengths))

    @property
    def length(self):
        return sum(self.lengths, 0)

    @property
    def support_measure(self):
        return sum((l for l, v in self.segments if v > 0), 0)

    @property
    def is_decreasing(self) -> bool:
        vals = self.values
        return all(a >= b for a, b in zip(vals, vals[1:]))

    @property
    def max_value(self):
        return max(self.values, default=0)

    def is_empty(self) -> bool:
        return not self.segments

    def __call__(self, t):
        if t < 0:
            raise ValueError("step functions live on [0, inf)")
        ends = self.breakpoints
        i = bisect.bisect_right(ends, t)
        return self.segments[i][1] if i < len(self.segments) else 0

    def integral(self):
        return sum((l * v for l, v in self.segments), 0)

    def measure_above(self, level):
        """Lebesgue measure of ``{f > level}``."""
        return sum((l for l, v in self.segments if v > level), 0)

    def value_measure(self) -> dict:
        """Multiset ``value -> total length`` over the positive values."""
        out: dict = {}
        for l, v in self.segments:
            if v > 0:
                out[v] = out.get(v, 0) + l
        return out

    def scaled(self, c) -> StepFunction:
        if c < 0:
            raise ValueError("scale factor must be nonnegative")
        if c == 0:
            return StepFunction((), self.domain_end)
        return StepFunction(tuple((l, c * v) for l, v in self.segments), self.domain_end)

    def map_values(self, fn: Callable) -> StepFunction:
        """Apply ``fn`` to every value; ``fn`` must map ``[0, inf)`` into itself."""
        return StepFunction(tuple((l, fn(v)) for l, v in self.segments), self.domain_end)

    # -- serialisation ------------------------------------------------------

    def to_json(self) -> list:
        return [[float(l), float(v)] for l, v in self.segments]

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data, domain_end=math.inf) -> StepFunction:
        if isinstance(data, str):
            data = json.loads(data)
        return cls.from_pairs(((float(l), float(v)) for l, v in data), domain_end=domain_end)


def rearrange(f: StepFunction) -> StepFunction:
    """Decreasing rearrangement ``f*``: same value-measure multiset, values sorted down."""
    if f.is_decreasing:
        return f
    ordered = sorted(((l, v) for l, v in f.segments if v > 0), key=lambda s: s[1], reverse=True)
    return StepFunction(tuple(ordered), f.domain_end)


def _window(f: StepFunction, a, b) -> list[tuple]:
    """Segments of ``f * chi_[a,b)``, shifted so that ``a`` maps to 0."""
    out = []
    start = 0
    for l, v in f.segments:
        end = start + l
        lo = max(start, a)
        hi = end if b == math.inf else min(end, b)
        if hi > lo:
            out.append((hi - lo, v))
        start = end
        if b != math.inf and start >= b:
            break
    return out


def truncate(f: StepFunction, a, b=math.inf) -> StepFunction:
    """``f * chi_[a,b)`` re-anchored at 0."""
    if not a >= 0:
        raise ValueError("truncation start must be nonnegative")
    if not a < b:
        raise ValueError(f"empty truncation window [{a}, {b})")
    end = b - a if b != math.inf else math.inf
    return StepFunction.from_pairs(_window(f, a, b), domain_end=min(end, f.domain_end))


def dilate(f: StepFunction, tau) -> StepFunction:
    """Dilation ``(sigma_tau f)(s) = f(s / tau)`` for ``s <= min(1, tau)``, and 0 up to 1."""
    if not tau > 0:
        raise ValueError(f"dilation factor must be positive, got {tau!r}")
    if f.length > 1 * (1 + 1e-12):
        raise ValueError("dilation is defined for functions supported in [0, 1]")
    stretched = StepFunction(tuple((l * tau, v) for l, v in f.segments))
    return StepFunction.from_pairs(_window(stretched, 0, 1), domain_end=1)


def disjointify(fs: Sequence[StepFunction]) -> StepFunction:
    """Place ``f_k`` on ``[k-1, k)``: ``F(t) = f_k(t - k + 1)``."""
    segs: list[tuple] = []
    for f in fs:
        if f.length > 1 * (1 + 1e-12):
            raise ValueError("disjointify expects functions supported in [0, 1]")
        segs.extend(f.segments)
        pad = 1 - f.length
        if pad > 0:
            segs.append((pad, 0))
    return StepFunction.from_pairs(segs)

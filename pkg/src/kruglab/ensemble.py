"""Finite sequences of independent random variables, given by their laws."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .dist import DiscreteDistribution


@dataclass(frozen=True)
class Ensemble:
    """Ordered laws of independent ``f_1, ..., f_n``.

    Structural flags are always recomputed from the laws.
    """

    laws: tuple[DiscreteDistribution, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "laws", tuple(self.laws))

    def __len__(self) -> int:
        return len(self.laws)

    @property
    def symmetric(self) -> bool:
        return all(d.is_symmetric() for d in self.laws)

    @property
    def mean_zero(self) -> bool:
        return all(abs(float(d.mean())) <= 1e-12 * max(1.0, float(d.max_abs())) for d in self.laws)

    @property
    def nonnegative(self) -> bool:
        return all(v >= 0 for d in self.laws for v in d.values)

    @property
    def support_sum(self):
        return sum((d.prob_nonzero() for d in self.laws), 0)

    def to_json(self) -> dict:
        return {"name": self.name, "laws": [d.to_json() for d in self.laws]}

    @classmethod
    def from_json(cls, data) -> Ensemble:
        if isinstance(data, str):
            data = json.loads(data)
        return cls(tuple(DiscreteDistribution.from_json(d) for d in data["laws"]),
                   data.get("name", ""))

    @classmethod
    def load(cls, path) -> Ensemble:
        path = Path(path)
        ens = cls.from_json(path.read_text())
        return ens if ens.name else cls(ens.laws, path.stem)

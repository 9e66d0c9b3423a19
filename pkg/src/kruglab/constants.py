"""Closed-form bounds on the norm of the Kruglov operator, and empirical estimates.

All series are summed in log-domain; extremal problems over integers are
solved by enumeration, over a continuous parameter by the
:func:`~kruglab._numeric.sup_grid_refine` protocol.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from ._numeric import all_exact, log_factorial, sup_grid_refine
from .dist import DiscreteDistribution, bernoulli, quantile_step, symmetric_two_point
from .kruglov import DEFAULT_CONFIG, KruglovConfig, transform
from .spaces import Lorentz, Lp, Marcinkiewicz, SymmetricSpace
from .stepfn import StepFunction

__all__ = [
    "SeriesBound",
    "Extremum",
    "BoundReport",
    "upper_bound_lp",
    "lower_bound_lp",
    "lorentz_upper_bound",
    "lq_lower_bound",
    "lq_order_term",
    "reference_rate",
    "reference_bounds",
    "indicator_family",
    "symmetric_family",
    "estimate_operator_norm",
    "binomial_extremal",
    "lq_profile",
    "bounds_table",
]

INV_E = math.exp(-1.0)


class SeriesBound(NamedTuple):
    value: float
    analytic_cap: float
    terms: int


class Extremum(NamedTuple):
    value: float
    witness: float


def reference_rate(p: float) -> float:
    return p / math.log(p + 1.0)


def upper_bound_lp(p: float) -> SeriesBound:
    """``(sum_{n>=1} n^p / (e n!))^{1/p}``, the p-estimate bound on ``||K||_{L_p}``.

    Also returns the cruder analytic cap: ``e p / ln p`` for ``p >= 2`` and
    ``2e`` for ``1 <= p < 2``.
    """
    if not p >= 1:
        raise ValueError("p must be at least 1")
    logs: list[float] = []
    n = 1
    while True:
        lt = p * math.log(n) - 1.0 - log_factorial(n)
        logs.append(lt)
        top = max(logs)
        # terms rise until n ln n ~ p, then fall super-exponentially
        if n > 1 and lt < logs[-2] and lt - top < math.log(1e-16) - math.log(n):
            break
        n += 1
    top = max(logs)
    log_sum = top + math.log(math.fsum(math.exp(l - top) for l in logs))
    cap = math.e * p / math.log(p) if p >= 2 else 2.0 * math.e
    return SeriesBound(math.exp(log_sum / p), cap, len(logs))


def lower_bound_lp(p: float) -> Extremum:
    """``(1/e) sup_k k / (k!)^{1/p}``: a lower bound for ``||K||`` from
    ``Lambda(t^{1/p})`` to ``M(t^{1/p})``, hence for every pair of spaces
    sandwiched between them (``L_p`` included)."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    best_k, best = 1, -math.inf
    for k in range(1, math.ceil(4 * p) + 1):
        v = math.log(k) - log_factorial(k) / p
        if v > best:
            best_k, best = k, v
    return Extremum(INV_E * math.exp(best), best_k)


_LOG_FACT = np.array([log_factorial(k) for k in range(1, 20001)])  # log k!, k = 1..20000


def _lorentz_profile(p: float, u: float) -> float:
    """``u^{-1/p} sum_{k>=1} (u^k / k!)^{1/p}``; terms decrease in ``k`` for ``u <= 1``."""
    chunk = 512
    log_u = math.log(u)
    pieces: list[float] = []
    for start in range(0, len(_LOG_FACT), chunk):
        k = np.arange(start + 1, start + chunk + 1, dtype=float)
        terms = np.exp(((k - 1.0) * log_u - _LOG_FACT[start:start + chunk]) / p)
        pieces.extend(terms.tolist())
        s = math.fsum(pieces)
        if terms[-1] < 1e-18 * s:
            return math.fsum(t for t in pieces if t >= 1e-18 * s)
    raise ArithmeticError(f"Lorentz series did not converge for p={p}, u={u}")


def lorentz_upper_bound(p: float, n_grid: int = 512, tol: float = 1e-10) -> Extremum:
    """``2 sup_{0<u<=1} u^{-1/p} sum_k (u^k/k!)^{1/p}``, bounding ``||K||`` on ``Lambda(t^{1/p})``.

    The witness is the maximising ``u``.
    """
    if not p >= 1:
        raise ValueError("p must be at least 1")
    u, val = sup_grid_refine(lambda x: _lorentz_profile(p, x), 1e-6, 1.0, n_grid=n_grid, tol=tol)
    return Extremum(2.0 * val, u)


def lq_order_term(p: float, q: float) -> Extremum:
    """``sup_{n>=1} n^{1/q} / (n^{2n})^{1/p}`` with its maximiser."""
    if not p > 1 or not q >= 1:
        raise ValueError("need p > 1 and q >= 1")
    best_n, best = 1, -math.inf
    for n in range(1, math.ceil(4 * p) + 1):
        v = math.log(n) / q - 2.0 * n * math.log(n) / p
        if v > best:
            best_n, best = n, v
    return Extremum(math.exp(best), best_n)


def lq_lower_bound(p: float, q: float) -> Extremum:
    """Lower bound ``(1/(sqrt(2 pi) e)) sup_n n^{1/q} / (n^{2n})^{1/p}`` for the
    constant in the ``l_q``-valued inequality on ``L_p``."""
    term = lq_order_term(p, q)
    return Extremum(term.value / (math.sqrt(2.0 * math.pi) * math.e), term.witness)


# -- the binomial extremal family ---------------------------------------------

def _binomial_pmf(n: int, r) -> list:
    if all_exact((r,)) or n <= 1000:
        # direct products are exact for rationals and more accurate than lgamma at moderate n
        return [math.comb(n, i) * r ** i * (1 - r) ** (n - i) for i in range(n + 1)]
    out = []
    for i in range(n + 1):
        if r == 1.0:
            out.append(1.0 if i == n else 0.0)
            continue
        lg = (math.lgamma(n + 1) - math.lgamma(i + 1) - math.lgamma(n - i + 1)
              + (i * math.log(r) if i else 0.0) + (n - i) * math.log1p(-r))
        out.append(math.exp(lg))
    return out


def binomial_extremal(n: int, u) -> tuple[list, StepFunction]:
    """Tails ``tau_k = P(Bin(n, u/n) >= k)``, ``k = 1..n``, and ``f* = sum_k chi_[0, tau_k)``.

    Exact (rational) when ``u`` is an ``int`` or ``Fraction``.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if not 0 < u <= 1:
        raise ValueError("u must lie in (0, 1]")
    r = Fraction(u) / n if all_exact((u,)) else u / n
    pmf = _binomial_pmf(n, r)
    taus = [0] * n
    acc = 0
    for k in range(n, 0, -1):  # smallest tail term first
        acc = acc + pmf[k]
        taus[k - 1] = acc
    segs = [(pmf[k], k) for k in range(n, 0, -1)]
    return taus, StepFunction.from_pairs(segs, domain_end=1)


def lq_profile(n: int, u, q: float) -> StepFunction:
    """``(f_n*)^{1/q}``: value ``k^{1/q}`` on ``[tau_{k+1}, tau_k)``."""
    if not q >= 1:
        raise ValueError("q must be at least 1")
    _, fstar = binomial_extremal(n, u)
    if q == 1:
        return fstar
    return fstar.map_values(lambda k: k ** (1.0 / q))


# -- empirical operator norms ---------------------------------------------------

def indicator_family(u_grid: Sequence[float] | None = None) -> list[tuple[str, DiscreteDistribution]]:
    """Laws of ``chi_[0,u)`` on a log grid (default ``2^-j``, ``j = 0..10``)."""
    if u_grid is None:
        u_grid = [2.0 ** -j for j in range(11)]
    return [(f"indicator u={_short(u)}", bernoulli(u)) for u in u_grid]


def symmetric_family(u_grid: Sequence[float] | None = None) -> list[tuple[str, DiscreteDistribution]]:
    if u_grid is None:
        u_grid = [2.0 ** -j for j in range(0, 11, 2)]
    return [(f"symmetric u={_short(u)}", symmetric_two_point(u)) for u in u_grid]


def _short(x: float) -> str:
    return f"{float(x):.6g}"


def _same_scale(a: SymmetricSpace, b: SymmetricSpace) -> float | None:
    kinds = (Lp, Lorentz, Marcinkiewicz)
    if isinstance(a, kinds) and isinstance(b, kinds) and a.p == b.p and a.p != math.inf:
        return float(a.p)
    return None


def reference_bounds(space_in: SymmetricSpace, space_out: SymmetricSpace):
    """Closed-form ``(lower, upper)`` for ``||K||_{in -> out}``; ``None`` where not covered.

    Uses ``||.||_M <= ||.||_{L_p} <= ||.||_Lambda`` at a common ``p``.
    """
    p = _same_scale(space_in, space_out)
    if p is None:
        normalised = all(isinstance(s, (Lp, Lorentz, Marcinkiewicz)) for s in (space_in, space_out))
        return (INV_E if normalised else None), None
    if p == 1:
        return 1.0, 1.0
    lower = lower_bound_lp(p).value
    upper = None
    if isinstance(space_in, (Lp, Lorentz)) and isinstance(space_out, (Lp, Marcinkiewicz)):
        upper = upper_bound_lp(p).value
    elif isinstance(space_in, Lorentz) and isinstance(space_out, Lorentz):
        upper = lorentz_upper_bound(p).value
    return lower, upper


@dataclass
class BoundReport:
    space_in: str
    space_out: str
    lower: float | None
    upper: float | None
    estimate: float | None
    estimate_upper: float | None = None
    witness: str = ""
    p: float | None = None
    reference_rate: float | None = None
    config: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        tol = 1e-9
        if self.estimate is None:
            return self.lower is None or self.upper is None or self.lower <= self.upper + tol
        ok = self.lower is None or self.lower <= self.estimate + tol
        return ok and (self.upper is None or self.estimate <= self.upper + tol)

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def estimate_operator_norm(space_in: SymmetricSpace, space_out: SymmetricSpace,
                           family: Sequence, cfg: KruglovConfig = DEFAULT_CONFIG) -> BoundReport:
    """``max ||K f||_out / ||f||_in`` over ``family``.

    ``family`` holds laws or ``(label, law)`` pairs. ``estimate`` uses the
    truncated law (deficit at 0); ``estimate_upper`` places the deficit at
    the largest atom.
    """
    if not family:
        raise ValueError("empty test family")
    best = best_hi = -math.inf
    witness = ""
    for i, item in enumerate(family):
        label, d = item if isinstance(item, tuple) else (f"law[{i}]", item)
        denom = space_in.norm(quantile_step(d))
        if denom == 0:
            raise ValueError(f"test function {label} has zero norm in {space_in}")
        kd = transform(d, cfg)
        lo = space_out.norm(quantile_step(kd)) / denom
        hi = space_out.norm(quantile_step(kd, deficit_at="max")) / denom
        if lo > best:
            best, witness = lo, label
        best_hi = max(best_hi, hi)
    lower, upper = reference_bounds(space_in, space_out)
    p = _same_scale(space_in, space_out)
    return BoundReport(str(space_in), str(space_out), lower, upper, best, best_hi, witness,
                       p, reference_rate(p) if p else None,
                       {"n_max": cfg.n_max, "tail_tol": cfg.tail_tol, "family_size": len(family)})


def bounds_table(ps: Sequence[float], cfg: KruglovConfig = DEFAULT_CONFIG) -> list[dict]:
    """Rows ``p, lower, upper, lorentz_upper, estimate, rate`` and the ratios to the rate.

    ``estimate`` is the empirical ``||K||_{L_p -> L_p}`` over :func:`indicator_family`.
    """
    family = indicator_family()
    rows = []
    for p in ps:
        rate = reference_rate(p)
        lower = lower_bound_lp(p).value if p > 1 else 1.0
        upper = upper_bound_lp(p).value
        lor = lorentz_upper_bound(p).value
        est = estimate_operator_norm(Lp(p), Lp(p), family, cfg).estimate
        rows.append({"p": p, "lower": lower, "upper": upper, "lorentz_upper": lor, "estimate": est,
                     "rate": rate, "lower_ratio": lower / rate, "upper_ratio": upper / rate,
                     "lorentz_ratio": lor / rate, "estimate_ratio": est / rate})
    return rows


BOUNDS_COLUMNS = ["p", "lower", "upper", "lorentz_upper", "estimate", "rate",
                  "lower_ratio", "upper_ratio", "lorentz_ratio", "estimate_ratio"]
BOUNDS_SCHEMA = "kruglab.bounds/1"


def bounds_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write(f"# {BOUNDS_SCHEMA}\n")
    w = csv.DictWriter(buf, fieldnames=BOUNDS_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(float(r[k])) for k in BOUNDS_COLUMNS})
    return buf.getvalue()

"""Exact and Monte-Carlo checks of inequalities for sums of independent variables.

Each check returns a :class:`CheckReport` stating ``lhs <= constant * rhs``.
Checks over a family of levels (tail probabilities at many ``x``) report the
level with the smallest margin. Exact mode works on laws obtained by
convolution or path enumeration; Monte-Carlo mode is used when those exceed
the atom budget.
"""

from __future__ import annotations

import json
import math
import os
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ._numeric import philox
from .dist import (
    DiscreteDistribution,
    bernoulli,
    convolve,
    delta,
    quantile_step,
    sample,
)
from .ensemble import Ensemble
from .kruglov import DEFAULT_CONFIG, KruglovConfig, transform
from .spaces import Lorentz, Lp, Marcinkiewicz, OrliczNq, SymmetricSpace, ZXp, check_assumption
from .stepfn import StepFunction, disjointify, rearrange, truncate

__all__ = [
    "CheckReport",
    "HarnessConstants",
    "BudgetExceeded",
    "exact_sum_law",
    "disjoint_law",
    "disjoint_rearrangement",
    "kruglov_of_disjoint",
    "sum_of_poissonized",
    "path_laws",
    "rosenthal_check",
    "prohorov_check",
    "prohorov_norm_check",
    "sup_vs_disjoint_check",
    "levy_check",
    "maximal_lower_check",
    "maximal_check",
    "centering",
    "lq_norm_check",
    "empirical_step",
    "simulate_paths",
    "random_ensemble",
    "binomial_ensemble",
    "fixture_laws",
    "load_corpus",
    "audit_ensemble",
    "audit_random",
    "run_audit",
]

DEFAULT_BUDGET = 10**6
MC_CHUNK = 8192


class BudgetExceeded(ValueError):
    """The exact computation would exceed the atom budget; use Monte-Carlo mode."""


@dataclass(frozen=True)
class HarnessConstants:
    """Constants used by the checks.

    ``prohorov_tail``, ``prohorov_norm``, ``levy`` and ``maximal_lower`` are the
    values stated with the inequalities (8, 16, 2 and 1/5). ``beta``,
    ``alpha_maximal`` and ``alpha_lq`` stand for universal constants that are
    never pinned numerically; their defaults were calibrated on the fixture
    corpus (largest observed ratio, rounded up to the next integer).
    """

    prohorov_tail: float = 8.0
    prohorov_norm: float = 16.0
    levy: float = 2.0
    maximal_lower: float = 0.2
    beta: float = 1.0
    alpha_maximal: float = 1.0
    alpha_lq: float = 1.0


DEFAULT_CONSTANTS = HarnessConstants()


@dataclass
class CheckReport:
    name: str
    lhs: float
    rhs: float
    constant_used: float
    margin: float
    passed: bool
    mode: str = "exact"
    trials: int = 0
    seed: int | None = None
    ci_halfwidth: float = 0.0
    tolerance: float = 0.0
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _report(name: str, lhs, rhs, constant, *, mode="exact", rtol=1e-12, ci=0.0, **extra) -> CheckReport:
    lhs, rhs, constant = float(lhs), float(rhs), float(constant)
    margin = constant * rhs - lhs
    tol = rtol * max(1.0, abs(lhs), abs(constant * rhs))
    if mode != "exact":
        tol += ci
    detail = extra.pop("detail", {})
    return CheckReport(name, lhs, rhs, constant, margin, margin >= -tol, mode,
                       tolerance=tol, ci_halfwidth=ci, detail=detail, **extra)


def _worst(name: str, rows: Iterable[tuple], constant, detail: dict | None = None) -> CheckReport:
    """Report the level with the smallest ``constant * rhs - lhs`` among ``(level, lhs, rhs)``."""
    rows = list(rows)
    if not rows:
        return _report(name, 0.0, 0.0, constant, detail={**(detail or {}), "levels": 0})
    level, lhs, rhs = min(rows, key=lambda r: float(constant * r[2] - r[1]))
    failing = sum(1 for _, l, r in rows if float(constant * r - l) < -1e-12 * max(1.0, float(l)))
    return _report(name, lhs, rhs, constant,
                   detail={**(detail or {}), "level": float(level), "levels": len(rows),
                           "failing_levels": failing})


# -- laws built from an ensemble ----------------------------------------------

def exact_sum_law(ens: Ensemble, budget: int = DEFAULT_BUDGET) -> DiscreteDistribution:
    """Law of ``S_n = f_1 + ... + f_n``."""
    acc = delta(0)
    for d in ens.laws:
        if len(acc) * len(d) > budget:
            raise BudgetExceeded(f"convolution needs {len(acc) * len(d)} atoms (budget {budget}); "
                                 "use Monte-Carlo mode")
        acc = convolve(acc, d)
    return acc


def _require_assumption(ens: Ensemble, what: str):
    s, ok = check_assumption(ens)
    if not ok:
        raise ValueError(f"{what} needs sum_k P(f_k != 0) <= 1, got {float(s)}")


def disjoint_law(ens: Ensemble) -> DiscreteDistribution:
    """Signed law of ``F`` on ``[0, 1]`` when the supports fit: nonzero atoms of
    every ``f_k``, remaining mass at 0."""
    _require_assumption(ens, "disjoint_law")
    atoms = [(v, m) for d in ens.laws for v, m in d.atoms if v != 0]
    rest = 1 - sum((m for _, m in atoms), 0)
    return DiscreteDistribution(tuple(atoms) + (((0, rest),) if rest > 0 else ()))


def disjoint_rearrangement(ens: Ensemble) -> StepFunction:
    """``F*`` for the disjointification of ``|f_1|, ..., |f_n|``."""
    return rearrange(disjointify([quantile_step(d) for d in ens.laws]))


def kruglov_of_disjoint(ens: Ensemble, cfg: KruglovConfig = DEFAULT_CONFIG) -> DiscreteDistribution:
    """Law of ``K(F)``, equal to the law of ``sum_k h_k`` with ``h_k ~ pi(f_k)``."""
    return transform(disjoint_law(ens), cfg)


def sum_of_poissonized(ens: Ensemble, cfg: KruglovConfig = DEFAULT_CONFIG) -> DiscreteDistribution:
    """Law of ``sum_k h_k``, independent ``h_k ~ K f_k``, by convolving the transforms."""
    acc = delta(0)
    for d in ens.laws:
        acc = convolve(acc, transform(d, cfg))
    return acc


def path_laws(ens: Ensemble, budget: int = DEFAULT_BUDGET) -> tuple[DiscreteDistribution, DiscreteDistribution]:
    """Exact laws of ``S_n`` and ``U_n = max_k |S_k|`` by enumerating paths."""
    states: dict = {(0, 0): 1}
    for d in ens.laws:
        if len(states) * len(d) > budget:
            raise BudgetExceeded(f"path enumeration needs {len(states) * len(d)} states (budget {budget})")
        nxt: dict = {}
        for (s, u), m in states.items():
            for v, mv in d.atoms:
                s2 = s + v
                key = (s2, max(u, abs(s2)))
                nxt[key] = nxt.get(key, 0) + m * mv
        states = nxt
    s_law: dict = {}
    u_law: dict = {}
    for (s, u), m in states.items():
        s_law[s] = s_law.get(s, 0) + m
        u_law[u] = u_law.get(u, 0) + m
    return DiscreteDistribution(tuple(s_law.items())), DiscreteDistribution(tuple(u_law.items()))


class _Tail:
    """Vectorised ``P(X >= x)`` / ``P(X > x)`` for a law (deficit counts at 0)."""

    def __init__(self, d: DiscreteDistribution):
        table = dict((float(v), float(m)) for v, m in d.atoms)
        if d.deficit:
            table[0.0] = table.get(0.0, 0.0) + float(d.deficit)
        self.values = np.array(sorted(table))
        masses = np.array([table[v] for v in self.values])
        # suffix[i] = P(X >= values[i])
        self.suffix = np.concatenate([np.cumsum(masses[::-1])[::-1], [0.0]])

    def ge(self, x):
        return self.suffix[np.searchsorted(self.values, x, side="left")]

    def gt(self, x):
        return self.suffix[np.searchsorted(self.values, x, side="right")]


# -- the checks ---------------------------------------------------------------------

_TAILS = {"1": (1.0, False), "2": (2.0, False), "discrete2": (2.0, True)}


def rosenthal_check(ens: Ensemble, space: SymmetricSpace, tail="1", constant: float = 1.0,
                    budget: int = DEFAULT_BUDGET) -> CheckReport:
    """``||S_n||_X <= C (||F* chi_[0,1]||_X + tail)``.

    ``tail`` selects ``||F* chi_[1,inf)||_{L_1}`` ("1"), ``||F* chi_[1,inf)||_{L_2}``
    ("2") or ``(sum_k F*(k)^2)^{1/2}`` ("discrete2"); the last two are the
    mean-zero forms.
    """
    tail = str(tail)
    if tail not in _TAILS:
        raise ValueError(f"tail must be one of {sorted(_TAILS)}")
    if not space.on_unit_interval:
        raise ValueError("rosenthal_check needs a space on [0, 1]")
    if tail != "1" and not ens.mean_zero:
        raise ValueError(f"tail={tail} is the mean-zero inequality; ensemble {ens.name!r} is not centred")
    lhs = space.norm(quantile_step(exact_sum_law(ens, budget)))
    tail_p, discrete = _TAILS[tail]
    rhs = ZXp(space, tail_p, discrete).norm(disjoint_rearrangement(ens))
    return _report(f"rosenthal[tail={tail}]", lhs, rhs, constant,
                   detail={"space": str(space), "ensemble": ens.name, "n": len(ens)})


def prohorov_check(ens: Ensemble, x_grid: Sequence[float] = (), cfg: KruglovConfig = DEFAULT_CONFIG,
                   constant: float = DEFAULT_CONSTANTS.prohorov_tail,
                   budget: int = DEFAULT_BUDGET) -> CheckReport:
    """``P(|S_n| >= x) <= 8 P(|K(F)| >= x/2)`` for every ``x > 0``.

    Both sides are left-continuous step functions of ``x``; checking at every
    jump of either side (plus ``x_grid``) covers all ``x``.
    """
    if not ens.symmetric:
        raise ValueError("prohorov_check needs symmetrically distributed f_k")
    _require_assumption(ens, "prohorov_check")
    s_abs = exact_sum_law(ens, budget).abs()
    h_abs = kruglov_of_disjoint(ens, cfg).abs()
    xs = {float(x) for x in x_grid if x > 0}
    xs |= {float(v) for v in s_abs.values if v > 0}
    xs |= {2.0 * float(v) for v in h_abs.values if v > 0}
    xs = np.array(sorted(xs))
    if xs.size == 0:
        return _worst("prohorov", [], constant, {"ensemble": ens.name})
    lhs = _Tail(s_abs).ge(xs)
    rhs = _Tail(h_abs).ge(xs / 2.0)
    return _worst("prohorov", zip(xs, lhs, rhs), constant, {"ensemble": ens.name})


def prohorov_norm_check(ens: Ensemble, space: SymmetricSpace, cfg: KruglovConfig = DEFAULT_CONFIG,
                        constant: float = DEFAULT_CONSTANTS.prohorov_norm,
                        budget: int = DEFAULT_BUDGET) -> CheckReport:
    """``||S_n||_X <= 16 ||K(F)||_X`` for symmetric ``f_k`` with supports summing to at most 1."""
    if not ens.symmetric:
        raise ValueError("prohorov_norm_check needs symmetrically distributed f_k")
    lhs = space.norm(quantile_step(exact_sum_law(ens, budget)))
    rhs = space.norm(quantile_step(kruglov_of_disjoint(ens, cfg)))
    return _report("prohorov_norm", lhs, rhs, constant,
                   detail={"space": str(space), "ensemble": ens.name})


def sup_vs_disjoint_check(ens: Ensemble) -> CheckReport:
    """``(1/2) lam{F* chi_[0,1] > t} <= lam{sup_k |f_k| > t} <= lam{F* chi_[0,1] > t}``.

    The middle term is ``1 - prod_k P(|f_k| <= t)``; the outer terms come from
    the rearranged disjointification. All three are right-continuous in ``t``
    with jumps at atom values, so those (and 0) are the only levels needed;
    levels where both sides vanish are skipped.
    """
    _require_assumption(ens, "sup_vs_disjoint_check")
    head = truncate(disjoint_rearrangement(ens), 0, 1)
    abs_laws = [d.abs() for d in ens.laws]
    levels = sorted({0.0} | {float(v) for d in abs_laws for v in d.values})
    lower_rows, upper_rows = [], []
    for t in levels:
        disjoint = float(head.measure_above(t))
        stay = math.prod(1.0 - float(d.tail_gt(t)) for d in abs_laws)
        sup = 1.0 - stay
        if disjoint == 0 and sup == 0:
            continue
        lower_rows.append((t, disjoint, sup))   # disjoint <= 2 * sup
        upper_rows.append((t, sup, disjoint))   # sup <= 1 * disjoint
    lower = _worst("sup_vs_disjoint", lower_rows, 2.0)
    upper = _worst("sup_vs_disjoint", upper_rows, 1.0)
    worst = lower if lower.margin <= upper.margin else upper
    worst.passed = lower.passed and upper.passed
    worst.detail.update({"ensemble": ens.name, "lower_margin": lower.margin,
                         "upper_margin": upper.margin,
                         "side": "lower" if worst is lower else "upper"})
    return worst


def levy_check(ens: Ensemble, constant: float = DEFAULT_CONSTANTS.levy,
               budget: int = DEFAULT_BUDGET) -> CheckReport:
    """``P(U_n > t) <= 2 P(|S_n| > t)`` at every level, by path enumeration."""
    if not ens.symmetric:
        raise ValueError("the Levy inequality needs symmetrically distributed f_k")
    s_law, u_law = path_laws(ens, budget)
    s_abs = s_law.abs()
    levels = np.array(sorted({0.0} | {float(v) for v in u_law.values} | {float(v) for v in s_abs.values}))
    lhs = _Tail(u_law).gt(levels)
    rhs = _Tail(s_abs).gt(levels)
    return _worst("levy", zip(levels, lhs, rhs), constant, {"ensemble": ens.name})


def maximal_lower_check(ens: Ensemble, space: SymmetricSpace,
                        budget: int = DEFAULT_BUDGET) -> CheckReport:
    """``(1/5)(||F* chi_[0,1]||_X + ||U_n||_{L_1}) <= ||U_n||_X``, exactly.

    Reported as ``lhs = ||F* chi_[0,1]||_X + ||U_n||_1 <= 5 ||U_n||_X``.
    """
    _, u_law = path_laws(ens, budget)
    u_step = quantile_step(u_law)
    head = truncate(disjoint_rearrangement(ens), 0, 1)
    lhs = space.norm(head) + float(u_step.integral())
    rhs = space.norm(u_step)
    return _report("maximal_lower", lhs, rhs, 1.0 / DEFAULT_CONSTANTS.maximal_lower,
                   detail={"space": str(space), "ensemble": ens.name})


# -- Monte Carlo ---------------------------------------------------------------------

def empirical_step(samples: np.ndarray) -> StepFunction:
    """Decreasing rearrangement of ``|X|`` under the empirical measure of ``samples``."""
    a = np.abs(np.asarray(samples, dtype=float))
    n = a.size
    if n == 0:
        return StepFunction((), domain_end=1)
    vals, counts = np.unique(a, return_counts=True)
    segs = tuple((c / n, float(v)) for v, c in zip(vals[::-1], counts[::-1]) if v > 0)
    return StepFunction(segs, domain_end=1)


def simulate_paths(ens: Ensemble, trials: int, seed: int, chunk: int = MC_CHUNK):
    """Samples of ``S_n`` and ``U_n``. Chunk ``c`` draws from stream ``c``, so the
    output does not depend on how chunks are scheduled."""
    s_out, u_out = [], []
    for c, start in enumerate(range(0, trials, chunk)):
        size = min(chunk, trials - start)
        s = np.zeros(size)
        u = np.zeros(size)
        for k, d in enumerate(ens.laws):
            s = s + sample(d, seed, size, stream=(c, k))
            np.maximum(u, np.abs(s), out=u)
        s_out.append(s)
        u_out.append(u)
    if not s_out:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(s_out), np.concatenate(u_out)


def _mc_norm(space: SymmetricSpace, samples: np.ndarray, batches: int = 20) -> tuple[float, float]:
    """Empirical norm and a 95% half-width (delta method for L_p, batch means otherwise)."""
    value = space.norm(empirical_step(samples))
    a = np.abs(samples)
    n = a.size
    if isinstance(space, Lp) and space.p != math.inf and value > 0:
        p = space.p
        y = (a / value) ** p  # mean(y) == 1 up to rounding
        hw = 1.96 * value / p * float(np.std(y, ddof=1)) / math.sqrt(n)
        return value, hw
    parts = [space.norm(empirical_step(b)) for b in np.array_split(a, batches)]
    return value, 1.96 * float(np.std(parts, ddof=1)) / math.sqrt(batches)


def maximal_check(ens: Ensemble, space: SymmetricSpace, trials: int = 100_000, seed: int = 0,
                  k_norm: float | None = None, constants: HarnessConstants = DEFAULT_CONSTANTS,
                  mode: str = "montecarlo", budget: int = DEFAULT_BUDGET) -> tuple[CheckReport, CheckReport]:
    """The two maximal-function complements of the Rosenthal inequality.

    Report 1: ``||S_n||_X <= beta ||K|| (||F* chi_[0,1]||_X + ||S_n||_1)``.
    Report 2: ``||U_n||_X <= alpha ||K|| (||F* chi_[0,1]||_X + ||U_n||_1)``; it
    passes only if the lower bound ``(1/5)(...) <= ||U_n||_X`` holds as well.
    ``k_norm`` defaults to the empirical ``||K||_{X->X}`` over indicators.
    """
    if not space.on_unit_interval:
        raise ValueError("maximal_check needs a space on [0, 1]")
    if len(ens) == 0 or all(len(d) == 1 and d.values[0] == 0 for d in ens.laws):
        raise ValueError("degenerate ensemble: every f_k vanishes")
    if k_norm is None:
        k_norm = empirical_kruglov_norm(space)
    head = space.norm(truncate(disjoint_rearrangement(ens), 0, 1))
    extra = {"space": str(space), "ensemble": ens.name, "k_norm": k_norm}
    if mode == "exact":
        s_law, u_law = path_laws(ens, budget)
        s_step, u_step = quantile_step(s_law), quantile_step(u_law)
        s_x, u_x = space.norm(s_step), space.norm(u_step)
        s_1, u_1 = float(s_step.integral()), float(u_step.integral())
        ci_s = ci_u = 0.0
        kw = {"mode": "exact"}
    elif mode == "montecarlo":
        if trials < 10_000:
            raise ValueError("Monte-Carlo mode needs at least 10^4 trials")
        s, u = simulate_paths(ens, trials, seed)
        s_x, ci_s = _mc_norm(space, s)
        u_x, ci_u = _mc_norm(space, u)
        s_1, u_1 = float(np.mean(np.abs(s))), float(np.mean(u))
        kw = {"mode": "montecarlo", "trials": trials, "seed": seed}
    else:
        raise ValueError("mode must be 'exact' or 'montecarlo'")
    r1 = _report("maximal_sum", s_x, k_norm * (head + s_1), constants.beta,
                 ci=ci_s, detail=dict(extra), **kw)
    lower_lhs = head + u_1
    lower_margin = u_x / constants.maximal_lower - lower_lhs
    r2 = _report("maximal_max", u_x, k_norm * (head + u_1), constants.alpha_maximal,
                 ci=ci_u, detail={**extra, "lower_lhs": lower_lhs, "lower_rhs": u_x,
                                  "lower_margin": lower_margin}, **kw)
    lower_ok = lower_margin >= -(r2.tolerance / constants.maximal_lower + 1e-12)
    r2.passed = r2.passed and lower_ok
    r2.detail["lower_passed"] = lower_ok
    return r1, r2


_K_NORM_CACHE: dict = {}


def empirical_kruglov_norm(space: SymmetricSpace, cfg: KruglovConfig = DEFAULT_CONFIG) -> float:
    """``max ||K f||_X / ||f||_X`` over indicator laws (cached per space)."""
    from .constants import estimate_operator_norm, indicator_family

    key = (str(space), cfg.n_max, cfg.tail_tol)
    if key not in _K_NORM_CACHE:
        _K_NORM_CACHE[key] = estimate_operator_norm(space, space, indicator_family(), cfg).estimate
    return _K_NORM_CACHE[key]


# -- centring and the l_q inequality ------------------------------------------------------

def centering(ens: Ensemble, mode: str = "global") -> Ensemble:
    """Mean-zero version of ``ens``.

    ``"global"``: ``g_k = f_k - E f_k``. ``"support"``: ``u_k = f_k - v_k`` with
    ``v_k = (E f_k / P(f_k != 0))`` on the support of ``f_k`` and 0 elsewhere.
    """
    out = []
    for d in ens.laws:
        m = d.mean()
        if mode == "global":
            out.append(d if m == 0 else d.map_values(lambda v, m=m: v - m))
        elif mode == "support":
            p = d.prob_nonzero()
            if p == 0:
                raise ValueError("support centring needs P(f_k != 0) > 0")
            c = m / p
            out.append(DiscreteDistribution(tuple((v - c if v != 0 else v, w) for v, w in d.atoms)))
        else:
            raise ValueError("mode must be 'global' or 'support'")
    return Ensemble(tuple(out), f"{ens.name}:centred-{mode}")


def lq_norm_check(ens: Ensemble, q: float, p: float, trials: int = 100_000, seed: int = 0,
                  alpha: float = DEFAULT_CONSTANTS.alpha_lq, mode: str = "auto",
                  budget: int = DEFAULT_BUDGET) -> CheckReport:
    """``|| (sum_k |f_k|^q)^{1/q} ||_{L_p} <= alpha (p/ln(p+1))^{1/q}
    (||F* chi_[0,1]||_{L_p} + (sum_k F*(k)^q)^{1/q})``.

    ``mode="auto"`` convolves the laws of ``|f_k|^q`` when the budget allows
    and falls back to Monte Carlo otherwise.
    """
    if not (p >= 1 and q >= 1):
        raise ValueError("need p, q >= 1")
    space = Lp(p)
    powered = Ensemble(tuple(d.map_values(lambda v: abs(v) ** q) for d in ens.laws), ens.name)
    ci = 0.0
    kw: dict = {"mode": "exact"}
    law = None
    if mode in ("auto", "exact"):
        try:
            law = exact_sum_law(powered, budget)
        except BudgetExceeded:
            if mode == "exact":
                raise
    if law is not None:
        lhs = space.norm(quantile_step(law).map_values(lambda v: v ** (1.0 / q)))
    else:
        total = np.zeros(0)
        for c, start in enumerate(range(0, trials, MC_CHUNK)):
            size = min(MC_CHUNK, trials - start)
            acc = np.zeros(size)
            for k, d in enumerate(powered.laws):
                acc += sample(d, seed, size, stream=(c, k))
            total = np.concatenate([total, acc])
        lhs, ci = _mc_norm(space, total ** (1.0 / q))
        kw = {"mode": "montecarlo", "trials": trials, "seed": seed}
    rate = (p / math.log(p + 1.0)) ** (1.0 / q)
    rhs = rate * ZXp(space, q, discrete=True).norm(disjoint_rearrangement(ens))
    return _report(f"lq[q={q:g},p={p:g}]", lhs, rhs, alpha, ci=ci,
                   detail={"ensemble": ens.name}, **kw)


# -- random ensembles -------------------------------------------------------------------------

def random_ensemble(seed: int, index: int, max_n: int = 6, max_atoms: int = 4,
                    symmetric: bool = True, max_value: int = 6) -> Ensemble:
    """Seeded random ensemble with ``sum_k P(f_k != 0) <= 1`` and integer atom values.

    Symmetric laws are ``{0, +-a}``; a single-law ensemble may instead be
    ``{+-a, +-b}`` with no atom at 0. Non-symmetric laws carry up to
    ``max_atoms - 1`` distinct nonzero values plus 0.
    """
    rng = philox(seed, (index,))
    n = int(rng.integers(1, max_n + 1))
    if symmetric and n == 1 and max_atoms >= 4 and rng.random() < 0.3:
        a, b = rng.choice(np.arange(1, max_value + 1), 2, replace=False)
        t = float(rng.uniform(0.05, 0.95))
        atoms = ((-float(b), t / 2), (-float(a), (1 - t) / 2), (float(a), (1 - t) / 2), (float(b), t / 2))
        return Ensemble((DiscreteDistribution(atoms),), f"random-{seed}-{index}")
    support = float(rng.uniform(0.05, 1.0))
    weights = rng.dirichlet(np.ones(n)) * support
    laws = []
    for w in weights:
        w = float(w)
        if symmetric:
            a = float(rng.integers(1, max_value + 1))
            laws.append(DiscreteDistribution(((-a, w / 2), (0.0, 1.0 - w), (a, w / 2))))
        else:
            m = int(rng.integers(1, max_atoms))
            pool = np.array([v for v in range(-max_value, max_value + 1) if v != 0], dtype=float)
            vals = rng.choice(pool, m, replace=False)
            masses = rng.dirichlet(np.ones(m)) * w
            laws.append(DiscreteDistribution(((0.0, 1.0 - w),) + tuple(zip(vals.tolist(), masses.tolist()))))
    return Ensemble(tuple(laws), f"random-{seed}-{index}")


def binomial_ensemble(n: int, u=1.0) -> Ensemble:
    """``n`` independent indicators of mass ``u/n``; ``sum_k f_k ~ Binomial(n, u/n)``."""
    from fractions import Fraction

    mass = Fraction(u) / n if isinstance(u, (int, Fraction)) else u / n
    return Ensemble(tuple(bernoulli(mass) for _ in range(n)), f"binomial-{n}-{u}")


# -- corpus and audit -------------------------------------------------------------------------

def _fixture_dir(kind: str) -> Path:
    return Path(str(resources.files("kruglab") / "fixtures" / kind))


def fixture_laws() -> dict[str, DiscreteDistribution]:
    """The shipped fixture laws, keyed by file stem."""
    return {p.stem: DiscreteDistribution.from_json(p.read_text())
            for p in sorted(_fixture_dir("laws").glob("*.json"))}


def resolve_path(path) -> Path:
    """``path`` itself if it exists, else the same relative path inside the installed package."""
    path = Path(path)
    if not path.exists() and not path.is_absolute():
        packaged = Path(str(resources.files("kruglab"))) / path
        if packaged.exists():
            return packaged
    return path


def load_corpus(path=None) -> list[Ensemble]:
    """Ensembles from every ``*.json`` in ``path`` (default: the shipped corpus), sorted by file name."""
    if path is None:
        root = _fixture_dir("ensembles")
    else:
        root = resolve_path(path)
        if (root / "ensembles").is_dir():
            root = root / "ensembles"
    files = sorted(root.glob("*.json")) if root.is_dir() else [root]
    if not files:
        raise FileNotFoundError(f"no ensemble files under {root}")
    return [Ensemble.load(f) for f in files]


AUDIT_SPACES = (Lp(1), Lp(2), Lp(4), Lp(8), Lorentz(2), Marcinkiewicz(4), OrliczNq(1))
FALSIFY_CONSTANT = 0.01
ENUMERABLE_N = 3


def _ok(r: CheckReport) -> bool:
    return r.passed != bool(r.detail.get("expect_fail", False))


def audit_ensemble(ens: Ensemble, k_norms: dict, trials: int, seed: int,
                   constants: HarnessConstants = DEFAULT_CONSTANTS) -> list[CheckReport]:
    """All applicable checks on one ensemble, in a fixed order."""
    out: list[CheckReport] = []
    symmetric = ens.symmetric
    fits = check_assumption(ens).holds
    for space in AUDIT_SPACES:
        k = k_norms[str(space)]
        for tail in (("1", "2", "discrete2") if ens.mean_zero else ("1",)):
            r = rosenthal_check(ens, space, tail, 2.0 * k)
            r.detail["k_norm"] = k
            out.append(r)
        bad = rosenthal_check(ens, space, "1", FALSIFY_CONSTANT)
        bad.name += ":falsify"
        bad.detail["expect_fail"] = True
        out.append(bad)
        if symmetric and fits:
            out.append(prohorov_norm_check(ens, space))
    if fits:
        out.append(sup_vs_disjoint_check(ens))
        if symmetric:
            out.append(prohorov_check(ens))
    if symmetric and len(ens) <= ENUMERABLE_N:
        out.append(levy_check(ens))
    for space in (Lp(2), Lp(4)):
        mode = "exact" if len(ens) <= ENUMERABLE_N else "montecarlo"
        out.extend(maximal_check(ens, space, trials, seed, k_norms[str(space)], constants, mode))
    for q in (1, 2):
        out.append(lq_norm_check(ens, q, 8.0, trials, seed, constants.alpha_lq))
    for r in out:
        r.detail["ensemble"] = ens.name
    return out


def audit_random(seed: int, index: int) -> list[CheckReport]:
    """Exact checks on random ensemble ``index``: sup-vs-disjoint and Prohorov always,
    Levy and the lower maximal bound when the ensemble is small enough to enumerate."""
    ens = random_ensemble(seed, index)
    out = [sup_vs_disjoint_check(ens), prohorov_check(ens)]
    if len(ens) <= ENUMERABLE_N:
        out.append(levy_check(ens))
        out.append(maximal_lower_check(ens, Lp(4)))
    for r in out:
        r.detail["ensemble"] = ens.name
    return out


def _task(args) -> list[dict]:
    kind, payload, k_norms, trials, seed = args
    if kind == "fixture":
        reports = audit_ensemble(Ensemble.from_json(payload), k_norms, trials, seed)
    else:
        reports = audit_random(seed, payload)
    return [r.to_dict() for r in reports]


def run_audit(corpus=None, seed: int = 0, n_random: int = 1000, trials: int = 100_000,
              workers: int = 1) -> dict:
    """Run every check over the fixture corpus and ``n_random`` seeded random ensembles.

    The result depends only on ``(corpus, seed, n_random, trials)``; tasks are
    collected in submission order whatever ``workers`` is.
    """
    ensembles = load_corpus(corpus)
    spaces = {str(s): s for s in AUDIT_SPACES}
    k_norms = {name: empirical_kruglov_norm(s) for name, s in spaces.items()}
    tasks = [("fixture", json.dumps(e.to_json()), k_norms, trials, seed) for e in ensembles]
    tasks += [("random", i, k_norms, trials, seed) for i in range(n_random)]
    workers = max(1, min(int(workers), os.cpu_count() or 1))
    if workers == 1:
        results = [_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    reports = [r for chunk in results for r in chunk]
    summary: dict = {}
    for r in reports:
        key = r["name"].split("[")[0] + (":falsify" if r["detail"].get("expect_fail") else "")
        row = summary.setdefault(key, {"checks": 0, "ok": 0, "exact_failures": 0, "mc_failures": 0})
        row["checks"] += 1
        good = r["passed"] != bool(r["detail"].get("expect_fail", False))
        row["ok"] += good
        if not good:
            row["exact_failures" if r["mode"] == "exact" else "mc_failures"] += 1
    exact_failures = sum(v["exact_failures"] for v in summary.values())
    return {
        "schema": "kruglab.audit/1",
        "seed": seed,
        "n_random": n_random,
        "trials": trials,
        "ensembles": [e.name for e in ensembles],
        "k_norms": k_norms,
        "summary": dict(sorted(summary.items())),
        "exact_failures": exact_failures,
        "passed": exact_failures == 0,
        "reports": reports,
    }

"""Command-line front end.

    kruglab bounds --p 2,4,8,16,32,64 --format csv
    kruglab transform --law delta:1 --space lp:2
    kruglab norm --space lorentz:2 --step '[[0.25, 2], [0.5, 1]]'
    kruglab ratio --space lp:4 --space-out marc:4
    kruglab rosenthal --ensemble fixtures/ensembles/coins.json --space lp:4
    kruglab extremal --n 8 --u 1 --q 2 --p 16
    kruglab audit --seed 7 --output audit.json

Every command writes one JSON document (keys sorted) or a CSV table whose
first line is a ``# schema`` comment. Exit status: 0 success, 1 numerical
failure or failed check, 2 bad arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import __version__
from .constants import (
    binomial_extremal,
    bounds_csv,
    bounds_table,
    estimate_operator_norm,
    indicator_family,
    lq_lower_bound,
    lq_order_term,
    lq_profile,
    reference_rate,
    symmetric_family,
)
from .dist import DiscreteDistribution, binomial, bernoulli, delta, quantile_step, symmetric_two_point
from .harness import BudgetExceeded, empirical_kruglov_norm, load_corpus, resolve_path, rosenthal_check, run_audit
from .kruglov import KruglovConfig, transform
from .spaces import Lp, parse_space
from .stepfn import StepFunction

COMMANDS = ("norm", "transform", "bounds", "ratio", "rosenthal", "extremal", "audit")
DEFAULT_P_GRID = (2.0, 4.0, 8.0, 16.0, 32.0, 64.0)


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    """Everything a run needs; ``to_dict``/``from_dict`` round-trip exactly.

    Defaults: ``space="lp:2"``, ``tail_tol=1e-12``, ``trials=100000``,
    ``seed=0``, ``n_random=1000``, ``format="json"``, ``workers=1``.
    """

    command: str
    space: str = "lp:2"
    space_out: str | None = None
    law: str | None = None
    step: str | None = None
    ensemble: str | None = None
    corpus: str | None = None
    p_grid: tuple[float, ...] = DEFAULT_P_GRID
    q_grid: tuple[float, ...] = (1.0, 2.0)
    tail: str = "1"
    constant: float | None = None
    family: str = "indicator"
    n: int = 8
    u: float = 1.0
    tail_tol: float = 1e-12
    n_max: int | None = None
    trials: int = 100_000
    seed: int = 0
    n_random: int = 1000
    workers: int = 1
    output: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.format not in ("json", "csv"):
            raise UsageError("format must be json or csv")
        self.p_grid = tuple(float(x) for x in self.p_grid)
        self.q_grid = tuple(float(x) for x in self.q_grid)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["p_grid"] = list(self.p_grid)
        d["q_grid"] = list(self.q_grid)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise UsageError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    def kruglov_config(self) -> KruglovConfig:
        return KruglovConfig(n_max=self.n_max, tail_tol=self.tail_tol)


def parse_law(text: str) -> DiscreteDistribution:
    """``delta:c``, ``indicator:u[,a]``, ``sym:u[,a]``, ``binomial:n,p``, inline JSON or a JSON file."""
    text = text.strip()
    if text.startswith("{"):
        return DiscreteDistribution.from_json(text)
    if text.endswith(".json") or (":" not in text and resolve_path(text).exists()):
        return DiscreteDistribution.from_json(resolve_path(text).read_text())
    kind, _, rest = text.partition(":")
    args = [a for a in rest.split(",") if a]
    try:
        if kind == "delta" and len(args) == 1:
            return delta(float(args[0]))
        if kind == "indicator" and len(args) in (1, 2):
            return bernoulli(float(args[0]), float(args[1]) if len(args) > 1 else 1.0)
        if kind == "sym" and len(args) in (1, 2):
            return symmetric_two_point(float(args[0]), float(args[1]) if len(args) > 1 else 1.0)
        if kind == "binomial" and len(args) == 2:
            return binomial(int(args[0]), float(args[1]))
    except ValueError as exc:
        raise UsageError(f"bad law {text!r}: {exc}") from exc
    raise UsageError(f"cannot parse law {text!r}; expected delta:c, indicator:u, sym:u, binomial:n,p or JSON")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _workers(requested: int) -> int:
    cap = os.environ.get("KRUGLOV_THREADS")
    if cap:
        try:
            requested = min(requested, max(1, int(cap)))
        except ValueError:
            raise UsageError(f"KRUGLOV_THREADS must be an integer, got {cap!r}")
    return max(1, requested)


# -- commands -----------------------------------------------------------------

def _cmd_norm(cfg: RunConfig):
    space = parse_space(cfg.space)
    if cfg.step is not None:
        f = StepFunction.from_json(cfg.step)
    elif cfg.law is not None:
        f = quantile_step(parse_law(cfg.law))
    else:
        raise UsageError("norm needs --step or --law")
    return {"space": str(space), "norm": space.norm(f)}, True


def _cmd_transform(cfg: RunConfig):
    if cfg.law is None:
        raise UsageError("transform needs --law")
    d = parse_law(cfg.law)
    kc = cfg.kruglov_config()
    kd = transform(d, kc)
    space = parse_space(cfg.space)
    out = {
        "space": str(space),
        "norm": space.norm(quantile_step(kd)),
        "norm_upper": space.norm(quantile_step(kd, deficit_at="max")),
        "n_max": kc.n_max,
        "deficit": float(kd.deficit),
        "atoms": len(kd),
        "mass_at_zero": float(kd.mass_at(0)),
    }
    return out, True


def _cmd_bounds(cfg: RunConfig):
    return bounds_table(cfg.p_grid), True


def _cmd_ratio(cfg: RunConfig):
    space_in = parse_space(cfg.space)
    space_out = parse_space(cfg.space_out or cfg.space)
    families = {"indicator": indicator_family, "symmetric": symmetric_family}
    if cfg.family not in families:
        raise UsageError(f"family must be one of {sorted(families)}")
    report = estimate_operator_norm(space_in, space_out, families[cfg.family](), cfg.kruglov_config())
    return report.to_dict(), report.consistent


def _cmd_rosenthal(cfg: RunConfig):
    if cfg.ensemble is None:
        raise UsageError("rosenthal needs --ensemble")
    found = load_corpus(cfg.ensemble)
    if len(found) != 1:
        raise UsageError("--ensemble must name one ensemble file")
    ens = found[0]
    space = parse_space(cfg.space)
    k = empirical_kruglov_norm(space)
    constant = 2.0 * k if cfg.constant is None else cfg.constant
    report = rosenthal_check(ens, space, cfg.tail, constant)
    report.detail["k_norm"] = k
    return report.to_dict(), report.passed


def _cmd_extremal(cfg: RunConfig):
    taus, fstar = binomial_extremal(cfg.n, cfg.u)
    rows = {"n": cfg.n, "u": cfg.u, "taus": [float(t) for t in taus],
            "fstar": json.loads(fstar.dumps()), "profiles": []}
    for q in cfg.q_grid:
        prof = lq_profile(cfg.n, cfg.u, q)
        for p in cfg.p_grid:
            rows["profiles"].append({
                "q": q, "p": p,
                "profile_norm": Lp(p).norm(prof),
                "order_term": lq_order_term(p, q).value,
                "lower_bound": lq_lower_bound(p, q).value,
                "rate": reference_rate(p) ** (1.0 / q),
            })
    return rows, True


def _cmd_audit(cfg: RunConfig):
    report = run_audit(cfg.corpus, cfg.seed, cfg.n_random, cfg.trials, _workers(cfg.workers))
    return report, report["passed"]


HANDLERS = {
    "norm": _cmd_norm, "transform": _cmd_transform, "bounds": _cmd_bounds, "ratio": _cmd_ratio,
    "rosenthal": _cmd_rosenthal, "extremal": _cmd_extremal, "audit": _cmd_audit,
}


# -- output -------------------------------------------------------------------

def _csv(command: str, result) -> str:
    if command == "bounds":
        return bounds_csv(result)
    buf = io.StringIO()
    buf.write(f"# kruglab.{command}/1\n")
    if command == "audit":
        cols = ["name", "ensemble", "mode", "lhs", "rhs", "constant_used", "margin", "passed"]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in result["reports"]:
            w.writerow([r["name"], r["detail"].get("ensemble", ""), r["mode"], repr(r["lhs"]),
                        repr(r["rhs"]), repr(r["constant_used"]), repr(r["margin"]), r["passed"]])
        return buf.getvalue()
    if command == "extremal":
        cols = ["q", "p", "profile_norm", "order_term", "lower_bound", "rate"]
        rows = result["profiles"]
    else:
        flat = {k: v for k, v in result.items() if not isinstance(v, (dict, list))}
        cols, rows = sorted(flat), [flat]
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def render(cfg: RunConfig, result) -> str:
    if cfg.format == "csv":
        return _csv(cfg.command, result)
    return json.dumps(result, sort_keys=True, indent=1) + "\n"


def run(cfg: RunConfig) -> int:
    """Execute ``cfg``, write the report, return the exit status."""
    try:
        result, ok = HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"kruglab: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, BudgetExceeded, OverflowError) as exc:
        print(f"kruglab: numerical failure: {exc}", file=sys.stderr)
        return 1
    except (ValueError, FileNotFoundError) as exc:
        print(f"kruglab: {exc}", file=sys.stderr)
        return 2
    text = render(cfg, result)
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kruglab", description="Kruglov operator bounds and inequality audits.")
    ap.add_argument("--version", action="version", version=f"kruglab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--output", "-o")
        p.add_argument("--config", help="JSON RunConfig; command-line flags override it")
        p.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")
        p.add_argument("--tail-tol", dest="tail_tol", type=float)
        p.add_argument("--n-max", dest="n_max", type=int)
        return p

    p = common(sub.add_parser("norm", help="norm of a step function or of |X| for a law"))
    p.add_argument("--space")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--step", help="JSON [[length, value], ...]")
    g.add_argument("--law")

    p = common(sub.add_parser("transform", help="norm of K f for a law f"))
    p.add_argument("--law")
    p.add_argument("--space")

    p = common(sub.add_parser("bounds", help="closed-form bounds over a p grid"))
    p.add_argument("--p", dest="p_grid", type=_floats)

    p = common(sub.add_parser("ratio", help="empirical ||K||_{X->Y} over a test family"))
    p.add_argument("--space")
    p.add_argument("--space-out", dest="space_out")
    p.add_argument("--family", choices=("indicator", "symmetric"))

    p = common(sub.add_parser("rosenthal", help="Rosenthal-type check on an ensemble file"))
    p.add_argument("--ensemble")
    p.add_argument("--space")
    p.add_argument("--tail", choices=("1", "2", "discrete2"))
    p.add_argument("--constant", type=float, help="default: 2 x the empirical ||K|| for the space")

    p = common(sub.add_parser("extremal", help="binomial extremal and l_q profile norms"))
    p.add_argument("--n", type=int)
    p.add_argument("--u", type=float)
    p.add_argument("--q", dest="q_grid", type=_floats)
    p.add_argument("--p", dest="p_grid", type=_floats)

    p = common(sub.add_parser("audit", help="run every check on the corpus and random ensembles"))
    p.add_argument("--corpus")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-random", dest="n_random", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int)
    return ap


_NOT_CONFIG = {"config", "dump_config"}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if ns.config:
        data = json.loads(Path(ns.config).read_text())
        if data.get("command", ns.command) != ns.command:
            raise UsageError(f"config is for {data['command']!r}, not {ns.command!r}")
    for k, v in vars(ns).items():
        if k not in _NOT_CONFIG and v is not None:
            data[k] = v
    return RunConfig.from_dict(data)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except (UsageError, TypeError, json.JSONDecodeError, OSError) as exc:
        print(f"kruglab: {exc}", file=sys.stderr)
        return 2
    if ns.dump_config:
        sys.stdout.write(json.dumps(cfg.to_dict(), sort_keys=True, indent=1) + "\n")
        return 0
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

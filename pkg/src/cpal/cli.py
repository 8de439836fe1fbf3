"""``cpal`` command line: reduce, simulate, integrate, solve, sweep, stability,
enumerate and reproduce.

Exit codes: 0 ok, 1 failed reproduction check, 2 invalid input,
3 numerical failure, 4 no convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import acceptance
from .dynamics import IntegrationError, SimConfig, integrate, simulate, simulate_batch
from .equilibrium import (
    ConstructionError,
    NoMixedEquilibrium,
    SolverError,
    beta_sweep,
    construct_strict_pure_VE,
    enumerate_pure_VE,
    find_all,
    geometric_betas,
    mixed_limit_solve,
    solve_fixed_point,
)
from .linalg import EigenError
from .stability import report
from .tree import (
    RawTree,
    ReducedTree,
    TreeValidationError,
    dump_tree,
    format_number,
    load_tree,
    parse_number,
    reduce,
    shift_unary_payoffs,
)

EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC, EXIT_NOCONV = 1, 2, 3, 4


class UsageError(ValueError):
    pass


def _threads_default() -> int:
    raw = os.environ.get("CPAL_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _vector(text: str | None, n: int, what: str):
    if text is None:
        return None
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from exc
    if len(vals) != n:
        raise UsageError(f"{what}: expected {n} values, got {len(vals)}")
    return np.array(vals)


def _positive(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return x


def _nonneg(text: str) -> float:
    x = float(text)
    if not x >= 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return x


class Runner:
    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.out = Path(args.out)

    def say(self, text: str = "") -> None:
        if not self.args.quiet:
            print(text)

    def write_json(self, name: str, doc) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        path.write_text(json.dumps(doc, indent=2) + "\n")
        self.say(f"wrote {path}")
        return path

    def tree(self) -> tuple[RawTree | ReducedTree, ReducedTree]:
        src = load_tree(self.args.tree)
        t = reduce(src) if isinstance(src, RawTree) else src
        z = getattr(self.args, "z_shift", None)
        if z:
            t = shift_unary_payoffs(t, parse_number(z, "--z-shift"))
            src = t
        return src, t


def summary_table(t: ReducedTree) -> str:
    rows = [f"{'state':<24} {'prob':>12}  payoffs"]
    for i, s in enumerate(t.states):
        pays = ", ".join(f"{c}={format_number(s.payoffs[c])}" for c in t.classes if c in s.classes)
        rows.append(f"{t.state_label(i):<24} {str(format_number(s.prob)):>12}  {pays}")
    return "\n".join(rows)


def _fmt_vec(v) -> str:
    return "(" + ", ".join(f"{x:.6g}" for x in v) + ")"


# ------------------------------------------------------------------ commands


def cmd_reduce(r: Runner) -> int:
    _, t = r.tree()
    r.say(summary_table(t))
    r.out.mkdir(parents=True, exist_ok=True)
    path = r.out / "reduced.json"
    dump_tree(t, path)
    r.say(f"wrote {path}")
    return 0


def cmd_simulate(r: Runner) -> int:
    a = r.args
    src, t = r.tree()
    if a.mode == "raw" and not isinstance(src, RawTree):
        raise UsageError("--mode raw needs a raw (unreduced) tree file")
    cfg = SimConfig(beta=a.beta, horizon=a.horizon, step_rule=a.step_rule, alpha=a.alpha, gamma=a.gamma,
                    seed=a.seed, record_every=a.record_every, mode=a.mode)
    v0 = _vector(a.v0, t.n, "--v0")
    v0 = np.zeros(t.n) if v0 is None else v0
    traj = simulate(v0, cfg, src)
    r.out.mkdir(parents=True, exist_ok=True)
    traj.to_csv(r.out / "trajectory.csv")
    traj.events_to_csv(r.out / "events.csv")
    r.say(f"final valuations {_fmt_vec(traj.final)} after {a.horizon} rounds")
    if a.runs > 1:
        V = simulate_batch(v0, cfg, src, a.runs)
        lines = ["run," + ",".join(f"v_{c}" for c in t.classes)]
        lines += [f"{i}," + ",".join(format(x, ".17g") for x in row) for i, row in enumerate(V)]
        (r.out / "terminal.csv").write_text("\n".join(lines) + "\n")
        r.say(f"mean terminal valuations over {a.runs} runs {_fmt_vec(V.mean(axis=0))}")
    r.say(f"wrote {r.out / 'trajectory.csv'} and {r.out / 'events.csv'}")
    return 0


def cmd_integrate(r: Runner) -> int:
    a = r.args
    _, t = r.tree()
    v0 = _vector(a.v0, t.n, "--v0")
    v0 = np.zeros(t.n) if v0 is None else v0
    traj = integrate(v0, t, a.beta, a.t_end, a.h)
    r.out.mkdir(parents=True, exist_ok=True)
    traj.to_csv(r.out / "trajectory.csv")
    r.say(f"v({a.t_end:g}) = {_fmt_vec(traj.final)}")
    r.say(f"wrote {r.out / 'trajectory.csv'}")
    return 0


def _equilibrium_rows(eqs, t: ReducedTree, beta: float) -> list[str]:
    rows = []
    for e in eqs:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            verdict = report(e.v_star, t, beta).verdict
        rows.append(f"  {_fmt_vec(e.v_star):<40} {e.classification:<12} {verdict:<9} residual {e.residual:.2e}")
    return rows


def cmd_solve(r: Runner) -> int:
    a = r.args
    _, t = r.tree()
    v0 = _vector(a.v0, t.n, "--v0")
    if v0 is not None:
        eqs = [solve_fixed_point(v0, t, a.beta, a.tol)]
    else:
        eqs = find_all(t, a.beta, m=a.m, seed=a.seed, tol=a.tol, workers=a.threads)
    r.say(f"{len(eqs)} equilibri{'um' if len(eqs) == 1 else 'a'} at beta={a.beta:g}")
    for row in _equilibrium_rows(eqs, t, a.beta):
        r.say(row)
    r.write_json("equilibria.json", [e.to_dict(t) for e in eqs])
    if a.mixed_limit:
        ml = mixed_limit_solve(t)
        r.say(f"mixed limit: q={ml.q:.15g} v={ml.valuation:.15g}")
        r.write_json("mixed_limit.json", {"q": ml.q, "valuation": ml.valuation, "probabilities": ml.probabilities})
    return 0


def cmd_sweep(r: Runner) -> int:
    a = r.args
    _, t = r.tree()
    start = a.seed_beta if a.seed_beta is not None else a.beta_start
    if start > a.beta_stop:
        raise UsageError("--seed-beta/--beta-start must not exceed --beta-stop")
    betas = geometric_betas(start, a.beta_stop, a.ratio)
    v0 = _vector(a.v0, t.n, "--v0")
    seeds = [v0] if v0 is not None else find_all(t, betas[0], m=a.m, seed=a.seed, workers=a.threads)
    paths = beta_sweep(t, betas, seeds)
    doc = []
    for i, p in enumerate(paths):
        last_beta = p.betas[-1] if p.points else float("nan")
        final = _fmt_vec(p.final.v_star) if p.points else "-"
        label = p.limit_label if p.points else "-"
        r.say(f"path {i}: {len(p.points)} points, beta up to {last_beta:g}, {p.termination}; final {final} {label}")
        doc.append({"termination": p.termination, "error": p.error, "points": p.to_list(t)})
    r.write_json("paths.json", doc)
    return 0


def cmd_stability(r: Runner) -> int:
    a = r.args
    _, t = r.tree()
    v = _vector(a.v, t.n, "--v")
    points = [v] if v is not None else [e.v_star for e in find_all(t, a.beta, m=a.m, seed=a.seed, workers=a.threads)]
    docs = []
    for x in points:
        rep = report(x, t, a.beta)
        lam = ", ".join(f"{z.real:.6g}{z.imag:+.3g}j" if z.imag else f"{z.real:.6g}" for z in rep.eigenvalues)
        r.say(f"{_fmt_vec(x)}: {rep.verdict} (abscissa {rep.spectral_abscissa:.6g}; eigenvalues {lam})")
        d = rep.to_dict()
        d["point"] = [float(y) for y in x]
        d["beta"] = a.beta
        docs.append(d)
    r.write_json("stability.json", docs if v is None else docs[0])
    return 0


def cmd_enumerate(r: Runner) -> int:
    _, t = r.tree()
    ves = enumerate_pure_VE(t)
    r.say(f"{len(ves)} pure equilibri{'um' if len(ves) == 1 else 'a'} ({sum(v.strict for v in ves)} strict)")
    for ve in ves:
        r.say(f"  {' > '.join(ve.order):<30} {_fmt_vec(ve.valuations)} margin {ve.margin:.4g}")
    doc = {
        "pure_equilibria": [
            {"order": list(ve.order), "valuations": [float(x) for x in ve.valuations], "strict": ve.strict,
             "margin": ve.margin, "choices": ve.choices}
            for ve in ves
        ]
    }
    if r.args.construct:
        try:
            ve = construct_strict_pure_VE(t)
            doc["constructed"] = {"order": list(ve.order), "valuations": [float(x) for x in ve.valuations]}
            r.say(f"construction: {' > '.join(ve.order)} {_fmt_vec(ve.valuations)}")
        except ConstructionError as exc:
            doc["constructed"] = None
            r.say(f"construction failed: {exc}")
    r.write_json("pure_equilibria.json", doc)
    return 0


def cmd_reproduce(r: Runner) -> int:
    a = r.args
    overrides = acceptance.mutated_trees(a.mutate) if a.mutate else None
    only = [int(x) for x in a.only.split(",")] if a.only else None
    echo = None if (a.quiet or a.json) else print
    checks = acceptance.run_all(overrides, only, echo)
    failed = [c for c in checks if not c.passed]
    doc = {"passed": not failed, "checks": [c.to_dict() for c in checks]}
    if a.json:
        print(json.dumps(doc, indent=2))
    else:
        r.say(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    if a.save:
        r.write_json("reproduce.json", doc)
    return EXIT_FAIL if failed else 0


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--out", default="out", help="output directory (default ./out)")
    common.add_argument("--quiet", action="store_true", help="suppress stdout tables")
    common.add_argument("--threads", type=int, default=_threads_default(),
                        help="worker cap for multistart solves (default $CPAL_THREADS or 1)")

    with_tree = argparse.ArgumentParser(add_help=False, parents=[common])
    with_tree.add_argument("tree", help="tree JSON file (raw or reduced)")
    with_tree.add_argument("--z-shift", default=None, help="add this to every single-class state payoff")

    p = argparse.ArgumentParser(prog="cpal", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("reduce", parents=[with_tree], help="aggregate a raw tree over class sets")

    s = sub.add_parser("simulate", parents=[with_tree], help="run the stochastic learning process")
    s.add_argument("--beta", type=_nonneg, required=True)
    s.add_argument("--horizon", type=int, default=10_000)
    s.add_argument("--step-rule", choices=["harmonic", "constant", "power"], default="harmonic")
    s.add_argument("--alpha", type=float, default=0.1, help="step for the constant rule")
    s.add_argument("--gamma", type=float, default=1.0, help="exponent for the power rule")
    s.add_argument("--record-every", type=int, default=1)
    s.add_argument("--mode", choices=["reduced", "raw"], default="reduced")
    s.add_argument("--v0", help="comma-separated initial valuations (default zeros)")
    s.add_argument("--runs", type=int, default=1, help="also write terminal.csv over this many runs")

    s = sub.add_parser("integrate", parents=[with_tree], help="RK4 integration of the mean-field ODE")
    s.add_argument("--beta", type=_nonneg, required=True)
    s.add_argument("--t-end", type=_nonneg, default=50.0)
    s.add_argument("--h", type=_positive, default=0.01)
    s.add_argument("--v0")

    s = sub.add_parser("solve", parents=[with_tree], help="find smooth equilibria at one beta")
    s.add_argument("--beta", type=_nonneg, required=True)
    s.add_argument("--m", type=int, default=64, help="random multistart points")
    s.add_argument("--tol", type=_positive, default=1e-12)
    s.add_argument("--v0", help="solve from this start only")
    s.add_argument("--mixed-limit", action="store_true", help="two-class trees: also solve the indifference limit")

    s = sub.add_parser("sweep", parents=[with_tree], help="follow equilibria along increasing beta")
    s.add_argument("--beta-start", type=_positive, default=1.0)
    s.add_argument("--beta-stop", type=_positive, default=1e4)
    s.add_argument("--ratio", type=float, default=1.5)
    s.add_argument("--seed-beta", type=_positive, default=None, help="seed paths with find_all at this beta")
    s.add_argument("--m", type=int, default=64)
    s.add_argument("--v0", help="single path from this start")

    s = sub.add_parser("stability", parents=[with_tree], help="Jacobian spectrum at equilibria or a given point")
    s.add_argument("--beta", type=_nonneg, required=True)
    s.add_argument("--v", help="comma-separated point (default: every equilibrium find_all returns)")
    s.add_argument("--m", type=int, default=64)

    s = sub.add_parser("enumerate", parents=[with_tree], help="pure equilibria by ranking enumeration")
    s.add_argument("--construct", action="store_true", help="also run the greedy strict construction")

    s = sub.add_parser("reproduce", parents=[common], help="run the reproduction checks")
    s.add_argument("--json", action="store_true", help="machine-readable results on stdout")
    s.add_argument("--mutate", choices=["z2=5"], help="corrupt a built-in tree to confirm the checks can fail")
    s.add_argument("--only", help="comma-separated check numbers")
    s.add_argument("--save", action="store_true", help="also write reproduce.json under --out")
    return p


COMMANDS = {
    "reduce": cmd_reduce,
    "simulate": cmd_simulate,
    "integrate": cmd_integrate,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "stability": cmd_stability,
    "enumerate": cmd_enumerate,
    "reproduce": cmd_reproduce,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return COMMANDS[args.command](Runner(args))
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except (IntegrationError, EigenError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (TreeValidationError, UsageError, NoMixedEquilibrium, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

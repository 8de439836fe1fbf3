"""Equilibria of the three two-class illustration trees across beta.

Writes one CSV row per (tree, beta, equilibrium) with its classification and
stability verdict, plus the closed-form indifference limits.
"""

import argparse
import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from cpal import trees
from cpal.equilibrium import NoMixedEquilibrium, find_all, mixed_limit_solve
from cpal.stability import report


@dataclass
class Config:
    betas: list[float] = field(default_factory=lambda: [1.0, 5.0, 20.0, 50.0, 200.0, 1e3, 1e4])
    m: int = 64
    seed: int = 0
    out: Path = Path("out/illustrations")


TREES = {
    "multiplicity": trees.multiplicity_tree,
    "unique_mixed": trees.unique_mixed_tree,
    "unique_pure": trees.unique_pure_tree,
}


def main(cfg: Config) -> None:
    cfg.out.mkdir(parents=True, exist_ok=True)
    rows = []
    for name, make in TREES.items():
        t = make()
        for beta in cfg.betas:
            for e in find_all(t, beta, m=cfg.m, seed=cfg.seed):
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    rep = report(e.v_star, t, beta)
                rows.append([name, beta, *e.v_star, e.classification, rep.verdict, rep.spectral_abscissa])
        try:
            ml = mixed_limit_solve(t)
            print(f"{name:<14} indifference limit q={ml.q:.6f} v={ml.valuation:.6f}")
        except NoMixedEquilibrium:
            print(f"{name:<14} no indifference limit")
    path = cfg.out / "equilibria.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tree", "beta", "v_L", "v_R", "classification", "verdict", "abscissa"])
        w.writerows(rows)
    for name in TREES:
        counts = [sum(1 for r in rows if r[0] == name and r[1] == b) for b in cfg.betas]
        print(f"{name:<14} equilibria per beta: {counts}")
    print(f"wrote {path}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Config.out)
    a = p.parse_args()
    main(Config(m=a.m, seed=a.seed, out=a.out))

"""Continuation paths in beta for the illustration trees, one CSV per tree."""

import argparse
import csv
from dataclasses import dataclass
from pathlib import Path

from cpal import trees
from cpal.equilibrium import beta_sweep, find_all, geometric_betas


@dataclass
class Config:
    seed_beta: float = 50.0
    beta_stop: float = 1e4
    ratio: float = 1.25
    out: Path = Path("out/sweeps")


def main(cfg: Config) -> None:
    cfg.out.mkdir(parents=True, exist_ok=True)
    for name, t in [("multiplicity", trees.multiplicity_tree()), ("unique_mixed", trees.unique_mixed_tree())]:
        betas = geometric_betas(cfg.seed_beta, cfg.beta_stop, cfg.ratio)
        paths = beta_sweep(t, betas, find_all(t, cfg.seed_beta))
        path = cfg.out / f"{name}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["path", "beta", *(f"v_{c}" for c in t.classes), "classification"])
            for i, p in enumerate(paths):
                for b, e in p.points:
                    w.writerow([i, b, *e.v_star, e.classification])
                print(f"{name} path {i}: {p.termination}, ends at {p.final.v_star.round(6)} ({p.limit_label})")
        print(f"wrote {path}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed-beta", type=float, default=Config.seed_beta)
    p.add_argument("--beta-stop", type=float, default=Config.beta_stop)
    p.add_argument("--ratio", type=float, default=Config.ratio)
    p.add_argument("--out", type=Path, default=Config.out)
    a = p.parse_args()
    main(Config(a.seed_beta, a.beta_stop, a.ratio, a.out))

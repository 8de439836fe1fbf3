"""Distance of simulated valuations from the smooth equilibrium as the horizon grows.

Runs a batch of independent learners on the unique-mixed tree and records the
mean and spread of the sup-norm error at several horizons.
"""

import argparse
import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from cpal import trees
from cpal.dynamics import SimConfig, simulate_batch
from cpal.equilibrium import find_all


@dataclass
class Config:
    beta: float = 50.0
    horizons: list[int] = field(default_factory=lambda: [100, 1_000, 10_000, 100_000])
    runs: int = 100
    seed: int = 0
    step_rule: str = "harmonic"
    out: Path = Path("out/simulation")


def main(cfg: Config) -> None:
    t = trees.unique_mixed_tree()
    (eq,) = find_all(t, cfg.beta)
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / "error_vs_horizon.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["horizon", "mean_err", "p90_err", "max_err"])
        for h in cfg.horizons:
            sim = SimConfig(beta=cfg.beta, horizon=h, seed=cfg.seed, step_rule=cfg.step_rule)
            V = simulate_batch(np.zeros(t.n), sim, t, cfg.runs)
            err = np.max(np.abs(V - eq.v_star), axis=1)
            w.writerow([h, err.mean(), np.quantile(err, 0.9), err.max()])
            print(f"horizon {h:>7}: mean error {err.mean():.4f}, 90% {np.quantile(err, 0.9):.4f}")
    print(f"wrote {path}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--beta", type=float, default=Config.beta)
    p.add_argument("--runs", type=int, default=Config.runs)
    p.add_argument("--seed", type=int, default=Config.seed)
    p.add_argument("--out", type=Path, default=Config.out)
    a = p.parse_args()
    main(Config(beta=a.beta, runs=a.runs, seed=a.seed, out=a.out))

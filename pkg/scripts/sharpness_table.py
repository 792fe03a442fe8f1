"""Lower-bound chain for the extremal family over a (lambda, q) grid.

For each pair prints the smallest divided-difference slack, the smallest
slack of the scaled max-modulus bound, the floor of y + lambda ln r, and the
exponent fitted on the top decade.

    python3 scripts/sharpness_table.py
"""
import argparse
from dataclasses import dataclass

from qdurrmeyer.extremal import lower_bound_check
from qdurrmeyer.growth import default_grid
from qdurrmeyer.qcore import QContext


@dataclass(frozen=True)
class SharpnessConfig:
    lambdas: tuple = (1.25, 1.5, 2.0, 3.0, 4.0)
    qs: tuple = (0.3, 0.5, 0.8)
    r_max: float = 1e10
    points: int = 40


def run(cfg: SharpnessConfig) -> None:
    grid = default_grid(1e1, cfg.r_max, cfg.points)
    print("lambda,q,dd_slack,bound_slack_min,shifted_min,lambda_hat,passed")
    for lam in cfg.lambdas:
        for q in cfg.qs:
            rep = lower_bound_check(lam, grid, QContext(q))
            print(f"{lam},{q},{rep.divdiff_slack:.3g},{rep.bound_slack.min():.4g},"
                  f"{rep.shifted.min():.4g},{rep.lambda_hat:.4f},{rep.passed}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lambdas", type=float, nargs="+", default=list(SharpnessConfig.lambdas))
    ap.add_argument("--qs", type=float, nargs="+", default=list(SharpnessConfig.qs))
    args = ap.parse_args()
    run(SharpnessConfig(lambdas=tuple(args.lambdas), qs=tuple(args.qs)))

"""How much precision the divided differences at 1, q, ..., q^k burn.

For each k prints the digits lost to cancellation in the node sum
(log10 of sum |w_j A_j| over |sum w_j A_j|), the working precision chosen by
taylor_coeffs, and the gap between the extended contour route and the node
sum.  Small q and large k are the expensive corner.

    python3 scripts/divdiff_conditioning.py --f exp --q 0.3 0.5 0.8
"""
import argparse
import math
from dataclasses import dataclass

import mpmath

from qdurrmeyer.durrmeyer import coeff_A_mp
from qdurrmeyer.funcspace import sample
from qdurrmeyer.qcore import QContext
from qdurrmeyer.taylor import (GFunction, contour_radius, divdiff_contour, explicit_weights,
                               taylor_coeffs)


@dataclass(frozen=True)
class ConditioningConfig:
    spec: str = "exp"
    qs: tuple = (0.3, 0.5, 0.8)
    k_max: int = 20


def digits_lost(k, q, values, dps):
    with mpmath.workdps(dps):
        terms = [w * v for w, v in zip(explicit_weights(k, q, dps), values)]
        total = abs(mpmath.fsum(terms))
        mass = mpmath.fsum(abs(t) for t in terms)
        return math.inf if total == 0 else float(mpmath.log10(mass / total))


def run(cfg: ConditioningConfig) -> None:
    print("q,k,divdiff,digits_lost,work_dps,contour_rel_gap")
    for q in cfg.qs:
        ctx = QContext(q)
        ext = ctx.replace(precision_tier="extended")
        gf = sample(cfg.spec, ctx)
        series = taylor_coeffs(gf, cfg.k_max, ext)
        values = coeff_A_mp(gf, cfg.k_max, series.dps)
        gvec = GFunction(gf, ctx)
        R = contour_radius(gf, ext)
        for k in range(cfg.k_max + 1):
            dd = float(series.divdiffs[k])
            cont = float(divdiff_contour(gvec, k, R, ctx=ext).real)
            gap = abs(cont - dd) / max(abs(dd), 1e-300)
            lost = digits_lost(k, q, values[:k + 1], series.dps)
            print(f"{q},{k},{dd:.6e},{lost:.1f},{series.dps},{gap:.2e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--f", default=ConditioningConfig.spec)
    ap.add_argument("--q", type=float, nargs="+", default=list(ConditioningConfig.qs))
    ap.add_argument("--k-max", type=int, default=ConditioningConfig.k_max)
    args = ap.parse_args()
    run(ConditioningConfig(args.f, tuple(args.q), args.k_max))

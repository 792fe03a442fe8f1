"""Command-line front end (``qdurr``).

Exit codes: 0 success, 1 a verification failed, 2 usage or input error,
3 I/O error.  Tables go to ``--out`` (written atomically) or stdout.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field

from .qcore import QContext, QError
from .funcspace import parse_spec, sample, sample_for_growth

COMMANDS = ("eval", "coeffs", "taylor", "growth", "sharpness", "verify")
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

DEFAULTS = {
    "q": None, "f": None, "x": None, "z": None, "rep": None, "k_max": 20,
    "r_min": 1e1, "r_max": 1e10, "r_points": 40, "lambda": 2.0, "angles": 1024,
    "precision": "standard", "out": None, "format": "csv", "suite": "all",
    "eps_term": 1e-17, "eps_tail": 1e-16, "dps": 40,
}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    ctx: QContext
    params: dict = field(default_factory=dict)
    out: str | None = None
    format: str = "csv"


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _json_num(x):
    v = float(_fmt(x))
    return v if math.isfinite(v) else str(v)


def render(fields, rows, fmt: str) -> str:
    if fmt == "csv":
        lines = [",".join(fields)]
        lines += [",".join(v if isinstance(v, str) else (str(v) if isinstance(v, int) else _fmt(v))
                           for v in row) for row in rows]
        return "\n".join(lines) + "\n"
    objs = [json.dumps({k: (v if isinstance(v, (int, str)) else _json_num(v))
                        for k, v in zip(fields, row)}) for row in rows]
    return "[\n" + ",\n".join(objs) + "\n]\n"


def write_atomic(path: str, text: str) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(folder):
        raise FileNotFoundError(f"cannot write {path}: directory {folder} does not exist")
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".qdurr-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(cfg: RunConfig, fields, rows) -> None:
    text = render(fields, rows, cfg.format)
    if cfg.out:
        write_atomic(cfg.out, text)
    else:
        sys.stdout.write(text)


# --- commands ----------------------------------------------------------------

def _need(params, key, flag):
    if params.get(key) is None:
        raise UsageError(f"{flag} is required for this command")
    return params[key]


def _function(cfg):
    return parse_spec(_need(cfg.params, "f", "--f"))


def _parse_complex(text) -> complex:
    try:
        re_s, im_s = str(text).split(",")
        return complex(float(re_s), float(im_s))
    except ValueError:
        raise UsageError(f"--z expects 're,im', got {text!r}") from None


def cmd_eval(cfg: RunConfig) -> int:
    from .durrmeyer import eval_entire, eval_interval
    from .taylor import eval_taylor, taylor_series_for

    p = cfg.params
    spec = _function(cfg)
    if (p.get("x") is None) == (p.get("z") is None):
        raise UsageError("give exactly one of --x and --z")
    rep = p.get("rep") or ("interval" if p.get("x") is not None else "entire")
    if rep not in ("interval", "entire", "taylor"):
        raise UsageError("--rep must be interval, entire or taylor")
    z = complex(float(p["x"])) if p.get("x") is not None else _parse_complex(p["z"])
    gf = sample(spec, cfg.ctx)
    if rep == "interval":
        if z.imag != 0 or not 0 <= z.real <= 1:
            raise UsageError("the interval representation needs a real x in [0,1]")
        val = complex(eval_interval(gf, z.real, cfg.ctx))
    elif rep == "entire":
        val = eval_entire(gf, z, cfg.ctx)
    else:
        val = eval_taylor(taylor_series_for(gf, cfg.ctx, max(abs(z), 1.0)), z)
    if p.get("x") is not None:
        print(f"{val.real:.15g}")
        fields, row = ("x", "value"), (z.real, val.real)
    else:
        print(f"{val.real:.15g},{val.imag:.15g}")
        fields, row = ("z_re", "z_im", "value_re", "value_im"), (z.real, z.imag, val.real, val.imag)
    if cfg.out:
        emit(cfg, fields, [row])
    return EXIT_OK


def cmd_coeffs(cfg: RunConfig) -> int:
    from .durrmeyer import coeff_vector

    K = int(cfg.params["k_max"])
    if K < 0:
        raise UsageError("--k-max must be nonnegative")
    A = coeff_vector(sample(_function(cfg), cfg.ctx), K, cfg.ctx)
    emit(cfg, ("k", "A_k"), [(k, a) for k, a in enumerate(A)])
    return EXIT_OK


def cmd_taylor(cfg: RunConfig) -> int:
    from .taylor import taylor_coeffs

    K = int(cfg.params["k_max"])
    if K < 1:
        raise UsageError("--k-max must be at least 1")
    ext = cfg.ctx.replace(precision_tier="extended")
    series = taylor_coeffs(sample(_function(cfg), cfg.ctx), K, ext)
    emit(cfg, ("k", "c_k", "err_k"),
         [(k, c, e) for k, (c, e) in enumerate(zip(series.coeffs, series.errors))])
    return EXIT_OK


def _grid(p):
    import numpy as np

    r_min, r_max, n = float(p["r_min"]), float(p["r_max"]), int(p["r_points"])
    if not 0 < r_min < r_max or n < 2:
        raise UsageError("need 0 < --r-min < --r-max and --r-points >= 2")
    return np.geomspace(r_min, r_max, n)


def cmd_growth(cfg: RunConfig) -> int:
    from .growth import CSV_FIELDS, growth_profile

    grid = _grid(cfg.params)
    gf = sample_for_growth(_function(cfg), cfg.ctx, float(grid[-1]))
    prof = growth_profile(gf, grid, cfg.ctx, n_angles=int(cfg.params["angles"]))
    emit(cfg, CSV_FIELDS, list(prof.rows()))
    if math.isfinite(prof.lambda_fit):
        print(f"lambda_fit {prof.lambda_fit:.6g} residual {prof.residual:.3g}", file=sys.stderr)
    return EXIT_OK


def cmd_sharpness(cfg: RunConfig) -> int:
    from .extremal import lower_bound_check

    lam = float(cfg.params["lambda"])
    grid = _grid(cfg.params)
    rep = lower_bound_check(lam, grid, cfg.ctx, n_angles=int(cfg.params["angles"]))
    prof = rep.profile
    rows = [(r, y, y - s, s, u) for r, y, s, u in zip(grid, prof.y, rep.bound_slack, rep.shifted)]
    emit(cfg, ("r", "y", "lower_bound", "slack", "y_plus_lambda_log_r"), rows)
    print(f"divided differences >= (alpha q)^k: {'PASS' if rep.divdiffs_ok else 'FAIL'} "
          f"(min slack {rep.divdiff_slack:.3g})", file=sys.stderr)
    print(f"max-modulus lower bound: {'PASS' if rep.bound_ok else 'FAIL'} "
          f"(min slack {rep.bound_slack.min():.3g})", file=sys.stderr)
    print(f"y + lambda ln r bounded below: {'PASS' if rep.bounded_below else 'FAIL'} "
          f"(inf {rep.c_estimate:.6g} vs floor {rep.floor:.6g})", file=sys.stderr)
    print(f"lambda_hat {rep.lambda_hat:.6g}", file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_verify(cfg: RunConfig) -> int:
    from .verify import SUITES, run_suite

    suite = cfg.params.get("suite") or "all"
    if suite not in SUITES:
        raise UsageError(f"--suite must be one of {', '.join(SUITES)}")
    results = run_suite(suite, cfg.ctx)
    for res in results:
        print(res.line())
    passed = sum(r.ok for r in results)
    print(f"{passed}/{len(results)} checks passed")
    return EXIT_OK if passed == len(results) else EXIT_FAIL


HANDLERS = {"eval": cmd_eval, "coeffs": cmd_coeffs, "taylor": cmd_taylor,
            "growth": cmd_growth, "sharpness": cmd_sharpness, "verify": cmd_verify}


# --- argument handling -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    a = common.add_argument
    a("--q", type=float)
    a("--f")
    a("--x", type=float)
    a("--z")
    a("--rep", choices=("interval", "entire", "taylor"))
    a("--k-max", dest="k_max", type=int)
    a("--r-min", dest="r_min", type=float)
    a("--r-max", dest="r_max", type=float)
    a("--r-points", dest="r_points", type=int)
    a("--lambda", dest="lambda", type=float)
    a("--angles", type=int)
    a("--precision", choices=("standard", "extended"))
    a("--out")
    a("--format", choices=("csv", "json"))
    a("--config")
    a("--suite")
    parser = argparse.ArgumentParser(prog="qdurr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def load_config(path: str) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def make_config(args: argparse.Namespace) -> RunConfig:
    """Flags override the config file, which overrides the defaults."""
    merged = dict(DEFAULTS)
    if args.config:
        merged.update(load_config(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    if merged["q"] is None:
        raise UsageError("--q is required")
    try:
        q = float(merged["q"])
    except (TypeError, ValueError):
        raise UsageError("q must lie in (0,1)") from None
    ctx = QContext(q, eps_term=float(merged["eps_term"]), eps_tail=float(merged["eps_tail"]),
                   precision_tier=merged["precision"], dps=int(merged["dps"]))
    params = {k: merged[k] for k in DEFAULTS
              if k not in ("q", "out", "format", "precision", "eps_term", "eps_tail", "dps")}
    if merged["format"] not in ("csv", "json"):
        raise UsageError("--format must be csv or json")
    return RunConfig(args.command, ctx, params, merged["out"], merged["format"])


def run(cfg: RunConfig) -> int:
    return HANDLERS[cfg.command](cfg)


def _glue_values(argv):
    # "--z -3,2" would read as an unknown option; bind the value explicitly
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--z":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--z={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_glue_values(argv))
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return run(make_config(args))
    except (UsageError, QError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

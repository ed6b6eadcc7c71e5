"""Command-line entry point.

Every subcommand resolves its settings as defaults < ``--config`` JSON file
< explicit flags, prints the resolved settings as JSON to stderr and writes
its result to stdout (or ``--out``).
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .dro import AmbiguitySpec
from .errors import RateDroError
from .harness import (
    ExperimentConfig,
    HalfSpaceEvent,
    frontier,
    newsvendor_scenario,
    run_curve,
    sanov_check,
    write_csv,
)
from .processes import FiniteIidModel
from .rates import RateSpec, conjugate_check, conjugate_grid

_CURVE_PREDICTORS = ("empirical", "penalized", "entropy", "wasserstein", "moment")

DEFAULTS = {
    "newsvendor": {
        "predictor": "empirical",
        "radius": 0.0,
        "moments": 4,
        "tgrid": list(range(10, 201, 10)),
        "trials": 1000,
        "seed": 0,
        "out": None,
        "workers": 1,
    },
    "frontier": {
        "predictors": ["entropy", "wasserstein"],
        "radii": [0.0, 0.02, 0.05, 0.1],
        "moments": 4,
        "tgrid": list(range(10, 201, 10)),
        "trials": 1000,
        "seed": 0,
        "out": None,
        "workers": 1,
    },
    "sanov-check": {
        "theta": [0.7, 0.3],
        "coeffs": [1.0, 0.0],
        "threshold": 0.85,
        "tgrid": list(range(20, 121, 20)),
        "trials": 100000,
        "seed": 0,
        "workers": 1,
    },
    "conjugate-check": {"family": "bernoulli", "theta": [0.3], "nuisance": None, "points": 20, "tol": 1e-6},
    "rate-eval": {"kind": "relative_entropy", "s": None, "theta": None, "sigma": None, "family": None, "nuisance": None},
}


def _floats(text: str):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str):
    return [int(v) for v in text.split(",") if v.strip()]


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _names(text: str):
    return [v.strip() for v in text.split(",") if v.strip()]


def _parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    p = argparse.ArgumentParser(prog="ratedro", description="Rate-optimal DRO experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_out=True):
        sp.add_argument("--config", default=S, help="JSON file with settings; flags override it")
        sp.add_argument("--tgrid", type=_ints, default=S, help="comma-separated horizons")
        sp.add_argument("--trials", type=int, default=S)
        sp.add_argument("--seed", type=_u64, default=S)
        sp.add_argument("--workers", type=int, default=S, help="worker processes for trial simulation")
        if with_out:
            sp.add_argument("--out", default=S, help="CSV path (default: stdout)")

    nv = sub.add_parser("newsvendor", help="disappointment curve on the newsvendor scenario")
    common(nv)
    nv.add_argument("--predictor", choices=_CURVE_PREDICTORS, default=S)
    nv.add_argument("--radius", type=float, default=S)
    nv.add_argument("--moments", type=int, default=S)

    fr = sub.add_parser("frontier", help="decay rate versus in-sample cost over a radius grid")
    common(fr)
    fr.add_argument("--radii", type=_floats, default=S)
    fr.add_argument("--predictors", type=_names, default=S)
    fr.add_argument("--moments", type=int, default=S)

    sc = sub.add_parser("sanov-check", help="measured versus predicted decay of a half-space event")
    common(sc, with_out=False)
    sc.add_argument("--theta", type=_floats, default=S)
    sc.add_argument("--coeffs", type=_floats, default=S)
    sc.add_argument("--threshold", type=float, default=S)

    cc = sub.add_parser("conjugate-check", help="closed-form Cramer rate versus numerical conjugate")
    cc.add_argument("--config", default=S)
    cc.add_argument("--family", default=S)
    cc.add_argument("--theta", type=_floats, default=S)
    cc.add_argument("--nuisance", type=float, default=S)
    cc.add_argument("--points", type=int, default=S)
    cc.add_argument("--tol", type=float, default=S)

    re_ = sub.add_parser("rate-eval", help="evaluate one rate function I(s, theta)")
    re_.add_argument("--config", default=S)
    re_.add_argument("--kind", default=S)
    re_.add_argument("--s", type=_floats, default=S)
    re_.add_argument("--theta", type=_floats, default=S)
    re_.add_argument("--sigma", type=_floats, default=S, help="covariance, row-major")
    re_.add_argument("--family", default=S)
    re_.add_argument("--nuisance", type=float, default=S)
    return p


def resolve(argv=None):
    """Parse ``argv`` and merge defaults, config file and flags."""
    ns = vars(_parser().parse_args(argv))
    command = ns.pop("command")
    cfg = dict(DEFAULTS[command])
    path = ns.pop("config", None)
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            loaded = json.load(fh)
        unknown = sorted(set(loaded) - set(cfg))
        if unknown:
            raise SystemExit(f"ratedro {command}: unknown config keys: {', '.join(unknown)}")
        cfg.update(loaded)
    cfg.update(ns)
    return command, cfg


def _spec(name: str, radius: float, moments: int) -> AmbiguitySpec:
    return AmbiguitySpec(name, radius, moments=moments)


def _emit(records, out, schema):
    if out is None:
        write_csv(records, sys.stdout, schema)
    else:
        write_csv(records, out, schema)


def _newsvendor(cfg):
    model, table = newsvendor_scenario()
    spec = _spec(cfg["predictor"], cfg["radius"], cfg["moments"])
    config = ExperimentConfig(model, table, [spec], cfg["tgrid"], cfg["trials"], cfg["seed"], workers=cfg["workers"])
    _emit(run_curve(config).points, cfg["out"], "curve")
    return 0


def _frontier(cfg):
    model, table = newsvendor_scenario()
    bases = [_spec(name, 0.0, cfg["moments"]) for name in cfg["predictors"]]
    config = ExperimentConfig(model, table, bases, cfg["tgrid"], cfg["trials"], cfg["seed"], workers=cfg["workers"])
    _emit(frontier(config, cfg["radii"]), cfg["out"], "frontier")
    return 0


def _json_float(v: float):
    return v if math.isfinite(v) else str(v)


def _sanov(cfg):
    model = FiniteIidModel(np.asarray(cfg["theta"], float))
    event = HalfSpaceEvent(np.asarray(cfg["coeffs"], float), float(cfg["threshold"]))
    measured, predicted = sanov_check(model, event, cfg["tgrid"], cfg["trials"], cfg["seed"], cfg["workers"])
    rel = abs(measured.rate - predicted) / predicted if predicted > 0 else None
    result = {
        "measured_rate": measured.rate,
        "r_squared": measured.r_squared,
        "points_used": measured.points_used,
        "predicted_rate": _json_float(predicted),
        "relative_error": rel,
    }
    print(json.dumps(result, indent=2))
    return 0


def _conjugate(cfg):
    theta = cfg["theta"]
    theta = theta[0] if isinstance(theta, list) and len(theta) == 1 else theta
    nuisance = cfg["nuisance"]
    if cfg["family"] == "binomial" and nuisance is not None:
        nuisance = int(nuisance)
    grid = conjugate_grid(cfg["family"], theta, nuisance, cfg["points"])
    rows = conjugate_check(cfg["family"], theta, nuisance, grid)
    worst = 0.0
    print("s,closed_form,numerical,abs_diff")
    for s, a, b in rows:
        diff = abs(a - b)
        worst = max(worst, diff)
        print(f"{float(s)!r},{a!r},{b!r},{diff!r}")
    ok = worst <= cfg["tol"]
    print(f"{'PASS' if ok else 'FAIL'} max_abs_diff={worst!r} tol={cfg['tol']!r}", file=sys.stderr)
    return 0 if ok else 1


def _rate_eval(cfg):
    if cfg["s"] is None or cfg["theta"] is None:
        raise SystemExit("ratedro rate-eval: --s and --theta are required")
    s, theta = np.asarray(cfg["s"], float), np.asarray(cfg["theta"], float)
    kind = cfg["kind"]
    nuisance = cfg["nuisance"]
    if kind == "gaussian_quadratic":
        sig = np.eye(s.size) if cfg["sigma"] is None else np.asarray(cfg["sigma"], float).reshape(s.size, s.size)
        nuisance = sig
    elif kind == "cramer" and cfg["family"] == "binomial" and nuisance is not None:
        nuisance = int(nuisance)
    if kind == "conditional_relative_entropy":
        m = int(round(math.sqrt(s.size)))
        s, theta = s.reshape(m, m), theta.reshape(m, m)
    if kind in ("ar_ls", "ar_yw", "cramer") and s.size == 1:
        s, theta = float(s[0]), float(theta[0])
    rate = RateSpec(kind, nuisance, cfg["family"])(s, theta)
    print(json.dumps({"kind": kind, "rate": _json_float(rate)}))
    return 0


_COMMANDS = {
    "newsvendor": _newsvendor,
    "frontier": _frontier,
    "sanov-check": _sanov,
    "conjugate-check": _conjugate,
    "rate-eval": _rate_eval,
}


def main(argv=None) -> int:
    command, cfg = resolve(argv)
    print(json.dumps({"command": command, **cfg}, indent=2, sort_keys=True), file=sys.stderr)
    try:
        return _COMMANDS[command](cfg)
    except (RateDroError, ValueError, TypeError, ArithmeticError) as exc:
        print(f"ratedro {command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ratedro {command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Batch front end: ``ctrfn <command> --config file.json [--out report.json] [--seed N]``.

Exit codes: 0 ok, 2 inconclusive, 1 error.  Reports are JSON with complex
numbers as ``[re, im]`` pairs and carry the tolerances they were computed with.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from itertools import product

import numpy as np

from .canonical import (
    canonical_decomposition,
    classify_degenerate,
    fibre_splitting,
    minimal_decompositions,
    multiplicities,
    unitary_part_dim,
    workspace,
)
from .charfn import AtLeast, MatrixPolynomial, defect_data, poly_degree, theta_at, theta_coeffs
from .coincide import NoCertificate, coincide, coincide_monomial, coincide_scalar
from .errors import ConfigError, CtrfnError, Inconclusive
from .models import MonomialParams, TabcParams, build_model, make_TA, make_Tabc
from .numlin import Tolerance, default_tolerance, matrix_to_json, rank_sequence
from .windowed import WindowVector, adjoint_apply, apply

COMMANDS = ("build", "charfn", "decompose", "coincide", "classify", "sweep", "verify")
EXIT = {"ok": 0, "error": 1, "inconclusive": 2}


def _cpx(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _tolerance(cfg: dict) -> Tolerance:
    t = cfg.get("tol")
    if t is None:
        return default_tolerance()
    if not isinstance(t, dict):
        raise ConfigError("tol must be an object with rank_tol / eq_tol")
    base = default_tolerance()
    try:
        return Tolerance(float(t.get("rank_tol", base.rank_tol)), float(t.get("eq_tol", base.eq_tol)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _int(cfg: dict, key: str, default: int) -> int:
    v = cfg.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise ConfigError(f"{key} must be a nonnegative integer")
    return v


def _model(cfg: dict, key: str = "model", tol=None):
    if key not in cfg:
        raise ConfigError(f"missing {key!r}")
    return build_model(cfg[key], tol)


def _degree_json(d):
    return {"at_least": d.n} if isinstance(d, AtLeast) else d


# ---------------------------------------------------------------------------
# commands; each returns (results, status)

def cmd_build(cfg, tol, seed):
    op = _model(cfg, tol=tol)
    dd = defect_data(op, tol)
    return {"operator": op.to_json(), "defect_dims": [dd.dom_dim, dd.cod_dim]}, "ok"


def cmd_charfn(cfg, tol, seed):
    op = _model(cfg, tol=tol)
    budget = _int(cfg, "budget", 16)
    dd = defect_data(op, tol)
    poly = theta_coeffs(op, budget, tol, dd)
    deg = poly_degree(op, budget, tol, dd)
    out = {"theta": poly.to_json(), "degree": _degree_json(deg),
           "coeffs_scalar": [_cpx(c[0, 0]) for c in poly.coeffs] if poly.dom_dim == poly.cod_dim == 1 else None}
    if "points" in cfg:
        out["values"] = [matrix_to_json(theta_at(op, complex(*z), budget, tol, dd)) for z in cfg["points"]]
    return out, "inconclusive" if isinstance(deg, AtLeast) else "ok"


def cmd_decompose(cfg, tol, seed):
    op = _model(cfg, tol=tol)
    radius = _int(cfg, "radius", 48)
    steps = cfg.get("steps")
    ws = workspace(op, radius, steps, tol=tol)
    frames = bool(cfg.get("frames", False))
    out = {}
    for v in cfg.get("variants", ["canonical", "star_canonical"]):
        out[v] = canonical_decomposition(op, v, ws=ws).to_json(frames)
    if cfg.get("minimal", True):
        d0, d1 = minimal_decompositions(op, ws=ws)
        k = max(1, d0.N_block.shape[0], d1.N_block.shape[0])
        out["minimal"] = {"N0_rank_sequence": rank_sequence(d0.N_block, k, tol),
                          "Nstar0_rank_sequence": rank_sequence(d1.N_block, k, tol),
                          "N0": matrix_to_json(d0.N_block), "Nstar0": matrix_to_json(d1.N_block)}
    if "splitting" in cfg:
        sp = cfg["splitting"]
        try:
            d = fibre_splitting(op, int(sp["h1_from"]), tuple(sp["h0"]), ws=ws)
        except (KeyError, TypeError) as exc:
            raise ConfigError("splitting needs h1_from and h0 = [lo, hi]") from exc
        out["user"] = d.to_json(frames)
    return out, "ok"


def _poly(spec, budget, tol):
    if isinstance(spec, dict) and "coeffs" in spec:
        try:
            return MatrixPolynomial.from_json(spec)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad polynomial JSON: {exc}") from exc
    return theta_coeffs(build_model(spec, tol), budget, tol)


def cmd_coincide(cfg, tol, seed):
    budget = _int(cfg, "budget", 16)
    if "p" not in cfg or "q" not in cfg:
        raise ConfigError("coincide needs 'p' and 'q'")
    p, q = _poly(cfg["p"], budget, tol), _poly(cfg["q"], budget, tol)
    res = coincide(p, q, restarts=_int(cfg, "restarts", 20), seed=seed, tol=tol)
    return res.to_json(), "inconclusive" if isinstance(res, NoCertificate) else "ok"


def cmd_classify(cfg, tol, seed):
    op = _model(cfg, tol=tol)
    c = classify_degenerate(op, _int(cfg, "radius", 48), cfg.get("steps"), tol)
    return c.to_json(), "ok"


def _tabc_point(point, checks, tol):
    aa, ab, arg_g, abs_g = point
    p = TabcParams.from_gamma(aa, ab, abs_g * np.exp(1j * arg_g))
    out = {"abs_a": aa, "abs_b": ab, "arg_gamma": arg_g, "abs_gamma": abs_g, "c": _cpx(p.c)}
    ok = True
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        op = make_Tabc(p, tol)
        if "charfn" in checks:
            poly = theta_coeffs(op, 4, tol)
            deg = poly_degree(op, 4, tol)
            expect = MatrixPolynomial.scalar(-p.a * p.b, -p.c)
            if poly.dom_dim == poly.cod_dim == 1:
                cert = coincide_scalar(poly, expect, tol)
                printed = coincide_scalar(poly, MatrixPolynomial.scalar(-p.a * p.b, p.c), tol)
                out["charfn"] = {"degree": _degree_json(deg), "coincide": bool(cert),
                                 "residual": getattr(cert, "residual", None),
                                 "coincides_with_minus_ab_plus_cz": bool(printed)}
                ok &= bool(cert)
            else:
                out["charfn"] = {"degree": _degree_json(deg), "defect_dims": [poly.dom_dim, poly.cod_dim]}
        if "unitary_part_dim" in checks:
            u = unitary_part_dim(op, 16, 48, tol)
            out["unitary_part_dim"] = u
            ok &= (u >= 1) if abs(abs(p.c) - 1) <= 1e-12 else (u == 0)
        if "multiplicities" in checks and abs(p.c) < 1:
            ws = workspace(op, 48, 24, tol=tol)
            m = [multiplicities(canonical_decomposition(op, v, ws=ws)) for v in ("canonical", "star_canonical")]
            out["multiplicities"] = [list(x) for x in m]
            ok &= m[0] == m[1] == (1, 1)
    out["pass"] = bool(ok)
    return out


def _monomial_point(point, checks, tol):
    (r, c), m, a = point
    out = {"shape": [r, c], "m": m, "A": matrix_to_json(a)}
    op = make_TA(MonomialParams(a, m), tol)
    ok = True
    poly = theta_coeffs(op, m + 2, tol)
    deg = poly_degree(op, m + 2, tol)
    out["degree"] = _degree_json(deg)
    ok &= deg == m
    if "charfn" in checks:
        target = MatrixPolynomial.from_coeffs([np.zeros((r, c))] * m + [a], tol)
        cert = coincide_monomial(poly, target, tol)
        out["coincide"] = {"ok": bool(cert), "residual": getattr(cert, "residual", None)}
        ok &= bool(cert) and cert.residual <= 1e-9
    if "unitary_part_dim" in checks:
        u = unitary_part_dim(op, 16, 48, tol)
        out["unitary_part_dim"] = u
        ok &= u == 0
    if "multiplicities" in checks:
        ws = workspace(op, 48, 24, tol=tol)
        ms = [multiplicities(canonical_decomposition(op, v, ws=ws)) for v in ("canonical", "star_canonical")]
        out["multiplicities"] = [list(x) for x in ms]
        ok &= ms[0] == ms[1] == (r, c)
    out["pass"] = bool(ok)
    return out


def _random_pure(rng, r, c, norm):
    a = rng.standard_normal((r, c)) + 1j * rng.standard_normal((r, c))
    return a * (norm / np.linalg.norm(a, 2))


def cmd_sweep(cfg, tol, seed):
    grid = cfg.get("grid")
    if not isinstance(grid, dict) or grid.get("family") not in ("tabc", "monomial"):
        raise ConfigError("sweep needs grid.family in {'tabc', 'monomial'}")
    checks = grid.get("checks", ["charfn"])
    if grid["family"] == "tabc":
        pts = list(product(grid.get("abs_a", []), grid.get("abs_b", []), grid.get("arg_gamma", [0.0]),
                           [grid.get("abs_gamma", 1.0)]))
        fn = _tabc_point
    else:
        rng = np.random.default_rng(seed)
        norm = float(grid.get("norm", 0.9))
        pts = [((r, c), m, _random_pure(rng, r, c, norm))
               for (r, c) in grid.get("shapes", []) for m in grid.get("m", [])
               for _ in range(int(grid.get("samples", 1)))]
        fn = _monomial_point
    with ThreadPoolExecutor(max_workers=_int(cfg, "workers", 4) or 1) as ex:
        results = list(ex.map(lambda p: fn(p, checks, tol), pts))
    passed = sum(r["pass"] for r in results)
    return {"points": results, "count": len(results), "passed": passed,
            "failed": len(results) - passed}, "ok" if passed == len(results) else "error"


def cmd_verify(cfg, tol, seed):
    """Model-level consistency checks: adjoint duality, Θ evaluation, decomposition invariants."""
    op = _model(cfg, tol=tol)
    rng = np.random.default_rng(seed)
    budget = _int(cfg, "budget", 32)
    radius = _int(cfg, "radius", 48)
    dd = defect_data(op, tol)
    checks = {}
    lo, hi = op.window[0] - 2, op.window[1] + 2
    worst = 0.0
    for _ in range(20):
        x = WindowVector({n: rng.standard_normal(op.dim(n)) + 1j * rng.standard_normal(op.dim(n))
                          for n in range(lo, hi + 1) if op.dim(n)})
        y = WindowVector({n: rng.standard_normal(op.dim(n)) + 1j * rng.standard_normal(op.dim(n))
                          for n in range(lo, hi + 1) if op.dim(n)})
        worst = max(worst, abs(apply(op, x).inner(y) - x.inner(adjoint_apply(op, y))))
    checks["adjoint_duality"] = {"max_error": worst, "tol": 1e-12, "pass": worst <= 1e-12}
    deg = poly_degree(op, budget, tol, dd)
    status = "ok"
    if isinstance(deg, AtLeast):
        checks["degree"] = {"at_least": deg.n, "pass": None}
        status = "inconclusive"
    else:
        poly = theta_coeffs(op, max(deg, 1), tol, dd)
        err = 0.0
        for _ in range(5):
            z = 0.8 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
            err = max(err, float(np.linalg.norm(theta_at(op, z, budget, tol, dd) - poly(z))))
        checks["theta_consistency"] = {"max_error": err, "tol": 1e-9, "pass": err <= 1e-9}
        checks["degree"] = {"value": deg, "pass": True}
        if deg >= 1 and dd.dom_dim and dd.cod_dim:
            ws = workspace(op, radius, cfg.get("steps"), tol=tol)
            ds = [canonical_decomposition(op, v, ws=ws) for v in ("canonical", "star_canonical")]
            tri = max(d.checks["triangularity"] for d in ds)
            checks["triangularity"] = {"max": tri, "tol": 1e-9, "pass": tri <= 1e-9}
            mults = [multiplicities(d) for d in ds]
            checks["multiplicity_invariance"] = {"values": [list(m) for m in mults], "pass": mults[0] == mults[1]}
            d0, d1 = minimal_decompositions(op, ws=ws)
            k = max(1, d0.N_block.shape[0], d1.N_block.shape[0])
            r0, r1 = rank_sequence(d0.N_block, k, tol), rank_sequence(d1.N_block, k, tol)
            checks["quasi_similarity"] = {"N0": r0, "Nstar0": r1, "pass": r0 == r1}
    if any(c.get("pass") is False for c in checks.values()):
        status = "error"
    return checks, status


HANDLERS = {"build": cmd_build, "charfn": cmd_charfn, "decompose": cmd_decompose, "coincide": cmd_coincide,
            "classify": cmd_classify, "sweep": cmd_sweep, "verify": cmd_verify}


def run(config: dict, seed: int | None = None):
    """Execute one config; returns ``(report, exit_code)`` and never raises."""
    report = {"command": None, "status": "error", "results": None, "warnings": []}
    try:
        if not isinstance(config, dict):
            raise ConfigError("config must be a JSON object")
        command = config.get("command")
        report["command"] = command
        if command not in HANDLERS:
            raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
        seed = seed if seed is not None else config.get("seed", 0)
        tol = _tolerance(config)
        report["seed"] = seed
        report["tolerance"] = {"rank_tol": tol.rank_tol, "eq_tol": tol.eq_tol}
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            results, status = HANDLERS[command](config, tol, seed)
        report["warnings"] = sorted({str(w.message) for w in caught})
        report["results"], report["status"] = results, status
    except Inconclusive as exc:
        report["status"] = "inconclusive"
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
    except (CtrfnError, ValueError, KeyError, TypeError) as exc:
        report["status"] = "error"
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
    return report, EXIT[report["status"]]


def _default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, (complex, np.complexfloating)):
        return _cpx(o)
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="ctrfn", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON config file")
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args(argv)
    try:
        with open(args.config) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        report = {"command": args.command, "status": "error",
                  "error": {"type": "ConfigError", "message": str(exc)}}
        code = 1
    else:
        if isinstance(config, dict):
            config = {**config, "command": args.command}
        report, code = run(config, args.seed)
    text = json.dumps(report, sort_keys=True, indent=2, default=_default)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

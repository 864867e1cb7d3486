"""Command-line entry point: ``rittlab <subcommand> ...``.

Exit status: 0 for results (including negative certificates and
not-applicable verdicts), 2 when an inconsistent verdict was found, 1 on
input errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import admissibility as adm
from . import rademacher as rad
from . import report, zoo
from .calculus import frac_power
from .errors import HypothesisViolation, RittLabError
from .linalg import (
    NormedSpace,
    ObservationSpec,
    decode_matrix,
    observation_from_json,
    observation_to_json,
    operator_from_json,
    operator_to_json,
)
from .ritt import certify_ritt

EXIT_OK, EXIT_INPUT, EXIT_INCONSISTENT = 0, 1, 2


class InputError(Exception):
    pass


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc


def _operator(path):
    try:
        return operator_from_json(_read_json(path))
    except (KeyError, ValueError) as exc:
        raise InputError(f"bad operator JSON in {path}: {exc}") from exc


def _obs(path, T):
    if path is None:
        return ObservationSpec.identity(T.space)
    try:
        return observation_from_json(_read_json(path), T.space)
    except (KeyError, ValueError) as exc:
        raise InputError(f"bad observation JSON in {path}: {exc}") from exc


def _space(p, dim):
    if p is None or p == 2.0:
        return NormedSpace.hilbert(dim)
    return NormedSpace.lp(dim, p)


def _pnum(text):
    t = str(text).lower()
    if t in ("inf", "infinity"):
        return math.inf
    try:
        return float(t)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text}") from exc


def _vectors(obj):
    """A list of vectors, entries either numbers or [re, im] pairs."""
    arr = np.asarray(obj, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(complex)
    raise InputError("vectors must be a list of equal-length vectors")


def _vector(obj, dim):
    arr = np.asarray(obj, dtype=float)
    if arr.ndim == 2 and arr.shape[-1] == 2:
        v = arr[:, 0] + 1j * arr[:, 1]
    elif arr.ndim == 1:
        v = arr.astype(complex)
    else:
        raise InputError("vector must be a list of numbers or [re, im] pairs")
    if v.shape != (dim,):
        raise InputError(f"vector has length {v.size}, expected {dim}")
    return v


# ---------------------------------------------------------------------------
# subcommands; each returns (result dict, exit status)
# ---------------------------------------------------------------------------

def cmd_certify(args):
    T = _operator(args.operator)
    cert = certify_ritt(T, with_sector=not args.no_sector)
    return cert.as_dict(), EXIT_OK


def cmd_frac_power(args):
    T = _operator(args.operator)
    B = np.eye(T.dim) - np.asarray(T.matrix)
    out = {}
    methods = ["eigen", "contour"] if args.method == "both" else [args.method]
    for m in methods:
        out[m] = frac_power(B, args.a, m).as_dict()
    if len(methods) == 2:
        out["agreement"] = float(np.linalg.norm(
            decode_matrix(out["eigen"]["value"]) - decode_matrix(out["contour"]["value"]), 2))
    return out, EXIT_OK


def cmd_admissibility(args):
    T = _operator(args.operator)
    C = _obs(args.observation, T)
    return adm.admissibility_constant(T, C, args.alpha, seed=args.seed).as_dict(), EXIT_OK


def cmd_square_function(args):
    T = _operator(args.operator)
    out = {"constant": adm.square_function_constant(T, args.a, seed=args.seed).as_dict()}
    if args.vector is not None:
        x = _vector(json.loads(args.vector), T.dim)
        out["norm"] = adm.square_function_norm(T, args.a, x)
    return out, EXIT_OK


def cmd_weiss(args):
    T = _operator(args.operator)
    C = _obs(args.observation, T)
    res = adm.weiss_constant(T, C, args.alpha, args.beta, rings=args.rings, rtol=args.tol)
    if args.profile:
        report.write_profile(args.profile, res.grid.profile)
    return res.as_dict(), EXIT_OK


def _verify_one(T, C, args):
    v = adm.verify_weiss_theorem(T, C, args.alpha, args.beta, rtol=args.tol)
    rec = v.as_dict()
    if v.verdict == "inconsistent":
        rec["reproduce"] = {
            "operator": operator_to_json(T),
            "observation": observation_to_json(C),
            "alpha": args.alpha,
            "beta": args.beta,
            "seed": args.seed,
        }
    return rec, v.verdict


def cmd_verify(args):
    records = []
    if args.zoo_manifest or args.operator is None:
        entries = [e for e in zoo.load_zoo(args.zoo_manifest) if e.operator.space.is_hilbert]
        if args.role != "all":
            entries = [e for e in entries if _role(args, e.name) == args.role]
        for e in entries:
            for name, C in zoo.standard_observations(e, seed=args.seed).items():
                rec, _ = _verify_one(e.operator, C, args)
                rec["entry"], rec["observation"] = e.name, name
                records.append(rec)
    else:
        T = _operator(args.operator)
        rec, _ = _verify_one(T, _obs(args.observation, T), args)
        records.append(rec)
    counts = {k: sum(r["verdict"] == k for r in records) for k in ("consistent", "inconsistent", "not-applicable")}
    status = EXIT_INCONSISTENT if counts["inconsistent"] else EXIT_OK
    return {"summary": counts, "records": records}, status


_ROLE_CACHE = {}


def _role(args, name):
    key = args.zoo_manifest
    if key not in _ROLE_CACHE:
        _ROLE_CACHE[key] = {r["name"]: r.get("role") for r in zoo.load_manifest(key)}
    return _ROLE_CACHE[key].get(name)


def cmd_rad_norm(args):
    data = _read_json(args.vectors)
    if isinstance(data, dict):
        data = data["vectors"]
    Y = _vectors(data)
    space = _space(args.p, Y.shape[1])
    return rad.rad_norm(Y, space, args.method, samples=args.samples, seed=args.seed).as_dict(), EXIT_OK


def cmd_r_bound(args):
    data = _read_json(args.family)
    if isinstance(data, dict):
        data = data["family"]
    try:
        fam = [decode_matrix(m) for m in data]
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    m, n = fam[0].shape
    est = rad.r_bound_estimate(fam, _space(args.p, n), _space(args.q if args.q is not None else args.p, m),
                               trials=args.trials, seed=args.seed)
    out = est.as_dict()
    out["witness"] = est.witness
    return out, EXIT_OK


def cmd_r_admissibility(args):
    T = _operator(args.operator)
    C = _obs(args.observation, T)
    return rad.r_admissibility_constant(T, C, args.alpha, seed=args.seed).as_dict(), EXIT_OK


def cmd_r_ritt(args):
    T = _operator(args.operator)
    try:
        horizons = tuple(int(h) for h in args.horizons.split(","))
    except ValueError as exc:
        raise InputError(f"--horizons must be a comma-separated list of integers: {exc}") from exc
    if len(horizons) < 2 or any(h < 1 for h in horizons) or list(horizons) != sorted(horizons):
        raise InputError("--horizons needs at least two increasing positive integers")
    return rad.r_ritt_check(T, trials=args.trials, seed=args.seed, horizons=horizons), EXIT_OK


def cmd_zoo(args):
    if args.zoo_command == "list":
        rows = []
        for r in zoo.load_manifest(args.manifest):
            rows.append({"name": r["name"], "role": r.get("role"), "family": r["family"], "seed": r.get("seed"),
                         "norm": r.get("norm", "hilbert"), "expected": zoo.build_entry(r).expected})
        return {"entries": rows}, EXIT_OK
    try:
        e = zoo.get_entry(args.name, args.manifest, args.seed)
    except KeyError as exc:
        raise InputError(str(exc)) from exc
    obj = operator_to_json(e.operator)
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(obj, fh, indent=1)
    return {"entry": e.name, "seed": e.seed, "expected": e.expected, "operator": obj}, EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _common(p, seed=True):
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--tol", type=float, default=0.005, help="relative refinement tolerance")
    if seed:
        p.add_argument("--seed", type=int, default=0)


def build_parser():
    ap = argparse.ArgumentParser(prog="rittlab", description="Numerical checks of admissibility for Ritt operators.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify-ritt", help="power bound, Ritt and resolvent constants, sector type")
    p.add_argument("operator")
    p.add_argument("--no-sector", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("frac-power", help="(I - T)^a by eigen-decomposition and/or contour quadrature")
    p.add_argument("operator")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--method", choices=["eigen", "contour", "auto", "both"], default="both")
    _common(p)
    p.set_defaults(func=cmd_frac_power)

    p = sub.add_parser("admissibility", help="alpha-admissibility constant M")
    p.add_argument("operator")
    p.add_argument("--observation")
    p.add_argument("--alpha", type=float, default=0.0)
    _common(p)
    p.set_defaults(func=cmd_admissibility)

    p = sub.add_parser("square-function", help="square function constant (and norm of --vector)")
    p.add_argument("operator")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--vector", help="JSON list: numbers or [re, im] pairs")
    _common(p)
    p.set_defaults(func=cmd_square_function)

    p = sub.add_parser("weiss-sup", help="Weiss supremum K over the disc")
    p.add_argument("operator")
    p.add_argument("--observation")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--rings", type=int, default=adm.WEISS_RINGS)
    p.add_argument("--profile", help="CSV file for radius,angle,value rows")
    _common(p)
    p.set_defaults(func=cmd_weiss)

    p = sub.add_parser("verify-theorem", help="finiteness agreement of M and K")
    p.add_argument("operator", nargs="?")
    p.add_argument("--observation")
    p.add_argument("--zoo-manifest", help="run over a manifest (default: the shipped one when no operator is given)")
    p.add_argument("--role", default="ritt_hilbert", help="manifest role filter, or 'all'")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.0)
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rad-norm", help="Rademacher average of a list of vectors")
    p.add_argument("vectors", help="JSON list of vectors, or {'vectors': [...]}")
    p.add_argument("--p", type=_pnum, default=None, help="l^p norm (default Hilbert)")
    p.add_argument("--method", choices=["auto", "exhaustive", "monte_carlo", "closed_form"], default="auto")
    p.add_argument("--samples", type=int, default=rad.MC_SAMPLES)
    _common(p)
    p.set_defaults(func=cmd_rad_norm)

    p = sub.add_parser("r-bound", help="R-bound lower estimate of a matrix family")
    p.add_argument("family", help="JSON list of matrices in [[[re, im]]] form")
    p.add_argument("--p", type=_pnum, default=None)
    p.add_argument("--q", type=_pnum, default=None)
    p.add_argument("--trials", type=int, default=24)
    _common(p)
    p.set_defaults(func=cmd_r_bound)

    p = sub.add_parser("r-admissibility", help="R-admissibility constant estimate")
    p.add_argument("operator")
    p.add_argument("--observation")
    p.add_argument("--alpha", type=float, default=0.0)
    _common(p)
    p.set_defaults(func=cmd_r_admissibility)

    p = sub.add_parser("r-ritt", help="R-bound estimates of {T^k} and {k(T^k - T^(k-1))}")
    p.add_argument("operator")
    p.add_argument("--trials", type=int, default=16)
    p.add_argument("--horizons", default=",".join(str(h) for h in rad.RITT_HORIZONS),
                   help="increasing truncation horizons, comma separated")
    _common(p)
    p.set_defaults(func=cmd_r_ritt)

    p = sub.add_parser("zoo", help="list or emit zoo operators")
    zs = p.add_subparsers(dest="zoo_command", required=True)
    q = zs.add_parser("list")
    q.add_argument("--manifest")
    _common(q, seed=False)
    q = zs.add_parser("emit")
    q.add_argument("name")
    q.add_argument("--manifest")
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("-o", "--output")
    _common(q, seed=False)
    p.set_defaults(func=cmd_zoo)
    return ap


def _config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        result, status = args.func(args)
    except (InputError, HypothesisViolation, RittLabError, ValueError) as exc:
        rep = report.build_report(args.command, _config(args), {"error": f"{type(exc).__name__}: {exc}"},
                                  time.perf_counter() - t0)
        report.write_report(rep, getattr(args, "out", None))
        return EXIT_INPUT
    rep = report.build_report(args.command, _config(args), result, time.perf_counter() - t0)
    report.write_report(rep, getattr(args, "out", None))
    return status


if __name__ == "__main__":
    sys.exit(main())

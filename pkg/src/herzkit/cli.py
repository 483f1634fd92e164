"""Batch front-end: build or load a function, run one operation, emit a report.

Exit codes: 0 success, 2 parse error (bad flags/files), 3 precondition or
domain error, 4 truncation-threshold breach in strict mode.  Reports are
deterministic (sorted keys, recorded seeds, no timestamps) and written
atomically; identical configuration and input give byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from ._backend import backend_name
from .anisotropy import AnisotropyVector
from .catalog import BUILTIN_NAMES, build
from .errors import (
    HerzkitError,
    InputDomainError,
    ParseError,
    TruncationBreach,
)
from .hardy_atoms import SchwartzWindow, atomic_decompose, herz_hardy_norm
from .herz import (
    HerzParams,
    block_decompose,
    herz_norm,
    params_to_json,
)
from .littlewood_paley import g_function, g_star, laplacian_of_gaussian, lusin_area, mexican_hat
from .mixed_norm import ExponentVector, mixed_lebesgue_norm
from .sampled_function import Grid, SampledFunction, truncation_fraction
from .verify import SUITES
from .weights_maximal import (
    BallFamily,
    OperatorReport,
    cz_apply,
    fractional_integral,
    fractional_maximal,
    hilbert_kernel,
    hl_maximal,
    validate_kernel,
)

DEFAULTS = {
    "grid": "129",
    "L": "4",
    "q": "2",
    "a": None,  # isotropic
    "alpha": "0.0",
    "p": "2",
    "window": "-6:4",
    "homogeneous": True,
    "format": "json",
    "seed": "0",
    "threads": "1",
    "truncation_threshold": "1e-6",
    "stride": "1",
    "geometry": "euclidean",
    "boundary": "zero",
    "radii": "auto",
    "frac_alpha": "0.5",
    "op": "maximal",
    "kernel": "hilbert",
    "fn": "g",
    "aperture": "1.0",
    "lam": "2.0",
    "jmin": "-5",
    "jmax": "3",
    "suite": "rubio",
    "B": "auto",
    "K": "12",
    "k_range": "-6:3",
}


def _parse_ints_x(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.lower().split("x"))
    except ValueError as exc:
        raise ParseError(f"bad grid spec {text!r}") from exc


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(math.inf if t.strip() in ("inf", "Inf") else float(t) for t in text.split(","))
    except ValueError as exc:
        raise ParseError(f"bad number list {text!r}") from exc


def _parse_window(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError as exc:
        raise ParseError(f"bad window spec {text!r} (want lo:hi)") from exc


def _read_config(path: str) -> dict:
    cfg = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ParseError(f"{path}:{lineno}: expected 'key = value'")
                key, val = line.split("=", 1)
                cfg[key.strip().replace("-", "_")] = val.strip()
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    return cfg


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="herzkit",
        description="Anisotropic mixed-norm Herz space computations on sampled functions.",
    )
    ap.add_argument("--version", action="version", version=f"herzkit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", help="sampled function file (.json or .csv)")
        p.add_argument("--builtin", choices=BUILTIN_NAMES, help="builtin function name")
        p.add_argument("--fparam", action="append", default=[],
                       help="builtin parameter key=value (repeatable)")
        p.add_argument("--grid", help="points per axis, e.g. 129 or 129x129")
        p.add_argument("--L", help="box half-width per axis, e.g. 6 or 6,4")
        p.add_argument("--a", help="anisotropy exponents, e.g. 2,1")
        p.add_argument("--q", help="mixed-norm exponents, e.g. 2,3 (inf allowed)")
        p.add_argument("--output", help="report file (or directory for decompositions)")
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--config", help="key = value config file merged under flags")
        p.add_argument("--seed", help="random seed recorded in the report")
        p.add_argument("--threads", help="worker hint recorded in the report")
        p.add_argument("--strict", action="store_const", const=True,
                       help="exit 4 when truncation loss exceeds the threshold")
        p.add_argument("--truncation-threshold", dest="truncation_threshold")

    def herzopts(p):
        p.add_argument("--alpha")
        p.add_argument("--p")
        p.add_argument("--window", help="dyadic window lo:hi")
        p.add_argument("--non-homogeneous", dest="homogeneous", action="store_const",
                       const=False)

    p = sub.add_parser("norm", help="mixed Lebesgue norm")
    common(p)

    p = sub.add_parser("herz", help="Herz norm")
    common(p)
    herzopts(p)

    p = sub.add_parser("maximal", help="Hardy-Littlewood maximal function")
    common(p)
    p.add_argument("--geometry", choices=("euclidean", "anisotropic"))
    p.add_argument("--boundary", choices=("zero", "periodic"))
    p.add_argument("--stride")
    p.add_argument("--radii", help="comma list or 'auto'")

    p = sub.add_parser("fractional", help="fractional maximal/integral operator")
    common(p)
    p.add_argument("--op", choices=("maximal", "integral"))
    p.add_argument("--frac-alpha", dest="frac_alpha")
    p.add_argument("--geometry", choices=("euclidean", "anisotropic"))
    p.add_argument("--boundary", choices=("zero", "periodic"))
    p.add_argument("--stride")
    p.add_argument("--radii")

    p = sub.add_parser("cz", help="singular integral operator")
    common(p)
    p.add_argument("--kernel", choices=("hilbert",))

    p = sub.add_parser("lp", help="Littlewood-Paley square functions")
    common(p)
    p.add_argument("--fn", choices=("g", "s", "gstar"))
    p.add_argument("--aperture")
    p.add_argument("--lam")
    p.add_argument("--jmin")
    p.add_argument("--jmax")

    p = sub.add_parser("decompose", help="central block decomposition")
    common(p)
    herzopts(p)

    p = sub.add_parser("atoms", help="atomic decomposition (Hardy side)")
    common(p)
    herzopts(p)
    p.add_argument("--k-range", dest="k_range", help="radial-maximal scale window lo:hi")

    p = sub.add_parser("verify", help="run a verification suite")
    common(p)
    p.add_argument("--suite", choices=tuple(SUITES))
    p.add_argument("--B")
    p.add_argument("--K")
    return ap


_BOOL_KEYS = ("strict", "homogeneous")


def _resolve(args: argparse.Namespace) -> dict:
    opts = vars(args).copy()
    cfg = _read_config(opts["config"]) if opts.get("config") else {}
    for key, val in cfg.items():
        if key not in opts:
            raise ParseError(f"unknown config key {key!r}")
        if opts[key] in (None, []):
            opts[key] = val
    for key, val in DEFAULTS.items():
        if opts.get(key, None) in (None, []):
            opts[key] = val
    if opts.get("strict") is None:
        opts["strict"] = False
    for key in _BOOL_KEYS:
        v = opts.get(key)
        if isinstance(v, str):
            if v.strip().lower() in ("1", "true", "yes", "on"):
                opts[key] = True
            elif v.strip().lower() in ("0", "false", "no", "off"):
                opts[key] = False
            else:
                raise ParseError(f"bad boolean value {v!r} for {key!r}")
    return opts


def _load_function(opts: dict) -> tuple[SampledFunction, dict]:
    meta = {
        "input_path": opts.get("input"),
        "builtin": opts.get("builtin"),
        "fparams": {},
    }
    if opts.get("input"):
        f = SampledFunction.load(opts["input"])
        meta["grid"] = {"half_width": list(f.grid.half_width),
                        "points_per_axis": list(f.grid.points_per_axis)}
        return f, meta
    name = opts.get("builtin")
    if not name:
        raise ParseError("provide --input FILE or --builtin NAME")
    shape = _parse_ints_x(opts["grid"])
    Ls = _parse_floats(opts["L"])
    if len(Ls) == 1:
        Ls = Ls * len(shape)
    if len(Ls) != len(shape):
        raise ParseError("--L and --grid dimensions differ")
    grid = Grid(Ls, shape)
    fparams = {}
    for item in opts["fparam"]:
        if "=" not in item:
            raise ParseError(f"bad --fparam {item!r} (want key=value)")
        k, v = item.split("=", 1)
        try:
            fparams[k.strip()] = float(v)
        except ValueError:
            fparams[k.strip()] = v.strip()
    meta["fparams"] = dict(fparams)
    meta["grid"] = {"half_width": list(grid.half_width),
                    "points_per_axis": list(grid.points_per_axis)}
    return build(name, grid, fparams), meta


def _aniso(opts: dict, dim: int) -> AnisotropyVector:
    if opts.get("a"):
        a = AnisotropyVector(_parse_floats(opts["a"]))
        if a.dim != dim:
            raise ParseError("--a dimension does not match the grid")
        return a
    return AnisotropyVector.isotropic(dim)


def _herz_params(opts: dict, dim: int) -> HerzParams:
    q = _parse_floats(opts["q"])
    if len(q) == 1:
        q = q * dim
    return HerzParams(
        alpha=float(opts["alpha"]),
        p=math.inf if opts["p"] in ("inf", "Inf") else float(opts["p"]),
        q=ExponentVector(q),
        anisotropy=_aniso(opts, dim),
        homogeneous=bool(opts.get("homogeneous", True)),
        window=_parse_window(opts["window"]),
    )


def _family(opts: dict, grid: Grid) -> BallFamily:
    aniso = _aniso(opts, grid.dim) if opts["geometry"] == "anisotropic" else None
    if opts["radii"] == "auto":
        return BallFamily.default(grid, opts["geometry"], aniso, opts["boundary"],
                                  int(opts["stride"]))
    return BallFamily(grid, _parse_floats(opts["radii"]), opts["geometry"], aniso,
                      opts["boundary"], int(opts["stride"]))


def _check_truncation(f, params, opts: dict, report: dict) -> None:
    frac = truncation_fraction(f, params.anisotropy, params.window, params.homogeneous)
    thr = float(opts["truncation_threshold"])
    report["truncation"] = {"fraction": frac, "threshold": thr, "strict": bool(opts["strict"])}
    if opts["strict"] and frac > thr:
        raise TruncationBreach(
            f"window {params.window} misses {frac:.3e} of the input mass (> {thr})"
        )


def _emit(report: dict, opts: dict, out_fn: SampledFunction | None = None) -> None:
    text = json.dumps(report, sort_keys=True, indent=1)
    path = opts.get("output")
    if path and opts["format"] == "csv" and out_fn is not None:
        out_fn.to_csv(path)
        print(text)
    elif path:
        d = os.path.dirname(path) or "."
        fd, tmp = tempfile.mkstemp(dir=d, prefix=".herzkit-")
        with os.fdopen(fd, "w") as fh:
            fh.write(text + "\n")
        os.replace(tmp, path)
        print(f"report written to {path}")
    else:
        print(text)


def _operator_results(name, params, f, out_fn, family, opts) -> dict:
    """Documented operator wire format plus the sampled output values."""
    q = ExponentVector((2.0,) * f.grid.dim)
    rep = OperatorReport(
        operator=name,
        params=params,
        input_norm=mixed_lebesgue_norm(f, q),
        output_norm=mixed_lebesgue_norm(out_fn, q),
        family=family,
    )
    results = rep.to_json()
    if opts["format"] == "json":
        results["values"] = out_fn.values.reshape(-1).tolist()
    return results


def _base_report(command: str, opts: dict, meta: dict) -> dict:
    return {
        "schema": 1,
        "version": __version__,
        "backend": backend_name(),
        "command": command,
        "inputs": meta,
        "seed": int(opts["seed"]),
        "threads": int(opts["threads"]),
    }


def _run(opts: dict) -> int:
    command = opts["command"]

    if command == "verify":
        suite = SUITES[opts["suite"]]
        if opts["suite"] == "rubio":
            results = suite(B=opts["B"] if opts["B"] == "auto" else float(opts["B"]),
                            K=int(opts["K"]), seed=int(opts["seed"]))
        else:
            results = suite(seed=int(opts["seed"]))
        report = _base_report(command, opts, {"suite": opts["suite"]})
        report["results"] = results
        _emit(report, opts)
        return 0 if results["passed"] else 1

    f, meta = _load_function(opts)
    report = _base_report(command, opts, meta)
    dim = f.grid.dim
    out_fn = None

    if command == "norm":
        q = _parse_floats(opts["q"])
        if len(q) == 1:
            q = q * dim
        val = mixed_lebesgue_norm(f, ExponentVector(q))
        report["params"] = {"q": [str(x) for x in q]}
        report["results"] = {"norm": val}
        print(f"mixed norm = {val:.12g}")
    elif command == "herz":
        params = _herz_params(opts, dim)
        _check_truncation(f, params, opts, report)
        val = herz_norm(f, params)
        report["params"] = params_to_json(params)
        report["results"] = {"herz_norm": val}
        print(f"herz norm = {val:.12g}")
    elif command == "maximal":
        family = _family(opts, f.grid)
        out_fn = hl_maximal(f, family)
        report["params"] = {"family": family.summary()}
        report["results"] = _operator_results(
            "hl_maximal", {}, f, out_fn, family, opts
        )
    elif command == "fractional":
        al = float(opts["frac_alpha"])
        if opts["op"] == "maximal":
            family = _family(opts, f.grid)
            out_fn = fractional_maximal(f, al, family)
            report["params"] = {"alpha": al, "family": family.summary()}
            report["results"] = _operator_results(
                "fractional_maximal", {"alpha": al}, f, out_fn, family, opts
            )
        else:
            out_fn = fractional_integral(f, al)
            report["params"] = {"alpha": al}
            report["results"] = _operator_results(
                "fractional_integral", {"alpha": al}, f, out_fn, None, opts
            )
    elif command == "cz":
        kern = hilbert_kernel()
        val_report = validate_kernel(kern, f.grid)
        out_fn = cz_apply(kern, f)
        report["params"] = {"kernel": kern.label}
        report["results"] = _operator_results(
            "cz_apply", {"kernel": kern.label}, f, out_fn, None, opts
        )
        report["results"]["kernel_validation"] = val_report
    elif command == "lp":
        jr = (int(opts["jmin"]), int(opts["jmax"]))
        k = mexican_hat(jr) if dim == 1 else laplacian_of_gaussian(jr)
        which = opts["fn"]
        if which == "g":
            out_fn = g_function(f, k)
        elif which == "s":
            out_fn = lusin_area(f, k, float(opts["aperture"]))
        else:
            out_fn = g_star(f, k, float(opts["lam"]))
        params = {"fn": which, "j_range": list(jr),
                  "aperture": float(opts["aperture"]), "lambda": float(opts["lam"])}
        report["params"] = params
        report["results"] = _operator_results(f"lp_{which}", params, f, out_fn, None, opts)
    elif command == "decompose":
        params = _herz_params(opts, dim)
        _check_truncation(f, params, opts, report)
        dec = block_decompose(f, params)
        report["params"] = params_to_json(params)
        report["results"] = {
            "ks": list(dec.ks),
            "lambdas": list(dec.lambdas),
            "coefficient_lp": dec.coefficient_lp(),
            "herz_norm": herz_norm(f, params),
        }
        if opts.get("output"):
            dec.to_files(opts["output"])
            print(f"decomposition written to {opts['output']}")
        print(json.dumps(report, sort_keys=True, indent=1))
        return 0
    elif command == "atoms":
        params = _herz_params(opts, dim)
        _check_truncation(f, params, opts, report)
        w = SchwartzWindow.default(params.anisotropy, params.q,
                                   _parse_window(opts["k_range"]))
        dec = atomic_decompose(f, params, w)
        report["params"] = params_to_json(params)
        report["results"] = {
            "n_atoms1": len(dec.atoms1),
            "n_atoms2": len(dec.atoms2),
            "coefficient_lp": dec.coefficient_lp(),
            "herz_hardy_norm": herz_hardy_norm(f, params, w),
            "residual_report": dec.report,
        }
        if opts.get("output"):
            dec.to_files(opts["output"])
            print(f"decomposition written to {opts['output']}")
        print(json.dumps(report, sort_keys=True, indent=1))
        return 0
    else:
        raise ParseError(f"unknown command {command!r}")

    _emit(report, opts, out_fn)
    return 0


def main(argv=None) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
        opts = _resolve(args)
        return _run(opts)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TruncationBreach as exc:
        print(f"truncation: {exc}", file=sys.stderr)
        return 4
    except HerzkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

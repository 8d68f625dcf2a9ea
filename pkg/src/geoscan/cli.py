"""Command line entry point: ``geoscan {validate,check,scan,limitset}``.

Exit codes: 0 success, 1 negative verdict under ``--strict`` (or failed
validation), 2 bad input, 3 incomplete run (budget or timeout), 4 internal
inconsistency (a relator not mapping to +-I).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from . import __version__
from .geodesic import (
    NOT_FUCHSIAN,
    VOLUME_TOO_SMALL,
    CheckConfig,
    ScanConfig,
    SurfaceTimeout,
    check_surface,
    scan_manifold,
    surface_group,
)
from .holonomy import InconsistentDevelopment, MobiusMatrix, representation
from .limitset import DEFAULT_RESIDUAL_THRESHOLD, fit_circle, sample_limit_set, write_csv, write_svg
from .normal import IncompleteEnumeration, as_coordinates, build_surface_complex, is_admissible, parse_surface
from .numfield import FieldError
from .triangulation import (
    DegenerateShapeError,
    TriangulationError,
    compute_volume,
    parse_triangulation,
    validate_gluing_equations,
)

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_INCOMPLETE, EXIT_INTERNAL = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    threshold_im: float = 0.01
    surface_timeout_s: float = 5000.0
    euler_bound_override: int | None = None
    num_points: int = 10_000
    max_word: int = 2000
    seed: int = 0
    thread_count: int | None = None
    strict: bool = False
    exact: bool = False
    out: str | None = None
    residual_threshold: float = DEFAULT_RESIDUAL_THRESHOLD
    base_point: str = "fixed"

    def base(self):
        if self.base_point == "fixed":
            return "fixed"
        try:
            return complex(self.base_point.replace(" ", ""))
        except ValueError:
            raise InputError("--base-point must be 'fixed' or a complex number") from None

    def __post_init__(self):
        if not self.threshold_im > 0:
            raise InputError("--threshold must be positive")
        if not self.surface_timeout_s > 0:
            raise InputError("--timeout must be positive")

    def threads(self):
        if self.thread_count:
            return self.thread_count
        env = os.environ.get("GEOSCAN_THREADS")
        if env:
            try:
                return max(1, int(env))
            except ValueError:
                raise InputError("GEOSCAN_THREADS must be an integer") from None
        return os.cpu_count() or 1

    def check_config(self):
        return CheckConfig(self.threshold_im, True if self.exact else None, timeout_s=self.surface_timeout_s)


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _load_triangulation(path):
    try:
        return parse_triangulation(_read(path))
    except (TriangulationError, FieldError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_surface(path, T):
    try:
        return parse_surface(_read(path), T)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _header(cfg, inputs, T=None):
    return {
        "tool": "geoscan",
        "version": __version__,
        "config": asdict(cfg),
        "inputs": {str(p): _sha256(p) for p in inputs},
        "triangulation_checksum": None if T is None else T.checksum(),
    }


def _emit(report, cfg, name):
    text = json.dumps(report, indent=2, sort_keys=True, default=_json_default)
    print(text)
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text + "\n", encoding="utf-8")


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if hasattr(o, "tolist"):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o)}")


def _representation(T, exact=None):
    """Holonomy; a malformed generator block is an input error."""
    try:
        return representation(T, exact=exact)
    except ValueError as exc:
        if T.generators is None:
            raise
        raise InputError(str(exc)) from None


def _require_exact(T, cfg):
    if cfg.exact and (T.exact_shapes is None or T.generators is not None):
        raise InputError("--exact needs exact shapes and no generator matrices in the triangulation file")


def _limitset_report(mats, cfg, stem):
    sample = sample_limit_set(mats, cfg.num_points, cfg.max_word, cfg.seed, cfg.base())
    fit = fit_circle(sample)
    files = {}
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        svg, csv = out / f"{stem}.svg", out / f"{stem}.csv"
        write_svg(sample, fit, svg)
        write_csv(sample, csv)
        files = {"svg": str(svg), "csv": str(csv)}
    return {
        "seed": cfg.seed,
        "num_points": cfg.num_points,
        "max_word": cfg.max_word,
        "base_point": [sample.base_point.real, sample.base_point.imag],
        "fit": fit.to_json(),
        "circular": fit.is_circular(cfg.residual_threshold),
        "files": files,
    }


# ----------------------------------------------------------------- commands


def cmd_validate(args, cfg):
    T = _load_triangulation(args.triangulation)
    try:
        rep = validate_gluing_equations(T, args.tol)
        vol = compute_volume(T)
    except DegenerateShapeError as exc:
        raise InputError(str(exc)) from None
    warnings = []
    flat = [i for i, z in enumerate(T.shapes) if z.imag == 0]
    if flat:
        warnings.append(f"flat tetrahedra (volume 0): {flat}")
    report = _header(cfg, [args.triangulation], T)
    report.update({"gluing": rep.to_json(), "volume": vol, "passed": rep.passed, "warnings": warnings})
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    _emit(report, cfg, "validate.json")
    return EXIT_OK if rep.passed else EXIT_NEGATIVE


def _verdict_block(T, R, x, cfg):
    v = check_surface(T, R, x, cfg.check_config())
    block = v.to_json()
    if v.kind not in (NOT_FUCHSIAN, VOLUME_TOO_SMALL):
        S = build_surface_complex(T, x, check=False)
        y = x if S.orientable else x.scaled(2)
        mats = surface_group(T, R, y).matrices
        block["limit_set"] = _limitset_report(mats, cfg, "limitset_" + hashlib.sha1(str(x.counts).encode()).hexdigest()[:10])
    return v, block


def cmd_check(args, cfg):
    T = _load_triangulation(args.triangulation)
    _require_exact(T, cfg)
    x = _load_surface(args.surface, T)
    S = build_surface_complex(T, x, check=False) if is_admissible(T, x) else None
    if S is None or not S.connected:
        raise InputError("surface must be admissible and connected")
    R = _representation(T, exact=True if cfg.exact else None)
    v, block = _verdict_block(T, R, x, cfg)
    report = _header(cfg, [args.triangulation, args.surface], T)
    report.update({"coordinates": list(x.counts), "verdict": v.kind, "result": block})
    _emit(report, cfg, "check.json")
    if cfg.strict and v.kind == NOT_FUCHSIAN:
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_scan(args, cfg):
    T = _load_triangulation(args.triangulation)
    _require_exact(T, cfg)
    extra = [_load_surface(p, T) for p in args.surfaces or []]
    for x in extra:
        if not is_admissible(T, x):
            raise InputError("supplied surface is not admissible")
    scfg = ScanConfig(cfg.check_config(), cfg.euler_bound_override, cfg.threads(), extra_surfaces=extra)
    if args.lp_budget:
        scfg.lp_budget = args.lp_budget
    exact = True if cfg.exact and T.generators is None else None
    R = _representation(T, exact=exact) if cfg.exact else None
    rep = scan_manifold(T, R, scfg)
    report = _header(cfg, [args.triangulation] + list(args.surfaces or []), T)
    body = rep.to_json()
    for entry, row in zip(rep.surfaces, body["surfaces"]):
        if entry.verdict is not None and entry.verdict.kind != NOT_FUCHSIAN:
            x = as_coordinates(entry.coordinates)
            S = build_surface_complex(T, x, check=False)
            y = x if S.orientable else x.scaled(2)
            if R is None:
                R = _representation(T, exact=exact)
            stem = "limitset_" + hashlib.sha1(str(x.counts).encode()).hexdigest()[:10]
            row["limit_set"] = _limitset_report(surface_group(T, R, y).matrices, cfg, stem)
    report.update(body)
    _emit(report, cfg, "scan.json")
    if not rep.complete or any(e.error for e in rep.surfaces):
        print(f"incomplete: {rep.message or 'surface check timed out'}", file=sys.stderr)
        return EXIT_INCOMPLETE
    if cfg.strict and not rep.candidates():
        return EXIT_NEGATIVE
    return EXIT_OK


def _load_matrices(path):
    try:
        data = json.loads(_read(path))
        if isinstance(data, dict):
            data = data["generators"]
        return [MobiusMatrix(*(complex(re, im) for re, im in m)) for m in data]
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def cmd_limitset(args, cfg):
    inputs = []
    if args.matrices:
        mats = _load_matrices(args.matrices)
        inputs.append(args.matrices)
        T = None
    else:
        if not (args.triangulation and args.surface):
            raise InputError("give a triangulation and a surface, or --matrices FILE")
        T = _load_triangulation(args.triangulation)
        x = _load_surface(args.surface, T)
        if not is_admissible(T, x):
            raise InputError("surface is not admissible")
        S = build_surface_complex(T, x, check=False)
        if not S.connected:
            raise InputError("surface must be connected")
        R = _representation(T)
        mats = surface_group(T, R, x if S.orientable else x.scaled(2)).matrices
        inputs += [args.triangulation, args.surface]
    if cfg.out is None:
        cfg.out = "."
    report = _header(cfg, inputs, T)
    report["limit_set"] = _limitset_report(mats, cfg, "limitset")
    _emit(report, cfg, "limitset.json")
    return EXIT_OK


# ----------------------------------------------------------------- parser


def build_parser():
    p = argparse.ArgumentParser(prog="geoscan", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"geoscan {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threshold", type=float, default=0.01, help="|Im tr| above which a trace is non-real")
    common.add_argument("--timeout", type=float, default=5000.0, help="seconds per surface check")
    common.add_argument("--euler-bound", type=int, default=None, help="override the volume bound on |chi|")
    common.add_argument("--points", type=int, default=10_000)
    common.add_argument("--max-word", type=int, default=2000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--base-point", default="fixed",
                        help="'fixed' (a limit point: attracting fixed point of a generator) or a complex number such as 1+0j")
    common.add_argument("--threads", type=int, default=None, help="worker count (env GEOSCAN_THREADS)")
    common.add_argument("--strict", action="store_true", help="exit 1 on negative verdicts")
    common.add_argument("--exact", action="store_true", help="certify non-real traces with exact arithmetic")
    common.add_argument("--out", default=None, help="directory for reports, SVG and CSV")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", parents=[common], help="gluing equations and volume")
    v.add_argument("triangulation")
    v.add_argument("--tol", type=float, default=1e-9)
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("check", parents=[common], help="classify one surface")
    c.add_argument("triangulation")
    c.add_argument("surface")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("scan", parents=[common], help="enumerate and classify surfaces")
    s.add_argument("triangulation")
    s.add_argument("--surfaces", nargs="*", default=[], help="extra surface files to classify")
    s.add_argument("--lp-budget", type=int, default=None)
    s.set_defaults(func=cmd_scan)

    ls = sub.add_parser("limitset", parents=[common], help="sample a limit set and fit a circle")
    ls.add_argument("triangulation", nargs="?")
    ls.add_argument("surface", nargs="?")
    ls.add_argument("--matrices", default=None, help="JSON list of generator matrices [[re,im]x4]")
    ls.set_defaults(func=cmd_limitset)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            threshold_im=args.threshold,
            surface_timeout_s=args.timeout,
            euler_bound_override=args.euler_bound,
            num_points=args.points,
            max_word=args.max_word,
            seed=args.seed,
            thread_count=args.threads,
            strict=args.strict,
            exact=args.exact,
            out=args.out,
            base_point=args.base_point,
        )
        return args.func(args, cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (IncompleteEnumeration, SurfaceTimeout) as exc:
        print(f"incomplete: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE
    except InconsistentDevelopment as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

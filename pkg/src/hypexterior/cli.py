"""Command-line entry point and reproducible experiment pipelines.

Subcommands: solve-radial, qualitative, spectrum, sigma-curve,
find-bifurcation, check-group, convergence-study.  Option precedence is
flags > config file > defaults; the resolved configuration (including the
seed) is hashed into every artifact, and reruns are byte-identical.

Exit codes: 0 success, 2 validation error, 3 solver failure,
4 lemma/certificate violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .artifacts import (
    profile_metadata,
    write_curve_csv,
    write_json,
    write_profile_csv,
    write_shape_csv,
    write_table_csv,
)
from .bifurcation import run_bifurcation_pipeline
from .dtn import sigma_curve
from .errors import (
    CertificateFailureError,
    HypExteriorError,
    LemmaViolationError,
    SolverError,
    ValidationError,
)
from .harmonics import SymmetryGroup, check_g1, group_restricted_spectrum
from .model import ModelParams, NumericsConfig
from .qualitative import qualitative_report
from .radial import (
    GroundStateCache,
    convergence_study,
    rescale_to_unit,
    solve_exterior_ground_state,
)
from .spectral import lambda0_bound_fixed_point, radial_spectrum

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_VIOLATION = 4

_NUMERIC_FIELDS = (
    "r_max", "grid_points", "ode_rel_tol", "ode_abs_tol", "shoot_tol",
    "max_bisect", "w_ceiling", "quad_tol",
)


def _parse_group(spec: str, N: int, rotations_only: bool) -> SymmetryGroup:
    spec = spec.strip().lower()
    if spec.startswith("dihedral"):
        if ":" not in spec:
            raise ValidationError("dihedral groups are written dihedral:m (e.g. dihedral:3)")
        m = int(spec.split(":", 1)[1])
        return SymmetryGroup("dihedral", 2, m=m)
    return SymmetryGroup(spec, N, include_reflections=not rotations_only)


def _resolved_config(args: argparse.Namespace) -> dict:
    """Flags > config file > defaults, returned as a flat dict."""
    resolved: dict = {}
    if args.config:
        resolved.update(json.loads(Path(args.config).read_text()))
    for key, value in vars(args).items():
        if key in ("config", "func") or value is None:
            continue
        resolved[key] = value
    resolved.setdefault("seed", 0)
    resolved.setdefault("N", 3)
    resolved.setdefault("p", 3.0)
    resolved.setdefault("group", None)
    resolved.setdefault("rotations_only", False)
    out_dir = resolved.get("out_dir") or os.environ.get("HYPEXTERIOR_OUTPUT_DIR", ".")
    resolved["out_dir"] = str(out_dir)
    resolved["version"] = __version__
    return resolved


_DEFAULT_GROUPS = {2: "dihedral:3", 3: "icosahedral", 4: "hyper-icosahedral"}


def _build(resolved: dict) -> tuple[ModelParams, SymmetryGroup, NumericsConfig, Path]:
    params = ModelParams(int(resolved["N"]), float(resolved["p"]))
    spec = resolved.get("group") or _DEFAULT_GROUPS.get(params.N, "full")
    group = _parse_group(spec, params.N, bool(resolved["rotations_only"]))
    numeric_kwargs = {}
    for name in _NUMERIC_FIELDS:
        if resolved.get(name) is not None:
            cast = int if name in ("grid_points", "max_bisect") else float
            numeric_kwargs[name] = cast(resolved[name])
    cfg = NumericsConfig(**numeric_kwargs)
    out = Path(resolved["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return params, group, cfg, out


def cmd_solve_radial(args) -> int:
    resolved = _resolved_config(args)
    params, _, cfg, out = _build(resolved)
    R = float(resolved.get("R", 1.0))
    result = solve_exterior_ground_state(params, R, cfg)
    stem = f"profile_N{params.N}_p{params.p:g}_R{R:g}"
    write_profile_csv(out / f"{stem}.csv", result.profile, resolved)
    write_json(out / f"{stem}.json", {
        "metadata": profile_metadata(result.profile),
        "slope_star": result.slope_star,
        "residual_sup": result.residual_sup,
        "bracket_classifications": len(result.bracket_history),
    }, resolved)
    verdicts = qualitative_report(params, result, cfg)
    write_json(out / f"{stem}_qualitative.json", {"verdicts": verdicts}, resolved)
    print(f"wrote {stem}.csv/.json + qualitative verdicts (slope* = {result.slope_star:.12g})")
    return EXIT_OK


def cmd_qualitative(args) -> int:
    resolved = _resolved_config(args)
    params, _, cfg, out = _build(resolved)
    R = float(resolved.get("R", 1.0))
    result = solve_exterior_ground_state(params, R, cfg)
    verdicts = qualitative_report(params, result, cfg)
    path = write_json(out / f"qualitative_N{params.N}_p{params.p:g}_R{R:g}.json",
                      {"verdicts": verdicts}, resolved)
    print(f"all {len(verdicts)} lemma checks passed -> {path.name}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    resolved = _resolved_config(args)
    params, _, cfg, out = _build(resolved)
    lam = float(resolved.get("lam", 1.0))
    R = lam ** -0.5
    res = solve_exterior_ground_state(params, R, cfg)
    u = rescale_to_unit(res, R)
    pairs = radial_spectrum(u, params, n_eigs=int(resolved.get("n_eigs", 3)), cfg=cfg)
    stem = f"spectrum_N{params.N}_p{params.p:g}_lam{lam:g}"
    write_json(out / f"{stem}.json", {
        "lambda": lam,
        "eigenvalues": [p.eigenvalue for p in pairs],
        "eigenvalues_coarse": [p.eigenvalue_coarse for p in pairs],
        "eigenvalues_fine": [p.eigenvalue_fine for p in pairs],
    }, resolved)
    write_profile_csv(out / f"{stem}_ground.csv", pairs[0].eigenfunction, resolved)
    print(f"tau_0 = {pairs[0].eigenvalue:.12g} (exactly one negative eigenvalue)")
    return EXIT_OK


def _sigma_grid(resolved, params, mu1, cache, cfg):
    lam_min = resolved.get("lam_min")
    lam_max = float(resolved.get("lam_max", 50.0))
    n_grid = int(resolved.get("n_grid", 40))
    bound, _ = lambda0_bound_fixed_point(params, mu1, cache, cfg)
    if lam_min is None:
        lam_min = 1.05 * bound
    elif float(lam_min) <= bound:
        raise ValidationError(
            f"lambda grid start {lam_min} is not above the threshold bound {bound:.6g}"
        )
    return np.geomspace(float(lam_min), lam_max, n_grid), bound


def cmd_sigma_curve(args) -> int:
    resolved = _resolved_config(args)
    params, group, cfg, out = _build(resolved)
    spectrum = group_restricted_spectrum(group, int(resolved.get("k_max", 25)))
    if not spectrum.entries:
        raise ValidationError("group has no invariant degrees in range")
    degrees = [e.degree for e in spectrum.entries[: int(resolved.get("n_degrees", 3))]]
    cache = GroundStateCache(params, cfg)
    grid, bound = _sigma_grid(resolved, params, spectrum.entries[0].eigenvalue, cache, cfg)

    def one_curve(degree: int):
        return sigma_curve(degree, grid, cache, cfg, params, lambda_floor=bound)

    if resolved.get("parallel"):
        # warm the cache serially (deterministic), then fan out over degrees
        for lam in grid:
            cache(lam)
        with ThreadPoolExecutor(max_workers=min(4, len(degrees))) as pool:
            curves = list(pool.map(one_curve, degrees))
    else:
        curves = [one_curve(d) for d in degrees]
    brackets = {}
    for curve in curves:
        write_curve_csv(out / f"sigma_deg{curve.degree}.csv", curve, resolved)
        brackets[str(curve.degree)] = curve.sign_change_brackets()
    write_json(out / "sigma_brackets.json", {
        "bound": bound, "brackets": brackets, "degrees": degrees,
    }, resolved)
    print(f"sigma curves for degrees {degrees} over [{grid[0]:.4g}, {grid[-1]:.4g}]")
    return EXIT_OK


def cmd_find_bifurcation(args) -> int:
    resolved = _resolved_config(args)
    params, group, cfg, out = _build(resolved)
    eps_list = tuple(
        float(x) for x in str(resolved.get("epsilons", "0.1")).split(",") if x
    )
    result = run_bifurcation_pipeline(
        params, group, cfg,
        lam_hi=float(resolved.get("lam_max", 50.0)),
        n_grid=int(resolved.get("n_grid", 40)),
        epsilons=eps_list,
        n_shape_samples=int(resolved.get("n_samples", 2000)),
    )
    write_json(out / "group_spectrum.json", result.spectrum.to_json(), resolved)
    if result.certificate is not None:
        write_json(out / "certificate.json", result.certificate.to_json(), resolved)
    if result.curve is not None:
        write_curve_csv(out / f"sigma_deg{result.curve.degree}.csv", result.curve, resolved)
    if result.point is not None:
        write_json(out / "bifurcation_point.json", {
            **result.point.to_json(),
            "lambda0_bound": result.bound,
            "mode_threshold": result.threshold,
        }, resolved)
    for shape in result.shapes or []:
        tag = f"{shape.epsilon:+g}".replace("+", "p").replace("-", "m").replace(".", "_")
        write_shape_csv(out / f"shape_eps{tag}.csv", shape, resolved)
        write_json(out / f"shape_eps{tag}.json", shape.to_json(), resolved)
    if not result.certified:
        stage = result.failure_stage or "certificate"
        print(f"no bifurcation certified (stage: {stage})")
        return EXIT_VIOLATION
    print(
        f"lambda* = {result.point.lambda_star:.10g}, R* = {result.point.radius_star:.10g}, "
        f"certificates passed"
    )
    return EXIT_OK


def cmd_check_group(args) -> int:
    resolved = _resolved_config(args)
    params, group, cfg, out = _build(resolved)
    spectrum = group_restricted_spectrum(group, int(resolved.get("k_max", 15)))
    report = check_g1(spectrum) if spectrum.entries else None
    payload = {
        "spectrum": spectrum.to_json(),
        "g1": report.to_json() if report else {"satisfied": False, "reason": "empty spectrum"},
    }
    path = write_json(out / f"group_{group.label.replace('(', '_').replace(')', '')}.json",
                      payload, resolved)
    print(json.dumps(payload["g1"], indent=2, sort_keys=True))
    print(f"-> {path.name}")
    return EXIT_OK


def cmd_convergence_study(args) -> int:
    resolved = _resolved_config(args)
    params, _, cfg, out = _build(resolved)
    radii = [float(x) for x in str(resolved.get("radii", "1,0.5,0.25,0.1")).split(",")]
    rows = convergence_study(params, radii, cfg)
    write_table_csv(out / "convergence_study.csv", ["R", "h1_distance"],
                    [[R, d] for R, d in rows], resolved)
    decreasing = all(b < a for (_, a), (_, b) in zip(rows, rows[1:]))
    write_json(out / "convergence_study.json", {
        "rows": [{"R": R, "h1_distance": d} for R, d in rows],
        "strictly_decreasing": decreasing,
    }, resolved)
    print("distances:", ", ".join(f"{R:g}: {d:.6g}" for R, d in rows))
    return EXIT_OK if decreasing else EXIT_VIOLATION


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--N", type=int, default=None, help="ambient dimension (>= 2)")
    sub.add_argument("--p", type=float, default=None, help="nonlinearity exponent")
    sub.add_argument("--group", default=None,
                     help="symmetry group: icosahedral | tetrahedral | octahedral | "
                          "dihedral:m | hyper-icosahedral | full")
    sub.add_argument("--rotations-only", dest="rotations_only", action="store_const",
                     const=True, default=None, help="use the rotation subgroup")
    sub.add_argument("--config", default=None, help="JSON config file (flags override)")
    sub.add_argument("--out-dir", dest="out_dir", default=None,
                     help="output directory (default $HYPEXTERIOR_OUTPUT_DIR or '.')")
    sub.add_argument("--seed", type=int, default=None, help="seed for randomized checks")
    sub.add_argument("--grid-points", dest="grid_points", type=int, default=None)
    sub.add_argument("--r-max", dest="r_max", type=float, default=None)
    sub.add_argument("--shoot-tol", dest="shoot_tol", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypexterior",
        description=__doc__.splitlines()[0],
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("solve-radial", help="exterior ground state + qualitative verdicts")
    _add_common(s)
    s.add_argument("--R", type=float, default=None, help="inner boundary radius")
    s.set_defaults(func=cmd_solve_radial)

    s = subs.add_parser("qualitative", help="run the four lemma checks on a solve")
    _add_common(s)
    s.add_argument("--R", type=float, default=None)
    s.set_defaults(func=cmd_qualitative)

    s = subs.add_parser("spectrum", help="radial spectrum of the linearization at u_lambda")
    _add_common(s)
    s.add_argument("--lam", type=float, default=None)
    s.add_argument("--n-eigs", dest="n_eigs", type=int, default=None)
    s.set_defaults(func=cmd_spectrum)

    s = subs.add_parser("sigma-curve", help="sample sigma(lambda) for the leading degrees")
    _add_common(s)
    s.add_argument("--lam-min", dest="lam_min", type=float, default=None)
    s.add_argument("--lam-max", dest="lam_max", type=float, default=None)
    s.add_argument("--n-grid", dest="n_grid", type=int, default=None)
    s.add_argument("--n-degrees", dest="n_degrees", type=int, default=None)
    s.add_argument("--parallel", action="store_const", const=True, default=None)
    s.set_defaults(func=cmd_sigma_curve)

    s = subs.add_parser("find-bifurcation", help="locate lambda*, certify, emit shapes")
    _add_common(s)
    s.add_argument("--lam-max", dest="lam_max", type=float, default=None)
    s.add_argument("--n-grid", dest="n_grid", type=int, default=None)
    s.add_argument("--epsilons", default=None, help="comma-separated shape amplitudes")
    s.add_argument("--n-samples", dest="n_samples", type=int, default=None)
    s.add_argument("--check-group-only", dest="check_group_only", action="store_const",
                   const=True, default=None, help="print the group spectrum and (G1) only")
    s.set_defaults(func=cmd_find_bifurcation)

    s = subs.add_parser("check-group", help="group spectrum and the (G1) verdict, no solves")
    _add_common(s)
    s.add_argument("--k-max", dest="k_max", type=int, default=None)
    s.set_defaults(func=cmd_check_group)

    s = subs.add_parser("convergence-study", help="H1 distances to the whole-space state")
    _add_common(s)
    s.add_argument("--radii", default=None, help="comma-separated decreasing radii")
    s.set_defaults(func=cmd_convergence_study)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "check_group_only", None):
        args.func = cmd_check_group
        args.k_max = None
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (LemmaViolationError, CertificateFailureError) as exc:
        print(f"property violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except HypExteriorError as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

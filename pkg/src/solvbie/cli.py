"""Command-line front end: sphere, bem, experiment, and sweep subcommands.

Exit codes: 0 success, 2 usage, 3 input parse error, 4 domain/precondition
error, 5 numerical failure.  Every command writes a run manifest (resolved
parameters plus SHA-256 digests of all input files) alongside its output.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

from . import __version__
from .errors import (
    ConsistencyError,
    ConvergenceError,
    DomainError,
    GeometryError,
    ParseError,
    SolvbieError,
    TopologyError,
)
from .experiments import (
    ROW_COLUMNS,
    SUMMARY_COLUMNS,
    ExperimentConfig,
    lambda_sweep,
    rows_to_csv,
    run_comparison,
)
from .mesh import load_mesh
from .model import Charge, ChargeDistribution, DielectricPair, SphereModel, load_pqr
from .sphere import (
    BibeeVariant,
    bibee_energy,
    gb_epsilon_energy,
    gb_still_energy,
    kirkwood_energy,
    sphere_gb_parameters,
)
from .bem import bem_energy

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_DOMAIN = 4
EXIT_NUMERICAL = 5


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(command: str, params: dict, input_files, out_path):
    manifest = {
        "command": command,
        "parameters": params,
        "input_digests": {str(p): _sha256(p) for p in input_files},
        "tool_version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    Path(out_path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _manifest_path(args) -> Path:
    if args.out:
        return Path(str(args.out) + ".manifest.json")
    return Path("solvbie-manifest.json")


def _parse_inline_charge(spec: str) -> Charge:
    parts = spec.split(",")
    if len(parts) != 4:
        raise ParseError(f"inline charge must be 'x,y,z,q', got {spec!r}")
    try:
        x, y, z, q = (float(p) for p in parts)
    except ValueError:
        raise ParseError(f"non-numeric inline charge field in {spec!r}") from None
    return Charge((x, y, z), q)


def _load_charges(args) -> tuple[ChargeDistribution, list]:
    inputs = []
    if args.pqr:
        dist = load_pqr(args.pqr)
        inputs.append(args.pqr)
    elif args.charge:
        dist = ChargeDistribution(tuple(_parse_inline_charge(c) for c in args.charge))
    else:
        raise ParseError("no charges given: use --pqr or --charge x,y,z,q")
    return dist, inputs


def _sphere_method(name: str, dist, model, lam: float):
    name = name.strip().lower()
    if name == "kirkwood":
        return kirkwood_energy(dist, model)
    if name == "cfa":
        return bibee_energy(dist, model, BibeeVariant.cfa())
    if name == "p":
        return bibee_energy(dist, model, BibeeVariant.p())
    if name == "lambda":
        return bibee_energy(dist, model, BibeeVariant.generic(lam))
    if name == "m":
        return bibee_energy(dist, model, BibeeVariant.hybrid(lam))
    if name in ("gb", "gbeps"):
        params = sphere_gb_parameters(dist, model)
        fn = gb_still_energy if name == "gb" else gb_epsilon_energy
        return fn(dist, params, model.dielectrics)
    raise ParseError(f"unknown sphere method {name!r}")


def _emit(lines_csv: str, payload_json, args):
    if args.format == "json":
        text = json.dumps(payload_json, indent=2, sort_keys=True) + "\n"
    else:
        text = lines_csv
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_sphere(args) -> int:
    dist, inputs = _load_charges(args)
    model = SphereModel(args.radius, DielectricPair(args.eps_in, args.eps_out), args.nmax)
    methods = [m for m in args.methods.split(",") if m]
    results = [_sphere_method(m, dist, model, args.lam) for m in methods]
    rows = [
        {"method": r.method, "energy_kcal_mol": r.value,
         "truncation_estimate": r.truncation_error_estimate}
        for r in results
    ]
    csv_text = rows_to_csv(rows, ("method", "energy_kcal_mol", "truncation_estimate"))
    _emit(csv_text, rows, args)
    write_manifest("sphere", _resolved_params(args), inputs, _manifest_path(args))
    return EXIT_OK


def cmd_bem(args) -> int:
    dist, inputs = _load_charges(args)
    eps = DielectricPair(args.eps_in, args.eps_out)
    surf = load_mesh(args.mesh, fmt=args.mesh_format, face_path=args.face)
    inputs.append(args.mesh)
    if args.face:
        inputs.append(args.face)
    variant_name = args.variant.strip().lower()
    if variant_name == "exact":
        variant = None
    elif variant_name == "cfa":
        variant = BibeeVariant.cfa()
    elif variant_name == "p":
        variant = BibeeVariant.p()
    elif variant_name == "lambda":
        variant = BibeeVariant.generic(args.lam)
    elif variant_name == "m":
        variant = BibeeVariant.hybrid(args.lam)
    else:
        raise ParseError(f"unknown BEM variant {args.variant!r}")
    result = bem_energy(
        dist, surf, eps, variant,
        **({} if variant is not None else
           {"solver": args.solver, "tol": args.tol, "dense_limit": args.dense_limit}),
    )
    row = {"method": result.method, "energy_kcal_mol": result.value,
           "panels": surf.num_panels, **result.metadata}
    csv_text = rows_to_csv([row], tuple(row))
    _emit(csv_text, [row], args)
    write_manifest("bem", _resolved_params(args), inputs, _manifest_path(args))
    return EXIT_OK


def _experiment_config(args) -> tuple[ExperimentConfig, list]:
    inputs = []
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"{args.config}: invalid JSON ({exc})") from None
        inputs.append(args.config)
    # Flag overrides beat the config file.
    if args.seed is not None:
        data["seed"] = args.seed
    if args.num_configs is not None:
        data["num_configs"] = args.num_configs
    if args.eps_in is not None:
        data["eps_in"] = args.eps_in
    if args.eps_out is not None:
        data["eps_out"] = args.eps_out
    if args.nmax is not None:
        data["n_max"] = args.nmax
    if "seed" not in data:
        raise ParseError("a seed is required (config file or --seed)")
    try:
        return ExperimentConfig.from_dict(data), inputs
    except TypeError as exc:
        raise ParseError(f"bad experiment config: {exc}") from None


def cmd_experiment(args) -> int:
    cfg, inputs = _experiment_config(args)
    report = run_comparison(cfg)
    out = Path(args.out) if args.out else Path(f"experiment_seed{cfg.seed}")
    if args.format == "json":
        from .experiments import report_to_json

        path = out.with_suffix(".json")
        path.write_text(report_to_json(report))
        written = [path]
    else:
        rows_path = Path(str(out) + "_rows.csv")
        summary_path = Path(str(out) + "_summary.csv")
        rows_path.write_text(rows_to_csv(report.rows, ROW_COLUMNS))
        summary_path.write_text(rows_to_csv(report.summaries, SUMMARY_COLUMNS))
        written = [rows_path, summary_path]
    write_manifest("experiment", _resolved_params(args), inputs,
                   Path(str(out) + ".manifest.json"))
    for p in written:
        print(p)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg, inputs = _experiment_config(args)
    result = lambda_sweep(cfg)
    out = Path(args.out) if args.out else Path(f"sweep_seed{cfg.seed}")
    summary_rows = []
    for lam, report in result["reports"].items():
        summary_rows.append(report.summary_for("m"))
    if args.format == "json":
        payload = {"best_lambda": result["best_lambda"], "summaries": summary_rows}
        path = out.with_suffix(".json")
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        written = [path]
    else:
        path = Path(str(out) + "_summary.csv")
        path.write_text(rows_to_csv(summary_rows, SUMMARY_COLUMNS))
        written = [path]
    write_manifest("sweep", _resolved_params(args), inputs,
                   Path(str(out) + ".manifest.json"))
    print(f"best_lambda={result['best_lambda']}")
    for p in written:
        print(p)
    return EXIT_OK


def _resolved_params(args) -> dict:
    skip = {"func"}
    return {k: (str(v) if isinstance(v, Path) else v)
            for k, v in sorted(vars(args).items()) if k not in skip}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="solvbie",
        description="Electrostatic solvation free energies: exact sphere series, "
                    "boundary-integral approximations, GB estimators, and a BEM "
                    "reference solver.",
    )
    parser.add_argument("--version", action="version", version=f"solvbie {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, eps_default=True):
        p.add_argument("--nmax", type=int, default=25, help="series truncation order")
        if eps_default:
            p.add_argument("--eps-in", dest="eps_in", type=float, default=1.0)
            p.add_argument("--eps-out", dest="eps_out", type=float, default=80.0)
        p.add_argument("--out", default=None, help="output file (stdout if omitted)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    def charges(p):
        p.add_argument("--pqr", default=None, help="PQR file with point charges")
        p.add_argument("--charge", action="append", default=None,
                       metavar="X,Y,Z,Q", help="inline charge (repeatable)")

    p_sphere = sub.add_parser("sphere", help="analytic sphere solvers")
    common(p_sphere)
    charges(p_sphere)
    p_sphere.add_argument("--radius", type=float, required=True, help="cavity radius (Angstrom)")
    p_sphere.add_argument("--methods", default="kirkwood",
                          help="comma list: kirkwood,cfa,p,lambda,m,gb,gbeps")
    p_sphere.add_argument("--lambda", dest="lam", type=float, default=0.0,
                          help="eigenvalue estimate for the lambda/m variants")
    p_sphere.set_defaults(func=cmd_sphere)

    p_bem = sub.add_parser("bem", help="boundary-element solver on a mesh")
    common(p_bem)
    charges(p_bem)
    p_bem.add_argument("--mesh", required=True, help="mesh file (OFF, or MSMS .vert)")
    p_bem.add_argument("--mesh-format", choices=("off", "msms"), default="off")
    p_bem.add_argument("--face", default=None, help="MSMS .face file")
    p_bem.add_argument("--variant", default="exact",
                       help="exact, cfa, p, lambda, or m")
    p_bem.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p_bem.add_argument("--solver", choices=("auto", "direct", "iterative"), default="auto")
    p_bem.add_argument("--tol", type=float, default=1e-8)
    p_bem.add_argument("--dense-limit", dest="dense_limit", type=int, default=3000)
    p_bem.set_defaults(func=cmd_bem)

    for name, fn in (("experiment", cmd_experiment), ("sweep", cmd_sweep)):
        p_exp = sub.add_parser(name, help=f"{name} over random sphere ensembles")
        p_exp.add_argument("--config", default=None, help="JSON config file")
        p_exp.add_argument("--seed", type=int, default=None)
        p_exp.add_argument("--num-configs", dest="num_configs", type=int, default=None)
        p_exp.add_argument("--eps-in", dest="eps_in", type=float, default=None)
        p_exp.add_argument("--eps-out", dest="eps_out", type=float, default=None)
        p_exp.add_argument("--nmax", type=int, default=None)
        p_exp.add_argument("--out", default=None)
        p_exp.add_argument("--format", choices=("csv", "json"), default="csv")
        p_exp.set_defaults(func=fn)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, TopologyError) as exc:
        print(f"solvbie: input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DomainError, GeometryError) as exc:
        print(f"solvbie: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ConvergenceError, ConsistencyError) as exc:
        print(f"solvbie: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SolvbieError as exc:
        print(f"solvbie: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())

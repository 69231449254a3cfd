"""Command-line pipelines over the library modules.

Artifacts are plain CSV / JSON / gnuplot text with LF endings and no
timestamps: rerunning a command with identical flags reproduces every
output byte for byte.  Each artifact records the tool version, the root
seed and a short hash of the resolved configuration.  Commands share
state only through files in the output directory.

All randomness flows from the single ``--seed`` value; consumers derive
child streams by labeled hashing (``sampling.derive_seed``), so the
sampling stream does not shift when, say, ``--nboot`` changes.

Environment variables with the ``ACTIVEFOIL_`` prefix override flag
defaults (``ACTIVEFOIL_SEED=7`` makes ``--seed`` default to 7).
Explicit flags always win over the environment.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, cst, parsec, qoi, sampling
from . import activesubspace as asub
from .activesubspace import QuadraticModel
from .errors import ContractViolation, DatasetError
from .geometry import validate_airfoil, write_coordinate_loop, write_surface_table
from .sampling import ParameterBox, derive_seed, read_matrix_csv, write_matrix_csv

_ENV_PREFIX = "ACTIVEFOIL_"

_BUILTIN_BOXES = ("parsec-table2", "cst-table3")

_HINTS = {
    "ContractViolation": "run the subcommand with --help for the flag schema",
    "ConditioningError": "constraint rows are nearly dependent; move crest "
                         "positions away from 0 and 1",
    "DatasetError": "check the file against the x1..xm[,f] CSV schema in the README",
    "DegenerateIntervalError": "zero centers cannot be scaled multiplicatively; "
                               "provide explicit bounds in a box JSON file",
    "DomainError": "surface evaluations are defined on [0, 1] only",
    "EvaluationError": "pass --skip-infeasible to drop failing designs "
                       "instead of stopping",
    "FileNotFoundError": "check the path; inputs must exist before the command runs",
    "IllPosedFitError": "the quadratic design matrix is rank-deficient; "
                        "increase --n (need (m+1)(m+2)/2 well-spread rows)",
    "NoStructureError": "eigenvalues carry no usable gap; check that f varies "
                        "over the box",
    "OutOfBoxError": "point lies outside the box; sample and evaluate must "
                     "use the same --box",
    "UnsupportedExpansionError": "odd-power expansion requires the default "
                                 "class exponents (0.5, 1)",
}


def _fail(error: str, message: str, code: int) -> None:
    hint = _HINTS.get(error, "run with --help for the flag schema; "
                             "see README for file formats")
    payload = {"error": error, "hint": hint, "message": message}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    sys.exit(code)


class _Parser(argparse.ArgumentParser):
    """argparse front end whose usage errors are machine readable."""

    def error(self, message):
        _fail("UsageError", message, 2)


def _env(name: str, fallback: str) -> str:
    return os.environ.get(_ENV_PREFIX + name, fallback)


def _config_hash(args: argparse.Namespace) -> str:
    pairs = sorted(
        f"{key}={args.__dict__[key]}" for key in vars(args) if key != "func"
    )
    return hashlib.sha256("\n".join(pairs).encode()).hexdigest()[:12]


def _meta(args: argparse.Namespace, **extra) -> dict:
    meta = {
        "tool": f"activefoil {__version__}",
        "seed": getattr(args, "seed", 0),
        "config": _config_hash(args),
    }
    meta.update(extra)
    return meta


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path, payload: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_rows_csv(path, header: str, rows, meta: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        for key in sorted(meta):
            fh.write(f"# {key}={meta[key]}\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(f"{value:.17g}" for value in row) + "\n")


def _resolve_box(spec: str) -> ParameterBox:
    if spec == "parsec-table2":
        return parsec.baseline_box()
    if spec == "cst-table3":
        return cst.baseline_box()
    if spec.startswith("unit:"):
        return sampling.unit_box(int(spec.split(":", 1)[1]))
    if os.path.exists(spec):
        return ParameterBox.load(spec)
    raise ContractViolation(
        f"unknown box {spec!r}; use parsec-table2, cst-table3, unit:M, "
        "or the path of a box JSON file"
    )


def _parameterization_for(args, box_spec: str | None) -> str:
    explicit = getattr(args, "parameterization", None)
    if explicit:
        return explicit
    if box_spec == "parsec-table2":
        return "parsec"
    if box_spec == "cst-table3":
        return "cst"
    raise ContractViolation(
        "cannot infer the parameterization; pass --parameterization parsec|cst"
    )


def _parse_direction(text: str, m: int) -> np.ndarray:
    if not text:
        # reproducible mixed default, no zero components
        return 1.0 / np.arange(1.0, m + 1.0)
    w = np.array([float(v) for v in text.split(",")], dtype=float)
    if w.size != m:
        raise ContractViolation(
            f"--direction has {w.size} components, box has {m} parameters"
        )
    return w


def _build_evaluator(spec: str, m: int, args, box_spec: str | None):
    """Returns (evaluator, meta entries describing it)."""
    if spec == "quadratic":
        child = derive_seed(args.seed, "qoi:quadratic")
        return qoi.seeded_quadratic(m, child), {"qoi": spec, "qoi_seed": child}
    if spec == "ridge" or spec.startswith("ridge:"):
        profile = spec.split(":", 1)[1] if ":" in spec else "linear"
        w = _parse_direction(getattr(args, "direction", ""), m)
        ev = qoi.ridge(w, profile, noise_std=args.noise_std,
                       noise_seed=args.noise_seed)
        return ev, {
            "qoi": f"ridge:{profile}",
            "noise_std": args.noise_std,
            "noise_seed": args.noise_seed,
        }
    if spec.startswith("panel:"):
        objective = spec.split(":", 1)[1]
        parameterization = _parameterization_for(args, box_spec)
        ev = qoi.PanelSurrogate(parameterization, objective)
        return ev, {"qoi": spec, "parameterization": parameterization}
    if spec.startswith("dataset:"):
        path = spec.split(":", 1)[1]
        ev = qoi.load_dataset(path, tolerance=args.tolerance, provenance=path)
        return ev, {"qoi": spec, "tolerance": args.tolerance}
    raise ContractViolation(
        f"unknown QoI {spec!r}; use quadratic, ridge[:profile], "
        "panel:lift, panel:drag, or dataset:PATH"
    )


def _require_outputs(f, path) -> np.ndarray:
    if f is None:
        raise DatasetError(
            f"{path} has no f column; produce one with `activefoil evaluate`"
        )
    return f


def _load_eigs(path) -> dict:
    with open(path) as fh:
        payload = json.load(fh)
    for key in ("eigenvalues", "eigenvectors", "n", "convention"):
        if key not in payload:
            raise DatasetError(f"{path} is missing eigenpair key {key!r}")
    return payload


# ---------------------------------------------------------------------------
# subcommands


def _cmd_sample(args) -> None:
    box = _resolve_box(args.box)
    child = derive_seed(args.seed, "sample")
    drawn = sampling.sample(box, args.n, child)
    matrix = drawn.matrix
    coords = "normalized"
    if args.physical:
        matrix = sampling.denormalize(matrix, box)
        coords = "physical"
    meta = _meta(args, box=args.box, n=args.n, child_seed=child,
                 scheme=sampling.RNG_SCHEME, coords=coords)
    out = _out_dir(args)
    write_matrix_csv(out / "samples.csv", matrix, labels=box.labels, meta=meta)
    print(f"wrote {out / 'samples.csv'} ({args.n} rows, {coords})")


def _surface_pair_from(args):
    if args.parameterization == "parsec":
        if args.params:
            params = parsec.ParsecParams.from_json(Path(args.params).read_text())
        else:
            params = parsec.baseline_center()
        return parsec.solve_coefficients(params)
    if args.params:
        params = cst.CstParams.from_json(Path(args.params).read_text())
    else:
        params = cst.baseline_center()
    return cst.surface_pair(params)


def _cmd_shapes(args) -> None:
    pair = _surface_pair_from(args)
    report = validate_airfoil(pair, args.grid, sharp_trailing_edge=args.sharp_te)
    meta = _meta(args, parameterization=args.parameterization,
                 params=args.params or "baseline-center", grid=args.grid)
    out = _out_dir(args)
    write_surface_table(pair.upper, out / "upper.csv", n=args.grid, meta=meta)
    write_surface_table(pair.lower, out / "lower.csv", n=args.grid, meta=meta)
    write_coordinate_loop(pair, out / "loop.dat", n=args.grid, name=args.name)
    payload = report.to_dict()
    payload["meta"] = meta
    _write_json(out / "shape_report.json", payload)
    print(f"wrote {out / 'loop.dat'} (feasible={report.feasible})")


def _cmd_evaluate(args) -> None:
    X, _, labels, smeta = read_matrix_csv(args.samples)
    if smeta.get("coords") == "physical":
        raise ContractViolation(
            "evaluators consume normalized coordinates; "
            "re-run `activefoil sample` without --physical"
        )
    ev, qmeta = _build_evaluator(args.qoi, X.shape[1], args, smeta.get("box"))
    mode = "skip" if args.skip_infeasible else "raise"
    values, failed = qoi.evaluate_batch(ev, X, on_error=mode)
    if failed:
        keep = np.setdiff1d(np.arange(X.shape[0]), np.asarray(failed))
        X, values = X[keep], values[keep]
    meta = _meta(args, n_failed=len(failed), **qmeta)
    out = _out_dir(args)
    write_matrix_csv(out / "evals.csv", X, f=values, labels=labels, meta=meta)
    print(f"wrote {out / 'evals.csv'} ({values.size} rows, {len(failed)} failed)")


def _cmd_fit(args) -> None:
    X, f, _, _ = read_matrix_csv(args.data)
    f = _require_outputs(f, args.data)
    model = asub.fit_quadratic(X, f)
    payload = _model_payload(model, X.shape, _meta(args))
    out = _out_dir(args)
    _write_json(out / "model.json", payload)
    print(f"wrote {out / 'model.json'} (residual_rms={model.residual_rms:.3e})")


def _model_payload(model: QuadraticModel, shape, meta: dict) -> dict:
    return {
        "m": shape[1],
        "n_samples": shape[0],
        "constant": model.constant,
        "linear": model.linear.tolist(),
        "hessian": model.hessian.tolist(),
        "residual_rms": model.residual_rms,
        "meta": meta,
    }


def _model_from(args) -> QuadraticModel:
    if args.model:
        with open(args.model) as fh:
            payload = json.load(fh)
        return QuadraticModel(
            np.array(payload["hessian"], dtype=float),
            np.array(payload["linear"], dtype=float),
            float(payload["constant"]),
            float(payload.get("residual_rms", 0.0)),
        )
    X, f, _, _ = read_matrix_csv(args.data)
    return asub.fit_quadratic(X, _require_outputs(f, args.data))


def _eig_payload(eig, n: int, convention: str, seed: int, meta: dict) -> dict:
    return {
        "eigenvalues": eig.values.tolist(),
        "eigenvectors": [eig.vectors[:, j].tolist()
                         for j in range(eig.vectors.shape[1])],
        "n": n,
        "convention": convention,
        "seed": seed,
        "meta": meta,
    }


def _cmd_eigs(args) -> None:
    model = _model_from(args)
    eig = asub.eigendecompose(asub.gradient_outer_matrix(model, args.convention))
    n = args.dim if args.dim else asub.choose_dimension(eig.values)
    out = _out_dir(args)
    _write_json(out / "eigs.json",
                _eig_payload(eig, n, args.convention, args.seed, _meta(args)))
    print(f"wrote {out / 'eigs.json'} (n={n})")


def _bootstrap_rows(summary):
    eig_rows = [
        (i + 1, summary.eigenvalues[i], summary.eigenvalues_min[i],
         summary.eigenvalues_mean[i], summary.eigenvalues_max[i])
        for i in range(summary.eigenvalues.size)
    ]
    dim_rows = [
        (int(summary.dimensions[i]), summary.error_mean[i],
         summary.error_min[i], summary.error_max[i])
        for i in range(summary.dimensions.size)
    ]
    return eig_rows, dim_rows


def _cmd_bootstrap(args) -> None:
    X, f, _, _ = read_matrix_csv(args.data)
    f = _require_outputs(f, args.data)
    child = derive_seed(args.seed, "bootstrap")
    summary = asub.bootstrap(X, f, args.nboot, child, n=args.dim,
                             convention=args.convention)
    meta = _meta(args, child_seed=child, n_active=summary.n,
                 n_skipped=summary.n_skipped, convention=args.convention)
    eig_rows, dim_rows = _bootstrap_rows(summary)
    out = _out_dir(args)
    _write_rows_csv(out / "bootstrap_eigenvalues.csv",
                    "index,point,min,mean,max", eig_rows, meta)
    _write_rows_csv(out / "bootstrap_dimensions.csv",
                    "dim,error_mean,error_min,error_max", dim_rows, meta)
    print(f"wrote {out / 'bootstrap_eigenvalues.csv'} "
          f"(n={summary.n}, skipped={summary.n_skipped})")


def _cmd_shadow(args) -> None:
    X, f, _, _ = read_matrix_csv(args.data)
    f = _require_outputs(f, args.data)
    payload = _load_eigs(args.eigs)
    n = args.dim if args.dim else min(int(payload["n"]), 2)
    if n > 2:
        raise ContractViolation("shadow plots support 1 or 2 active coordinates")
    vectors = np.array(payload["eigenvectors"], dtype=float)
    shadow = analysis.shadow_project(X, f, vectors[:n].T)
    meta = _meta(args, n_active=n, convention=payload["convention"])
    out = _out_dir(args)
    analysis.write_shadow_csv(shadow, out / "shadow.csv", meta=meta)
    analysis.emit_shadow_gnuplot("shadow.csv", out / "shadow.gp", n,
                                 skip_lines=len(meta) + 1)
    print(f"wrote {out / 'shadow.csv'} (n_active={n})")


def _plane_directions(eigs1: dict, eigs2: dict):
    """Leading directions with w2 orthonormalized against w1."""
    w1 = np.array(eigs1["eigenvectors"][0], dtype=float)
    raw = np.array(eigs2["eigenvectors"][0], dtype=float)
    overlap = abs(float(w1 @ raw))
    if overlap > 0.99:
        raise ContractViolation(
            f"leading directions are nearly collinear (|w1.w2|={overlap:.3f}); "
            "no usable two-objective plane"
        )
    w2 = raw - (w1 @ raw) * w1
    w2 = w2 / np.linalg.norm(w2)
    return w1, w2, overlap


def _pareto_artifacts(X1, f1, X2, f2, eigs1, eigs2, args, out: Path,
                      meta_extra: dict) -> None:
    w1, w2, overlap = _plane_directions(eigs1, eigs2)
    lift_surface = analysis.fit_link_function(
        analysis.shadow_project(X1, f1, w1.reshape(-1, 1)), args.degree)
    plane = np.column_stack([w1, w2])
    drag_surface = analysis.fit_link_function(
        analysis.shadow_project(X2, f2, plane), args.degree)
    child = derive_seed(args.seed, "pareto")
    segment = analysis.pareto_segment(w1, w2, gamma_count=args.gammas,
                                      z_policy=args.z_policy, seed=child)
    scored = analysis.pareto_front(segment, lift_surface, drag_surface)
    y1_min, _ = analysis.cube_minimum(w1)
    y2_min, _ = analysis.cube_minimum(w2)
    meta = _meta(args, child_seed=child, overlap=f"{overlap:.17g}",
                 y1_min=f"{y1_min:.17g}", y2_min=f"{y2_min:.17g}", **meta_extra)
    analysis.write_pareto_csv(scored, out / "pareto.csv", meta=meta)
    coords = X2 @ plane
    low, high = coords.min(axis=0), coords.max(axis=0)
    pad = np.where(high > low, 0.0, 0.5)
    analysis.export_surface_grid(drag_surface, low - pad, high + pad,
                                 out / "pareto_grid.dat", n=args.grid_n,
                                 meta=meta)
    analysis.emit_pareto_gnuplot("pareto.csv", "pareto_grid.dat",
                                 out / "pareto.gp", skip_lines=len(meta) + 1)


def _cmd_pareto(args) -> None:
    X1, f1, _, _ = read_matrix_csv(args.data1)
    X2, f2, _, _ = read_matrix_csv(args.data2)
    f1 = _require_outputs(f1, args.data1)
    f2 = _require_outputs(f2, args.data2)
    out = _out_dir(args)
    _pareto_artifacts(X1, f1, X2, f2, _load_eigs(args.eigs1),
                      _load_eigs(args.eigs2), args, out, {})
    print(f"wrote {out / 'pareto.csv'} ({args.gammas} points)")


def _cmd_convergence(args) -> None:
    box = _resolve_box(args.box)
    ev, qmeta = _build_evaluator(args.qoi, box.dim, args, args.box)
    schedule = tuple(int(v) for v in args.schedule.split(","))
    child = derive_seed(args.seed, "convergence")
    cells = asub.convergence_study(box, ev, schedule, child, dim=args.dim,
                                   n_boot=args.nboot,
                                   convention=args.convention)
    rows = [(c.n_samples, c.error_mean, c.error_min, c.error_max)
            for c in cells]
    meta = _meta(args, child_seed=child, **qmeta)
    out = _out_dir(args)
    _write_rows_csv(out / "convergence.csv",
                    "n,error_mean,error_min,error_max", rows, meta)
    print(f"wrote {out / 'convergence.csv'} ({len(rows)} cells)")


def _cmd_validate(args) -> None:
    pair = _surface_pair_from(args)
    report = validate_airfoil(pair, args.grid, sharp_trailing_edge=args.sharp_te)
    payload = report.to_dict()
    payload["parameterization"] = args.parameterization
    payload["meta"] = _meta(args, params=args.params or "baseline-center")
    print(json.dumps(payload, sort_keys=True, indent=2))
    if args.out:
        _write_json(_out_dir(args) / "validity.json", payload)


def _single_chain(X, f, labels, args, out: Path, prefix: str,
                  boot_label: str, qmeta: dict) -> dict:
    """evals -> model -> eigs -> bootstrap -> shadow for one output."""
    meta = _meta(args, **qmeta)
    write_matrix_csv(out / f"{prefix}evals.csv", X, f=f, labels=labels,
                     meta=meta)
    model = asub.fit_quadratic(X, f)
    _write_json(out / f"{prefix}model.json",
                _model_payload(model, X.shape, meta))
    eig = asub.eigendecompose(
        asub.gradient_outer_matrix(model, args.convention))
    n = args.dim if args.dim else asub.choose_dimension(eig.values)
    payload = _eig_payload(eig, n, args.convention, args.seed, meta)
    _write_json(out / f"{prefix}eigs.json", payload)

    child = derive_seed(args.seed, boot_label)
    summary = asub.bootstrap(X, f, args.nboot, child, n=n,
                             convention=args.convention)
    boot_meta = _meta(args, child_seed=child, n_active=summary.n,
                      n_skipped=summary.n_skipped, **qmeta)
    eig_rows, dim_rows = _bootstrap_rows(summary)
    _write_rows_csv(out / f"{prefix}bootstrap_eigenvalues.csv",
                    "index,point,min,mean,max", eig_rows, boot_meta)
    _write_rows_csv(out / f"{prefix}bootstrap_dimensions.csv",
                    "dim,error_mean,error_min,error_max", dim_rows, boot_meta)

    n_shadow = min(n, 2)
    shadow = analysis.shadow_project(X, f, eig.vectors[:, :n_shadow])
    shadow_meta = _meta(args, n_active=n_shadow, **qmeta)
    analysis.write_shadow_csv(shadow, out / f"{prefix}shadow.csv",
                              meta=shadow_meta)
    analysis.emit_shadow_gnuplot(f"{prefix}shadow.csv",
                                 out / f"{prefix}shadow.gp", n_shadow,
                                 skip_lines=len(shadow_meta) + 1)
    return payload


def _cmd_run_all(args) -> None:
    out = _out_dir(args)
    if args.qoi.startswith("dataset:"):
        path = args.qoi.split(":", 1)[1]
        X, f, labels, _ = read_matrix_csv(path)
        f = _require_outputs(f, path)
        _single_chain(X, f, labels, args, out, "", "bootstrap",
                      {"qoi": args.qoi})
        print(f"pipeline artifacts in {out} (dataset, {f.size} rows)")
        return

    if not args.box:
        raise ContractViolation("run-all needs --box unless --qoi is dataset:PATH")
    box = _resolve_box(args.box)
    child = derive_seed(args.seed, "sample")
    X = sampling.sample(box, args.n, child).matrix
    mode = "skip" if args.skip_infeasible else "raise"

    if args.qoi != "panel":
        ev, qmeta = _build_evaluator(args.qoi, box.dim, args, args.box)
        values, failed = qoi.evaluate_batch(ev, X, on_error=mode)
        if failed:
            keep = np.setdiff1d(np.arange(X.shape[0]), np.asarray(failed))
            X, values = X[keep], values[keep]
        _single_chain(X, values, box.labels, args, out, "", "bootstrap", qmeta)
        print(f"pipeline artifacts in {out} ({values.size} rows)")
        return

    parameterization = _parameterization_for(args, args.box)
    chains = {}
    for objective in ("lift", "drag"):
        ev = qoi.PanelSurrogate(parameterization, objective)
        values, failed = qoi.evaluate_batch(ev, X, on_error=mode)
        rows = np.arange(X.shape[0])
        if failed:
            rows = np.setdiff1d(rows, np.asarray(failed))
        qmeta = {"qoi": f"panel:{objective}",
                 "parameterization": parameterization}
        payload = _single_chain(X[rows], values[rows], box.labels, args, out,
                                f"{objective}_", f"bootstrap:{objective}",
                                qmeta)
        chains[objective] = (X[rows], values[rows], payload)

    X1, f1, eigs1 = chains["lift"]
    X2, f2, eigs2 = chains["drag"]
    _pareto_artifacts(X1, f1, X2, f2, eigs1, eigs2, args, out,
                      {"qoi": "panel", "parameterization": parameterization})
    print(f"pipeline artifacts in {out} (panel two-objective)")


# ---------------------------------------------------------------------------
# parser wiring


def _add_seed_out(cmd, default_out: str = ".") -> None:
    cmd.add_argument("--seed", type=int, default=_env("SEED", "0"),
                     help="root seed; children are derived by labeled hashing")
    cmd.add_argument("--out", default=_env("OUT", default_out),
                     help="output directory (created if missing)")


def _add_qoi_flags(cmd) -> None:
    cmd.add_argument("--qoi", required=True,
                     help="quadratic | ridge[:linear|quadratic|exp] | "
                          "panel:lift | panel:drag | dataset:PATH")
    cmd.add_argument("--direction", default=_env("DIRECTION", ""),
                     help="comma list of ridge direction components "
                          "(default 1, 1/2, ..., 1/m)")
    cmd.add_argument("--noise-std", type=float, default=_env("NOISE_STD", "0"),
                     help="ridge noise level (deterministic per point)")
    cmd.add_argument("--noise-seed", type=int, default=_env("NOISE_SEED", "0"),
                     help="seed folded into the per-point ridge noise")
    cmd.add_argument("--parameterization", choices=("parsec", "cst"),
                     default=None, help="decoder for panel QoIs "
                                        "(inferred from built-in boxes)")
    cmd.add_argument("--tolerance", type=float, default=_env("TOLERANCE", "1e-9"),
                     help="dataset lookup tolerance")
    cmd.add_argument("--skip-infeasible", action="store_true",
                     help="drop designs the evaluator rejects instead of failing")


def _add_convention(cmd) -> None:
    cmd.add_argument("--convention", choices=asub.CONVENTIONS,
                     default=_env("CONVENTION", "identity"),
                     help="second-moment weighting of the outer-product matrix")


def _add_shape_flags(cmd) -> None:
    cmd.add_argument("--parameterization", choices=("parsec", "cst"),
                     required=True)
    cmd.add_argument("--params", default=None,
                     help="parameter JSON (default: built-in box center)")
    cmd.add_argument("--grid", type=int, default=_env("GRID", "201"),
                     help="surface grid resolution")
    cmd.add_argument("--sharp-te", action="store_true",
                     help="also require a closed trailing edge")


def build_parser() -> _Parser:
    parser = _Parser(prog="activefoil",
                     description="active-subspace airfoil pipelines")
    parser.add_argument("--version", action="version",
                        version=f"activefoil {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    cmd = sub.add_parser("sample", help="draw uniform designs from a box")
    cmd.add_argument("--box", required=True,
                     help="parsec-table2 | cst-table3 | unit:M | box JSON path")
    cmd.add_argument("--n", type=int, required=True)
    cmd.add_argument("--physical", action="store_true",
                     help="write physical instead of normalized coordinates")
    _add_seed_out(cmd)
    cmd.set_defaults(func=_cmd_sample)

    cmd = sub.add_parser("shapes", help="decode parameters to surfaces")
    _add_shape_flags(cmd)
    cmd.add_argument("--name", default="airfoil",
                     help="label written on the coordinate loop")
    _add_seed_out(cmd)
    cmd.set_defaults(func=_cmd_shapes)

    cmd = sub.add_parser("evaluate", help="run a QoI over sampled designs")
    cmd.add_argument("--samples", required=True,
                     help="normalized samples.csv from `sample`")
    _add_qoi_flags(cmd)
    _add_seed_out(cmd)
    cmd.set_defaults(func=_cmd_evaluate)

    cmd = sub.add_parser("fit", help="least-squares quadratic model")
    cmd.add_argument("--data", required=True, help="evals.csv with an f column")
    _add_seed_out(cmd)
    cmd.set_defaults(func=_cmd_fit)

    cmd = sub.add_parser("eigs", help="outer-product matrix eigenpairs")
    group = cmd.add_mutually_exclusive_group(required=True)
    group.add_argument("--data", help="evals.csv with an f column")
    group.add_argument("--model", help="model.json from `fit`")
    cmd.add_argument("--dim", type=int, default=None,
                     help="override the log-gap dimension choice")
    _add_convention(cmd)
    _add_seed_out(cmd)
    cmd.set_defaults(func=_cmd_eigs)

    cmd = sub.add_parser("bootstrap", help="replicate spread of the eigenpairs")
    cmd.add_argument("--data", required=True, help="evals.csv with an f column")
    cmd.add_argument("--nboot", type=int, default=_env("NBOOT", "100"))
    cmd.add_argument("--dim", type=int, default=None,
                     help="override the log-gap dimension choice")
    _add_convention(cmd)
    _add_seed_out(cmd)
    cmd.set_defaults(func=_cmd_bootstrap)

    cmd = sub.add_parser("shadow", help="project outputs onto active coordinates")
    cmd.add_argument("--data", required=True, help="evals.csv with an f column")
    cmd.add_argument("--eigs", required=True, help="eigs.json from `eigs`")
    cmd.add_argument("--dim", type=int, default=None,
                     help="active coordinates to keep (1 or 2)")
    _add_seed_out(cmd)
    cmd.set_defaults(func=_cmd_shadow)

    cmd = sub.add_parser("pareto",
                         help="two-objective segment with response surfaces")
    cmd.add_argument("--data1", required=True, help="objective-1 evals.csv")
    cmd.add_argument("--eigs1", required=True, help="objective-1 eigs.json")
    cmd.add_argument("--data2", required=True, help="objective-2 evals.csv")
    cmd.add_argument("--eigs2", required=True, help="objective-2 eigs.json")
    cmd.add_argument("--degree", type=int, default=_env("DEGREE", "2"),
                     help="link-function polynomial degree")
    cmd.add_argument("--gammas", type=int, default=_env("GAMMAS", "101"),
                     help="points on the segment")
    cmd.add_argument("--z-policy", choices=analysis.Z_POLICIES,
                     default=_env("Z_POLICY", "zero"),
                     help="inactive-coordinate reconstruction policy")
    cmd.add_argument("--grid-n", type=int, default=_env("GRID_N", "101"),
                     help="contour grid resolution per axis")
    _add_seed_out(cmd)
    cmd.set_defaults(func=_cmd_pareto)

    cmd = sub.add_parser("convergence",
                         help="bootstrap error across sample sizes")
    cmd.add_argument("--box", required=True)
    cmd.add_argument("--schedule",
                     default=_env("SCHEDULE", "100,200,400,800,1600,3200,6400"),
                     help="comma list of ascending sample sizes")
    cmd.add_argument("--nboot", type=int, default=_env("NBOOT", "100"))
    cmd.add_argument("--dim", type=int, default=_env("DIM", "1"),
                     help="subspace dimension tracked by the study")
    _add_qoi_flags(cmd)
    _add_convention(cmd)
    _add_seed_out(cmd)
    cmd.set_defaults(func=_cmd_convergence)

    cmd = sub.add_parser("validate", help="grid feasibility check of one design")
    _add_shape_flags(cmd)
    cmd.add_argument("--seed", type=int, default=_env("SEED", "0"))
    cmd.add_argument("--out", default=None,
                     help="also write validity.json here")
    cmd.set_defaults(func=_cmd_validate)

    cmd = sub.add_parser("run-all", help="full pipeline into one directory")
    cmd.add_argument("--box", default=None,
                     help="required unless --qoi is dataset:PATH")
    cmd.add_argument("--n", type=int, default=_env("N", "1000"))
    cmd.add_argument("--nboot", type=int, default=_env("NBOOT", "100"))
    cmd.add_argument("--dim", type=int, default=None,
                     help="override the log-gap dimension choice")
    cmd.add_argument("--degree", type=int, default=_env("DEGREE", "2"))
    cmd.add_argument("--gammas", type=int, default=_env("GAMMAS", "101"))
    cmd.add_argument("--z-policy", choices=analysis.Z_POLICIES,
                     default=_env("Z_POLICY", "zero"))
    cmd.add_argument("--grid-n", type=int, default=_env("GRID_N", "101"))
    _add_qoi_flags(cmd)
    _add_convention(cmd)
    _add_seed_out(cmd, default_out="run")
    cmd.set_defaults(func=_cmd_run_all)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except SystemExit:
        raise
    except Exception as exc:
        _fail(type(exc).__name__, str(exc), 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())

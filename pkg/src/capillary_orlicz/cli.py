"""Command line front end.

Subcommands: make-body, measure, combine, verify, solve, sweep.  Exit codes:
0 ok, 1 property violation, 2 invalid input, 3 solver stall.

Every subcommand accepts ``--config FILE`` (TOML or JSON).  Keys mirror the
long flag names with dashes turned into underscores; a ``solver`` table holds
solver options.  Flags given on the command line win over the file.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import body as cb
from . import functionals as fn
from . import inequalities as iq
from . import mesh as cm
from . import solver as sv
from .combination import CombinationSpec, combine_with_report
from .orlicz import gauge_from_config, validate_membership
from .references import smooth_target

EXIT_OK, EXIT_VIOLATION, EXIT_INVALID, EXIT_STALL = 0, 1, 2, 3
SUITES = ("orlicz-minkowski", "obm", "minkowski", "af", "variational", "equivalence",
          "closure", "symmetry")
# suites that need the solver-side hypotheses (contact angle below pi/2)
SOLVER_SUITES = ("symmetry",)


class InputError(ValueError):
    pass


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _theta_out(theta: float) -> float:
    return float(f"{theta:.10g}")


def parse_resolution(text, n: int = 2) -> tuple:
    if isinstance(text, (list, tuple)):
        res = tuple(int(v) for v in text)
    else:
        parts = str(text).lower().replace(",", "x").split("x")
        try:
            res = tuple(int(p) for p in parts if p)
        except ValueError as exc:
            raise InputError(f"bad resolution {text!r}") from exc
    if len(res) != (2 if n == 2 else 1):
        raise InputError(f"resolution {text!r} does not fit n={n}")
    return res


def _mesh(args):
    try:
        return cm.build_mesh(args.n, args.theta, parse_resolution(args.resolution, args.n))
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _gauge(spec):
    try:
        if isinstance(spec, str) and spec.strip().startswith("{"):
            spec = json.loads(spec)
        return gauge_from_config(spec)
    except (ValueError, json.JSONDecodeError) as exc:
        raise InputError(str(exc)) from exc


def _load_body(path, mesh=None):
    try:
        return cb.load_body(path, mesh)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read body file {path}: {exc}") from exc


def _floats(text):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _dump(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit(args, record) -> None:
    text = _dump(record)
    if getattr(args, "output", None):
        Path(args.output).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _write_metadata(args, started, extra=None):
    if getattr(args, "metadata", None):
        meta = {"command": args.command, "runtime_s": time.perf_counter() - started,
                "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z")}
        meta.update(extra or {})
        Path(args.metadata).write_text(_dump(meta) + "\n")


def load_schema(name: str) -> dict:
    """Return one of the bundled JSON schemas: body, solve, verify or measure."""
    from importlib.resources import files
    return json.loads(files(__package__).joinpath("schemas", f"{name}.schema.json").read_text())


def load_config(path) -> dict:
    p = Path(path)
    try:
        if p.suffix == ".toml":
            with open(p, "rb") as fh:
                return tomllib.load(fh)
        return json.loads(p.read_text())
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_make_body(args) -> int:
    mesh = _mesh(args)
    try:
        if args.kind == "cap":
            body = cb.cap(mesh, args.r)
        elif args.kind == "perturbed":
            mode = int(args.mode) if str(args.mode).isdigit() else args.mode
            body = cb.perturbed_cap(mesh, mode, args.eps)
            if args.r != 1.0:
                body = body.scaled(args.r)
        elif args.kind == "translate":
            base = _load_body(args.input, mesh) if args.input else cb.cap(mesh, args.r)
            body = cb.translate_horizontal(base, _floats(args.x) or [0.0] * mesh.n)
        else:
            raise InputError(f"unknown body kind {args.kind!r}")
    except cb.ConvexityError as exc:
        _emit(args, {"command": "make-body", "valid": False, "error": str(exc),
                     "min_eig_W": exc.min_eig, "node": exc.node})
        return EXIT_INVALID
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    report = cb.validate(body)
    if args.out:
        cb.save_body(body, args.out)
    _emit(args, {"command": "make-body", "kind": args.kind, "n": mesh.n,
                 "theta": _theta_out(mesh.theta), "resolution": list(mesh.resolution),
                 "body_file": args.out, "label": body.label, "valid": report.passed,
                 "validation": report.to_dict(), "u_range": [float(body.u.min()), float(body.u.max())]})
    return EXIT_OK if report.passed else EXIT_INVALID


def cmd_measure(args) -> int:
    K = _load_body(args.body)
    L = None
    if args.other:
        L = _load_body(args.other)
        if not L.mesh.same_as(K.mesh):
            raise InputError("bodies live on different meshes")
        L = cb.CapillaryBody(K.mesh, L.h, even=L.even, label=L.label)
    phi = _gauge(args.phi) if args.phi else None
    m = K.mesh
    rec = {"command": "measure", "n": m.n, "theta": _theta_out(m.theta),
           "resolution": list(m.resolution), "label": K.label}
    rec.update(fn.measure_record(K, phi))
    rec["validation"] = cb.validate(K).to_dict()
    if phi is not None:
        rec["phi"] = phi.to_config()
        rec["orlicz_ratio"] = rec["orlicz_self_mixed_volume"] / rec["volume"]
    if L is not None:
        rec["other"] = {"label": L.label, "volume": fn.volume(L)}
        rec["V1"] = fn.V1(K, L)
        if phi is not None:
            rec["orlicz_mixed_volume"] = fn.orlicz_mixed_volume(phi, K, L)
    if args.csv:
        kinds = [k for k in (args.densities or "surface,cone_volume").split(",") if k]
        _write_density_csv(args.csv, K, kinds, phi, args.p)
        rec["density_csv"] = args.csv
    _emit(args, rec)
    return EXIT_OK


def _write_density_csv(path, K, kinds, phi, p):
    m = K.mesh
    cols = {}
    for kind in kinds:
        try:
            cols[kind] = fn.density(K, kind, phi=phi, p=p).values
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node", "psi", "azimuth", "x", "y", "z"][: 3 + m.n + 1] + list(cols))
        for i in range(m.size):
            xi = m.xi[i]
            w.writerow([i, repr(float(m.psi[i])), repr(float(m.azimuth[i]))]
                       + [repr(float(v)) for v in xi] + [repr(float(cols[k][i])) for k in cols])


def cmd_combine(args) -> int:
    K1 = _load_body(args.body1)
    K2 = _load_body(args.body2, K1.mesh)
    try:
        spec = CombinationSpec(_gauge(args.phi), args.alpha, args.beta)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    res = combine_with_report(spec, K1, K2)
    if args.out:
        cb.save_body(res.body, args.out)
    _emit(args, {"command": "combine", "phi": spec.phi.to_config(), "alpha": spec.alpha,
                 "beta": spec.beta, "body_file": args.out, "root_residual": res.root_residual,
                 "validation": res.report.to_dict(), "passed": res.passed})
    return EXIT_OK if res.passed else EXIT_VIOLATION


def cmd_verify(args) -> int:
    mesh = _mesh(args)
    suites = list(SUITES) if args.suite == "all" else [s for s in args.suite.split(",") if s]
    for s in suites:
        if s not in SUITES:
            raise InputError(f"unknown suite {s!r}; known: {', '.join(SUITES)}")
    phis = [_gauge(p) for p in (args.phi or "x^3").split(";") if p.strip()]
    pairs = iq.random_pairs(mesh, args.pairs, args.seed)
    out, hard_fail, skipped = [], False, []
    for suite in suites:
        if suite in SOLVER_SUITES and not mesh.theta < np.pi / 2:
            msg = (f"suite {suite!r} needs the solver hypotheses (theta < pi/2); "
                   f"skipped at theta={mesh.theta:.10g}")
            print(msg, file=sys.stderr)
            skipped.append({"suite": suite, "skipped": msg})
            continue
        for item in _run_suite(suite, mesh, phis, pairs, args):
            hard_fail |= not item["passed"]
            out.append(item)
    record = {"command": "verify", "seed": args.seed, "pairs": args.pairs, "n": mesh.n,
              "theta": _theta_out(mesh.theta), "resolution": list(mesh.resolution),
              "suites": suites, "skipped": skipped, "reports": out,
              "all_passed": not hard_fail}
    _emit(args, record)
    return EXIT_VIOLATION if hard_fail else EXIT_OK


def _run_suite(suite, mesh, phis, pairs, args):
    rng = np.random.default_rng(np.random.SeedSequence([args.seed, SUITES.index(suite)]))
    if suite == "orlicz-minkowski":
        for phi in phis:
            for i, (K, L) in enumerate(pairs):
                yield _rep(suite, i, phi, iq.check_orlicz_minkowski(phi, K, L))
            K, L = iq.dilate_pair(mesh, rng)
            r = iq.check_orlicz_minkowski(phi, K, L)
            yield _rep(suite, "dilate", phi, r, expect_equality=True)
    elif suite == "obm":
        for phi in phis:
            phi = phi.normalized()
            for i, (K, L) in enumerate(pairs):
                a, b = rng.uniform(0.1, 1.0, 2)
                yield _rep(suite, i, phi, iq.check_obm(phi, a, b, K, L))
            K, L = iq.dilate_pair(mesh, rng)
            yield _rep(suite, "dilate", phi, iq.check_obm(phi, 0.5, 0.7, K, L),
                       expect_equality=True)
    elif suite == "minkowski":
        for i, (K, L) in enumerate(pairs):
            yield _rep(suite, i, None, iq.check_minkowski_V1(K, L))
        K, L = iq.horizontal_homothetic_pair(mesh)
        yield _rep(suite, "homothetic", None, iq.check_minkowski_V1(K, L), expect_equality=True)
    elif suite == "af":
        if mesh.n < 2:
            return
        F = cb.cap(mesh, 1.0)
        for i, (K, L) in enumerate(pairs):
            yield _rep(suite, i, None, iq.check_af_quadratic(K, L, [F]))
        K, L = iq.horizontal_homothetic_pair(mesh)
        yield _rep(suite, "homothetic", None, iq.check_af_quadratic(K, L, [F]),
                   expect_equality=True)
    elif suite == "variational":
        for phi in phis:
            # the derivative identity holds for phi(1) = 1; otherwise eps = 0 is K / phi^{-1}(1)
            phi = phi.normalized()
            for i, (K, L) in enumerate(pairs[: min(len(pairs), 20)]):
                v = iq.check_variational_formula(phi, K, L)
                yield {"suite": suite, "pair": i, "phi": phi.label, **v.to_dict(),
                       "passed": v.relative_error <= 1e-3}
    elif suite == "equivalence":
        for phi in phis:
            phi = phi.normalized()
            for i, (K, L) in enumerate(pairs[: min(len(pairs), 20)]):
                e = iq.equivalence_function(phi, K, L)
                # the sign is the hard property; convexity is reported only
                yield {"suite": suite, "pair": i, "phi": phi.label, "max_value": e.max_value,
                       "min_second_difference": e.min_second_difference,
                       "convex": e.min_second_difference >= -1e-9,
                       "right_derivative_fd": e.right_derivative_fd,
                       "right_derivative_formula": e.right_derivative_formula,
                       "passed": e.max_value <= 1e-9}
    elif suite == "closure":
        for phi in phis:
            for i, (K, L) in enumerate(pairs):
                a, b = rng.uniform(0.1, 1.0, 2)
                res = combine_with_report(CombinationSpec(phi, a, b), K, L)
                yield {"suite": suite, "pair": i, "phi": phi.label,
                       "root_residual": res.root_residual,
                       "robin_residual": res.report.robin_residual,
                       "min_eig_W": res.report.min_eig_W, "passed": res.passed}
    elif suite == "symmetry":
        for phi in phis:
            for i, (K, _) in enumerate(pairs[: min(len(pairs), 10)]):
                data = sv.ProblemData(mesh, fn.density(K, "orlicz", phi=phi).values, phi)
                v, w = sv.random_robin_field(mesh, rng), sv.random_robin_field(mesh, rng)
                d = sv.symmetry_defect(K.h, data, v, w)
                yield {"suite": suite, "pair": i, "phi": phi.label, "defect": d,
                       "defect_over_spacing_sq": d / mesh.spacing ** 2, "passed": bool(np.isfinite(d))}


def _rep(suite, pair, phi, r, expect_equality=False):
    d = r.to_dict()
    d.update(suite=suite, pair=pair, phi=None if phi is None else phi.label)
    if expect_equality:
        d["expected_equality"] = True
        d["passed"] = d["passed"] and d["equality"]
    return d


def _problem_from_args(args, mesh):
    phi = _gauge(args.phi)
    spec = args.f
    meta = {}
    if spec.startswith("manufactured"):
        r = 1.0
        if ":" in spec:
            key, _, val = spec.split(":", 1)[1].partition("=")
            if key.strip() != "r":
                raise InputError(f"bad manufactured spec {spec!r}")
            r = float(val)
        if not r > 0:
            raise InputError("manufactured radius must be positive")
        f = sv.manufactured_cap_data(mesh, phi, r)
        meta["exact"] = r * mesh.ell
        meta["r"] = r
    elif spec.startswith("smooth"):
        eps = 0.1
        if ":" in spec:
            key, _, val = spec.split(":", 1)[1].partition("=")
            if key.strip() != "eps":
                raise InputError(f"bad smooth spec {spec!r}")
            eps = float(val)
        h, f = smooth_target(mesh, phi, eps)
        if not (np.all(h > 0) and np.all(f > 0)):
            raise InputError(f"smooth target with eps={eps} is not a convex body")
        meta["exact"] = h
    elif spec == "equality-case":
        f = sv.equality_case_data(mesh, phi)
        meta["exact"] = cm.cap_volume(mesh.n, mesh.theta) ** (-1.0 / (mesh.n + 1)) * mesh.ell
    else:
        try:
            doc = json.loads(Path(spec).read_text())
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read data file {spec}: {exc}") from exc
        if "mesh" in doc and not cm.mesh_from_descriptor(doc["mesh"]).same_as(mesh):
            raise InputError("data file mesh does not match the requested mesh")
        f = np.asarray(doc["f"], dtype=float)
    try:
        data = sv.ProblemData(mesh, f, phi, form=args.form)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return data, meta


def _solver_config(args):
    opts = dict(getattr(args, "solver_options", None) or {})
    try:
        return sv.SolverConfig.from_dict(opts)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def _solve_record(args, mesh, data, meta, rep):
    rec = {"command": "solve", "n": mesh.n, "theta": _theta_out(mesh.theta),
           "resolution": list(mesh.resolution), "phi": data.phi.to_config(), "form": data.form,
           "f": args.f, "membership": validate_membership(data.phi, mesh.n).to_dict()}
    rec.update(rep.to_dict())
    if rep.body is not None and "exact" in meta:
        err = np.abs(rep.body.h - meta["exact"])
        rec["max_error"] = float(err.max())
        rec["relative_max_error"] = float(err.max() / np.max(meta["exact"]))
        if "r" in meta:
            rec["max_error_over_r"] = float(err.max() / meta["r"])
    return rec


def cmd_solve(args) -> int:
    mesh = _mesh(args)
    data, meta = _problem_from_args(args, mesh)
    config = _solver_config(args)
    rep = sv.homotopy_solve(data, config)
    rec = _solve_record(args, mesh, data, meta, rep)
    if args.out and rep.body is not None:
        cb.save_body(rep.body, args.out)
        rec["body_file"] = args.out
    if args.trace:
        _write_trace(args.trace, rep)
        rec["trace_csv"] = args.trace
    _emit(args, rec)
    return EXIT_OK if rep.converged else EXIT_STALL


def _write_trace(path, rep):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "t", "dt", "iteration", "residual", "min_h", "min_eig_W"])
        for k, s in enumerate(s for s in rep.steps if s.accepted):
            for it, r in enumerate(s.residual_history):
                w.writerow([k, repr(s.t), repr(s.dt), it, repr(float(r)), repr(s.min_h),
                            repr(s.min_eig_W)])


def cmd_sweep(args) -> int:
    resolutions = [parse_resolution(r, args.n) for r in args.resolutions.split(";")]
    thetas = _floats(args.thetas) or [args.theta]
    rows, status = [], EXIT_OK
    config = _solver_config(args)
    for th in thetas:
        errs = []
        for res in resolutions:
            args.theta, args.resolution = th, list(res)
            mesh = _mesh(args)
            data, meta = _problem_from_args(args, mesh)
            rep = sv.homotopy_solve(data, config)
            row = {"theta": _theta_out(th), "resolution": list(res), "spacing": mesh.spacing,
                   "status": rep.status, "volume": rep.volume,
                   "final_residual": rep.final_residual,
                   "steps": len(rep.steps)}
            if rep.body is not None and "exact" in meta:
                row["max_error"] = float(np.max(np.abs(rep.body.h - meta["exact"])))
                errs.append((mesh.spacing, row["max_error"]))
            if not rep.converged:
                status = EXIT_STALL
            rows.append(row)
        if len(errs) >= 2:
            h_, e_ = np.log([e[0] for e in errs]), np.log([max(e[1], 1e-300) for e in errs])
            order = float(np.polyfit(h_, e_, 1)[0])
            for row in rows[-len(errs):]:
                row["observed_order"] = order
    if args.csv:
        keys = ["theta", "resolution", "spacing", "status", "max_error", "observed_order",
                "final_residual", "volume", "steps"]
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(keys)
            for row in rows:
                w.writerow(["x".join(map(str, row[k])) if k == "resolution" else row.get(k, "")
                            for k in keys])
    _emit(args, {"command": "sweep", "phi": _gauge(args.phi).to_config(), "f": args.f,
                 "form": args.form, "runs": rows})
    return status


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _common(p, mesh=True):
    p.add_argument("--config", help="TOML or JSON file with default values")
    p.add_argument("--output", "-o", help="write the JSON record here instead of stdout")
    p.add_argument("--metadata", help="write run metadata (timing) to this JSON file")
    if mesh:
        p.add_argument("--n", type=int, default=2, choices=(1, 2))
        p.add_argument("--theta", type=float, default=float(np.pi / 3), help="radians")
        p.add_argument("--resolution", default="64x128",
                       help="'NPSIxNAZI' for n=2, node count for n=1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="capillary-orlicz", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-body", help="create a cap, translated or perturbed body")
    _common(p)
    p.add_argument("kind", choices=("cap", "perturbed", "translate"))
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--mode", default="cos2")
    p.add_argument("--x", help="horizontal translation, comma separated")
    p.add_argument("--input", help="body file to translate (default: cap of radius r)")
    p.add_argument("--out", help="body file to write")
    p.set_defaults(func=cmd_make_body)

    p = sub.add_parser("measure", help="volume, wetting energy, densities and mixed volumes")
    _common(p, mesh=False)
    p.add_argument("body")
    p.add_argument("other", nargs="?")
    p.add_argument("--phi", help="gauge, e.g. 'x^3' or '{\"kind\": \"power\", \"p\": 3}'")
    p.add_argument("--p", type=float, help="exponent for the L_p density")
    p.add_argument("--densities", help="comma separated density kinds for --csv")
    p.add_argument("--csv", help="write nodal densities to this CSV file")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("combine", help="Orlicz combination of two bodies")
    _common(p, mesh=False)
    p.add_argument("body1")
    p.add_argument("body2")
    p.add_argument("--phi", default="x^3")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--out", help="body file to write")
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("verify", help="randomized inequality checks")
    _common(p)
    p.add_argument("--suite", default="all", help=f"comma separated from {', '.join(SUITES)} or 'all'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--phi", default="x^3", help="gauges separated by ';'")
    p.set_defaults(func=cmd_verify)

    for name, fnc, hlp in (("solve", cmd_solve, "solve the capillary Orlicz-Minkowski problem"),
                           ("sweep", cmd_sweep, "repeat a solve over resolutions and angles")):
        p = sub.add_parser(name, help=hlp)
        _common(p)
        p.add_argument("--phi", default="x^3")
        p.add_argument("--f", default="manufactured:r=1.5",
                       help="'manufactured:r=R', 'smooth:eps=E', 'equality-case' or a JSON "
                            "file with key 'f'")
        p.add_argument("--form", default="unnormalized", choices=sv.FORMS)
        if name == "solve":
            p.add_argument("--out", help="body file to write")
            p.add_argument("--trace", help="CSV of accepted Newton iterates along the path")
        else:
            p.add_argument("--resolutions", default="16x32;32x64;64x128",
                           help="';' separated resolutions")
            p.add_argument("--thetas", help="comma separated contact angles")
            p.add_argument("--csv", help="write one row per run")
        p.set_defaults(func=fnc)
    return parser


def _apply_config(parser, argv):
    """Parse twice: once to find --config, then with the file as defaults."""
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    cfg = load_config(args.config)
    solver_opts = cfg.pop("solver", None)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions}
    unknown = set(cfg) - known
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    if "resolution" in cfg and not isinstance(cfg["resolution"], str):
        cfg["resolution"] = "x".join(str(v) for v in cfg["resolution"])
    if isinstance(cfg.get("phi"), dict):
        cfg["phi"] = json.dumps(cfg["phi"])
    sub.set_defaults(**cfg)
    args = parser.parse_args(argv)
    args.solver_options = solver_opts
    return args


def main(argv=None) -> int:
    parser = build_parser()
    started = time.perf_counter()
    try:
        args = _apply_config(parser, argv)
        code = args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK
    _write_metadata(args, started)
    return code


if __name__ == "__main__":
    sys.exit(main())

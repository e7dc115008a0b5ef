"""Command-line harness.

Subcommands: solve, operator-check, rate-study, regularity-study,
property-suite.  Exit codes: 0 all assertions pass, 2 assertion failure,
1 configuration or runtime error.  A fixed config and seed give
byte-identical CSV/JSON reports at any FRAC_HJB_THREADS value.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ResolvedConfig, load_config, resolve_config
from .fracops import (
    FractionalOrder,
    OperatorBackend,
    apply_quadrature,
    apply_spectral,
    quadrature_matrix,
    riesz_identity_residual,
)
from .grid import GridField, PeriodicGrid, sample, sup_dist, write_field_csv
from .hamiltonians import make_catalog_hamiltonian
from .solver import SolveError, SolverConfig, solve
from .studies import (
    make_initial_data,
    run_property_suite,
    run_rate_study,
    run_regularity_study,
    study_config_from_resolved,
)

__all__ = ["cli_main", "main"]


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_report(out: Path, name: str, report: dict, cfg: ResolvedConfig) -> None:
    payload = dict(report)
    payload["config"] = cfg.to_dict()
    payload["config_sha256"] = cfg.sha256()
    _write_json(out / f"{name}.json", payload)
    (out / "resolved_config.ini").write_text(cfg.to_ini_text())


def _rate_csv(out: Path, report: dict) -> None:
    lines = ["epsilon,error,self_error,model_eps_log,ratio"]
    for r in report["rows"]:
        lines.append(
            ",".join(
                f"{r[k]:.17g}" for k in ("epsilon", "error", "self_error", "model_eps_log", "ratio")
            )
        )
    (out / "rate_study.csv").write_text("\n".join(lines) + "\n")


def _regularity_csv(out: Path, report: dict) -> None:
    keys = list(report["rows"][0].keys())
    lines = [",".join(keys)]
    for r in report["rows"]:
        lines.append(",".join(f"{r[k]:.17g}" for k in keys))
    (out / "regularity_study.csv").write_text("\n".join(lines) + "\n")


def _property_csv(out: Path, report: dict) -> None:
    lines = ["name,measured,threshold,comparator,passed"]
    for r in report["verdict"]["rows"]:
        lines.append(f"{r['name']},{r['measured']:.17g},{r['threshold']:.17g},{r['comparator']},{int(r['passed'])}")
    (out / "property_suite.csv").write_text("\n".join(lines) + "\n")


def _prepare_out(arg: str | None) -> Path:
    out = Path(arg) if arg else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(path: str, seed: int | None) -> ResolvedConfig:
    cfg = load_config(path)
    if seed is not None:
        data = cfg.to_dict()
        data["study"]["seed"] = int(seed)
        cfg = resolve_config(data)
    return cfg


def _cmd_solve(args) -> int:
    cfg = _load(args.config, args.seed)
    out = _prepare_out(args.out)
    sc = study_config_from_resolved(cfg, kind="solve")
    grid = sc.grid
    u0 = make_initial_data(grid, sc.initial_data)
    snapshots = cfg["solver"]["snapshots"]
    if isinstance(snapshots, str):
        snapshots = list(np.round(np.linspace(sc.final_time / 10.0, sc.final_time, 10), 12))
    spec = make_catalog_hamiltonian(
        sc.hamiltonian_kind,
        **(
            {"a": sc.hamiltonian_params["a"]}
            if sc.hamiltonian_kind == "transport"
            else {"lam": sc.hamiltonian_params["lam"], "b": sc.hamiltonian_params["b"], "f": sc.hamiltonian_params["f"]}
            if sc.hamiltonian_kind == "affine"
            else {}
        ),
    )
    solver_cfg = SolverConfig(
        epsilon=float(cfg["solver"]["epsilon"]),
        order=FractionalOrder(sc.s),
        backend=sc.backend,
        final_time=sc.final_time,
        snapshot_times=tuple(float(t) for t in snapshots),
        cfl_safety=sc.cfl,
    )
    meta: dict = {}
    traj = solve(u0, spec, solver_cfg, metadata=meta)
    files = []
    for i, (t, f) in enumerate(zip(traj.times, traj.fields)):
        name = f"snapshot_{i:03d}.csv"
        write_field_csv(f, out / name)
        files.append({"file": name, "time": float(t)})
    manifest = {
        "snapshots": files,
        "config": cfg.to_dict(),
        "config_sha256": cfg.sha256(),
        "solver_metadata": meta,
    }
    _write_json(out / "manifest.json", manifest)
    (out / "resolved_config.ini").write_text(cfg.to_ini_text())
    from .figures import save_solution_figure

    save_solution_figure(traj.times, traj.fields, out / "solution.png")
    print(f"solve: wrote {len(files)} snapshots to {out}")
    return 0


def _cmd_operator_check(args) -> int:
    n = args.n
    grid = PeriodicGrid(1, n, 2.0 * math.pi)
    rng = np.random.default_rng(args.seed)
    be = OperatorBackend(kind="quadrature", kappa=args.kappa)
    checks: list[tuple[str, float, float, str]] = []

    def random_band_limited() -> GridField:
        x = grid.axis()
        v = np.zeros_like(x)
        for k in range(1, min(n // 8, 12) + 1):
            a, b = rng.normal(size=2)
            v += (a * np.sin(k * x) + b * np.cos(k * x)) / (1 + k)
        return GridField(grid, v)

    # linearity of both backends
    worst_lin = 0.0
    for _ in range(5):
        u, v = random_band_limited(), random_band_limited()
        a, b = rng.normal(size=2)
        combo = GridField(grid, a * u.values + b * v.values)
        for apply_fn in (
            lambda w: apply_spectral(w, 1.0),
            lambda w: apply_quadrature(w, 1.0, be),
        ):
            lhs = apply_fn(combo).values
            rhs = a * apply_fn(u).values + b * apply_fn(v).values
            scale = max(1.0, float(np.max(np.abs(rhs))))
            worst_lin = max(worst_lin, float(np.max(np.abs(lhs - rhs))) / scale)
    checks.append(("linearity_residual", worst_lin, 1e-12, "<="))

    # quadrature matrix structure: symmetry, sign, row sums, positivity
    mat = quadrature_matrix(grid, 1.0, be)
    checks.append(("matrix_asymmetry", float(np.max(np.abs(mat - mat.T))), 1e-13, "<="))
    off_mask = ~np.eye(n, dtype=bool)
    checks.append(("matrix_offdiag_max", float(np.max(mat[off_mask])), 0.0, "<="))
    checks.append(("matrix_row_sum", float(np.max(np.abs(mat.sum(axis=1)))), 1e-10 * float(np.max(np.diag(mat))), "<="))
    worst_quad_form = math.inf
    for _ in range(5):
        u = random_band_limited()
        worst_quad_form = min(worst_quad_form, float(u.values @ (mat @ u.values)))
    checks.append(("quadratic_form_min", worst_quad_form, -1e-10, ">="))

    # spectral vs quadrature consistency at three refinement levels
    diffs = []
    for m in (n // 2, n, 2 * n):
        gm = PeriodicGrid(1, m, 2.0 * math.pi)
        um = sample(gm, lambda x: np.exp(np.sin(x)))
        diffs.append(sup_dist(apply_quadrature(um, 1.0, OperatorBackend("quadrature", kappa=args.kappa)), apply_spectral(um, 1.0)))
    order = float(np.polyfit(np.log([2.0, 1.0, 0.5]), np.log(diffs), 1)[0])
    checks.append(("consistency_order", order, 1.0, ">="))

    # translation equivariance
    u = random_band_limited()
    shifted_then = apply_quadrature(GridField(grid, np.roll(u.values, 3)), 1.0, be).values
    then_shifted = np.roll(apply_quadrature(u, 1.0, be).values, 3)
    checks.append(("equivariance_quadrature", float(np.max(np.abs(shifted_then - then_shifted))), 0.0, "<="))
    s_shift = apply_spectral(GridField(grid, np.roll(u.values, 3)), 1.0).values
    s_then = np.roll(apply_spectral(u, 1.0).values, 3)
    checks.append(("equivariance_spectral", float(np.max(np.abs(s_shift - s_then))), 1e-12, "<="))

    # Riesz identity on random band-limited fields
    worst_riesz = max(riesz_identity_residual(random_band_limited()) for _ in range(20))
    checks.append(("riesz_residual", worst_riesz, 1e-10, "<="))

    rows = [
        {
            "name": name,
            "measured": measured,
            "threshold": threshold,
            "comparator": comp,
            "passed": bool(measured <= threshold if comp == "<=" else measured >= threshold),
        }
        for name, measured, threshold, comp in checks
    ]
    overall = all(r["passed"] for r in rows)
    report = {"study": "operator-check", "n": n, "rows": rows, "overall": overall}
    for r in rows:
        print(
            f"{'PASS' if r['passed'] else 'FAIL'} {r['name']}: {r['measured']:.3e} "
            f"({r['comparator']} {r['threshold']:.3e})"
        )
    if args.out:
        out = _prepare_out(args.out)
        _write_json(out / "operator_check.json", report)
    return 0 if overall else 2


def _run_study(args, kind: str) -> int:
    cfg = _load(args.config, args.seed)
    out = _prepare_out(args.out)
    sc = study_config_from_resolved(cfg, kind=kind)
    if kind == "rate":
        report = run_rate_study(sc).to_dict()
        _rate_csv(out, report)
        _write_report(out, "rate_study", report, cfg)
        from .figures import save_rate_figure

        save_rate_figure(report, out / "rate_study.png")
    elif kind == "regularity":
        report = run_regularity_study(sc)
        _regularity_csv(out, report)
        _write_report(out, "regularity_study", report, cfg)
        from .figures import save_regularity_figure

        save_regularity_figure(report, out / "regularity_study.png")
    else:
        report = run_property_suite(sc)
        _property_csv(out, report)
        _write_report(out, "property_suite", report, cfg)
        from .figures import save_property_figure

        save_property_figure(report, out / "property_suite.png")
    status = "PASS" if report["passed"] else "FAIL"
    print(f"{kind}-study: {status} (reports in {out})")
    return 0 if report["passed"] else 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="frac-hjb", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_command(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="INI config file")
        p.add_argument("--out", default=None, help="output directory (default: current)")
        p.add_argument("--seed", type=int, default=None, help="override study.seed")
        return p

    add_config_command("solve", "solve one initial-value problem and export snapshot CSVs")
    add_config_command("rate-study", "vanishing-viscosity error rates against exact oracles")
    add_config_command("regularity-study", "C^{1,alpha} norms, Hölder scans, oscillation decay")
    add_config_command("property-suite", "comparison/shift/Lipschitz/barrier/convolution property checks")

    p_op = sub.add_parser("operator-check", help="fractional-operator invariant checks")
    p_op.add_argument("--n", type=int, default=512)
    p_op.add_argument("--kappa", type=float, default=None)
    p_op.add_argument("--seed", type=int, default=0)
    p_op.add_argument("--out", default=None)
    return parser


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "operator-check":
            return _cmd_operator_check(args)
        if args.command == "rate-study":
            return _run_study(args, "rate")
        if args.command == "regularity-study":
            return _run_study(args, "regularity")
        if args.command == "property-suite":
            return _run_study(args, "property")
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (SolveError, ValueError, OSError, NotImplementedError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())

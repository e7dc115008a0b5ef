"""Experiment orchestration: rate studies, regularity studies, and the
theorem property suite.

Every study consumes a resolved config, fans independent solves over a
thread pool capped by the FRAC_HJB_THREADS environment variable, and writes
CSV rows plus a JSON verdict embedding the full resolved config.  Reports
carry no timestamps or absolute paths, so a fixed config and seed reproduce
them byte for byte at any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analysis import (
    CylinderSpec,
    advection_inequality_residuals,
    c1alpha_norm,
    difference_quotient,
    fit_rate,
    holder_seminorm,
    oscillation_sequence,
    sup_convolution,
    inf_convolution,
)
from .config import ConfigError, ResolvedConfig
from .fracops import FractionalOrder, OperatorBackend, apply_operator
from .grid import GridField, PeriodicGrid, Trajectory, discrete_gradient, lipschitz_constant, sample, sup_dist, sup_norm
from .hamiltonians import make_catalog_hamiltonian, shift
from .oracles import fractional_heat_exact, hopf_lax, transport_exact
from .solver import SolverConfig, pde_residual_fields, solve

__all__ = [
    "StudyConfig",
    "RateReport",
    "SuiteRow",
    "SuiteVerdict",
    "run_rate_study",
    "run_regularity_study",
    "run_property_suite",
]


E_INV = math.exp(-1.0)


@dataclass(frozen=True)
class StudyConfig:
    """Typed study parameters extracted from a resolved config."""

    kind: str
    grid: PeriodicGrid
    backend: OperatorBackend
    hamiltonian_kind: str
    hamiltonian_params: dict
    epsilon_ladder: tuple[float, ...]
    epsilon: float
    s: float
    final_time: float
    cfl: float
    tolerances: dict
    seed: int
    initial_data: str
    model: str
    pow_q: float | None
    times: tuple[float, ...]
    pairs: int
    ell_ladder: tuple[float, ...]
    eps_values: tuple[float, ...]

    def __post_init__(self) -> None:
        ladder = self.epsilon_ladder
        if any(b >= a for a, b in zip(ladder, ladder[1:])):
            raise ConfigError("epsilon ladder must be sorted descending")
        if self.kind == "rate":
            bad = [e for e in ladder if not (0.0 < e < E_INV)]
            if bad:
                raise ConfigError(
                    f"epsilon ladder entries {bad} violate the rate-study requirement "
                    f"epsilon in (0, e^-1) = (0, {E_INV:.6f})"
                )


def study_config_from_resolved(cfg: ResolvedConfig, kind: str) -> StudyConfig:
    g = cfg["grid"]
    grid = PeriodicGrid(int(g["dim"]), int(g["n"]), float(g["length"]))
    op = cfg["operator"]
    backend = OperatorBackend(kind=op["kind"], kappa=op["kappa"])
    ham = cfg["hamiltonian"]
    sv = cfg["solver"]
    st = cfg["study"]
    tol = {
        k: float(st[k]) for k in ("ratio_cap", "slope_tol", "min_ratio_gain", "holder_alpha", "excess_tol", "refine_tol")
    }
    return StudyConfig(
        kind=kind,
        grid=grid,
        backend=backend,
        hamiltonian_kind=ham["kind"],
        hamiltonian_params={"a": float(ham["a"]), "lam": float(ham["lambda"]), "b": ham["b"], "f": ham["f"]},
        epsilon_ladder=tuple(float(e) for e in st["epsilon_ladder"]),
        epsilon=float(sv["epsilon"]),
        s=float(sv["s"]),
        final_time=float(sv["T"]),
        cfl=float(sv["cfl"]),
        tolerances=tol,
        seed=int(st["seed"]),
        initial_data=st["initial_data"],
        model=st["model"],
        pow_q=None if st["pow_q"] is None else float(st["pow_q"]),
        times=tuple(float(t) for t in st["times"]),
        pairs=int(st["pairs"]),
        ell_ladder=tuple(float(v) for v in st["ell_ladder"]),
        eps_values=tuple(float(v) for v in st["eps_values"]),
    )


def _pool_map(fn, items):
    """Order-preserving map over an optional thread pool (FRAC_HJB_THREADS)."""
    items = list(items)
    workers = max(1, int(os.environ.get("FRAC_HJB_THREADS", "1")))
    if workers == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def make_initial_data(grid: PeriodicGrid, name: str) -> GridField:
    L = grid.length
    if name == "triangle":
        return sample(grid, lambda *x: np.minimum(x[0], L - x[0]))
    if name == "sine":
        return sample(grid, lambda *x: 0.5 * np.sin(2.0 * np.pi * x[0] / L))
    if name == "smooth_mix":
        return sample(
            grid, lambda *x: 0.4 * np.sin(2.0 * np.pi * x[0] / L) + 0.2 * np.cos(4.0 * np.pi * x[0] / L)
        )
    raise ConfigError(f"unknown initial_data {name!r}; choose triangle, sine, or smooth_mix")


def _make_spec(sc: StudyConfig):
    p = sc.hamiltonian_params
    if sc.hamiltonian_kind == "transport":
        return make_catalog_hamiltonian("transport", a=p["a"])
    if sc.hamiltonian_kind == "eikonal":
        return make_catalog_hamiltonian("eikonal")
    if sc.hamiltonian_kind == "quadratic":
        return make_catalog_hamiltonian("quadratic")
    if sc.hamiltonian_kind == "affine":
        return make_catalog_hamiltonian("affine", lam=p["lam"], b=p["b"], f=p["f"])
    raise ConfigError(f"unknown hamiltonian kind {sc.hamiltonian_kind!r}")


def _solver_config(sc: StudyConfig, eps: float, snapshots) -> SolverConfig:
    return SolverConfig(
        epsilon=eps,
        order=FractionalOrder(sc.s),
        backend=sc.backend,
        final_time=sc.final_time,
        snapshot_times=tuple(snapshots),
        cfl_safety=sc.cfl,
    )


@dataclass(frozen=True)
class RateReport:
    """Per-epsilon (eps, sup error) pairs with fitted constants against the
    eps |log eps| and eps^q error models, plus the pass/fail checks."""

    route: str
    model: str
    q: float | None
    rows: tuple[dict, ...]
    fit: dict
    checks: dict
    passed: bool

    def to_dict(self) -> dict:
        return {
            "study": "rate",
            "route": self.route,
            "model": self.model,
            "q": self.q,
            "rows": list(self.rows),
            "fit": dict(self.fit),
            "checks": dict(self.checks),
            "passed": self.passed,
        }


@dataclass(frozen=True)
class SuiteRow:
    name: str
    measured: float
    threshold: float
    comparator: str  # "<=" or ">="
    passed: bool


@dataclass(frozen=True)
class SuiteVerdict:
    rows: tuple[SuiteRow, ...]
    overall: bool

    @staticmethod
    def from_rows(rows) -> "SuiteVerdict":
        rows = tuple(rows)
        return SuiteVerdict(rows=rows, overall=all(r.passed for r in rows))

    def to_dict(self) -> dict:
        return {
            "overall": self.overall,
            "rows": [
                {
                    "name": r.name,
                    "measured": r.measured,
                    "threshold": r.threshold,
                    "comparator": r.comparator,
                    "passed": r.passed,
                }
                for r in self.rows
            ],
        }


def _row(name: str, measured: float, threshold: float, comparator: str = "<=") -> SuiteRow:
    measured = float(measured)
    ok = measured <= threshold if comparator == "<=" else measured >= threshold
    return SuiteRow(name=name, measured=measured, threshold=float(threshold), comparator=comparator, passed=bool(ok))


# ---------------------------------------------------------------------------
# rate study
# ---------------------------------------------------------------------------


def _viscous_error_exact_transport(sc: StudyConfig, grid: PeriodicGrid, eps: float) -> float:
    """E(eps) = sup |u^eps(T) - u(T)| with both sides in closed form:
    for transport the viscous solution is the heat semigroup applied to the
    shifted data, so no PDE solve enters the reference."""
    u0 = make_initial_data(grid, sc.initial_data)
    inviscid = transport_exact(u0, sc.hamiltonian_params["a"], sc.final_time).field
    viscous = fractional_heat_exact(inviscid, sc.s, eps, sc.final_time).field
    return sup_dist(viscous, inviscid)


def _viscous_error_solver(sc: StudyConfig, grid: PeriodicGrid, spec, eps: float):
    u0 = make_initial_data(grid, sc.initial_data)
    cfg = _solver_config(sc, eps, (sc.final_time,))
    traj = solve(u0, spec, cfg)
    u_eps = traj.fields[-1]
    oracle = hopf_lax(u0, spec, sc.final_time).field
    return u_eps, sup_dist(u_eps, oracle)


def _model_name_and_q(sc: StudyConfig):
    if sc.model == "auto":
        if sc.s == 1.0:
            return "eps_log", None
        return "eps_pow", 1.0 / sc.s
    if sc.model == "eps_pow":
        return "eps_pow", sc.pow_q if sc.pow_q is not None else 1.0 / sc.s
    if sc.model == "eps_log":
        return "eps_log", None
    raise ConfigError(f"unknown rate model {sc.model!r}")


def run_rate_study(sc: StudyConfig):
    """Per-epsilon viscous-vs-inviscid sup errors with model fits.

    Returns a dict report: rows (epsilon, error, self_error, model_eps_log,
    ratio), fit diagnostics, and pass flags for the upper-bound check (and,
    on the transport+triangle route, the superlinearity check).
    """
    if sc.hamiltonian_kind == "transport":
        route = "exact_semigroup"
    elif sc.hamiltonian_kind in ("eikonal", "quadratic"):
        route = "solver_vs_hopf_lax"
    else:
        raise ConfigError(
            f"rate study needs an exact oracle: hamiltonian {sc.hamiltonian_kind!r} is neither "
            "transport nor p-only convex"
        )

    grid = sc.grid
    coarse = PeriodicGrid(grid.dim, grid.points_per_axis // 2, grid.length)
    model, q = _model_name_and_q(sc)
    spec = _make_spec(sc) if route == "solver_vs_hopf_lax" else None

    def one(eps: float):
        if route == "exact_semigroup":
            err = _viscous_error_exact_transport(sc, grid, eps)
            err_coarse = _viscous_error_exact_transport(sc, coarse, eps)
            self_err = abs(err - err_coarse)
        else:
            u_fine, err = _viscous_error_solver(sc, grid, spec, eps)
            u_coarse, _ = _viscous_error_solver(sc, coarse, spec, eps)
            self_err = float(np.max(np.abs(u_fine.values[::2] - u_coarse.values)))
        return err, self_err

    results = _pool_map(one, sc.epsilon_ladder)
    errors = [r[0] for r in results]
    self_errors = [r[1] for r in results]

    min_model = min(_rate_model_value(model, q, e) for e in sc.epsilon_ladder)
    max_self = max(self_errors)
    if max_self > 0.1 * min_model:
        raise ConfigError(
            f"scheme self-error {max_self:.3e} exceeds 10% of the smallest model value "
            f"{min_model:.3e}: refine the grid before trusting the rate measurement"
        )

    fit = fit_rate(list(zip(sc.epsilon_ladder, errors)), model, q)
    checks = {}
    tol = sc.tolerances
    if model == "eps_log":
        checks["upper_bound_ok"] = bool(fit.max_ratio <= tol["ratio_cap"])
        if route == "exact_semigroup" and sc.initial_data == "triangle":
            over_eps = np.asarray(errors) / np.asarray(sc.epsilon_ladder)
            checks["superlinear_ok"] = bool(
                np.all(np.diff(over_eps) > 0) and over_eps[-1] / over_eps[0] >= tol["min_ratio_gain"]
            )
    else:
        checks["upper_bound_ok"] = bool(abs(fit.slope - (q if q is not None else 1.0)) <= tol["slope_tol"])

    rows = []
    for eps, err, se in zip(sc.epsilon_ladder, errors, self_errors):
        mlog = eps * abs(math.log(eps))
        rows.append(
            {
                "epsilon": eps,
                "error": err,
                "self_error": se,
                "model_eps_log": mlog,
                "ratio": err / mlog,
            }
        )
    return RateReport(
        route=route,
        model=model,
        q=q,
        rows=tuple(rows),
        fit=fit.to_dict(),
        checks=checks,
        passed=all(checks.values()),
    )


def _rate_model_value(model: str, q, eps: float) -> float:
    if model == "eps_log":
        return eps * abs(math.log(eps))
    return eps ** (q if q is not None else 1.0)


# ---------------------------------------------------------------------------
# regularity study
# ---------------------------------------------------------------------------


def regularity_snapshots(t_values, cluster_anchor: float | None = None):
    """Snapshot plan: a uniform grid fine enough for every (t/2, t] window
    plus a dense cluster under the anchor time used for cylinder work."""
    t_values = sorted(t_values)
    t_min, t_max = t_values[0], t_values[-1]
    step = t_min / 8.0
    base = np.arange(step, t_max + 1e-12, step)
    if cluster_anchor is None:
        cluster_anchor = 0.75 * t_max
    cluster = cluster_anchor - np.array([0.0100, 0.0075, 0.0050, 0.0025])
    times = sorted(set(np.round(np.concatenate([base, cluster]), 9)))
    return tuple(t for t in times if t > 0)


def run_regularity_study(sc: StudyConfig):
    """Fixed-epsilon regularity measurements on kinked initial data.

    Table rows per requested t: the C^{1,alpha} norm of the space-time
    derivatives on (t/2, t], a Hölder seminorm scan of the solution, and the
    fitted oscillation exponents at interior cylinders; plus the blow-up
    slope of log norm against log t and a refinement-stability number at the
    middle time.
    """
    eps = sc.epsilon
    if eps <= 0:
        raise ConfigError("regularity study requires epsilon > 0 (no regularization to test at 0)")
    alpha = sc.tolerances["holder_alpha"]
    grid = sc.grid
    spec = _make_spec(sc)
    t_max = max(sc.times)
    t_mid = sorted(sc.times)[len(sc.times) // 2]
    cluster_anchor = 0.75 * t_max
    snaps = regularity_snapshots(sc.times, cluster_anchor)

    def run_on(g: PeriodicGrid) -> Trajectory:
        u0 = make_initial_data(g, sc.initial_data)
        cfg = SolverConfig(
            epsilon=eps,
            order=FractionalOrder(sc.s),
            backend=sc.backend,
            final_time=t_max,
            snapshot_times=snaps,
            cfl_safety=sc.cfl,
        )
        return solve(u0, spec, cfg)

    fine = PeriodicGrid(grid.dim, grid.points_per_axis * 2, grid.length)
    traj, traj_fine = _pool_map(run_on, [grid, fine])

    scan_alphas = (0.25, 0.5, 0.75)
    rows = []
    for t in sorted(sc.times):
        norm = c1alpha_norm(traj, t, alpha)
        scan = {a: holder_seminorm(traj, a, (t / 2.0, t)).seminorm for a in scan_alphas}
        rows.append({"t": t, "c1alpha_norm": norm, **{f"holder_{a}": v for a, v in scan.items()}})

    L = grid.length
    osc_reports = []
    radius = 0.16
    kmax = min(4, int(math.floor(math.log2(radius / grid.spacing))))  # smallest cylinder keeps >= 2 nodes
    for x0 in (L / 2.0, L / 4.0, 5.0 * L / 8.0):
        rep = oscillation_sequence(traj, CylinderSpec(cluster_anchor, x0, radius), 0.5, kmax)
        osc_reports.append({"x0": x0, "max_decay_factor": max(rep.decay_factors), **rep.to_dict()})

    norms = np.array([r["c1alpha_norm"] for r in rows])
    ts = np.array([r["t"] for r in rows])
    slope = float(np.polyfit(np.log(ts), np.log(norms), 1)[0])
    stab_coarse = c1alpha_norm(traj, t_mid, alpha)
    stab_fine = c1alpha_norm(traj_fine, t_mid, alpha)
    stability = abs(stab_fine - stab_coarse) / stab_fine

    checks = {
        "all_finite": bool(np.all(np.isfinite(norms))),
        "blowup_direction_ok": bool(norms[0] > norms[-1]),
        "refinement_stable": bool(stability <= sc.tolerances["refine_tol"]),
    }
    return {
        "study": "regularity",
        "epsilon": eps,
        "alpha": alpha,
        "rows": rows,
        "oscillation": osc_reports,
        "norm_vs_t_slope": slope,
        "refinement_relative_change": stability,
        "checks": checks,
        "passed": all(checks.values()),
    }


# ---------------------------------------------------------------------------
# property suite
# ---------------------------------------------------------------------------


def _random_lipschitz_field(grid: PeriodicGrid, rng: np.random.Generator, amplitude: float = 0.8) -> GridField:
    x = grid.axis()
    v = np.zeros_like(x)
    for k in range(1, 6):
        a, b = rng.normal(size=2)
        v += (a * np.sin(2.0 * np.pi * k * x / grid.length) + b * np.cos(2.0 * np.pi * k * x / grid.length)) / k**2
    peak = max(1.0, float(np.max(np.abs(v))))
    return GridField(grid, amplitude * v / peak)


def run_property_suite(sc: StudyConfig):
    """Seeded property checks of the solver against the qualitative theory:

    (a) discrete comparison on random ordered pairs,
    (b) the spatial-shift perturbation study (first-order gap with a stable
        constant across epsilon),
    (c) Lipschitz uniformity across the epsilon ladder,
    (d) barrier sandwich u0 - Ct <= u <= u0 + Ct,
    (e) sup/inf convolution exactness, duality, and the near-subsolution
        excess ladder,
    (f) difference-quotient advection inequalities,
    (g) oscillation decay at interior cylinders.
    """
    grid = sc.grid
    L = grid.length
    be = sc.backend
    tol = sc.tolerances
    rows: list[SuiteRow] = []
    seeds = np.random.SeedSequence(sc.seed).spawn(4)

    # (a) comparison principle on random ordered pairs
    specs_cmp = [
        make_catalog_hamiltonian("eikonal"),
        make_catalog_hamiltonian("affine", lam=0.5, b="sin_x_plus_t", f="cos_x"),
    ]
    rng = np.random.default_rng(seeds[0])
    pair_data = []
    for _ in range(sc.pairs):
        u0 = _random_lipschitz_field(grid, rng)
        gap = _random_lipschitz_field(grid, rng, amplitude=0.3)
        v0 = GridField(grid, u0.values + np.abs(gap.values))
        pair_data.append((u0, v0))
    cfg_cmp = SolverConfig(
        epsilon=0.25,
        order=FractionalOrder(1.0),
        backend=be,
        final_time=0.25,
        snapshot_times=(0.1, 0.25),
        cfl_safety=sc.cfl,
    )

    def compare_pair(args):
        spec, u0, v0 = args
        tu = solve(u0, spec, cfg_cmp)
        tv = solve(v0, spec, cfg_cmp)
        return max(float(np.max(fu.values - fv.values)) for fu, fv in zip(tu.fields, tv.fields))

    tasks = [(spec, u0, v0) for spec in specs_cmp for (u0, v0) in pair_data]
    violations = _pool_map(compare_pair, tasks)
    rows.append(_row("comparison_order_violation", max(violations), 1e-12))

    # (b) shift study on the affine Hamiltonian
    spec_aff = make_catalog_hamiltonian("affine", lam=0.5, b="sin_x_plus_t", f="cos_x")
    u0s = make_initial_data(grid, "sine")
    snaps_b = tuple(np.round(np.linspace(0.05, 0.25, 5), 9))

    def shift_gap(args):
        eps, ell = args
        cfg = SolverConfig(
            epsilon=eps, order=FractionalOrder(1.0), backend=be, final_time=0.25, snapshot_times=snaps_b,
            cfl_safety=sc.cfl,
        )
        base = solve(u0s, spec_aff, cfg)
        if ell == 0.0:
            pert = solve(u0s, shift(spec_aff, 0.0), cfg)
        else:
            pert = solve(u0s, shift(spec_aff, ell), cfg)
        return max(float(np.max(fp.values - fb.values)) for fp, fb in zip(pert.fields, base.fields))

    gaps0 = shift_gap((sc.eps_values[0], 0.0))
    rows.append(_row("shift_zero_gap", abs(gaps0), 1e-12))
    c_fits = []
    slope_dev = 0.0
    for eps in sc.eps_values:
        gaps = _pool_map(shift_gap, [(eps, ell) for ell in sc.ell_ladder])
        ratios = np.asarray(gaps) / np.asarray(sc.ell_ladder)
        c_fits.append(float(np.max(ratios)))
        sl = float(np.polyfit(np.log(sc.ell_ladder), np.log(gaps), 1)[0])
        slope_dev = max(slope_dev, abs(sl - 1.0))
    c_fits = np.asarray(c_fits)
    rows.append(_row("shift_gap_slope_deviation", slope_dev, tol["slope_tol"]))
    rows.append(_row("shift_constant_spread", (c_fits.max() - c_fits.min()) / c_fits.min(), 0.20))

    # (c) Lipschitz uniformity across the epsilon ladder
    tri = make_initial_data(grid, "triangle")
    lip0 = lipschitz_constant(tri)
    snaps_c = tuple(np.round(np.linspace(0.05, sc.final_time, 8), 9))

    def lip_run(args):
        spec, u0, eps = args
        cfg = SolverConfig(
            epsilon=eps, order=FractionalOrder(1.0), backend=be, final_time=sc.final_time,
            snapshot_times=snaps_c, cfl_safety=sc.cfl,
        )
        traj = solve(u0, spec, cfg)
        return max(lipschitz_constant(f) for f in traj.fields)

    for kind, kw in (("transport", {"a": 1.0}), ("eikonal", {})):
        spec_k = make_catalog_hamiltonian(kind, **kw)
        lips = _pool_map(lip_run, [(spec_k, tri, eps) for eps in sc.epsilon_ladder])
        rows.append(_row(f"lipschitz_ratio_{kind}", max(lips) / lip0, 1.05))
    lips_aff = np.asarray(_pool_map(lip_run, [(spec_aff, u0s, eps) for eps in sc.epsilon_ladder]))
    rows.append(_row("lipschitz_affine_spread", (lips_aff.max() - lips_aff.min()) / lips_aff.mean(), 0.10))

    # (d) barrier sandwich with the stated constant
    u0b = make_initial_data(grid, "sine")
    grad0 = discrete_gradient(u0b)[0]
    a_u0 = apply_operator(u0b, FractionalOrder(1.0), be)
    t_sample = np.linspace(0.0, sc.final_time, 257)
    barrier_specs = [
        make_catalog_hamiltonian("transport", a=1.0),
        make_catalog_hamiltonian("eikonal"),
        make_catalog_hamiltonian("quadratic"),
        spec_aff,
    ]

    def barrier_slack(args):
        spec_b, eps = args
        sup_h = max(
            float(np.max(np.abs(spec_b.eval_fn(t, grid.coords(), u0b.values, (grad0.values,)))))
            for t in t_sample
        )
        c_barrier = sup_h + eps * sup_norm(a_u0)
        cfg = SolverConfig(
            epsilon=eps, order=FractionalOrder(1.0), backend=be, final_time=sc.final_time,
            snapshot_times=snaps_c, cfl_safety=sc.cfl,
        )
        traj = solve(u0b, spec_b, cfg)
        slack = 0.0
        for t, f in zip(traj.times, traj.fields):
            slack = min(
                slack,
                float(np.min(u0b.values + c_barrier * t - f.values)),
                float(np.min(f.values - (u0b.values - c_barrier * t))),
            )
        return slack

    slacks = _pool_map(barrier_slack, [(sp, eps) for sp in barrier_specs for eps in (0.1, 1.0)])
    rows.append(_row("barrier_min_slack", min(slacks), -1e-10, comparator=">="))

    # shared run for (e), (f), (g): eikonal with kinked data
    eps_run = sc.epsilon
    spec_e = make_catalog_hamiltonian("eikonal")
    t_end = sc.final_time
    base_snaps = np.arange(t_end / 8.0, t_end + 1e-12, t_end / 32.0)
    anchor = 0.75 * t_end
    cluster = anchor - np.array([0.0075, 0.0050, 0.0025])
    snaps_e = tuple(sorted(set(np.round(np.concatenate([base_snaps, cluster]), 9))))
    cfg_e = SolverConfig(
        epsilon=eps_run, order=FractionalOrder(1.0), backend=be, final_time=t_end,
        snapshot_times=snaps_e, cfl_safety=sc.cfl,
    )
    traj_e = solve(tri, spec_e, cfg_e)

    # (e) sup/inf convolution ladder
    mids, res_fields = pde_residual_fields(traj_e, spec_e, cfg_e)
    window = (t_end / 2.0, t_end)
    in_win = (mids >= window[0]) & (mids <= window[1])
    excess0 = max(float(np.max(r)) for r, m in zip(res_fields, in_win) if m)
    mono_gap = 0.0
    dual_gap = 0.0
    best_excess = None
    neg = Trajectory(traj_e.times, tuple(GridField(grid, -f.values) for f in traj_e.fields))
    for delta in (1e-2, 1e-3, 1e-4, 1e-5):
        ud = sup_convolution(traj_e, delta)
        mono_gap = min(
            mono_gap, min(float(np.min(fd.values - f.values)) for fd, f in zip(ud.fields, traj_e.fields))
        )
        idl = inf_convolution(traj_e, delta)
        dual = sup_convolution(neg, delta)
        dual_gap = max(
            dual_gap, max(float(np.max(np.abs(a.values + b.values))) for a, b in zip(idl.fields, dual.fields))
        )
        m2, r2 = pde_residual_fields(ud, spec_e, cfg_e)
        exc = max(float(np.max(r)) for r, m in zip(r2, in_win) if m)
        best_excess = exc if best_excess is None else min(best_excess, exc)
    rows.append(_row("supconv_domination_gap", mono_gap, 0.0, comparator=">="))
    rows.append(_row("supconv_duality_gap", dual_gap, 0.0))
    rows.append(_row("supconv_best_excess", best_excess, 0.1 + excess0))

    # (f) difference-quotient inequalities
    w = difference_quotient(traj_e, grid.spacing, (1.0,))
    sub_e, sup_e = advection_inequality_residuals(
        w, A=1.0, B=0.0, lam=0.0, eps=eps_run, backend=be, time_window=window
    )
    rows.append(_row("quotient_sub_excess", sub_e, tol["excess_tol"]))
    rows.append(_row("quotient_super_deficit", sup_e, tol["excess_tol"]))

    # (g) oscillation decay at 3 interior cylinders; the smallest cylinder
    # must still hold a few nodes, so the ladder depth adapts to the grid
    # (needs n >= 128 at the default geometry)
    radius_g = min(0.12, 0.8 * anchor)
    kmax_g = max(1, min(2, int(math.floor(math.log2(radius_g / (1.1 * grid.spacing))))))
    worst_decay = 0.0
    min_alpha = np.inf
    for x0 in (L / 2.0, L / 4.0, 5.0 * L / 8.0):
        rep = oscillation_sequence(traj_e, CylinderSpec(anchor, x0, radius_g), 0.5, kmax_g)
        worst_decay = max(worst_decay, max(rep.decay_factors))
        if rep.fitted_alpha is not None:
            min_alpha = min(min_alpha, rep.fitted_alpha)
    rows.append(_row("oscillation_max_decay_factor", worst_decay, 0.97))
    if math.isinf(min_alpha):
        min_alpha = -1.0  # no cylinder admitted a fit: fail rather than pass vacuously
    rows.append(_row("oscillation_min_fitted_alpha", min_alpha, 0.0, comparator=">="))

    verdict = SuiteVerdict.from_rows(rows)
    return {"study": "property", "verdict": verdict.to_dict(), "passed": verdict.overall}

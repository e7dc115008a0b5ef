"""Acceptance criteria: one test per criterion, run at desk scale (1D,
n <= 4096).  Each test prints a PASS line with its measured values after
its assertions hold; tolerances are fixed here, not calibrated elsewhere.
"""

import os

import numpy as np

from frac_hjb import (
    CylinderSpec,
    FractionalOrder,
    GridField,
    OperatorBackend,
    PeriodicGrid,
    SolverConfig,
    advection_inequality_residuals,
    apply_operator,
    apply_quadrature,
    apply_spectral,
    c1alpha_norm,
    difference_quotient,
    discrete_gradient,
    fit_rate,
    fractional_heat_exact,
    inf_convolution,
    lipschitz_constant,
    make_catalog_hamiltonian,
    oscillation_sequence,
    pde_residual_fields,
    riesz_identity_residual,
    sample,
    shift,
    solve,
    sup_convolution,
    sup_dist,
    sup_norm,
    transport_exact,
    Trajectory,
)
from frac_hjb.cli import cli_main

L2PI = 2.0 * np.pi
QUAD = OperatorBackend("quadrature")


def _report(criterion: int, detail: str) -> None:
    print(f"ACCEPTANCE CRITERION {criterion:2d}: PASS - {detail}")


def triangle(grid: PeriodicGrid) -> GridField:
    L = grid.length
    return sample(grid, lambda x: np.minimum(x, L - x))


def rand_lip(grid: PeriodicGrid, rng, amp=0.8) -> GridField:
    x = grid.axis()
    v = np.zeros_like(x)
    for k in range(1, 6):
        a, b = rng.normal(size=2)
        v += (a * np.sin(2 * np.pi * k * x / grid.length) + b * np.cos(2 * np.pi * k * x / grid.length)) / k**2
    return GridField(grid, amp * v / max(1.0, np.max(np.abs(v))))


# ---------------------------------------------------------------------------
# shared solve for criteria 11-14: eikonal, eps = 0.5, triangle data
# ---------------------------------------------------------------------------

_ITEM11_CACHE: dict[int, tuple] = {}


def item11_run(n: int):
    """Eikonal solve with eps = 0.5 on triangle data; snapshots cover the
    regularity windows and cluster under t0 = 0.3 for the cylinder work."""
    if n in _ITEM11_CACHE:
        return _ITEM11_CACHE[n]
    grid = PeriodicGrid(1, n, L2PI)
    base = np.arange(0.05, 0.4 + 1e-12, 0.0125)
    cluster = np.array([0.29, 0.2925, 0.295, 0.2975])
    snaps = tuple(sorted(set(np.round(np.concatenate([base, cluster]), 9))))
    spec = make_catalog_hamiltonian("eikonal")
    cfg = SolverConfig(
        epsilon=0.5, order=FractionalOrder(1.0), backend=QUAD,
        final_time=0.4, snapshot_times=snaps, cfl_safety=0.9,
    )
    traj = solve(triangle(grid), spec, cfg)
    _ITEM11_CACHE[n] = (grid, spec, cfg, traj)
    return _ITEM11_CACHE[n]


def test_criterion_01_operator_exactness():
    """apply_spectral on sin(kx) returns |k|^s sin(kx) to 1e-10."""
    n = 128
    grid = PeriodicGrid(1, n, L2PI)
    worst = 0.0
    for s in (1.0, 1.5, 2.0):
        for k in range(1, n // 4 + 1):
            u = sample(grid, lambda x, k=k: np.sin(k * x))
            out = apply_spectral(u, s)
            worst = max(worst, sup_dist(out, GridField(grid, float(k) ** s * u.values)))
    assert worst <= 1e-10
    _report(1, f"eigenfunction identity, worst sup error {worst:.2e} <= 1e-10 (n={n}, k<=n/4, s in {{1,1.5,2}})")


def test_criterion_02_backend_agreement():
    """Quadrature vs spectral on exp(sin x) at s = 1: <= 1e-2 at n = 512 and
    empirical order >= 1.0 over n in {256, 512, 1024}."""
    diffs = {}
    for n in (256, 512, 1024):
        grid = PeriodicGrid(1, n, L2PI)
        u = sample(grid, lambda x: np.exp(np.sin(x)))
        q = apply_quadrature(u, 1.0, QUAD)
        sp = apply_spectral(u, 1.0)
        diffs[n] = (sup_dist(q, sp), sup_norm(sp))
    rel512 = diffs[512][0] / diffs[512][1]
    assert rel512 <= 1e-2
    order = float(np.polyfit(np.log([1.0, 0.5, 0.25]), np.log([diffs[n][0] for n in (256, 512, 1024)]), 1)[0])
    assert order >= 1.0
    _report(2, f"relative sup difference {rel512:.2e} <= 1e-2 at n=512, empirical order {order:.4f} >= 1.0")


def test_criterion_03_riesz_identity():
    """(-Delta)^{1/2} u equals the Hilbert transform of du/dx: residual
    <= 1e-10 on 20 random band-limited fields."""
    grid = PeriodicGrid(1, 256, L2PI)
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(20):
        x = grid.axis()
        v = np.zeros_like(x)
        for k in range(1, 13):
            a, b = rng.normal(size=2)
            v += (a * np.sin(k * x) + b * np.cos(k * x)) / (1 + k)
        worst = max(worst, riesz_identity_residual(GridField(grid, v)))
    assert worst <= 1e-10
    _report(3, f"worst residual {worst:.2e} <= 1e-10 over 20 random band-limited fields")


def test_criterion_04_fractional_heat_validation():
    """Zero Hamiltonian, s = 1, eps = 1, T = 0.5: quadrature-backend solve vs
    the exact semigroup, error <= 0.02 at n = 256, halving (h, dt) reduces
    it by a factor in [1.7, 2.3]."""
    spec = make_catalog_hamiltonian("transport", a=0.0)
    errs = {}
    for n in (256, 512):
        grid = PeriodicGrid(1, n, L2PI)
        u0 = sample(grid, lambda x: 0.7 * np.sin(x) + 0.3 * np.cos(3 * x))
        cfg = SolverConfig(
            epsilon=1.0, order=FractionalOrder(1.0), backend=QUAD,
            final_time=0.5, snapshot_times=(0.5,), cfl_safety=0.9,
        )
        traj = solve(u0, spec, cfg)
        errs[n] = sup_dist(traj.fields[-1], fractional_heat_exact(u0, 1.0, 1.0, 0.5).field)
    assert errs[256] <= 0.02
    ratio = errs[256] / errs[512]
    assert 1.7 <= ratio <= 2.3
    _report(4, f"sup error {errs[256]:.2e} <= 0.02 at n=256; refinement ratio {ratio:.2f} in [1.7, 2.3]")


def test_criterion_05_comparison_principle():
    """50 random ordered Lipschitz pairs, quadrature backend, eikonal and
    affine Hamiltonians: node-wise ordering preserved to 1e-12."""
    grid = PeriodicGrid(1, 128, L2PI)
    rng = np.random.default_rng(42)
    specs = [
        make_catalog_hamiltonian("eikonal"),
        make_catalog_hamiltonian("affine", lam=0.5, b="sin_x_plus_t", f="cos_x"),
    ]
    cfg = SolverConfig(
        epsilon=0.25, order=FractionalOrder(1.0), backend=QUAD,
        final_time=0.25, snapshot_times=(0.1, 0.25), cfl_safety=0.9,
    )
    pairs = []
    for _ in range(50):
        u0 = rand_lip(grid, rng)
        v0 = GridField(grid, u0.values + np.abs(rand_lip(grid, rng, amp=0.3).values))
        pairs.append((u0, v0))
    worst = -np.inf
    for spec in specs:
        for u0, v0 in pairs:
            tu = solve(u0, spec, cfg)
            tv = solve(v0, spec, cfg)
            for fu, fv in zip(tu.fields, tv.fields):
                worst = max(worst, float(np.max(fu.values - fv.values)))
    assert worst <= 1e-12
    _report(5, f"max ordering violation {worst:.2e} <= 1e-12 over 50 pairs x 2 Hamiltonians")


EPS_LADDER = tuple(2.0**-k for k in range(3, 11))


def test_criterion_06_lipschitz_uniformity():
    """Across the epsilon ladder {2^-3..2^-10}: Lipschitz constants of the
    solution stay <= 1.05 Lip(u0) for transport and eikonal, and a single
    fitted L with spread <= 10% covers the x-dependent affine case."""
    grid = PeriodicGrid(1, 256, L2PI)
    tri = triangle(grid)
    snaps = tuple(np.round(np.linspace(0.05, 0.5, 10), 9))

    def lip_max(spec, u0, eps):
        cfg = SolverConfig(
            epsilon=eps, order=FractionalOrder(1.0), backend=QUAD,
            final_time=0.5, snapshot_times=snaps, cfl_safety=0.9,
        )
        return max(lipschitz_constant(f) for f in solve(u0, spec, cfg).fields)

    lip0 = lipschitz_constant(tri)
    worst_ratio = 0.0
    for kind, kw in (("transport", {"a": 1.0}), ("eikonal", {})):
        spec = make_catalog_hamiltonian(kind, **kw)
        for eps in EPS_LADDER:
            worst_ratio = max(worst_ratio, lip_max(spec, tri, eps) / lip0)
    assert worst_ratio <= 1.05

    sine = sample(grid, lambda x: 0.5 * np.sin(x))
    spec_aff = make_catalog_hamiltonian("affine", lam=0.5, b="sin_x_plus_t", f="cos_x")
    lips = np.array([lip_max(spec_aff, sine, eps) for eps in EPS_LADDER])
    spread = (lips.max() - lips.min()) / lips.mean()
    assert spread <= 0.10
    _report(
        6,
        f"x-independent ratio {worst_ratio:.4f} <= 1.05; affine fitted L = {lips.mean():.4f} "
        f"with spread {spread:.3f} <= 0.10",
    )


def test_criterion_07_barrier_sandwich():
    """u0 - Ct <= u^eps(t) <= u0 + Ct with C = sup|H(t,x,u0,grad u0)| +
    eps sup|(-Delta)^{1/2} u0|, all catalog Hamiltonians, eps in {0.1, 1}."""
    grid = PeriodicGrid(1, 256, L2PI)
    u0 = sample(grid, lambda x: 0.5 * np.sin(x))
    grad0 = discrete_gradient(u0)[0]
    a_u0 = apply_operator(u0, FractionalOrder(1.0), QUAD)
    snaps = tuple(np.round(np.linspace(0.05, 0.5, 10), 9))
    t_sample = np.linspace(0.0, 0.5, 257)
    specs = [
        make_catalog_hamiltonian("transport", a=1.0),
        make_catalog_hamiltonian("eikonal"),
        make_catalog_hamiltonian("quadratic"),
        make_catalog_hamiltonian("affine", lam=0.5, b="sin_x_plus_t", f="cos_x"),
    ]
    worst_slack = np.inf
    for spec in specs:
        sup_h = max(
            float(np.max(np.abs(spec.eval_fn(t, grid.coords(), u0.values, (grad0.values,))))) for t in t_sample
        )
        for eps in (0.1, 1.0):
            c_barrier = sup_h + eps * sup_norm(a_u0)
            cfg = SolverConfig(
                epsilon=eps, order=FractionalOrder(1.0), backend=QUAD,
                final_time=0.5, snapshot_times=snaps, cfl_safety=0.9,
            )
            traj = solve(u0, spec, cfg)
            for t, f in zip(traj.times, traj.fields):
                worst_slack = min(
                    worst_slack,
                    float(np.min(u0.values + c_barrier * t - f.values)),
                    float(np.min(f.values - (u0.values - c_barrier * t))),
                )
    assert worst_slack >= -1e-10
    _report(7, f"min barrier slack {worst_slack:.2e} >= -1e-10 over 4 Hamiltonians x eps in {{0.1, 1}}")


def test_criterion_08_continuous_dependence():
    """Affine Hamiltonian with b = sin(x+t): sup(u_ell - u) is first order in
    |ell| with the fitted constant varying <= 20% across eps in {0.1, 0.5, 1}."""
    grid = PeriodicGrid(1, 256, L2PI)
    u0 = sample(grid, lambda x: 0.5 * np.sin(x))
    spec = make_catalog_hamiltonian("affine", lam=0.5, b="sin_x_plus_t", f="cos_x")
    ells = (0.01, 0.02, 0.04, 0.08)
    snaps = tuple(np.round(np.linspace(0.05, 0.25, 5), 9))
    c_fits = []
    slopes = []
    for eps in (0.1, 0.5, 1.0):
        cfg = SolverConfig(
            epsilon=eps, order=FractionalOrder(1.0), backend=QUAD,
            final_time=0.25, snapshot_times=snaps, cfl_safety=0.9,
        )
        base = solve(u0, spec, cfg)
        gaps = []
        for ell in ells:
            pert = solve(u0, shift(spec, ell), cfg)
            gaps.append(max(float(np.max(fp.values - fb.values)) for fp, fb in zip(pert.fields, base.fields)))
        gaps = np.asarray(gaps)
        c_fits.append(float(np.max(gaps / np.asarray(ells))))
        slopes.append(float(np.polyfit(np.log(ells), np.log(gaps), 1)[0]))
    c_fits = np.asarray(c_fits)
    spread = (c_fits.max() - c_fits.min()) / c_fits.min()
    assert all(0.9 <= s <= 1.1 for s in slopes)
    assert spread <= 0.20
    _report(
        8,
        f"gap slopes {[f'{s:.3f}' for s in slopes]} within first order; C spread {spread:.3f} <= 0.20",
    )


def _transport_rate_errors(s: float, n: int = 4096):
    """E(eps) for transport a = 1, triangle data, L = 2, T = 0.5, via the
    exact semigroup + translation route (no PDE solve in the reference)."""
    grid = PeriodicGrid(1, n, 2.0)
    u0 = triangle(grid)
    shifted = transport_exact(u0, 1.0, 0.5).field
    assert transport_exact(u0, 1.0, 0.5).guaranteed_accuracy == 0.0  # lattice shift
    errs = []
    for eps in EPS_LADDER:
        viscous = fractional_heat_exact(shifted, s, eps, 0.5).field
        errs.append(sup_dist(viscous, shifted))
    return np.asarray(errs)


def test_criterion_09_convergence_rate_eps_log():
    """Critical-case rate: (i) one constant covers E(eps)/(eps |log eps|)
    across the ladder within 1.2x its top value, (ii) E(eps)/eps grows
    monotonically by >= 15% as eps decreases (superlinearity)."""
    errs = _transport_rate_errors(1.0)
    fit = fit_rate(list(zip(EPS_LADDER, errs)), "eps_log")
    assert fit.max_ratio <= 1.2
    over_eps = errs / np.asarray(EPS_LADDER)
    assert np.all(np.diff(over_eps) > 0.0)
    gain = over_eps[-1] / over_eps[0]
    assert gain >= 1.15
    _report(
        9,
        f"max ratio/top ratio {fit.max_ratio:.3f} <= 1.2; E/eps strictly increasing with gain {gain:.2f} >= 1.15",
    )


def test_criterion_10_supercritical_rates():
    """Same setup at s = 1.5 and s = 2: log-log slope of E vs eps within
    1/s +- 0.1."""
    details = []
    for s in (1.5, 2.0):
        errs = _transport_rate_errors(s)
        fit = fit_rate(list(zip(EPS_LADDER, errs)), "eps_pow", q=1.0 / s)
        assert abs(fit.slope - 1.0 / s) <= 0.1
        details.append(f"s={s}: slope {fit.slope:.4f} vs 1/s={1.0 / s:.4f}")
    _report(10, "; ".join(details))


def test_criterion_11_regularization():
    """Eikonal with eps = 0.5 on triangle data: the C^{1,1/2} norm is finite
    at t in {0.1, 0.2, 0.4}, larger at t = 0.1 than at t = 0.4, and stable
    within 15% under grid refinement at t = 0.2."""
    _, _, _, traj_512 = item11_run(512)
    _, _, _, traj_1024 = item11_run(1024)
    vals = {t: c1alpha_norm(traj_1024, t, 0.5) for t in (0.1, 0.2, 0.4)}
    assert all(np.isfinite(v) for v in vals.values())
    assert vals[0.1] > vals[0.4]
    coarse = c1alpha_norm(traj_512, 0.2, 0.5)
    stability = abs(vals[0.2] - coarse) / vals[0.2]
    assert stability <= 0.15
    _report(
        11,
        f"norms {[f'{t}: {v:.2f}' for t, v in vals.items()]}; blow-up direction holds; "
        f"refinement change {stability:.3f} <= 0.15",
    )


def test_criterion_12_oscillation_decay():
    """On the regularization run: oscillation over shrinking cylinders at 3
    interior centres decays by <= 0.97 per halving with fitted alpha > 0."""
    grid, _, _, traj = item11_run(1024)
    L = grid.length
    worst_decay = 0.0
    min_alpha = np.inf
    for x0 in (L / 2.0, L / 4.0, 5.0 * L / 8.0):
        rep = oscillation_sequence(traj, CylinderSpec(0.3, x0, 0.16), 0.5, 4)
        worst_decay = max(worst_decay, max(rep.decay_factors))
        min_alpha = min(min_alpha, rep.fitted_alpha)
    assert worst_decay <= 0.97
    assert min_alpha > 0.0
    _report(12, f"max decay factor {worst_decay:.3f} <= 0.97; min fitted alpha {min_alpha:.3f} > 0")


def test_criterion_13_finite_difference_inequalities():
    """Difference quotients of the regularization run satisfy the linearized
    advection-diffusion inequalities with A = A_R, B = C(1 + sup|u|) = 0,
    lam = 0: excesses <= 0.1 at n = 1024, decreasing at n = 2048.  The
    excesses are measured after the initial layer has relaxed (t >= 0.2)."""
    excesses = {}
    for n in (1024, 2048):
        grid, spec, cfg, traj = item11_run(n)
        w = difference_quotient(traj, grid.spacing, (1.0,))
        a_bound = spec.lipschitz_p(lipschitz_constant(traj.fields[0]) + 1.0)
        b_bound = spec.lipschitz_tx * (1.0 + max(sup_norm(f) for f in traj.fields))
        assert b_bound == 0.0  # eikonal: C = 0
        excesses[n] = advection_inequality_residuals(
            w, A=a_bound, B=b_bound, lam=0.0, eps=cfg.epsilon, backend=QUAD, time_window=(0.2, 0.4)
        )
    assert max(excesses[1024]) <= 0.1
    assert excesses[2048][0] < excesses[1024][0]
    assert excesses[2048][1] < excesses[1024][1]
    _report(
        13,
        f"excesses at n=1024 {tuple(f'{e:.3f}' for e in excesses[1024])} <= 0.1, "
        f"decreasing to {tuple(f'{e:.3f}' for e in excesses[2048])} at n=2048",
    )


def test_criterion_14_sup_convolution_suite():
    """u <= u^delta exactly; inf/sup duality exact; for some delta in
    {1e-2..1e-5} the subsolution excess of u^delta stays within 0.1 of the
    scheme's own residual scale."""
    grid, spec, cfg, traj = item11_run(1024)
    mids, res_fields = pde_residual_fields(traj, spec, cfg)
    window = (mids >= 0.2) & (mids <= 0.4)
    excess0 = max(float(np.max(r)) for r, m in zip(res_fields, window) if m)

    neg = Trajectory(traj.times, tuple(GridField(grid, -f.values) for f in traj.fields))
    best_excess = np.inf
    worst_domination = np.inf
    worst_duality = 0.0
    for delta in (1e-2, 1e-3, 1e-4, 1e-5):
        ud = sup_convolution(traj, delta)
        worst_domination = min(
            worst_domination,
            min(float(np.min(fd.values - f.values)) for fd, f in zip(ud.fields, traj.fields)),
        )
        idl = inf_convolution(traj, delta)
        dual = sup_convolution(neg, delta)
        worst_duality = max(
            worst_duality,
            max(float(np.max(np.abs(a.values + b.values))) for a, b in zip(idl.fields, dual.fields)),
        )
        m2, r2 = pde_residual_fields(ud, spec, cfg)
        exc = max(float(np.max(r)) for r, m in zip(r2, window) if m)
        best_excess = min(best_excess, exc)
    assert worst_domination >= 0.0
    assert worst_duality == 0.0
    assert best_excess <= 0.1 + excess0
    _report(
        14,
        f"domination gap {worst_domination:.1e} >= 0; duality exact; best excess {best_excess:.3f} "
        f"<= 0.1 + scheme residual {excess0:.3f}",
    )


RATE_INI = """
[grid]
n = 1024
length = 2.0

[operator]
kind = spectral

[hamiltonian]
kind = transport
a = 1.0

[solver]
s = 1.0
T = 0.5

[study]
kind = rate
seed = 0
initial_data = triangle
model = eps_log
epsilon_ladder = [0.125, 0.0625, 0.03125, 0.015625]
"""

PROPERTY_INI = """
[grid]
n = 256

[solver]
epsilon = 0.5
T = 0.4

[study]
kind = property
seed = 0
pairs = 6
eps_values = [0.1, 0.5, 1.0]
epsilon_ladder = [0.125, 0.03125, 0.0078125]
"""

REGULARITY_INI = """
[grid]
n = 256

[hamiltonian]
kind = eikonal

[solver]
epsilon = 0.5
T = 0.4

[study]
kind = regularity
seed = 0
initial_data = triangle
times = [0.1, 0.2, 0.4]
"""


def test_criterion_15_determinism(tmp_path):
    """The study reports behind criteria 5-14 are byte-identical across 1, 2,
    and 8 worker threads at a fixed seed."""
    jobs = [
        ("rate-study", RATE_INI, "rate_study"),
        ("property-suite", PROPERTY_INI, "property_suite"),
        ("regularity-study", REGULARITY_INI, "regularity_study"),
    ]
    old = os.environ.get("FRAC_HJB_THREADS")
    outputs: dict[tuple, dict[str, bytes]] = {}
    try:
        for sub, ini, stem in jobs:
            cfg_path = tmp_path / f"{stem}.ini"
            cfg_path.write_text(ini)
            for threads in (1, 2, 8):
                os.environ["FRAC_HJB_THREADS"] = str(threads)
                out = tmp_path / f"{stem}_t{threads}"
                rc = cli_main([sub, str(cfg_path), "--out", str(out)])
                assert rc == 0, f"{sub} failed at {threads} threads"
                outputs[(stem, threads)] = {
                    ext: (out / f"{stem}.{ext}").read_bytes() for ext in ("csv", "json")
                }
    finally:
        if old is None:
            os.environ.pop("FRAC_HJB_THREADS", None)
        else:
            os.environ["FRAC_HJB_THREADS"] = old
    for sub, ini, stem in jobs:
        for threads in (2, 8):
            for ext in ("csv", "json"):
                assert outputs[(stem, threads)][ext] == outputs[(stem, 1)][ext], (
                    f"{stem}.{ext} differs between 1 and {threads} threads"
                )
    _report(15, "rate/property/regularity reports byte-identical across 1, 2, 8 worker threads")

"""Quantitative estimators turning regularity statements into measurements.

Parabolic Hölder seminorms over node/snapshot pairs, C^{1,alpha} norms of
the space-time derivatives on dyadic time windows, difference quotients and
the advection-diffusion inequalities they satisfy, sup/inf convolutions,
oscillation decay over shrinking parabolic cylinders Q_r = [t0 - r, t0] x
B_r(x0), and least-squares rate fits against the eps |log eps| and eps^q
error models.

The pairwise estimators are exact discrete suprema (no sampling), hence
deterministic; they are implemented for one space dimension, which is where
every quantitative study in this package runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fracops import FractionalOrder, OperatorBackend, apply_quadrature, apply_spectral
from .grid import GridField, Trajectory

__all__ = [
    "CylinderSpec",
    "HolderReport",
    "OscillationReport",
    "RateFit",
    "holder_seminorm",
    "c1alpha_norm",
    "difference_quotient",
    "advection_inequality_residuals",
    "sup_convolution",
    "inf_convolution",
    "oscillation_sequence",
    "fit_rate",
]


@dataclass(frozen=True)
class CylinderSpec:
    """Parabolic cylinder [t0 - r, t0] x B_r(x0)."""

    center_time: float
    center_point: float
    radius: float

    def __post_init__(self) -> None:
        if not (self.radius > 0):
            raise ValueError(f"cylinder radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class HolderReport:
    alpha: float
    seminorm: float
    window: float  # spatial pair-separation cap actually used

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "seminorm": self.seminorm, "window": self.window}


@dataclass(frozen=True)
class OscillationReport:
    radii: tuple[float, ...]
    oscillations: tuple[float, ...]
    decay_factors: tuple[float, ...]
    fitted_alpha: float | None
    fit_residual: float | None
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "radii": list(self.radii),
            "oscillations": list(self.oscillations),
            "decay_factors": list(self.decay_factors),
            "fitted_alpha": self.fitted_alpha,
            "fit_residual": self.fit_residual,
            "note": self.note,
        }


def _require_1d(traj: Trajectory, what: str) -> None:
    if traj.grid.dim != 1:
        raise NotImplementedError(f"{what} is implemented for dim = 1 trajectories only")


def _window_indices(times: np.ndarray, t_a: float, t_b: float, closed_left: bool = True) -> np.ndarray:
    tol = 1e-12 * max(1.0, abs(t_b))
    if closed_left:
        mask = (times >= t_a - tol) & (times <= t_b + tol)
    else:
        mask = (times > t_a + tol) & (times <= t_b + tol)
    return np.nonzero(mask)[0]


def _pair_sup(times: np.ndarray, stack: np.ndarray, alpha: float, j_cap: int, h: float) -> float:
    """Exact sup over snapshot/node pairs of |w(t,x) - w(s,y)| / (|t-s|^a + |x-y|^a).

    stack has shape (S, n) or (S, n, C); vector values use the Euclidean norm.
    Spatial separations run over 1..j_cap lattice offsets (nearest-image metric).
    """
    vec = stack if stack.ndim == 3 else stack[..., None]
    n_snap = vec.shape[0]
    dt_pow = np.abs(times[:, None] - times[None, :]) ** alpha
    best = 0.0
    for j in range(0, j_cap + 1):
        shifted = np.roll(vec, -j, axis=1)
        dist_pow = (j * h) ** alpha
        for a in range(n_snap):
            b_start = a + 1 if j == 0 else a
            for b in range(b_start, n_snap):
                denom = dt_pow[a, b] + dist_pow
                num = float(np.max(np.sqrt(((vec[a] - shifted[b]) ** 2).sum(axis=-1))))
                if a != b:
                    num = max(num, float(np.max(np.sqrt(((vec[b] - shifted[a]) ** 2).sum(axis=-1)))))
                if num > best * denom:
                    best = num / denom
    return best


def holder_seminorm(traj: Trajectory, alpha: float, time_window, spatial_window: float | None = None) -> HolderReport:
    """Discrete parabolic Hölder seminorm over the snapshots in [t_a, t_b].

    Spatial pair separation is capped at `spatial_window` (default L/4: the
    periodic metric is unambiguous below L/2, and L/4 keeps a margin).
    The sup is exact over all admissible pairs and monotone nondecreasing in
    the window.
    """
    _require_1d(traj, "holder_seminorm")
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    t_a, t_b = float(time_window[0]), float(time_window[1])
    idx = _window_indices(traj.times, t_a, t_b)
    if idx.size == 0:
        raise ValueError(f"empty time window [{t_a}, {t_b}] (snapshots at {traj.times})")
    grid = traj.grid
    w_cap = grid.length / 4.0 if spatial_window is None else float(spatial_window)
    w_cap = min(w_cap, grid.length / 2.0)
    j_cap = min(int(np.floor(w_cap / grid.spacing + 1e-9)), grid.points_per_axis // 2)
    stack = np.stack([traj.fields[i].values for i in idx])
    value = _pair_sup(traj.times[idx], stack, alpha, j_cap, grid.spacing)
    return HolderReport(alpha=alpha, seminorm=value, window=j_cap * grid.spacing)


def _time_derivative_stack(traj: Trajectory) -> np.ndarray:
    """d/dt of the snapshots: central differences inside, one-sided at the ends."""
    u = traj.stack()
    t = traj.times
    out = np.empty_like(u)
    if len(t) < 2:
        raise ValueError("time derivative needs at least 2 snapshots")
    out[0] = (u[1] - u[0]) / (t[1] - t[0])
    out[-1] = (u[-1] - u[-2]) / (t[-1] - t[-2])
    for k in range(1, len(t) - 1):
        out[k] = (u[k + 1] - u[k - 1]) / (t[k + 1] - t[k - 1])
    return out


def c1alpha_norm(traj: Trajectory, t: float, alpha: float, spatial_window: float | None = None) -> float:
    """C^{1,alpha} norm surrogate on the window (t/2, t]:

        sup |u| + sup |(d_t u, grad u)| + Hölder-alpha seminorm of (d_t u, grad u),

    with the time derivative taken between snapshots and the gradient by
    central differences.  Evaluated at a geometric ladder of times this
    exposes the t^{-alpha} blow-up profile of the regularity estimate.
    """
    _require_1d(traj, "c1alpha_norm")
    idx = _window_indices(traj.times, t / 2.0, t, closed_left=False)
    if idx.size < 3:
        raise ValueError(f"c1alpha_norm needs >= 3 snapshots in ({t / 2}, {t}], found {idx.size}")
    grid = traj.grid
    h = grid.spacing
    u = traj.stack()
    dt_stack = _time_derivative_stack(traj)[idx]
    u_win = u[idx]
    grad = (np.roll(u_win, -1, axis=1) - np.roll(u_win, 1, axis=1)) / (2.0 * h)
    deriv = np.stack([dt_stack, grad], axis=-1)  # (S, n, 2)

    w_cap = grid.length / 4.0 if spatial_window is None else float(spatial_window)
    j_cap = min(int(np.floor(min(w_cap, grid.length / 2.0) / h + 1e-9)), grid.points_per_axis // 2)
    semi = _pair_sup(traj.times[idx], deriv, alpha, j_cap, h)
    sup_u = float(np.max(np.abs(u_win)))
    sup_d = float(np.max(np.sqrt((deriv**2).sum(axis=-1))))
    return sup_u + sup_d + semi


def difference_quotient(traj: Trajectory, h_shift: float, ell) -> Trajectory:
    """Trajectory of (u(t, x + h ell) - u(t, x)) / |h| for a lattice shift h ell.

    ell is a signed unit vector along a grid axis; h ell must land on the
    lattice exactly.
    """
    grid = traj.grid
    ell_vec = np.atleast_1d(np.asarray(ell, dtype=float))
    if ell_vec.size == 1 and grid.dim == 1:
        ell_vec = np.array([ell_vec[0]])
    nonzero = np.nonzero(ell_vec)[0]
    if len(nonzero) != 1 or abs(abs(ell_vec[nonzero[0]]) - 1.0) > 1e-12:
        raise ValueError("ell must be a signed unit vector along one grid axis")
    axis = int(nonzero[0])
    direction = float(np.sign(ell_vec[axis]))
    steps = h_shift * direction / grid.spacing
    if abs(steps - round(steps)) > 1e-9 or round(steps) == 0:
        raise ValueError(f"h * ell = {h_shift * direction} is not a nonzero lattice multiple of spacing {grid.spacing}")
    m = int(round(steps))
    fields = tuple(
        GridField(grid, (np.roll(f.values, -m, axis=axis) - f.values) / abs(h_shift)) for f in traj.fields
    )
    return Trajectory(traj.times, fields)


def _fractional_term(field: GridField, backend: OperatorBackend) -> np.ndarray:
    order = FractionalOrder(1.0)
    if backend.kind == "spectral":
        return apply_spectral(field, order).values
    return apply_quadrature(field, order, backend).values


def advection_inequality_residuals(
    w: Trajectory,
    A: float,
    B: float,
    lam: float,
    eps: float,
    backend: OperatorBackend,
    time_window=None,
):
    """Violations of the two advection-diffusion inequalities

        w_t - A |grad w| - B + lam w + eps (-Delta)^{1/2} w <= 0,
        w_t + A |grad w| + B + lam w + eps (-Delta)^{1/2} w >= 0,

    evaluated at the midpoints of consecutive snapshots (time derivative
    between the pair, remaining terms on the averaged state).  |grad w| is
    the larger one-sided slope, the monotone-consistent estimate for
    viscosity inequalities; it can only add slack where central differences
    would underestimate a peak.  Returns (sub_excess, super_deficit): the
    sup of the positive part of each violation.  For difference quotients of
    genuine solutions both shrink to the discretization-error scale under
    refinement.
    """
    _require_1d(w, "advection_inequality_residuals")
    if not (A > 0):
        raise ValueError(f"advection bound A must be positive, got {A}")
    if B < 0:
        raise ValueError(f"forcing bound B must be nonnegative, got {B}")
    grid = w.grid
    h = grid.spacing
    times = w.times
    if len(times) < 2:
        raise ValueError("need at least 2 snapshots")
    t_lo, t_hi = (times[0], times[-1]) if time_window is None else (float(time_window[0]), float(time_window[1]))

    sub_excess = 0.0
    super_deficit = 0.0
    for k in range(len(times) - 1):
        t_mid = 0.5 * (times[k] + times[k + 1])
        if t_mid < t_lo - 1e-12 or t_mid > t_hi + 1e-12:
            continue
        dt = times[k + 1] - times[k]
        u_a = w.fields[k].values
        u_b = w.fields[k + 1].values
        w_t = (u_b - u_a) / dt
        w_bar = 0.5 * (u_a + u_b)
        grad_mag = np.maximum(
            np.abs((np.roll(w_bar, -1) - w_bar) / h),
            np.abs((w_bar - np.roll(w_bar, 1)) / h),
        )
        frac = eps * _fractional_term(GridField(grid, w_bar), backend) if eps != 0.0 else 0.0
        common = w_t + lam * w_bar + frac
        sub_excess = max(sub_excess, float(np.max(common - A * grad_mag - B)))
        super_deficit = max(super_deficit, float(np.max(-(common + A * grad_mag + B))))
    return max(sub_excess, 0.0), max(super_deficit, 0.0)


def _extremal_convolution(traj: Trajectory, delta: float, sign: float) -> Trajectory:
    _require_1d(traj, "sup/inf convolution")
    if not (delta > 0):
        raise ValueError(f"delta must be positive, got {delta}")
    u = traj.stack()
    times = traj.times
    grid = traj.grid
    h = grid.spacing
    n = grid.points_per_axis
    m_bound = 2.0 * float(np.max(np.abs(u)))
    gamma = math.sqrt(delta * m_bound)
    j_cap = min(int(gamma // h), n // 2)
    out = u.copy()
    reduce_fn = np.maximum if sign > 0 else np.minimum
    for k in range(len(times)):
        for m in range(len(times)):
            dt2 = (times[k] - times[m]) ** 2
            if dt2 > gamma**2 + 1e-15:
                continue
            for j in range(-j_cap, j_cap + 1):
                if m == k and j == 0:
                    continue
                pen = ((j * h) ** 2 + dt2) / delta
                cand = np.roll(u[m], -j) - sign * pen
                out[k] = reduce_fn(out[k], cand)
    fields = tuple(GridField(grid, out[k]) for k in range(len(times)))
    return Trajectory(times, fields)


def sup_convolution(traj: Trajectory, delta: float) -> Trajectory:
    """u^delta(t, x) = sup over snapshots (s, y) of u(s, y) - (|x-y|^2 + (t-s)^2)/delta,
    searched within the paraboloid-reach radius gamma = sqrt(delta * 2 sup|u|).

    u <= u^delta node-wise (the centre pair is always a candidate) and the
    gain is at most Lip(u)^2 delta / 4 for Lipschitz data.
    """
    return _extremal_convolution(traj, delta, +1.0)


def inf_convolution(traj: Trajectory, delta: float) -> Trajectory:
    """Dual transform: inf over snapshots of u(s, y) + (|x-y|^2 + (t-s)^2)/delta."""
    return _extremal_convolution(traj, delta, -1.0)


def oscillation_sequence(traj: Trajectory, cyl: CylinderSpec, ratio: float, kmax: int) -> OscillationReport:
    """Oscillation of the trajectory over the shrinking cylinders Q_{r ratio^k}(t0, x0),
    k = 0..kmax, with per-step decay factors and the alpha fitted from
    log osc against log radius (dropping the outermost cylinder, whose
    oscillation mixes in far-field behaviour).
    """
    _require_1d(traj, "oscillation_sequence")
    if not (0.0 < ratio < 1.0):
        raise ValueError(f"ratio must lie in (0, 1), got {ratio}")
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    grid = traj.grid
    times = traj.times
    t0 = cyl.center_time
    if t0 - cyl.radius < times[0] - 1e-12 or t0 > times[-1] + 1e-12:
        raise ValueError(f"cylinder [t0 - r, t0] = [{t0 - cyl.radius}, {t0}] must lie within the trajectory span")
    x = grid.axis()
    dist = np.abs(x - cyl.center_point)
    dist = np.minimum(dist, grid.length - dist)
    u = traj.stack()

    radii = [cyl.radius * ratio**k for k in range(kmax + 1)]
    r_min = radii[-1]
    nodes_min = int(np.count_nonzero(dist <= r_min + 1e-12))
    snaps_min = int(np.count_nonzero((times >= t0 - r_min - 1e-12) & (times <= t0 + 1e-12)))
    if nodes_min < 2 or snaps_min < 2:
        raise ValueError(
            f"cylinder under-resolved: smallest radius {r_min} contains "
            f"{nodes_min} nodes and {snaps_min} snapshots (need >= 2 of each)"
        )

    oscs = []
    for r in radii:
        tmask = (times >= t0 - r - 1e-12) & (times <= t0 + 1e-12)
        xmask = dist <= r + 1e-12
        block = u[np.ix_(tmask, xmask)]
        oscs.append(float(block.max() - block.min()))

    decay = tuple(
        oscs[k + 1] / oscs[k] if oscs[k] > 0 else float("nan") for k in range(kmax)
    )
    fit_alpha = None
    fit_res = None
    note = ""
    pts = [(radii[k], oscs[k]) for k in range(1, kmax + 1) if oscs[k] > 0]
    if len(pts) >= 2:
        lr = np.log([p[0] for p in pts])
        lo = np.log([p[1] for p in pts])
        coeffs, res, *_ = np.polyfit(lr, lo, 1, full=True)
        fit_alpha = float(coeffs[0])
        fit_res = float(res[0]) if len(res) else 0.0
    else:
        note = "not-applicable: fewer than 2 positive oscillations beyond the outermost cylinder"
    return OscillationReport(
        radii=tuple(radii),
        oscillations=tuple(oscs),
        decay_factors=decay,
        fitted_alpha=fit_alpha,
        fit_residual=fit_res,
        note=note,
    )


@dataclass(frozen=True)
class RateFit:
    model: str
    q: float | None
    ratios: tuple[float, ...]
    C_fit: float
    max_ratio: float  # max ratio normalized by the first (largest-eps) ratio
    slope: float
    over_covers: bool
    fit_residual: float

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "q": self.q,
            "ratios": list(self.ratios),
            "C_fit": self.C_fit,
            "max_ratio": self.max_ratio,
            "slope": self.slope,
            "over_covers": self.over_covers,
            "fit_residual": self.fit_residual,
        }


def _model_value(model: str, q: float | None, eps: float) -> float:
    if model == "eps_log":
        return eps * abs(math.log(eps))
    if model == "eps_pow":
        if q is None:
            raise ValueError("model eps_pow requires the exponent q")
        return eps**q
    raise ValueError(f"unknown rate model {model!r}; choose eps_log or eps_pow")


def fit_rate(points, model: str = "eps_log", q: float | None = None) -> RateFit:
    """Diagnostics of measured (eps, error) pairs against an error model.

    ratios are error / model(eps) per point; C_fit is their maximum (the
    single covering constant); max_ratio is C_fit normalized by the ratio at
    the first (largest) eps, so values <= 1 mean the constant is set at the
    top of the ladder; slope is the least-squares slope of log error against
    log eps.  over_covers flags ratios that collapse by half or more across
    the ladder (the model dominates the data).
    """
    pts = [(float(e), float(err)) for e, err in points]
    if not pts:
        raise ValueError("fit_rate requires at least one (eps, error) point")
    for e, err in pts:
        if err < 0:
            raise ValueError(f"errors must be nonnegative, got {err}")
        if e <= 0:
            raise ValueError(f"eps must be positive, got {e}")
        if model == "eps_log" and e >= math.exp(-1.0):
            raise ValueError(f"eps = {e} outside (0, e^-1): the eps|log eps| model requires eps < e^-1 = {math.exp(-1):.6f}")
    ratios = tuple(err / _model_value(model, q, e) for e, err in pts)
    c_fit = max(ratios)
    max_ratio = c_fit / ratios[0] if ratios[0] > 0 else float("inf")
    positive = [(e, err) for e, err in pts if err > 0]
    if len(positive) >= 2:
        le = np.log([p[0] for p in positive])
        lr = np.log([p[1] for p in positive])
        coeffs, res, *_ = np.polyfit(le, lr, 1, full=True)
        slope = float(coeffs[0])
        fit_residual = float(res[0]) if len(res) else 0.0
    else:
        slope = float("nan")
        fit_residual = float("nan")
    over_covers = ratios[-1] <= 0.5 * ratios[0]
    return RateFit(
        model=model,
        q=q,
        ratios=ratios,
        C_fit=c_fit,
        max_ratio=max_ratio,
        slope=slope,
        over_covers=over_covers,
        fit_residual=fit_residual,
    )

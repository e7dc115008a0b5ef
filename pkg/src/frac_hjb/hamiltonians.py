"""Catalog of Hamiltonians H(t, x, u, p) with their structural constants.

Every catalog entry is linear in u with coefficient lam >= 0, Lipschitz in
(t, x) with factor C (1 + |p|), and locally Lipschitz in p with constant
A_R on the ball |p| <= R.  The spatial shift H_ell(t, x, u, p) =
H(t, x + ell, u, p), the monotone Lax-Friedrichs flux, and an empirical
assumption verifier live here as well.

Calling convention: coordinates x and gradients p are tuples with one array
per axis (a bare array is treated as the single axis of a 1D problem), so
the same catalog serves dim 1 and dim 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np

__all__ = [
    "HamiltonianSpec",
    "NumericalFlux",
    "AssumptionReport",
    "COEFFICIENTS",
    "make_catalog_hamiltonian",
    "shift",
    "lax_friedrichs",
    "verify_assumptions",
]


def _axes(v) -> tuple[np.ndarray, ...]:
    if isinstance(v, (tuple, list)):
        return tuple(np.asarray(a, dtype=float) for a in v)
    return (np.asarray(v, dtype=float),)


class Coefficient(NamedTuple):
    fn: Callable  # (t, x0) -> array
    bound: float
    lipschitz: float


# Bounded Lipschitz coefficient fields for the affine Hamiltonian; they
# depend on time and the first axis coordinate only.
COEFFICIENTS: dict[str, Coefficient] = {
    "zero": Coefficient(lambda t, x0: np.zeros_like(x0), 0.0, 0.0),
    "one": Coefficient(lambda t, x0: np.ones_like(x0), 1.0, 0.0),
    "sin_x": Coefficient(lambda t, x0: np.sin(x0), 1.0, 1.0),
    "cos_x": Coefficient(lambda t, x0: np.cos(x0), 1.0, 1.0),
    "sin_x_plus_t": Coefficient(lambda t, x0: np.sin(x0 + t), 1.0, 1.0),
    "cos_x_plus_t": Coefficient(lambda t, x0: np.cos(x0 + t), 1.0, 1.0),
}


@dataclass(frozen=True)
class HamiltonianSpec:
    """H(t, x, u, p) together with its verified structural constants.

    lipschitz_p maps a radius R to the local Lipschitz constant A_R valid on
    |p|, |q| <= R.  data_bound is the constant K dominating the W^{1,inf}
    norm of admissible initial data; it rides along here for convenience.
    """

    kind: str
    eval_fn: Callable
    lam: float
    lipschitz_tx: float
    lipschitz_p: Callable[[float], float]
    convex_in_p: bool
    data_bound: float = 2.0
    conjugate: Callable | None = None

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")

    def __call__(self, t, x, u, p):
        return self.eval_fn(t, _axes(x), np.asarray(u, dtype=float), _axes(p))


@dataclass(frozen=True)
class NumericalFlux:
    """Lax-Friedrichs dissipation coefficient; alpha >= A_R on the working
    gradient range keeps the flux monotone."""

    alpha: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.alpha) and self.alpha >= 0):
            raise ValueError(f"alpha must be a finite nonnegative real, got {self.alpha}")


def _p_norm(p: tuple[np.ndarray, ...]) -> np.ndarray:
    if len(p) == 1:
        return np.abs(p[0])
    return np.sqrt(sum(a**2 for a in p))


def make_catalog_hamiltonian(
    kind: str,
    *,
    a=1.0,
    lam: float = 0.0,
    b: str = "zero",
    f: str = "zero",
    data_bound: float = 2.0,
) -> HamiltonianSpec:
    """Construct a catalog Hamiltonian.

    kinds:
      transport  H = a . p                  (A_R = |a|, C = 0, lam = 0)
      eikonal    H = |p|                    (A_R = 1,   C = 0, lam = 0)
      quadratic  H = |p|^2 / 2              (A_R = R,   C = 0, lam = 0)
      affine     H = lam u + b(t,x) p_0 + f(t,x), b and f drawn from the
                 named coefficient list (A_R = sup|b|, C = max(Lip b, Lip f))
    """
    if kind == "transport":
        a_vec = np.atleast_1d(np.asarray(a, dtype=float))
        if not np.all(np.isfinite(a_vec)):
            raise ValueError("transport velocity must be finite")
        a_norm = float(np.linalg.norm(a_vec))

        def ev_transport(t, x, u, p):
            # a scalar velocity is broadcast across axes; pass a per-axis
            # vector in 2D so A_R = |a| stays the exact p-Lipschitz constant
            if a_vec.size == len(p):
                coeffs = a_vec
            elif a_vec.size == 1:
                coeffs = np.full(len(p), a_vec[0])
            else:
                raise ValueError(f"transport velocity has {a_vec.size} components for {len(p)} gradient axes")
            return sum(coeffs[i] * p[i] for i in range(len(p)))

        return HamiltonianSpec(
            kind="transport",
            eval_fn=ev_transport,
            lam=0.0,
            lipschitz_tx=0.0,
            lipschitz_p=lambda R, c=a_norm: c,
            convex_in_p=True,
            data_bound=data_bound,
            conjugate=None,
        )

    if kind == "eikonal":

        def ev_eikonal(t, x, u, p):
            return _p_norm(p)

        def conj_eikonal(q):
            speed = _p_norm(_axes(q))
            return np.where(speed <= 1.0 + 1e-12, 0.0, np.inf)

        return HamiltonianSpec(
            kind="eikonal",
            eval_fn=ev_eikonal,
            lam=0.0,
            lipschitz_tx=0.0,
            lipschitz_p=lambda R: 1.0,
            convex_in_p=True,
            data_bound=data_bound,
            conjugate=conj_eikonal,
        )

    if kind == "quadratic":

        def ev_quadratic(t, x, u, p):
            return 0.5 * sum(c**2 for c in p)

        def conj_quadratic(q):
            return 0.5 * sum(c**2 for c in _axes(q))

        return HamiltonianSpec(
            kind="quadratic",
            eval_fn=ev_quadratic,
            lam=0.0,
            lipschitz_tx=0.0,
            lipschitz_p=lambda R: R,
            convex_in_p=True,
            data_bound=data_bound,
            conjugate=conj_quadratic,
        )

    if kind == "affine":
        if lam < 0:
            raise ValueError(f"affine Hamiltonian requires lambda >= 0, got {lam}")
        try:
            b_coef = COEFFICIENTS[b]
            f_coef = COEFFICIENTS[f]
        except KeyError as exc:
            raise ValueError(f"unknown coefficient name {exc.args[0]!r}; choose from {sorted(COEFFICIENTS)}") from None

        def ev_affine(t, x, u, p):
            return lam * u + b_coef.fn(t, x[0]) * p[0] + f_coef.fn(t, x[0])

        c_const = max(b_coef.lipschitz, f_coef.lipschitz)
        return HamiltonianSpec(
            kind="affine",
            eval_fn=ev_affine,
            lam=float(lam),
            lipschitz_tx=c_const,
            lipschitz_p=lambda R, c=b_coef.bound: c,
            convex_in_p=True,
            data_bound=data_bound,
            conjugate=None,
        )

    raise ValueError(f"unknown Hamiltonian kind {kind!r}; choose from transport, eikonal, quadratic, affine")


def shift(spec: HamiltonianSpec, ell) -> HamiltonianSpec:
    """Spatially shifted Hamiltonian H_ell(t, x, u, p) = H(t, x + ell, u, p)."""
    ell_axes = np.atleast_1d(np.asarray(ell, dtype=float))
    base = spec.eval_fn

    def ev_shifted(t, x, u, p):
        x_sh = tuple(x[i] + ell_axes[min(i, len(ell_axes) - 1)] for i in range(len(x)))
        return base(t, x_sh, u, p)

    return replace(spec, eval_fn=ev_shifted, kind=f"{spec.kind}~shift")


def lax_friedrichs(spec: HamiltonianSpec, flux: NumericalFlux, t, x, u, p_minus, p_plus):
    """Monotone numerical Hamiltonian
    Hhat = H(t, x, u, (p- + p+)/2) - (alpha/2) sum_axes (p+ - p-).

    Consistent (Hhat(p, p) = H(p)); nonincreasing in p+ components and
    nondecreasing in p- components whenever alpha >= A_R on the working range.
    """
    pm = _axes(p_minus)
    pp = _axes(p_plus)
    if len(pm) != len(pp):
        raise ValueError("p_minus and p_plus must have matching axis counts")
    mid = tuple(0.5 * (m + p) for m, p in zip(pm, pp))
    diss = sum(p - m for m, p in zip(pm, pp))
    return spec.eval_fn(t, _axes(x), np.asarray(u, dtype=float), mid) - 0.5 * flux.alpha * diss


@dataclass(frozen=True)
class AssumptionReport:
    """Maximal observed violations of the structural assumptions on random samples."""

    linearity_residual: float  # exact linearity in u
    tx_lipschitz_excess: float  # Lipschitz in (t, x) with factor C (1 + |p|)
    p_lipschitz_excess: float  # local Lipschitz in p with constant A_R
    sample_budget: int
    passed: bool


def verify_assumptions(
    spec: HamiltonianSpec, sample_budget: int = 2000, rng_seed: int = 0, dim: int = 1
) -> AssumptionReport:
    """Empirically verify the structural assumptions on random samples
    drawn in `dim` space dimensions.

    Failures are report content, not exceptions; pass requires every observed
    violation <= 1e-9.
    """
    if sample_budget < 1000:
        raise ValueError(f"sample_budget must be >= 1000, got {sample_budget}")
    rng = np.random.default_rng(rng_seed)
    m = sample_budget

    t = rng.uniform(0.0, 4.0, m)
    s = rng.uniform(0.0, 4.0, m)
    x = tuple(rng.uniform(-8.0, 8.0, m) for _ in range(dim))
    y = tuple(rng.uniform(-8.0, 8.0, m) for _ in range(dim))
    u = rng.uniform(-3.0, 3.0, m)
    v = rng.uniform(-3.0, 3.0, m)

    def dist(a, b):
        return np.sqrt(sum((ai - bi) ** 2 for ai, bi in zip(a, b)))

    lin_res = 0.0
    tx_excess = 0.0
    p_excess = 0.0
    for radius in (0.5, 1.0, 2.0, 4.0):
        # cube inscribed in the radius-R ball
        half = radius / math.sqrt(dim)
        p = tuple(rng.uniform(-half, half, m) for _ in range(dim))
        q = tuple(rng.uniform(-half, half, m) for _ in range(dim))
        h_p = spec.eval_fn(t, x, u, p)
        h_q = spec.eval_fn(t, x, u, q)
        a_r = spec.lipschitz_p(radius)
        p_excess = max(p_excess, float(np.max(np.abs(h_p - h_q) - a_r * dist(p, q))))

        h_v = spec.eval_fn(t, x, v, p)
        lin_res = max(lin_res, float(np.max(np.abs(h_v - h_p - spec.lam * (v - u)))))

        h_sy = spec.eval_fn(s, y, u, p)
        bound = spec.lipschitz_tx * (1.0 + _p_norm(p)) * (dist(x, y) + np.abs(t - s))
        tx_excess = max(tx_excess, float(np.max(np.abs(h_p - h_sy) - bound)))

    passed = lin_res <= 1e-9 and tx_excess <= 1e-9 and p_excess <= 1e-9
    return AssumptionReport(
        linearity_residual=lin_res,
        tx_lipschitz_excess=tx_excess,
        p_lipschitz_excess=p_excess,
        sample_budget=sample_budget,
        passed=passed,
    )

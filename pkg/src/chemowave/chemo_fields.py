"""Chemoattractant and nutrient profiles driven by the cell density.

The chemoattractant S solves -c S' - D_S S'' + alpha S = beta rho.  Because
rho is a finite exponential sum, S is assembled in closed form: one explicit
particular term per rho mode plus the two decaying homogeneous exponentials,
fixed by C^1 matching at z = 0.  The nutrient N solves the linear equation
-c N' - D_N N'' + gamma rho N = 0 on a truncated domain with N'(-L) = 0 and
N(+L) = 1, discretized with second-order finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import NonDecayingInput, NonMonotoneN, NonPositiveSpeed, ResonantMode
from .wave_profile import PiecewiseExponential, _exp_decay

RESONANCE_GUARD_REL = 1e-10
N_MONOTONE_TOL = 1e-12      # relative slack for roundoff-flat tails
_MAX_N_REFINEMENTS = 3


@dataclass(frozen=True)
class ChemParams:
    """Reaction-diffusion constants.

    Diffusivities and the degradation rate must be strictly positive; the
    production and consumption rates may be zero, which switches the
    corresponding coupling off (useful for decoupled sanity runs).
    """

    d_s: float
    d_n: float
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("d_s", "d_n", "alpha"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be a positive finite number, got {val!r}")
        for name in ("beta", "gamma"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val >= 0):
                raise ValueError(f"{name} must be a nonnegative finite number, got {val!r}")


@dataclass(frozen=True)
class SField:
    """Closed-form chemoattractant profile.

    z > 0: sum_j A_j exp(mu_j z) (mu_j < 0)  +  coef_plus  * exp(theta_minus z)
    z < 0: sum_j A_j exp(mu_j z) (mu_j > 0)  +  coef_minus * exp(theta_plus  z)
    """

    params: ChemParams
    c: float
    theta_plus: float
    theta_minus: float
    coef_minus: float
    coef_plus: float
    left_part_coefficients: np.ndarray
    left_part_exponents: np.ndarray
    right_part_coefficients: np.ndarray
    right_part_exponents: np.ndarray
    slope_at_zero: float

    def _eval(self, z, order: int) -> np.ndarray:
        z_arr = np.atleast_1d(np.asarray(z, dtype=float))
        out = np.zeros_like(z_arr)
        neg = z_arr < 0.0
        if np.any(neg):
            mus = np.concatenate([self.left_part_exponents, [self.theta_plus]])
            coefs = np.concatenate([self.left_part_coefficients, [self.coef_minus]]) * mus**order
            out[neg] = _exp_decay(z_arr[neg, None] * mus[None, :]) @ coefs
        pos = ~neg
        if np.any(pos):
            mus = np.concatenate([self.right_part_exponents, [self.theta_minus]])
            coefs = np.concatenate([self.right_part_coefficients, [self.coef_plus]]) * mus**order
            out[pos] = _exp_decay(z_arr[pos, None] * mus[None, :]) @ coefs
        return out

    def __call__(self, z: float | np.ndarray) -> float | np.ndarray:
        out = self._eval(z, 0)
        return out if np.ndim(z) else float(out[0])

    def derivative(self, z: float | np.ndarray) -> float | np.ndarray:
        out = self._eval(z, 1)
        return out if np.ndim(z) else float(out[0])

    def second_derivative(self, z: float | np.ndarray) -> float | np.ndarray:
        out = self._eval(z, 2)
        return out if np.ndim(z) else float(out[0])


@dataclass(frozen=True)
class NField:
    """Nutrient profile on a uniform grid, normalized to N(+L) = 1."""

    grid: np.ndarray
    values: np.ndarray
    n_minus: float
    n_plus: float

    def __call__(self, z: float | np.ndarray) -> float | np.ndarray:
        return np.interp(z, self.grid, self.values, left=self.values[0], right=self.values[-1])


def _particular_coefficient(params: ChemParams, c: float, mu: float, source_coef: float) -> float:
    """Coefficient of the particular term A exp(mu z) for source coef exp(mu z)."""
    denom = params.alpha - c * mu - params.d_s * mu * mu
    scale = max(params.alpha, abs(c * mu), params.d_s * mu * mu)
    if abs(denom) < RESONANCE_GUARD_REL * scale:
        raise ResonantMode(
            f"source exponent {mu!r} resonates with the homogeneous operator "
            f"(alpha - c*mu - d_s*mu^2 = {denom!r})"
        )
    return params.beta * source_coef / denom


def solve_S(rho: PiecewiseExponential, params: ChemParams, c: float) -> SField:
    """Closed-form solution of -c S' - D_S S'' + alpha S = beta rho.

    Decaying homogeneous exponents are theta = (-c +/- sqrt(c^2 + 4 alpha D_S))
    / (2 D_S); their two coefficients come from matching S and S' at z = 0.
    """
    if np.any(rho.left_rates <= 0.0) or np.any(rho.right_rates <= 0.0):
        raise NonDecayingInput("source must decay on both half-lines")

    disc = np.sqrt(c * c + 4.0 * params.alpha * params.d_s)
    theta_plus = (-c + disc) / (2.0 * params.d_s)
    theta_minus = (-c - disc) / (2.0 * params.d_s)

    mu_left = rho.left_rates.astype(float)            # exp(mu z), mu > 0, z < 0
    mu_right = -rho.right_rates.astype(float)         # exp(mu z), mu < 0, z > 0
    A_left = np.array(
        [_particular_coefficient(params, c, mu, r) for mu, r in zip(mu_left, rho.left_coefficients)]
    )
    A_right = np.array(
        [
            _particular_coefficient(params, c, mu, r)
            for mu, r in zip(mu_right, rho.right_coefficients)
        ]
    )

    d0 = float(np.sum(A_left) - np.sum(A_right))          # C_+ - C_-
    d1 = float(A_left @ mu_left - A_right @ mu_right)     # theta_- C_+ - theta_+ C_-
    coef_minus = (d1 - theta_minus * d0) / (theta_minus - theta_plus)
    coef_plus = coef_minus + d0
    slope = float(A_right @ mu_right + coef_plus * theta_minus)

    return SField(
        params=params,
        c=float(c),
        theta_plus=float(theta_plus),
        theta_minus=float(theta_minus),
        coef_minus=float(coef_minus),
        coef_plus=float(coef_plus),
        left_part_coefficients=A_left,
        left_part_exponents=mu_left,
        right_part_coefficients=A_right,
        right_part_exponents=mu_right,
        slope_at_zero=slope,
    )


def slope_sign_changes(sfield: SField, halfwidth: float, points_per_side: int = 2048) -> int:
    """Count sign changes of S' on a two-sided logarithmic grid."""
    z = np.concatenate(
        [
            -np.geomspace(1e-8, halfwidth, points_per_side)[::-1],
            np.geomspace(1e-8, halfwidth, points_per_side),
        ]
    )
    s = np.sign(sfield.derivative(z))
    s = s[s != 0.0]
    return int(np.sum(s[1:] != s[:-1]))


def locate_maximum(sfield: SField, halfwidth: float) -> float:
    """Position of the (unique) maximum of S, by bisection on S'."""
    z = np.concatenate(
        [
            -np.geomspace(1e-12, halfwidth, 512)[::-1],
            [0.0],
            np.geomspace(1e-12, halfwidth, 512),
        ]
    )
    d = sfield.derivative(z)
    idx = np.nonzero((d[:-1] > 0.0) & (d[1:] <= 0.0))[0]
    if idx.size == 0:
        raise ValueError("no descending zero of dS/dz inside the window")
    lo, hi = float(z[idx[0]]), float(z[idx[0] + 1])
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if sfield.derivative(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _n_system(
    rho_vals: np.ndarray, params: ChemParams, c: float, h: float, boundary_value: float
) -> tuple[np.ndarray, np.ndarray]:
    """Banded matrix (ab form) and rhs for the nutrient two-point problem."""
    n = rho_vals.size
    d = params.d_n
    main = np.zeros(n)
    sub = np.zeros(n)    # entry i couples row i to i-1
    sup = np.zeros(n)    # entry i couples row i to i+1
    rhs = np.zeros(n)

    # Written as D N'' + c N' - gamma rho N = 0.  Central first derivative is
    # second order; if the cell Peclet number exceeds 2 the forward difference
    # keeps the off-diagonals nonnegative (discrete maximum principle).
    upwind = c * h / d > 2.0
    inv_h2 = 1.0 / (h * h)
    if upwind:
        sub[1:-1] = d * inv_h2
        sup[1:-1] = d * inv_h2 + c / h
        main[1:-1] = -2.0 * d * inv_h2 - c / h - params.gamma * rho_vals[1:-1]
    else:
        sub[1:-1] = d * inv_h2 - c / (2.0 * h)
        sup[1:-1] = d * inv_h2 + c / (2.0 * h)
        main[1:-1] = -2.0 * d * inv_h2 - params.gamma * rho_vals[1:-1]

    # z = -L: zero-derivative condition through a ghost node (N_{-1} = N_1).
    main[0] = -2.0 * d * inv_h2 - params.gamma * rho_vals[0]
    sup[0] = 2.0 * d * inv_h2
    # z = +L: the limit N_+ enters through the integrated far-field relation
    # D N' + c N = c N_+ (the density tail beyond L is negligible), folded
    # into the PDE row via a ghost node.  A plain Dirichlet value here would
    # carry an O(exp(-c L / D)) truncation error, far above the tail scale.
    sub[-1] = 2.0 * d * inv_h2
    main[-1] = -2.0 * d * inv_h2 - 2.0 * c / h - c * c / d - params.gamma * rho_vals[-1]
    rhs[-1] = -(2.0 * c / h + c * c / d) * boundary_value

    ab = np.zeros((3, n))
    ab[0, 1:] = sup[:-1]
    ab[1, :] = main
    ab[2, :-1] = sub[1:]
    return ab, rhs


def solve_N(
    rho: PiecewiseExponential,
    params: ChemParams,
    c: float,
    domain_halfwidth: float,
    cells: int = 4096,
    boundary_value: float = 1.0,
) -> NField:
    """Finite-difference solve of -c N' - D_N N'' + gamma rho N = 0.

    Boundary conditions: N'(-L) = 0 (flat left tail) and the far-field limit
    N(+inf) pinned to ``boundary_value`` through the integrated relation
    D N' + c N = c N_+ at +L.  The equation is linear in N, so the pinned
    limit is a pure normalization.  The profile must come out nondecreasing;
    if it does not, the mesh is refined up to three times before giving up.
    """
    if not c > 0.0:
        raise NonPositiveSpeed(f"nutrient solve requires c > 0, got {c!r}")
    if np.any(rho.left_rates <= 0.0) or np.any(rho.right_rates <= 0.0):
        raise NonDecayingInput("cell density must decay on both half-lines")

    for attempt in range(_MAX_N_REFINEMENTS + 1):
        n_cells = cells * 2**attempt
        grid = np.linspace(-domain_halfwidth, domain_halfwidth, n_cells + 1)
        h = grid[1] - grid[0]
        rho_vals = np.asarray(rho(grid), dtype=float)
        ab, rhs = _n_system(rho_vals, params, c, h, boundary_value)
        values = solve_banded((1, 1), ab, rhs)
        increments = np.diff(values)
        if np.all(increments >= -N_MONOTONE_TOL * np.max(np.abs(values))):
            n_minus = float(values[0])
            # n_minus == boundary_value only in the consumption-free limit
            if not (0.0 < n_minus <= boundary_value * (1.0 + N_MONOTONE_TOL)):
                raise NonMonotoneN(
                    f"far-field level {n_minus!r} outside (0, {boundary_value!r}]"
                )
            return NField(grid=grid, values=values, n_minus=n_minus, n_plus=float(boundary_value))
    raise NonMonotoneN("nutrient profile not monotone after mesh refinement")

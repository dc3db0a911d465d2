"""Stationary kinetic density as a Case-mode superposition.

On each side of the origin the density is an exponential sum

    f(z, v_k) = sum_j  x_j * exp(-lambda_j z) / (T(v_k - c) - lambda_j (v_k - c)),

with the left sum over the negative exponents (coefficients a_j) and the
right sum over the positive ones (coefficients b_j).  Identifying the two
expansions at z = 0 gives a square homogeneous system whose transpose is
annihilated by the row vector (w_k (v_k - c)); the one remaining degree of
freedom is fixed by normalizing the total mass of rho to one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .dispersion import DispersionRoots, solve_roots
from .errors import NonPositiveProfile, NullSpaceDimensionError
from .velocity_model import VelocityModel, side_rates

MATCHING_REL_TOL = 1e-10
MASS_TOL = 1e-12
GRID_INNER = 1e-6        # delta_z of the verification grid
GRID_DECADES = 40.0      # grid spans [delta_z, GRID_DECADES / slowest rate]
_EXP_FLOOR = -745.0      # exp underflows to 0 below this argument


def _exp_decay(args: np.ndarray) -> np.ndarray:
    """exp for nonpositive arguments, flushing sub-underflow values to 0."""
    args = np.asarray(args, dtype=float)
    out = np.zeros(args.shape, dtype=float)
    ok = args > _EXP_FLOOR
    out[ok] = np.exp(args[ok])
    return out


@dataclass(frozen=True)
class PiecewiseExponential:
    """Exponential sum decaying on both half-lines.

    Left terms evaluate as coef * exp(+rate * z) for z <= 0 and right terms
    as coef * exp(-rate * z) for z >= 0; all rates are strictly positive so
    the value tends to 0 as |z| grows.
    """

    left_coefficients: np.ndarray
    left_rates: np.ndarray
    right_coefficients: np.ndarray
    right_rates: np.ndarray

    def __post_init__(self):
        for name in ("left_coefficients", "left_rates", "right_coefficients", "right_rates"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.left_rates <= 0.0) or np.any(self.right_rates <= 0.0):
            raise ValueError("piecewise-exponential rates must be strictly positive")
        if self.left_coefficients.shape != self.left_rates.shape:
            raise ValueError("left coefficient/rate arrays must have equal shapes")
        if self.right_coefficients.shape != self.right_rates.shape:
            raise ValueError("right coefficient/rate arrays must have equal shapes")

    def __call__(self, z: float | np.ndarray) -> float | np.ndarray:
        z_arr = np.atleast_1d(np.asarray(z, dtype=float))
        out = np.zeros_like(z_arr)
        neg = z_arr < 0.0
        if np.any(neg):
            e = _exp_decay(z_arr[neg, None] * self.left_rates[None, :])
            out[neg] = e @ self.left_coefficients
        pos = ~neg
        if np.any(pos):
            e = _exp_decay(-z_arr[pos, None] * self.right_rates[None, :])
            out[pos] = e @ self.right_coefficients
        return out if np.ndim(z) else float(out[0])

    def derivative(self, z: float | np.ndarray) -> float | np.ndarray:
        z_arr = np.atleast_1d(np.asarray(z, dtype=float))
        out = np.zeros_like(z_arr)
        neg = z_arr < 0.0
        if np.any(neg):
            e = _exp_decay(z_arr[neg, None] * self.left_rates[None, :])
            out[neg] = e @ (self.left_coefficients * self.left_rates)
        pos = ~neg
        if np.any(pos):
            e = _exp_decay(-z_arr[pos, None] * self.right_rates[None, :])
            out[pos] = e @ (-self.right_coefficients * self.right_rates)
        return out if np.ndim(z) else float(out[0])


@dataclass(frozen=True)
class WaveProfile:
    """Solved stationary density at one admissible wave speed."""

    model: VelocityModel
    c: float
    roots: DispersionRoots
    a: np.ndarray                 # left-mode coefficients, one per negative root
    b: np.ndarray                 # right-mode coefficients, one per positive root
    left_mass: float
    right_mass: float
    # cached kinematics (derived, kept for fast evaluation)
    denom_left: np.ndarray = field(repr=False, default=None)    # (n, m)
    denom_right: np.ndarray = field(repr=False, default=None)   # (n, p)
    f_at_zero: np.ndarray = field(repr=False, default=None)     # (n,)

    @property
    def velocities(self) -> np.ndarray:
        return self.model.velocities

    def rho_modes(self) -> PiecewiseExponential:
        """Spatial density rho(z) as a piecewise-exponential sum."""
        w = self.model.weights
        return PiecewiseExponential(
            left_coefficients=self.a * (w @ (1.0 / self.denom_left)),
            left_rates=-self.roots.negative_roots,
            right_coefficients=self.b * (w @ (1.0 / self.denom_right)),
            right_rates=self.roots.positive_roots,
        )

    def partial_rho_modes(self, relative_sign: int) -> PiecewiseExponential:
        """rho restricted to velocities with sign(v - c) = relative_sign."""
        mask = (self.velocities > self.c) if relative_sign > 0 else (self.velocities < self.c)
        w = self.model.weights * mask
        return PiecewiseExponential(
            left_coefficients=self.a * (w @ (1.0 / self.denom_left)),
            left_rates=-self.roots.negative_roots,
            right_coefficients=self.b * (w @ (1.0 / self.denom_right)),
            right_rates=self.roots.positive_roots,
        )


def per_mode_mass(model: VelocityModel, c: float, lam: float, side: str) -> float:
    """Integral over its half-line of the rho contribution of one mode.

    For a left mode (lam < 0) this is (-1/lam) * sum_k w_k / (T_-(v_k-c) - lam (v_k-c));
    for a right mode (1/lam) * sum_k w_k / (T_+(v_k-c) - lam (v_k-c)).
    """
    if lam == 0.0:
        raise ValueError("per-mode mass undefined for the trivial exponent 0")
    T = side_rates(model, c, side)
    s = float(np.sum(model.weights / (T - lam * (model.velocities - c))))
    return -s / lam if side == "left" else s / lam


def solve_modes(model: VelocityModel, c: float) -> WaveProfile:
    """Solve the matching problem at z = 0 and return the unit-mass profile.

    The matching matrix has a known left null vector (w_k (v_k - c)); its row
    with the largest such component is replaced by the unit-mass equation and
    the square system solved directly.  The replaced equation and the full
    matching identity are verified afterwards, and the profile is checked to
    be strictly positive on the verification grid.
    """
    roots = solve_roots(model, c)
    v = model.velocities
    w = model.weights
    dv = v - c
    m = roots.negative_roots.size

    denom_left = side_rates(model, c, "left")[:, None] - roots.negative_roots[None, :] * dv[:, None]
    denom_right = side_rates(model, c, "right")[:, None] - roots.positive_roots[None, :] * dv[:, None]
    matching = np.hstack([1.0 / denom_left, -1.0 / denom_right])

    mass_row = np.concatenate(
        [
            [per_mode_mass(model, c, float(lam), "left") for lam in roots.negative_roots],
            [per_mode_mass(model, c, float(lam), "right") for lam in roots.positive_roots],
        ]
    )
    k_star = int(np.argmax(np.abs(w * dv)))
    system = matching.copy()
    system[k_star, :] = mass_row
    rhs = np.zeros(model.n_active)
    rhs[k_star] = 1.0
    try:
        x = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:
        raise NullSpaceDimensionError(f"matching system singular at c={c!r}: {exc}") from exc

    a = x[:m]
    b = x[m:]
    f0 = (1.0 / denom_right) @ b
    if f0[-1] < 0.0:
        a, b, f0 = -a, -b, -f0

    # Replaced-equation residual: the solution must still satisfy the row we
    # dropped, otherwise the null space was not one-dimensional.
    dropped = float(matching[k_star, :] @ x)
    dropped_scale = float(np.sum(np.abs(matching[k_star, :] * x)))
    if abs(dropped) > MATCHING_REL_TOL * max(dropped_scale, np.finfo(float).tiny):
        raise NullSpaceDimensionError(
            f"replaced matching equation violated at c={c!r}: residual {dropped!r}"
        )
    mismatch = matching @ x
    if np.max(np.abs(mismatch)) > MATCHING_REL_TOL * np.max(np.abs(f0)):
        raise NullSpaceDimensionError(
            f"left/right expansions disagree at z=0 for c={c!r}: "
            f"max mismatch {np.max(np.abs(mismatch))!r}"
        )

    left_mass = float(a @ mass_row[:m])
    right_mass = float(b @ mass_row[m:])
    if abs(left_mass + right_mass - 1.0) > MASS_TOL:
        raise NullSpaceDimensionError(
            f"normalized masses sum to {left_mass + right_mass!r} instead of 1"
        )

    profile = WaveProfile(
        model=model,
        c=float(c),
        roots=roots,
        a=a,
        b=b,
        left_mass=left_mass,
        right_mass=right_mass,
        denom_left=denom_left,
        denom_right=denom_right,
        f_at_zero=f0,
    )
    grid = verification_grid(profile)
    values = evaluate_f_matrix(profile, grid)
    if not np.all(np.isfinite(values)) or np.min(values) <= 0.0:
        raise NonPositiveProfile(
            f"profile not strictly positive on the verification grid at c={c!r}"
        )
    return profile


def verification_grid(profile: WaveProfile, points_per_side: int = 2048) -> np.ndarray:
    """Logarithmic two-sided grid spanning the matching layer and the tails."""
    z_right = np.geomspace(GRID_INNER, GRID_DECADES / profile.roots.slowest_positive, points_per_side)
    z_left = -np.geomspace(GRID_INNER, GRID_DECADES / profile.roots.slowest_negative, points_per_side)
    return np.concatenate([z_left[::-1], z_right])


def evaluate_f_matrix(profile: WaveProfile, z: np.ndarray) -> np.ndarray:
    """f(z_i, v_k) for an array of z; returns shape (len(z), n_active)."""
    z = np.asarray(z, dtype=float)
    out = np.empty((z.size, profile.model.n_active))
    neg = z < 0.0
    if np.any(neg):
        e = _exp_decay(-np.outer(z[neg], profile.roots.negative_roots))
        out[neg] = e @ (profile.a[:, None] / profile.denom_left.T)
    pos = ~neg
    if np.any(pos):
        e = _exp_decay(-np.outer(z[pos], profile.roots.positive_roots))
        out[pos] = e @ (profile.b[:, None] / profile.denom_right.T)
    return out


def evaluate_f(profile: WaveProfile, z: float | np.ndarray, k: int) -> float | np.ndarray:
    """Kinetic density at position(s) z for the active velocity index k."""
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.zeros_like(z_arr)
    neg = z_arr < 0.0
    if np.any(neg):
        e = _exp_decay(-z_arr[neg, None] * profile.roots.negative_roots[None, :])
        out[neg] = e @ (profile.a / profile.denom_left[k])
    pos = ~neg
    if np.any(pos):
        e = _exp_decay(-z_arr[pos, None] * profile.roots.positive_roots[None, :])
        out[pos] = e @ (profile.b / profile.denom_right[k])
    return out if np.ndim(z) else float(out[0])


def evaluate_rho(profile: WaveProfile, z: float | np.ndarray) -> float | np.ndarray:
    """Spatial density rho(z) = sum_k w_k f(z, v_k)."""
    return profile.rho_modes()(z)


def evaluate_I(profile: WaveProfile, z: float | np.ndarray) -> float | np.ndarray:
    """Density of tumbling events I(z) = sum_k w_k T(z, v_k - c) f(z, v_k).

    Reconstructed from the side-split densities with the side-dependent
    rates; at z = 0 the right-side limit is returned (I jumps there).
    """
    r = profile.model.rates
    rho_minus = profile.partial_rho_modes(-1)
    rho_plus = profile.partial_rho_modes(+1)
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty_like(z_arr)
    neg = z_arr < 0.0
    out[neg] = r.t_mm * rho_minus(z_arr[neg]) + r.t_mp * rho_plus(z_arr[neg])
    pos = ~neg
    out[pos] = r.t_pm * rho_minus(z_arr[pos]) + r.t_pp * rho_plus(z_arr[pos])
    return out if np.ndim(z) else float(out[0])


def evaluate_I_derivative(profile: WaveProfile, z: float | np.ndarray) -> float | np.ndarray:
    """dI/dz away from the origin, from the mode expansion of I."""
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.zeros_like(z_arr)
    neg = z_arr < 0.0
    if np.any(neg):
        lam = profile.roots.negative_roots
        e = _exp_decay(-z_arr[neg, None] * lam[None, :])
        out[neg] = e @ (-profile.a * lam)
    pos = ~neg
    if np.any(pos):
        lam = profile.roots.positive_roots
        e = _exp_decay(-z_arr[pos, None] * lam[None, :])
        out[pos] = e @ (-profile.b * lam)
    return out if np.ndim(z) else float(out[0])


def duhamel_f(profile: WaveProfile, z: float, k: int, quadrature_step: float = 1e-12) -> float:
    """Reconstruct f(z, v_k) by integrating I along the characteristic line.

    Independent numerical route (adaptive quadrature driven to the absolute
    and relative target ``quadrature_step``) used as an oracle for the mode
    expansion.  Works on either side of the origin.
    """
    z = float(z)
    if z == 0.0:
        return float(profile.f_at_zero[k])
    r = profile.model.rates
    dv = float(profile.velocities[k] - profile.c)

    def tail(rate: float) -> float:
        val, _err = quad(
            lambda s: evaluate_I(profile, z - s * dv) * np.exp(-s * rate),
            0.0,
            np.inf,
            epsabs=quadrature_step,
            epsrel=quadrature_step,
            limit=400,
        )
        return val

    def from_origin(rate: float) -> float:
        s_max = z / dv
        val, _err = quad(
            lambda s: evaluate_I(profile, z - s * dv) * np.exp(-s * rate),
            0.0,
            s_max,
            epsabs=quadrature_step,
            epsrel=quadrature_step,
            limit=400,
        )
        return float(profile.f_at_zero[k]) * np.exp(-s_max * rate) + val

    if z > 0.0:
        return tail(r.t_pm) if dv < 0.0 else from_origin(r.t_pp)
    return tail(r.t_mp) if dv > 0.0 else from_origin(r.t_mm)


def b_via_orthogonality(profile: WaveProfile, i: int) -> float:
    """Recover the right coefficient b_i from f(0, .) by orthogonality.

    Uses the positive-weight quotient obtained by combining the dual-mode
    pairing with the zero-flux identity; must reproduce the stored b_i.
    """
    w = profile.model.weights
    dv = profile.velocities - profile.c
    d = profile.denom_right[:, i]
    num = float(np.sum(w * profile.f_at_zero * dv**2 / d))
    den = float(np.sum(w * dv**2 / d**2))
    return num / den

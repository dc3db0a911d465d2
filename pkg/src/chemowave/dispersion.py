"""Case-mode exponents of the stationary kinetic equation.

Each exponential mode exp(-lambda z) / (T(v_k - c) - lambda (v_k - c)) solves
the moving-frame kinetic equation iff lambda is a root of

    sum_k w_k * (T(v_k - c)/(v_k - c) - lambda)^(-1) = 0.

The summand poles ("singular values") interlace the roots, which makes
bracketed bisection exact: on the left side (rates T_-) there is one root in
each gap between consecutive negative poles plus one in (largest negative
pole, 0); on the right side (rates T_+) one root in (0, smallest positive
pole) plus one per gap between consecutive positive poles.  The outermost
roots exist exactly when the mean algebraic run length has the confinement
sign, i.e. when c lies inside the speed window.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BracketFailure, SingularLambda, SpeedNotAdmissible
from .velocity_model import (
    VelocityModel,
    cutting_index,
    mean_run_length,
    side_rates,
)

RESIDUAL_REL_TOL = 1e-12          # |residual| < tol * max-term-magnitude at a root
_COINCIDENT_POLE_FACTOR = 1e3     # bracket width guard, in units of machine epsilon


@dataclass(frozen=True)
class DispersionRoots:
    """Dispersion roots of one model at one wave speed.

    ``negative_roots`` (left side, rates T_-) and ``positive_roots`` (right
    side, rates T_+) are sorted ascending, so ``negative_roots[-1]`` and
    ``positive_roots[0]`` are the slowest decay rates toward -inf and +inf.
    Counts equal the number of active velocities below/above c.
    """

    c: float
    cutting_index: int
    negative_roots: np.ndarray
    positive_roots: np.ndarray
    negative_brackets: np.ndarray  # (m, 2) pole/zero bracket per root
    positive_brackets: np.ndarray  # (p, 2)

    @property
    def slowest_negative(self) -> float:
        """Decay rate of the slowest left mode, |lambda_{-K}| > 0."""
        return float(-self.negative_roots[-1])

    @property
    def slowest_positive(self) -> float:
        """Decay rate of the slowest right mode, lambda_K > 0."""
        return float(self.positive_roots[0])


def singular_values(model: VelocityModel, c: float, side: str) -> np.ndarray:
    """Poles T(v_k - c)/(v_k - c) of the dispersion sum, in velocity order."""
    return side_rates(model, c, side) / (model.velocities - c)


def dispersion_residual(model: VelocityModel, c: float, lam: float, side: str) -> float:
    """Evaluate sum_k w_k (T_k/(v_k - c) - lambda)^(-1).

    Strictly increasing in lambda between consecutive poles.  Raises
    :class:`SingularLambda` when lambda coincides with a pole to machine
    precision.
    """
    poles = singular_values(model, c, side)
    gap = poles - lam
    if np.any(np.abs(gap) <= 4.0 * np.finfo(float).eps * np.abs(poles)):
        raise SingularLambda(f"lambda={lam!r} coincides with a singular value on side {side!r}")
    return float(np.sum(model.weights / gap))


def _residual_vector(w: np.ndarray, poles: np.ndarray, lam: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.sum(w[None, :] / (poles[None, :] - lam[:, None]), axis=1)


def _bisect_brackets(w: np.ndarray, poles: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Bisect every bracket simultaneously down to machine width.

    The residual is -inf just above the lower endpoint and +inf just below
    the upper one (endpoints are poles, or 0 with the known confinement
    sign), so no endpoint evaluation is needed and every step halves the
    bracket.  Stops when no representable midpoint remains, 200 iterations
    at most.
    """
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        active = (mid > lo) & (mid < hi)
        if not np.any(active):
            break
        res = _residual_vector(w, poles, mid)
        if np.any(np.isnan(res[active])):
            raise BracketFailure("dispersion residual evaluated to NaN inside a bracket")
        go_up = active & (res < 0.0)
        go_dn = active & ~go_up
        lo[go_up] = mid[go_up]
        hi[go_dn] = mid[go_dn]
    return 0.5 * (lo + hi)


def _check_pole_separation(poles_sorted: np.ndarray) -> None:
    if poles_sorted.size < 2:
        return
    gaps = np.diff(poles_sorted)
    scale = np.maximum(np.abs(poles_sorted[:-1]), np.abs(poles_sorted[1:]))
    bad = gaps <= _COINCIDENT_POLE_FACTOR * np.finfo(float).eps * scale
    if np.any(bad):
        i = int(np.argmax(bad))
        raise BracketFailure(
            f"singular values {poles_sorted[i]!r} and {poles_sorted[i + 1]!r} are "
            "numerically coincident; mode counts would be unreliable"
        )


def solve_roots(model: VelocityModel, c: float) -> DispersionRoots:
    """All decaying Case-mode exponents of the model at speed c.

    Requires c strictly inside the confinement window and away from velocity
    nodes.  The trivial root lambda = 0 is excluded throughout: only
    integrable (decaying) modes are kept.
    """
    j_cut = cutting_index(model, c)  # raises on node collision
    if mean_run_length(model, c, "left") <= 0.0:
        raise SpeedNotAdmissible(f"c={c!r}: no confinement on the left side (c >= c_upper)")
    if mean_run_length(model, c, "right") >= 0.0:
        raise SpeedNotAdmissible(f"c={c!r}: no confinement on the right side (c <= c_lower)")

    w = model.weights
    m = j_cut + 1                 # velocities below c
    if m == 0 or m == model.n_active:
        raise SpeedNotAdmissible(f"c={c!r}: all relative velocities share one sign")

    # Left side: poles from v<c are negative, ordered like the velocities.
    poles_left = singular_values(model, c, "left")
    neg_poles = np.sort(poles_left[:m])
    _check_pole_separation(neg_poles)
    lo = np.concatenate([neg_poles[:-1], [neg_poles[-1]]])
    hi = np.concatenate([neg_poles[1:], [0.0]])
    negative_roots = _bisect_brackets(w, poles_left, lo, hi)
    negative_brackets = np.column_stack([lo, hi])

    # Right side: poles from v>c are positive; smaller for larger velocities.
    poles_right = singular_values(model, c, "right")
    pos_poles = np.sort(poles_right[m:])
    _check_pole_separation(pos_poles)
    lo = np.concatenate([[0.0], pos_poles[:-1]])
    hi = pos_poles
    positive_roots = _bisect_brackets(w, poles_right, lo, hi)
    positive_brackets = np.column_stack([lo, hi])

    roots = DispersionRoots(
        c=float(c),
        cutting_index=j_cut,
        negative_roots=negative_roots,
        positive_roots=positive_roots,
        negative_brackets=negative_brackets,
        positive_brackets=positive_brackets,
    )
    _verify_residuals(model, roots)
    return roots


def residual_scale(model: VelocityModel, c: float, lam: float, side: str) -> float:
    """Largest term magnitude of the dispersion sum, the natural residual scale."""
    poles = singular_values(model, c, side)
    return float(np.max(np.abs(model.weights / (poles - lam))))


def _verify_residuals(model: VelocityModel, roots: DispersionRoots) -> None:
    for side, lams in (("left", roots.negative_roots), ("right", roots.positive_roots)):
        for lam in lams:
            res = dispersion_residual(model, roots.c, float(lam), side)
            scale = residual_scale(model, roots.c, float(lam), side)
            if abs(res) > RESIDUAL_REL_TOL * scale:
                raise BracketFailure(
                    f"root {lam!r} on side {side!r} has residual {res!r} "
                    f"above {RESIDUAL_REL_TOL} * {scale!r}"
                )

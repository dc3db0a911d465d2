"""The matching function Upsilon(c) = dS/dz(0) and its admissible roots.

A speed c is an admissible wave speed when the chemoattractant built from
the confined density at that speed has its maximum exactly at the origin,
i.e. Upsilon(c) = 0 with a continuous downward crossing.  Upsilon jumps at
the velocity nodes, so the scan works per continuity interval; sign changes
across a node are jump discontinuities, never roots.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chemo_fields import ChemParams, locate_maximum, slope_sign_changes, solve_S
from .errors import ChemowaveError, LostBracket, ResonantMode
from .velocity_model import VelocityModel, admissible_speed_interval
from .wave_profile import solve_modes

logger = logging.getLogger(__name__)

ROOT_C_REL_TOL = 1e-12
_NARROW_INTERVAL_FACTOR = 10.0  # intervals narrower than this * node guard get one sample


@dataclass(frozen=True)
class IntervalSamples:
    """Upsilon samples inside one continuity interval."""

    interval_id: int
    lo: float
    hi: float
    c: np.ndarray
    upsilon: np.ndarray


@dataclass(frozen=True)
class Discontinuity:
    """Estimated one-sided limits of Upsilon at a velocity node."""

    node: float
    left_limit: float
    right_limit: float


@dataclass
class UpsilonCurve:
    """Sampled Upsilon over the admissible speed range."""

    intervals: list[IntervalSamples]
    brackets: list[tuple[int, float, float, float, float]]  # (interval_id, c_lo, c_hi, y_lo, y_hi)
    discontinuities: list[Discontinuity]
    upward_crossings: list[tuple[int, float, float]]
    roots: list[float] = field(default_factory=list)
    root_residuals: list[float] = field(default_factory=list)

    @property
    def samples(self) -> list[tuple[float, float]]:
        return [(float(c), float(y)) for seg in self.intervals for c, y in zip(seg.c, seg.upsilon)]

    def max_abs_upsilon(self) -> float:
        return max(abs(y) for _c, y in self.samples)


def upsilon(model: VelocityModel, params: ChemParams, c: float) -> float:
    """Slope of the chemoattractant at the origin for the profile at speed c.

    Composes the dispersion solve, the matching solve and the closed-form S.
    A resonant source mode (a measure-zero parameter coincidence) is retried
    once with c perturbed by 1e-9 relative.
    """
    try:
        return _upsilon_once(model, params, c)
    except ResonantMode:
        c_perturbed = c * (1.0 + 1e-9) if c != 0.0 else 1e-9 * model.v_max
        logger.warning(
            "resonant source mode at c=%r; retrying with perturbed c=%r", c, c_perturbed
        )
        return _upsilon_once(model, params, c_perturbed)


def _upsilon_once(model: VelocityModel, params: ChemParams, c: float) -> float:
    try:
        profile = solve_modes(model, c)
        sfield = solve_S(profile.rho_modes(), params, c)
    except ResonantMode:
        raise
    except ChemowaveError as exc:
        raise type(exc)(f"at c={c!r}: {exc}") from exc
    return sfield.slope_at_zero


def _upsilon_task(args: tuple[VelocityModel, ChemParams, float]) -> float:
    model, params, c = args
    return upsilon(model, params, c)


def _chebyshev_points(lo: float, hi: float, n: int) -> np.ndarray:
    k = np.arange(1, n + 1)
    return np.sort(0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos((2.0 * k - 1.0) * np.pi / (2.0 * n)))


def scan(
    model: VelocityModel,
    params: ChemParams,
    samples_per_interval: int = 64,
    threads: int = 1,
) -> UpsilonCurve:
    """Sample Upsilon over every continuity interval and bracket sign changes.

    Samples are Chebyshev-spaced inside each component of the admissible
    range (endpoints inset by the node guard); merging is deterministic and
    ordered by c regardless of worker scheduling.
    """
    if samples_per_interval < 8:
        raise ValueError("samples_per_interval must be at least 8")
    window = admissible_speed_interval(model)
    guard = model.node_guard

    plan: list[tuple[int, float, float, np.ndarray]] = []
    for i, (lo, hi) in enumerate(window.admissible_intervals):
        lo_in, hi_in = lo + guard, hi - guard
        if hi - lo <= 3.0 * guard:
            continue  # too narrow for any sample clear of both nodes
        if hi - lo < _NARROW_INTERVAL_FACTOR * guard:
            cs = np.array([0.5 * (lo + hi)])
        else:
            cs = _chebyshev_points(lo_in, hi_in, samples_per_interval)
        plan.append((i, lo, hi, cs))

    all_c = [float(c) for _i, _lo, _hi, cs in plan for c in cs]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            all_y = list(
                pool.map(_upsilon_task, [(model, params, c) for c in all_c], chunksize=8)
            )
    else:
        all_y = [upsilon(model, params, c) for c in all_c]

    intervals: list[IntervalSamples] = []
    pos = 0
    for i, lo, hi, cs in plan:
        ys = np.array(all_y[pos : pos + cs.size])
        pos += cs.size
        intervals.append(IntervalSamples(interval_id=i, lo=lo, hi=hi, c=cs, upsilon=ys))

    brackets: list[tuple[int, float, float, float, float]] = []
    upward: list[tuple[int, float, float]] = []
    for seg in intervals:
        y = seg.upsilon
        for j in range(y.size - 1):
            if y[j] > 0.0 and y[j + 1] < 0.0:
                brackets.append(
                    (seg.interval_id, float(seg.c[j]), float(seg.c[j + 1]), float(y[j]), float(y[j + 1]))
                )
            elif y[j] < 0.0 and y[j + 1] > 0.0:
                logger.warning(
                    "upward in-interval crossing of Upsilon between c=%r and c=%r; "
                    "not counted as a wave speed",
                    seg.c[j],
                    seg.c[j + 1],
                )
                upward.append((seg.interval_id, float(seg.c[j]), float(seg.c[j + 1])))

    discontinuities: list[Discontinuity] = []
    for left_seg, right_seg in zip(intervals[:-1], intervals[1:]):
        if left_seg.hi == right_seg.lo:
            discontinuities.append(
                Discontinuity(
                    node=left_seg.hi,
                    left_limit=float(left_seg.upsilon[-1]),
                    right_limit=float(right_seg.upsilon[0]),
                )
            )

    return UpsilonCurve(
        intervals=intervals,
        brackets=brackets,
        discontinuities=discontinuities,
        upward_crossings=upward,
    )


def refine_roots(curve: UpsilonCurve, model: VelocityModel, params: ChemParams) -> list[float]:
    """Bisect every bracketed downward crossing to relative tolerance 1e-12.

    Fills ``curve.roots`` / ``curve.root_residuals`` and returns the speeds.
    A bracket whose refinement fails raises :class:`LostBracket` rather than
    being dropped silently.
    """
    roots: list[float] = []
    residuals: list[float] = []
    for _interval_id, lo, hi, y_lo, y_hi in curve.brackets:
        if not (y_lo > 0.0 > y_hi):
            raise LostBracket(f"bracket ({lo!r}, {hi!r}) does not straddle a downward crossing")
        try:
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if mid <= lo or mid >= hi or (hi - lo) <= ROOT_C_REL_TOL * max(abs(lo), abs(hi)):
                    break
                y_mid = upsilon(model, params, mid)
                if y_mid == 0.0:
                    lo = hi = mid
                    break
                if y_mid > 0.0:
                    lo = mid
                else:
                    hi = mid
            root = 0.5 * (lo + hi)
            residual = upsilon(model, params, root)
        except ChemowaveError as exc:
            raise LostBracket(f"could not refine bracket ({lo!r}, {hi!r}): {exc}") from exc
        roots.append(float(root))
        residuals.append(float(residual))
    curve.roots = roots
    curve.root_residuals = residuals
    return roots


@dataclass(frozen=True)
class RootVerification:
    """Consistency data for a refined wave speed."""

    c: float
    upsilon_value: float
    maximum_location: float
    slope_sign_changes: int


def verify_root(model: VelocityModel, params: ChemParams, c: float) -> RootVerification:
    """Re-run the pipeline at a reported root and check the S-shape conditions.

    The recomputed S must be unimodal (exactly one sign change of its slope)
    with the maximum at the origin.
    """
    profile = solve_modes(model, c)
    sfield = solve_S(profile.rho_modes(), params, c)
    halfwidth = 40.0 / min(profile.roots.slowest_positive, profile.roots.slowest_negative)
    changes = slope_sign_changes(sfield, halfwidth, points_per_side=2048)
    z_max = locate_maximum(sfield, halfwidth)
    return RootVerification(
        c=float(c),
        upsilon_value=float(sfield.slope_at_zero),
        maximum_location=float(z_max),
        slope_sign_changes=changes,
    )

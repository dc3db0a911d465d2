from __future__ import annotations

import numpy as np
import pytest

from chemowave import (
    admissible_speed_interval,
    build_model,
    cutting_index,
    expand_half_set,
    mean_run_length,
    rate_at,
    tumbling_rates,
)
from chemowave.errors import (
    AsymmetricSet,
    NegativeWeight,
    NoConfinementWindow,
    SensitivityOutOfRange,
    SpeedOnVelocityNode,
    WeightSumNotOne,
    ZeroSignArgument,
)
from chemowave.velocity_model import SensitivityBoundaryWarning, TumblingRates


def test_published_quadrature_set_builds(case_one):
    model, _cfg = case_one
    assert model.n_active == 18
    assert model.velocities[-1] == pytest.approx(0.9916)
    assert np.all(model.weights > 0)
    assert np.sum(model.weights) == pytest.approx(1.0, abs=1e-12)


def test_two_velocity_model_builds(two_velocity_model):
    assert two_velocity_model.n_active == 2
    assert two_velocity_model.v_max == 1.0


def test_weight_sum_rejected():
    with pytest.raises(WeightSumNotOne):
        build_model([-1.0, 1.0], [0.45, 0.45], 0.3, 0.15)


def test_structural_rejections():
    with pytest.raises(AsymmetricSet):
        build_model([-1.0, 0.9], [0.5, 0.5], 0.3, 0.15)
    with pytest.raises(AsymmetricSet):
        build_model([-1.0, 1.0], [0.4, 0.6], 0.3, 0.15)
    with pytest.raises(NegativeWeight):
        build_model([-1.0, 0.0, 1.0], [0.6, -0.2, 0.6], 0.3, 0.15)
    with pytest.raises(AsymmetricSet):
        build_model([], [], 0.3, 0.15)


@pytest.mark.parametrize("chi_s,chi_n", [(0.7, 0.1), (-0.1, 0.0), (0.2, 0.3), (0.5, 0.5)])
def test_sensitivity_rejections(chi_s, chi_n):
    with pytest.raises(SensitivityOutOfRange):
        with np.errstate(all="ignore"):
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore", SensitivityBoundaryWarning)
                build_model([-1.0, 1.0], [0.5, 0.5], chi_s, chi_n)


def test_boundary_sensitivity_warns():
    with pytest.warns(SensitivityBoundaryWarning):
        build_model([-1.0, 1.0], [0.5, 0.5], 0.5, 0.45)


def test_zero_weight_pruning():
    model = build_model([-1.0, 0.0, 1.0], [0.5, 0.0, 0.5], 0.3, 0.15)
    assert model.n_active == 2
    kept = build_model([-1.0, 0.0, 1.0], [0.4, 0.2, 0.4], 0.3, 0.15)
    assert kept.n_active == 3


def test_expand_half_set_roundtrip():
    v, w = expand_half_set([0.0, 0.5, 1.0], [0.2, 0.2, 0.2])
    assert v == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert w == [0.2, 0.2, 0.2, 0.2, 0.2]
    with pytest.raises(AsymmetricSet):
        expand_half_set([-0.5, 1.0], [0.5, 0.5])


def test_tumbling_rate_values(two_velocity_model):
    r = tumbling_rates(two_velocity_model)
    assert (r.t_mm, r.t_mp, r.t_pm, r.t_pp) == pytest.approx((1.45, 0.55, 0.85, 1.15))
    # unbiased limit
    r0 = TumblingRates.from_sensitivities(0.0, 0.0)
    assert (r0.t_mm, r0.t_mp, r0.t_pm, r0.t_pp) == (1.0, 1.0, 1.0, 1.0)
    # strong-sensitivity case: the doubly favourable rate collapses to 0.05
    r2 = TumblingRates.from_sensitivities(0.5, 0.45)
    assert r2.t_mp == pytest.approx(0.05)


def test_rate_at_sign_map(two_velocity_model):
    r = tumbling_rates(two_velocity_model)
    assert rate_at(r, +1, +1) == r.t_pp
    assert rate_at(r, -1, +1) == r.t_mp
    assert rate_at(r, +1, -1) == r.t_pm
    assert rate_at(r, -1, -1) == r.t_mm
    # any nonzero magnitude works through its sign
    assert rate_at(r, 3.7, -0.01) == r.t_pm
    with pytest.raises(ZeroSignArgument):
        rate_at(r, 0.0, 1.0)


@pytest.mark.parametrize("chi_s", [0.05, 0.2, 0.45])
@pytest.mark.parametrize("chi_n", [0.0, 0.05, 0.2])
def test_rate_ordering_and_positivity(chi_s, chi_n):
    if chi_n > chi_s:
        pytest.skip("ordering assumes chi_n <= chi_s")
    r = TumblingRates.from_sensitivities(chi_s, chi_n)
    assert r.min_rate > 0
    assert r.t_mp <= r.t_pm <= r.t_pp <= r.t_mm


def test_two_velocity_speed_window_closed_form():
    # Hand-derived: with velocities {-v, v} and equal weights, the left-side
    # run length vanishes at c = v (chi_s + chi_n), the right-side analogue at
    # c = -v (chi_s - chi_n).
    for v, chi_s, chi_n in [(1.0, 0.3, 0.15), (2.0, 0.3, 0.15), (1.0, 0.4, 0.1)]:
        model = build_model([-v, v], [0.5, 0.5], chi_s, chi_n)
        window = admissible_speed_interval(model)
        assert window.c_upper == pytest.approx(v * (chi_s + chi_n), abs=1e-12)
        assert window.c_lower == pytest.approx(-v * (chi_s - chi_n), abs=1e-12)
        # cross-check by an independent coarse bisection on the run length
        lo, hi = 0.0, v
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if mean_run_length(model, mid, "left") > 0:
                lo = mid
            else:
                hi = mid
        assert window.c_upper == pytest.approx(0.5 * (lo + hi), abs=1e-9)


def test_window_root_residuals(case_one, case_two):
    for model, _cfg in (case_one, case_two):
        window = admissible_speed_interval(model)
        assert abs(mean_run_length(model, window.c_upper, "left")) < 1e-12
        assert abs(mean_run_length(model, window.c_lower, "right")) < 1e-12
        assert window.c_lower <= 0.0  # consequence of chi_n <= chi_s
        assert window.c_lower < window.c_upper


def test_components_partition_scan_range(case_two):
    model, _cfg = case_two
    window = admissible_speed_interval(model)
    comps = window.admissible_intervals
    assert comps[0][0] == max(0.0, window.c_lower)
    assert comps[-1][1] == window.c_upper
    for (a, b), (c, d) in zip(comps[:-1], comps[1:]):
        assert a < b == c < d
        assert b in model.velocities  # interior breakpoints are nodes


def test_run_length_monotone_in_speed(case_one):
    model, _cfg = case_one
    cs = np.linspace(0.01, 0.95, 200)
    for side in ("left", "right"):
        vals = [mean_run_length(model, c, side) for c in cs]
        assert np.all(np.diff(vals) < 0)


def test_negated_input_gives_identical_window(case_one):
    model, cfg = case_one
    v, w = expand_half_set(list(cfg.velocities), list(cfg.weights))
    flipped = build_model([-x for x in v][::-1], w[::-1], cfg.chi_s, cfg.chi_n)
    w1 = admissible_speed_interval(model)
    w2 = admissible_speed_interval(flipped)
    assert w1.c_upper == w2.c_upper and w1.c_lower == w2.c_lower


def test_mirror_identity_of_run_lengths(case_one):
    # Negating all velocities maps the right-side run length at c onto minus
    # the length computed with the sign-swapped rate table at -c.
    model, _cfg = case_one
    r = model.rates
    for c in (0.05, 0.1, 0.2):
        tau = np.where(model.velocities + c > 0, r.t_pm, r.t_pp)
        mirrored = -float(np.sum(model.weights * (model.velocities + c) / tau))
        assert mean_run_length(model, c, "right") == pytest.approx(mirrored, rel=1e-14)


def test_no_confinement_for_unbiased_model():
    model = build_model([-1.0, 1.0], [0.5, 0.5], 0.0, 0.0)
    with pytest.raises(NoConfinementWindow):
        admissible_speed_interval(model)


def test_cutting_index(case_one, two_velocity_model):
    model, _cfg = case_one
    j = cutting_index(model, 0.3)
    assert model.velocities[j] == pytest.approx(0.2519)
    assert model.velocities[j + 1] > 0.3
    assert cutting_index(two_velocity_model, 0.25) == 0  # only -1 lies below
    with pytest.raises(SpeedOnVelocityNode):
        cutting_index(model, 0.9916)
    with pytest.raises(SpeedOnVelocityNode):
        cutting_index(model, 0.2519 + 1e-12)
    assert cutting_index(model, -2.0) == -1

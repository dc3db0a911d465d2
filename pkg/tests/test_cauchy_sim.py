from __future__ import annotations

import numpy as np
import pytest

from chemowave import (
    ChemParams,
    InitialDensity,
    SimConfig,
    build_model,
    initial_state,
    measure_front_speed,
    run,
    step,
    total_mass,
)
from chemowave.cauchy_sim import SimState, cell_centers
from chemowave.errors import CFLViolation, InsufficientSamples


def _pair_model(chi_s=0.0, chi_n=0.0, v=1.0):
    return build_model([-v, v], [0.5, 0.5], chi_s, chi_n)


def _free_params(beta=0.0, gamma=0.0):
    return ChemParams(d_s=0.5, d_n=1.0, alpha=0.5, beta=beta, gamma=gamma)


def test_config_validation():
    model = _pair_model()
    params = _free_params()
    with pytest.raises(ValueError):
        SimConfig(model=model, params=params, domain_length=10.0, cells=32, cfl=0.5, t_end=1.0)
    with pytest.raises(ValueError):
        SimConfig(model=model, params=params, domain_length=10.0, cells=64, cfl=1.5, t_end=1.0)
    with pytest.raises(ValueError):
        SimConfig(model=model, params=params, domain_length=10.0, cells=64, cfl=0.5, t_end=-1.0)
    with pytest.raises(ValueError):
        InitialDensity(kind="triangle")


def test_initial_mass_is_unit():
    model = _pair_model()
    for kind in ("block", "gaussian"):
        config = SimConfig(
            model=model,
            params=_free_params(),
            domain_length=20.0,
            cells=128,
            cfl=0.5,
            t_end=1.0,
            initial_rho=InitialDensity(kind=kind),
        )
        state = initial_state(config)
        assert total_mass(config, state) == pytest.approx(1.0, abs=1e-12)
        assert np.all(state.f >= 0.0)
        assert np.all(state.n == config.initial_n)
        assert np.all(state.s == 0.0)


def test_unbiased_advection_limit_conserves_and_stays_symmetric():
    # No sensing, no chemistry: a centred block just spreads symmetrically
    # under transport plus isotropic exchange; mass is conserved to roundoff.
    model = _pair_model()
    config = SimConfig(
        model=model,
        params=_free_params(),
        domain_length=20.0,
        cells=256,
        cfl=0.5,
        t_end=3.0,
        initial_rho=InitialDensity(kind="block", center=10.0, width=2.0),
    )
    state = initial_state(config)
    m0 = total_mass(config, state)
    for _ in range(100):
        state = step(state, config)
    assert total_mass(config, state) == pytest.approx(m0, abs=1e-12)
    rho = model.weights @ state.f
    assert np.allclose(rho, rho[::-1], atol=1e-13)
    assert np.all(state.f >= 0.0)


def test_per_step_mass_conservation_with_full_coupling(case_two):
    model, _cfg = case_two
    config = SimConfig(
        model=model,
        params=ChemParams(d_s=0.5, d_n=1.0, alpha=10.0, beta=1.0, gamma=1.0),
        domain_length=20.0,
        cells=256,
        cfl=0.45,
        t_end=1.0,
    )
    state = initial_state(config)
    prev = total_mass(config, state)
    for _ in range(50):
        state = step(state, config)
        mass = total_mass(config, state)
        assert mass == pytest.approx(prev, rel=1e-10)
        prev = mass


def test_no_consumption_keeps_nutrient_flat():
    model = _pair_model(chi_s=0.3, chi_n=0.15)
    config = SimConfig(
        model=model,
        params=_free_params(beta=1.0, gamma=0.0),
        domain_length=20.0,
        cells=128,
        cfl=0.5,
        t_end=2.0,
        initial_n=0.7,
    )
    state = initial_state(config)
    for _ in range(60):
        state = step(state, config)
    assert np.allclose(state.n, 0.7, rtol=0.0, atol=1e-12)


def test_pure_decay_of_attractant():
    # beta = 0 with a hand-placed attractant bump: the sup norm decays.
    model = _pair_model()
    config = SimConfig(
        model=model,
        params=_free_params(beta=0.0, gamma=0.0),
        domain_length=20.0,
        cells=128,
        cfl=0.5,
        t_end=2.0,
    )
    base = initial_state(config)
    x = cell_centers(config)
    state = SimState(
        t=0.0,
        f=base.f,
        s=np.exp(-((x - 10.0) ** 2)),
        n=base.n,
        ds_dt=base.ds_dt,
        dn_dt=base.dn_dt,
    )
    sups = [np.max(state.s)]
    for _ in range(50):
        state = step(state, config)
        sups.append(np.max(state.s))
    assert np.all(np.diff(sups) < 0.0)
    assert sups[-1] < sups[0] * np.exp(-0.5 * state.t) * 1.05


def test_nutrient_maximum_principle(case_three):
    model, _cfg = case_three
    config = SimConfig(
        model=model,
        params=ChemParams(d_s=0.5, d_n=1.0, alpha=10.0, beta=1.0, gamma=1.0),
        domain_length=20.0,
        cells=256,
        cfl=0.45,
        t_end=2.0,
    )
    state = initial_state(config)
    tops = [np.max(state.n)]
    for _ in range(80):
        state = step(state, config)
        tops.append(np.max(state.n))
        assert np.min(state.n) >= 0.0
        assert np.min(state.f) >= 0.0
    assert np.all(np.diff(tops) <= 1e-12)


def test_cfl_violation_raised():
    model = _pair_model()
    config = SimConfig(
        model=model, params=_free_params(), domain_length=10.0, cells=128, cfl=0.5, t_end=1.0
    )
    state = initial_state(config)
    with pytest.raises(CFLViolation):
        step(state, config, dt=10.0 * config.default_dt())


def test_measure_front_speed_linear_fit():
    rng = np.random.default_rng(7)
    t = np.linspace(0.0, 50.0, 120)
    dx2 = 0.05
    track = np.column_stack([t, 0.15 * t + rng.normal(0.0, dx2, t.size)])
    speed, residual = measure_front_speed(track, 0.5)
    assert speed == pytest.approx(0.15, abs=2.0 * dx2 / 25.0)
    assert residual < 3.0 * dx2

    flat = np.column_stack([t, np.full(t.size, 3.0)])
    speed, residual = measure_front_speed(flat, 1.0)
    assert speed == pytest.approx(0.0, abs=1e-14)
    assert residual == pytest.approx(0.0, abs=1e-14)

    with pytest.raises(InsufficientSamples):
        measure_front_speed(track[:5], 1.0)
    with pytest.raises(InsufficientSamples):
        measure_front_speed(track, 0.05)


def test_run_produces_snapshots_and_diagnostics(case_two):
    model, _cfg = case_two
    config = SimConfig(
        model=model,
        params=ChemParams(d_s=0.5, d_n=1.0, alpha=10.0, beta=1.0, gamma=1.0),
        domain_length=20.0,
        cells=128,
        cfl=0.45,
        t_end=40.0,
        snapshot_interval=2.0,
        keep_velocity_snapshots=True,
    )
    state, diagnostics, snapshots = run(config)
    assert state.t == pytest.approx(40.0, rel=1e-12)
    assert len(snapshots) == 21
    assert snapshots[0].t == 0.0 and snapshots[-1].t == pytest.approx(40.0, rel=1e-12)
    assert snapshots[-1].f is not None and snapshots[-1].f.shape == (model.n_active, 128)
    assert diagnostics.peak_track.shape[0] == len(snapshots)
    assert diagnostics.peak_track[-1, 1] > 2.0  # the peak detached and moved right
    assert diagnostics.n_components >= 1
    assert abs(total_mass(config, state) - 1.0) < 1e-8


def test_front_speed_grid_self_consistency(case_two):
    # First-order scheme: the fitted speed moves by a small amount when the
    # mesh is doubled, well inside the acceptance band width.
    model, _cfg = case_two
    params = ChemParams(d_s=0.5, d_n=1.0, alpha=10.0, beta=1.0, gamma=1.0)
    speeds = {}
    for cells in (256, 512):
        config = SimConfig(
            model=model,
            params=params,
            domain_length=30.0,
            cells=cells,
            cfl=0.45,
            t_end=80.0,
        )
        _state, diagnostics, _snaps = run(config)
        speeds[cells] = diagnostics.fitted_speed
    assert abs(speeds[512] - speeds[256]) < 0.02

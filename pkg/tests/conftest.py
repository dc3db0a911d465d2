from __future__ import annotations

import warnings
from pathlib import Path

import pytest

from chemowave import ChemParams, build_model, expand_half_set
from chemowave.cli_io import load_config
from chemowave.velocity_model import SensitivityBoundaryWarning

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def _model_from_config(name: str):
    cfg, _h = load_config(CONFIG_DIR / name)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SensitivityBoundaryWarning)
        return cfg.build_model(), cfg


@pytest.fixture(scope="session")
def configs_dir() -> Path:
    return CONFIG_DIR


@pytest.fixture(scope="session")
def case_one():
    """Unique-wave configuration: (model, run config)."""
    return _model_from_config("sec4_1.ini")


@pytest.fixture(scope="session")
def case_two():
    """Two-wave configuration."""
    return _model_from_config("sec4_2.ini")


@pytest.fixture(scope="session")
def case_three():
    """No-wave configuration."""
    return _model_from_config("sec4_3.ini")


@pytest.fixture(scope="session")
def two_velocity_model():
    return build_model([-1.0, 1.0], [0.5, 0.5], 0.3, 0.15)


@pytest.fixture(scope="session")
def chem_default() -> ChemParams:
    return ChemParams(d_s=0.5, d_n=1.0, alpha=0.5, beta=1.0, gamma=1.0)


@pytest.fixture(scope="session")
def overshoot_model(case_one):
    """The strong-attractant configuration exhibiting velocity overshoot."""
    model, cfg = case_one
    v, w = expand_half_set(list(cfg.velocities), list(cfg.weights))
    return build_model(v, w, 0.48, 0.2)

"""Configuration parsing, CSV emission and the ``chemowave`` command line.

Configuration files are flat INI-style text with sections [model], [chem],
[sim] and [run].  Keys are validated against a fixed schema: unknown keys are
errors, not warnings, and every numeric output is serialized with 17
significant digits so files re-parse to the exact in-memory doubles.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import os
import re
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .cauchy_sim import InitialDensity, SimConfig, run
from .chemo_fields import ChemParams, solve_N, solve_S
from .errors import (
    ChemowaveError,
    ConfigError,
    MissingKey,
    ModelError,
    NumericalError,
    ParseError,
    UnknownKey,
)
from .velocity_model import (
    VelocityModel,
    admissible_speed_interval,
    build_model,
    expand_half_set,
)
from .wave_profile import (
    WaveProfile,
    evaluate_f_matrix,
    evaluate_I,
    evaluate_rho,
    solve_modes,
    verification_grid,
)
from .wave_speed import UpsilonCurve, refine_roots, scan, verify_root

logger = logging.getLogger(__name__)

MODES = ("validate", "upsilon-scan", "profile", "simulate")

# section -> key -> (type tag, required)
_SCHEMA: dict[str, dict[str, tuple[str, bool]]] = {
    "model": {
        "velocities": ("float_list", True),
        "weights": ("float_list", True),
        "chi_s": ("float", True),
        "chi_n": ("float", True),
    },
    "chem": {
        "d_s": ("float", True),
        "d_n": ("float", True),
        "alpha": ("float", True),
        "beta": ("float", True),
        "gamma": ("float", True),
    },
    "sim": {
        "domain_length": ("float", True),
        "cells": ("int", True),
        "cfl": ("float", True),
        "t_end": ("float", True),
        "initial_shape": ("str", False),
        "initial_center": ("float", False),
        "initial_width": ("float", False),
        "initial_mass": ("float", False),
        "initial_n": ("float", False),
        "sign_deadzone": ("float", False),
        "snapshot_interval": ("float", False),
        "fit_window_fraction": ("float", False),
        "peak_prominence": ("float", False),
        "snapshot_f": ("bool", False),
    },
    "run": {
        "mode": ("str", True),
        "out_dir": ("str", False),
        "samples_per_interval": ("int", False),
        "profile_speed": ("float", False),
        "threads": ("int", False),
        "seed": ("int", False),
    },
}

_SECTION_RE = re.compile(r"^\[([A-Za-z_][A-Za-z0-9_]*)\]$")


@dataclass(frozen=True)
class SimBlock:
    domain_length: float
    cells: int
    cfl: float
    t_end: float
    initial_shape: str = "block"
    initial_center: float | None = None
    initial_width: float | None = None
    initial_mass: float = 1.0
    initial_n: float = 1.0
    sign_deadzone: float = 1e-12
    snapshot_interval: float | None = None
    fit_window_fraction: float = 0.5
    peak_prominence: float = 0.1
    snapshot_f: bool = False


@dataclass(frozen=True)
class RunConfig:
    """Parsed and validated run description (plain data, no arrays)."""

    mode: str
    velocities: tuple[float, ...]       # nonnegative half of the symmetric set
    weights: tuple[float, ...]
    chi_s: float
    chi_n: float
    chem: ChemParams | None = None
    sim: SimBlock | None = None
    out_dir: str | None = None
    samples_per_interval: int = 64
    profile_speed: float | None = None
    threads: int = 1
    seed: int | None = None

    def build_model(self) -> VelocityModel:
        v, w = expand_half_set(list(self.velocities), list(self.weights))
        return build_model(v, w, self.chi_s, self.chi_n)

    def build_sim_config(self) -> SimConfig:
        if self.chem is None or self.sim is None:
            raise MissingKey("simulate mode requires both [chem] and [sim] sections")
        s = self.sim
        return SimConfig(
            model=self.build_model(),
            params=self.chem,
            domain_length=s.domain_length,
            cells=s.cells,
            cfl=s.cfl,
            t_end=s.t_end,
            initial_rho=InitialDensity(
                kind=s.initial_shape, center=s.initial_center, width=s.initial_width, mass=s.initial_mass
            ),
            initial_n=s.initial_n,
            sign_deadzone=s.sign_deadzone,
            snapshot_interval=s.snapshot_interval,
            fit_window_fraction=s.fit_window_fraction,
            peak_prominence_fraction=s.peak_prominence,
            keep_velocity_snapshots=s.snapshot_f,
        )


def _convert(raw: str, kind: str, line: int, column: int):
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == "float_list":
            parts = [p for p in re.split(r"[,\s]+", raw.strip()) if p]
            return tuple(float(p) for p in parts)
        return raw
    except ValueError as exc:
        raise ParseError(f"bad {kind} value {raw!r}: {exc}", line=line, column=column) from exc


def _parse_sections(text: str) -> dict[str, dict[str, object]]:
    sections: dict[str, dict[str, object]] = {}
    current: str | None = None
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        m = _SECTION_RE.match(line)
        if m:
            name = m.group(1)
            if name not in _SCHEMA:
                raise UnknownKey(f"unknown section [{name}] (line {lineno})")
            if name in sections:
                raise ParseError(f"duplicate section [{name}]", line=lineno, column=1)
            sections[name] = {}
            current = name
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value' or a [section] header", line=lineno, column=1)
        if current is None:
            raise ParseError("key/value pair before any [section] header", line=lineno, column=1)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _SCHEMA[current]:
            raise UnknownKey(f"unknown key {key!r} in section [{current}] (line {lineno})")
        if key in sections[current]:
            raise ParseError(f"duplicate key {key!r} in section [{current}]", line=lineno, column=1)
        column = rawline.index("=") + 2
        kind = _SCHEMA[current][key][0]
        sections[current][key] = _convert(value, kind, lineno, column)
    return sections


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a configuration file.

    Raises :class:`ParseError` / :class:`UnknownKey` / :class:`MissingKey`
    for structural problems and the specific model errors (with key context)
    for semantic ones.
    """
    sections = _parse_sections(text)

    for section, keys in _SCHEMA.items():
        if section in sections:
            for key, (_kind, required) in keys.items():
                if required and key not in sections[section]:
                    raise MissingKey(f"missing required key {key!r} in section [{section}]")
    if "model" not in sections:
        raise MissingKey("missing required section [model]")
    if "run" not in sections:
        raise MissingKey("missing required section [run]")

    run_sec = sections["run"]
    mode = str(run_sec["mode"])
    if mode not in MODES:
        raise ParseError(f"mode must be one of {MODES}, got {mode!r}")
    if mode in ("upsilon-scan", "profile", "simulate") and "chem" not in sections:
        raise MissingKey(f"mode {mode!r} requires a [chem] section")
    if mode == "simulate" and "sim" not in sections:
        raise MissingKey("mode 'simulate' requires a [sim] section")
    if mode == "profile" and "profile_speed" not in run_sec:
        raise MissingKey("mode 'profile' requires 'profile_speed' in [run]")

    model_sec = sections["model"]
    chem = None
    if "chem" in sections:
        try:
            chem = ChemParams(**{k: float(v) for k, v in sections["chem"].items()})
        except ValueError as exc:
            raise ConfigError(f"in [chem]: {exc}") from exc
    sim = None
    if "sim" in sections:
        try:
            sim = SimBlock(**sections["sim"])  # type: ignore[arg-type]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"in [sim]: {exc}") from exc

    cfg = RunConfig(
        mode=mode,
        velocities=tuple(model_sec["velocities"]),
        weights=tuple(model_sec["weights"]),
        chi_s=float(model_sec["chi_s"]),
        chi_n=float(model_sec["chi_n"]),
        chem=chem,
        sim=sim,
        out_dir=run_sec.get("out_dir"),
        samples_per_interval=int(run_sec.get("samples_per_interval", 64)),
        profile_speed=(
            float(run_sec["profile_speed"]) if "profile_speed" in run_sec else None
        ),
        threads=int(run_sec.get("threads", 1)),
        seed=(int(run_sec["seed"]) if "seed" in run_sec else None),
    )
    try:
        cfg.build_model()
    except ModelError as exc:
        raise type(exc)(f"in [model]: {exc}") from exc
    if cfg.sim is not None and cfg.chem is not None:
        try:
            cfg.build_sim_config()
        except ValueError as exc:
            if isinstance(exc, ChemowaveError):
                raise
            raise ConfigError(f"in [sim]: {exc}") from exc
    return cfg


def _g17(x: float) -> str:
    return f"{float(x):.17g}"


def format_config(cfg: RunConfig) -> str:
    """Serialize a RunConfig back to configuration text (17-digit floats)."""
    out = ["[model]"]
    out.append("velocities = " + " ".join(_g17(v) for v in cfg.velocities))
    out.append("weights = " + " ".join(_g17(w) for w in cfg.weights))
    out.append(f"chi_s = {_g17(cfg.chi_s)}")
    out.append(f"chi_n = {_g17(cfg.chi_n)}")
    if cfg.chem is not None:
        out.append("")
        out.append("[chem]")
        for key in ("d_s", "d_n", "alpha", "beta", "gamma"):
            out.append(f"{key} = {_g17(getattr(cfg.chem, key))}")
    if cfg.sim is not None:
        s = cfg.sim
        out.append("")
        out.append("[sim]")
        out.append(f"domain_length = {_g17(s.domain_length)}")
        out.append(f"cells = {s.cells}")
        out.append(f"cfl = {_g17(s.cfl)}")
        out.append(f"t_end = {_g17(s.t_end)}")
        out.append(f"initial_shape = {s.initial_shape}")
        if s.initial_center is not None:
            out.append(f"initial_center = {_g17(s.initial_center)}")
        if s.initial_width is not None:
            out.append(f"initial_width = {_g17(s.initial_width)}")
        out.append(f"initial_mass = {_g17(s.initial_mass)}")
        out.append(f"initial_n = {_g17(s.initial_n)}")
        out.append(f"sign_deadzone = {_g17(s.sign_deadzone)}")
        if s.snapshot_interval is not None:
            out.append(f"snapshot_interval = {_g17(s.snapshot_interval)}")
        out.append(f"fit_window_fraction = {_g17(s.fit_window_fraction)}")
        out.append(f"peak_prominence = {_g17(s.peak_prominence)}")
        out.append(f"snapshot_f = {'true' if s.snapshot_f else 'false'}")
    out.append("")
    out.append("[run]")
    out.append(f"mode = {cfg.mode}")
    if cfg.out_dir is not None:
        out.append(f"out_dir = {cfg.out_dir}")
    out.append(f"samples_per_interval = {cfg.samples_per_interval}")
    if cfg.profile_speed is not None:
        out.append(f"profile_speed = {_g17(cfg.profile_speed)}")
    out.append(f"threads = {cfg.threads}")
    if cfg.seed is not None:
        out.append(f"seed = {cfg.seed}")
    return "\n".join(out) + "\n"


def load_config(path: str | Path) -> tuple[RunConfig, str]:
    """Read a config file; returns (config, provenance hash of the raw text)."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_config(text), hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

def _header_lines(config_hash: str | None) -> list[str]:
    lines = [f"# chemowave {__version__}"]
    if config_hash:
        lines.append(f"# config_sha256={config_hash}")
    return lines


def emit_upsilon_csv(curve: UpsilonCurve, path: str | Path, config_hash: str | None = None) -> None:
    """Write the sampled curve: columns c, upsilon, interval_id (ascending c)."""
    rows = [
        f"{_g17(c)},{_g17(y)},{seg.interval_id}"
        for seg in curve.intervals
        for c, y in zip(seg.c, seg.upsilon)
    ]
    body = _header_lines(config_hash) + ["c,upsilon,interval_id"] + rows
    Path(path).write_text("\n".join(body) + "\n", encoding="utf-8")


def emit_speeds_summary(
    roots: list[float],
    path: str | Path,
    residuals: list[float] | None = None,
    config_hash: str | None = None,
) -> None:
    """Write refined wave speeds; an empty list gets a status=no_wave footer."""
    lines = _header_lines(config_hash) + ["c,upsilon_residual"]
    if residuals is None:
        residuals = [float("nan")] * len(roots)
    for c, r in zip(roots, residuals):
        lines.append(f"{_g17(c)},{_g17(r)}")
    if not roots:
        lines.append("# status=no_wave")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def emit_profile_csv(
    profile: WaveProfile,
    sfield,
    nfield,
    path: str | Path,
    config_hash: str | None = None,
) -> None:
    """Write z, rho, I, s, n and every f_k on the verification grid."""
    z = verification_grid(profile)
    rho = np.asarray(evaluate_rho(profile, z))
    I_vals = np.asarray(evaluate_I(profile, z))
    s_vals = np.asarray(sfield(z))
    n_vals = np.asarray(nfield(z))
    f_vals = evaluate_f_matrix(profile, z)
    head = _header_lines(config_hash)
    head.append("# velocities=" + " ".join(_g17(v) for v in profile.velocities))
    cols = "z,rho,I,s,n," + ",".join(f"f_{k}" for k in range(profile.model.n_active))
    rows = []
    for i in range(z.size):
        rows.append(
            ",".join(
                [_g17(z[i]), _g17(rho[i]), _g17(I_vals[i]), _g17(s_vals[i]), _g17(n_vals[i])]
                + [_g17(v) for v in f_vals[i]]
            )
        )
    Path(path).write_text("\n".join(head + [cols] + rows) + "\n", encoding="utf-8")


def emit_snapshot_csv(snapshot, path: str | Path, config_hash: str | None = None) -> None:
    """Write one simulation snapshot: x, rho, s, n (and f_k when recorded)."""
    head = _header_lines(config_hash) + [f"# t={_g17(snapshot.t)}"]
    with_f = snapshot.f is not None
    cols = "x,rho,s,n"
    if with_f:
        cols += "," + ",".join(f"f_{k}" for k in range(snapshot.f.shape[0]))
    rows = []
    for i in range(snapshot.x.size):
        row = [_g17(snapshot.x[i]), _g17(snapshot.rho[i]), _g17(snapshot.s[i]), _g17(snapshot.n[i])]
        if with_f:
            row += [_g17(v) for v in snapshot.f[:, i]]
        rows.append(",".join(row))
    Path(path).write_text("\n".join(head + [cols] + rows) + "\n", encoding="utf-8")


def emit_diagnostics_csv(diagnostics, path: str | Path, config_hash: str | None = None) -> None:
    """Write the peak track (t, peak_x) plus fitted-speed metadata comments."""
    head = _header_lines(config_hash)
    head.append(f"# fitted_speed={_g17(diagnostics.fitted_speed)}")
    head.append(f"# fit_residual={_g17(diagnostics.fit_residual)}")
    head.append(f"# n_components={diagnostics.n_components}")
    rows = [f"{_g17(t)},{_g17(xp)}" for t, xp in diagnostics.peak_track]
    Path(path).write_text("\n".join(head + ["t,peak_x"] + rows) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

def _mode_validate(cfg: RunConfig, out: Path, config_hash: str) -> None:
    model = cfg.build_model()
    window = admissible_speed_interval(model)
    r = model.rates
    print(f"model: {model.n_active} active velocities, v_max={_g17(model.v_max)}")
    print(
        "rates: t_mm=%s t_mp=%s t_pm=%s t_pp=%s"
        % (_g17(r.t_mm), _g17(r.t_mp), _g17(r.t_pm), _g17(r.t_pp))
    )
    print(f"speed window: c_lower={_g17(window.c_lower)} c_upper={_g17(window.c_upper)}")
    print(f"continuity intervals: {len(window.admissible_intervals)}")


def _mode_scan(cfg: RunConfig, out: Path, config_hash: str) -> None:
    model = cfg.build_model()
    curve = scan(model, cfg.chem, cfg.samples_per_interval, threads=cfg.threads)
    roots = refine_roots(curve, model, cfg.chem)
    emit_upsilon_csv(curve, out / "upsilon.csv", config_hash)
    emit_speeds_summary(roots, out / "speeds.csv", curve.root_residuals, config_hash)
    print(f"sampled {len(curve.samples)} speeds in {len(curve.intervals)} intervals")
    print(f"admissible wave speeds: {len(roots)}")
    for c in roots:
        check = verify_root(model, cfg.chem, c)
        print(
            f"  c={_g17(c)}  |Upsilon|={abs(check.upsilon_value):.3e}  "
            f"S-max at z={check.maximum_location:.3e}  unimodal={check.slope_sign_changes == 1}"
        )
    if not roots:
        print("no admissible root: travelling wave construction fails for this configuration")


def _mode_profile(cfg: RunConfig, out: Path, config_hash: str) -> None:
    model = cfg.build_model()
    c = cfg.profile_speed
    profile = solve_modes(model, c)
    sfield = solve_S(profile.rho_modes(), cfg.chem, c)
    halfwidth = 40.0 / min(profile.roots.slowest_positive, profile.roots.slowest_negative)
    nfield = solve_N(profile.rho_modes(), cfg.chem, c, halfwidth)
    emit_profile_csv(profile, sfield, nfield, out / "profile.csv", config_hash)
    print(
        f"profile at c={_g17(c)}: left/right mass {_g17(profile.left_mass)}/"
        f"{_g17(profile.right_mass)}, slowest rates "
        f"{_g17(profile.roots.slowest_negative)}/{_g17(profile.roots.slowest_positive)}"
    )
    print(f"S slope at origin: {_g17(sfield.slope_at_zero)}; N far-field {_g17(nfield.n_minus)}")


def _mode_simulate(cfg: RunConfig, out: Path, config_hash: str) -> None:
    sim_config = cfg.build_sim_config()
    state, diagnostics, snapshots = run(sim_config)
    for i, snapshot in enumerate(snapshots):
        emit_snapshot_csv(snapshot, out / f"snapshot_{i:04d}.csv", config_hash)
    emit_diagnostics_csv(diagnostics, out / "diagnostics.csv", config_hash)
    print(f"integrated to t={_g17(state.t)} with {len(snapshots)} snapshots")
    print(
        f"front speed {_g17(diagnostics.fitted_speed)} "
        f"(rms residual {diagnostics.fit_residual:.3e}), "
        f"{diagnostics.n_components} density component(s) at final time"
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="chemowave",
        description="Travelling-wave construction and simulation for a discrete-velocity "
        "kinetic chemotaxis model.",
    )
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", required=True, help="path to the configuration file")
    parser.add_argument("--out", default=None, help="output directory (default: [run] out_dir or '.')")
    parser.add_argument("--threads", type=int, default=None, help="parallel workers for the scan")
    parser.add_argument("--seed", type=int, default=None, help="reserved; pipelines are deterministic")
    args = parser.parse_args(argv)

    logging.basicConfig(level=os.environ.get("CHEMOWAVE_LOG", "WARNING").upper())

    try:
        cfg, config_hash = load_config(args.config)
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 4
    except ChemowaveError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2

    cfg = replace(cfg, mode=args.mode)
    if args.threads is not None:
        cfg = replace(cfg, threads=args.threads)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if cfg.mode in ("upsilon-scan", "profile", "simulate") and cfg.chem is None:
        print(f"mode {cfg.mode!r} requires a [chem] section", file=sys.stderr)
        return 2
    if cfg.mode == "simulate" and cfg.sim is None:
        print("mode 'simulate' requires a [sim] section", file=sys.stderr)
        return 2
    if cfg.mode == "profile" and cfg.profile_speed is None:
        print("mode 'profile' requires 'profile_speed' in [run]", file=sys.stderr)
        return 2

    out = Path(args.out or cfg.out_dir or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
        dispatch = {
            "validate": _mode_validate,
            "upsilon-scan": _mode_scan,
            "profile": _mode_profile,
            "simulate": _mode_simulate,
        }
        dispatch[cfg.mode](cfg, out, config_hash)
    except (ConfigError, ModelError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

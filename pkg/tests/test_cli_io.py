from __future__ import annotations

import numpy as np
import pytest

from chemowave.cli_io import (
    emit_speeds_summary,
    emit_upsilon_csv,
    format_config,
    load_config,
    main,
    parse_config,
)
from chemowave.errors import (
    MissingKey,
    ParseError,
    SensitivityOutOfRange,
    UnknownKey,
)

TWO_VELOCITY_SCAN = """
[model]
velocities = 1
weights = 0.5
chi_s = 0.3
chi_n = 0.15

[chem]
d_s = 0.5
d_n = 1
alpha = 0.5
beta = 1
gamma = 1

[run]
mode = upsilon-scan
samples_per_interval = 8
"""


def test_shipped_configs_parse_and_roundtrip(configs_dir):
    for name in ("sec4_1.ini", "sec4_2.ini", "sec4_3.ini"):
        cfg, _h = load_config(configs_dir / name)
        assert parse_config(format_config(cfg)) == cfg


def test_case_study_parameters(configs_dir):
    cfg, _h = load_config(configs_dir / "sec4_1.ini")
    assert cfg.chi_s == 0.3 and cfg.chi_n == 0.15
    assert cfg.chem.alpha == 0.5 and cfg.chem.d_s == 0.5 and cfg.chem.d_n == 1.0
    assert cfg.chem.beta == 1.0 and cfg.chem.gamma == 1.0
    assert len(cfg.velocities) == 10 and cfg.velocities[0] == 0.0
    model = cfg.build_model()
    assert model.n_active == 18


def test_missing_key_detected():
    text = TWO_VELOCITY_SCAN.replace("chi_s = 0.3\n", "")
    with pytest.raises(MissingKey, match="chi_s"):
        parse_config(text)


def test_unknown_key_and_section():
    with pytest.raises(UnknownKey, match="wobble"):
        parse_config(TWO_VELOCITY_SCAN + "\n[model]\nwobble = 1\n".replace("[model]\n", ""))
    with pytest.raises(UnknownKey, match="extras"):
        parse_config(TWO_VELOCITY_SCAN + "\n[extras]\nx = 1\n")


def test_out_of_range_sensitivity_has_key_context():
    text = TWO_VELOCITY_SCAN.replace("chi_s = 0.3", "chi_s = 0.7")
    with pytest.raises(SensitivityOutOfRange, match=r"\[model\]"):
        parse_config(text)


def test_parse_error_carries_line_number():
    text = "[model]\nvelocities = 1\nweights = abc\nchi_s = 0.3\nchi_n = 0.1\n[run]\nmode = validate\n"
    with pytest.raises(ParseError, match="line 3"):
        parse_config(text)
    with pytest.raises(ParseError, match="line 2"):
        parse_config("[model]\nvelocities 1\n")
    with pytest.raises(ParseError, match="before any"):
        parse_config("velocities = 1\n")
    with pytest.raises(ParseError, match="duplicate key"):
        parse_config("[model]\nchi_s = 0.1\nchi_s = 0.2\n")
    with pytest.raises(ParseError, match="mode must be"):
        parse_config(TWO_VELOCITY_SCAN.replace("mode = upsilon-scan", "mode = dance"))


def test_mode_requirements():
    with pytest.raises(MissingKey, match=r"\[chem\]"):
        parse_config(
            "[model]\nvelocities = 1\nweights = 0.5\nchi_s = 0.3\nchi_n = 0.15\n"
            "[run]\nmode = upsilon-scan\n"
        )
    with pytest.raises(MissingKey, match="profile_speed"):
        parse_config(TWO_VELOCITY_SCAN.replace("mode = upsilon-scan", "mode = profile"))
    with pytest.raises(MissingKey, match=r"\[sim\]"):
        parse_config(TWO_VELOCITY_SCAN.replace("mode = upsilon-scan", "mode = simulate"))


def test_emitted_floats_roundtrip(tmp_path):
    cfg = parse_config(TWO_VELOCITY_SCAN)
    model = cfg.build_model()
    from chemowave import refine_roots, scan

    curve = scan(model, cfg.chem, 8)
    refine_roots(curve, model, cfg.chem)
    path = tmp_path / "upsilon.csv"
    emit_upsilon_csv(curve, path, config_hash="deadbeef")
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# chemowave ")
    assert lines[1] == "# config_sha256=deadbeef"
    assert lines[2] == "c,upsilon,interval_id"
    cs, ys = [], []
    for row in lines[3:]:
        c_str, y_str, interval_id = row.split(",")
        cs.append(float(c_str))
        ys.append(float(y_str))
        assert interval_id == "0"
    assert cs == sorted(cs)
    expected = dict(curve.samples)
    for c, y in zip(cs, ys):
        assert y == expected[c]  # 17-digit serialization is exact


def test_speeds_summary_no_wave_footer(tmp_path):
    path = tmp_path / "speeds.csv"
    emit_speeds_summary([], path)
    content = path.read_text().splitlines()
    assert content[-1] == "# status=no_wave"
    assert "c,upsilon_residual" in content

    emit_speeds_summary([0.15], path, residuals=[1e-12])
    row = path.read_text().splitlines()[-1].split(",")
    assert float(row[0]) == 0.15 and float(row[1]) == 1e-12


def test_cli_validate_and_scan(tmp_path, capsys):
    cfg_path = tmp_path / "two.ini"
    cfg_path.write_text(TWO_VELOCITY_SCAN)
    assert main(["validate", "--config", str(cfg_path)]) == 0
    out = capsys.readouterr().out
    assert "speed window" in out

    assert main(["upsilon-scan", "--config", str(cfg_path), "--out", str(tmp_path / "scan")]) == 0
    assert (tmp_path / "scan" / "upsilon.csv").exists()
    assert (tmp_path / "scan" / "speeds.csv").exists()


def test_cli_profile_mode(tmp_path):
    text = TWO_VELOCITY_SCAN.replace(
        "mode = upsilon-scan", "mode = profile\nprofile_speed = 0.25"
    )
    cfg_path = tmp_path / "prof.ini"
    cfg_path.write_text(text)
    assert main(["profile", "--config", str(cfg_path), "--out", str(tmp_path)]) == 0
    header = (tmp_path / "profile.csv").read_text().splitlines()
    cols = [line for line in header if not line.startswith("#")][0]
    assert cols == "z,rho,I,s,n,f_0,f_1"


def test_cli_simulate_mode(tmp_path):
    text = TWO_VELOCITY_SCAN.replace("mode = upsilon-scan", "mode = simulate") + (
        "\n[sim]\ndomain_length = 10\ncells = 64\ncfl = 0.5\nt_end = 2\nsnapshot_interval = 1\n"
    )
    cfg_path = tmp_path / "sim.ini"
    cfg_path.write_text(text)
    assert main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "sim")]) == 0
    assert (tmp_path / "sim" / "diagnostics.csv").exists()
    assert (tmp_path / "sim" / "snapshot_0000.csv").exists()
    assert (tmp_path / "sim" / "snapshot_0002.csv").exists()


def test_cli_exit_codes(tmp_path, capsys):
    # 4: unreadable config
    assert main(["validate", "--config", str(tmp_path / "nope.ini")]) == 4
    # 2: validation failures (bad sensitivity; requested speed outside window)
    bad = tmp_path / "bad.ini"
    bad.write_text(TWO_VELOCITY_SCAN.replace("chi_s = 0.3", "chi_s = 0.7"))
    assert main(["validate", "--config", str(bad)]) == 2
    fast = tmp_path / "fast.ini"
    fast.write_text(
        TWO_VELOCITY_SCAN.replace("mode = upsilon-scan", "mode = profile\nprofile_speed = 0.9")
    )
    assert main(["profile", "--config", str(fast)]) == 2
    # 3: numerical failure (numerically coincident velocity nodes)
    knot = tmp_path / "knot.ini"
    knot.write_text(
        TWO_VELOCITY_SCAN.replace(
            "velocities = 1\nweights = 0.5",
            "velocities = 0.5 0.50000000000000011\nweights = 0.25 0.25",
        ).replace("mode = upsilon-scan", "mode = profile\nprofile_speed = 0.1")
    )
    assert main(["profile", "--config", str(knot)]) == 3
    capsys.readouterr()


def test_cli_mode_override(tmp_path):
    # the CLI positional mode wins over the config's [run] mode
    cfg_path = tmp_path / "two.ini"
    cfg_path.write_text(TWO_VELOCITY_SCAN)
    assert main(["validate", "--config", str(cfg_path)]) == 0


def test_cli_scan_on_shipped_config(tmp_path, configs_dir, capsys):
    out = tmp_path / "case1"
    code = main(
        ["upsilon-scan", "--config", str(configs_dir / "sec4_1.ini"), "--out", str(out)]
    )
    assert code == 0
    stdout = capsys.readouterr().out
    assert "admissible wave speeds: 1" in stdout
    speeds_rows = [
        line
        for line in (out / "speeds.csv").read_text().splitlines()
        if line and not line.startswith("#") and not line.startswith("c,")
    ]
    assert len(speeds_rows) == 1
    assert 0.0 < float(speeds_rows[0].split(",")[0]) < 0.23714


def test_format_config_includes_all_blocks(configs_dir):
    cfg, _h = load_config(configs_dir / "sec4_2.ini")
    text = format_config(cfg)
    for token in ("[model]", "[chem]", "[sim]", "[run]", "snapshot_interval"):
        assert token in text
    assert parse_config(text) == cfg

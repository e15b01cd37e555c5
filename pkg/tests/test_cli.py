import json
import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coupledwave import mesh as msh
from coupledwave.cli import ENERGY_HEADER, TABLE_HEADER, run_cli
from coupledwave.config import ConfigError, RunConfig, parse_config, render_config


# --- config parsing ---------------------------------------------------------


def test_minimal_config_fills_defaults():
    cfg = parse_config("mode = simulate\n")
    assert cfg == RunConfig(mode="simulate")
    assert cfg.rel_tol == 1e-12
    assert cfg.fit_window == 0.5


def test_comments_and_blank_lines():
    cfg = parse_config(
        """
        # a full-line comment
        mode = simulate
        k = 0.02   # trailing comment
        T = 1.0

        eps_u = 0.5
        """
    )
    assert cfg.k == 0.02 and cfg.eps_u == 0.5


@pytest.mark.parametrize(
    "text,fragment,line",
    [
        ("mode = simulate\nwavelength = 3\n", "unknown key", 2),
        ("mode = simulate\nmode = convergence\n", "duplicate", 2),
        ("mode = simulate\neps_u = -1\n", "eps_u", 2),
        ("mode = simulate\nk = 0.0\n", "k", 2),
        ("mode = simulate\nn_per_side = 4.5\n", "integer", 2),
        ("mode = simulate\nc = fast\n", "number", 2),
        ("mode = simulate\njust words\n", "key = value", 2),
        ("mode = simulate\nk = 0.3\nT = 1.0\n", "does not divide", 2),
        ("mode = orbit\n", "mode must be one of", 1),
        ("mode = simulate\ndomain = cube\n", "domain", 2),
        ("mode = simulate\nfit_window = 0\n", "fit_window", 2),
        ("mode = convergence\nlevels = 2\n", "levels", 2),
        ("mode = simulate\nlyapunov_beta = 1.0\n", "together", 2),
        ("mode = simulate\nmethod = qr\n", "method", 2),
    ],
)
def test_config_errors_carry_line_numbers(text, fragment, line):
    with pytest.raises(ConfigError, match=fragment) as err:
        parse_config(text)
    assert err.value.line == line


def test_missing_mode_is_an_error():
    with pytest.raises(ConfigError, match="missing required key 'mode'"):
        parse_config("k = 0.01\nT = 1.0\n")


def test_decay_study_requires_lyapunov_weights():
    with pytest.raises(ConfigError, match="decay-study"):
        parse_config("mode = decay-study\n")
    cfg = parse_config(
        "mode = decay-study\nlyapunov_n_weight = 8\nlyapunov_beta = 0.5\n"
    )
    assert cfg.lyapunov_n_weight == 8.0


def test_render_parse_round_trip_explicit():
    cfg = parse_config(
        "mode = decay-study\nk = 0.025\nT = 2.5\neps_u = 0.5\neps_v = 0.25\n"
        "lyapunov_n_weight = 12\nlyapunov_beta = 0.125\ninitial = sine\n"
        "rel_tol = 1e-13\nout_energy = run.csv\n"
    )
    assert parse_config(render_config(cfg)) == cfg


@settings(max_examples=30, deadline=None)
@given(
    c=st.floats(0.1, 10.0),
    eps=st.floats(0.0, 2.0),
    alpha=st.floats(0.01, 5.0),
    k=st.sampled_from([0.1, 0.05, 0.02, 0.01]),
    steps=st.integers(1, 40),
    window=st.floats(0.05, 1.0),
)
def test_render_parse_round_trip_generated(c, eps, alpha, k, steps, window):
    cfg = RunConfig(
        mode="simulate", c=c, eps_u=eps, eps_v=eps / 3.0 if eps else 0.0,
        alpha=alpha, k=k, T=k * steps, fit_window=window, initial="sine",
    )
    assert parse_config(render_config(cfg)) == cfg


# --- CLI end to end ---------------------------------------------------------


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


SINE_CONFIG = (
    "mode = simulate\ndomain = square\nn_per_side = 4\n"
    "k = 0.05\nT = 0.5\neps_u = 0.5\neps_v = 0.25\ninitial = sine\n"
)


def test_zero_run_outputs(tmp_path, capsys):
    cfg = write_config(tmp_path, "mode = simulate\nn_per_side = 4\nk = 0.1\nT = 0.5\n")
    assert run_cli(["--config", cfg, "--out-dir", str(tmp_path / "out")]) == 0
    lines = (tmp_path / "out" / "energy.csv").read_text().splitlines()
    assert lines[0] == ENERGY_HEADER
    assert len(lines) == 6  # header + M_steps levels
    for row in lines[1:]:
        fields = row.split(",")
        assert len(fields) == 11
        assert float(fields[2]) == 0.0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["monotone"] is True
    assert summary["final_energy"] == 0.0
    assert summary["fitted_gamma"] is None
    assert summary["max_identity_residual"] == 0.0
    assert "wrote" in capsys.readouterr().out


def test_sine_run_summary_and_formatting(tmp_path):
    cfg = write_config(tmp_path, SINE_CONFIG)
    assert run_cli(["--config", cfg, "--out-dir", str(tmp_path / "out")]) == 0
    lines = (tmp_path / "out" / "energy.csv").read_text().splitlines()
    # t of the first record is k, rendered at 17 significant digits
    first = lines[1].split(",")
    assert first[0] == "1"
    assert first[1] == f"{0.05:.17g}"
    energies = [float(r.split(",")[2]) for r in lines[1:]]
    assert energies[0] > 0.0
    assert all(b <= a + 1e-12 * energies[0] for a, b in zip(energies, energies[1:]))
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["monotone"] is True
    assert summary["max_identity_residual"] < 1e-10
    assert summary["fitted_gamma"] > 0.0


def test_byte_identical_reruns(tmp_path):
    cfg = write_config(tmp_path, SINE_CONFIG)
    for d in ("a", "b"):
        assert run_cli(["--config", cfg, "--out-dir", str(tmp_path / d), "--quiet"]) == 0
    for name in ("energy.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_quiet_suppresses_stdout(tmp_path, capsys):
    cfg = write_config(tmp_path, SINE_CONFIG)
    assert run_cli(["--config", cfg, "--out-dir", str(tmp_path / "out"), "--quiet"]) == 0
    assert capsys.readouterr().out == ""


def test_decay_study_mode(tmp_path):
    cfg = write_config(
        tmp_path,
        "mode = decay-study\nn_per_side = 4\nk = 0.05\nT = 1.0\n"
        "eps_u = 0.5\neps_v = 0.5\ninitial = sine\n"
        "lyapunov_n_weight = 10\nlyapunov_beta = 0.5\n",
    )
    out = tmp_path / "out"
    assert run_cli(["--config", cfg, "--out-dir", str(out), "--quiet"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["fitted_gamma"] > 0.0
    rows = (out / "energy.csv").read_text().splitlines()[1:]
    # Lyapunov column must dominate the pure-energy column by roughly N_weight
    e_col = np.array([float(r.split(",")[2]) for r in rows])
    l_col = np.array([float(r.split(",")[10]) for r in rows])
    assert (l_col > 5.0 * e_col).all()


def test_decay_study_zero_energy_is_config_error(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        "mode = decay-study\nn_per_side = 3\nk = 0.1\nT = 0.5\n"
        "lyapunov_n_weight = 5\nlyapunov_beta = 0.5\n",
    )
    assert run_cli(["--config", cfg, "--out-dir", str(tmp_path / "o")]) == 1
    assert "decay fit impossible" in capsys.readouterr().err


def test_convergence_mode_table(tmp_path):
    cfg = write_config(
        tmp_path,
        "mode = convergence\ndomain = interval\nn_per_side = 8\nlevels = 3\n"
        "case = separable-decay-1d\nk = 0.1\nT = 1.0\neps_u = 0.5\neps_v = 0.25\n",
    )
    out = tmp_path / "out"
    assert run_cli(["--config", cfg, "--out-dir", str(out), "--quiet"]) == 0
    lines = (out / "convergence.csv").read_text().splitlines()
    assert lines[0] == TABLE_HEADER
    assert len(lines) == 4
    first = lines[1].split(",")
    assert first[0] == "0" and first[4] == "nan"
    errors = [float(r.split(",")[3]) for r in lines[1:]]
    assert errors == sorted(errors, reverse=True)
    orders = [float(r.split(",")[4]) for r in lines[2:]]
    assert all(o > 0.9 for o in orders)


def test_domain_from_mesh_file(tmp_path):
    mesh_path = tmp_path / "square.mesh"
    msh.write_mesh(msh.generate_unit_square(3), mesh_path)
    cfg = write_config(
        tmp_path,
        f"mode = simulate\ndomain = file:{mesh_path}\nk = 0.1\nT = 0.5\ninitial = sine\n",
    )
    assert run_cli(["--config", cfg, "--out-dir", str(tmp_path / "o"), "--quiet"]) == 0


def test_exit_code_bad_arguments(capsys):
    assert run_cli([]) == 1
    capsys.readouterr()


def test_exit_code_unreadable_config(tmp_path, capsys):
    assert run_cli(["--config", str(tmp_path / "missing.cfg")]) == 3
    assert "cannot read config" in capsys.readouterr().err


def test_exit_code_config_error(tmp_path, capsys):
    cfg = write_config(tmp_path, "mode = simulate\neps_u = -2\n")
    assert run_cli(["--config", cfg]) == 1
    assert "line 2" in capsys.readouterr().err


def test_exit_code_missing_mesh_file(tmp_path, capsys):
    cfg = write_config(tmp_path, "mode = simulate\ndomain = file:/nope/none.mesh\n")
    assert run_cli(["--config", cfg]) == 3
    capsys.readouterr()


def test_exit_code_bad_mesh_file(tmp_path, capsys):
    bad = tmp_path / "bad.mesh"
    bad.write_text("2 3 1\n0 0 1\n1 0 1\n1 1 1\n0 1 2\n")  # repeated vertex in cell
    cfg = write_config(tmp_path, f"mode = simulate\ndomain = file:{bad}\n")
    assert run_cli(["--config", cfg]) == 1
    capsys.readouterr()


def test_exit_code_solver_failure(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        SINE_CONFIG + "max_iter = 1\nrel_tol = 1e-14\n",
    )
    assert run_cli(["--config", cfg, "--out-dir", str(tmp_path / "o")]) == 2
    assert "solver failed" in capsys.readouterr().err


def test_exit_code_empty_system(tmp_path, capsys):
    cfg = write_config(tmp_path, "mode = simulate\nn_per_side = 1\nk = 0.1\nT = 0.5\n")
    assert run_cli(["--config", cfg]) == 1
    assert "interior" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    cfg = write_config(tmp_path, "mode = simulate\nn_per_side = 3\nk = 0.1\nT = 0.3\n")
    proc = subprocess.run(
        [sys.executable, "-m", "coupledwave", "--config", cfg,
         "--out-dir", str(tmp_path / "o"), "--quiet"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "o" / "energy.csv").exists()

import math

import numpy as np
import pytest

from qldp.cli import (
    EXIT_OK,
    EXIT_REGIME,
    EXIT_USAGE,
    EXIT_VIOLATED,
    load_kraus_file,
    main,
    parse_observable,
    parse_state,
)
from qldp.errors import ChannelParseError, InvalidInputError
from qldp.utility import optimal_fidelity_utility
from qldp.privacy import PrivacyBudget


def read_csv(path):
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def test_utility_curve_outputs(tmp_path):
    out = tmp_path / "curve"
    rc = main(["utility-curve", "--d", "10", "--deltas", "0,0.1,0.3",
               "--eps-start", "0", "--eps-stop", "5", "--eps-points", "11",
               "--output-dir", str(out)])
    assert rc == EXIT_OK
    header, rows = read_csv(out / "utility_curve.csv")
    assert header == ["epsilon", "delta", "optimal_fidelity", "optimal_trace"]
    assert len(rows) == 33
    # values are the exact closed forms at 12 significant digits
    for eps_s, delta_s, f_s, t_s in rows:
        b = PrivacyBudget(float(eps_s), float(delta_s))
        assert float(f_s) == pytest.approx(optimal_fidelity_utility(10, b), abs=1e-11)
        assert abs(float(f_s) + float(t_s) - 1.0) < 1e-10
    # monotone in epsilon for each delta
    for delta in ("0", "0.1", "0.3"):
        fids = [float(r[2]) for r in rows if r[1] == delta]
        assert fids == sorted(fids)
    assert (out / "utility_curve_dims.csv").exists()
    assert (out / "fig_optimal_fidelity_by_delta.svg").read_text().startswith("<svg")
    assert (out / "fig_optimal_fidelity_by_dimension.svg").exists()


def test_utility_curve_dimension_ordering(tmp_path):
    out = tmp_path / "curve"
    rc = main(["utility-curve", "--dims", "2,10,100", "--delta-fixed", "0.1",
               "--eps-points", "5", "--output-dir", str(out)])
    assert rc == EXIT_OK
    _, rows = read_csv(out / "utility_curve_dims.csv")
    by_dim = {d: [float(r[2]) for r in rows if r[1] == d] for d in ("2", "10", "100")}
    for small, large in (("2", "10"), ("10", "100")):
        assert all(a >= b - 1e-15 for a, b in zip(by_dim[small], by_dim[large]))


def test_utility_curve_empty_grid_writes_nothing(tmp_path):
    out = tmp_path / "nothing"
    rc = main(["utility-curve", "--eps-points", "0", "--output-dir", str(out)])
    assert rc == EXIT_USAGE
    assert not out.exists()


def test_certify_full_depolarizing(capsys):
    rc = main(["certify", "--channel", "depolarizing 2 1.0", "--epsilon", "0.5"])
    assert rc == EXIT_OK
    assert "SATISFIED" in capsys.readouterr().out


def test_certify_undershooting_channel(capsys):
    rc = main(["certify", "--channel", "depolarizing 2 0.4",
               "--epsilon", str(math.log(3)), "--delta", "0",
               "--restarts", "16", "--local-steps", "60"])
    assert rc == EXIT_VIOLATED
    assert "VIOLATED" in capsys.readouterr().out


def test_certify_boundary_case(capsys):
    rc = main(["certify", "--channel", "depolarizing 4 0.4",
               "--epsilon", str(math.log(2)), "--delta", "0.5",
               "--restarts", "16", "--local-steps", "60"])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "SATISFIED" in out and "borderline" in out


def test_certify_kraus_file(tmp_path, capsys):
    path = tmp_path / "chan.txt"
    s = 1 / math.sqrt(2)
    path.write_text(
        "# amplitude-symmetric pair\n"
        "dims 2 2\n"
        "kraus\n"
        f"{s} 0\n0 {s}\n"
        "kraus\n"
        f"0 {s}\n{s} 0\n"
    )
    rc = main(["certify", "--kraus-file", str(path), "--epsilon", "1",
               "--restarts", "8", "--local-steps", "40"])
    assert rc in (EXIT_OK, EXIT_VIOLATED)  # parses and certifies
    assert "sup_estimate" in capsys.readouterr().out


def test_kraus_file_parse_error_reports_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("dims 2 2\nkraus\n1 0\n0 oops\n")
    with pytest.raises(ChannelParseError, match="line 4"):
        load_kraus_file(str(path))


def test_kraus_file_requires_dims_header(tmp_path):
    path = tmp_path / "bad2.txt"
    path.write_text("kraus\n1 0\n0 1\n")
    with pytest.raises(ChannelParseError, match="line 1"):
        load_kraus_file(str(path))


def test_estimate_command_runs_and_is_deterministic(tmp_path, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    args = ["estimate", "--observable", "Z", "--state", "zero",
            "--epsilon", "1", "--beta", "0.1", "--eta", "0.05",
            "--trials", "60", "--seed", "7"]
    rc = main(args + ["--output-dir", str(out1)])
    assert rc == EXIT_OK
    text = capsys.readouterr().out
    assert "n_upper = 3455" in text
    assert "coverage" in text
    rc = main(args + ["--output-dir", str(out2)])
    assert rc == EXIT_OK
    assert (out1 / "estimate_trials.csv").read_bytes() == (out2 / "estimate_trials.csv").read_bytes()


def test_estimate_flags_unavailable_lower_bound(tmp_path, capsys):
    rc = main(["estimate", "--observable", "Z", "--beta", "0.6", "--eta", "0.05",
               "--trials", "30", "--n", "400", "--output-dir", str(tmp_path / "c")])
    assert rc == EXIT_OK
    text = capsys.readouterr().out
    assert "unavailable" in text
    assert "n_upper" in text


def test_estimate_infeasible_budget_exits_3(tmp_path):
    rc = main(["estimate", "--epsilon", "0", "--delta", "0",
               "--output-dir", str(tmp_path / "d")])
    assert rc == EXIT_REGIME
    assert not (tmp_path / "d").exists()


def test_shadows_command_reports_clamped_p_hat(tmp_path, capsys):
    rc = main(["shadows", "--m", "1", "--observable", "Z", "--epsilon", "1",
               "--beta", "0.4", "--eta", "0.2", "--trials", "40",
               "--output-dir", str(tmp_path / "s")])
    assert rc == EXIT_OK
    text = capsys.readouterr().out
    assert "p_hat = 0 " in text or "p_hat = 0\n" in text.replace("   ", "\n")


def test_shadows_command_high_privacy_p_hat(tmp_path, capsys):
    rc = main(["shadows", "--m", "1", "--epsilon", "0.1", "--beta", "1.2",
               "--eta", "0.2", "--trials", "30", "--output-dir", str(tmp_path / "s2")])
    assert rc == EXIT_OK
    text = capsys.readouterr().out
    assert "p_hat = 0.8501" in text


def test_shadows_infeasible_exits_3(tmp_path):
    rc = main(["shadows", "--epsilon", "0", "--delta", "0",
               "--output-dir", str(tmp_path / "s3")])
    assert rc == EXIT_REGIME


def test_cost_report_values(capsys, tmp_path):
    rc = main(["cost-report", "--m-list", "1,3", "--output-dir", str(tmp_path / "cost")])
    assert rc == EXIT_OK
    text = capsys.readouterr().out
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and ln.strip()[0].isdigit()]
    table = {int(row[0]): row for row in lines}
    assert table[1][1] == "3"       # 2m+1 bits
    assert table[3][1] == "7"
    assert table[3][2] == "64"      # d^2 complex entries
    header, rows = read_csv(tmp_path / "cost" / "cost_report.csv")
    assert header == ["m", "pauli_bits", "shadow_complex_entries", "shadow_bits"]


def test_bounds_table(capsys, tmp_path):
    rc = main(["bounds", "--observable", "Z", "--eps-list", "0.25,0.5,1",
               "--beta-list", "0.05,0.1", "--eta", "0.1",
               "--output-dir", str(tmp_path / "bounds")])
    assert rc == EXIT_OK
    text = capsys.readouterr().out
    assert "VIOLATED" not in text
    header, rows = read_csv(tmp_path / "bounds" / "bounds.csv")
    assert "lower_qht" in header and "upper_shadow" in header
    assert len(rows) == 6


def test_bounds_marks_out_of_regime_epsilon(capsys):
    rc = main(["bounds", "--eps-list", "2", "--beta-list", "0.1", "--eta", "0.1",
               "--output-dir", ""])
    assert rc == EXIT_OK
    text = capsys.readouterr().out
    assert "out-of-regime (eps > 1)" in text
    # the explicit-formula cell is still present for eps > 1
    row = [ln for ln in text.splitlines() if ln.startswith("2")][0]
    assert "out-of-regime (eps > 1)" in row


def test_config_file_and_cli_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment line\nd = 4\neps_points = 3\ndeltas = 0\n")
    out = tmp_path / "cfgout"
    rc = main(["utility-curve", "--config", str(cfg), "--d", "6",
               "--output-dir", str(out)])
    assert rc == EXIT_OK
    _, rows = read_csv(out / "utility_curve.csv")
    assert len(rows) == 3  # eps_points from config
    b = PrivacyBudget(float(rows[0][0]), 0.0)
    assert float(rows[0][2]) == pytest.approx(optimal_fidelity_utility(6, b), abs=1e-11)  # d from CLI


def test_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("frobnicate = 1\n")
    rc = main(["utility-curve", "--config", str(cfg)])
    assert rc == EXIT_USAGE


def test_parse_observable_forms(tmp_path):
    dec, obs = parse_observable("Z")
    assert dec.weight == 1.0
    dec2, obs2 = parse_observable("Z:1.0,X:0.5")
    assert abs(dec2.weight - 1.5) < 1e-12
    path = tmp_path / "obs.txt"
    path.write_text("1 0\n0 -1\n")
    dec3, obs3 = parse_observable(f"file:{path}")
    assert np.abs(obs3 - obs).max() < 1e-12


def test_parse_state_forms():
    rng = np.random.default_rng(0)
    assert parse_state("zero", 2, rng)[0, 0] == 1.0
    assert np.abs(parse_state("mixed", 4, rng) - np.eye(4) / 4).max() < 1e-15
    rho = parse_state("random-pure", 2, rng)
    assert abs(np.trace(rho @ rho).real - 1.0) < 1e-10
    diag = parse_state("diag:0.8,0.2", 2, rng)
    assert np.abs(diag - np.diag([0.8, 0.2])).max() < 1e-15
    with pytest.raises(InvalidInputError):
        parse_state("diag:0.5,0.1", 2, rng)
    with pytest.raises(InvalidInputError):
        parse_state("squeezed", 2, rng)


def test_seed_env_default(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("QLDP_SEED", "123")
    out1, out2 = tmp_path / "e1", tmp_path / "e2"
    base = ["estimate", "--trials", "20", "--n", "100", "--beta", "0.5"]
    assert main(base + ["--output-dir", str(out1)]) == EXIT_OK
    assert main(base + ["--output-dir", str(out2)]) == EXIT_OK
    assert (out1 / "estimate_trials.csv").read_bytes() == (out2 / "estimate_trials.csv").read_bytes()

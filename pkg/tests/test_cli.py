import json
import pytest
import scipy.linalg
from ptchain import __version__, ChainParams, Command, OutputFormat
from ptchain.reality import eta_critical_isotropic
from ptchain.cli import (
    EXIT_OK,
    EXIT_VIOLATION,
    EXIT_USAGE,
    PRESETS,
    create_parser,
    read_config_file,
    resolve_config,
    main,
)


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_eta_c(capsys):
    code, document = run_json(capsys, ["eta-c", "--j1", "2", "--j2", "0.4", "--grid", "128"])
    assert code == EXIT_OK
    results = document["results"]
    assert results["eta_c"] == pytest.approx(1.6)
    assert results["which_min"] == "DIFF"
    assert results["eta_c_numeric"] == pytest.approx(1.6, abs=1e-6)
    assert document["config"]["params"]["j1"] == 2.0
    assert document["diagnostics"]["version"] == __version__
    assert "eta_c" in document["diagnostics"]["schema"]


def test_eta_c_tiny_tol_terminates(capsys):
    argv = ["eta-c", "--j1", "2", "--j2", "0.4", "--grid", "64", "--tol", "1e-17"]
    code, document = run_json(capsys, argv)
    assert code == EXIT_OK
    assert document["results"]["eta_c_numeric"] == pytest.approx(1.6, abs=1e-6)


def test_eta_c_anisotropic_has_reasons(capsys):
    code, document = run_json(capsys, ["eta-c", "--preset", "fig2-solid"])
    assert code == EXIT_OK
    assert document["results"]["eta_c"] is None
    assert "eta_c" in document["diagnostics"]["reasons"]
    assert document["results"]["eta_c_numeric"] == pytest.approx(0.998, abs=2e-3)


def test_counterpart_past_threshold(capsys):
    code, document = run_json(capsys, ["counterpart", "--j1", "2", "--j2", "0.4", "--eta", "2"])
    assert code == EXIT_OK
    assert document["results"]["valid"] is False
    assert document["results"]["reason"] == "eta > eta_c"
    assert document["diagnostics"]["reasons"]["a1"] == "eta > eta_c"


def test_counterpart_all_roots(capsys):
    code, document = run_json(capsys, ["counterpart", "--preset", "fig1-i", "--root", "all"])
    assert code == EXIT_OK
    solutions = document["results"]["solutions"]
    assert [s["root"] for s in solutions] == ["a1", "a2", "-a1", "-a2"]
    assert solutions[0]["j1_prime"] == pytest.approx(1.71537, abs=1e-5)
    assert all(s["max_deviation"] < 1e-10 for s in solutions)


def test_bands_csv(capsys):
    code = main(["bands", "--preset", "fig1-ii", "--grid", "16", "--format", "csv"])
    lines = capsys.readouterr().out.splitlines()
    assert code == EXIT_OK
    assert lines[0] == "k,re_minus,im_minus,re_plus,im_plus,is_real"
    assert len(lines) == 17
    assert lines[-1].split(",")[-1] in ("true", "false")


def test_bands_in_units_of_eta(capsys):
    code, document = run_json(capsys, ["bands", "--preset", "fig1-i", "--grid", "8", "--eta", "2", "--units-eta"])
    assert code == EXIT_OK
    assert document["results"]["energy_unit"] == "eta"
    assert len(document["results"]["samples"]) == 8


def test_csv_rejected_for_reports(capsys):
    assert main(["reality", "--format", "csv"]) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_negative_field_is_usage_error(capsys):
    assert main(["reality", "--h", "-1"]) == EXIT_USAGE


def test_reality_fig2(capsys):
    code, document = run_json(capsys, ["reality", "--preset", "fig2-solid"])
    assert code == EXIT_OK
    results = document["results"]
    assert results["fully_real"] is False
    assert len(results["forbidden_intervals"]) == 2
    assert results["mechanism"] == "INNER_ROOT_NEGATIVE"

    code, document = run_json(capsys, ["reality", "--preset", "fig2-dotted"])
    assert document["results"]["fully_real"] is True


def test_critical_fields(capsys):
    code, document = run_json(capsys, ["critical-fields", "--preset", "fig1-i"])
    assert code == EXIT_OK
    assert document["results"]["h_c1"] == pytest.approx(2.18174, abs=1e-5)
    assert document["results"]["h_c2"] == pytest.approx(1.24900, abs=1e-5)
    assert document["results"]["gap_kpi2"]["re"] == pytest.approx(-0.2490, abs=1e-4)


def test_ed_check_passes(capsys):
    argv = ["ed-check", "--j1", "1", "--j2", "0.6", "--h", "0.5", "--eta", "0.3", "--n-sites", "6"]
    code, document = run_json(capsys, argv)
    assert code == EXIT_OK
    results = document["results"]
    assert results["passed"] is True
    assert results["dimension"] == 64
    assert results["hermiticity_residual"] is None
    assert all(document["diagnostics"]["checks"].values())


def test_ed_check_open_chain(capsys):
    argv = ["ed-check", "--preset", "fig1-iii", "--n-sites", "6", "--boundary", "open"]
    code, document = run_json(capsys, argv)
    assert code == EXIT_OK
    assert document["results"]["passed"] is True
    assert document["config"]["boundary"] == "open"


def test_ed_check_eigensolver_failure(capsys, monkeypatch):
    def fail(matrix):
        raise scipy.linalg.LinAlgError("eigenvalues did not converge")

    monkeypatch.setattr("ptchain.cli.complex_spectrum", fail)
    assert main(["ed-check", "--preset", "fig1-i", "--n-sites", "4"]) == EXIT_VIOLATION
    assert "did not converge" in capsys.readouterr().err


def test_ed_check_size_limit(capsys):
    assert main(["ed-check", "--n-sites", "12", "--max-sites", "10"]) == EXIT_USAGE


def test_phase_diagram_csv(capsys):
    argv = ["phase-diagram", "--j1", "2", "--j2", "0.4", "--grid", "64", "--format", "csv"]
    argv += ["--h-range", "0", "2", "3", "--eta-range", "0", "2", "3"]
    code = main(argv)
    lines = capsys.readouterr().out.splitlines()
    assert code == EXIT_OK
    assert lines[0] == "h,eta,reality,order,h_c1,h_c2"
    assert len(lines) == 10
    rows = [line.split(",") for line in lines[1:]]
    assert [float(r[0]) for r in rows] == [0, 0, 0, 1, 1, 1, 2, 2, 2]
    assert rows[0][2] == "REAL"
    assert rows[2][2] == "BROKEN"
    assert rows[2][3] == "UNDEFINED"
    assert rows[2][5] == ""


def test_output_is_deterministic(capsys):
    argv = ["reality", "--preset", "fig1-iii", "--grid", "128"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first


def test_out_file(tmp_path, capsys):
    path = tmp_path / "fields.json"
    assert main(["critical-fields", "--preset", "fig1-i", "--out", str(path)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    document = json.loads(path.read_text())
    assert document["config"]["preset"] == "fig1-i"


def test_config_precedence(tmp_path):
    path = tmp_path / "chain.cfg"
    path.write_text("# dimerized chain\nj1 = 3\neta=0.5\nh = 2  # field\n")
    args = create_parser().parse_args(["critical-fields", "--preset", "fig1-i", "--config", str(path), "--j1", "1.5"])
    config = resolve_config(args)
    assert config.command is Command.CRITICAL_FIELDS
    assert config.output_format is OutputFormat.JSON
    assert config.params.j1 == 1.5
    assert config.params.j2 == PRESETS["fig1-i"].j2
    assert config.params.eta == 0.5
    assert config.params.h == 2.0


def test_config_unknown_key(tmp_path):
    path = tmp_path / "chain.cfg"
    path.write_text("j3 = 1\n")
    with pytest.raises(ValueError):
        read_config_file(str(path))


def test_config_missing_equals(tmp_path):
    path = tmp_path / "chain.cfg"
    path.write_text("j1 1\n")
    with pytest.raises(ValueError):
        read_config_file(str(path))


def test_missing_config_file_is_usage_error(tmp_path, capsys):
    assert main(["reality", "--config", str(tmp_path / "missing.cfg")]) == EXIT_USAGE


def test_unknown_command_exits():
    with pytest.raises(SystemExit):
        main(["spectrum"])



def test_json_floats_round_trip_exactly(capsys):
    code, document = run_json(capsys, ["eta-c", "--j1", "1.1", "--j2", "0.37", "--grid", "64"])
    assert code == EXIT_OK
    assert document["results"]["eta_c"] == eta_critical_isotropic(ChainParams(1.1, 0.37)).eta_c

"""csp-refuter command line: subcommands, stdout payloads and exit codes."""

import json

import pytest

from cli.main import (
    EXIT_IO,
    EXIT_OK,
    EXIT_RESOURCE,
    EXIT_USAGE,
    EXIT_VERIFY_FAILED,
    main,
)
from csp_refuter.spectral.bench import CSV_COLUMNS

THREADS = ["--threads", "1"]


@pytest.fixture
def instance_path(tmp_path) -> str:
    path = str(tmp_path / "instance.json")
    assert main(["gen", "--family", "neq", "--n", "8", "--m", "20", "--seed", "4", "-o", path, *THREADS]) == EXIT_OK
    return path


@pytest.fixture
def certificate_path(instance_path, tmp_path) -> str:
    path = str(tmp_path / "certificate.json")
    assert main(["refute", instance_path, "-o", path, *THREADS]) == EXIT_OK
    return path


class TestGen:
    def test_stdout(self, capsys):
        assert main(["gen", "--family", "xor3", "--n", "6", "--m", "9", "--seed", "1"]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["n"] == 6
        assert data["seed"] == 1

    def test_same_seed_same_bytes(self, capsys):
        main(["gen", "--family", "nae3", "--n", "7", "--m", "12", "--seed", "3"])
        first = capsys.readouterr().out
        main(["gen", "--family", "nae3", "--n", "7", "--m", "12", "--seed", "3"])
        assert capsys.readouterr().out == first

    def test_unknown_preset(self, capsys):
        assert main(["gen", "--family", "sudoku", "--n", "4", "--m", "2"]) == EXIT_USAGE
        assert "Unknown family preset" in capsys.readouterr().err


class TestRefuteAndVerify:
    def test_pipeline(self, instance_path, certificate_path, capsys):
        capsys.readouterr()
        assert main(["verify", certificate_path, "--instance", instance_path, *THREADS]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["passed"] is True

    def test_certificate_to_stdout(self, instance_path, capsys):
        capsys.readouterr()
        assert main(["refute", instance_path, *THREADS]) == EXIT_OK
        cert = json.loads(capsys.readouterr().out)
        assert 0.0 <= cert["bound"] <= 1.0
        assert cert["soundness_mode"] == "certified"

    def test_tampered_certificate_fails(self, instance_path, certificate_path, tmp_path):
        with open(certificate_path, encoding="utf-8") as stream:
            cert = json.load(stream)
        cert["bound"] = 0.1
        tampered = tmp_path / "tampered.json"
        tampered.write_text(json.dumps(cert), encoding="utf-8")
        report = tmp_path / "report.json"
        code = main(["verify", str(tampered), "--instance", instance_path, "-o", str(report), *THREADS])
        assert code == EXIT_VERIFY_FAILED
        assert json.loads(report.read_text())["passed"] is False

    def test_net_cap(self, tmp_path):
        path = str(tmp_path / "neq3.json")
        assert main(["gen", "--family", "neq3", "--n", "8", "--m", "20", "--seed", "1", "-o", path]) == EXIT_OK
        code = main(["refute", path, "--net-step", "0.01", "--net-cap", "50", *THREADS])
        assert code == EXIT_RESOURCE


class TestFamilies:
    def test_opt_t(self, capsys):
        assert main(["opt-t", "--family", "neq", "--epsilon", "0.1", *THREADS]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["opt_t"] == pytest.approx(0.5, abs=0.1)

    def test_check_twise(self, capsys):
        assert main(["check-twise", "--family", "full", *THREADS]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["answer"] == "yes"


class TestBench:
    def test_csv_on_stdout(self, capsys):
        assert main(["bench-norms", "--n", "6", "--m", "10", "12", "--seeds", "2", *THREADS]) == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].split(",") == CSV_COLUMNS
        assert len(lines) == 1 + 4


class TestUsage:
    def test_missing_arguments(self):
        assert main(["refute"]) == EXIT_USAGE

    def test_help(self):
        assert main(["--help"]) == EXIT_OK

    def test_missing_input(self, tmp_path):
        assert main(["refute", str(tmp_path / "nope.json")]) == EXIT_IO

    def test_missing_output_directory(self, instance_path, tmp_path):
        out = str(tmp_path / "nowhere" / "cert.json")
        assert main(["refute", instance_path, "-o", out]) == EXIT_IO

    def test_non_positive_cap(self, instance_path):
        assert main(["refute", instance_path, "--dense-cap", "0"]) == EXIT_USAGE

    def test_conflicting_lp_modes(self, instance_path):
        assert main(["refute", instance_path, "--exact", "--float"]) == EXIT_USAGE


class TestTools:
    def test_list(self, capsys):
        assert main(["tools"]) == EXIT_OK
        names = {t["name"] for t in json.loads(capsys.readouterr().out)}
        assert {"refute_instance", "verify_certificate_file", "brute_force_opt"} <= names

    def test_call(self, instance_path, capsys):
        capsys.readouterr()
        code = main(["tools", "brute_force_opt", "--args", json.dumps({"instance": instance_path})])
        assert code == EXIT_OK
        assert 0.5 <= json.loads(capsys.readouterr().out)["opt"] <= 1.0

    def test_bad_json(self):
        assert main(["tools", "brute_force_opt", "--args", "{not json"]) == EXIT_USAGE

    def test_unknown_tool(self):
        assert main(["tools", "explode"]) == EXIT_USAGE

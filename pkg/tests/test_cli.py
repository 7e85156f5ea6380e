"""End-to-end runs of every subcommand against frozen outputs."""

import csv
import json

import pytest

from qsu2.cli import ExpressionError, build_expression, main, parse_expression
from qsu2.hilbert import commutator, enumerate_basis, frobenius_norm, load_operator
from qsu2.qnum import HalfInteger
from qsu2.spingeom import build_dirac, build_pi_prime, isospectral_spec


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestExpressionGrammar:
    def test_atoms_and_brackets(self):
        assert parse_expression("pi_hat(a)") == ("rep", "pi_hat", "a")
        assert parse_expression(" piop( b* ) ") == ("rep", "piop", "b*")
        assert parse_expression("D") == ("bare", "D")
        node = parse_expression("[piiop(a),[D,pi_prime(b)]]")
        assert node == (
            "comm",
            ("rep", "piiop", "a"),
            ("comm", ("bare", "D"), ("rep", "pi_prime", "b")),
        )

    @pytest.mark.parametrize(
        "bad",
        [
            "bogus(a)",
            "pi_hat(c)",
            "pi_hat",
            "[pi_hat(a)]",
            "[pi_hat(a),pi_hat(b),D]",
            "[pi_hat(a),[pi_hat(b),[pi_hat(a),D]]]",
            "[pi_hat(a),D",
            "",
        ],
    )
    def test_rejects(self, bad):
        with pytest.raises(ExpressionError):
            parse_expression(bad)

    def test_space_mixing_rejected(self):
        with pytest.raises(ExpressionError, match="mixes"):
            build_expression("[pi(a),pi_prime(b)]", 0.5, HalfInteger(2), "qdirac")

    def test_build_matches_direct_construction(self):
        X = build_expression("pi_prime(b*)", 0.5, HalfInteger(2), "qdirac")
        ref = build_pi_prime("b*", enumerate_basis("spinor", 2), 0.5)
        assert frobenius_norm(X - ref) == 0.0


class TestSpectrumCommand:
    def test_level_major_rows(self, tmp_path):
        out = tmp_path / "spec.csv"
        code = main(
            ["spectrum", "--q", "0.5", "--jmax", "2", "--out", str(out), "--no-figure"]
        )
        assert code == 0
        rows = read_csv(out)
        assert rows[0] == ["eigenvalue", "multiplicity", "branch", "j"]
        assert rows[1:] == [
            ["2", "2", "up", "0"],
            ["3", "6", "up", "0.5"],
            ["-1", "2", "down", "0.5"],
            ["4", "12", "up", "1"],
            ["-2", "6", "down", "1"],
        ]
        assert not out.with_suffix(".png").exists()

    def test_figure_rendered_by_default(self, tmp_path):
        out = tmp_path / "spec.csv"
        assert main(["spectrum", "--jmax", "1", "--out", str(out)]) == 0
        png = out.with_suffix(".png")
        assert png.exists() and png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_q_dirac_values(self, tmp_path):
        out = tmp_path / "spec.csv"
        code = main(
            ["spectrum", "--q", "0.5", "--jmax", "1", "--dirac", "qdirac",
             "--out", str(out), "--no-figure"]
        )
        assert code == 0
        rows = read_csv(out)[1:]
        # 2[1]_q/(q+1/q) = 0.8 and 2[2]_q/(q+1/q) = 2 at q = 1/2
        assert rows[0][0] == "0.8"
        assert rows[1][0] == "2"
        assert rows[2][0] == "-2"

    def test_custom_constants(self, tmp_path):
        out = tmp_path / "spec.csv"
        code = main(
            ["spectrum", "--jmax", "1", "--dirac", "1,0,-1,0",
             "--out", str(out), "--no-figure"]
        )
        assert code == 0
        rows = read_csv(out)[1:]
        assert [r[0] for r in rows] == ["0", "0.5", "-0.5"]


class TestDecayCommand:
    def test_certificate_and_blocks(self, tmp_path, capsys):
        out = tmp_path / "cert.json"
        code = main(
            ["decay", "[piiop_hat(a),pi_hat(a)]", "--q", "0.5", "--jmax", "12",
             "--out", str(out), "--no-figure"]
        )
        assert code == 0
        cert = json.loads(out.read_text())
        assert cert["label"] == "[piiop_hat(a),pi_hat(a)]"
        assert cert["q"] == "0.5"
        assert cert["verdict"] == "certified at rate 2"
        assert cert["rate"] >= 2.0 - 0.15
        blocks = read_csv(tmp_path / "cert-blocks.csv")
        assert blocks[0] == ["j", "norm"]
        assert len(blocks) == 1 + len(cert["block_norms"])
        # stdout carries the same certificate for piping
        assert '"verdict": "certified at rate 2"' in capsys.readouterr().out

    def test_window_and_alpha_flags(self, tmp_path):
        out = tmp_path / "cert.json"
        code = main(
            ["decay", "Lq", "--q", "0.5", "--jmax", "10", "--alpha", "1",
             "--window", "1,4", "--out", str(out), "--no-figure"]
        )
        assert code == 0
        cert = json.loads(out.read_text())
        assert cert["verdict"] == "certified at rate 1"
        assert cert["rate"] == pytest.approx(1.0, abs=1e-9)

    def test_figure_rendered(self, tmp_path):
        out = tmp_path / "cert.json"
        assert main(["decay", "Lq", "--jmax", "8", "--out", str(out)]) == 0
        assert (tmp_path / "cert.png").exists()

    def test_unknown_expression_is_usage_error(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["decay", "bogus(a)", "--jmax", "4", "--out", str(tmp_path / "x.json")])
        assert exc.value.code == 2
        err = capsys.readouterr().err
        assert "unknown operator expression" in err
        assert "piiop_hat(g)" in err


class TestGrowthCommand:
    def test_bounded_table(self, tmp_path, capsys):
        out = tmp_path / "growth.csv"
        code = main(
            ["growth", "--q", "0.5", "--grid", "3,4,5", "--generator", "a",
             "--out", str(out), "--no-figure"]
        )
        assert code == 0
        rows = read_csv(out)
        assert rows[0] == ["jmax", "norm"]
        assert [r[0] for r in rows[1:]] == ["3", "4", "5"]
        norms = [float(r[1]) for r in rows[1:]]
        assert norms[-1] == pytest.approx(norms[0], rel=1e-6)
        assert "classification: bounded" in capsys.readouterr().out

    def test_diverging_q_dirac(self, tmp_path, capsys):
        out = tmp_path / "growth.csv"
        code = main(
            ["growth", "--q", "0.5", "--dirac", "qdirac", "--grid", "3,4,5",
             "--out", str(out), "--no-figure"]
        )
        assert code == 0
        assert "classification: diverging" in capsys.readouterr().out

    def test_grid_needs_three_points(self):
        with pytest.raises(SystemExit) as exc:
            main(["growth", "--grid", "3,4"])
        assert exc.value.code == 2


class TestExportCommand:
    def test_round_trip_is_exact(self, tmp_path):
        out = tmp_path / "op.txt"
        code = main(
            ["export", "[D,pi_prime(a)]", "--q", "0.5", "--jmax", "6",
             "--out", str(out)]
        )
        assert code == 0
        op, q_text = load_operator(out)
        assert q_text == "0.5"
        basis = enumerate_basis("spinor", 3)
        ref = commutator(
            build_dirac(isospectral_spec(), basis), build_pi_prime("a", basis, 0.5)
        )
        assert (op.mat != ref.mat).nnz == 0

    def test_header_echoes_q_verbatim(self, tmp_path):
        out = tmp_path / "op.txt"
        main(["export", "T", "--q", "0.50", "--jmax", "2", "--out", str(out)])
        assert out.read_text().splitlines()[0] == (
            "# basis=spinor jmax=2 q=0.50 antilinear=0"
        )


class TestArgumentValidation:
    @pytest.mark.parametrize(
        "argv",
        [
            ["spectrum", "--q", "1.5"],
            ["spectrum", "--q", "0"],
            ["spectrum", "--q", "half"],
            ["spectrum", "--jmax", "-2"],
            ["spectrum", "--dirac", "nice"],
            ["verify", "--tol", "interior"],
            ["verify", "--tol", "bogus=1e-9"],
            ["decay", "Lq", "--window", "3"],
        ],
    )
    def test_bad_arguments_exit_2(self, argv, capsys):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2

    def test_q_range_message(self, capsys):
        with pytest.raises(SystemExit):
            main(["spectrum", "--q", "1.5"])
        assert "strictly between 0 and 1" in capsys.readouterr().err


class TestVerifyCommand:
    def test_small_suite_passes_with_report(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = main(
            ["verify", "--q", "0.5", "--jmax", "6", "--dirac", "isospectral",
             "--grid", "3,4,5", "--out", str(out)]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["schema"] == "qsu2-verify/1"
        assert report["overall"] == "pass"
        assert report["config"]["q"] == "0.5"
        assert len(report["checks"]) == 12
        stdout = capsys.readouterr().out
        assert "overall: pass" in stdout
        assert "representation-relations: pass" in stdout

    def test_tolerance_override_fails_suite(self, tmp_path, monkeypatch):
        monkeypatch.setenv("QSU2_THREADS", "2")
        out = tmp_path / "report.json"
        code = main(
            ["verify", "--jmax", "6", "--tol", "interior=1e-30",
             "--grid", "3,4,5", "--out", str(out)]
        )
        assert code == 1
        report = json.loads(out.read_text())
        assert report["overall"] == "fail"

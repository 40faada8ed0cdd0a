"""End-to-end CLI contract: subcommands, exit codes, formats, determinism."""

from __future__ import annotations

import json

import numpy as np
import pytest

from holorigid.cli import main

SQUARE = {"dim": 1, "components": [[{"alpha": [2], "re": 1.0, "im": 0.0}]]}
HALF = {"dim": 1, "components": [[{"alpha": [1], "re": 0.5, "im": 0.0}]]}
DOUBLE = {"dim": 1, "components": [[{"alpha": [1], "re": 2.0, "im": 0.0}]]}
TRANSLATION = {"dim": 1, "components": [[{"alpha": [0], "re": 1.0},
                                         {"alpha": [1], "re": 1.0}]]}
DIAG_2_HALF = {"dim": 2, "components": [
    [{"alpha": [1, 0], "re": 2.0}], [{"alpha": [0, 1], "re": 0.5}]]}
SQUARE_2D = {"dim": 2, "components": [
    [{"alpha": [2, 0], "re": 1.0}], [{"alpha": [0, 1], "re": 1.0}]]}
AFFINE_2D = {"dim": 2, "components": [
    [{"alpha": [1, 0], "re": 0.5}], [{"alpha": [0, 1], "re": 0.5}]]}
WEIGHT_ONE = {"dim": 1, "terms": [{"alpha": [0], "re": 1.0}]}
WEIGHT_Z = {"dim": 1, "terms": [{"alpha": [1], "re": 1.0}]}
HENON_STD = {"factors": [{"p": [-3, 0, 1], "delta": [0.3, 0.0]}]}


@pytest.fixture
def write(tmp_path):
    def _write(name, doc):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)
    return _write


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip().startswith("{") else out


class TestGraded:
    def test_power_eigenvalue(self, capsys, write):
        code, doc = run(capsys, ["graded", write("f.json", DOUBLE),
                                 write("u.json", WEIGHT_ONE),
                                 "--point", "0", "--n", "3"])
        assert code == 0
        assert doc["eigenvalues"] == [[8.0, 0.0]]
        assert doc["max_entry_mismatch"] <= 1e-10
        assert doc["eigenvalue_law_match"]

    def test_diagonal_law(self, capsys, write):
        code, doc = run(capsys, ["graded", write("f.json", DIAG_2_HALF),
                                 "--point", "0,0", "--n", "2"])
        assert code == 0
        moduli = sorted(abs(complex(re, im)) for re, im in doc["eigenvalues"])
        assert moduli == pytest.approx([0.25, 1.0, 4.0])

    def test_self_check_failure_exits_2(self, capsys, write, monkeypatch):
        import holorigid.cli as cli_mod

        def broken(u, f, n):
            good = cli_mod.graded_matrix_formula(1.0, np.array([[2.0]]), n)
            return type(good)(n, 1, good.entries + 1.0, good.basis_order)

        monkeypatch.setattr(cli_mod, "graded_matrix_bruteforce", broken)
        code, _ = run(capsys, ["graded", write("f.json", DOUBLE),
                               "--point", "0", "--n", "3"])
        assert code == 2


class TestCertify:
    def test_square_bounded_unbounded(self, capsys, write):
        code, doc = run(capsys, ["certify", write("f.json", SQUARE),
                                 "--mode", "bounded"])
        assert code == 0
        assert doc["verdict"] == "Unbounded"
        assert doc["witness"]["eigenvalue"] == [2.0, 0.0]
        assert doc["witness"]["point"] == [[1.0, 0.0]]
        assert any("graded image" in a for a in doc["assumptions"])

    def test_contraction_clear(self, capsys, write):
        code, doc = run(capsys, ["certify", write("f.json", HALF),
                                 "--mode", "bounded"])
        assert code == 0 and doc["verdict"] == "NoObstruction"

    def test_translation_hypercyclic_clear(self, capsys, write):
        code, doc = run(capsys, ["certify", write("f.json", TRANSLATION),
                                 "--mode", "hypercyclic", "--r", "3"])
        assert code == 0 and doc["verdict"] == "NoObstruction"
        assert doc["witness"]["search_complete"]

    def test_affine_with_fixed_point_not_hypercyclic(self, capsys, write):
        affine = {"dim": 1, "components": [[{"alpha": [0], "re": 0.5},
                                            {"alpha": [1], "re": 0.5}]]}
        code, doc = run(capsys, ["certify", write("f.json", affine),
                                 "--mode", "hypercyclic"])
        assert code == 0 and doc["verdict"] == "NotHypercyclic"
        assert doc["witness"]["point"] == [[1.0, 0.0]]  # b/(1-a) = 1

    def test_cyclic_count_four(self, capsys, write):
        code, doc = run(capsys, ["certify", write("f.json", SQUARE),
                                 write("u.json", WEIGHT_ONE),
                                 "--mode", "cyclic", "--r", "2"])
        assert code == 0
        assert doc["verdict"] == "NotCyclic"
        assert doc["witness"]["count"] == 4
        assert doc["witness"]["lambda"] == [1.0, 0.0]

    def test_vanishing_weight_inapplicable_exit_3(self, capsys, write):
        code, doc = run(capsys, ["certify", write("f.json", HALF),
                                 write("u.json", WEIGHT_Z),
                                 "--mode", "bounded"])
        assert code == 3
        assert doc["verdict"] == "Inapplicable"

    def test_point_override(self, capsys, write):
        code, doc = run(capsys, ["certify", write("f.json", SQUARE),
                                 "--mode", "compact", "--point", "1"])
        assert code == 0
        assert doc["verdict"] == "NonCompact"
        assert doc["witness"]["abs_eigenvalue"] == 2.0

    def test_supercyclic_mode(self, capsys, write):
        code, doc = run(capsys, ["certify", write("f.json", SQUARE),
                                 "--mode", "supercyclic"])
        assert code == 0 and doc["verdict"] == "NotSupercyclic"
        assert "dim V >= 2" in doc["assumptions"]


class TestSearchRepelling:
    def test_square_component(self, capsys, write, tmp_path):
        prof = tmp_path / "profile.csv"
        code, doc = run(capsys, ["search-repelling", write("f.json", SQUARE_2D),
                                 "--s-range=-1.0:2.5", "--s-steps", "25",
                                 "--starts", "80", "--grid-starts", "12",
                                 "--profile-out", str(prof), "--seed", "3"])
        assert code == 0
        assert doc["eta"] == pytest.approx(2.0, abs=1e-3)
        assert doc["residual_fix"] <= 1e-6
        assert doc["residual_eigvec"] <= 1e-6
        lines = prof.read_text().splitlines()
        assert lines[0] == "s,H,H_prime"
        assert len(lines) == 26

    def test_affine_exit_4(self, capsys, write):
        code, _ = run(capsys, ["search-repelling", write("f.json", AFFINE_2D)])
        assert code == 4

    def test_bad_range_recoverable(self, capsys, write):
        code, _ = run(capsys, ["search-repelling", write("f.json", SQUARE_2D),
                               "--s-range=-4.0:-3.0", "--s-steps", "5"])
        assert code == 1


class TestFock:
    def test_contraction_profile(self, capsys, write, tmp_path):
        prof = tmp_path / "p.csv"
        code, doc = run(capsys, ["fock", write("f.json", HALF), "--N", "12",
                                 "--profile-out", str(prof)])
        assert code == 0
        assert doc["truncated_norm"] == pytest.approx(1.0, abs=1e-9)
        for row in doc["profile"]:
            assert row["norm"] == pytest.approx(2.0 ** -row["n"], abs=1e-9)
        assert "n,norm,flag" in prof.read_text()

    def test_square_sweep_diverges_with_loss_stars(self, capsys, write, tmp_path):
        sweep = tmp_path / "s.csv"
        code, doc = run(capsys, ["fock", write("f.json", SQUARE), "--N", "14",
                                 "--sweep-out", str(sweep)])
        assert code == 0
        norms = [row["norm"] for row in doc["sweep"]]
        assert norms[-1] > norms[2] > 1.0
        text = sweep.read_text().splitlines()
        assert any(line.endswith("*") for line in text[1:])
        assert doc["truncation_loss"]

    def test_matrix_dump(self, capsys, write, tmp_path):
        out = tmp_path / "m.json"
        code, _ = run(capsys, ["fock", write("f.json", HALF), "--N", "4",
                               "--matrix-out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["basis"] == [[0], [1], [2], [3], [4]]
        assert doc["entries"][1][1] == [0.5, 0.0]


class TestHenonCommand:
    def test_standard_saddle(self, capsys, write):
        code, doc = run(capsys, ["henon", write("h.json", HENON_STD),
                                 "--r-max", "1", "--starts", "120"])
        assert code == 0
        assert doc["verdict"] == "Unbounded"
        assert doc["witness"]["stability"] == "saddle"

    def test_zero_delta_schema_error(self, capsys, write):
        bad = {"factors": [{"p": [0, 0, 1], "delta": 0}]}
        code, _ = run(capsys, ["henon", write("h.json", bad)])
        assert code == 1


class TestDuality:
    def test_random_instances_agree(self, capsys):
        code, doc = run(capsys, ["duality", "--instances", "30", "--seed", "7"])
        assert code == 0
        assert doc["all_agree"] and doc["disagreements"] == 0

    def test_explicit_input(self, capsys, tmp_path):
        lb = {"L": [[[0.0, 0.0]], [[0.0, 0.0]]],
              "B": [[[1.0, 0.0]], [[0.0, 1.0]]]}
        path = tmp_path / "lb.json"
        path.write_text(json.dumps(lb))
        code, doc = run(capsys, ["duality", "--input", str(path)])
        assert code == 0
        assert doc["image_cond"] and doc["kernel_cond"] and doc["agree"]


class TestContract:
    def test_unknown_flag_is_usage_error(self, capsys, write):
        code, _ = run(capsys, ["certify", write("f.json", SQUARE),
                               "--mode", "bounded", "--bogus"])
        assert code == 1

    def test_schema_error_names_field(self, capsys, write):
        code = main(["certify", write("f.json", {"dim": 1}),
                     "--mode", "bounded"])
        captured = capsys.readouterr()
        assert code == 1
        assert "missing field 'components'" in captured.err

    def test_determinism_byte_identical(self, capsys, write):
        argv = ["certify", write("f.json", SQUARE), "--mode", "bounded",
                "--seed", "9"]
        main(argv)
        first = capsys.readouterr().out
        main(argv)
        second = capsys.readouterr().out
        assert first == second

    def test_human_format_renders_same_payload(self, capsys, write):
        code, text = run(capsys, ["certify", write("f.json", SQUARE),
                                  "--mode", "bounded", "--format", "human"])
        assert code == 0
        assert 'verdict: "Unbounded"' in text

    def test_seed_env_override(self, capsys, write, monkeypatch):
        monkeypatch.setenv("HOLO_SEED", "123")
        code, doc = run(capsys, ["certify", write("f.json", SQUARE),
                                 "--mode", "bounded"])
        assert code == 0
        assert doc["metadata"]["seed"] == 123

    def test_output_file(self, capsys, write, tmp_path):
        out = tmp_path / "cert.json"
        code, _ = run(capsys, ["certify", write("f.json", SQUARE),
                               "--mode", "bounded", "--out", str(out)])
        assert code == 0
        assert json.loads(out.read_text())["verdict"] == "Unbounded"

"""Command-line interface: exit codes, output format, SSBN dumps."""

from __future__ import annotations

import json
import subprocess
import sys

import pytest

from mebnkit import corpus
from mebnkit.cli import main

MODEL = str(corpus.model_path())
FINDINGS = str(corpus.findings_path("two_spills"))
QUERY = "SeverityLevel(region_1)?"


def run_infer(capsys, *extra, model=MODEL, findings=FINDINGS, query=QUERY):
    code = main(
        ["infer", "--model", model, "--findings", findings, "--query", query, *extra]
    )
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_validate_ok(capsys):
    assert main(["validate", MODEL]) == 0
    assert capsys.readouterr().out == "OK\n"


def test_validate_missing_file(capsys):
    assert main(["validate", "/nonexistent/model.mtheory"]) == 1
    assert "error" in capsys.readouterr().err


def test_validate_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.mtheory"
    bad.write_text("mfrag {")
    assert main(["validate", str(bad)]) == 2
    assert "expected" in capsys.readouterr().err


def test_validate_violations(tmp_path, capsys):
    bad = tmp_path / "bad.mtheory"
    bad.write_text(
        "entity T\nstates S { A, B }\nrandom F(T) -> S\n"
        "mfrag F { ovar x: T resident F(x) { prior [0.5, 0.6] } }\n"
    )
    assert main(["validate", str(bad)]) == 3
    assert "non-normalized-row" in capsys.readouterr().out


def test_infer_output_format(capsys):
    code, out, err = run_infer(capsys)
    assert code == 0
    assert out == "VerySerious 0.898000\nSerious 0.081400\nMinor 0.020600\n"
    lines = out.splitlines()
    total = sum(float(l.split()[1]) for l in lines)
    assert abs(total - 1.0) <= 1e-6


def test_engines_print_identical_text(capsys):
    _, out_ve, _ = run_infer(capsys, "--engine", "ve")
    _, out_enum, _ = run_infer(capsys, "--engine", "enumerate")
    assert out_ve == out_enum


def test_infer_matches_snapshots(capsys):
    for variant in ("one_spill", "two_spills", "three_spills"):
        code, out, _ = run_infer(capsys, findings=str(corpus.findings_path(variant)))
        assert code == 0
        assert out == corpus.snapshot_path(variant).read_text(encoding="utf-8")


def test_infer_unknown_instance(capsys):
    code, out, err = run_infer(capsys, query="SeverityLevel(region_9)?")
    assert code == 3
    assert "unknown entity instance" in err
    assert out == ""


def test_infer_query_syntax_error(capsys):
    code, _, err = run_infer(capsys, query="SeverityLevel region_1")
    assert code == 2
    assert "syntax error" in err


def test_infer_findings_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.findings"
    bad.write_text("Thickness(spill_1)=Thick\n")
    code, _, err = run_infer(capsys, findings=str(bad))
    assert code == 2
    assert "isA before use" in err


def test_infer_model_io_error(capsys):
    code, _, err = run_infer(capsys, model="/nonexistent.mtheory")
    assert code == 1


def test_infer_impossible_evidence(tmp_path, capsys):
    model = tmp_path / "det.mtheory"
    model.write_text(
        """
        entity Thing
        states Bool { T, F }
        random Src(Thing) -> Bool
        random Copy(Thing) -> Bool
        mfrag Src {
          ovar x: Thing
          resident Src(x) { prior [1.0, 0.0] }
        }
        mfrag Copy {
          ovar x: Thing
          input Src(x)
          resident Copy(x) {
            table [Src(x)] {
              (T): [1.0, 0.0]
              (F): [0.0, 1.0]
            }
          }
        }
        """
    )
    findings = tmp_path / "contradiction.findings"
    findings.write_text("isA(x1, Thing)=True\nCopy(x1)=F\n")
    code, _, err = run_infer(
        capsys, model=str(model), findings=str(findings), query="Src(x1)?"
    )
    assert code == 4
    assert "zero probability" in err


def test_dump_ssbn_dot(tmp_path, capsys):
    path = tmp_path / "net.dot"
    code, out, _ = run_infer(capsys, "--dump-ssbn", str(path))
    assert code == 0
    dot = path.read_text(encoding="utf-8")
    assert len([l for l in dot.splitlines() if "[label=" in l]) == 9
    assert len([l for l in dot.splitlines() if " -> " in l]) == 10


def test_dump_ssbn_json_via_flag(tmp_path, capsys):
    path = tmp_path / "net.out"
    code, *_ = run_infer(capsys, "--dump-ssbn", str(path), "--format", "json")
    assert code == 0
    doc = json.loads(path.read_text(encoding="utf-8"))
    assert len(doc["nodes"]) == 9


def test_dump_format_required_for_odd_extension(tmp_path, capsys):
    path = tmp_path / "net.out"
    code, _, err = run_infer(capsys, "--dump-ssbn", str(path))
    assert code == 2
    assert "--format" in err


def test_dump_twice_is_byte_identical(tmp_path, capsys):
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    run_infer(capsys, "--dump-ssbn", str(p1))
    run_infer(capsys, "--dump-ssbn", str(p2))
    assert p1.read_bytes() == p2.read_bytes()


def test_verbose_reports_structure(capsys):
    code, _, err = run_infer(capsys, "--verbose")
    assert code == 0
    assert "9 nodes, 10 edges" in err


def test_console_entry_point_runs():
    result = subprocess.run(
        [
            sys.executable,
            "-m",
            "mebnkit",
            "infer",
            "--model",
            MODEL,
            "--findings",
            FINDINGS,
            "--query",
            QUERY,
        ],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert result.stdout == "VerySerious 0.898000\nSerious 0.081400\nMinor 0.020600\n"


def test_warnings_go_to_stderr(tmp_path, capsys):
    findings = tmp_path / "extra.findings"
    findings.write_text(
        corpus.findings_path("two_spills").read_text(encoding="utf-8")
        + "isA(spill_9, Spill)=True\n"
    )
    code, out, err = run_infer(capsys, findings=str(findings))
    assert code == 0
    assert "unresolved context" in err
    assert "unresolved" not in out


def test_version_flag():
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0


def test_corpus_path_rejects_unknown_name():
    with pytest.raises(FileNotFoundError):
        corpus.corpus_path("not_a_corpus_file.txt")


def test_dump_one_spill_dot_counts(tmp_path, capsys):
    path = tmp_path / "one.dot"
    code, *_ = run_infer(
        capsys,
        "--dump-ssbn",
        str(path),
        findings=str(corpus.findings_path("one_spill")),
    )
    assert code == 0
    dot = path.read_text(encoding="utf-8")
    assert len([l for l in dot.splitlines() if "[label=" in l]) == 6
    assert len([l for l in dot.splitlines() if " -> " in l]) == 5
